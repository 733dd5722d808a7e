//! Joint detection and identification.
//!
//! An identification-coding core over discrete memoryless channels ([`channel`], [`coding`])
//! and a closed-loop simulator ([`population`], [`sensing`], [`controller`]) in which a
//! controller watches a device population and broadcasts identification-coded instructions
//! to the subset it wants activated.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod coding;
pub mod controller;
pub mod error;
pub mod population;
pub mod rng;
pub mod scalar;
pub mod sensing;

pub use error::{Error, Result};
pub use scalar::{Rational, Scalar};

pub type Dmc32 = channel::Dmc<f32>;
pub type Dmc64 = channel::Dmc<f64>;
pub type DmcExact = channel::Dmc<Rational>;
pub type ErrorReport64 = coding::ErrorReport<f64>;
pub type ErrorReportExact = coding::ErrorReport<Rational>;
