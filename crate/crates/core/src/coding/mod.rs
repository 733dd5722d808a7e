//! Transmission and identification codes.

mod estimate;
pub mod field;
mod identification;
mod transmission;

pub use estimate::{
    id_errors_exact, id_errors_mc, id_errors_mc_pairs, select_pairs, ErrorReport, ExactAnalyzer, IdPair, IdentityEntry,
    Method, PairCoverage, PairEntry, PairSelection, ALL_PAIRS_IDENTITY_LIMIT, EXACT_STATE_LIMIT,
};
pub use identification::{
    deterministic_variant, make_tag_code, second_kind_bound, IdentificationCode, Identity, TagCode, TagCodeParams,
    TagCodeSpec,
};
pub use transmission::{
    decoded_law, for_each_output, make_repetition_code, transmission_error, transmission_error_mc, Decision, Estimate,
    RepetitionCode, TransmissionCode, TRANSMISSION_ENUMERATION_BITS,
};
