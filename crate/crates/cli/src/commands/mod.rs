pub mod capacity;
pub mod idcode;
pub mod scaling;
pub mod simulate;
pub mod sweep;
