//! The `V_L` family: vector enumeration, series criterion, independence checks,
//! non-ergodicity witnesses and the sweeping probe.

pub mod independence;
pub mod series;
pub mod sweep;
pub mod vectors;
pub mod vl;
pub mod witness;
