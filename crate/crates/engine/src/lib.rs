//! Derivation of repair- and impairment-indicating application conditions
//! and the ranking and greedy repair built on them.

pub mod overlap;
pub mod ranking;
pub mod repair_ac;
pub mod shift;
