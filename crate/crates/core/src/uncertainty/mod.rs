//! Worst-case l2 gain of the packetized delay uncertainty.
//!
//! The block maps the running sum `a_k` of a constant input to `w_k = c_k - a_k`,
//! where `c_k` is the value held by the receiver. Delays are in shifted
//! coordinates, `tau_j - tau_lo - tau_a`, so they lie in `[-tau_a, span - tau_a]`.

mod families;
mod optimal;
mod oracle;
mod response;
mod setup;

pub use families::{
    families_for, family_max, gain_p1, gain_p1_limit, gain_p3_dprime, gain_p3_prime,
    gain_p3_prime_limit, gain_p3_tprime, tau_bar, worst_case_pattern, Family,
};
pub use optimal::{
    causal_gain, default_t_max, family_gain, optimal_p1, optimal_p3, optimize, overestimate_p3,
    shift_gain, table1, table1_csv, FamilyGain, GainResult, ShiftGain, Table1Row, TIE_TOL,
};
pub use oracle::{oracle_gain, search_work, OracleResult, DEFAULT_BUDGET};
pub use response::{complete_delays, uncertainty_response, ChannelRealization, Selection};
pub use setup::{DelaySpec, GainWindow, Protocol};
