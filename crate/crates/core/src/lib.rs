//! Small-gain stability analysis for networked control loops whose output
//! packets suffer bounded, time-varying delays.
//!
//! The crate covers the nominal loop ([`ltisys`]), the worst-case l2 gain of
//! the delay uncertainty for two receiver protocols ([`uncertainty`]), the
//! combined stability verdict ([`criterion`]) and a packetized closed-loop
//! simulator ([`netsim`]). [`config`] holds the TOML run configuration.

pub mod config;
pub mod criterion;
pub mod error;
pub mod format;
pub mod ltisys;
pub mod netsim;
pub mod uncertainty;

pub use error::{Error, Result};
