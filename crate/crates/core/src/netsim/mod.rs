//! Packetized closed-loop simulation: plant and controller as difference
//! equations, a channel applying per-packet delays and the protocol receiver.

mod adversarial;
mod realize;
mod receiver;
mod replay;
mod sim;

pub use adversarial::{
    adversarial_search, candidates, greedy_pattern, schedule_from_preferences, Candidate,
    SearchOptions, SearchOutcome, DEFAULT_LOOKAHEAD, DEFAULT_SEARCH_BUDGET,
};
pub use realize::Recurrence;
pub use receiver::{P3Policy, PacketEvent, PacketStatus, Receiver};
pub use replay::{replay_uncertainty, Replay};
pub use sim::{
    simulate, DelaySource, LoopController, Reference, SimConfig, SimTrace, DIVERGENCE_FACTOR,
    DIVERGENCE_RUN,
};
