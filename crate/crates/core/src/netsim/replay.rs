use super::receiver::{P3Policy, Receiver};
use crate::error::Result;
use crate::uncertainty::ChannelRealization;

/// Held values and `w` obtained by running a realization through the
/// simulator's receiver in physical time (instants shifted by `tau_a`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Replay {
    pub received: Vec<i64>,
    pub w: Vec<i64>,
    pub selections: Vec<Option<usize>>,
}

pub fn replay_uncertainty(real: &ChannelRealization) -> Result<Replay> {
    let win = real.window;
    let shift = win.tau_a as i64;
    let mut rx = Receiver::new(
        real.protocol,
        P3Policy::Scripted {
            choices: real.selections.clone(),
        },
    );
    let mut out = Replay {
        received: Vec::with_capacity(win.len()),
        w: Vec::with_capacity(win.len()),
        selections: Vec::with_capacity(win.len()),
    };
    for (p, k) in win.instants().enumerate() {
        let j = p;
        if j < real.delays.len() {
            rx.send(
                j,
                j as i64,
                real.delays[j] + shift,
                win.input_sum(j as i64) as f64,
            );
        }
        let (sel, held) = rx.receive(p as i64)?;
        let c = held as i64;
        out.selections.push(sel);
        out.received.push(c);
        out.w.push(c - win.input_sum(k));
    }
    Ok(out)
}
