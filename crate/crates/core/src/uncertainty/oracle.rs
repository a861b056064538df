//! Exact worst case of the uncertainty block over all delay assignments and,
//! for P3, all same-instant choices.
//!
//! Rather than enumerating the `(span + 1)^(T + 1)` delay vectors, the search
//! walks the window instant by instant. Packet `j` can arrive in
//! `[j - tau_a, j + span - tau_a]`, so at instant `k` only packets
//! `k + tau_a - span ..= k + tau_a` are undecided; a bit mask of those still
//! in flight plus the receiver state is a complete state. Choosing which
//! pending packets arrive now (the oldest must, its window closes) and which
//! one the receiver takes covers exactly the same set of outcomes as the
//! delay-vector enumeration. Maximization is memoized and exact in integers.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::response::{uncertainty_response, ChannelRealization, Selection};
use super::setup::{GainWindow, Protocol};
use crate::error::{Error, Result};

/// Default bound on the estimated search work.
pub const DEFAULT_BUDGET: u64 = 20_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub alpha_t: f64,
    pub norm_sq: i64,
    pub witness: ChannelRealization,
}

/// Upper estimate of the transitions the search may visit.
pub fn search_work(protocol: Protocol, window: &GainWindow) -> u64 {
    let receiver_states = match protocol {
        Protocol::P1 => window.packet_count() as u64 + 1,
        Protocol::P3 => window.truncation as u64 + 2,
    };
    let subsets = 3u64.saturating_pow(window.span + 1);
    (window.len() as u64)
        .saturating_mul(receiver_states)
        .saturating_mul(subsets)
}

pub fn oracle_gain(protocol: Protocol, window: GainWindow, budget: u64) -> Result<OracleResult> {
    let required = search_work(protocol, &window);
    if required > budget {
        return Err(Error::BudgetExceeded { required, budget });
    }
    let mut search = Search {
        protocol,
        window,
        memo: HashMap::new(),
    };
    let start = State {
        k: window.first_instant(),
        mask: 1 << window.span,
        recv: -1,
    };
    let norm_sq = search.best(start);

    // replay the first maximal decision sequence
    let n = window.span as i64;
    let a = window.tau_a as i64;
    let mut arrival = vec![None; window.packet_count()];
    let mut script = Vec::with_capacity(window.len());
    let mut state = start;
    while state.k <= window.last_instant() {
        let (_, choice) = search.memo[&state];
        let base = state.k + a - n;
        for i in 0..=window.span {
            if choice.arrive >> i & 1 == 1 {
                arrival[(base + i as i64) as usize] = Some(state.k);
            }
        }
        script.push(choice.take.map(|i| (base + i as i64) as usize));
        state = search.next(state, choice);
    }
    let delays: Vec<i64> = arrival
        .iter()
        .enumerate()
        .map(|(j, t)| {
            // still in flight at the end of the window: arrive right after it
            let t = t.unwrap_or((j as i64 - a).max(window.last_instant() + 1));
            t - j as i64
        })
        .collect();

    let witness = uncertainty_response(protocol, window, &delays, Selection::Scripted(&script))?;
    debug_assert_eq!(witness.norm_sq, norm_sq);
    Ok(OracleResult {
        alpha_t: window.alpha(norm_sq),
        norm_sq,
        witness,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct State {
    k: i64,
    /// Bit `i` set: packet `k + tau_a - span + i` has not arrived yet.
    mask: u32,
    /// P1: index of the last packet taken; P3: held value. -1 before anything.
    recv: i64,
}

#[derive(Debug, Clone, Copy)]
struct Choice {
    arrive: u32,
    take: Option<u32>,
}

struct Search {
    protocol: Protocol,
    window: GainWindow,
    memo: HashMap<State, (i64, Choice)>,
}

impl Search {
    fn held(&self, recv: i64) -> i64 {
        match self.protocol {
            Protocol::P1 if recv >= 0 => self.window.input_sum(recv),
            Protocol::P1 => 0,
            Protocol::P3 => recv.max(0),
        }
    }

    fn next(&self, s: State, choice: Choice) -> State {
        let base = s.k + self.window.tau_a as i64 - self.window.span as i64;
        let recv = match choice.take {
            None => s.recv,
            Some(i) => match self.protocol {
                Protocol::P1 => base + i as i64,
                Protocol::P3 => self.window.input_sum(base + i as i64),
            },
        };
        State {
            k: s.k + 1,
            mask: ((s.mask & !choice.arrive) >> 1) | 1 << self.window.span,
            recv,
        }
    }

    fn best(&mut self, s: State) -> i64 {
        if s.k > self.window.last_instant() {
            return 0;
        }
        if let Some(&(v, _)) = self.memo.get(&s) {
            return v;
        }
        let span = self.window.span;
        let base = s.k + self.window.tau_a as i64 - span as i64;
        // packets with negative index do not exist
        let valid = if base >= 0 {
            u32::MAX
        } else {
            u32::MAX << (-base).min(31) as u32
        };
        let pending = s.mask & valid & ((1 << (span + 1)) - 1);
        let forced = pending & 1;
        let a = self.window.input_sum(s.k);

        let mut best: Option<(i64, Choice)> = None;
        // ascending enumeration of the subsets of `pending`
        let mut sub = 0u32;
        loop {
            if sub & forced == forced {
                for take in self.takes(s, sub) {
                    let choice = Choice { arrive: sub, take };
                    let nxt = self.next(s, choice);
                    let c = self.held(nxt.recv);
                    let v = (c - a).pow(2) + self.best(nxt);
                    if best.is_none_or(|(b, _)| v > b) {
                        best = Some((v, choice));
                    }
                }
            }
            if sub == pending {
                break;
            }
            sub = (sub.wrapping_sub(pending)) & pending;
        }
        let best = best.expect("at least one choice");
        self.memo.insert(s, best);
        best.0
    }

    fn takes(&self, s: State, arrive: u32) -> Vec<Option<u32>> {
        let bits = (0..=self.window.span).filter(|i| arrive >> i & 1 == 1);
        match self.protocol {
            Protocol::P1 => {
                let base = s.k + self.window.tau_a as i64 - self.window.span as i64;
                vec![bits.filter(|&i| base + i as i64 > s.recv).max()]
            }
            Protocol::P3 => {
                let v: Vec<_> = bits.map(Some).collect();
                if v.is_empty() {
                    vec![None]
                } else {
                    v
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(protocol: Protocol, w: GainWindow) -> i64 {
        // enumerate the delays of packets 0..packet_count directly
        let n = w.packet_count();
        let choices = (w.span + 1) as usize;
        let mut best = 0;
        let mut idx = vec![0usize; n];
        loop {
            let delays: Vec<i64> = idx.iter().map(|&i| i as i64 + w.min_delay()).collect();
            let r = uncertainty_response(protocol, w, &delays, Selection::Worst).unwrap();
            best = best.max(r.norm_sq);
            let mut pos = 0;
            loop {
                if pos == n {
                    return best;
                }
                idx[pos] += 1;
                if idx[pos] < choices {
                    break;
                }
                idx[pos] = 0;
                pos += 1;
            }
        }
    }

    #[test]
    fn matches_full_enumeration() {
        for (span, tau_a, t) in [
            (1, 0, 0),
            (1, 1, 2),
            (2, 0, 1),
            (2, 1, 2),
            (2, 2, 1),
            (3, 2, 0),
        ] {
            let w = GainWindow::new(span, tau_a, t).unwrap();
            for p in [Protocol::P1, Protocol::P3] {
                let o = oracle_gain(p, w, DEFAULT_BUDGET).unwrap();
                assert_eq!(o.norm_sq, brute(p, w), "{p} {span} {tau_a} {t}");
                assert_eq!(o.witness.norm_sq, o.norm_sq);
            }
        }
    }

    #[test]
    fn single_span_single_sample() {
        let w = GainWindow::new(1, 0, 0).unwrap();
        let o = oracle_gain(Protocol::P1, w, DEFAULT_BUDGET).unwrap();
        assert_eq!(o.alpha_t, 1.0);
    }

    #[test]
    fn budget_is_enforced() {
        let w = GainWindow::new(12, 6, 40).unwrap();
        assert!(matches!(
            oracle_gain(Protocol::P3, w, 1000),
            Err(Error::BudgetExceeded { budget: 1000, .. })
        ));
    }
}
