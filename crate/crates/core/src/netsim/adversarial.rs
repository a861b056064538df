use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::receiver::P3Policy;
use super::sim::{simulate, DelaySource, LoopCore, SimConfig, SimTrace};
use crate::error::{Error, Result};
use crate::uncertainty::{Family, GainWindow, Protocol};

/// Default number of simulations an adversarial search may run.
pub const DEFAULT_SEARCH_BUDGET: usize = 4000;
/// Candidates simulated per parallel batch.
const CHUNK: usize = 64;
/// Lookahead of the per-instant adversary.
pub const DEFAULT_LOOKAHEAD: usize = 40;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchOptions {
    pub budget: usize,
    /// Longest period of the exhaustive periodic patterns.
    pub max_period: usize,
    pub seed: u64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            budget: DEFAULT_SEARCH_BUDGET,
            max_period: 4,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub label: String,
    /// Physical delay per packet.
    pub pattern: Vec<u32>,
    pub policy: P3Policy,
    pub diverged: bool,
    pub divergence_instant: Option<usize>,
    /// Output energy over the last tenth of the horizon.
    pub tail_energy: f64,
    pub evaluated: usize,
    pub trace: SimTrace,
}

/// One delay pattern (physical delay per packet) with the receiver policy to use.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub label: String,
    pub delays: Vec<u32>,
    pub policy: P3Policy,
}

fn family_patterns(
    tau_lo: u32,
    tau_hi: u32,
    horizon: usize,
) -> impl Iterator<Item = (String, Vec<u32>)> {
    let span = tau_hi - tau_lo;
    let clamp = move |d: i64| d.clamp(tau_lo as i64, tau_hi as i64) as u32;
    (0..=span).flat_map(move |tau_a| {
        Family::ALL.into_iter().filter_map(move |f| {
            // the late burst of the last family is placed mid-horizon
            let t = if f == Family::P3TriplePrime {
                (horizon / 2) as u32
            } else {
                horizon as u32
            };
            let w = GainWindow::new(span, tau_a, t.max(f.valid_from(span, tau_a))).ok()?;
            let shifted = f.pattern(&w).ok()?;
            let mut physical: Vec<u32> = shifted
                .iter()
                .map(|&d| clamp(d + tau_lo as i64 + tau_a as i64))
                .collect();
            physical.resize(horizon.max(physical.len()), *physical.last()?);
            Some((format!("{f} tau_a={tau_a}"), physical))
        })
    })
}

/// All cycles of length `period` over `alphabet` symbols, as digit vectors.
fn cycles(alphabet: usize, max_period: usize) -> impl Iterator<Item = Vec<usize>> {
    (1..=max_period).flat_map(move |period| {
        (0..alphabet.pow(period as u32)).map(move |code| {
            let mut c = code;
            (0..period)
                .map(|_| {
                    let d = c % alphabet;
                    c /= alphabet;
                    d
                })
                .collect()
        })
    })
}

/// Candidates in search order: family patterns under every policy, the
/// lookahead adversary (P3), periodic delivery schedules (P3), periodic delay
/// patterns under every policy, then seeded random patterns.
pub fn candidates<'a>(
    base: &'a SimConfig,
    opts: &'a SearchOptions,
) -> impl Iterator<Item = Candidate> + 'a {
    let (lo, hi, horizon) = (base.tau_lo, base.tau_hi, base.horizon);
    let width = (hi - lo) as usize + 1;
    let pols = policies(base.protocol, opts.seed);
    let with_policies = move |(label, delays): (String, Vec<u32>)| {
        pols.clone().into_iter().map(move |policy| Candidate {
            label: label.clone(),
            delays: delays.clone(),
            policy,
        })
    };
    let p3 = base.protocol == Protocol::P3;

    let families = family_patterns(lo, hi, horizon).flat_map(with_policies.clone());
    let greedy = std::iter::once_with(move || {
        p3.then(|| greedy_pattern(base, DEFAULT_LOOKAHEAD).ok())
            .flatten()
            .map(|(delays, choices)| Candidate {
                label: format!("lookahead {DEFAULT_LOOKAHEAD}"),
                delays,
                policy: P3Policy::Scripted { choices },
            })
    })
    .flatten();
    let schedules = cycles(width + 1, if p3 { opts.max_period } else { 0 }).map(move |cycle| {
        let prefs: Vec<Option<u32>> = cycle
            .iter()
            .map(|&i| (i < width).then(|| lo + i as u32))
            .collect();
        let (delays, choices) = schedule_from_preferences(&prefs, lo, hi, horizon);
        Candidate {
            label: format!("schedule {prefs:?}"),
            delays,
            policy: P3Policy::Scripted { choices },
        }
    });
    let periodic = cycles(width, opts.max_period)
        .map(move |cycle| {
            let delays: Vec<u32> = cycle.iter().map(|&i| lo + i as u32).collect();
            let label = format!("periodic {delays:?}");
            (
                label,
                delays.iter().copied().cycle().take(horizon).collect(),
            )
        })
        .flat_map(with_policies.clone());
    let seed = opts.seed;
    let random = (0u64..)
        .map(move |i| {
            let s = seed.wrapping_add(i);
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let p = (0..horizon).map(|_| rng.random_range(lo..=hi)).collect();
            (format!("random seed={s}"), p)
        })
        .flat_map(with_policies);

    families
        .chain(greedy)
        .chain(schedules)
        .chain(periodic)
        .chain(random)
}

fn policies(protocol: Protocol, seed: u64) -> Vec<P3Policy> {
    match protocol {
        Protocol::P1 => vec![P3Policy::Oldest],
        Protocol::P3 => vec![
            P3Policy::Oldest,
            P3Policy::Newest,
            P3Policy::Random { seed },
        ],
    }
}

/// Searches delay patterns for a diverging closed loop. Stops at the first
/// divergence; otherwise returns the candidate with the largest deviation
/// energy over the last tenth of the horizon. Not finding one is no
/// stability proof.
pub fn adversarial_search(base: &SimConfig, opts: &SearchOptions) -> Result<SearchOutcome> {
    if opts.budget == 0 {
        return Err(Error::InvalidArgument(
            "search budget must be at least 1".into(),
        ));
    }
    let tail = (base.horizon / 10).max(1);
    let steady = base.controller.steady_gain() * base.reference.amplitude;
    let run = |cand: Candidate| -> Result<SearchOutcome> {
        let config = SimConfig {
            delays: DelaySource::Scripted {
                delays: cand.delays.clone(),
            },
            p3_policy: cand.policy.clone(),
            ..base.clone()
        };
        let trace = simulate(&config)?;
        let tail_energy = trace.tail_energy(tail, steady);
        Ok(SearchOutcome {
            label: cand.label,
            pattern: cand.delays,
            policy: cand.policy,
            diverged: trace.diverged,
            divergence_instant: trace.divergence_instant,
            tail_energy,
            evaluated: 0,
            trace,
        })
    };

    let mut best: Option<SearchOutcome> = None;
    let mut evaluated = 0;
    let mut pending = candidates(base, opts).take(opts.budget).peekable();
    while pending.peek().is_some() {
        let chunk: Vec<Candidate> = pending.by_ref().take(CHUNK).collect();
        #[cfg(feature = "parallel")]
        let outcomes: Vec<Result<SearchOutcome>> = {
            use rayon::prelude::*;
            chunk.into_par_iter().map(run).collect()
        };
        #[cfg(not(feature = "parallel"))]
        let outcomes: Vec<Result<SearchOutcome>> = chunk.into_iter().map(run).collect();
        // candidates are ranked in search order, so the result does not
        // depend on scheduling
        for outcome in outcomes {
            let outcome = outcome?;
            evaluated += 1;
            let diverged = outcome.diverged;
            if diverged
                || best
                    .as_ref()
                    .is_none_or(|b| outcome.tail_energy > b.tail_energy)
            {
                best = Some(outcome);
            }
            if diverged {
                let mut out = best.expect("just set");
                out.evaluated = evaluated;
                return Ok(out);
            }
        }
    }
    let mut out = best.expect("budget admits one simulation");
    out.evaluated = evaluated;
    Ok(out)
}

/// Per-instant lookahead adversary for P3. At every instant it takes the
/// deliverable packet (or holds, when no packet is due) that maximizes the
/// deviation energy of the loop over the next `lookahead` samples, assuming
/// the nominal channel delay afterwards. Packets not taken stay in flight
/// until due and are then dropped alongside whatever is taken.
///
/// Returns the physical delay of every packet and the packet taken per instant.
pub fn greedy_pattern(
    base: &SimConfig,
    lookahead: usize,
) -> Result<(Vec<u32>, Vec<Option<usize>>)> {
    if base.protocol != Protocol::P3 {
        return Err(Error::InvalidArgument(
            "the lookahead adversary applies to P3 only".into(),
        ));
    }
    let (lo, hi) = (base.tau_lo as usize, base.tau_hi as usize);
    let nominal = (base.controller.nominal_channel_delay(&base.plant) as usize).clamp(lo, hi);
    let steady = base.controller.steady_gain() * base.reference.amplitude;
    let mut core = LoopCore::new(&base.plant, &base.controller)?;
    let mut ys: Vec<f64> = Vec::with_capacity(base.horizon + lookahead);
    let mut pending: Vec<usize> = Vec::new();
    let mut arrival: Vec<Option<usize>> = vec![None; base.horizon];
    let mut chosen = Vec::with_capacity(base.horizon);
    let mut held = 0.0;

    for k in 0..base.horizon {
        ys.push(core.output());
        pending.push(k);
        let due = pending.iter().any(|&j| j + hi == k);
        let mut options: Vec<Option<usize>> = pending
            .iter()
            .filter(|&&j| j + lo <= k)
            .map(|&j| Some(j))
            .collect();
        if !due {
            options.push(None);
        }

        let r = base.reference.at(k);
        let score = |choice: Option<usize>| {
            let mut sim = core.clone();
            let mut hist = ys.clone();
            sim.advance(r, choice.map_or(held, |j| ys[j]));
            let mut e = 0.0;
            for m in k + 1..=k + lookahead {
                let y = sim.output();
                hist.push(y);
                e += (y - steady).powi(2);
                let n = m.checked_sub(nominal).map_or(0.0, |i| hist[i]);
                sim.advance(base.reference.at(m), n);
            }
            e
        };
        let mut best = (options[0], f64::NEG_INFINITY);
        for &o in &options {
            let s = score(o);
            if s > best.1 {
                best = (o, s);
            }
        }
        let pick = best.0;

        if let Some(j) = pick {
            held = ys[j];
            arrival[j] = Some(k);
            // due packets arrive now and are dropped
            for &d in pending.iter().filter(|&&d| d + hi == k) {
                arrival[d] = Some(k);
            }
            pending.retain(|&d| d != j && d + hi != k);
        }
        chosen.push(pick);
        core.advance(r, held);
    }
    let delays = arrival
        .iter()
        .enumerate()
        .map(|(j, a)| a.map_or(hi, |a| a - j) as u32)
        .collect();
    Ok((delays, chosen))
}

/// Turns a periodic per-instant preference (take the packet sent `d` samples
/// ago, or hold with `None`) into a valid P3 delivery schedule. A preference
/// that is not available falls back to a hold, or to the oldest due packet
/// when one must be taken.
pub fn schedule_from_preferences(
    prefs: &[Option<u32>],
    tau_lo: u32,
    tau_hi: u32,
    horizon: usize,
) -> (Vec<u32>, Vec<Option<usize>>) {
    let (lo, hi) = (tau_lo as usize, tau_hi as usize);
    let mut pending: Vec<usize> = Vec::new();
    let mut arrival: Vec<Option<usize>> = vec![None; horizon];
    let mut chosen = Vec::with_capacity(horizon);
    for k in 0..horizon {
        pending.push(k);
        let due = pending.iter().copied().filter(|&j| j + hi == k).min();
        let wanted = prefs[k % prefs.len()]
            .map(|d| d as usize)
            .filter(|&d| (lo..=hi).contains(&d) && d <= k)
            .map(|d| k - d)
            .filter(|j| pending.contains(j));
        let pick = wanted.or(due);
        if let Some(j) = pick {
            arrival[j] = Some(k);
            for &d in pending.iter().filter(|&&d| d + hi == k) {
                arrival[d] = Some(k);
            }
            pending.retain(|&d| d != j && d + hi != k);
        }
        chosen.push(pick);
    }
    let delays = arrival
        .iter()
        .enumerate()
        .map(|(j, a)| a.map_or(hi, |a| a - j) as u32)
        .collect();
    (delays, chosen)
}
