use serde::{Deserialize, Serialize};

use super::setup::{GainWindow, Protocol};
use crate::error::{Error, Result};

/// How same-instant choices are made under P3. P1 is fully determined by its
/// rule; a script given for P1 is checked against that rule.
#[derive(Debug, Clone, Copy)]
pub enum Selection<'a> {
    /// Adversarial choice maximizing the output energy.
    Worst,
    /// One entry per window instant: the packet taken, or `None` to hold.
    Scripted(&'a [Option<usize>]),
}

/// One delay assignment pushed through the uncertainty block.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelRealization {
    pub protocol: Protocol,
    pub window: GainWindow,
    /// Shifted delay of every packet that can reach the window.
    pub delays: Vec<i64>,
    /// Packet taken at each window instant, `None` for a hold.
    pub selections: Vec<Option<usize>>,
    /// Held receiver value `c_k`.
    pub received: Vec<i64>,
    /// `w_k = c_k - a_k`.
    pub w: Vec<i64>,
    pub norm_sq: i64,
}

impl ChannelRealization {
    pub fn arrival(&self, packet: usize) -> i64 {
        packet as i64 + self.delays[packet]
    }

    pub fn alpha(&self) -> f64 {
        self.window.alpha(self.norm_sq)
    }

    pub fn instants(&self) -> std::ops::RangeInclusive<i64> {
        self.window.instants()
    }
}

/// Extends `delays` (at least `T + 1` entries) to every packet that can
/// reach the window by repeating the last entry, then range-checks it.
pub fn complete_delays(window: &GainWindow, delays: &[i64]) -> Result<Vec<i64>> {
    let needed = window.truncation as usize + 1;
    if delays.len() < needed {
        return Err(Error::InvalidArgument(format!(
            "{} packet delays given, at least {needed} required",
            delays.len()
        )));
    }
    let (lo, hi) = (window.min_delay(), window.max_delay());
    let mut full = delays.to_vec();
    full.truncate(window.packet_count());
    let last = *full.last().expect("at least one delay");
    full.resize(window.packet_count(), last);
    for (j, &d) in full.iter().enumerate() {
        if d < lo || d > hi {
            return Err(Error::DelayOutOfRange {
                packet: j,
                delay: d,
                lo,
                hi,
            });
        }
    }
    Ok(full)
}

/// Runs the uncertainty block for one delay assignment.
///
/// Every packet arrives exactly once. At an instant with arrivals the receiver
/// must take one of them (P1: the newest one not older than the last taken,
/// holding if all are stale; P3: any); arrivals not taken are dropped.
pub fn uncertainty_response(
    protocol: Protocol,
    window: GainWindow,
    delays: &[i64],
    selection: Selection<'_>,
) -> Result<ChannelRealization> {
    let delays = complete_delays(&window, delays)?;
    let first = window.first_instant();
    let mut arrivals: Vec<Vec<usize>> = vec![Vec::new(); window.len()];
    for (j, &d) in delays.iter().enumerate() {
        let k = j as i64 + d;
        if k <= window.last_instant() {
            arrivals[(k - first) as usize].push(j);
        }
    }

    let selections = match (protocol, selection) {
        (Protocol::P1, sel) => {
            let own = p1_selections(&arrivals);
            if let Selection::Scripted(script) = sel {
                check_script_len(&window, script)?;
                for (idx, (a, b)) in own.iter().zip(script).enumerate() {
                    if a != b {
                        return Err(Error::Selection {
                            instant: first + idx as i64,
                            reason: format!("P1 takes {a:?}, script says {b:?}"),
                        });
                    }
                }
            }
            own
        }
        (Protocol::P3, Selection::Worst) => p3_worst_selections(&window, &arrivals),
        (Protocol::P3, Selection::Scripted(script)) => {
            check_script_len(&window, script)?;
            for (idx, (arr, s)) in arrivals.iter().zip(script).enumerate() {
                let instant = first + idx as i64;
                match s {
                    None if !arr.is_empty() => {
                        return Err(Error::Selection {
                            instant,
                            reason: "packets arrive but none is taken".into(),
                        })
                    }
                    Some(j) if !arr.contains(j) => {
                        return Err(Error::Selection {
                            instant,
                            reason: format!("packet {j} does not arrive here"),
                        })
                    }
                    _ => {}
                }
            }
            script.to_vec()
        }
    };

    let mut seen = vec![false; window.packet_count()];
    let mut c = 0;
    let mut received = Vec::with_capacity(window.len());
    let mut w = Vec::with_capacity(window.len());
    for (k, s) in window.instants().zip(&selections) {
        if let Some(j) = *s {
            if std::mem::replace(&mut seen[j], true) {
                return Err(Error::Selection {
                    instant: k,
                    reason: format!("packet {j} delivered twice"),
                });
            }
            c = window.input_sum(j as i64);
        }
        received.push(c);
        w.push(c - window.input_sum(k));
    }
    let norm_sq = w.iter().map(|x| x * x).sum();
    Ok(ChannelRealization {
        protocol,
        window,
        delays,
        selections,
        received,
        w,
        norm_sq,
    })
}

fn check_script_len(window: &GainWindow, script: &[Option<usize>]) -> Result<()> {
    if script.len() != window.len() {
        return Err(Error::InvalidArgument(format!(
            "selection script has {} entries, window has {}",
            script.len(),
            window.len()
        )));
    }
    Ok(())
}

fn p1_selections(arrivals: &[Vec<usize>]) -> Vec<Option<usize>> {
    let mut last: Option<usize> = None;
    arrivals
        .iter()
        .map(|arr| {
            let newest = arr
                .iter()
                .copied()
                .filter(|&j| last.is_none_or(|l| j > l))
                .max();
            if newest.is_some() {
                last = newest;
            }
            newest
        })
        .collect()
}

/// Energy-maximizing P3 choices for fixed arrivals: a DP over the held value.
/// Ties go to the smallest packet index.
fn p3_worst_selections(window: &GainWindow, arrivals: &[Vec<usize>]) -> Vec<Option<usize>> {
    let n = arrivals.len();
    let values = window.truncation as usize + 2;
    let value_of = |j: usize| window.input_sum(j as i64) as usize;
    // best[i][c]: max energy from instant i onwards when holding value c
    let mut best = vec![vec![0i64; values]; n + 1];
    for i in (0..n).rev() {
        let a = window.input_sum(window.first_instant() + i as i64);
        let take = arrivals[i]
            .iter()
            .map(|&j| {
                let c = value_of(j);
                (c as i64 - a).pow(2) + best[i + 1][c]
            })
            .max();
        let (now, next) = best.split_at_mut(i + 1);
        for (c, (cur, nxt)) in now[i].iter_mut().zip(&next[0]).enumerate() {
            *cur = take.unwrap_or((c as i64 - a).pow(2) + nxt);
        }
    }

    arrivals
        .iter()
        .enumerate()
        .map(|(i, arr)| {
            let a = window.input_sum(window.first_instant() + i as i64);
            let score = |j: usize| (value_of(j) as i64 - a).pow(2) + best[i + 1][value_of(j)];
            let mut sorted = arr.clone();
            sorted.sort_unstable();
            sorted
                .into_iter()
                .fold(None, |acc: Option<(usize, i64)>, j| match acc {
                    Some((_, v)) if v >= score(j) => acc,
                    _ => Some((j, score(j))),
                })
                .map(|(j, _)| j)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn p1_constant_early_pattern() {
        let w = GainWindow::new(3, 2, 10).unwrap();
        let r = uncertainty_response(Protocol::P1, w, &[-2; 11], Selection::Worst).unwrap();
        // instant 0 receives packet 2, which carries 3
        let idx = (0 - w.first_instant()) as usize;
        assert_eq!(r.received[idx], 3);
        assert_eq!(r.w[idx], 2);
        assert_eq!(r.norm_sq, 42);
        assert!((r.alpha() - (42.0_f64 / 11.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn undelayed_channel_is_transparent() {
        for protocol in [Protocol::P1, Protocol::P3] {
            let w = GainWindow::new(2, 0, 7).unwrap();
            let r = uncertainty_response(protocol, w, &[0; 8], Selection::Worst).unwrap();
            assert!(r.w.iter().all(|&x| x == 0));
        }
    }

    #[test]
    fn rejects_bad_delays_and_scripts() {
        let w = GainWindow::new(2, 1, 3).unwrap();
        assert!(matches!(
            uncertainty_response(Protocol::P1, w, &[0, 2, 0, 0], Selection::Worst),
            Err(Error::DelayOutOfRange { packet: 1, .. })
        ));
        assert!(uncertainty_response(Protocol::P1, w, &[0, 0], Selection::Worst).is_err());
        let holds = vec![None; w.len()];
        assert!(matches!(
            uncertainty_response(Protocol::P3, w, &[0; 4], Selection::Scripted(&holds)),
            Err(Error::Selection { .. })
        ));
    }

    #[test]
    fn p3_scripted_matches_worst_energy() {
        let w = GainWindow::new(3, 2, 5).unwrap();
        let delays = [1, 0, -1, -2, 1, 0];
        let worst = uncertainty_response(Protocol::P3, w, &delays, Selection::Worst).unwrap();
        let again = uncertainty_response(
            Protocol::P3,
            w,
            &delays,
            Selection::Scripted(&worst.selections),
        )
        .unwrap();
        assert_eq!(worst, again);
    }
}
