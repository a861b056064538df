//! Closed-form output energies of the worst-case delay pattern families.
//!
//! All energies are squared 2-norms of `w` for the unit input truncated at
//! `T`, exact in integers. `span` is the delay span, `tau_a` the acausal shift.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::response::{uncertainty_response, ChannelRealization, Selection};
use super::setup::{GainWindow, Protocol};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// Constant delay at the dominant edge of the range.
    P1,
    /// Descending staircase repeated every `span + 1` packets.
    P3Prime,
    /// Staircase with a modified start that also exploits early packets.
    P3DoublePrime,
    /// Early constant run with a single late burst before the tail.
    P3TriplePrime,
}

impl Family {
    pub const ALL: [Family; 4] = [
        Family::P1,
        Family::P3Prime,
        Family::P3DoublePrime,
        Family::P3TriplePrime,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::P1 => "p1",
            Family::P3Prime => "p3'",
            Family::P3DoublePrime => "p3''",
            Family::P3TriplePrime => "p3'''",
        }
    }

    /// Smallest truncation index for which the closed form holds.
    pub fn valid_from(self, span: u32, tau_a: u32) -> u32 {
        match self {
            Family::P1 => tau_bar(span, tau_a).saturating_sub(2),
            Family::P3Prime | Family::P3DoublePrime => 0,
            Family::P3TriplePrime => span.saturating_sub(1),
        }
    }

    /// Limit of `alpha_T` as `T` grows.
    pub fn limit(self, span: u32, tau_a: u32) -> f64 {
        match self {
            Family::P1 => gain_p1_limit(span, tau_a),
            Family::P3Prime | Family::P3DoublePrime => gain_p3_prime_limit(span, tau_a),
            Family::P3TriplePrime => tau_a as f64,
        }
    }

    pub fn norm_sq(self, span: u32, tau_a: u32, t: u32) -> Result<i64> {
        let min = self.valid_from(span, tau_a);
        if t < min {
            return Err(Error::TruncationTooSmall {
                family: self.name(),
                t,
                min,
            });
        }
        let (n, a, t) = (span as i64, tau_a as i64, t as i64);
        Ok(match self {
            Family::P1 => p1_norm_sq(n, a, t),
            Family::P3Prime => p3_prime_norm_sq(n, a, t),
            Family::P3DoublePrime => p3_dprime_norm_sq(n, a, t),
            Family::P3TriplePrime => p3_tprime_norm_sq(n, a, t),
        })
    }

    pub fn alpha_t(self, span: u32, tau_a: u32, t: u32) -> Result<f64> {
        let e = self.norm_sq(span, tau_a, t)?;
        Ok((e as f64 / (t as f64 + 1.0)).sqrt())
    }

    /// Shifted per-packet delays of the family pattern, one per packet that
    /// can reach the window.
    pub fn pattern(self, window: &GainWindow) -> Result<Vec<i64>> {
        let (n, a, t) = (
            window.span as i64,
            window.tau_a as i64,
            window.truncation as i64,
        );
        let min = self.valid_from(window.span, window.tau_a);
        if window.truncation < min {
            return Err(Error::TruncationTooSmall {
                family: self.name(),
                t: window.truncation,
                min,
            });
        }
        let count = window.packet_count();
        let stair = (0..=n).map(|i| n - a - i).cycle();
        let out: Vec<i64> = match self {
            Family::P1 => {
                let tb = tau_bar(window.span, window.tau_a) as i64;
                vec![if tb == n - a { tb } else { -tb }; count]
            }
            Family::P3Prime => stair.take(count).collect(),
            Family::P3DoublePrime => std::iter::once(n - a)
                .chain(std::iter::repeat_n(-a, n as usize))
                .chain(stair)
                .take(count)
                .collect(),
            Family::P3TriplePrime => std::iter::repeat_n(-a, (t - n + 1) as usize)
                .chain(std::iter::once(n - a))
                .chain(std::iter::repeat_n(-a, n as usize))
                .chain(std::iter::repeat(n - a))
                .take(count)
                .collect(),
        };
        Ok(out)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Dominant one-sided delay `max(tau_a, span - tau_a)`.
pub fn tau_bar(span: u32, tau_a: u32) -> u32 {
    tau_a.max(span - tau_a)
}

fn sq(x: i64) -> i64 {
    x * x
}

fn a_sum(i: i64, t: i64) -> i64 {
    if i < 0 {
        0
    } else {
        (i + 1).min(t + 1)
    }
}

fn p1_norm_sq(n: i64, a: i64, t: i64) -> i64 {
    let tb = a.max(n - a);
    2 * (1..tb).map(sq).sum::<i64>() + (t - tb + 2) * sq(tb)
}

/// Periodic staircase blocks `B + C + D` shared by the two staircase families.
fn staircase_tail(n: i64, a: i64, t: i64) -> i64 {
    let l = n + 1;
    let total = t + 1 + n + a;
    // repeat full periods until at most 3 * span samples are left
    let k1 = ((total - 3 * n).max(0) + l - 1) / l;
    let k2 = total - k1 * l;
    let k3 = k2 / l;
    let d: i64 = (0..=n).map(|i| sq(n - a + i)).sum();
    let b = k1 * d;
    let c: i64 = (k1..k1 + k3)
        .map(|j| {
            (n - a + j * l..=2 * n - a + j * l)
                .map(|i| sq(a_sum(i, t) - a_sum(j * l, t)))
                .sum::<i64>()
        })
        .sum();
    let base = n - a + (k1 + k3) * l;
    let dd: i64 = (base..=t + 2 * n)
        .map(|i| sq(a_sum(i, t) - a_sum(base, t)))
        .sum();
    b + c + dd
}

fn p3_prime_norm_sq(n: i64, a: i64, t: i64) -> i64 {
    let intro: i64 = (1..=n - a).map(|i| sq(i.min(t + 1))).sum();
    intro + staircase_tail(n, a, t)
}

fn p3_dprime_norm_sq(n: i64, a: i64, t: i64) -> i64 {
    let plus = if a == 0 {
        1
    } else {
        (1..=n - a)
            .map(|i| sq(t.min(a).min((t - i + 1).max(0))))
            .sum()
    };
    let minus = if a <= 1 {
        0
    } else {
        (2..=a).map(|i| sq(i.min(t + 1))).sum()
    };
    plus + minus + staircase_tail(n, a, t)
}

fn p3_tprime_norm_sq(n: i64, a: i64, t: i64) -> i64 {
    let intro = if a <= 1 {
        0
    } else {
        (1..a)
            .map(|i| {
                let delta = i64::from(i == t - n + 2 && t < n - 2 + a);
                sq(i - delta)
            })
            .sum()
    };
    let (b, c) = if t >= n - 2 + a {
        (
            (t - n - a + 2) * sq(a),
            (a - 1..=a + n - 2).map(|i| sq(i.min(a))).sum(),
        )
    } else {
        ((t - a + 2) * sq(a), 0)
    };
    let d: i64 = (n - a..=2 * n - a).map(|i| sq(i.min(n - 1))).sum();
    intro + b + c + d
}

pub fn gain_p1(span: u32, tau_a: u32, t: u32) -> Result<f64> {
    Family::P1.alpha_t(span, tau_a, t)
}

pub fn gain_p1_limit(span: u32, tau_a: u32) -> f64 {
    tau_bar(span, tau_a) as f64
}

pub fn gain_p3_prime(span: u32, tau_a: u32, t: u32) -> Result<f64> {
    Family::P3Prime.alpha_t(span, tau_a, t)
}

pub fn gain_p3_prime_limit(span: u32, tau_a: u32) -> f64 {
    let n = span as f64;
    let d = (span - tau_a) as f64;
    (d * d + d * n + n * n / 3.0 + n / 6.0).sqrt()
}

pub fn gain_p3_dprime(span: u32, tau_a: u32, t: u32) -> Result<f64> {
    Family::P3DoublePrime.alpha_t(span, tau_a, t)
}

pub fn gain_p3_tprime(span: u32, tau_a: u32, t: u32) -> Result<f64> {
    Family::P3TriplePrime.alpha_t(span, tau_a, t)
}

/// Families whose closed form applies at `(span, tau_a, t)` for a protocol.
pub fn families_for(protocol: Protocol, span: u32, tau_a: u32, t: u32) -> Vec<Family> {
    let all: &[Family] = match protocol {
        Protocol::P1 => &Family::ALL[..1],
        Protocol::P3 => &Family::ALL,
    };
    all.iter()
        .copied()
        .filter(|f| t >= f.valid_from(span, tau_a))
        .collect()
}

/// Largest closed-form energy at `(span, tau_a, t)` and the first family reaching it.
pub fn family_max(protocol: Protocol, span: u32, tau_a: u32, t: u32) -> Result<(Family, i64)> {
    let mut best: Option<(Family, i64)> = None;
    for f in families_for(protocol, span, tau_a, t) {
        let e = f.norm_sq(span, tau_a, t)?;
        if best.is_none_or(|(_, b)| e > b) {
            best = Some((f, e));
        }
    }
    best.ok_or(Error::TruncationTooSmall {
        family: Family::P1.name(),
        t,
        min: Family::P1.valid_from(span, tau_a),
    })
}

/// Worst-case realization at `window` built from the closed-form families.
pub fn worst_case_pattern(protocol: Protocol, window: GainWindow) -> Result<ChannelRealization> {
    let (family, _) = family_max(protocol, window.span, window.tau_a, window.truncation)?;
    let delays = family.pattern(&window)?;
    uncertainty_response(protocol, window, &delays, Selection::Worst)
}
