use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::families::{tau_bar, Family};
use super::setup::Protocol;
use crate::error::{Error, Result};

/// Relative tolerance when comparing gains across acausal shifts.
pub const TIE_TOL: f64 = 1e-12;

/// Default truncation sweep limit for a span.
pub fn default_t_max(span: u32) -> u32 {
    50.max(10 * span)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyGain {
    pub family: Family,
    /// `(T, alpha_T)` over the swept truncations.
    pub alpha_t: Vec<(u32, f64)>,
    pub limit: f64,
    /// Max of the sweep and the limit.
    pub sup: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftGain {
    pub tau_a: u32,
    pub families: Vec<FamilyGain>,
    pub alpha: f64,
    pub dominant: Family,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainResult {
    pub protocol: Protocol,
    pub tau_hat_n: u32,
    pub t_max: u32,
    pub shifts: Vec<ShiftGain>,
    pub tau_a_star: u32,
    pub alpha_star: f64,
    pub dominant: Family,
}

pub fn family_gain(family: Family, span: u32, tau_a: u32, t_max: u32) -> FamilyGain {
    let alpha_t: Vec<(u32, f64)> = (family.valid_from(span, tau_a)..=t_max)
        .map(|t| (t, family.alpha_t(span, tau_a, t).expect("within validity")))
        .collect();
    let limit = family.limit(span, tau_a);
    let sup = alpha_t.iter().map(|&(_, a)| a).fold(limit, f64::max);
    FamilyGain {
        family,
        alpha_t,
        limit,
        sup,
    }
}

pub fn shift_gain(protocol: Protocol, span: u32, tau_a: u32, t_max: u32) -> ShiftGain {
    let fams: &[Family] = match protocol {
        Protocol::P1 => &Family::ALL[..1],
        Protocol::P3 => &Family::ALL,
    };
    let families: Vec<FamilyGain> = fams
        .iter()
        .map(|&f| family_gain(f, span, tau_a, t_max))
        .collect();
    let top = families
        .iter()
        .fold(&families[0], |b, f| if f.sup > b.sup { f } else { b });
    ShiftGain {
        tau_a,
        alpha: top.sup,
        dominant: top.family,
        families,
    }
}

/// Gain table over every acausal shift and its minimizer (smallest shift on ties).
pub fn optimize(protocol: Protocol, span: u32, t_max: u32) -> Result<GainResult> {
    if span == 0 {
        return Err(Error::InvalidArgument(
            "delay span must be at least 1".into(),
        ));
    }
    if t_max < 4 * span {
        return Err(Error::InvalidArgument(format!(
            "truncation sweep limit {t_max} below 4 * span = {}",
            4 * span
        )));
    }
    let shifts: Vec<ShiftGain> = (0..=span)
        .map(|a| shift_gain(protocol, span, a, t_max))
        .collect();
    let best = shifts.iter().fold(&shifts[0], |b, s| {
        if s.alpha < b.alpha * (1.0 - TIE_TOL) {
            s
        } else {
            b
        }
    });
    Ok(GainResult {
        protocol,
        tau_hat_n: span,
        t_max,
        tau_a_star: best.tau_a,
        alpha_star: best.alpha,
        dominant: best.dominant,
        shifts,
    })
}

/// P1 optimum `(floor(span/2), ceil(span/2))`.
pub fn optimal_p1(span: u32) -> (u32, f64) {
    let a = span / 2;
    (a, tau_bar(span, a) as f64)
}

pub fn optimal_p3(span: u32, t_max: u32) -> Result<GainResult> {
    optimize(Protocol::P3, span, t_max)
}

/// Shortcut using the P1 gain at the largest shift, which bounds the P3 gain.
pub fn overestimate_p3(span: u32) -> (u32, f64) {
    (span, span as f64)
}

/// Gain with the acausal shift forced to zero.
pub fn causal_gain(protocol: Protocol, span: u32, t_max: u32) -> f64 {
    shift_gain(protocol, span, 0, t_max).alpha
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1Row {
    pub tau_hat_n: u32,
    pub tau_a_star: u32,
    pub alpha_star: f64,
}

/// Optimal P3 shifts and gains over a range of spans.
pub fn table1(spans: impl IntoIterator<Item = u32>, overestimate: bool) -> Result<Vec<Table1Row>> {
    spans
        .into_iter()
        .map(|n| {
            let (tau_a_star, alpha_star) = if overestimate {
                overestimate_p3(n)
            } else {
                let r = optimal_p3(n, default_t_max(n))?;
                (r.tau_a_star, r.alpha_star)
            };
            Ok(Table1Row {
                tau_hat_n: n,
                tau_a_star,
                alpha_star,
            })
        })
        .collect()
}

/// `tau_hat_n,tau_a_star,alpha_star` with 12 significant digits.
pub fn table1_csv(rows: &[Table1Row]) -> String {
    let mut s = String::from("tau_hat_n,tau_a_star,alpha_star\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{}",
            r.tau_hat_n,
            r.tau_a_star,
            crate::format::sig(r.alpha_star)
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn p1_optimum() {
        assert_eq!(optimal_p1(3), (1, 2.0));
        assert_eq!(optimal_p1(4), (2, 2.0));
        assert_eq!(optimal_p1(1), (0, 1.0));
        let r = optimize(Protocol::P1, 5, 50).unwrap();
        assert_eq!((r.tau_a_star, r.alpha_star), optimal_p1(5));
    }

    #[test]
    fn span_one_matches_overestimate() {
        let r = optimal_p3(1, 50).unwrap();
        assert_eq!(r.alpha_star, 1.0);
        assert_eq!(overestimate_p3(1).1, 1.0);
        assert_eq!(overestimate_p3(7), (7, 7.0));
    }

    #[test]
    fn sweep_limit_checked() {
        assert!(optimal_p3(3, 11).is_err());
        assert!(optimal_p3(0, 50).is_err());
    }
}
