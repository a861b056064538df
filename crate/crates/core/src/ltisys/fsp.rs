//! Filtered Smith predictor for plants with at most one unstable real pole.
//!
//! The predictor filter is first order, `F(z) = (b1 z + b0) / (z - p)`, with
//! `b1, b0` chosen so that `F(1) = 1` and `1 - z^(-tau_hat) F(z)` vanishes at
//! the unstable plant pole. The feedback path `H = P(1 - z^(-tau_hat) F)` is
//! then formed with that pole divided out exactly.

use serde::{Deserialize, Serialize};

use super::poly;
use super::tf::{TransferFunction, STABILITY_MARGIN};
use crate::error::{Error, Result};

/// Remainder bound for the exact deflation of the unstable factor.
pub const DEFLATION_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmithPredictorDesign {
    pub c: TransferFunction,
    pub v: TransferFunction,
    pub f: TransferFunction,
    pub h: TransferFunction,
    /// Equivalent single-block controller `C F / (1 + C H)` acting on the received output.
    pub r: TransferFunction,
    pub tau_hat: u32,
    pub filter_pole: f64,
    /// Unstable plant pole cancelled in `h`, if any.
    pub cancelled_pole: Option<f64>,
    /// Magnitude of the deflation remainder (0 when nothing was cancelled).
    pub residual: f64,
}

/// Designs the predictor for nominal delay `tau_hat` with filter pole `filter_pole`.
pub fn design_fsp(
    c: &TransferFunction,
    p_hat: &TransferFunction,
    tau_hat: u32,
    filter_pole: f64,
) -> Result<SmithPredictorDesign> {
    if !(filter_pole > 0.0 && filter_pole < 1.0) {
        return Err(Error::Design(format!(
            "filter pole {filter_pole} must lie in (0, 1)"
        )));
    }
    let h = c.sample_time();
    if (p_hat.sample_time() - h).abs() > 1e-12 * h {
        return Err(Error::SampleTimeMismatch(h, p_hat.sample_time()));
    }
    let unstable: Vec<_> = p_hat
        .poles()
        .into_iter()
        .filter(|p| p.norm() >= 1.0 - STABILITY_MARGIN)
        .collect();
    let zu = match unstable.as_slice() {
        [] => None,
        [p] if p.im.abs() < 1e-9 => Some(p.re),
        [_] => unreachable!("a single complex pole cannot occur for real coefficients"),
        _ => {
            return Err(Error::Design(format!(
            "{} poles on or outside the unit circle; at most one real unstable pole is supported",
            unstable.len()
        )))
        }
    };

    let (b1, b0) = match zu {
        None => (1.0 - filter_pole, 0.0),
        Some(zu) => solve_filter(zu, tau_hat, filter_pole)?,
    };
    let f = TransferFunction::new(&[b1, b0], &[1.0, -filter_pole], 0, h)?;

    // 1 - z^-tau F = (z^tau (z - p) - (b1 z + b0)) / (z^tau (z - p))
    let q = poly::add(
        &poly::shift(&[1.0, -filter_pole], tau_hat as usize),
        &[-b1, -b0],
    );
    let (hp, residual) = match zu {
        None => {
            let num = poly::mul(p_hat.num(), &q);
            let den = poly::mul(p_hat.den(), &[1.0, -filter_pole]);
            (
                TransferFunction::new(&num, &den, p_hat.delay() + tau_hat, h)?,
                0.0,
            )
        }
        Some(zu) => {
            let (q1, rem_q) = poly::deflate_real(&q, zu);
            let (den1, rem_d) = poly::deflate_real(p_hat.den(), zu);
            let rel_q = rem_q.abs() / poly::max_abs(&q).max(1.0);
            let rel_d = rem_d.abs() / poly::max_abs(p_hat.den()).max(1.0);
            let residual = rel_q.max(rel_d);
            if residual > DEFLATION_TOL {
                return Err(Error::Cancellation {
                    root: zu,
                    remainder: residual,
                    tolerance: DEFLATION_TOL,
                });
            }
            let num = poly::mul(p_hat.num(), &q1);
            let den = poly::mul(&den1, &[1.0, -filter_pole]);
            (
                TransferFunction::new(&num, &den, p_hat.delay() + tau_hat, h)?,
                residual,
            )
        }
    };
    if !hp.is_stable() {
        return Err(Error::Design(format!(
            "predictor path H is unstable (max pole magnitude {})",
            hp.max_pole_magnitude()
        )));
    }

    let r = c.feedback(&hp)?.mul(&f)?;
    Ok(SmithPredictorDesign {
        c: c.clone(),
        v: TransferFunction::gain(1.0, h)?,
        f,
        h: hp,
        r,
        tau_hat,
        filter_pole,
        cancelled_pole: zu,
        residual,
    })
}

impl SmithPredictorDesign {
    pub fn with_prefilter(mut self, v: TransferFunction) -> Self {
        self.v = v;
        self
    }
}

/// Solves `{ b1 + b0 = 1 - p ; b1 zu + b0 = zu^tau (zu - p) }`.
fn solve_filter(zu: f64, tau_hat: u32, p: f64) -> Result<(f64, f64)> {
    let det = 1.0 - zu;
    if det.abs() < 1e-12 {
        return Err(Error::Design(
            "unstable pole at z = 1 makes the filter design system singular".into(),
        ));
    }
    let rhs0 = 1.0 - p;
    let rhs1 = zu.powi(tau_hat as i32) * (zu - p);
    // [1 1; zu 1] [b1 b0]^T = [rhs0 rhs1]^T
    let b1 = (rhs0 - rhs1) / det;
    let b0 = rhs0 - b1;
    Ok((b1, b0))
}

/// Nominal loop map `M = -R P D / (1 + R P D) * (z - 1) / z` with `D = z^-tau_hat`.
///
/// On the unit circle |M| equals |R P / (1 + R P D) * (z - 1) / z| because |D| = 1.
pub fn build_m(
    r: &TransferFunction,
    p_hat: &TransferFunction,
    tau_hat: u32,
) -> Result<TransferFunction> {
    let h = r.sample_time();
    let loop_gain = r.mul(p_hat)?.with_extra_delay(tau_hat);
    let one = TransferFunction::gain(1.0, h)?;
    let differencer = TransferFunction::new(&[1.0, -1.0], &[1.0, 0.0], 0, h)?;
    loop_gain.feedback(&one)?.mul(&differencer).map(|m| m.neg())
}

/// The benchmark loop: unstable first-order plant with five samples of dead
/// time, PI-like primary controller, prefilter, predictor filter pole, h = 1.
#[derive(Debug, Clone, PartialEq)]
pub struct ExampleSystem {
    /// Delay-free plant model.
    pub p_hat: TransferFunction,
    pub d_hat: u32,
    pub c: TransferFunction,
    pub v: TransferFunction,
    pub filter_pole: f64,
    pub h: f64,
}

pub fn design_example() -> ExampleSystem {
    let h = 1.0;
    let tf =
        |num: &[f64], den: &[f64]| TransferFunction::new(num, den, 0, h).expect("valid example");
    ExampleSystem {
        p_hat: tf(&[0.0051271], &[1.0, -1.051]),
        d_hat: 5,
        c: tf(&[29.504, -29.504 * 0.9835], &[1.0, -1.0]),
        v: tf(&[0.041317, -0.041317 * 0.6], &[1.0, -0.9835]),
        filter_pole: 0.95,
        h,
    }
}

impl ExampleSystem {
    /// Plant including its dead time.
    pub fn plant(&self) -> TransferFunction {
        self.p_hat.with_extra_delay(self.d_hat)
    }
}
