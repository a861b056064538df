use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::tf::TransferFunction;
use crate::error::{Error, Result};

/// Points of the uniform search grid on [0, pi/h].
pub const GRID_POINTS: usize = 4096;

/// Frequency resolution of the golden-section refinement (rad/s).
pub const REFINE_RESOLUTION: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyResponse {
    pub omegas: Vec<f64>,
    pub values: Vec<Complex64>,
    /// (omega at max, magnitude)
    pub peak: (f64, f64),
}

impl FrequencyResponse {
    pub fn magnitudes(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InfNorm {
    pub norm: f64,
    pub omega: f64,
}

/// `n` uniformly spaced frequencies covering [0, pi/h], endpoints included.
pub fn uniform_grid(h: f64, n: usize) -> Vec<f64> {
    let nyquist = PI / h;
    let n = n.max(2);
    (0..n)
        .map(|i| nyquist * i as f64 / (n - 1) as f64)
        .collect()
}

/// Evaluates `g` on the given frequencies. `omegas` must be strictly increasing.
pub fn frequency_response(g: &TransferFunction, omegas: &[f64]) -> FrequencyResponse {
    let values: Vec<Complex64> = omegas.iter().map(|&w| g.freq(w)).collect();
    let peak = omegas
        .iter()
        .zip(&values)
        .fold((0.0, f64::NEG_INFINITY), |best, (&w, v)| {
            if v.norm() > best.1 {
                (w, v.norm())
            } else {
                best
            }
        });
    FrequencyResponse {
        omegas: omegas.to_vec(),
        values,
        peak,
    }
}

/// Peak of |g(e^{j w h})| over [0, pi/h] without a stability check.
pub fn peak_magnitude(g: &TransferFunction) -> InfNorm {
    if g.is_zero() {
        return InfNorm {
            norm: 0.0,
            omega: 0.0,
        };
    }
    let mag = |w: f64| g.freq(w).norm();
    let grid = uniform_grid(g.sample_time(), GRID_POINTS);
    let (best, _) = grid.iter().enumerate().map(|(i, &w)| (i, mag(w))).fold(
        (0, f64::NEG_INFINITY),
        |acc, (i, m)| if m > acc.1 { (i, m) } else { acc },
    );

    let lo = grid[best.saturating_sub(1)];
    let hi = grid[(best + 1).min(grid.len() - 1)];
    let (omega, norm) = golden_max(mag, lo, hi, REFINE_RESOLUTION);
    // the refinement can only improve on the grid point it started from
    let grid_best = mag(grid[best]);
    if grid_best >= norm {
        InfNorm {
            norm: grid_best,
            omega: grid[best],
        }
    } else {
        InfNorm { norm, omega }
    }
}

/// ||g||_inf over [0, pi/h]. Rejects unstable systems, for which the peak
/// magnitude does not bound an l2 gain.
pub fn inf_norm(g: &TransferFunction) -> Result<InfNorm> {
    if !g.is_zero() && !g.is_stable() {
        return Err(Error::Unstable {
            max_pole_magnitude: g.max_pole_magnitude(),
        });
    }
    Ok(peak_magnitude(g))
}

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let ratio = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = f(d);
        }
    }
    let w = 0.5 * (a + b);
    let (fw, fa, fb) = (f(w), f(a), f(b));
    if fa >= fw && fa >= fb {
        (a, fa)
    } else if fb >= fw {
        (b, fb)
    } else {
        (w, fw)
    }
}
