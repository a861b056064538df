use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{poly, roots};
use crate::error::{Error, Result};

/// Poles closer than this to the unit circle count as unstable.
pub const STABILITY_MARGIN: f64 = 1e-7;

/// Root agreement required before a pole/zero pair is cancelled.
pub const CANCEL_TOL: f64 = 1e-9;

/// Discrete-time SISO transfer function `num(z) / den(z) * z^(-delay)`.
///
/// Coefficients are stored in descending powers of z. The canonical form has
/// a monic denominator and keeps every power of z in `delay`, so neither
/// polynomial has a root at the origin (the zero system is `0 / 1`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TfRecord", into = "TfRecord")]
pub struct TransferFunction {
    num: Vec<f64>,
    den: Vec<f64>,
    delay: u32,
    h: f64,
}

/// Serialized form: `{num, den, delay, h}`, coefficients in descending powers of z.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TfRecord {
    pub num: Vec<f64>,
    pub den: Vec<f64>,
    #[serde(default)]
    pub delay: u32,
    #[serde(default = "default_h")]
    pub h: f64,
}

fn default_h() -> f64 {
    1.0
}

impl TryFrom<TfRecord> for TransferFunction {
    type Error = Error;

    fn try_from(r: TfRecord) -> Result<Self> {
        TransferFunction::new(&r.num, &r.den, r.delay, r.h)
    }
}

impl From<TransferFunction> for TfRecord {
    fn from(g: TransferFunction) -> Self {
        TfRecord {
            num: g.num,
            den: g.den,
            delay: g.delay,
            h: g.h,
        }
    }
}

/// A pole/zero pair that matched within tolerance but was left in place
/// because the common factor is not strictly stable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NearCancellation {
    pub pole: Complex64,
    pub zero: Complex64,
}

impl TransferFunction {
    pub fn new(num: &[f64], den: &[f64], delay: u32, h: f64) -> Result<Self> {
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::InvalidSampleTime(h));
        }
        let den = poly::trim(den);
        if poly::is_zero(&den) {
            return Err(Error::ZeroDenominator);
        }
        let num = poly::trim(num);
        let (num_degree, den_degree) = (num.len() - 1, den.len() - 1);
        if !poly::is_zero(&num) && num_degree > den_degree + delay as usize {
            return Err(Error::Improper {
                num_degree,
                den_degree,
                delay,
            });
        }
        Ok(Self::canonical(num, den, delay as i64, h))
    }

    /// Builds the canonical form from an already proper triple.
    /// `delay` may be negative as long as the overall relative degree is not.
    fn canonical(num: Vec<f64>, den: Vec<f64>, delay: i64, h: f64) -> Self {
        if poly::is_zero(&num) {
            return Self {
                num: vec![0.0],
                den: vec![1.0],
                delay: 0,
                h,
            };
        }
        let lead = den[0];
        let mut num = poly::scale(&num, 1.0 / lead);
        let mut den = poly::scale(&den, 1.0 / lead);
        den[0] = 1.0;

        let zn = poly::trailing_zeros(&num);
        let zd = poly::trailing_zeros(&den);
        num.truncate(num.len() - zn);
        den.truncate(den.len() - zd);
        let net = delay + zd as i64 - zn as i64;
        if net >= 0 {
            Self {
                num,
                den,
                delay: net as u32,
                h,
            }
        } else {
            Self {
                num: poly::shift(&num, (-net) as usize),
                den,
                delay: 0,
                h,
            }
        }
    }

    pub fn gain(k: f64, h: f64) -> Result<Self> {
        Self::new(&[k], &[1.0], 0, h)
    }

    pub fn zero(h: f64) -> Result<Self> {
        Self::gain(0.0, h)
    }

    /// Pure delay z^(-d).
    pub fn delay_only(d: u32, h: f64) -> Result<Self> {
        Self::new(&[1.0], &[1.0], d, h)
    }

    pub fn num(&self) -> &[f64] {
        &self.num
    }

    pub fn den(&self) -> &[f64] {
        &self.den
    }

    pub fn delay(&self) -> u32 {
        self.delay
    }

    pub fn sample_time(&self) -> f64 {
        self.h
    }

    pub fn is_zero(&self) -> bool {
        poly::is_zero(&self.num)
    }

    /// deg(den) + delay - deg(num); at least zero for every valid instance.
    pub fn relative_degree(&self) -> usize {
        if self.is_zero() {
            return 0;
        }
        self.den.len() - 1 + self.delay as usize - (self.num.len() - 1)
    }

    pub fn is_strictly_proper(&self) -> bool {
        self.is_zero() || self.relative_degree() > 0
    }

    /// Same system without the pure delay factor.
    pub fn without_delay(&self) -> Self {
        Self {
            delay: 0,
            ..self.clone()
        }
    }

    pub fn with_extra_delay(&self, extra: u32) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        Self {
            delay: self.delay + extra,
            ..self.clone()
        }
    }

    /// Rational form with the delay folded into the denominator.
    pub fn rational(&self) -> (Vec<f64>, Vec<f64>) {
        (
            self.num.clone(),
            poly::shift(&self.den, self.delay as usize),
        )
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        let g = poly::eval(&self.num, z) / poly::eval(&self.den, z);
        if self.delay == 0 {
            g
        } else {
            g * z.powi(-(self.delay as i32))
        }
    }

    /// Response on the unit circle at angular frequency `omega` (rad/s).
    pub fn freq(&self, omega: f64) -> Complex64 {
        let wh = omega * self.h;
        let g = {
            let z = Complex64::from_polar(1.0, wh);
            poly::eval(&self.num, z) / poly::eval(&self.den, z)
        };
        if self.delay == 0 {
            g
        } else {
            g * Complex64::from_polar(1.0, -wh * self.delay as f64)
        }
    }

    pub fn dc_gain(&self) -> f64 {
        poly::eval_real(&self.num, 1.0) / poly::eval_real(&self.den, 1.0)
    }

    /// All poles, including the `delay` poles at the origin.
    pub fn poles(&self) -> Vec<Complex64> {
        let mut p = roots::roots(&self.den);
        p.extend(std::iter::repeat_n(
            Complex64::new(0.0, 0.0),
            self.delay as usize,
        ));
        p
    }

    pub fn zeros(&self) -> Vec<Complex64> {
        if self.is_zero() {
            return Vec::new();
        }
        roots::roots(&self.num)
    }

    pub fn max_pole_magnitude(&self) -> f64 {
        self.poles().iter().fold(0.0, |m, p| m.max(p.norm()))
    }

    pub fn is_stable(&self) -> bool {
        self.max_pole_magnitude() < 1.0 - STABILITY_MARGIN
    }

    fn check_h(&self, other: &Self) -> Result<()> {
        if (self.h - other.h).abs() > 1e-12 * self.h.max(other.h) {
            return Err(Error::SampleTimeMismatch(self.h, other.h));
        }
        Ok(())
    }

    pub fn scale(&self, k: f64) -> Self {
        Self::canonical(
            poly::scale(&self.num, k),
            self.den.clone(),
            self.delay as i64,
            self.h,
        )
    }

    pub fn neg(&self) -> Self {
        self.scale(-1.0)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_h(other)?;
        Ok(Self::canonical(
            poly::mul(&self.num, &other.num),
            poly::mul(&self.den, &other.den),
            self.delay as i64 + other.delay as i64,
            self.h,
        ))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_h(other)?;
        if self.is_zero() {
            return Ok(other.clone());
        }
        if other.is_zero() {
            return Ok(self.clone());
        }
        let common = self.delay.min(other.delay);
        let e1 = (self.delay - common) as usize;
        let e2 = (other.delay - common) as usize;
        let top = e1.max(e2);
        let num = poly::add(
            &poly::shift(&poly::mul(&self.num, &other.den), top - e1),
            &poly::shift(&poly::mul(&other.num, &self.den), top - e2),
        );
        let den = poly::shift(&poly::mul(&self.den, &other.den), top);
        Ok(Self::canonical(num, den, common as i64, self.h))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    /// Negative-feedback interconnection `self / (1 + self * fb)`.
    ///
    /// Computed symbolically as `nG dH z^b / (dG dH z^(a+b) + nG nH)` so the
    /// denominator of `self` never appears as an uncancelled common factor.
    pub fn feedback(&self, fb: &Self) -> Result<Self> {
        self.check_h(fb)?;
        if self.is_zero() {
            return Ok(self.clone());
        }
        let (a, b) = (self.delay as usize, fb.delay as usize);
        let num = poly::shift(&poly::mul(&self.num, &fb.den), b);
        let den = poly::add(
            &poly::shift(&poly::mul(&self.den, &fb.den), a + b),
            &poly::mul(&self.num, &fb.num),
        );
        if poly::is_zero(&den) {
            return Err(Error::ZeroDenominator);
        }
        Ok(Self::canonical(num, den, 0, self.h))
    }

    /// Cancels common pole/zero factors that agree within `tol` and lie strictly
    /// inside the unit circle. Matching pairs on or outside the circle are kept
    /// and reported.
    pub fn minreal(&self, tol: f64) -> (Self, Vec<NearCancellation>) {
        if self.is_zero() {
            return (self.clone(), Vec::new());
        }
        let mut zeros = roots::roots(&self.num);
        let poles = roots::roots(&self.den);
        let mut num = self.num.clone();
        let mut den = self.den.clone();
        let mut kept = Vec::new();
        for p in poles.iter().filter(|p| p.im >= 0.0) {
            let Some((idx, z)) = zeros
                .iter()
                .enumerate()
                .filter(|(_, z)| (z.im >= 0.0) == (p.im >= 0.0))
                .map(|(i, z)| (i, *z))
                .min_by(|a, b| (a.1 - p).norm().total_cmp(&(b.1 - p).norm()))
            else {
                continue;
            };
            if (z - p).norm() > tol * p.norm().max(1.0) {
                continue;
            }
            if p.norm() >= 1.0 - STABILITY_MARGIN {
                log::warn!("not cancelling near pole/zero pair at {p} (not strictly stable)");
                kept.push(NearCancellation { pole: *p, zero: z });
                continue;
            }
            zeros.remove(idx);
            if p.im.abs() > tol {
                if let Some(j) = zeros.iter().position(|w| (w - z.conj()).norm() <= tol) {
                    zeros.remove(j);
                }
                let (b, c) = (-2.0 * p.re, p.norm_sqr());
                num = poly::deflate_quadratic(&num, b, c).0;
                den = poly::deflate_quadratic(&den, b, c).0;
            } else {
                num = poly::deflate_real(&num, p.re).0;
                den = poly::deflate_real(&den, p.re).0;
            }
        }
        (Self::canonical(num, den, self.delay as i64, self.h), kept)
    }
}

impl fmt::Display for TransferFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let fmt_poly = |p: &[f64]| {
            p.iter()
                .map(|c| format!("{c}"))
                .collect::<Vec<_>>()
                .join(", ")
        };
        write!(f, "[{}] / [{}]", fmt_poly(&self.num), fmt_poly(&self.den))?;
        if self.delay > 0 {
            write!(f, " * z^-{}", self.delay)?;
        }
        Ok(())
    }
}
