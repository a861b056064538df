//! Real polynomials stored as coefficient vectors in descending powers of z.

use num_complex::Complex64;

/// Drops leading (highest-power) zero coefficients; the zero polynomial is `[0.0]`.
pub fn trim(p: &[f64]) -> Vec<f64> {
    match p.iter().position(|&c| c != 0.0) {
        Some(i) => p[i..].to_vec(),
        None => vec![0.0],
    }
}

pub fn degree(p: &[f64]) -> usize {
    trim(p).len() - 1
}

pub fn is_zero(p: &[f64]) -> bool {
    p.iter().all(|&c| c == 0.0)
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len().max(b.len());
    let mut out = vec![0.0; n];
    for (i, &c) in a.iter().enumerate() {
        out[n - a.len() + i] += c;
    }
    for (i, &c) in b.iter().enumerate() {
        out[n - b.len() + i] += c;
    }
    trim(&out)
}

pub fn scale(p: &[f64], k: f64) -> Vec<f64> {
    trim(&p.iter().map(|c| c * k).collect::<Vec<_>>())
}

pub fn mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    trim(&out)
}

/// Multiplies by z^k (appends k trailing zeros).
pub fn shift(p: &[f64], k: usize) -> Vec<f64> {
    if is_zero(p) {
        return vec![0.0];
    }
    let mut out = trim(p);
    out.extend(std::iter::repeat_n(0.0, k));
    out
}

/// Horner evaluation at a complex point.
pub fn eval(p: &[f64], z: Complex64) -> Complex64 {
    p.iter()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

pub fn eval_real(p: &[f64], x: f64) -> f64 {
    p.iter().fold(0.0, |acc, &c| acc * x + c)
}

/// Synthetic division by the real linear factor (z - root).
///
/// Returns the quotient and the remainder, which equals `p(root)`.
pub fn deflate_real(p: &[f64], root: f64) -> (Vec<f64>, f64) {
    let p = trim(p);
    if p.len() == 1 {
        return (vec![0.0], p[0]);
    }
    let mut q = Vec::with_capacity(p.len() - 1);
    let mut acc = 0.0;
    for &c in &p[..p.len() - 1] {
        acc = acc * root + c;
        q.push(acc);
    }
    let rem = acc * root + p[p.len() - 1];
    (q, rem)
}

/// Division by the monic quadratic z^2 + b z + c, as used for complex-conjugate
/// root pairs. Returns the quotient and the two remainder coefficients.
pub fn deflate_quadratic(p: &[f64], b: f64, c: f64) -> (Vec<f64>, [f64; 2]) {
    let mut r = trim(p);
    if r.len() < 3 {
        let mut rem = [0.0; 2];
        for (i, &v) in r.iter().rev().enumerate() {
            rem[1 - i] = v;
        }
        return (vec![0.0], rem);
    }
    let n = r.len() - 2;
    let mut q = vec![0.0; n];
    for i in 0..n {
        let lead = r[i];
        q[i] = lead;
        r[i + 1] -= lead * b;
        r[i + 2] -= lead * c;
    }
    (q, [r[n], r[n + 1]])
}

/// Number of trailing zero coefficients, i.e. the multiplicity of the root at z = 0.
pub fn trailing_zeros(p: &[f64]) -> usize {
    if is_zero(p) {
        return 0;
    }
    p.iter().rev().take_while(|&&c| c == 0.0).count()
}

pub fn max_abs(p: &[f64]) -> f64 {
    p.iter().fold(0.0_f64, |m, c| m.max(c.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multiply_and_add() {
        assert_eq!(mul(&[1.0, -1.0], &[1.0, 1.0]), vec![1.0, 0.0, -1.0]);
        assert_eq!(add(&[1.0, 0.0, -1.0], &[1.0]), vec![1.0, 0.0, 0.0]);
        assert_eq!(add(&[1.0, 2.0], &[-1.0, 0.0]), vec![2.0]);
    }

    #[test]
    fn deflation_recovers_factor() {
        // (z - 2)(z + 3) = z^2 + z - 6
        let (q, rem) = deflate_real(&[1.0, 1.0, -6.0], 2.0);
        assert_eq!(q, vec![1.0, 3.0]);
        assert_eq!(rem, 0.0);
        let (q, rem) = deflate_quadratic(&[1.0, 0.0, 0.0, -1.0], 1.0, 1.0);
        // z^3 - 1 = (z - 1)(z^2 + z + 1)
        assert_eq!(q, vec![1.0, -1.0]);
        assert_eq!(rem, [0.0, 0.0]);
    }

    #[test]
    fn shift_and_trailing() {
        let p = shift(&[1.0, 2.0], 3);
        assert_eq!(p, vec![1.0, 2.0, 0.0, 0.0, 0.0]);
        assert_eq!(trailing_zeros(&p), 3);
        assert_eq!(trim(&[0.0, 0.0]), vec![0.0]);
    }
}
