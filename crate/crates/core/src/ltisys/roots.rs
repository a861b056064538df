use nalgebra::DMatrix;
use num_complex::Complex64;

use super::poly;

/// Roots of a real polynomial (descending coefficients) as eigenvalues of its
/// companion matrix. Constant polynomials have no roots.
pub fn roots(p: &[f64]) -> Vec<Complex64> {
    let p = poly::trim(p);
    let n = p.len() - 1;
    if n == 0 {
        return Vec::new();
    }
    let zeros = poly::trailing_zeros(&p);
    let mut out = vec![Complex64::new(0.0, 0.0); zeros];
    let core = &p[..p.len() - zeros];
    let m = core.len() - 1;
    if m == 0 {
        return out;
    }
    let lead = core[0];
    if m == 1 {
        out.push(Complex64::new(-core[1] / lead, 0.0));
        return out;
    }
    let mut companion = DMatrix::<f64>::zeros(m, m);
    for j in 0..m {
        companion[(0, j)] = -core[j + 1] / lead;
    }
    for i in 1..m {
        companion[(i, i - 1)] = 1.0;
    }
    out.extend(companion.complex_eigenvalues().iter().copied());
    out
}
