//! Tridiagonal kernels.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Number of eigenvalues below `x` of the symmetric tridiagonal matrix with
/// diagonal `a` and off-diagonal `b` (Sturm sequence via LDL^T pivots).
pub fn sturm_count(a: &[f64], b: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = a[0] - x;
    if q < 0.0 {
        count += 1;
    }
    for i in 1..a.len() {
        let qq = if q == 0.0 { f64::EPSILON * (a[i - 1].abs() + b[i - 1].abs()).max(f64::MIN_POSITIVE) } else { q };
        q = a[i] - x - b[i - 1] * b[i - 1] / qq;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Gershgorin interval of a symmetric tridiagonal matrix.
pub fn gershgorin_interval(a: &[f64], b: &[f64]) -> (f64, f64) {
    let n = a.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i > 0 { b[i - 1].abs() } else { 0.0 } + if i + 1 < n { b[i].abs() } else { 0.0 };
        lo = lo.min(a[i] - r);
        hi = hi.max(a[i] + r);
    }
    (lo, hi)
}

/// The `k`-th smallest eigenvalue (0-based) by bisection to machine precision.
pub fn bisect_eigenvalue(a: &[f64], b: &[f64], k: usize) -> f64 {
    let (mut lo, mut hi) = gershgorin_interval(a, b);
    let pad = 1e-12 * (lo.abs() + hi.abs()).max(1.0);
    lo -= pad;
    hi += pad;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(a, b, mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `y = T x` for the symmetric tridiagonal `T`.
pub fn sym_matvec(a: &[f64], b: &[f64], x: &[f64]) -> Vec<f64> {
    let n = a.len();
    (0..n)
        .map(|i| {
            let mut s = a[i] * x[i];
            if i > 0 {
                s += b[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                s += b[i] * x[i + 1];
            }
            s
        })
        .collect()
}

/// Solves `(T - shift) x = rhs` for symmetric tridiagonal `T` with `T - shift`
/// positive definite, by LDL^T.
pub fn solve_shifted(a: &[f64], b: &[f64], shift: f64, rhs: &[f64]) -> Result<Vec<f64>> {
    let n = a.len();
    let mut dd = vec![0.0; n];
    let mut l = vec![0.0; n.saturating_sub(1)];
    dd[0] = a[0] - shift;
    for i in 1..n {
        if dd[i - 1] == 0.0 || !dd[i - 1].is_finite() {
            return Err(Error::Numerical("singular shifted tridiagonal matrix".into()));
        }
        l[i - 1] = b[i - 1] / dd[i - 1];
        dd[i] = a[i] - shift - l[i - 1] * b[i - 1];
    }
    if dd[n - 1] == 0.0 {
        return Err(Error::Numerical("singular shifted tridiagonal matrix".into()));
    }
    let mut x = rhs.to_vec();
    for i in 1..n {
        x[i] -= l[i - 1] * x[i - 1];
    }
    for i in 0..n {
        x[i] /= dd[i];
    }
    for i in (0..n - 1).rev() {
        x[i] -= l[i] * x[i + 1];
    }
    Ok(x)
}

/// Solves a general complex tridiagonal system with sub-diagonal `lower`,
/// diagonal `diag` and super-diagonal `upper`, by Gaussian elimination with
/// partial pivoting.
pub fn solve_complex(lower: &[Complex64], diag: &[Complex64], upper: &[Complex64], rhs: &[Complex64]) -> Result<Vec<Complex64>> {
    let n = diag.len();
    let mut dl = lower.to_vec();
    let mut d = diag.to_vec();
    let mut du = upper.to_vec();
    let mut du2 = vec![Complex64::new(0.0, 0.0); n.saturating_sub(2)];
    let mut x = rhs.to_vec();
    for i in 0..n.saturating_sub(1) {
        if d[i].norm_sqr() >= dl[i].norm_sqr() {
            if d[i].norm_sqr() == 0.0 {
                return Err(Error::Numerical("singular tridiagonal system".into()));
            }
            let f = dl[i] / d[i];
            d[i + 1] -= f * du[i];
            x[i + 1] = x[i + 1] - f * x[i];
            if i + 2 < n {
                du2[i] = Complex64::new(0.0, 0.0);
            }
        } else {
            let f = d[i] / dl[i];
            d[i] = dl[i];
            let tmp = d[i + 1];
            d[i + 1] = du[i] - f * tmp;
            du[i] = tmp;
            if i + 2 < n {
                du2[i] = du[i + 1];
                du[i + 1] = -f * du[i + 1];
            }
            x.swap(i, i + 1);
            x[i + 1] = x[i + 1] - f * x[i];
        }
        dl[i] = Complex64::new(0.0, 0.0);
    }
    if d[n - 1].norm_sqr() == 0.0 {
        return Err(Error::Numerical("singular tridiagonal system".into()));
    }
    x[n - 1] /= d[n - 1];
    if n > 1 {
        x[n - 2] = (x[n - 2] - du[n - 2] * x[n - 1]) / d[n - 2];
    }
    for i in (0..n.saturating_sub(2)).rev() {
        x[i] = (x[i] - du[i] * x[i + 1] - du2[i] * x[i + 2]) / d[i];
    }
    Ok(x)
}
