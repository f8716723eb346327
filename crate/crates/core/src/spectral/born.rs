use num_complex::Complex64;
use serde::Serialize;

use super::operator::RadialOperator;
use super::tridiag::solve_complex;
use crate::error::{arg_err, Error, Result};

/// Consecutive non-decreasing term norms that count as divergence.
const DIVERGENCE_RUN: usize = 5;

/// Partial Born sum for `(H - z)^{-1} w`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BornResult {
    #[serde(skip)]
    pub u: Vec<Complex64>,
    /// Number of terms summed (`k = 0, ..., terms - 1`).
    pub terms: usize,
    /// Weighted norms of the individual terms.
    pub term_norms: Vec<f64>,
    /// Observed term ratio `||t_k|| / ||t_{k-1}||` at the end of the sum.
    pub ratio: f64,
    /// Geometric bound `||t_K|| q / (1 - q)` on the omitted tail (infinite when `q >= 1`).
    pub tail_bound: f64,
}

fn weighted_norm(op: &RadialOperator, u: &[Complex64]) -> f64 {
    op.weights().iter().zip(u).map(|(w, v)| w * v.norm_sqr()).sum::<f64>().sqrt()
}

/// Solves `(H - z) u = w` (or `(H_0 - z) u = w` without the potential) through
/// the symmetric form: `(S - z) W^{1/2} u = W^{1/2} w`.
fn resolvent_solve(op: &RadialOperator, with_potential: bool, z: Complex64, w: &[Complex64]) -> Result<Vec<Complex64>> {
    let (a, b) = if with_potential { op.symmetric_form() } else { op.free_symmetric_form() };
    let sw: Vec<f64> = op.weights().iter().map(|x| x.sqrt()).collect();
    let diag: Vec<Complex64> = a.iter().map(|&x| Complex64::new(x, 0.0) - z).collect();
    let off: Vec<Complex64> = b.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let rhs: Vec<Complex64> = w.iter().zip(&sw).map(|(v, s)| v * *s).collect();
    let y = solve_complex(&off, &diag, &off, &rhs)?;
    Ok(y.into_iter().zip(&sw).map(|(v, s)| v / *s).collect())
}

fn check_input(op: &RadialOperator, z: Complex64, w: &[Complex64]) -> Result<()> {
    if w.len() != op.cells() {
        return arg_err(format!("vector has length {}, operator has {} cells", w.len(), op.cells()));
    }
    if !z.re.is_finite() || !z.im.is_finite() {
        return arg_err("spectral parameter must be finite");
    }
    Ok(())
}

/// `(H - z)^{-1} w` by a direct tridiagonal solve.
pub fn direct_resolvent_apply(op: &RadialOperator, z: Complex64, w: &[Complex64]) -> Result<Vec<Complex64>> {
    check_input(op, z, w)?;
    resolvent_solve(op, true, z, w)
}

/// `(H - z)^{-1} w = sum_k (-R_0 V)^k R_0 w` with `R_0 = (H_0 - z)^{-1}` the
/// free resolvent, summed until the terms drop below `1e-16` of the partial sum
/// or `k_max` terms have been taken. Fails with [`Error::BornDivergence`] when
/// the term norms fail to decrease for five consecutive steps.
pub fn born_resolvent_apply(op: &RadialOperator, z: Complex64, w: &[Complex64], k_max: usize) -> Result<BornResult> {
    check_input(op, z, w)?;
    if k_max == 0 {
        return arg_err("k_max must be at least 1");
    }
    let v = op.potential();
    let mut term = resolvent_solve(op, false, z, w)?;
    let mut u = term.clone();
    let mut norms = vec![weighted_norm(op, &term)];
    let mut rising = 0;
    while norms.len() < k_max {
        let last = norms[norms.len() - 1];
        if last <= 1e-16 * weighted_norm(op, &u) {
            break;
        }
        let vt: Vec<Complex64> = term.iter().zip(v).map(|(t, vi)| -t * *vi).collect();
        term = resolvent_solve(op, false, z, &vt)?;
        let n = weighted_norm(op, &term);
        if !n.is_finite() {
            return Err(Error::Numerical("Born term overflowed".into()));
        }
        if n == 0.0 {
            break;
        }
        u.iter_mut().zip(&term).for_each(|(a, b)| *a += b);
        norms.push(n);
        if n >= last && last > 0.0 {
            rising += 1;
            if rising >= DIVERGENCE_RUN {
                return Err(Error::BornDivergence { terms: norms.len(), ratio: n / last });
            }
        } else {
            rising = 0;
        }
    }
    let k = norms.len();
    let ratio = if k >= 2 && norms[k - 2] > 0.0 { norms[k - 1] / norms[k - 2] } else { 0.0 };
    let tail_bound = if norms[k - 1] == 0.0 {
        0.0
    } else if ratio < 1.0 {
        norms[k - 1] * ratio / (1.0 - ratio)
    } else {
        f64::INFINITY
    };
    Ok(BornResult { u, terms: k, term_norms: norms, ratio, tail_bound })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::operator::{build_radial_operator, OuterBoundary};

    fn ones(n: usize) -> Vec<Complex64> {
        vec![Complex64::new(1.0, 0.0); n]
    }

    #[test]
    fn free_operator_needs_one_term() {
        let op = build_radial_operator(2, 10.0, 200, |_| 0.0).unwrap();
        let z = Complex64::new(0.05, 0.02);
        let w = ones(op.cells());
        let born = born_resolvent_apply(&op, z, &w, 60).unwrap();
        let direct = direct_resolvent_apply(&op, z, &w).unwrap();
        assert_eq!(born.terms, 1);
        assert_eq!(born.u, direct);
        assert_eq!(born.tail_bound, 0.0);
    }

    #[test]
    fn small_potential_converges() {
        let op = RadialOperator::build(2, 10.0, 300, OuterBoundary::Reflecting, |r| if r < 1.0 { 0.05 } else { 0.0 }).unwrap();
        let z = Complex64::new(0.0, 1.0 / 16.0);
        let w = ones(op.cells());
        let born = born_resolvent_apply(&op, z, &w, 60).unwrap();
        let direct = direct_resolvent_apply(&op, z, &w).unwrap();
        let diff: Vec<Complex64> = born.u.iter().zip(&direct).map(|(a, b)| a - b).collect();
        assert!(weighted_norm(&op, &diff) < 1e-10 * weighted_norm(&op, &direct));
        assert!(born.tail_bound < 1e-12 * weighted_norm(&op, &direct));
    }

    #[test]
    fn rejects_length_mismatch() {
        let op = build_radial_operator(2, 10.0, 100, |_| 0.0).unwrap();
        assert!(born_resolvent_apply(&op, Complex64::new(0.0, 1.0), &ones(3), 10).is_err());
    }
}
