use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use super::operator::RadialOperator;
use super::tridiag::{solve_complex, sturm_count};
use crate::error::{arg_err, Error, Result};
use crate::par;

/// Spectral projector applied to the constant function.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ContourResult {
    /// `P 1 / ||P 1||_W`, sign fixed to be positive on average.
    pub projected: Vec<f64>,
    /// `||P 1||_W` before normalization.
    pub norm: f64,
    /// Rayleigh quotient of `P 1`.
    pub rayleigh: f64,
    pub center: f64,
    pub radius: f64,
    pub nodes: usize,
}

/// Confirms that the circle encloses exactly the lowest eigenvalue and stays at
/// least `1e-6 radius` away from every eigenvalue, using Sturm counts.
fn check_contour(op: &RadialOperator, center: f64, radius: f64) -> Result<()> {
    let (a, b) = op.symmetric_form();
    let margin = 1e-6 * radius;
    let lo = center - radius;
    let hi = center + radius;
    let count = |x: f64| sturm_count(&a, &b, x);
    if count(lo - margin) != count(lo + margin) || count(hi - margin) != count(hi + margin) {
        return Err(Error::Contour(format!(
            "an eigenvalue lies within {margin:.3e} of the contour |z - {center}| = {radius}"
        )));
    }
    let (below, inside) = (count(lo), count(hi) - count(lo));
    if below != 0 || inside != 1 {
        return Err(Error::Contour(format!(
            "contour must enclose exactly the lowest eigenvalue ({below} below, {inside} inside)"
        )));
    }
    Ok(())
}

/// `P v = (1/(2 pi i)) oint (z - H)^{-1} v dz` on the circle
/// `|z - center| = radius` by the trapezoid rule with `nodes` points. Node
/// contributions are computed in parallel and summed in index order.
pub fn apply_projector(op: &RadialOperator, center: f64, radius: f64, nodes: usize, v: &[f64]) -> Result<Vec<f64>> {
    if !(radius > 0.0) || !center.is_finite() || !radius.is_finite() {
        return arg_err("contour needs a finite centre and positive radius");
    }
    if nodes < 4 {
        return arg_err("contour needs at least 4 nodes");
    }
    if v.len() != op.cells() {
        return arg_err("vector length does not match the operator");
    }
    check_contour(op, center, radius)?;
    let (a, b) = op.symmetric_form();
    let sw: Vec<f64> = op.weights().iter().map(|x| x.sqrt()).collect();
    let off: Vec<Complex64> = b.iter().map(|&x| Complex64::new(-x, 0.0)).collect();
    let rhs: Vec<Complex64> = v.iter().zip(&sw).map(|(x, s)| Complex64::new(x * s, 0.0)).collect();
    let parts = par::try_map_indexed(nodes, |j| {
        let theta = 2.0 * PI * (j as f64 + 0.5) / nodes as f64;
        let e = Complex64::from_polar(radius, theta);
        let z = center + e;
        // (z - S) y = W^{1/2} v, then (z - H)^{-1} v = W^{-1/2} y
        let diag: Vec<Complex64> = a.iter().map(|&x| z - x).collect();
        let y = solve_complex(&off, &diag, &off, &rhs)?;
        Ok(y.into_iter().zip(&sw).map(|(c, s)| (c * e).re / s).collect::<Vec<f64>>())
    })?;
    let mut out = vec![0.0; op.cells()];
    for p in &parts {
        out.iter_mut().zip(p).for_each(|(o, c)| *o += c);
    }
    out.iter_mut().for_each(|o| *o /= nodes as f64);
    Ok(out)
}

/// Projects the constant function onto the eigenspace inside the contour and
/// returns the normalized image with its Rayleigh quotient.
pub fn contour_projector(op: &RadialOperator, center: f64, radius: f64, nodes: usize) -> Result<ContourResult> {
    let one = vec![1.0; op.cells()];
    let mut p = apply_projector(op, center, radius, nodes, &one)?;
    let norm = op.norm(&p);
    if !(norm > 0.0) {
        return Err(Error::Contour("projection of the constant vanishes".into()));
    }
    let s = if p.iter().zip(op.weights()).map(|(x, w)| x * w).sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
    p.iter_mut().for_each(|x| *x *= s / norm);
    let rayleigh = op.energy(&p) / op.inner(&p, &p);
    Ok(ContourResult { projected: p, norm, rayleigh, center, radius, nodes })
}
