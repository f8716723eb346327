use serde::Serialize;

use super::operator::{OuterBoundary, RadialOperator};
use super::tridiag::{bisect_eigenvalue, solve_shifted, sym_matvec};
use crate::error::{Error, Result};
use crate::interp::Pchip;

/// Ground eigenpair of a [`RadialOperator`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RadialSpectrum {
    pub d: usize,
    pub r_max: f64,
    pub m: usize,
    pub boundary: OuterBoundary,
    /// Ground energy (Rayleigh quotient of `phi`).
    pub rho: f64,
    /// Second eigenvalue.
    pub lambda1: f64,
    pub gap: f64,
    /// `||H phi - rho phi||_W`.
    pub residual: f64,
    /// Set when the numerical gap is below `1e-12`.
    pub degenerate: bool,
    /// Cell centres.
    pub r: Vec<f64>,
    /// Positive ground state with `sum W_i phi_i^2 = 1`.
    pub phi: Vec<f64>,
}

/// Smallest eigenpair by Sturm bisection and inverse iteration.
pub fn solve_ground_state(op: &RadialOperator) -> Result<RadialSpectrum> {
    let (a, b) = op.symmetric_form();
    let lam0 = bisect_eigenvalue(&a, &b, 0);
    let lam1 = bisect_eigenvalue(&a, &b, 1);
    let gap = lam1 - lam0;
    let degenerate = gap < 1e-12;
    let shift = lam0 - (1e-6 * gap).max(1e-14 * lam0.abs().max(1.0));

    let m = a.len();
    let mut y = vec![1.0 / (m as f64).sqrt(); m];
    for _ in 0..50 {
        let mut next = solve_shifted(&a, &b, shift, &y)?;
        let n = next.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::Numerical("inverse iteration broke down".into()));
        }
        let s = if next.iter().sum::<f64>() < 0.0 { -1.0 / n } else { 1.0 / n };
        next.iter_mut().for_each(|v| *v *= s);
        let change = next.iter().zip(&y).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
        y = next;
        if change < 1e-15 {
            break;
        }
    }
    let sy = sym_matvec(&a, &b, &y);
    let ray_s: f64 = y.iter().zip(&sy).map(|(p, q)| p * q).sum();
    let residual = sy.iter().zip(&y).map(|(p, q)| (p - ray_s * q).powi(2)).sum::<f64>().sqrt();

    let phi: Vec<f64> = y.iter().zip(op.weights()).map(|(v, w)| v / w.sqrt()).collect();
    if let Some(i) = phi.iter().position(|v| !(*v > 0.0)) {
        return Err(Error::Numerical(format!(
            "ground state changes sign at r = {:.6} (value {:.3e})",
            op.grid()[i],
            phi[i]
        )));
    }
    let rho = op.energy(&phi) / op.inner(&phi, &phi);
    Ok(RadialSpectrum {
        d: op.dim(),
        r_max: op.r_max(),
        m: op.cells(),
        boundary: op.boundary(),
        rho,
        lambda1: lam1,
        gap,
        residual,
        degenerate,
        r: op.grid().to_vec(),
        phi,
    })
}

impl RadialSpectrum {
    /// Monotone cubic interpolant of `ln phi`, extended evenly across `r = 0`.
    pub fn log_phi_interpolant(&self) -> Result<Pchip> {
        let mut x = Vec::with_capacity(self.r.len() + 1);
        let mut y = Vec::with_capacity(self.r.len() + 1);
        x.push(-self.r[0]);
        y.push(self.phi[0].ln());
        for (r, p) in self.r.iter().zip(&self.phi) {
            x.push(*r);
            y.push(p.ln());
        }
        Pchip::new(x, y)
    }

    /// Largest radius covered by the grid.
    pub fn max_radius(&self) -> f64 {
        self.r[self.r.len() - 1]
    }

    /// `phi(r) / phi(0)` from the interpolant.
    pub fn ratio(&self, r: f64) -> Result<f64> {
        let f = self.log_phi_interpolant()?;
        let l0 = f.eval(0.0).expect("0 lies inside the grid");
        let lr = f.eval(r).ok_or(Error::Extrapolation { r, max: self.max_radius() })?;
        Ok((lr - l0).exp())
    }
}
