use serde::{Deserialize, Serialize};

use crate::error::{arg_err, Error, Result};
use crate::quad::gauss_legendre5;

/// Boundary condition at the outer radius.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OuterBoundary {
    /// `phi(R_max) = 0`.
    Dirichlet,
    /// Zero flux at `R_max`. The free ground state is the constant, with
    /// eigenvalue 0, and the rest of the spectrum sits near `(d-1)^2/8` and above.
    Reflecting,
}

impl std::fmt::Display for OuterBoundary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            OuterBoundary::Dirichlet => "dirichlet",
            OuterBoundary::Reflecting => "reflecting",
        })
    }
}

impl std::str::FromStr for OuterBoundary {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dirichlet" => Ok(OuterBoundary::Dirichlet),
            "reflecting" | "neumann" => Ok(OuterBoundary::Reflecting),
            other => arg_err(format!("unknown boundary condition '{other}'")),
        }
    }
}

/// Cell-centred finite-volume discretization of the radial operator on
/// `(0, R_max]` with `M` cells.
///
/// In function values `f_i` the operator is `W^{-1} (K + V W)`, with `W` the
/// cell volumes (`int sinh^{d-1}`) and `K` the stiffness matrix from face
/// fluxes. Its symmetric form is `S = W^{-1/2} (K + V W) W^{-1/2}`.
#[derive(Clone, Debug, PartialEq)]
pub struct RadialOperator {
    d: usize,
    r_max: f64,
    boundary: OuterBoundary,
    centers: Vec<f64>,
    weights: Vec<f64>,
    potential: Vec<f64>,
    /// Stiffness diagonal and off-diagonal.
    k_diag: Vec<f64>,
    k_off: Vec<f64>,
    /// Generator entries `L_{i,i+1}` and `L_{i+1,i}` assembled row by row.
    upper: Vec<f64>,
    lower: Vec<f64>,
}

/// Same as [`RadialOperator::build`] with a Dirichlet outer wall.
pub fn build_radial_operator<F: Fn(f64) -> f64>(d: usize, r_max: f64, m: usize, v: F) -> Result<RadialOperator> {
    RadialOperator::build(d, r_max, m, OuterBoundary::Dirichlet, v)
}

impl RadialOperator {
    /// `v` is averaged over each cell against `sinh^{d-1}`.
    pub fn build<F: Fn(f64) -> f64>(d: usize, r_max: f64, m: usize, boundary: OuterBoundary, v: F) -> Result<Self> {
        if d < 2 {
            return arg_err(format!("dimension must be >= 2 (got {d})"));
        }
        if m < 50 {
            return arg_err(format!("need at least 50 cells (got {m})"));
        }
        if !(r_max >= 5.0) || !r_max.is_finite() {
            return arg_err(format!("outer radius must be >= 5 (got {r_max})"));
        }
        let p = (d - 1) as i32;
        let dr = r_max / m as f64;
        let face = |j: usize| j as f64 * dr;
        let centers: Vec<f64> = (0..m).map(|i| (i as f64 + 0.5) * dr).collect();
        let mut weights = Vec::with_capacity(m);
        let mut potential = Vec::with_capacity(m);
        for i in 0..m {
            let (a, b) = (face(i), face(i + 1));
            let w = gauss_legendre5(|t| t.sinh().powi(p), a, b);
            let vw = gauss_legendre5(|t| v(t) * t.sinh().powi(p), a, b);
            let vi = vw / w;
            if !vi.is_finite() {
                return Err(Error::Domain(format!("potential is not finite near r = {:.6}", centers[i])));
            }
            weights.push(w);
            potential.push(vi);
        }
        let area: Vec<f64> = (0..=m).map(|j| face(j).sinh().powi(p)).collect();
        let mut k_diag = vec![0.0; m];
        let mut k_off = vec![0.0; m - 1];
        let mut upper = vec![0.0; m - 1];
        let mut lower = vec![0.0; m - 1];
        for i in 0..m {
            let left = 0.5 * area[i] / dr;
            let right = 0.5 * area[i + 1] / dr;
            k_diag[i] = left + right;
            if i + 1 < m {
                k_off[i] = -right;
                upper[i] = -right / weights[i];
            } else {
                k_diag[i] -= right;
                if boundary == OuterBoundary::Dirichlet {
                    k_diag[i] += 2.0 * right;
                }
            }
            if i > 0 {
                lower[i - 1] = -left / weights[i];
            }
        }
        Ok(Self { d, r_max, boundary, centers, weights, potential, k_diag, k_off, upper, lower })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn cells(&self) -> usize {
        self.centers.len()
    }

    pub fn boundary(&self) -> OuterBoundary {
        self.boundary
    }

    /// Cell centres `(i + 1/2) R_max / M`.
    pub fn grid(&self) -> &[f64] {
        &self.centers
    }

    /// Cell volumes `int sinh^{d-1}(r) dr`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Cell-averaged potential.
    pub fn potential(&self) -> &[f64] {
        &self.potential
    }

    pub fn stiffness(&self) -> (&[f64], &[f64]) {
        (&self.k_diag, &self.k_off)
    }

    /// The same operator with `V` replaced by `V + c` (cellwise, exactly).
    pub fn shifted(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.potential.iter_mut().for_each(|v| *v += c);
        out
    }

    /// The same operator with `V` replaced by `s V`.
    pub fn scaled_potential(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.potential.iter_mut().for_each(|v| *v *= s);
        out
    }

    /// The same operator with `V = 0`.
    pub fn free(&self) -> Self {
        self.scaled_potential(0.0)
    }

    /// Diagonal and off-diagonal of the symmetric form `S`.
    pub fn symmetric_form(&self) -> (Vec<f64>, Vec<f64>) {
        let a = (0..self.cells()).map(|i| self.k_diag[i] / self.weights[i] + self.potential[i]).collect();
        let b = (0..self.cells() - 1)
            .map(|i| self.k_off[i] / (self.weights[i] * self.weights[i + 1]).sqrt())
            .collect();
        (a, b)
    }

    /// Off-diagonal of the symmetric form together with its kinetic diagonal
    /// (`S` without the potential).
    pub fn free_symmetric_form(&self) -> (Vec<f64>, Vec<f64>) {
        let (mut a, b) = self.symmetric_form();
        a.iter_mut().zip(&self.potential).for_each(|(x, v)| *x -= v);
        (a, b)
    }

    /// Largest relative violation of `W_i L_{i,i+1} = W_{i+1} L_{i+1,i}`.
    pub fn symmetry_defect(&self) -> f64 {
        (0..self.cells() - 1)
            .map(|i| {
                let x = self.weights[i] * self.upper[i];
                let y = self.weights[i + 1] * self.lower[i];
                (x - y).abs() / x.abs().max(y.abs()).max(f64::MIN_POSITIVE)
            })
            .fold(0.0, f64::max)
    }

    /// Row-wise Gershgorin lower bounds of `W^{-1}(K + V W)`.
    pub fn gershgorin_lower_bounds(&self) -> Vec<f64> {
        let m = self.cells();
        (0..m)
            .map(|i| {
                let mut off = 0.0;
                if i > 0 {
                    off += self.lower[i - 1].abs();
                }
                if i + 1 < m {
                    off += self.upper[i].abs();
                }
                self.k_diag[i] / self.weights[i] + self.potential[i] - off
            })
            .collect()
    }

    /// `<u, v>_W = sum W_i u_i v_i`.
    pub fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        self.weights.iter().zip(u).zip(v).map(|((w, a), b)| w * a * b).sum()
    }

    pub fn norm(&self, u: &[f64]) -> f64 {
        self.inner(u, u).sqrt()
    }

    /// Quadratic form `<u, H u>_W` written as a sum of squared differences.
    pub fn energy(&self, u: &[f64]) -> f64 {
        let m = self.cells();
        let mut e = 0.0;
        for i in 0..m - 1 {
            e += -self.k_off[i] * (u[i + 1] - u[i]).powi(2);
        }
        let wall = self.k_diag[m - 1] + if m > 1 { self.k_off[m - 2] } else { 0.0 };
        e += wall * u[m - 1] * u[m - 1];
        for i in 0..m {
            e += self.potential[i] * self.weights[i] * u[i] * u[i];
        }
        e
    }

    /// `H u` in function values.
    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        let m = self.cells();
        (0..m)
            .map(|i| {
                let mut s = self.k_diag[i] * u[i];
                if i > 0 {
                    s += self.k_off[i - 1] * u[i - 1];
                }
                if i + 1 < m {
                    s += self.k_off[i] * u[i + 1];
                }
                s / self.weights[i] + self.potential[i] * u[i]
            })
            .collect()
    }
}
