//! Chaos (Fock space) expansion of simple Poisson functionals and a Monte Carlo
//! check of the isometry `E[F^2] = sum_n n! ||f_n||^2`.
//!
//! For a Poisson process of intensity `kappa` and a ball `C` with mean count
//! `v = kappa vol(C)`, the library functionals depend on `omega` only through
//! `N = |omega ∩ C|`. Their kernels
//! `f_n(x_1..x_n) = (1/n!) sum_{J} (-1)^{n-|J|} E[F(omega ∪ {x_j : j in J})]`
//! are then constant on `C^n`, equal to `T_n / n!` with
//! `T_n = sum_j C(n,j) (-1)^{n-j} E[g(N + j)]`, and `n! ||f_n||^2 = T_n^2 v^n / n!`.

use std::str::FromStr;

use serde::Serialize;

use crate::error::{arg_err, Error, Result};
use crate::geom::HPoint;
use crate::par;
use crate::ppp::{ball_volume, PppSampler};
use crate::rng::StreamKey;
use crate::stats::MeanEstimate;

/// Highest order confirmed by Monte Carlo.
pub const MC_CHECK_ORDER: usize = 3;

/// Poisson functionals with closed-form chaos kernels.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Functional {
    /// `|omega ∩ C|`.
    Count,
    /// `|omega ∩ C| - v`.
    CenteredCount,
    /// `1{omega ∩ C = empty}`.
    Void,
    /// `exp(-|omega ∩ C|)`.
    ExpCount,
    /// The constant `c`.
    Constant { c: f64 },
}

impl FromStr for Functional {
    type Err = Error;

    /// `count`, `centered_count`, `void`, `exp_count`, `constant` or `constant=<c>`.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "count" => Ok(Functional::Count),
            "centered_count" => Ok(Functional::CenteredCount),
            "void" => Ok(Functional::Void),
            "exp_count" => Ok(Functional::ExpCount),
            "constant" => Ok(Functional::Constant { c: 1.0 }),
            other => match other.strip_prefix("constant=") {
                Some(c) => {
                    let c = c.trim().parse::<f64>().map_err(|e| Error::Argument(format!("constant value: {e}")))?;
                    Ok(Functional::Constant { c })
                }
                None => arg_err(format!("unknown functional '{other}'")),
            },
        }
    }
}

impl std::fmt::Display for Functional {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Functional::Count => f.write_str("count"),
            Functional::CenteredCount => f.write_str("centered_count"),
            Functional::Void => f.write_str("void"),
            Functional::ExpCount => f.write_str("exp_count"),
            Functional::Constant { c } => write!(f, "constant={c}"),
        }
    }
}

impl Functional {
    /// `F` as a function of the count `N` in a region of mean count `v`.
    pub fn eval(&self, count: u64, v: f64) -> f64 {
        match *self {
            Functional::Count => count as f64,
            Functional::CenteredCount => count as f64 - v,
            Functional::Void => {
                if count == 0 {
                    1.0
                } else {
                    0.0
                }
            }
            Functional::ExpCount => (-(count as f64)).exp(),
            Functional::Constant { c } => c,
        }
    }

    /// `T_n`, the alternating sum of `E[g(N + j)]`, in closed form.
    pub fn alternating_sum(&self, n: usize, v: f64) -> f64 {
        match *self {
            Functional::Count => match n {
                0 => v,
                1 => 1.0,
                _ => 0.0,
            },
            Functional::CenteredCount => match n {
                1 => 1.0,
                _ => 0.0,
            },
            Functional::Void => (-1f64).powi(n as i32) * (-v).exp(),
            Functional::ExpCount => {
                let a = (-1f64).exp() - 1.0;
                a.powi(n as i32) * (v * a).exp()
            }
            Functional::Constant { c } => {
                if n == 0 {
                    c
                } else {
                    0.0
                }
            }
        }
    }

    /// Bound on `|T_{n+1} / T_n|`.
    fn kernel_ratio(&self) -> f64 {
        match self {
            Functional::Void => 1.0,
            Functional::ExpCount => 1.0 - (-1f64).exp(),
            _ => 0.0,
        }
    }
}

/// A geodesic ball with a Poisson intensity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Region {
    pub center: HPoint,
    pub radius: f64,
    pub intensity: f64,
}

impl Region {
    pub fn new(center: HPoint, radius: f64, intensity: f64) -> Result<Self> {
        if !(radius > 0.0) || !(intensity >= 0.0) || !intensity.is_finite() {
            return arg_err("region needs a positive radius and a finite non-negative intensity");
        }
        Ok(Self { center, radius, intensity })
    }

    /// The ball of the given radius about `o` whose mean count is `v`.
    pub fn with_mean_count(d: usize, radius: f64, v: f64) -> Result<Self> {
        let vol = ball_volume(d, radius)?;
        Self::new(HPoint::origin(d)?, radius, v / vol)
    }

    /// Mean count `intensity * vol(C)`.
    pub fn mean_count(&self) -> Result<f64> {
        Ok(self.intensity * ball_volume(self.center.dim(), self.radius)?)
    }
}

/// Monte Carlo confirmation of one alternating sum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KernelCheck {
    pub n: usize,
    pub closed_form: f64,
    pub estimate: f64,
    pub stderr: f64,
    pub passed: bool,
}

/// Chaos kernels of a library functional on a region.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChaosKernels {
    pub functional: Functional,
    pub region: Region,
    pub v: f64,
    pub f0: f64,
    /// Constant value of `f_n` on `C^n`, `n = 0..=n_max`.
    pub kernel_values: Vec<f64>,
    /// `n! ||f_n||^2`, `n = 0..=n_max`.
    pub norms: Vec<f64>,
    /// Bound on `sum_{n > n_max} n! ||f_n||^2`.
    pub tail_bound: f64,
    pub checks: Vec<KernelCheck>,
}

impl ChaosKernels {
    /// `sum_n n! ||f_n||^2` over the stored orders.
    pub fn norm_sum(&self) -> f64 {
        self.norms.iter().sum()
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn binomial(n: usize, k: usize) -> f64 {
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// Counts `|omega ∩ C|` for `samples` independent configurations, configuration
/// `j` drawn from `key.rng(j)`.
fn sample_counts(region: &Region, samples: usize, key: StreamKey) -> Result<Vec<u64>> {
    let sampler = PppSampler::new(region.center.dim(), region.radius, region.intensity)?;
    Ok(par::map_indexed(samples, |j| sampler.sample(&mut key.rng(j as u64)).len() as u64))
}

/// Kernels by closed form, with each `T_n` for `n <= 3` confirmed against its
/// Monte Carlo estimate from `mc_samples` configurations (3 standard errors).
pub fn chaos_kernels(
    functional: Functional,
    region: &Region,
    n_max: usize,
    mc_samples: usize,
    key: StreamKey,
) -> Result<ChaosKernels> {
    if mc_samples < 2 {
        return arg_err("need at least 2 Monte Carlo samples");
    }
    let v = region.mean_count()?;
    let t: Vec<f64> = (0..=n_max).map(|n| functional.alternating_sum(n, v)).collect();
    let kernel_values: Vec<f64> = t.iter().enumerate().map(|(n, tn)| tn / factorial(n)).collect();
    let norms: Vec<f64> = t.iter().enumerate().map(|(n, tn)| tn * tn * v.powi(n as i32) / factorial(n)).collect();
    let a = functional.kernel_ratio();
    let q = a * a * v / (n_max as f64 + 1.0);
    let last = norms[n_max];
    let tail_bound = if last == 0.0 || q == 0.0 {
        0.0
    } else if q < 1.0 {
        last * q / (1.0 - q)
    } else {
        f64::INFINITY
    };

    let counts = sample_counts(region, mc_samples, key)?;
    let checks = (0..=n_max.min(MC_CHECK_ORDER))
        .map(|n| {
            let per_sample: Vec<f64> = counts
                .iter()
                .map(|&c| {
                    (0..=n)
                        .map(|j| binomial(n, j) * (-1f64).powi((n - j) as i32) * functional.eval(c + j as u64, v))
                        .sum()
                })
                .collect();
            let m = MeanEstimate::from_samples(&per_sample);
            let tol = 3.0 * m.stderr + 1e-12 * (1.0 + t[n].abs());
            KernelCheck { n, closed_form: t[n], estimate: m.mean, stderr: m.stderr, passed: (m.mean - t[n]).abs() <= tol }
        })
        .collect();
    Ok(ChaosKernels { functional, region: *region, v, f0: t[0], kernel_values, norms, tail_bound, checks })
}

/// Both sides of the isometry.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IsometryReport {
    pub functional: String,
    pub v: f64,
    /// `E[F^2]` by Monte Carlo.
    pub lhs: f64,
    pub lhs_stderr: f64,
    /// `sum_{n <= n_max} n! ||f_n||^2`.
    pub rhs: f64,
    pub rel_error: f64,
    pub n_max: usize,
    pub tail_bound: f64,
}

/// `E[F^2]` over `mc_samples` configurations against the kernel norm sum.
pub fn isometry_check(
    functional: Functional,
    region: &Region,
    n_max: usize,
    mc_samples: usize,
    key: StreamKey,
) -> Result<IsometryReport> {
    let kernels = chaos_kernels(functional, region, n_max, mc_samples, key.derive(1))?;
    let counts = sample_counts(region, mc_samples, key.derive(2))?;
    let sq: Vec<f64> = counts.iter().map(|&c| functional.eval(c, kernels.v).powi(2)).collect();
    let lhs = MeanEstimate::from_samples(&sq);
    let rhs = kernels.norm_sum();
    let rel_error = if rhs != 0.0 { (lhs.mean - rhs).abs() / rhs.abs() } else { (lhs.mean - rhs).abs() };
    Ok(IsometryReport {
        functional: functional.to_string(),
        v: kernels.v,
        lhs: lhs.mean,
        lhs_stderr: lhs.stderr,
        rhs,
        rel_error,
        n_max,
        tail_bound: kernels.tail_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_names() {
        assert_eq!("count".parse::<Functional>().unwrap(), Functional::Count);
        assert_eq!("constant=2.5".parse::<Functional>().unwrap(), Functional::Constant { c: 2.5 });
        assert!("sum".parse::<Functional>().is_err());
        assert!("constant=x".parse::<Functional>().is_err());
    }

    #[test]
    fn closed_form_sums() {
        let v: f64 = 2.0;
        let count: f64 = (0..=12).map(|n| Functional::Count.alternating_sum(n, v).powi(2) * v.powi(n as i32) / factorial(n)).sum();
        assert_eq!(count, 6.0);
        let void: f64 = (0..=30).map(|n| Functional::Void.alternating_sum(n, 1.0).powi(2) / factorial(n)).sum();
        assert!((void - (-1f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn alternating_sum_matches_definition() {
        // T_n = sum_j C(n,j) (-1)^{n-j} E[g(N+j)] with E over Poisson(v), by direct summation
        let v: f64 = 1.3;
        let pois = |k: u64| (-v).exp() * v.powi(k as i32) / factorial(k as usize);
        for f in [Functional::Count, Functional::Void, Functional::ExpCount, Functional::CenteredCount] {
            for n in 0..5 {
                let direct: f64 = (0..=n)
                    .map(|j| {
                        let e: f64 = (0..60u64).map(|k| pois(k) * f.eval(k + j as u64, v)).sum();
                        binomial(n, j) * (-1f64).powi((n - j) as i32) * e
                    })
                    .sum();
                assert!((direct - f.alternating_sum(n, v)).abs() < 1e-12, "{f} n={n}");
            }
        }
    }
}
