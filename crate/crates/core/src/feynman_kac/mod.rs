//! Feynman-Kac tilted path measures: survival constants `Z_T^x`, ground-state
//! energy and eigenfunction estimates, Q-process marginals and Doob-transform
//! simulation.
//!
//! Path `i` of every ensemble draws from `key.rng(i)`. Passing the same key to
//! two estimators therefore couples them through common random numbers.

mod ground;
mod qproc;
mod smc;

pub use ground::{estimate_phi_ratio, estimate_rho, tail_start, GroundStateEstimate, PhiRatio, SlopeDiagnostics, WindowFit};
pub use qproc::{
    doob_endpoint_radii, doob_simulate, free_marginal_radii, q_marginal, DoobDrift, QHistogram, QMarginal,
};
pub use smc::{smc_estimate_z, SmcEstimate};

use rand::Rng;
use serde::Serialize;

use crate::diffusion::{gaussian_step, step_count, PathSample};
use crate::error::{arg_err, Result};
use crate::geom::HPoint;
use crate::par;
use crate::ppp::{Configuration, PotentialField, PotentialSpec, PppSampler};
use crate::rng::StreamKey;
use crate::stats::{effective_sample_size, MeanEstimate};

/// Compensated running sum.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    #[inline]
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub(crate) fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// State of one path: position, potential at the position, running integral.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Walker {
    pub x: HPoint,
    pub v: f64,
    pub integral: Neumaier,
}

impl Walker {
    pub(crate) fn start(field: &PotentialField, x0: &HPoint) -> Result<Self> {
        Ok(Self { x: *x0, v: field.evaluate(x0)?, integral: Neumaier::default() })
    }

    /// Advances `steps` steps, adding the trapezoid increments of the potential
    /// integral.
    #[inline]
    pub(crate) fn advance<R: Rng + ?Sized>(
        &mut self,
        field: &PotentialField,
        steps: usize,
        h: f64,
        rng: &mut R,
    ) -> Result<()> {
        let sqrt_h = h.sqrt();
        let half_h = 0.5 * h;
        for _ in 0..steps {
            gaussian_step(&mut self.x, sqrt_h, rng);
            let v = field.evaluate(&self.x)?;
            self.integral.add(half_h * (self.v + v));
            self.v = v;
        }
        Ok(())
    }
}

/// Trapezoid rule `sum (t_{k+1} - t_k)/2 (V(X_k) + V(X_{k+1}))` along a stored path.
pub fn path_potential_integral(path: &PathSample, spec: &PotentialSpec, config: &Configuration) -> Result<f64> {
    let field = PotentialField::new(spec, config)?;
    let mut acc = Neumaier::default();
    let mut prev = field.evaluate(path.start())?;
    for k in 1..path.points.len() {
        let v = field.evaluate(&path.points[k])?;
        acc.add(0.5 * (path.times[k] - path.times[k - 1]) * (prev + v));
        prev = v;
    }
    Ok(acc.value())
}

/// Parameters shared by every ensemble.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnsembleMeta {
    pub spec: PotentialSpec,
    pub window_radius: f64,
    pub configuration_size: usize,
    pub t: f64,
    pub h: f64,
    pub n: usize,
    pub seed: u64,
}

/// `N` paths summarized by their endpoints and log-weights `-int_0^T V(X_s) ds`.
#[derive(Clone, Debug, PartialEq)]
pub struct PathEnsemble {
    pub endpoints: Vec<HPoint>,
    pub log_weights: Vec<f64>,
    pub meta: EnsembleMeta,
}

impl PathEnsemble {
    pub fn weights(&self) -> Vec<f64> {
        self.log_weights.iter().map(|l| l.exp()).collect()
    }

    pub fn ess(&self) -> f64 {
        effective_sample_size(&self.weights())
    }

    /// Plain Monte Carlo estimate of `Z_T^x`.
    pub fn z(&self) -> ZEstimate {
        let m = MeanEstimate::from_samples(&self.weights());
        ZEstimate { t: self.meta.t, z: m.mean, stderr: m.stderr, n: m.n }
    }
}

/// Estimate of `Z_T^x` with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ZEstimate {
    pub t: f64,
    pub z: f64,
    pub stderr: f64,
    pub n: usize,
}

impl ZEstimate {
    /// `-log Z / T`.
    pub fn decay_rate(&self) -> f64 {
        -self.z.ln() / self.t
    }
}

/// Runs `n` paths from `x0` to time `t`.
pub fn sample_ensemble(
    x0: &HPoint,
    config: &Configuration,
    spec: &PotentialSpec,
    t: f64,
    h: f64,
    n: usize,
    key: StreamKey,
) -> Result<PathEnsemble> {
    let steps = step_count(t, h)?;
    let field = PotentialField::new(spec, config)?;
    let runs = par::try_map_indexed(n, |i| {
        let mut rng = key.rng(i as u64);
        let mut w = Walker::start(&field, x0)?;
        w.advance(&field, steps, h, &mut rng)?;
        Ok((w.x, -w.integral.value()))
    })?;
    let (endpoints, log_weights) = runs.into_iter().unzip();
    Ok(PathEnsemble {
        endpoints,
        log_weights,
        meta: EnsembleMeta {
            spec: *spec,
            window_radius: config.window_radius(),
            configuration_size: config.len(),
            t,
            h,
            n,
            seed: key.seed(),
        },
    })
}

/// Plain Monte Carlo estimate of `Z_T^x = E^x[exp(-int_0^T V(X_s) ds)]`.
pub fn estimate_z(
    x0: &HPoint,
    config: &Configuration,
    spec: &PotentialSpec,
    t: f64,
    h: f64,
    n: usize,
    key: StreamKey,
) -> Result<ZEstimate> {
    if n < 2 {
        return arg_err(format!("need at least 2 paths (got {n})"));
    }
    Ok(sample_ensemble(x0, config, spec, t, h, n, key)?.z())
}

/// Annealed survival: `Z_T^x` averaged over `configs` independent Poisson
/// configurations, each estimated with `n` paths.
#[allow(clippy::too_many_arguments)]
pub fn estimate_z_annealed(
    x0: &HPoint,
    sampler: &PppSampler,
    spec: &PotentialSpec,
    t: f64,
    h: f64,
    n: usize,
    configs: usize,
    key: StreamKey,
) -> Result<MeanEstimate> {
    if configs < 2 {
        return arg_err(format!("need at least 2 configurations (got {configs})"));
    }
    let config_key = key.derive(0xC0F1);
    let mut zs = Vec::with_capacity(configs);
    for j in 0..configs {
        let config = sampler.sample(&mut config_key.rng(j as u64));
        zs.push(estimate_z(x0, &config, spec, t, h, n, key.derive(j as u64))?.z);
    }
    Ok(MeanEstimate::from_samples(&zs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ppp::Profile;

    pub(crate) fn saturated(d: usize, c: f64) -> (PotentialSpec, Configuration) {
        let spec = PotentialSpec::new(Profile::Bump { amplitude: 1e6 }, 50.0, c, 1.0).unwrap();
        let config = Configuration::planted(d, vec![HPoint::origin(d).unwrap()], 60.0).unwrap();
        (spec, config)
    }

    #[test]
    fn empty_configuration_survives_surely() {
        let spec = PotentialSpec::new(Profile::Bump { amplitude: 0.1 }, 1.0, 0.1, 1.0).unwrap();
        let config = Configuration::empty(2, 10.0).unwrap();
        let o = HPoint::origin(2).unwrap();
        let z = estimate_z(&o, &config, &spec, 1.0, 0.01, 50, StreamKey::new(1)).unwrap();
        assert_eq!(z.z, 1.0);
        assert_eq!(z.stderr, 0.0);
    }

    #[test]
    fn constant_potential_gives_exponential() {
        let (spec, config) = saturated(2, 0.07);
        let o = HPoint::origin(2).unwrap();
        let z = estimate_z(&o, &config, &spec, 2.0, 0.01, 40, StreamKey::new(3)).unwrap();
        assert!((z.z - (-0.14f64).exp()).abs() < 1e-14);
        assert_eq!(z.stderr, 0.0);
    }

    #[test]
    fn stored_path_integral_matches_streaming() {
        let spec = PotentialSpec::new(Profile::Bump { amplitude: 0.1 }, 1.0, 0.1, 1.0).unwrap();
        let config = Configuration::planted(2, vec![HPoint::on_axis(2, 0.3).unwrap()], 10.0).unwrap();
        let o = HPoint::origin(2).unwrap();
        let key = StreamKey::new(11);
        let path = crate::diffusion::simulate_path(&o, 1.0, 0.01, &mut key.rng(0)).unwrap();
        let direct = path_potential_integral(&path, &spec, &config).unwrap();
        let ens = sample_ensemble(&o, &config, &spec, 1.0, 0.01, 1, key).unwrap();
        assert!((direct + ens.log_weights[0]).abs() < 1e-14);
        assert!(direct > 0.0);
    }

    #[test]
    fn needs_two_paths() {
        let (spec, config) = saturated(2, 0.05);
        let o = HPoint::origin(2).unwrap();
        assert!(estimate_z(&o, &config, &spec, 1.0, 0.01, 1, StreamKey::new(1)).is_err());
    }
}
