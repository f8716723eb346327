use rand::Rng;
use serde::Serialize;

use super::Walker;
use crate::diffusion::step_count;
use crate::error::{arg_err, Result};
use crate::geom::HPoint;
use crate::par;
use crate::ppp::{Configuration, PotentialField, PotentialSpec};
use crate::rng::{StreamKey, StreamRng};
use crate::stats::effective_sample_size;

/// Particle estimate of `Z_T^x`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SmcEstimate {
    pub t: f64,
    pub z: f64,
    pub stderr: f64,
    pub n: usize,
    /// `(t, ESS)` at every checkpoint, before any resampling there.
    pub ess_trace: Vec<(f64, f64)>,
    pub resamplings: usize,
}

struct Particle {
    walker: Walker,
    log_w: f64,
    eve: usize,
    rng: StreamRng,
}

/// Feynman-Kac particle system: particles move independently between
/// checkpoints every `resample_period`, and are resampled multinomially when
/// the ESS drops below `N/2`. The estimate is the product of the mean
/// incremental weights; its standard error follows Chan and Lai,
/// `Var(Z_hat)/Z^2 ~ sum_j (sum_{i : E_i = j} W_i - 1/N)^2` with `E_i` the
/// time-0 ancestor of particle `i` and `W_i` its normalized final weight.
///
/// Particle slot `i` always draws its moves from `key.rng(i)`; resampling
/// indices come from the master family `key.derive(u64::MAX)`, one stream per
/// checkpoint, drawn serially.
#[allow(clippy::too_many_arguments)]
pub fn smc_estimate_z(
    x0: &HPoint,
    config: &Configuration,
    spec: &PotentialSpec,
    t: f64,
    h: f64,
    n: usize,
    resample_period: f64,
    key: StreamKey,
) -> Result<SmcEstimate> {
    if n < 2 {
        return arg_err(format!("need at least 2 particles (got {n})"));
    }
    let steps = step_count(t, h)?;
    let period = step_count(resample_period, h)?;
    if period == 0 {
        return arg_err("resampling period must be at least one step");
    }
    let field = PotentialField::new(spec, config)?;
    let start = Walker::start(&field, x0)?;
    let mut particles: Vec<Particle> =
        (0..n).map(|i| Particle { walker: start, log_w: 0.0, eve: i, rng: key.rng(i as u64) }).collect();
    let master = key.derive(u64::MAX);

    let mut log_z = 0.0;
    let mut ess_trace = Vec::new();
    let mut resamplings = 0;
    let mut done = 0;
    let mut checkpoint = 0u64;
    while done < steps {
        let todo = period.min(steps - done);
        par::try_for_each_mut(&mut particles, |_, p| {
            let before = p.walker.integral.value();
            p.walker.advance(&field, todo, h, &mut p.rng)?;
            p.log_w -= p.walker.integral.value() - before;
            Ok(())
        })?;
        done += todo;
        let max_lw = particles.iter().map(|p| p.log_w).fold(f64::NEG_INFINITY, f64::max);
        assert!(max_lw.is_finite(), "total weight collapse");
        let w: Vec<f64> = particles.iter().map(|p| (p.log_w - max_lw).exp()).collect();
        let ess = effective_sample_size(&w);
        ess_trace.push((done as f64 * h, ess));
        if done < steps && ess < 0.5 * n as f64 {
            let total: f64 = w.iter().sum();
            log_z += max_lw + (total / n as f64).ln();
            let mut cdf = Vec::with_capacity(n);
            let mut acc = 0.0;
            for wi in &w {
                acc += wi / total;
                cdf.push(acc);
            }
            let mut rng = master.rng(checkpoint);
            let parents: Vec<usize> = (0..n)
                .map(|_| {
                    let u: f64 = rng.random::<f64>() * acc;
                    cdf.partition_point(|&c| c <= u).min(n - 1)
                })
                .collect();
            let snapshot: Vec<(Walker, usize)> = particles.iter().map(|p| (p.walker, p.eve)).collect();
            for (p, &a) in particles.iter_mut().zip(&parents) {
                p.walker = snapshot[a].0;
                p.eve = snapshot[a].1;
                p.log_w = 0.0;
            }
            resamplings += 1;
        }
        checkpoint += 1;
    }

    let max_lw = particles.iter().map(|p| p.log_w).fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = particles.iter().map(|p| (p.log_w - max_lw).exp()).collect();
    let total: f64 = w.iter().sum();
    log_z += max_lw + (total / n as f64).ln();
    let z = log_z.exp();

    let mut by_eve = vec![0.0; n];
    for (p, wi) in particles.iter().zip(&w) {
        by_eve[p.eve] += wi / total;
    }
    let inv_n = 1.0 / n as f64;
    let mut rel_var = by_eve.iter().map(|s| (s - inv_n).powi(2)).sum::<f64>();
    if w.iter().all(|wi| *wi == w[0]) && resamplings == 0 {
        rel_var = 0.0;
    }
    Ok(SmcEstimate { t, z, stderr: z * rel_var.sqrt(), n, ess_trace, resamplings })
}
