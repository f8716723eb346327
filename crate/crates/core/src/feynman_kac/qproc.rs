use rand::Rng;
use serde::Serialize;

use super::Walker;
use crate::diffusion::{self, drifted_step, radial_drift, step_count, PathSample};
use crate::error::{arg_err, Error, Result};
use crate::geom::HPoint;
use crate::interp::Pchip;
use crate::par;
use crate::ppp::{Configuration, PotentialField, PotentialSpec};
use crate::rng::StreamKey;
use crate::spectral::RadialSpectrum;
use crate::stats::{ecdf_distance, effective_sample_size, weighted_mean, MeanEstimate};

/// Radial drift `(log phi)'(r)` of the Doob transform by a radial eigenfunction.
#[derive(Clone, Debug)]
pub struct DoobDrift {
    d: usize,
    log_phi: Pchip,
    r_max: f64,
}

impl DoobDrift {
    pub fn from_spectrum(spec: &RadialSpectrum) -> Result<Self> {
        if spec.phi.iter().any(|p| !(*p > 0.0)) {
            return Err(Error::Domain("eigenfunction must be strictly positive".into()));
        }
        Ok(Self { d: spec.d, log_phi: spec.log_phi_interpolant()?, r_max: spec.max_radius() })
    }

    /// `phi = 1`: the drift vanishes and the walk is plain Brownian motion.
    pub fn flat(d: usize, r_max: f64) -> Result<Self> {
        let log_phi = Pchip::new(vec![-1.0, 0.0, r_max], vec![0.0; 3])?;
        Ok(Self { d, log_phi, r_max })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn max_radius(&self) -> f64 {
        self.r_max
    }

    /// `(log phi)'(r)`; radii past the grid are an error.
    #[inline]
    pub fn log_derivative(&self, r: f64) -> Result<f64> {
        self.log_phi.derivative(r).ok_or(Error::Extrapolation { r, max: self.r_max })
    }

    /// Total radial drift of the transformed process: `((d-1)/2) coth(r) + (log phi)'(r)`.
    pub fn radial_drift(&self, r: f64) -> Result<f64> {
        Ok(radial_drift(self.d, r) + self.log_derivative(r)?)
    }
}

fn doob_walk<R: Rng + ?Sized>(
    x: &mut HPoint,
    drift: &DoobDrift,
    steps: usize,
    h: f64,
    rng: &mut R,
    mut visit: impl FnMut(&HPoint),
) -> Result<()> {
    let sqrt_h = h.sqrt();
    for _ in 0..steps {
        let g = drift.log_derivative(x.radius())?;
        drifted_step(x, sqrt_h, h, g, rng);
        visit(x);
    }
    Ok(())
}

/// Geodesic random walk for `1/2 Laplacian + grad log phi . grad`: each step adds
/// `h (log phi)'(r)` along the outward radial direction.
pub fn doob_simulate<R: Rng + ?Sized>(x0: &HPoint, drift: &DoobDrift, t: f64, h: f64, rng: &mut R) -> Result<PathSample> {
    if x0.dim() != drift.dim() {
        return arg_err("starting point and eigenfunction dimensions differ");
    }
    let n = step_count(t, h)?;
    let mut times = Vec::with_capacity(n + 1);
    let mut points = Vec::with_capacity(n + 1);
    times.push(0.0);
    points.push(*x0);
    let mut x = *x0;
    let mut k = 0;
    doob_walk(&mut x, drift, n, h, rng, |p| {
        k += 1;
        times.push(k as f64 * h);
        points.push(*p);
    })?;
    Ok(PathSample { times, points })
}

/// `d(o, X_t)` for `n` independent Doob walks, walk `i` on `key.rng(i)`.
pub fn doob_endpoint_radii(x0: &HPoint, drift: &DoobDrift, t: f64, h: f64, n: usize, key: StreamKey) -> Result<Vec<f64>> {
    if x0.dim() != drift.dim() {
        return arg_err("starting point and eigenfunction dimensions differ");
    }
    let steps = step_count(t, h)?;
    par::try_map_indexed(n, |i| {
        let mut rng = key.rng(i as u64);
        let mut x = *x0;
        doob_walk(&mut x, drift, steps, h, &mut rng, |_| {})?;
        Ok(x.radius())
    })
}

/// `d(o, X_t)` for `n` untilted walks.
pub fn free_marginal_radii(x0: &HPoint, t: f64, h: f64, n: usize, key: StreamKey) -> Result<Vec<f64>> {
    diffusion::endpoint_radii(x0, t, h, n, key)
}

/// Weighted histogram of `d(o, X_t)` under the horizon-`T` tilt.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QHistogram {
    pub horizon: f64,
    pub edges: Vec<f64>,
    /// Normalized bin masses.
    pub mass: Vec<f64>,
    pub ess: f64,
    pub mean_radius: MeanEstimate,
}

/// Marginal of `X_t` under the tilted measures for a grid of horizons.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QMarginal {
    pub t: f64,
    pub horizons: Vec<f64>,
    /// `d(o, X_t)` per path.
    pub radii: Vec<f64>,
    /// `X_t` per path.
    pub points: Vec<HPoint>,
    /// `-int_0^T V(X_s) ds` per horizon, per path.
    pub log_weights: Vec<Vec<f64>>,
    pub histograms: Vec<QHistogram>,
    /// Sup distance between the weighted radial CDFs of consecutive horizons.
    pub sup_distances: Vec<f64>,
    /// `1 / sqrt(min ESS)` of each consecutive pair.
    pub noise_floor: Vec<f64>,
}

impl QMarginal {
    /// Weights for horizon `k`, scaled so the largest is 1.
    pub fn weights(&self, k: usize) -> Vec<f64> {
        let lw = &self.log_weights[k];
        let m = lw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        lw.iter().map(|l| (l - m).exp()).collect()
    }

    /// Weighted minus unweighted mean radius at horizon `k`, with a standard
    /// error from the paired influence values.
    pub fn mean_shift(&self, k: usize) -> MeanEstimate {
        let w = self.weights(k);
        let n = self.radii.len() as f64;
        let wbar = w.iter().sum::<f64>() / n;
        let mw = w.iter().zip(&self.radii).map(|(a, b)| a * b).sum::<f64>() / (wbar * n);
        let mu = self.radii.iter().sum::<f64>() / n;
        let infl: Vec<f64> = w.iter().zip(&self.radii).map(|(a, r)| a * (r - mw) / wbar - (r - mu)).collect();
        let var = infl.iter().map(|v| v * v).sum::<f64>() / (n - 1.0);
        MeanEstimate { mean: mw - mu, stderr: (var / n).sqrt(), n: self.radii.len() }
    }
}

/// Runs `n` paths to `max(t_grid)`, recording `X_t` and the log-weights at each
/// horizon, then compares the reweighted radial marginals across horizons.
#[allow(clippy::too_many_arguments)]
pub fn q_marginal(
    x0: &HPoint,
    config: &Configuration,
    spec: &PotentialSpec,
    t: f64,
    t_grid: &[f64],
    h: f64,
    n: usize,
    bins: usize,
    key: StreamKey,
) -> Result<QMarginal> {
    if t_grid.is_empty() || t_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return arg_err("horizon grid must be non-empty and strictly increasing");
    }
    if !(t > 0.0) || t >= t_grid[0] {
        return arg_err(format!("marginal time {t} must be positive and below the first horizon {}", t_grid[0]));
    }
    if n < 2 || bins == 0 {
        return arg_err("need at least 2 paths and 1 bin");
    }
    let marg_steps = step_count(t, h)?;
    let marks: Vec<usize> = t_grid.iter().map(|&tk| step_count(tk, h)).collect::<Result<_>>()?;
    let field = PotentialField::new(spec, config)?;
    let runs = par::try_map_indexed(n, |i| {
        let mut rng = key.rng(i as u64);
        let mut w = Walker::start(&field, x0)?;
        w.advance(&field, marg_steps, h, &mut rng)?;
        let xt = w.x;
        let mut done = marg_steps;
        let mut lws = Vec::with_capacity(marks.len());
        for &m in &marks {
            w.advance(&field, m - done, h, &mut rng)?;
            done = m;
            lws.push(-w.integral.value());
        }
        Ok((xt, lws))
    })?;
    let points: Vec<HPoint> = runs.iter().map(|r| r.0).collect();
    let radii: Vec<f64> = points.iter().map(HPoint::radius).collect();
    let log_weights: Vec<Vec<f64>> = (0..marks.len()).map(|k| runs.iter().map(|r| r.1[k]).collect()).collect();

    let top = radii.iter().copied().fold(0.0, f64::max).ceil().max(1.0);
    let edges: Vec<f64> = (0..=bins).map(|b| top * b as f64 / bins as f64).collect();
    let mut out = QMarginal {
        t,
        horizons: t_grid.to_vec(),
        radii,
        points,
        log_weights,
        histograms: Vec::new(),
        sup_distances: Vec::new(),
        noise_floor: Vec::new(),
    };
    for (k, &horizon) in t_grid.iter().enumerate() {
        let w = out.weights(k);
        let total: f64 = w.iter().sum();
        let mut mass = vec![0.0; bins];
        for (r, wi) in out.radii.iter().zip(&w) {
            let b = ((r / top) * bins as f64).floor() as usize;
            mass[b.min(bins - 1)] += wi / total;
        }
        out.histograms.push(QHistogram {
            horizon,
            edges: edges.clone(),
            mass,
            ess: effective_sample_size(&w),
            mean_radius: weighted_mean(&out.radii, &w)?,
        });
    }
    for k in 1..t_grid.len() {
        let (wa, wb) = (out.weights(k - 1), out.weights(k));
        out.sup_distances.push(ecdf_distance(&out.radii, Some(&wa), &out.radii, Some(&wb))?);
        let ess = out.histograms[k - 1].ess.min(out.histograms[k].ess);
        out.noise_floor.push(1.0 / ess.sqrt());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::feynman_kac::tests::saturated;
    use crate::spectral::{solve_ground_state, OuterBoundary, RadialOperator};

    #[test]
    fn flat_drift_reproduces_brownian_motion_pathwise() {
        let drift = DoobDrift::flat(2, 50.0).unwrap();
        let o = HPoint::origin(2).unwrap();
        let key = StreamKey::new(21);
        let doob = doob_simulate(&o, &drift, 0.5, 0.01, &mut key.rng(0)).unwrap();
        let bm = crate::diffusion::simulate_path(&o, 0.5, 0.01, &mut key.rng(0)).unwrap();
        for (a, b) in doob.points.iter().zip(&bm.points) {
            assert!(crate::geom::distance(a, b).unwrap() < 1e-12);
        }
    }

    #[test]
    fn drift_outside_grid_is_an_error() {
        let op = RadialOperator::build(2, 6.0, 120, OuterBoundary::Reflecting, |r| if r < 1.0 { 0.1 } else { 0.0 }).unwrap();
        let drift = DoobDrift::from_spectrum(&solve_ground_state(&op).unwrap()).unwrap();
        assert!(matches!(drift.log_derivative(10.0), Err(Error::Extrapolation { .. })));
        assert!(drift.log_derivative(0.0).unwrap().abs() < 1e-12);
        assert!(drift.log_derivative(0.5).unwrap() > 0.0);
    }

    #[test]
    fn constant_potential_weights_cancel() {
        let (spec, config) = saturated(2, 0.05);
        let o = HPoint::origin(2).unwrap();
        let q = q_marginal(&o, &config, &spec, 0.5, &[1.0, 2.0], 0.01, 50, 10, StreamKey::new(5)).unwrap();
        assert!(q.sup_distances[0] < 1e-12);
        assert!(q.mean_shift(1).mean.abs() < 1e-12);
        for hist in &q.histograms {
            assert!((hist.mass.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!((hist.ess - 50.0).abs() < 1e-9);
        }
    }

    #[test]
    fn marginal_time_must_precede_horizons() {
        let (spec, config) = saturated(2, 0.05);
        let o = HPoint::origin(2).unwrap();
        assert!(q_marginal(&o, &config, &spec, 1.0, &[1.0, 2.0], 0.01, 50, 10, StreamKey::new(5)).is_err());
    }
}
