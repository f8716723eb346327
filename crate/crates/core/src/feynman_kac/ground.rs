use serde::Serialize;

use super::{sample_ensemble, Walker, ZEstimate};
use crate::diffusion::step_count;
use crate::error::{arg_err, Result};
use crate::geom::HPoint;
use crate::par;
use crate::ppp::{Configuration, PotentialField, PotentialSpec};
use crate::rng::StreamKey;
use crate::stats::weighted_line_fit;

/// Slope of `-log Z_T` against `T` over the grid points with `T >= t_min`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WindowFit {
    pub t_min: f64,
    pub points: usize,
    pub slope: f64,
    pub stderr: f64,
}

/// Stability record of the slope over nested tail windows.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SlopeDiagnostics {
    /// Full grid first, then successively dropping the smallest `T`.
    pub windows: Vec<WindowFit>,
    /// Index into `windows` of the fit reported as the estimate.
    pub selected: usize,
    /// Every window slope lies within 3 of its own standard errors of the estimate.
    pub stable: bool,
    /// Window slopes change monotonically as the window moves to larger `T`.
    pub monotone: bool,
}

/// `phi(x) / phi(o)` at one probe point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PhiRatio {
    pub point: HPoint,
    pub radius: f64,
    pub ratio: f64,
    pub stderr: f64,
}

/// Ground-state energy estimate from the decay of `Z_T`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GroundStateEstimate {
    pub rho_hat: f64,
    pub rho_stderr: f64,
    pub z: Vec<ZEstimate>,
    pub phi_ratio: Vec<PhiRatio>,
    pub diagnostics: SlopeDiagnostics,
    /// `-3 stderr <= rho_hat <= V_max + 3 stderr`.
    pub within_bounds: bool,
}

fn fit_window(z: &[ZEstimate]) -> Result<WindowFit> {
    let t: Vec<f64> = z.iter().map(|e| e.t).collect();
    let y: Vec<f64> = z.iter().map(|e| -e.z.ln()).collect();
    let s: Vec<f64> = z.iter().map(|e| e.stderr / e.z).collect();
    let fit = weighted_line_fit(&t, &y, &s)?;
    Ok(WindowFit { t_min: t[0], points: z.len(), slope: fit.slope, stderr: fit.slope_stderr })
}

/// First grid index of the tail window: the last `ceil(n/2)` horizons, at least two.
pub fn tail_start(n: usize) -> usize {
    n - n.div_ceil(2).max(2)
}

/// Fits `-log Z_T = rho T + c` by weighted least squares over the tail window
/// of `t_grid` (see [`tail_start`]), with an independent ensemble of `n` paths
/// for each horizon (ensemble `k` uses `key.derive(k)`). Slopes over all nested
/// tail windows, from the full grid down to the last two horizons, are kept as
/// the convergence diagnostic.
#[allow(clippy::too_many_arguments)]
pub fn estimate_rho(
    x0: &HPoint,
    config: &Configuration,
    spec: &PotentialSpec,
    t_grid: &[f64],
    h: f64,
    n: usize,
    key: StreamKey,
) -> Result<GroundStateEstimate> {
    if t_grid.len() < 3 {
        return arg_err(format!("horizon grid needs at least 3 points (got {})", t_grid.len()));
    }
    if t_grid.windows(2).any(|w| !(w[1] > w[0])) || !(t_grid[0] > 0.0) {
        return arg_err("horizon grid must be positive and strictly increasing");
    }
    if n < 2 {
        return arg_err(format!("need at least 2 paths (got {n})"));
    }
    let mut z = Vec::with_capacity(t_grid.len());
    for (k, &t) in t_grid.iter().enumerate() {
        z.push(sample_ensemble(x0, config, spec, t, h, n, key.derive(k as u64))?.z());
    }
    let windows: Vec<WindowFit> =
        (0..t_grid.len() - 1).map(|start| fit_window(&z[start..])).collect::<Result<_>>()?;
    let best = windows[tail_start(t_grid.len())];
    let stable = windows.iter().all(|w| (w.slope - best.slope).abs() <= 3.0 * w.stderr.max(best.stderr));
    let diffs: Vec<f64> = windows.windows(2).map(|w| w[1].slope - w[0].slope).collect();
    let monotone = diffs.iter().all(|d| *d >= 0.0) || diffs.iter().all(|d| *d <= 0.0);
    let v_top = (spec.v_max - spec.offset).max(-spec.offset);
    let v_bottom = (-spec.offset).min(0.0);
    let slack = 3.0 * best.stderr;
    let within_bounds = best.slope >= v_bottom - slack - 1e-12 && best.slope <= v_top + slack + 1e-12;
    Ok(GroundStateEstimate {
        rho_hat: best.slope,
        rho_stderr: best.stderr,
        z,
        phi_ratio: Vec::new(),
        diagnostics: SlopeDiagnostics { selected: tail_start(t_grid.len()), windows, stable, monotone },
        within_bounds,
    })
}

/// `Z_T^{x_j} / Z_T^{reference}` for each probe, all walks driven by the same
/// streams (path `i` of every probe uses `key.rng(i)`). The standard error is
/// the delta-method value `sd(a - R b) / (sqrt(N) mean(b))`.
#[allow(clippy::too_many_arguments)]
pub fn estimate_phi_ratio(
    probes: &[HPoint],
    reference: &HPoint,
    config: &Configuration,
    spec: &PotentialSpec,
    t: f64,
    h: f64,
    n: usize,
    key: StreamKey,
) -> Result<Vec<PhiRatio>> {
    if n < 2 {
        return arg_err(format!("need at least 2 paths (got {n})"));
    }
    let steps = step_count(t, h)?;
    let field = PotentialField::new(spec, config)?;
    let starts: Vec<HPoint> = std::iter::once(*reference).chain(probes.iter().copied()).collect();
    let weights: Vec<Vec<f64>> = par::try_map_indexed(n, |i| {
        starts
            .iter()
            .map(|x0| {
                let mut rng = key.rng(i as u64);
                let mut w = Walker::start(&field, x0)?;
                w.advance(&field, steps, h, &mut rng)?;
                Ok((-w.integral.value()).exp())
            })
            .collect()
    })?;
    let nf = n as f64;
    let mean_b = weights.iter().map(|w| w[0]).sum::<f64>() / nf;
    let out = probes
        .iter()
        .enumerate()
        .map(|(j, p)| {
            let mean_a = weights.iter().map(|w| w[j + 1]).sum::<f64>() / nf;
            let ratio = mean_a / mean_b;
            let resid: Vec<f64> = weights.iter().map(|w| w[j + 1] - ratio * w[0]).collect();
            let rm = resid.iter().sum::<f64>() / nf;
            let var = resid.iter().map(|r| (r - rm).powi(2)).sum::<f64>() / (nf - 1.0);
            PhiRatio { point: *p, radius: p.radius(), ratio, stderr: var.sqrt() / (nf.sqrt() * mean_b) }
        })
        .collect();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::feynman_kac::tests::saturated;
    use crate::ppp::Profile;

    #[test]
    fn constant_potential_slope_is_exact() {
        let (spec, config) = saturated(2, 0.04);
        let o = HPoint::origin(2).unwrap();
        let est = estimate_rho(&o, &config, &spec, &[1.0, 2.0, 3.0], 0.01, 20, StreamKey::new(2)).unwrap();
        assert!((est.rho_hat - 0.04).abs() < 1e-12);
        assert!(est.within_bounds);
        assert_eq!(est.diagnostics.windows.len(), 2);
        assert_eq!(est.diagnostics.selected, 1);
    }

    #[test]
    fn tail_window_sizes() {
        assert_eq!(tail_start(3), 1);
        assert_eq!(tail_start(4), 2);
        assert_eq!(tail_start(5), 2);
        assert_eq!(tail_start(2), 0);
    }

    #[test]
    fn grid_validation() {
        let (spec, config) = saturated(2, 0.04);
        let o = HPoint::origin(2).unwrap();
        assert!(estimate_rho(&o, &config, &spec, &[1.0, 2.0], 0.01, 20, StreamKey::new(2)).is_err());
        assert!(estimate_rho(&o, &config, &spec, &[1.0, 3.0, 2.0], 0.01, 20, StreamKey::new(2)).is_err());
    }

    #[test]
    fn ratios_are_positive_and_one_at_reference() {
        let spec = PotentialSpec::new(Profile::Bump { amplitude: 0.1 }, 1.0, 0.1, 1.0).unwrap();
        let o = HPoint::origin(2).unwrap();
        let config = Configuration::planted(2, vec![o], 30.0).unwrap();
        let probes = [o, HPoint::on_axis(2, 1.0).unwrap()];
        let r = estimate_phi_ratio(&probes, &o, &config, &spec, 2.0, 0.01, 200, StreamKey::new(4)).unwrap();
        assert_eq!(r[0].ratio, 1.0);
        assert_eq!(r[0].stderr, 0.0);
        assert!(r[1].ratio > 0.0);
    }
}
