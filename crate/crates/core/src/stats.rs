//! Small statistical toolkit: Monte Carlo summaries, two-sample
//! Kolmogorov-Smirnov, Poisson goodness of fit, correlation tests and weighted
//! least squares.

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF, Discrete, DiscreteCDF, Poisson, StudentsT};

use crate::error::{arg_err, Result};

/// Sample mean and its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MeanEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n: usize,
}

impl MeanEstimate {
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len();
        if n == 0 {
            return Self { mean: f64::NAN, stderr: f64::NAN, n };
        }
        if xs.iter().all(|x| *x == xs[0]) {
            return Self { mean: xs[0], stderr: if n < 2 { f64::NAN } else { 0.0 }, n };
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        if n < 2 {
            return Self { mean, stderr: f64::NAN, n };
        }
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        Self { mean, stderr: (var / n as f64).sqrt(), n }
    }

    /// Number of pooled standard errors separating two independent estimates.
    pub fn z_score(&self, other: &MeanEstimate) -> f64 {
        let pooled = (self.stderr.powi(2) + other.stderr.powi(2)).sqrt();
        if pooled == 0.0 {
            if self.mean == other.mean {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (self.mean - other.mean).abs() / pooled
        }
    }
}

/// Self-normalized weighted mean `sum w x / sum w` with its delta-method
/// standard error.
pub fn weighted_mean(x: &[f64], w: &[f64]) -> Result<MeanEstimate> {
    let n = x.len();
    if n < 2 || w.len() != n {
        return arg_err("weighted mean needs at least two samples with matching weights");
    }
    let sw: f64 = w.iter().sum();
    if !(sw > 0.0) || !sw.is_finite() {
        return arg_err("weights must have a positive finite sum");
    }
    let mean = w.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() / sw;
    let wbar = sw / n as f64;
    let infl: Vec<f64> = w.iter().zip(x).map(|(a, b)| a * (b - mean) / wbar).collect();
    let var = infl.iter().map(|v| v * v).sum::<f64>() / (n - 1) as f64;
    Ok(MeanEstimate { mean, stderr: (var / n as f64).sqrt(), n })
}

/// Sup distance between two weighted empirical CDFs.
pub fn ecdf_distance(a: &[f64], wa: Option<&[f64]>, b: &[f64], wb: Option<&[f64]>) -> Result<f64> {
    Ok(ks_two_sample(a, wa, b, wb)?.statistic)
}

/// Effective sample size `(sum w)^2 / sum w^2`.
pub fn effective_sample_size(weights: &[f64]) -> f64 {
    let s: f64 = weights.iter().sum();
    let s2: f64 = weights.iter().map(|w| w * w).sum();
    if s2 == 0.0 {
        0.0
    } else {
        s * s / s2
    }
}

/// Kolmogorov survival function `Q(lambda) = 2 sum (-1)^{k-1} exp(-2 k^2 lambda^2)`.
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=200 {
        let term = (-2.0 * (k as f64).powi(2) * lambda * lambda).exp();
        sum += sign * term;
        if term < 1e-18 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KsResult {
    pub statistic: f64,
    /// `n_a n_b / (n_a + n_b)` computed with effective sample sizes.
    pub n_eff: f64,
    pub p_value: f64,
}

fn weighted_ecdf_points(x: &[f64], w: Option<&[f64]>) -> Result<(Vec<(f64, f64)>, f64)> {
    let weights: Vec<f64> = match w {
        Some(w) if w.len() != x.len() => return arg_err("weights and samples differ in length"),
        Some(w) => w.to_vec(),
        None => vec![1.0; x.len()],
    };
    if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
        return arg_err("weights must be finite and non-negative");
    }
    let total: f64 = weights.iter().sum();
    if x.is_empty() || total <= 0.0 {
        return arg_err("empty sample");
    }
    let mut pts: Vec<(f64, f64)> = x.iter().zip(&weights).map(|(a, b)| (*a, b / total)).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok((pts, effective_sample_size(&weights)))
}

/// Two-sample Kolmogorov-Smirnov test, optionally with importance weights on
/// either side (effective sample sizes enter the asymptotic p-value).
pub fn ks_two_sample(a: &[f64], wa: Option<&[f64]>, b: &[f64], wb: Option<&[f64]>) -> Result<KsResult> {
    let (pa, na) = weighted_ecdf_points(a, wa)?;
    let (pb, nb) = weighted_ecdf_points(b, wb)?;
    let (mut i, mut j) = (0, 0);
    let (mut fa, mut fb) = (0.0f64, 0.0f64);
    let mut dmax = 0.0f64;
    while i < pa.len() || j < pb.len() {
        let xa = pa.get(i).map_or(f64::INFINITY, |p| p.0);
        let xb = pb.get(j).map_or(f64::INFINITY, |p| p.0);
        let x = xa.min(xb);
        while i < pa.len() && pa[i].0 == x {
            fa += pa[i].1;
            i += 1;
        }
        while j < pb.len() && pb[j].0 == x {
            fb += pb[j].1;
            j += 1;
        }
        dmax = dmax.max((fa - fb).abs());
    }
    let ne = na * nb / (na + nb);
    let sq = ne.sqrt();
    let p = kolmogorov_q((sq + 0.12 + 0.11 / sq) * dmax);
    Ok(KsResult { statistic: dmax, n_eff: ne, p_value: p })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Goodness of fit of integer counts against `Poisson(mean)`. Tail bins are
/// pooled until every bin expects at least five observations.
pub fn poisson_chi_square(counts: &[u64], mean: f64) -> Result<ChiSquareResult> {
    if counts.len() < 10 {
        return arg_err("chi-square test needs at least 10 observations");
    }
    if !(mean > 0.0) {
        return arg_err("Poisson mean must be positive");
    }
    let n = counts.len() as f64;
    let law = Poisson::new(mean).map_err(|e| crate::Error::Argument(e.to_string()))?;
    let kmax = *counts.iter().max().unwrap_or(&0);
    // Bin edges [lo, hi) in count space; the first starts at 0, the last is open.
    let mut edges: Vec<u64> = vec![0];
    let mut acc = 0.0;
    let mut k = 0u64;
    let upper = kmax.max((mean + 10.0 * mean.sqrt() + 10.0) as u64);
    while k <= upper {
        acc += n * law.pmf(k);
        k += 1;
        let tail = n * law.sf(k - 1);
        if acc >= 5.0 && tail >= 5.0 {
            edges.push(k);
            acc = 0.0;
        }
        if tail < 5.0 {
            break;
        }
    }
    let nbins = edges.len();
    if nbins < 2 {
        return arg_err("mean too small for a chi-square test with this sample size");
    }
    let mut observed = vec![0.0; nbins];
    for &c in counts {
        let b = edges.partition_point(|&e| e <= c) - 1;
        observed[b] += 1.0;
    }
    let mut stat = 0.0;
    for b in 0..nbins {
        let lo = edges[b];
        let p_lo = if lo == 0 { 0.0 } else { law.cdf(lo - 1) };
        let p_hi = if b + 1 < nbins { law.cdf(edges[b + 1] - 1) } else { 1.0 };
        let expected = n * (p_hi - p_lo);
        stat += (observed[b] - expected).powi(2) / expected;
    }
    let dof = nbins - 1;
    let chi = ChiSquared::new(dof as f64).map_err(|e| crate::Error::Argument(e.to_string()))?;
    Ok(ChiSquareResult { statistic: stat, dof, p_value: chi.sf(stat) })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CorrelationResult {
    pub r: f64,
    pub p_value: f64,
}

/// Pearson correlation with the two-sided t-test of zero correlation.
pub fn correlation_test(x: &[f64], y: &[f64]) -> Result<CorrelationResult> {
    let n = x.len();
    if n != y.len() || n < 3 {
        return arg_err("correlation needs two samples of equal length >= 3");
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    if sxx == 0.0 || syy == 0.0 {
        return arg_err("constant sample in correlation test");
    }
    let r = sxy / (sxx * syy).sqrt();
    let dof = (n - 2) as f64;
    let t = r * (dof / (1.0 - r * r).max(1e-300)).sqrt();
    let law = StudentsT::new(0.0, 1.0, dof).map_err(|e| crate::Error::Argument(e.to_string()))?;
    Ok(CorrelationResult { r, p_value: 2.0 * law.sf(t.abs()) })
}

/// Result of a weighted straight-line fit `y = intercept + slope x`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    /// Linear coefficients with `slope = sum_k coefficients[k] * y[k]`.
    pub coefficients: Vec<f64>,
}

/// Least squares with weights `1/sigma^2`; falls back to equal weights when any
/// `sigma` is zero. The slope error is propagated from `sigma` through the fit
/// coefficients, so it stays valid in the fallback.
pub fn weighted_line_fit(x: &[f64], y: &[f64], sigma: &[f64]) -> Result<LinearFit> {
    let n = x.len();
    if n < 2 || y.len() != n || sigma.len() != n {
        return arg_err("line fit needs at least two points with matching lengths");
    }
    let w: Vec<f64> = if sigma.iter().all(|s| *s > 0.0) {
        sigma.iter().map(|s| 1.0 / (s * s)).collect()
    } else {
        vec![1.0; n]
    };
    let sw: f64 = w.iter().sum();
    let xm = w.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() / sw;
    let ym = w.iter().zip(y).map(|(a, b)| a * b).sum::<f64>() / sw;
    let sxx: f64 = w.iter().zip(x).map(|(a, b)| a * (b - xm).powi(2)).sum();
    if sxx <= 0.0 {
        return arg_err("line fit needs at least two distinct abscissae");
    }
    let coefficients: Vec<f64> = (0..n).map(|k| w[k] * (x[k] - xm) / sxx).collect();
    let slope: f64 = coefficients.iter().zip(y).map(|(c, v)| c * v).sum();
    let slope_stderr = coefficients.iter().zip(sigma).map(|(c, s)| (c * s).powi(2)).sum::<f64>().sqrt();
    Ok(LinearFit { slope, intercept: ym - slope * xm, slope_stderr, coefficients })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_estimate_basics() {
        let m = MeanEstimate::from_samples(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m.mean, 2.5);
        assert!((m.stderr - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
        let c = MeanEstimate::from_samples(&[2.0, 2.0]);
        assert_eq!(c.stderr, 0.0);
    }

    #[test]
    fn kolmogorov_known_values() {
        // Q(1.36) ~ 0.049, Q(1.63) ~ 0.0098
        assert!((kolmogorov_q(1.3581) - 0.05).abs() < 1e-3);
        assert!((kolmogorov_q(1.6276) - 0.01).abs() < 5e-4);
        assert_eq!(kolmogorov_q(0.0), 1.0);
    }

    #[test]
    fn ks_detects_shift_and_accepts_identity() {
        let a: Vec<f64> = (0..500).map(|i| i as f64 / 500.0).collect();
        let b: Vec<f64> = (0..500).map(|i| i as f64 / 500.0 + 0.3).collect();
        assert!(ks_two_sample(&a, None, &b, None).unwrap().p_value < 1e-6);
        let same = ks_two_sample(&a, None, &a, None).unwrap();
        assert_eq!(same.statistic, 0.0);
        assert_eq!(same.p_value, 1.0);
    }

    #[test]
    fn weighted_ks_matches_replication() {
        let a = [0.1, 0.5, 0.9];
        let wa = [1.0, 2.0, 1.0];
        let a_rep = [0.1, 0.5, 0.5, 0.9];
        let b = [0.2, 0.6];
        let d1 = ks_two_sample(&a, Some(&wa), &b, None).unwrap().statistic;
        let d2 = ks_two_sample(&a_rep, None, &b, None).unwrap().statistic;
        assert!((d1 - d2).abs() < 1e-15);
    }

    #[test]
    fn line_fit_recovers_exact_line() {
        let x = [10.0, 20.0, 40.0];
        let y: Vec<f64> = x.iter().map(|t| 0.3 + 0.05 * t).collect();
        let fit = weighted_line_fit(&x, &y, &[0.0, 0.0, 0.0]).unwrap();
        assert!((fit.slope - 0.05).abs() < 1e-15);
        assert_eq!(fit.slope_stderr, 0.0);
        let fit = weighted_line_fit(&x, &y, &[0.1, 0.2, 0.1]).unwrap();
        assert!((fit.slope - 0.05).abs() < 1e-14);
        assert!(fit.slope_stderr > 0.0);
    }

    #[test]
    fn correlation_of_independent_columns() {
        let x: Vec<f64> = (0..100).map(|i| (i % 10) as f64).collect();
        let y: Vec<f64> = (0..100).map(|i| (i / 10) as f64).collect();
        let r = correlation_test(&x, &y).unwrap();
        assert!(r.r.abs() < 1e-12);
        assert!(r.p_value > 0.99);
    }
}
