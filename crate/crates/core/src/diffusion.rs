//! Brownian motion on `H^d` (generator `1/2 Laplacian`) by geodesic random walk.
//!
//! Each step draws a centred Gaussian tangent vector of covariance `h I` in the
//! canonical frame at the current point and follows the geodesic. The radial part
//! of the process has an independent one-dimensional oracle,
//! [`radial_oracle_path`], used to cross-check the sampler.

use std::io::Write;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{arg_err, Error, Result};
use crate::geom::{self, HPoint, MAX_DIM};
use crate::par;
use crate::rng::StreamKey;

/// Largest accepted time step.
pub const MAX_STEP: f64 = 0.1;

pub fn check_step(h: f64) -> Result<()> {
    if !(h > 0.0) || !h.is_finite() {
        return arg_err(format!("time step must be positive (got {h})"));
    }
    if h > MAX_STEP {
        return arg_err(format!("time step {h} exceeds the cap {MAX_STEP}"));
    }
    Ok(())
}

/// Number of steps of size `h` covering `[0, t]`; `t / h` must be integral up to rounding.
pub fn step_count(t: f64, h: f64) -> Result<usize> {
    check_step(h)?;
    if !(t >= 0.0) || !t.is_finite() {
        return arg_err(format!("horizon must be finite and >= 0 (got {t})"));
    }
    let n = (t / h).round();
    if (n * h - t).abs() > 1e-9 * t.max(1.0) {
        return arg_err(format!("horizon {t} is not a multiple of the step {h}"));
    }
    Ok(n as usize)
}

/// One walk step with frame coordinates `sqrt(h) xi`.
#[inline]
pub(crate) fn gaussian_step<R: Rng + ?Sized>(x: &mut HPoint, sqrt_h: f64, rng: &mut R) {
    let mut c = [0.0; MAX_DIM];
    for ci in c.iter_mut().take(x.dim()) {
        let xi: f64 = rng.sample(StandardNormal);
        *ci = sqrt_h * xi;
    }
    x.step_in_frame(&c[..x.dim()]);
}

/// One walk step with an added radial drift `h g` along the outward unit
/// direction (skipped at `o`, where the direction is undefined).
#[inline]
pub(crate) fn drifted_step<R: Rng + ?Sized>(x: &mut HPoint, sqrt_h: f64, h: f64, g: f64, rng: &mut R) {
    let d = x.dim();
    let mut c = [0.0; MAX_DIM];
    for ci in c.iter_mut().take(d) {
        let xi: f64 = rng.sample(StandardNormal);
        *ci = sqrt_h * xi;
    }
    let xb = x.spatial();
    let n = xb.iter().map(|v| v * v).sum::<f64>().sqrt();
    if n > 1e-12 {
        let k = h * g / n;
        for i in 0..d {
            c[i] += k * xb[i];
        }
    }
    x.step_in_frame(&c[..d]);
}

/// One step of the geodesic random walk.
pub fn bm_step<R: Rng + ?Sized>(x: &HPoint, h: f64, rng: &mut R) -> Result<HPoint> {
    check_step(h)?;
    let mut y = *x;
    gaussian_step(&mut y, h.sqrt(), rng);
    Ok(y)
}

/// A discretized trajectory on a uniform time grid.
#[derive(Clone, Debug, PartialEq)]
pub struct PathSample {
    pub times: Vec<f64>,
    pub points: Vec<HPoint>,
}

impl PathSample {
    pub fn start(&self) -> &HPoint {
        &self.points[0]
    }

    pub fn end(&self) -> &HPoint {
        &self.points[self.points.len() - 1]
    }

    /// Number of steps.
    pub fn steps(&self) -> usize {
        self.points.len() - 1
    }

    pub fn horizon(&self) -> f64 {
        self.times[self.times.len() - 1]
    }

    pub fn max_sheet_defect(&self) -> f64 {
        self.points.iter().map(HPoint::sheet_defect).fold(0.0, f64::max)
    }

    /// CSV with columns `t, z_0, ..., z_d, r`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let d = self.points[0].dim();
        let mut header = vec!["t".to_string()];
        header.extend((0..=d).map(|i| format!("z_{i}")));
        header.push("r".into());
        writeln!(w, "{}", header.join(","))?;
        for (t, p) in self.times.iter().zip(&self.points) {
            write!(w, "{t}")?;
            for z in p.coords() {
                write!(w, ",{z}")?;
            }
            writeln!(w, ",{}", p.radius())?;
        }
        Ok(())
    }
}

/// Geodesic random walk from `x0` up to time `t`.
pub fn simulate_path<R: Rng + ?Sized>(x0: &HPoint, t: f64, h: f64, rng: &mut R) -> Result<PathSample> {
    let n = step_count(t, h)?;
    let sqrt_h = h.sqrt();
    let mut times = Vec::with_capacity(n + 1);
    let mut points = Vec::with_capacity(n + 1);
    let mut x = *x0;
    times.push(0.0);
    points.push(x);
    for k in 1..=n {
        gaussian_step(&mut x, sqrt_h, rng);
        times.push(k as f64 * h);
        points.push(x);
    }
    Ok(PathSample { times, points })
}

/// Halves the step of a path by inserting bridge midpoints: the geodesic
/// midpoint of each step displaced by a Gaussian of variance `h/4` per frame
/// coordinate.
pub fn refine_path<R: Rng + ?Sized>(path: &PathSample, rng: &mut R) -> PathSample {
    let n = path.steps();
    let h = if n > 0 { path.times[1] - path.times[0] } else { 0.0 };
    let spread = (0.25 * h).sqrt();
    let mut times = Vec::with_capacity(2 * n + 1);
    let mut points = Vec::with_capacity(2 * n + 1);
    times.push(path.times[0]);
    points.push(path.points[0]);
    for k in 0..n {
        let (a, b) = (path.points[k], path.points[k + 1]);
        let mut mid = midpoint(&a, &b);
        gaussian_step(&mut mid, spread, rng);
        times.push(path.times[k] + 0.5 * h);
        points.push(mid);
        times.push(path.times[k + 1]);
        points.push(b);
    }
    PathSample { times, points }
}

/// Geodesic midpoint `(a + b) / sqrt(-<a+b, a+b>)`.
pub fn midpoint(a: &HPoint, b: &HPoint) -> HPoint {
    let d = a.dim();
    let mut s = [0.0; MAX_DIM];
    let (za, zb) = (a.coords(), b.coords());
    let mut q = -(za[0] + zb[0]).powi(2);
    for i in 1..=d {
        q += (za[i] + zb[i]).powi(2);
    }
    let scale = 1.0 / (-q).max(f64::MIN_POSITIVE).sqrt();
    for i in 0..d {
        s[i] = (za[i + 1] + zb[i + 1]) * scale;
    }
    HPoint::from_spatial_unchecked(&s[..d])
}

/// Drift `((d-1)/2) coth(r)` of the radial part of Brownian motion on `H^d`.
pub fn radial_drift(d: usize, r: f64) -> f64 {
    0.5 * (d as f64 - 1.0) / r.tanh()
}

/// A one-dimensional radial trajectory.
#[derive(Clone, Debug, PartialEq)]
pub struct RadialPath {
    pub times: Vec<f64>,
    pub r: Vec<f64>,
}

impl RadialPath {
    pub fn end(&self) -> f64 {
        self.r[self.r.len() - 1]
    }
}

/// Euler-Maruyama for `dr = dB + ((d-1)/2) coth(r) dt`, kept at `r >= h`.
pub fn radial_oracle_path<R: Rng + ?Sized>(d: usize, r0: f64, t: f64, h: f64, rng: &mut R) -> Result<RadialPath> {
    if d < 2 {
        return arg_err(format!("dimension must be >= 2 (got {d})"));
    }
    if !(r0 >= 0.0) || !r0.is_finite() {
        return arg_err(format!("starting radius must be finite and >= 0 (got {r0})"));
    }
    let n = step_count(t, h)?;
    let sqrt_h = h.sqrt();
    let mut r = r0.max(h);
    let mut times = Vec::with_capacity(n + 1);
    let mut rs = Vec::with_capacity(n + 1);
    times.push(0.0);
    rs.push(r0);
    for k in 1..=n {
        let xi: f64 = rng.sample(StandardNormal);
        r = (r + radial_drift(d, r) * h + sqrt_h * xi).max(h);
        times.push(k as f64 * h);
        rs.push(r);
    }
    Ok(RadialPath { times, r: rs })
}

/// Endpoints `X_t` of `n` independent walks from `x0`, path `i` on stream `key.rng(i)`.
pub fn endpoints(x0: &HPoint, t: f64, h: f64, n: usize, key: StreamKey) -> Result<Vec<HPoint>> {
    let steps = step_count(t, h)?;
    let sqrt_h = h.sqrt();
    Ok(par::map_indexed(n, |i| {
        let mut rng = key.rng(i as u64);
        let mut x = *x0;
        for _ in 0..steps {
            gaussian_step(&mut x, sqrt_h, &mut rng);
        }
        x
    }))
}

/// `d(o, X_t)` for `n` independent walks from `x0`.
pub fn endpoint_radii(x0: &HPoint, t: f64, h: f64, n: usize, key: StreamKey) -> Result<Vec<f64>> {
    Ok(endpoints(x0, t, h, n, key)?.iter().map(HPoint::radius).collect())
}

/// Terminal values of `n` independent radial oracle paths.
pub fn oracle_endpoint_radii(d: usize, r0: f64, t: f64, h: f64, n: usize, key: StreamKey) -> Result<Vec<f64>> {
    par::try_map_indexed(n, |i| {
        let mut rng = key.rng(i as u64);
        radial_oracle_path(d, r0, t, h, &mut rng).map(|p| p.end())
    })
}

/// Largest sheet defect seen along one walk of `n` steps, without storing it.
pub fn max_sheet_defect_along<R: Rng + ?Sized>(x0: &HPoint, t: f64, h: f64, rng: &mut R) -> Result<f64> {
    let n = step_count(t, h)?;
    let sqrt_h = h.sqrt();
    let mut x = *x0;
    let mut worst = x.sheet_defect();
    for _ in 0..n {
        gaussian_step(&mut x, sqrt_h, rng);
        worst = worst.max(x.sheet_defect());
    }
    if !worst.is_finite() {
        return Err(Error::Numerical("walk left the representable range".into()));
    }
    Ok(worst)
}

/// Distance between consecutive path points, for diagnostics.
pub fn step_lengths(path: &PathSample) -> Vec<f64> {
    path.points.windows(2).map(|w| geom::distance_unchecked(&w[0], &w[1])).collect()
}
