//! Poisson point process configurations in geodesic balls about `o` and the
//! capped distance-sum potentials they induce.
//!
//! A [`Configuration`] is complete inside its window: every point of the process
//! within `window_radius` of `o` is listed. The potential at `x` depends only on
//! points within `support_radius` of `x`, so it is exact whenever
//! `d(o, x) + support_radius <= window_radius` and refused otherwise.

use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{arg_err, Error, Result};
use crate::geom::{self, HPoint, Isometry};
use crate::interp::Pchip;
use crate::quad::{adaptive_simpson, gauss_legendre5, sphere_area};

/// Number of knots in the tabulated radial CDF.
pub const RADIAL_TABLE_KNOTS: usize = 10_000;

/// Radial seed profile `eta`, supported on `[0, support_radius)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Profile {
    /// `a (1 - (r/r0)^2)^2`, continuously differentiable at the edge.
    Bump { amplitude: f64 },
    /// `a (1 - r/r0)`.
    Hat { amplitude: f64 },
}

impl Profile {
    pub fn amplitude(&self) -> f64 {
        match *self {
            Profile::Bump { amplitude } | Profile::Hat { amplitude } => amplitude,
        }
    }

    pub fn with_amplitude(self, amplitude: f64) -> Self {
        match self {
            Profile::Bump { .. } => Profile::Bump { amplitude },
            Profile::Hat { .. } => Profile::Hat { amplitude },
        }
    }
}

/// Seed profile, cap and intensity of a factor-of-Poisson potential
/// `x -> min(v_max, sum_y eta(d(x, y))) - offset`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    pub profile: Profile,
    pub support_radius: f64,
    pub v_max: f64,
    pub intensity: f64,
    /// Constant subtracted after capping (zero unless recentering).
    #[serde(default)]
    pub offset: f64,
}

impl PotentialSpec {
    pub fn new(profile: Profile, support_radius: f64, v_max: f64, intensity: f64) -> Result<Self> {
        let spec = Self { profile, support_radius, v_max, intensity, offset: 0.0 };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.support_radius > 0.0) || !self.support_radius.is_finite() {
            return arg_err(format!("support radius must be positive (got {})", self.support_radius));
        }
        if !(self.v_max >= 0.0) || !self.v_max.is_finite() {
            return arg_err(format!("cap v_max must be finite and >= 0 (got {})", self.v_max));
        }
        let a = self.profile.amplitude();
        if !(a >= 0.0) || !a.is_finite() {
            return arg_err(format!("profile amplitude must be finite and >= 0 (got {a})"));
        }
        if !(self.intensity >= 0.0) || !self.intensity.is_finite() {
            return arg_err(format!("intensity must be finite and >= 0 (got {})", self.intensity));
        }
        if !self.offset.is_finite() {
            return arg_err("offset must be finite");
        }
        Ok(())
    }

    /// The same potential shifted down by `c`.
    pub fn with_offset(mut self, c: f64) -> Self {
        self.offset = c;
        self
    }

    /// Seed profile value at distance `r`.
    #[inline]
    pub fn eta(&self, r: f64) -> f64 {
        let r0 = self.support_radius;
        if r >= r0 {
            return 0.0;
        }
        let s = r / r0;
        match self.profile {
            Profile::Bump { amplitude } => amplitude * (1.0 - s * s).powi(2),
            Profile::Hat { amplitude } => amplitude * (1.0 - s),
        }
    }

    /// Potential of a lone point at `o`, as a function of the distance to `o`.
    pub fn single_trap(&self, r: f64) -> f64 {
        self.eta(r).min(self.v_max) - self.offset
    }

    /// `v_max < (d-1)^2 / 8`, the sup-norm bound under which the tilted measures
    /// are known to converge.
    pub fn theorem_regime(&self, d: usize) -> bool {
        self.v_max < free_bottom(d)
    }
}

/// Bottom of the spectrum of `-1/2 Laplacian` on `H^d`: `(d-1)^2 / 8`.
pub fn free_bottom(d: usize) -> f64 {
    let k = d as f64 - 1.0;
    k * k / 8.0
}

/// Volume of the geodesic ball of radius `r` in `H^d`, by adaptive quadrature of
/// `sigma_{d-1} sinh^{d-1}`.
pub fn ball_volume(d: usize, r: f64) -> Result<f64> {
    if d < 2 {
        return arg_err(format!("dimension must be >= 2 (got {d})"));
    }
    if !(r >= 0.0) || !r.is_finite() {
        return arg_err(format!("radius must be finite and >= 0 (got {r})"));
    }
    if r == 0.0 {
        return Ok(0.0);
    }
    let n = (d - 1) as i32;
    let scale = r * r.sinh().powi(n);
    let integral = adaptive_simpson(&|t: f64| t.sinh().powi(n), 0.0, r, 1e-14 * scale.max(1e-300));
    Ok(sphere_area(d) * integral)
}

/// Sampler for the radius of a uniform point in a ball: density proportional to
/// `sinh^{d-1}(r)` on `[0, R]`. Inversion uses a monotone cubic fit of the
/// tabulated CDF as the starting point of a safeguarded Newton iteration.
#[derive(Clone, Debug)]
pub struct RadialLaw {
    d: usize,
    knots: Vec<f64>,
    cdf: Vec<f64>,
    total: f64,
    inverse: Pchip,
}

impl RadialLaw {
    pub fn new(d: usize, radius: f64) -> Result<Self> {
        if d < 2 {
            return arg_err(format!("dimension must be >= 2 (got {d})"));
        }
        if !(radius > 0.0) || !radius.is_finite() {
            return arg_err(format!("window radius must be positive (got {radius})"));
        }
        let n = RADIAL_TABLE_KNOTS;
        let knots: Vec<f64> = (0..=n).map(|k| radius * k as f64 / n as f64).collect();
        let p = (d - 1) as i32;
        let mut acc = vec![0.0; n + 1];
        for k in 0..n {
            acc[k + 1] = acc[k] + gauss_legendre5(|t| t.sinh().powi(p), knots[k], knots[k + 1]);
        }
        let total = acc[n];
        let cdf: Vec<f64> = acc.iter().map(|a| a / total).collect();
        let inverse = Pchip::new(cdf.clone(), knots.clone())?;
        Ok(Self { d, knots, cdf, total, inverse })
    }

    pub fn radius(&self) -> f64 {
        self.knots[self.knots.len() - 1]
    }

    fn cdf_at(&self, k: usize, r: f64) -> f64 {
        let p = (self.d - 1) as i32;
        self.cdf[k] + gauss_legendre5(|t| t.sinh().powi(p), self.knots[k], r) / self.total
    }

    /// Radius with CDF value `u` in `[0, 1]`.
    pub fn quantile(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        let n = self.knots.len() - 1;
        let k = (self.cdf.partition_point(|&c| c <= u).max(1) - 1).min(n - 1);
        let (mut lo, mut hi) = (self.knots[k], self.knots[k + 1]);
        let mut r = self.inverse.eval(u).unwrap_or(lo).clamp(lo, hi);
        let p = (self.d - 1) as i32;
        for _ in 0..40 {
            let f = self.cdf_at(k, r) - u;
            if f.abs() <= 1e-15 {
                break;
            }
            if f > 0.0 {
                hi = r;
            } else {
                lo = r;
            }
            let dens = r.sinh().powi(p) / self.total;
            let newton = r - f / dens;
            r = if dens > 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
            if hi - lo < 1e-15 * (1.0 + hi) {
                break;
            }
        }
        r
    }
}

/// A finite Poisson configuration, complete inside the ball `B(o, window_radius)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Configuration {
    d: usize,
    points: Vec<HPoint>,
    window_radius: f64,
    intensity: f64,
}

/// JSON layout of a configuration: `{d, window_radius, intensity, points}` with
/// each point given by its Minkowski coordinates `[z_0, ..., z_d]`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConfigurationJson {
    pub d: usize,
    pub window_radius: f64,
    pub intensity: f64,
    pub points: Vec<Vec<f64>>,
}

impl Configuration {
    pub fn new(d: usize, points: Vec<HPoint>, window_radius: f64, intensity: f64) -> Result<Self> {
        HPoint::origin(d)?;
        if !(window_radius > 0.0) {
            return arg_err(format!("window radius must be positive (got {window_radius})"));
        }
        if !(intensity >= 0.0) || !intensity.is_finite() {
            return arg_err(format!("intensity must be finite and >= 0 (got {intensity})"));
        }
        let cosh_w = window_radius.cosh();
        for p in &points {
            if p.dim() != d {
                return arg_err(format!("point of dimension {} in a configuration of dimension {d}", p.dim()));
            }
            if p.z0() > cosh_w * (1.0 + 1e-12) {
                return Err(Error::Domain(format!(
                    "point at distance {:.6} lies outside the window of radius {window_radius}",
                    p.radius()
                )));
            }
        }
        let cfg = Self { d, points, window_radius, intensity };
        cfg.check_duplicates()?;
        Ok(cfg)
    }

    /// A configuration with explicitly placed points (intensity zero outside them).
    pub fn planted(d: usize, points: Vec<HPoint>, window_radius: f64) -> Result<Self> {
        Self::new(d, points, window_radius, 0.0)
    }

    pub fn empty(d: usize, window_radius: f64) -> Result<Self> {
        Self::new(d, Vec::new(), window_radius, 0.0)
    }

    fn check_duplicates(&self) -> Result<()> {
        let mut order: Vec<usize> = (0..self.points.len()).collect();
        order.sort_by(|&a, &b| self.points[a].z0().total_cmp(&self.points[b].z0()));
        for (i, &a) in order.iter().enumerate() {
            let pa = &self.points[a];
            for &b in &order[i + 1..] {
                let pb = &self.points[b];
                if pb.z0() - pa.z0() > 1e-12 * pa.z0() {
                    break;
                }
                if geom::distance_unchecked(pa, pb) < 1e-12 {
                    return Err(Error::Domain("duplicate points in configuration".into()));
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn points(&self) -> &[HPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn window_radius(&self) -> f64 {
        self.window_radius
    }

    pub fn intensity(&self) -> f64 {
        self.intensity
    }

    /// Number of points with `lo <= d(o, y) < hi`.
    pub fn count_in_annulus(&self, lo: f64, hi: f64) -> usize {
        self.points.iter().filter(|p| (lo..hi).contains(&p.radius())).count()
    }

    /// Image under an isometry fixing `o` (elements of `K`); the window is unchanged.
    pub fn rotate(&self, k: &Isometry) -> Result<Self> {
        let o = HPoint::origin(self.d)?;
        let ko = geom::apply_isometry(k, &o)?;
        if geom::distance(&o, &ko)? > 1e-10 {
            return arg_err("rotation must fix the base point");
        }
        let points = self.points.iter().map(|p| geom::apply_isometry(k, p)).collect::<Result<Vec<_>>>()?;
        Ok(Self { points, ..self.clone() })
    }

    /// The configuration as seen from `x`: `g . omega` for the transvection `g`
    /// with `g . x = o`. The new window is the largest ball about `o` inside the
    /// image of the old one.
    pub fn reroot(&self, x: &HPoint) -> Result<Self> {
        let r = x.radius();
        let window = self.window_radius - r;
        if !(window > 0.0) {
            return Err(Error::WindowTooSmall { distance: r, required: r, window: self.window_radius });
        }
        let g = geom::boost_to_origin(x);
        let cosh_w = window.cosh();
        let points: Vec<HPoint> =
            self.points.iter().map(|p| g.apply_unchecked(p)).filter(|p| p.z0() <= cosh_w).collect();
        Self::new(self.d, points, window, self.intensity)
    }

    pub fn to_json_value(&self) -> ConfigurationJson {
        ConfigurationJson {
            d: self.d,
            window_radius: self.window_radius,
            intensity: self.intensity,
            points: self.points.iter().map(|p| p.coords().to_vec()).collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_json_value()).expect("configuration serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let raw: ConfigurationJson = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        Self::try_from(raw)
    }
}

impl TryFrom<ConfigurationJson> for Configuration {
    type Error = Error;

    fn try_from(raw: ConfigurationJson) -> Result<Self> {
        let points = raw
            .points
            .iter()
            .map(|z| {
                if z.len() != raw.d + 1 {
                    return arg_err(format!("point has {} coordinates, expected {}", z.len(), raw.d + 1));
                }
                HPoint::from_coords(z)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(raw.d, points, raw.window_radius, raw.intensity)
    }
}

/// Draws Poisson configurations in a fixed window.
#[derive(Clone, Debug)]
pub struct PppSampler {
    d: usize,
    window_radius: f64,
    intensity: f64,
    mean_count: f64,
    radial: RadialLaw,
}

impl PppSampler {
    pub fn new(d: usize, window_radius: f64, intensity: f64) -> Result<Self> {
        if !(intensity >= 0.0) || !intensity.is_finite() {
            return arg_err(format!("intensity must be finite and >= 0 (got {intensity})"));
        }
        let radial = RadialLaw::new(d, window_radius)?;
        let mean_count = intensity * ball_volume(d, window_radius)?;
        Ok(Self { d, window_radius, intensity, mean_count, radial })
    }

    /// Expected number of points, `intensity * vol(B(o, R))`.
    pub fn mean_count(&self) -> f64 {
        self.mean_count
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Configuration {
        let count = if self.mean_count > 0.0 {
            let law = Poisson::new(self.mean_count).expect("positive finite Poisson mean");
            law.sample(rng) as usize
        } else {
            0
        };
        let mut dir = vec![0.0; self.d];
        let mut points = Vec::with_capacity(count);
        while points.len() < count {
            let r = self.radial.quantile(rng.random::<f64>());
            let mut norm2 = 0.0;
            for c in dir.iter_mut() {
                *c = rng.sample(StandardNormal);
                norm2 += *c * *c;
            }
            if norm2 == 0.0 {
                continue;
            }
            points.push(HPoint::polar(self.d, r, &dir).expect("valid polar coordinates"));
        }
        Configuration { d: self.d, points, window_radius: self.window_radius, intensity: self.intensity }
    }
}

/// One Poisson configuration in `B(o, R)` with the given intensity.
pub fn sample_configuration<R: Rng + ?Sized>(d: usize, radius: f64, intensity: f64, rng: &mut R) -> Result<Configuration> {
    Ok(PppSampler::new(d, radius, intensity)?.sample(rng))
}

/// The potential of a configuration, prepared for repeated evaluation.
#[derive(Clone, Debug)]
pub struct PotentialField<'a> {
    spec: &'a PotentialSpec,
    config: &'a Configuration,
    cosh_support: f64,
    max_z0: f64,
}

impl<'a> PotentialField<'a> {
    pub fn new(spec: &'a PotentialSpec, config: &'a Configuration) -> Result<Self> {
        spec.validate()?;
        let reach = config.window_radius - spec.support_radius;
        let max_z0 = if reach >= 0.0 { reach.cosh() * (1.0 + 1e-12) } else { 0.0 };
        Ok(Self { spec, config, cosh_support: spec.support_radius.cosh(), max_z0 })
    }

    pub fn spec(&self) -> &PotentialSpec {
        self.spec
    }

    pub fn config(&self) -> &Configuration {
        self.config
    }

    pub fn dim(&self) -> usize {
        self.config.d
    }

    /// Largest distance from `o` at which the potential is exactly known.
    pub fn reach(&self) -> f64 {
        self.config.window_radius - self.spec.support_radius
    }

    #[inline]
    fn check_window(&self, x: &HPoint) -> Result<()> {
        if x.z0() <= self.max_z0 {
            Ok(())
        } else {
            let r = x.radius();
            Err(Error::WindowTooSmall {
                distance: r,
                required: r + self.spec.support_radius,
                window: self.config.window_radius,
            })
        }
    }

    /// `sum_y eta(d(x, y))` without cap or offset.
    pub fn uncapped(&self, x: &HPoint) -> Result<f64> {
        if x.dim() != self.config.d {
            return arg_err("point and configuration dimensions differ");
        }
        self.check_window(x)?;
        Ok(self.sum_eta(x))
    }

    #[inline]
    fn sum_eta(&self, x: &HPoint) -> f64 {
        let mut acc = 0.0;
        for y in &self.config.points {
            if -geom::mdot(x.coords(), y.coords()) < self.cosh_support {
                acc += self.spec.eta(geom::distance_unchecked(x, y));
            }
        }
        acc
    }

    /// `min(v_max, sum_y eta(d(x, y))) - offset`.
    #[inline]
    pub fn evaluate(&self, x: &HPoint) -> Result<f64> {
        self.check_window(x)?;
        Ok(self.sum_eta(x).min(self.spec.v_max) - self.spec.offset)
    }
}

/// Potential of `config` at `x`.
pub fn evaluate_potential(spec: &PotentialSpec, config: &Configuration, x: &HPoint) -> Result<f64> {
    if x.dim() != config.d {
        return arg_err("point and configuration dimensions differ");
    }
    PotentialField::new(spec, config)?.evaluate(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::StreamKey;

    fn spec() -> PotentialSpec {
        PotentialSpec::new(Profile::Bump { amplitude: 0.1 }, 1.0, 0.1, 1.0).unwrap()
    }

    #[test]
    fn profile_shape() {
        let s = spec();
        assert_eq!(s.eta(0.0), 0.1);
        assert_eq!(s.eta(1.0), 0.0);
        assert_eq!(s.eta(3.0), 0.0);
        assert!(s.eta(0.5) < s.eta(0.4));
        let hat = PotentialSpec::new(Profile::Hat { amplitude: 2.0 }, 2.0, 5.0, 1.0).unwrap();
        assert_eq!(hat.eta(1.0), 1.0);
        assert!(s.theorem_regime(2));
        assert!(!PotentialSpec::new(Profile::Bump { amplitude: 1.0 }, 1.0, 0.2, 1.0).unwrap().theorem_regime(2));
    }

    #[test]
    fn invalid_specs() {
        assert!(PotentialSpec::new(Profile::Bump { amplitude: 0.1 }, 0.0, 0.1, 1.0).is_err());
        assert!(PotentialSpec::new(Profile::Bump { amplitude: -0.1 }, 1.0, 0.1, 1.0).is_err());
        assert!(PotentialSpec::new(Profile::Bump { amplitude: 0.1 }, 1.0, -0.1, 1.0).is_err());
    }

    #[test]
    fn ball_volume_small_cases() {
        assert_eq!(ball_volume(3, 0.0).unwrap(), 0.0);
        assert!(ball_volume(2, -1.0).is_err());
    }

    #[test]
    fn empty_and_far_configurations() {
        let s = spec();
        let x = HPoint::on_axis(2, 0.5).unwrap();
        let empty = Configuration::empty(2, 5.0).unwrap();
        assert_eq!(evaluate_potential(&s, &empty, &x).unwrap(), 0.0);
        let far = Configuration::planted(2, vec![HPoint::on_axis(2, 2.0).unwrap()], 5.0).unwrap();
        assert_eq!(evaluate_potential(&s, &far, &x).unwrap(), 0.0);
    }

    #[test]
    fn cap_saturates() {
        let s = PotentialSpec::new(Profile::Bump { amplitude: 0.01 }, 1.0, 0.3, 1.0).unwrap();
        let pts: Vec<HPoint> = (0..50).map(|k| HPoint::on_axis(2, 1e-6 * (k + 1) as f64).unwrap()).collect();
        let cluster = Configuration::planted(2, pts, 3.0).unwrap();
        let o = HPoint::origin(2).unwrap();
        assert_eq!(evaluate_potential(&s, &cluster, &o).unwrap(), 0.3);
    }

    #[test]
    fn window_violation_is_an_error() {
        let s = spec();
        let cfg = Configuration::empty(2, 3.0).unwrap();
        let x = HPoint::on_axis(2, 2.5).unwrap();
        assert!(matches!(evaluate_potential(&s, &cfg, &x), Err(Error::WindowTooSmall { .. })));
        let inside = HPoint::on_axis(2, 1.99).unwrap();
        assert!(evaluate_potential(&s, &cfg, &inside).is_ok());
    }

    #[test]
    fn configuration_invariants() {
        let p = HPoint::on_axis(2, 1.0).unwrap();
        assert!(Configuration::planted(2, vec![p, p], 3.0).is_err());
        assert!(Configuration::planted(2, vec![HPoint::on_axis(2, 4.0).unwrap()], 3.0).is_err());
        assert!(Configuration::planted(2, vec![HPoint::origin(3).unwrap()], 3.0).is_err());
    }

    #[test]
    fn zero_intensity_gives_empty_configuration() {
        let mut rng = StreamKey::new(1).rng(0);
        let cfg = sample_configuration(2, 3.0, 0.0, &mut rng).unwrap();
        assert!(cfg.is_empty());
    }

    #[test]
    fn json_round_trip() {
        let mut rng = StreamKey::new(5).rng(0);
        let cfg = sample_configuration(3, 2.0, 0.5, &mut rng).unwrap();
        let back = Configuration::from_json(&cfg.to_json()).unwrap();
        assert_eq!(back.len(), cfg.len());
        for (a, b) in back.points().iter().zip(cfg.points()) {
            assert!(geom::distance(a, b).unwrap() < 1e-12);
        }
        assert!(Configuration::from_json("{\"d\":2}").is_err());
    }

    #[test]
    fn reroot_moves_points_to_origin() {
        let x = HPoint::on_axis(2, 1.5).unwrap();
        let cfg = Configuration::planted(2, vec![x], 10.0).unwrap();
        let re = cfg.reroot(&x).unwrap();
        assert_eq!(re.len(), 1);
        assert!(re.points()[0].radius() < 1e-9);
        assert!((re.window_radius() - 8.5).abs() < 1e-12);
    }
}
