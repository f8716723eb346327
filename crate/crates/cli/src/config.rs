//! Flat key-value experiment configuration (TOML syntax, no tables).

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use hypertrap::geom::HPoint;
use hypertrap::ppp::{ball_volume, free_bottom, Configuration, PotentialSpec, PppSampler, Profile};
use hypertrap::spectral::OuterBoundary;
use hypertrap::StreamKey;
use serde::{Deserialize, Serialize};

/// Sampled configurations larger than this are refused.
pub const MAX_SAMPLED_POINTS: f64 = 5e6;

/// Every key of the configuration file, with its default.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Dimension of the hyperbolic space.
    pub d: usize,
    /// `planted` (explicit points, default one trap at `o`) or `sampled` (Poisson).
    pub mode: String,
    /// Poisson intensity kappa in sampled mode.
    pub intensity: f64,
    /// Spatial coordinates of planted traps; empty means a single trap at `o`.
    pub planted: Vec<Vec<f64>>,
    /// `bump` or `hat`.
    pub profile: String,
    pub amplitude: f64,
    /// Trap support radius r_0.
    pub support_radius: f64,
    pub v_max: f64,
    /// Constant subtracted from the potential.
    pub offset: f64,
    /// Window radius; derived from the excursion budget when absent.
    pub window_radius: Option<f64>,
    /// Spatial coordinates of the starting point; `o` when absent.
    pub start: Option<Vec<f64>>,
    pub h: f64,
    /// Paths per ensemble.
    pub n: usize,
    /// Horizon for single-horizon commands.
    pub t: f64,
    /// Horizons for `estimate-rho` and `q-marginal`.
    pub t_grid: Vec<f64>,
    /// Radial distances of the eigenfunction probes.
    pub probes: Vec<f64>,
    pub seed: u64,
    #[serde(skip_serializing)]
    pub out: PathBuf,
    /// Worker threads; all available when absent.
    #[serde(skip_serializing)]
    pub workers: Option<usize>,
    /// Also run the particle system in `estimate-z`.
    pub smc: bool,
    pub resample_period: f64,
    /// Configurations averaged by the annealed estimate (sampled mode, 0 = off).
    pub configs: usize,
    /// Time of the Q-process marginal.
    pub q_time: f64,
    pub bins: usize,
    /// Radial oracle: outer radius, cells, outer wall.
    pub r_max: f64,
    pub cells: usize,
    pub boundary: String,
    /// Multiplier on the potential in `born-check`.
    pub born_scale: f64,
    /// Spectral parameter of `born-check`; `(0, (d-1)^2/16)` when absent.
    pub born_z: Option<[f64; 2]>,
    pub k_max: usize,
    pub contour_center: f64,
    /// Contour radius; `(d-1)^2/16` when absent.
    pub contour_radius: Option<f64>,
    pub contour_nodes: usize,
    pub functionals: Vec<String>,
    /// Mean counts of the Fock test region.
    pub fock_v: Vec<f64>,
    pub fock_radius: f64,
    pub fock_samples: usize,
    pub n_max: usize,
    /// Rows of `points.csv` and `path.csv` beyond this are not written.
    pub max_rows: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            d: 2,
            mode: "planted".into(),
            intensity: 0.0,
            planted: Vec::new(),
            profile: "bump".into(),
            amplitude: 0.1,
            support_radius: 1.0,
            v_max: 0.1,
            offset: 0.0,
            window_radius: None,
            start: None,
            h: 1e-3,
            n: 10_000,
            t: 40.0,
            t_grid: vec![10.0, 20.0, 40.0],
            probes: vec![0.5, 1.0, 2.0, 4.0],
            seed: 0,
            out: PathBuf::from("out"),
            workers: None,
            smc: false,
            resample_period: 0.5,
            configs: 0,
            q_time: 1.0,
            bins: 40,
            r_max: 30.0,
            cells: 3000,
            boundary: "reflecting".into(),
            born_scale: 1.0,
            born_z: None,
            k_max: 200,
            contour_center: 0.0,
            contour_radius: None,
            contour_nodes: 128,
            functionals: vec!["count".into(), "void".into()],
            fock_v: vec![0.5, 1.0, 2.0],
            fock_radius: 1.0,
            fock_samples: 100_000,
            n_max: 30,
            max_rows: 1_000_000,
        }
    }
}

/// How the window radius was fixed.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WindowPolicy {
    /// Longest horizon any walk of the command runs to.
    pub horizon: f64,
    /// Largest starting distance from `o`.
    pub start_radius: f64,
    /// `start_radius + (d-1)/2 T + 8 sqrt(T) + 1`.
    pub excursion_budget: f64,
    /// `excursion_budget + r_0`.
    pub required: f64,
    pub window_radius: f64,
    pub derived: bool,
}

/// Position of `V_max` relative to the bottom of the free spectrum.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Regime {
    pub v_max: f64,
    pub free_bottom: f64,
    pub theorem_regime: bool,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).context("invalid configuration")?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(2..=hypertrap::geom::MAX_DIM).contains(&self.d) {
            bail!("d must be in 2..={} (got {})", hypertrap::geom::MAX_DIM, self.d);
        }
        if self.mode != "planted" && self.mode != "sampled" {
            bail!("mode must be 'planted' or 'sampled' (got '{}')", self.mode);
        }
        if !(self.intensity >= 0.0) || !self.intensity.is_finite() {
            bail!("intensity must be finite and >= 0");
        }
        self.potential()?;
        hypertrap::diffusion::check_step(self.h)?;
        if self.n < 2 {
            bail!("n must be at least 2");
        }
        if !(self.t > 0.0) {
            bail!("t must be positive");
        }
        if self.t_grid.is_empty() || self.t_grid.windows(2).any(|w| !(w[1] > w[0])) || !(self.t_grid[0] > 0.0) {
            bail!("t_grid must be positive and strictly increasing");
        }
        if self.probes.iter().any(|r| !(*r >= 0.0) || !r.is_finite()) {
            bail!("probes must be finite non-negative radii");
        }
        for p in &self.planted {
            if p.len() != self.d {
                bail!("planted point {p:?} has {} coordinates, expected {}", p.len(), self.d);
            }
        }
        if let Some(s) = &self.start {
            if s.len() != self.d {
                bail!("start has {} coordinates, expected {}", s.len(), self.d);
            }
        }
        self.outer_boundary()?;
        if self.bins == 0 || self.k_max == 0 || self.contour_nodes < 4 || self.fock_samples < 2 {
            bail!("bins, k_max, contour_nodes (>= 4) and fock_samples (>= 2) must be positive");
        }
        if !(self.q_time > 0.0) || !(self.resample_period > 0.0) {
            bail!("q_time and resample_period must be positive");
        }
        for f in &self.functionals {
            f.parse::<hypertrap::fock::Functional>()?;
        }
        Ok(())
    }

    pub fn potential(&self) -> Result<PotentialSpec> {
        let profile = match self.profile.as_str() {
            "bump" => Profile::Bump { amplitude: self.amplitude },
            "hat" => Profile::Hat { amplitude: self.amplitude },
            other => bail!("profile must be 'bump' or 'hat' (got '{other}')"),
        };
        Ok(PotentialSpec::new(profile, self.support_radius, self.v_max, self.intensity)?.with_offset(self.offset))
    }

    pub fn outer_boundary(&self) -> Result<OuterBoundary> {
        Ok(self.boundary.parse::<OuterBoundary>()?)
    }

    pub fn start_point(&self) -> Result<HPoint> {
        Ok(match &self.start {
            Some(s) => HPoint::from_spatial(s)?,
            None => HPoint::origin(self.d)?,
        })
    }

    pub fn regime(&self) -> Regime {
        let bottom = free_bottom(self.d);
        Regime { v_max: self.v_max, free_bottom: bottom, theorem_regime: self.v_max < bottom }
    }

    /// Fixes the window for walks up to `horizon` from starts at distance up to
    /// `start_radius`, rejecting explicit windows that are too small.
    pub fn window(&self, horizon: f64, start_radius: f64) -> Result<WindowPolicy> {
        let budget = start_radius + 0.5 * (self.d as f64 - 1.0) * horizon + 8.0 * horizon.sqrt() + 1.0;
        let required = budget + self.support_radius;
        let (window_radius, derived) = match self.window_radius {
            Some(w) if w < required => bail!(
                "window_radius {w} is below the excursion budget {budget:.4} plus the support radius {} \
                 (needs at least {required:.4})",
                self.support_radius
            ),
            Some(w) => (w, false),
            None => (required, true),
        };
        Ok(WindowPolicy { horizon, start_radius, excursion_budget: budget, required, window_radius, derived })
    }

    /// The trap configuration inside `window`: planted points, or one Poisson
    /// draw from `key.rng(0)`.
    pub fn configuration(&self, window: f64, key: StreamKey) -> Result<Configuration> {
        if self.mode == "planted" {
            let points = if self.planted.is_empty() {
                vec![HPoint::origin(self.d)?]
            } else {
                self.planted.iter().map(|p| HPoint::from_spatial(p)).collect::<hypertrap::Result<Vec<_>>>()?
            };
            return Ok(Configuration::planted(self.d, points, window)?);
        }
        let sampler = self.sampler(window)?;
        Ok(sampler.sample(&mut key.rng(0)))
    }

    pub fn sampler(&self, window: f64) -> Result<PppSampler> {
        let mean = self.intensity * ball_volume(self.d, window)?;
        if mean > MAX_SAMPLED_POINTS {
            bail!(
                "sampled window of radius {window:.3} holds {mean:.3e} points on average; \
                 lower the horizon, the intensity or the window"
            );
        }
        Ok(PppSampler::new(self.d, window, self.intensity)?)
    }

    /// Whether the configuration is the single planted trap at `o` that the
    /// radial oracle describes.
    pub fn single_trap_at_origin(&self) -> bool {
        self.mode == "planted"
            && (self.planted.is_empty() || (self.planted.len() == 1 && self.planted[0].iter().all(|c| *c == 0.0)))
    }

    pub fn default_contour_radius(&self) -> f64 {
        0.5 * free_bottom(self.d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        let cfg = ExperimentConfig::default();
        cfg.validate().unwrap();
        assert!(cfg.regime().theorem_regime);
        assert!(cfg.single_trap_at_origin());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(ExperimentConfig::parse("dimension = 3").is_err());
        assert!(ExperimentConfig::parse("[section]\nd = 3").is_err());
    }

    #[test]
    fn parse_overrides_defaults() {
        let cfg = ExperimentConfig::parse("d = 3\nt_grid = [1.0, 2.0, 4.0]\nmode = \"sampled\"\nintensity = 0.5").unwrap();
        assert_eq!(cfg.d, 3);
        assert_eq!(cfg.t_grid, vec![1.0, 2.0, 4.0]);
        assert_eq!(cfg.h, 1e-3);
        cfg.validate().unwrap();
    }

    #[test]
    fn window_policy() {
        let mut cfg = ExperimentConfig::default();
        let w = cfg.window(4.0, 0.0).unwrap();
        assert!(w.derived);
        assert!((w.required - (2.0 + 16.0 + 1.0 + 1.0)).abs() < 1e-12);
        cfg.window_radius = Some(5.0);
        assert!(cfg.window(4.0, 0.0).is_err());
        cfg.window_radius = Some(50.0);
        assert!(!cfg.window(4.0, 0.0).unwrap().derived);
    }

    #[test]
    fn invalid_values_are_caught() {
        let bad = ["d = 1", "h = 0.5", "mode = \"grid\"", "profile = \"box\"", "t_grid = [2.0, 1.0]", "planted = [[0.0]]"];
        for text in bad {
            let cfg = ExperimentConfig::parse(text).unwrap();
            assert!(cfg.validate().is_err(), "{text}");
        }
    }
}
