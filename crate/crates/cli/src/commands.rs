//! The experiment commands. Each returns its tables and summary values; the
//! caller writes them out.

use anyhow::{bail, Result};
use clap::ValueEnum;
use hypertrap::diffusion::{endpoints, simulate_path};
use hypertrap::feynman_kac::{
    doob_endpoint_radii, estimate_phi_ratio, estimate_rho, estimate_z, estimate_z_annealed, q_marginal,
    smc_estimate_z, DoobDrift,
};
use hypertrap::fock::{isometry_check, Functional, Region};
use hypertrap::geom::HPoint;
use hypertrap::ppp::{Configuration, PotentialSpec};
use hypertrap::spectral::{
    apply_projector, born_resolvent_apply, contour_projector, direct_resolvent_apply, solve_ground_state,
    write_eigenpair_csv, RadialOperator, RadialSpectrum,
};
use hypertrap::stats::{ks_two_sample, MeanEstimate};
use hypertrap::{Error, StreamKey};
use num_complex::Complex64;
use serde::Serialize;

use crate::config::{ExperimentConfig, WindowPolicy};
use crate::output::{fmt_f64, Outcome, RawFile, Table};

/// Stream family labels under the run seed.
pub mod streams {
    pub const PPP: u64 = 1;
    pub const PATHS: u64 = 2;
    pub const RHO: u64 = 3;
    pub const PHI: u64 = 4;
    pub const Q: u64 = 5;
    pub const DOOB: u64 = 6;
    pub const FOCK: u64 = 7;
    pub const SMC: u64 = 8;
    pub const ANNEALED: u64 = 9;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    SamplePpp,
    SimulateBm,
    EstimateZ,
    EstimateRho,
    PhiProfile,
    QMarginal,
    DoobCompare,
    RadialOracle,
    BornCheck,
    ContourCheck,
    FockCheck,
    FullPipeline,
}

impl Command {
    pub fn name(self) -> String {
        self.to_possible_value().expect("named command").get_name().to_string()
    }
}

pub fn run(command: Command, cfg: &ExperimentConfig) -> Result<Outcome> {
    let root = StreamKey::new(cfg.seed);
    match command {
        Command::SamplePpp => sample_ppp(cfg, root),
        Command::SimulateBm => simulate_bm(cfg, root),
        Command::EstimateZ => estimate_z_cmd(cfg, root),
        Command::EstimateRho => estimate_rho_cmd(cfg, root),
        Command::PhiProfile => phi_profile(cfg, root),
        Command::QMarginal => q_marginal_cmd(cfg, root),
        Command::DoobCompare => doob_compare(cfg, root),
        Command::RadialOracle => radial_oracle(cfg).map(|(o, _)| o),
        Command::BornCheck => born_check(cfg),
        Command::ContourCheck => contour_check(cfg),
        Command::FockCheck => fock_check(cfg, root),
        Command::FullPipeline => full_pipeline(cfg, root),
    }
}

fn coord_columns(d: usize) -> Vec<String> {
    (0..=d).map(|i| format!("z_{i}")).collect()
}

fn point_row(index: usize, p: &HPoint) -> Vec<String> {
    let mut row = vec![index.to_string()];
    row.extend(p.coords().iter().map(|z| fmt_f64(*z)));
    row.push(fmt_f64(p.radius()));
    row
}

fn points_table(name: &str, d: usize, points: &[HPoint], limit: usize) -> Table {
    let mut cols = vec!["index".to_string()];
    cols.extend(coord_columns(d));
    cols.push("r".into());
    let mut t = Table::with_columns(name, cols);
    for (i, p) in points.iter().enumerate().take(limit) {
        t.push(point_row(i, p));
    }
    t
}

struct Setup {
    window: WindowPolicy,
    spec: PotentialSpec,
    config: Configuration,
}

fn setup(cfg: &ExperimentConfig, root: StreamKey, horizon: f64, start_radius: f64) -> Result<Setup> {
    let window = cfg.window(horizon, start_radius)?;
    let spec = cfg.potential()?;
    let config = cfg.configuration(window.window_radius, root.derive(streams::PPP))?;
    Ok(Setup { window, spec, config })
}

fn record_setup(out: &mut Outcome, s: &Setup, cfg: &ExperimentConfig) {
    out.result("window", &s.window);
    out.result("trap_count", s.config.len());
    out.result("regime", cfg.regime());
}

fn sample_ppp(cfg: &ExperimentConfig, root: StreamKey) -> Result<Outcome> {
    let x0 = cfg.start_point()?;
    let s = setup(cfg, root, cfg.t, x0.radius())?;
    let mut out = Outcome::default();
    record_setup(&mut out, &s, cfg);
    if cfg.mode == "sampled" {
        out.result("expected_count", cfg.sampler(s.window.window_radius)?.mean_count());
    }
    if s.config.len() > cfg.max_rows {
        bail!("configuration has {} points, more than max_rows = {}", s.config.len(), cfg.max_rows);
    }
    out.tables.push(points_table("points", cfg.d, s.config.points(), cfg.max_rows));
    out.files.push(RawFile { name: "configuration.json".into(), contents: s.config.to_json() + "\n" });
    Ok(out)
}

fn simulate_bm(cfg: &ExperimentConfig, root: StreamKey) -> Result<Outcome> {
    let x0 = cfg.start_point()?;
    let key = root.derive(streams::PATHS);
    let path = simulate_path(&x0, cfg.t, cfg.h, &mut key.rng(0))?;
    let ends = endpoints(&x0, cfg.t, cfg.h, cfg.n, key)?;
    let mut out = Outcome::default();

    let stride = path.points.len().div_ceil(cfg.max_rows.max(1));
    let mut cols = vec!["t".to_string()];
    cols.extend(coord_columns(cfg.d));
    cols.push("r".into());
    let mut table = Table::with_columns("path", cols);
    for k in (0..path.points.len()).step_by(stride) {
        let mut row = vec![fmt_f64(path.times[k])];
        row.extend(path.points[k].coords().iter().map(|z| fmt_f64(*z)));
        row.push(fmt_f64(path.points[k].radius()));
        table.push(row);
    }
    out.tables.push(table);
    out.tables.push(points_table("endpoints", cfg.d, &ends, usize::MAX));

    let speed: Vec<f64> = ends.iter().map(|p| p.radius() / cfg.t).collect();
    out.result("path_stride", stride);
    out.result("max_sheet_defect", path.max_sheet_defect());
    out.result("mean_radius_over_t", MeanEstimate::from_samples(&speed));
    out.result("drift_reference", 0.5 * (cfg.d as f64 - 1.0));
    Ok(out)
}

fn estimate_z_cmd(cfg: &ExperimentConfig, root: StreamKey) -> Result<Outcome> {
    let x0 = cfg.start_point()?;
    let s = setup(cfg, root, cfg.t, x0.radius())?;
    let mut out = Outcome::default();
    record_setup(&mut out, &s, cfg);
    let mut table = Table::new("z", &["method", "t", "z", "stderr", "n", "decay_rate"]);
    let plain = estimate_z(&x0, &s.config, &s.spec, cfg.t, cfg.h, cfg.n, root.derive(streams::PATHS))?;
    table.push(["plain".into(), fmt_f64(plain.t), fmt_f64(plain.z), fmt_f64(plain.stderr), plain.n.to_string(), fmt_f64(plain.decay_rate())]);
    out.result("plain", plain);
    if cfg.smc {
        let smc = smc_estimate_z(&x0, &s.config, &s.spec, cfg.t, cfg.h, cfg.n, cfg.resample_period, root.derive(streams::SMC))?;
        let rate = -smc.z.ln() / smc.t;
        table.push(["smc".into(), fmt_f64(smc.t), fmt_f64(smc.z), fmt_f64(smc.stderr), smc.n.to_string(), fmt_f64(rate)]);
        let pooled = (plain.stderr.powi(2) + smc.stderr.powi(2)).sqrt();
        out.result("smc", &smc);
        out.result("smc_agrees", (plain.z - smc.z).abs() <= 3.0 * pooled);
    }
    if cfg.mode == "sampled" && cfg.configs >= 2 {
        let sampler = cfg.sampler(s.window.window_radius)?;
        let ann = estimate_z_annealed(&x0, &sampler, &s.spec, cfg.t, cfg.h, cfg.n, cfg.configs, root.derive(streams::ANNEALED))?;
        let rate = -ann.mean.ln() / cfg.t;
        table.push(["annealed".into(), fmt_f64(cfg.t), fmt_f64(ann.mean), fmt_f64(ann.stderr), ann.n.to_string(), fmt_f64(rate)]);
        out.result("annealed", ann);
    }
    out.tables.push(table);
    Ok(out)
}

fn rho_outcome(cfg: &ExperimentConfig, s: &Setup, x0: &HPoint, root: StreamKey) -> Result<(Outcome, f64, f64)> {
    let est = estimate_rho(x0, &s.config, &s.spec, &cfg.t_grid, cfg.h, cfg.n, root.derive(streams::RHO))?;
    let mut out = Outcome::default();
    let mut zt = Table::new("z_grid", &["t", "z", "stderr", "n", "neg_log_z"]);
    for z in &est.z {
        zt.push([z.t, z.z, z.stderr, z.n as f64, -z.z.ln()]);
    }
    let mut wt = Table::new("rho_windows", &["t_min", "points", "slope", "stderr", "selected"]);
    for (k, w) in est.diagnostics.windows.iter().enumerate() {
        wt.push([w.t_min, w.points as f64, w.slope, w.stderr, if k == est.diagnostics.selected { 1.0 } else { 0.0 }]);
    }
    out.tables.push(zt);
    out.tables.push(wt);
    out.result("rho_hat", est.rho_hat);
    out.result("rho_stderr", est.rho_stderr);
    out.result("within_bounds", est.within_bounds);
    out.result("stable", est.diagnostics.stable);
    out.result("monotone", est.diagnostics.monotone);
    Ok((out, est.rho_hat, est.rho_stderr))
}

fn estimate_rho_cmd(cfg: &ExperimentConfig, root: StreamKey) -> Result<Outcome> {
    let x0 = cfg.start_point()?;
    let horizon = cfg.t_grid[cfg.t_grid.len() - 1];
    let s = setup(cfg, root, horizon, x0.radius())?;
    let (mut out, _, _) = rho_outcome(cfg, &s, &x0, root)?;
    record_setup(&mut out, &s, cfg);
    Ok(out)
}

fn probe_points(cfg: &ExperimentConfig) -> Result<Vec<HPoint>> {
    Ok(cfg.probes.iter().map(|&r| HPoint::on_axis(cfg.d, r)).collect::<hypertrap::Result<_>>()?)
}

fn phi_outcome(cfg: &ExperimentConfig, s: &Setup, root: StreamKey, oracle: Option<&RadialSpectrum>) -> Result<Outcome> {
    let o = HPoint::origin(cfg.d)?;
    let probes = probe_points(cfg)?;
    let ratios = estimate_phi_ratio(&probes, &o, &s.config, &s.spec, cfg.t, cfg.h, cfg.n, root.derive(streams::PHI))?;
    let mut out = Outcome::default();
    let mut cols = vec!["radius", "ratio", "stderr"];
    if oracle.is_some() {
        cols.extend(["oracle_ratio", "z_score"]);
    }
    let mut table = Table::new("phi_ratio", &cols);
    for (p, &r) in ratios.iter().zip(&cfg.probes) {
        let mut row = vec![r, p.ratio, p.stderr];
        if let Some(spec) = oracle {
            let want = spec.ratio(r)?;
            row.extend([want, (p.ratio - want) / p.stderr]);
        }
        table.push(row);
    }
    out.tables.push(table);
    out.result("ratios", &ratios);
    Ok(out)
}

fn phi_profile(cfg: &ExperimentConfig, root: StreamKey) -> Result<Outcome> {
    let reach = cfg.probes.iter().copied().fold(0.0, f64::max);
    let s = setup(cfg, root, cfg.t, reach)?;
    let mut out = phi_outcome(cfg, &s, root, None)?;
    record_setup(&mut out, &s, cfg);
    Ok(out)
}

fn q_marginal_cmd(cfg: &ExperimentConfig, root: StreamKey) -> Result<Outcome> {
    let x0 = cfg.start_point()?;
    let horizon = cfg.t_grid[cfg.t_grid.len() - 1];
    let s = setup(cfg, root, horizon, x0.radius())?;
    let q = q_marginal(&x0, &s.config, &s.spec, cfg.q_time, &cfg.t_grid, cfg.h, cfg.n, cfg.bins, root.derive(streams::Q))?;
    let mut out = Outcome::default();
    record_setup(&mut out, &s, cfg);
    let mut hist = Table::new("q_histograms", &["horizon", "bin", "lo", "hi", "mass"]);
    let mut summary = Table::new(
        "q_summary",
        &["horizon", "ess", "mean_radius", "mean_radius_stderr", "mean_shift", "mean_shift_stderr", "sup_distance", "noise_floor"],
    );
    for (k, h) in q.histograms.iter().enumerate() {
        for (b, m) in h.mass.iter().enumerate() {
            hist.push([h.horizon, b as f64, h.edges[b], h.edges[b + 1], *m]);
        }
        let shift = q.mean_shift(k);
        let (sup, floor) = if k == 0 { (f64::NAN, f64::NAN) } else { (q.sup_distances[k - 1], q.noise_floor[k - 1]) };
        summary.push([h.horizon, h.ess, h.mean_radius.mean, h.mean_radius.stderr, shift.mean, shift.stderr, sup, floor]);
    }
    let mut cols = vec!["index".to_string(), "radius".to_string()];
    cols.extend(q.horizons.iter().map(|t| format!("log_weight_t{t}")));
    let mut samples = Table::with_columns("q_samples", cols);
    for (i, r) in q.radii.iter().enumerate().take(cfg.max_rows) {
        let mut row = vec![i as f64, *r];
        row.extend(q.log_weights.iter().map(|lw| lw[i]));
        samples.push(row);
    }
    out.tables.push(hist);
    out.tables.push(summary);
    out.tables.push(samples);
    out.result("t", q.t);
    out.result("sup_distances", &q.sup_distances);
    out.result("noise_floor", &q.noise_floor);
    Ok(out)
}

fn require_single_trap(cfg: &ExperimentConfig, what: &str) -> Result<()> {
    if !cfg.single_trap_at_origin() {
        bail!("{what} needs the planted mode with a single trap at the origin");
    }
    Ok(())
}

fn oracle_operator(cfg: &ExperimentConfig) -> Result<RadialOperator> {
    let spec = cfg.potential()?;
    Ok(RadialOperator::build(cfg.d, cfg.r_max, cfg.cells, cfg.outer_boundary()?, |r| spec.single_trap(r))?)
}

fn radial_oracle(cfg: &ExperimentConfig) -> Result<(Outcome, RadialSpectrum)> {
    let op = oracle_operator(cfg)?;
    let ground = solve_ground_state(&op)?;
    let mut out = Outcome::default();
    let mut buf = Vec::new();
    write_eigenpair_csv(&ground, &mut buf)?;
    out.files.push(RawFile { name: "eigenpair.csv".into(), contents: String::from_utf8(buf)? });
    let mut table = Table::new("oracle_ratio", &["radius", "ratio"]);
    for &r in &cfg.probes {
        table.push([r, ground.ratio(r)?]);
    }
    out.tables.push(table);
    out.result("rho", ground.rho);
    out.result("lambda1", ground.lambda1);
    out.result("gap", ground.gap);
    out.result("residual", ground.residual);
    out.result("degenerate", ground.degenerate);
    out.result("boundary", ground.boundary.to_string());
    out.result("regime", cfg.regime());
    Ok((out, ground))
}

fn doob_outcome(cfg: &ExperimentConfig, s: &Setup, ground: &RadialSpectrum, root: StreamKey) -> Result<Outcome> {
    let o = HPoint::origin(cfg.d)?;
    let drift = DoobDrift::from_spectrum(ground)?;
    let doob = doob_endpoint_radii(&o, &drift, cfg.q_time, cfg.h, cfg.n, root.derive(streams::DOOB))?;
    let q = q_marginal(&o, &s.config, &s.spec, cfg.q_time, &[cfg.t], cfg.h, cfg.n, cfg.bins, root.derive(streams::Q))?;
    let w = q.weights(0);
    let ks = ks_two_sample(&q.radii, Some(&w), &doob, None)?;
    let mut out = Outcome::default();
    let mut dt = Table::new("doob_radii", &["index", "radius"]);
    for (i, r) in doob.iter().enumerate().take(cfg.max_rows) {
        dt.push([i as f64, *r]);
    }
    let mut qt = Table::new("q_weighted", &["index", "radius", "weight"]);
    for (i, (r, wi)) in q.radii.iter().zip(&w).enumerate().take(cfg.max_rows) {
        qt.push([i as f64, *r, *wi]);
    }
    out.tables.push(dt);
    out.tables.push(qt);
    out.result("ks", ks);
    out.result("q_ess", q.histograms[0].ess);
    out.result("q_mean_radius", q.histograms[0].mean_radius);
    out.result("doob_mean_radius", MeanEstimate::from_samples(&doob));
    Ok(out)
}

fn doob_compare(cfg: &ExperimentConfig, root: StreamKey) -> Result<Outcome> {
    require_single_trap(cfg, "doob-compare")?;
    let s = setup(cfg, root, cfg.t, 0.0)?;
    let (oracle, ground) = radial_oracle(cfg)?;
    let mut out = doob_outcome(cfg, &s, &ground, root)?;
    record_setup(&mut out, &s, cfg);
    out.files.extend(oracle.files);
    out.result("oracle", oracle.results);
    Ok(out)
}

fn born_check(cfg: &ExperimentConfig) -> Result<Outcome> {
    let op = oracle_operator(cfg)?.scaled_potential(cfg.born_scale);
    let [re, im] = cfg.born_z.unwrap_or([0.0, cfg.default_contour_radius()]);
    let z = Complex64::new(re, im);
    let w = vec![Complex64::new(1.0, 0.0); op.cells()];
    let mut out = Outcome::default();
    out.result("z", [re, im]);
    out.result("scale", cfg.born_scale);
    match born_resolvent_apply(&op, z, &w, cfg.k_max) {
        Ok(born) => {
            let direct = direct_resolvent_apply(&op, z, &w)?;
            let diff: f64 = op.weights().iter().zip(born.u.iter().zip(&direct)).map(|(wt, (a, b))| wt * (a - b).norm_sqr()).sum();
            let norm: f64 = op.weights().iter().zip(&direct).map(|(wt, b)| wt * b.norm_sqr()).sum();
            let mut table = Table::new("born_terms", &["k", "term_norm"]);
            for (k, n) in born.term_norms.iter().enumerate() {
                table.push([k as f64, *n]);
            }
            out.tables.push(table);
            out.result("status", "converged");
            out.result("relative_error", (diff / norm).sqrt());
            out.result("born", &born);
        }
        Err(Error::BornDivergence { terms, ratio }) => {
            out.result("status", "diverged");
            out.result("terms", terms);
            out.result("ratio", ratio);
        }
        Err(e) => return Err(e.into()),
    }
    Ok(out)
}

fn contour_check(cfg: &ExperimentConfig) -> Result<Outcome> {
    let op = oracle_operator(cfg)?;
    let ground = solve_ground_state(&op)?;
    let radius = cfg.contour_radius.unwrap_or(cfg.default_contour_radius());
    let res = contour_projector(&op, cfg.contour_center, radius, cfg.contour_nodes)?;
    let again = apply_projector(&op, cfg.contour_center, radius, cfg.contour_nodes, &res.projected)?;
    let mut table = Table::new("contour", &["r", "projected", "phi", "abs_diff"]);
    let mut max_diff: f64 = 0.0;
    let mut diff = Vec::with_capacity(op.cells());
    for ((r, p), f) in ground.r.iter().zip(&res.projected).zip(&ground.phi) {
        max_diff = max_diff.max((p - f).abs());
        diff.push(p - f);
        table.push([*r, *p, *f, (p - f).abs()]);
    }
    let idem: Vec<f64> = again.iter().zip(&res.projected).map(|(a, b)| a - b).collect();
    let mut out = Outcome::default();
    out.tables.push(table);
    out.result("center", cfg.contour_center);
    out.result("radius", radius);
    out.result("nodes", cfg.contour_nodes);
    out.result("max_abs_diff", max_diff);
    out.result("weighted_diff", op.norm(&diff));
    out.result("idempotence_defect", op.norm(&idem));
    out.result("rayleigh", res.rayleigh);
    out.result("rho", ground.rho);
    out.result("rayleigh_error", (res.rayleigh - ground.rho).abs());
    Ok(out)
}

fn fock_check(cfg: &ExperimentConfig, root: StreamKey) -> Result<Outcome> {
    let mut table =
        Table::new("fock", &["functional", "v", "lhs", "lhs_stderr", "rhs", "rel_error", "n_max", "tail_bound"]);
    let key = root.derive(streams::FOCK);
    let mut worst: f64 = 0.0;
    let mut idx = 0u64;
    for name in &cfg.functionals {
        let f: Functional = name.parse()?;
        for &v in &cfg.fock_v {
            let region = Region::with_mean_count(cfg.d, cfg.fock_radius, v)?;
            let rep = isometry_check(f, &region, cfg.n_max, cfg.fock_samples, key.derive(idx))?;
            idx += 1;
            worst = worst.max(rep.rel_error);
            table.push([
                rep.functional.clone(),
                fmt_f64(rep.v),
                fmt_f64(rep.lhs),
                fmt_f64(rep.lhs_stderr),
                fmt_f64(rep.rhs),
                fmt_f64(rep.rel_error),
                rep.n_max.to_string(),
                fmt_f64(rep.tail_bound),
            ]);
        }
    }
    let mut out = Outcome::default();
    out.tables.push(table);
    out.result("max_rel_error", worst);
    Ok(out)
}

/// Cross-check rows of `checks.csv`.
#[derive(Default)]
struct Checks {
    table: Vec<[String; 5]>,
    failed: Vec<String>,
}

impl Checks {
    fn within(&mut self, name: &str, value: f64, reference: f64, tol: f64) {
        let passed = (value - reference).abs() <= tol;
        self.record(name, value, fmt_f64(reference), fmt_f64(tol), passed);
    }

    fn record(&mut self, name: &str, value: f64, reference: String, tol: String, passed: bool) {
        if !passed {
            self.failed.push(format!("{name}: {value} against {reference} (tolerance {tol})"));
        }
        self.table.push([name.to_string(), fmt_f64(value), reference, tol, passed.to_string()]);
    }
}

fn full_pipeline(cfg: &ExperimentConfig, root: StreamKey) -> Result<Outcome> {
    require_single_trap(cfg, "full-pipeline")?;
    let horizon = cfg.t.max(cfg.t_grid[cfg.t_grid.len() - 1]);
    let reach = cfg.probes.iter().copied().fold(0.0, f64::max);
    let s = setup(cfg, root, horizon, reach)?;
    let o = HPoint::origin(cfg.d)?;
    let mut out = Outcome::default();
    record_setup(&mut out, &s, cfg);
    let mut checks = Checks::default();

    let (oracle, ground) = radial_oracle(cfg)?;
    out.merge("oracle", oracle);

    let (rho, rho_hat, rho_se) = rho_outcome(cfg, &s, &o, root)?;
    out.merge("rho", rho);
    checks.within("rho_vs_oracle", rho_hat, ground.rho, 3.0 * rho_se);
    let (lo, hi) = ((-cfg.offset).min(0.0), cfg.v_max - cfg.offset);
    let inside = rho_hat >= lo - 3.0 * rho_se && rho_hat <= hi + 3.0 * rho_se;
    checks.record("rho_bounds", rho_hat, format!("[{lo}; {hi}]"), fmt_f64(3.0 * rho_se), inside);

    let phi = phi_outcome(cfg, &s, root, Some(&ground))?;
    let ratios: Vec<(f64, f64)> = phi.results["ratios"]
        .as_array()
        .map(|a| a.iter().map(|p| (p["ratio"].as_f64().unwrap_or(f64::NAN), p["stderr"].as_f64().unwrap_or(f64::NAN))).collect())
        .unwrap_or_default();
    out.merge("phi", phi);
    for (&r, (val, se)) in cfg.probes.iter().zip(ratios) {
        checks.within(&format!("phi_ratio_r{r}"), val, ground.ratio(r)?, 3.0 * se);
    }

    let doob = doob_outcome(cfg, &s, &ground, root)?;
    let p = doob.results["ks"]["p_value"].as_f64().unwrap_or(f64::NAN);
    out.merge("doob", doob);
    checks.record("q_marginal_vs_doob_ks_p", p, "0.01".into(), "p > 0.01".into(), p > 0.01);

    let born = born_check(cfg)?;
    let born_err = born.results.get("relative_error").and_then(|v| v.as_f64()).unwrap_or(f64::INFINITY);
    out.merge("born", born);
    checks.within("born_vs_direct", born_err, 0.0, 1e-8);

    let contour = contour_check(cfg)?;
    let cd = contour.results["weighted_diff"].as_f64().unwrap_or(f64::INFINITY);
    let ce = contour.results["rayleigh_error"].as_f64().unwrap_or(f64::INFINITY);
    out.merge("contour", contour);
    checks.within("contour_vs_phi", cd, 0.0, 1e-8);
    checks.within("contour_rayleigh", ce, 0.0, 1e-10);

    let mut table = Table::new("checks", &["check", "value", "reference", "tolerance", "passed"]);
    for row in checks.table {
        table.push(row);
    }
    out.tables.push(table);
    out.failed_checks.extend(checks.failed);
    Ok(out)
}
