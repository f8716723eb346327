use hypertrap::feynman_kac::{
    estimate_phi_ratio, estimate_rho, estimate_z, path_potential_integral, q_marginal, sample_ensemble, smc_estimate_z,
};
use hypertrap::geom::HPoint;
use hypertrap::ppp::{Configuration, PotentialSpec, Profile};
use hypertrap::spectral::{survival_profile, OuterBoundary, RadialOperator};
use hypertrap::StreamKey;

fn trap(d: usize) -> (PotentialSpec, Configuration) {
    let spec = PotentialSpec::new(Profile::Bump { amplitude: 0.1 }, 1.0, 0.1, 1.0).unwrap();
    let config = Configuration::planted(d, vec![HPoint::origin(d).unwrap()], 60.0).unwrap();
    (spec, config)
}

fn constant(d: usize, c: f64) -> (PotentialSpec, Configuration) {
    let spec = PotentialSpec::new(Profile::Bump { amplitude: 1e6 }, 50.0, c, 1.0).unwrap();
    let config = Configuration::planted(d, vec![HPoint::origin(d).unwrap()], 80.0).unwrap();
    (spec, config)
}

#[test]
fn survival_matches_heat_semigroup() {
    let (spec, config) = trap(2);
    let t = 20.0;
    let op = RadialOperator::build(2, 40.0, 8000, OuterBoundary::Reflecting, |r| spec.single_trap(r)).unwrap();
    let exact = survival_profile(&op, t, 2000).unwrap()[0];
    let o = HPoint::origin(2).unwrap();
    let z = estimate_z(&o, &config, &spec, t, 0.01, 10_000, StreamKey::new(1)).unwrap();
    assert!((z.z - exact).abs() < 3.0 * z.stderr);
}

#[test]
fn constant_potential_identities() {
    let c = 0.037;
    let (spec, config) = constant(3, c);
    let o = HPoint::origin(3).unwrap();
    let z = estimate_z(&o, &config, &spec, 4.0, 0.01, 100, StreamKey::new(2)).unwrap();
    assert!((z.z - (-c * 4.0f64).exp()).abs() < 1e-14);
    assert_eq!(z.stderr, 0.0);
    let smc = smc_estimate_z(&o, &config, &spec, 4.0, 0.01, 100, 0.5, StreamKey::new(2)).unwrap();
    assert!((smc.z - (-c * 4.0f64).exp()).abs() < 1e-13);
    let rho = estimate_rho(&o, &config, &spec, &[1.0, 2.0, 4.0], 0.01, 50, StreamKey::new(3)).unwrap();
    assert!((rho.rho_hat - c).abs() < 1e-12);
}

#[test]
fn deeper_traps_kill_more_on_every_path() {
    let (spec, config) = trap(2);
    let deeper = PotentialSpec { profile: Profile::Bump { amplitude: 0.2 }, v_max: 0.2, ..spec };
    let o = HPoint::origin(2).unwrap();
    let a = sample_ensemble(&o, &config, &spec, 3.0, 0.01, 500, StreamKey::new(4)).unwrap();
    let b = sample_ensemble(&o, &config, &deeper, 3.0, 0.01, 500, StreamKey::new(4)).unwrap();
    assert_eq!(a.endpoints, b.endpoints);
    for (x, y) in a.log_weights.iter().zip(&b.log_weights) {
        assert!(y <= x);
    }
}

#[test]
fn offset_shifts_rho_exactly() {
    let (spec, config) = trap(2);
    let o = HPoint::origin(2).unwrap();
    let grid = [2.0, 4.0, 6.0];
    let base = estimate_rho(&o, &config, &spec, &grid, 0.01, 300, StreamKey::new(5)).unwrap();
    let shifted = estimate_rho(&o, &config, &spec.with_offset(0.05), &grid, 0.01, 300, StreamKey::new(5)).unwrap();
    assert!((base.rho_hat - shifted.rho_hat - 0.05).abs() < 1e-12);
}

#[test]
fn smc_agrees_with_plain_monte_carlo() {
    let (spec, config) = trap(2);
    let o = HPoint::origin(2).unwrap();
    let plain = estimate_z(&o, &config, &spec, 5.0, 0.01, 4_000, StreamKey::new(6)).unwrap();
    let smc = smc_estimate_z(&o, &config, &spec, 5.0, 0.01, 4_000, 0.5, StreamKey::new(7)).unwrap();
    let pooled = (plain.stderr.powi(2) + smc.stderr.powi(2)).sqrt();
    assert!((plain.z - smc.z).abs() < 3.0 * pooled, "{plain:?} {smc:?}");
    assert!(smc.ess_trace.iter().all(|(_, e)| *e > 0.0 && *e <= 4_000.0 + 1e-9));
}

#[test]
fn trapezoid_rule_is_second_order_on_smooth_paths() {
    let (spec, config) = trap(2);
    // unit-speed geodesic along the first axis from r = -1.5 to r = 0.5
    let path = |h: f64| {
        let n = (2.0 / h).round() as usize;
        let times: Vec<f64> = (0..=n).map(|k| k as f64 * h).collect();
        let points = times.iter().map(|t| HPoint::from_spatial(&[(t - 1.5).sinh(), 0.0]).unwrap()).collect();
        hypertrap::diffusion::PathSample { times, points }
    };
    let exact = 0.095625;
    let e1 = (path_potential_integral(&path(0.01), &spec, &config).unwrap() - exact).abs();
    let e2 = (path_potential_integral(&path(0.005), &spec, &config).unwrap() - exact).abs();
    let order = (e1 / e2).log2();
    assert!(order > 1.8 && order < 2.2, "order {order}");
}

#[test]
fn rotated_probes_give_equal_ratios() {
    let (spec, config) = trap(2);
    let o = HPoint::origin(2).unwrap();
    let probes = [HPoint::on_axis(2, 1.0).unwrap(), HPoint::polar(2, 1.0, &[0.0, 1.0]).unwrap()];
    let r = estimate_phi_ratio(&probes, &o, &config, &spec, 4.0, 0.01, 4_000, StreamKey::new(8)).unwrap();
    let pooled = (r[0].stderr.powi(2) + r[1].stderr.powi(2)).sqrt();
    assert!((r[0].ratio - r[1].ratio).abs() < 3.0 * pooled);
    assert!(r[0].ratio > 1.0);
}

#[test]
fn constant_potential_q_marginal_is_free() {
    let (spec, config) = constant(2, 0.05);
    let o = HPoint::origin(2).unwrap();
    let q = q_marginal(&o, &config, &spec, 0.5, &[1.0, 2.0], 0.01, 10_000, 20, StreamKey::new(9)).unwrap();
    let free = hypertrap::feynman_kac::free_marginal_radii(&o, 0.5, 0.01, 10_000, StreamKey::new(10)).unwrap();
    let w = q.weights(1);
    assert!(w.iter().all(|x| (x - 1.0).abs() < 1e-12));
    let ks = hypertrap::stats::ks_two_sample(&q.radii, Some(&w), &free, None).unwrap();
    assert!(ks.p_value > 0.01);
}

#[test]
fn walks_leaving_the_window_fail_loudly() {
    let (spec, _) = trap(2);
    let config = Configuration::planted(2, vec![HPoint::origin(2).unwrap()], 2.0).unwrap();
    let o = HPoint::origin(2).unwrap();
    let err = estimate_z(&o, &config, &spec, 20.0, 0.01, 200, StreamKey::new(11)).unwrap_err();
    assert!(matches!(err, hypertrap::Error::WindowTooSmall { .. }), "{err}");
}

#[test]
fn worker_count_does_not_change_results() {
    let (spec, config) = trap(2);
    let o = HPoint::origin(2).unwrap();
    let run = || sample_ensemble(&o, &config, &spec, 1.0, 0.01, 256, StreamKey::new(12)).unwrap();
    let a = hypertrap::par::with_workers(Some(1), run);
    let b = hypertrap::par::with_workers(Some(3), run);
    assert_eq!(a, b);
    let s1 = hypertrap::par::with_workers(Some(1), || smc_estimate_z(&o, &config, &spec, 1.0, 0.01, 256, 0.1, StreamKey::new(12)).unwrap());
    let s2 = hypertrap::par::with_workers(Some(4), || smc_estimate_z(&o, &config, &spec, 1.0, 0.01, 256, 0.1, StreamKey::new(12)).unwrap());
    assert_eq!(s1, s2);
}

#[test]
fn annealed_survival_without_traps_is_one() {
    let (spec, _) = trap(2);
    let sampler = hypertrap::ppp::PppSampler::new(2, 20.0, 0.0).unwrap();
    let z = hypertrap::feynman_kac::estimate_z_annealed(&HPoint::origin(2).unwrap(), &sampler, &spec, 1.0, 0.01, 10, 4, StreamKey::new(1)).unwrap();
    assert_eq!(z.mean, 1.0);
}
