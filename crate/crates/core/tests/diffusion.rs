use hypertrap::diffusion::{
    bm_step, endpoint_radii, endpoints, max_sheet_defect_along, oracle_endpoint_radii, refine_path, simulate_path,
    step_count, step_lengths,
};
use hypertrap::geom::{distance, HPoint};
use hypertrap::stats::{ks_two_sample, MeanEstimate};
use hypertrap::StreamKey;
use std::f64::consts::PI;

#[test]
fn one_step_mean_square_displacement() {
    for d in [2usize, 3] {
        let x = HPoint::from_spatial(&vec![0.7; d]).unwrap();
        let h = 0.01;
        let key = StreamKey::new(d as u64);
        let sq: Vec<f64> = (0..100_000)
            .map(|i| {
                let y = bm_step(&x, h, &mut key.rng(i)).unwrap();
                distance(&x, &y).unwrap().powi(2)
            })
            .collect();
        let m = MeanEstimate::from_samples(&sq);
        let want = d as f64 * h;
        assert!((m.mean - want).abs() < 3.0 * m.stderr, "d={d}: {m:?} vs {want}");
    }
}

#[test]
fn walk_radius_matches_radial_sde() {
    let (t, h, n) = (5.0, 1e-3, 10_000);
    let o = HPoint::origin(2).unwrap();
    let walk = endpoint_radii(&o, t, h, n, StreamKey::new(11)).unwrap();
    let sde = oracle_endpoint_radii(2, 0.0, t, h, n, StreamKey::new(12)).unwrap();
    let ks = ks_two_sample(&walk, None, &sde, None).unwrap();
    assert!(ks.p_value > 0.01, "{ks:?}");
}

#[test]
fn mean_radius_in_three_dimensions_is_t_plus_one() {
    // The radial density of Brownian motion on H^3 started at o is proportional
    // to r sinh(r) exp(-r^2 / 2t), whose mean is t + 1.
    let (t, h, n) = (10.0, 1e-3, 4_000);
    let r = endpoint_radii(&HPoint::origin(3).unwrap(), t, h, n, StreamKey::new(31)).unwrap();
    let m = MeanEstimate::from_samples(&r);
    assert!((m.mean - (t + 1.0)).abs() < 3.0 * m.stderr, "{m:?}");
    let sq: Vec<f64> = r.iter().map(|x| x * x).collect();
    let m2 = MeanEstimate::from_samples(&sq);
    assert!((m2.mean - (t * t + 3.0 * t)).abs() < 3.0 * m2.stderr, "{m2:?}");
}

#[test]
fn halving_the_step_leaves_the_marginal_unchanged() {
    let x0 = HPoint::on_axis(2, 1.0).unwrap();
    let a = endpoint_radii(&x0, 2.0, 0.02, 10_000, StreamKey::new(41)).unwrap();
    let b = endpoint_radii(&x0, 2.0, 0.01, 10_000, StreamKey::new(42)).unwrap();
    assert!(ks_two_sample(&a, None, &b, None).unwrap().p_value > 0.01);
}

#[test]
fn endpoints_are_rotationally_symmetric() {
    let pts = endpoints(&HPoint::origin(2).unwrap(), 1.0, 0.01, 8_000, StreamKey::new(5)).unwrap();
    let mut bins = [0u64; 8];
    for p in &pts {
        let s = p.spatial();
        let a = s[1].atan2(s[0]) + PI;
        bins[((a / (2.0 * PI) * 8.0) as usize).min(7)] += 1;
    }
    let e = pts.len() as f64 / 8.0;
    let stat: f64 = bins.iter().map(|b| (*b as f64 - e).powi(2) / e).sum();
    assert!(stat < 18.475, "{bins:?}");
}

#[test]
fn long_walks_stay_on_the_sheet() {
    let defect = max_sheet_defect_along(&HPoint::origin(3).unwrap(), 100.0, 1e-3, &mut StreamKey::new(6).rng(0)).unwrap();
    assert!(defect < 1e-9, "{defect}");
}

#[test]
fn step_lengths_are_chi_distributed() {
    let path = simulate_path(&HPoint::on_axis(3, 2.0).unwrap(), 20.0, 0.01, &mut StreamKey::new(8).rng(0)).unwrap();
    assert_eq!(path.steps(), 2000);
    let sq: Vec<f64> = step_lengths(&path).iter().map(|l| l * l / 0.01).collect();
    let m = MeanEstimate::from_samples(&sq);
    assert!((m.mean - 3.0).abs() < 3.0 * m.stderr);
}

#[test]
fn refinement_keeps_the_coarse_points() {
    let path = simulate_path(&HPoint::origin(2).unwrap(), 1.0, 0.05, &mut StreamKey::new(9).rng(0)).unwrap();
    let fine = refine_path(&path, &mut StreamKey::new(9).rng(1));
    assert_eq!(fine.steps(), 2 * path.steps());
    for k in 0..=path.steps() {
        assert_eq!(fine.points[2 * k], path.points[k]);
        assert!((fine.times[2 * k] - path.times[k]).abs() < 1e-15);
    }
    assert!(fine.max_sheet_defect() < 1e-12);
}

#[test]
fn step_validation() {
    assert!(step_count(1.0, 0.0).is_err());
    assert!(step_count(1.0, 0.2).is_err());
    assert!(step_count(1.0, 0.03).is_err());
    assert_eq!(step_count(1.0, 0.001).unwrap(), 1000);
    assert!(bm_step(&HPoint::origin(2).unwrap(), -1.0, &mut StreamKey::new(1).rng(0)).is_err());
}

#[test]
fn csv_has_documented_columns() {
    let path = simulate_path(&HPoint::origin(2).unwrap(), 0.1, 0.05, &mut StreamKey::new(1).rng(0)).unwrap();
    let mut buf = Vec::new();
    path.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "t,z_0,z_1,z_2,r");
    assert_eq!(lines.count(), 3);
}

#[test]
fn same_key_same_path() {
    let a = endpoints(&HPoint::origin(2).unwrap(), 0.5, 0.01, 64, StreamKey::new(77)).unwrap();
    let b = hypertrap::par::with_workers(Some(1), || endpoints(&HPoint::origin(2).unwrap(), 0.5, 0.01, 64, StreamKey::new(77)).unwrap());
    assert_eq!(a, b);
}
