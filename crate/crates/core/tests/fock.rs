use hypertrap::fock::{chaos_kernels, isometry_check, Functional, Region};
use hypertrap::StreamKey;

fn second_moment(f: Functional, v: f64) -> f64 {
    match f {
        Functional::Count => v + v * v,
        Functional::CenteredCount => v,
        Functional::Void => (-v).exp(),
        Functional::ExpCount => (v * ((-2f64).exp() - 1.0)).exp(),
        Functional::Constant { c } => c * c,
    }
}

const ALL: [Functional; 5] =
    [Functional::Count, Functional::CenteredCount, Functional::Void, Functional::ExpCount, Functional::Constant { c: 2.5 }];

#[test]
fn kernel_norms_sum_to_the_second_moment() {
    for f in ALL {
        for v in [0.5, 1.0, 2.0, 4.0] {
            let region = Region::with_mean_count(2, 1.0, v).unwrap();
            let k = chaos_kernels(f, &region, 40, 100, StreamKey::new(1)).unwrap();
            let exact = second_moment(f, v);
            assert!((k.norm_sum() - exact).abs() < 1e-12 * exact, "{f} v={v}: {} vs {exact}", k.norm_sum());
            assert!(k.tail_bound < 1e-12 * exact);
        }
    }
}

#[test]
fn monte_carlo_isometry() {
    for f in ALL {
        for v in [0.5, 1.0, 2.0] {
            let region = Region::with_mean_count(3, 0.8, v).unwrap();
            let rep = isometry_check(f, &region, 20, 100_000, StreamKey::new(2)).unwrap();
            assert!(rep.rel_error < 0.02, "{rep:?}");
            assert!((rep.v - v).abs() < 1e-12);
        }
    }
}

#[test]
fn low_order_kernels_confirmed_by_sampling() {
    let region = Region::with_mean_count(2, 1.5, 1.3).unwrap();
    for f in ALL {
        let k = chaos_kernels(f, &region, 6, 50_000, StreamKey::new(3)).unwrap();
        assert_eq!(k.checks.len(), 4);
        assert!(k.checks.iter().all(|c| c.passed), "{f}: {:?}", k.checks);
    }
}

#[test]
fn centered_functionals_have_no_constant_term() {
    let region = Region::with_mean_count(2, 1.0, 1.7).unwrap();
    let k = chaos_kernels(Functional::CenteredCount, &region, 5, 10, StreamKey::new(4)).unwrap();
    assert_eq!(k.f0, 0.0);
    let k = chaos_kernels(Functional::Count, &region, 5, 10, StreamKey::new(4)).unwrap();
    assert!((k.f0 - 1.7).abs() < 1e-12);
    assert_eq!(&k.norms[2..], &[0.0; 4]);
}

#[test]
fn names_round_trip() {
    for f in ALL {
        assert_eq!(f.to_string().parse::<Functional>().unwrap(), f);
    }
    assert!("median".parse::<Functional>().is_err());
    assert!(Region::with_mean_count(2, 0.0, 1.0).is_err());
}
