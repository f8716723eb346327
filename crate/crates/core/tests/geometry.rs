use hypertrap::geom::{
    apply_isometry, boost_to_origin, distance, exp_map, orthonormal_tangent_frame, HPoint, Isometry, TangentVector,
};
use proptest::prelude::*;

fn point(d: usize) -> impl Strategy<Value = HPoint> {
    prop::collection::vec(-3.0f64..3.0, d).prop_map(|x| HPoint::from_spatial(&x).unwrap())
}

fn isometry(d: usize) -> impl Strategy<Value = Isometry> {
    (1..=d, -2.0f64..2.0, 1..=d, 1..=d, -3.2f64..3.2).prop_map(move |(axis, s, i, j, th)| {
        let b = Isometry::boost(d, axis, s).unwrap();
        if i == j {
            return b;
        }
        b.compose(&Isometry::rotation(d, i, j, th).unwrap()).unwrap()
    })
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn distance_is_a_metric(x in point(3), y in point(3), z in point(3)) {
        let dxy = distance(&x, &y).unwrap();
        prop_assert!(close(dxy, distance(&y, &x).unwrap(), 1e-12));
        prop_assert!(distance(&x, &x).unwrap() < 1e-6);
        prop_assert!(dxy <= distance(&x, &z).unwrap() + distance(&z, &y).unwrap() + 1e-9);
    }

    #[test]
    fn isometries_preserve_distance(x in point(2), y in point(2), g in isometry(2)) {
        prop_assert!(g.group_defect() < 1e-9 * g.matrix().amax().powi(2));
        let gx = apply_isometry(&g, &x).unwrap();
        let gy = apply_isometry(&g, &y).unwrap();
        prop_assert!(close(distance(&gx, &gy).unwrap(), distance(&x, &y).unwrap(), 1e-8));
        prop_assert!(gx.sheet_defect() < 1e-9);
    }

    #[test]
    fn isometries_in_four_dimensions(x in point(4), y in point(4), g in isometry(4)) {
        let gx = apply_isometry(&g, &x).unwrap();
        let gy = apply_isometry(&g, &y).unwrap();
        prop_assert!(close(distance(&gx, &gy).unwrap(), distance(&x, &y).unwrap(), 1e-8));
    }

    #[test]
    fn inverse_undoes(x in point(3), g in isometry(3)) {
        let back = apply_isometry(&g.inverse(), &apply_isometry(&g, &x).unwrap()).unwrap();
        prop_assert!(distance(&back, &x).unwrap() < 1e-6);
    }

    #[test]
    fn boost_sends_point_to_origin(x in point(3), y in point(3)) {
        let b = boost_to_origin(&x);
        let o = HPoint::origin(3).unwrap();
        prop_assert!(distance(&apply_isometry(&b, &x).unwrap(), &o).unwrap() < 1e-6);
        let by = apply_isometry(&b, &y).unwrap();
        prop_assert!(close(by.radius(), distance(&x, &y).unwrap(), 1e-8));
    }

    #[test]
    fn exp_travels_its_length(x in point(2), c in prop::collection::vec(-2.0f64..2.0, 2)) {
        let v = TangentVector::from_frame_coords(x, &c).unwrap();
        let len = (c[0] * c[0] + c[1] * c[1]).sqrt();
        prop_assert!(close(v.norm(), len, 1e-9));
        let y = exp_map(&v).unwrap();
        prop_assert!(close(distance(&x, &y).unwrap(), len, 1e-7));
        prop_assert!(y.sheet_defect() < 1e-9);
    }

    #[test]
    fn frame_is_orthonormal_and_pulls_back(x in point(3)) {
        let frame = orthonormal_tangent_frame(&x).unwrap();
        let b = boost_to_origin(&x);
        for (i, e) in frame.iter().enumerate() {
            for (j, f) in frame.iter().enumerate() {
                let g = hypertrap::geom::minkowski_dot(e.vector(), f.vector()).unwrap();
                let want = if i == j { 1.0 } else { 0.0 };
                prop_assert!((g - want).abs() < 1e-8 * x.z0().powi(2));
            }
            let pulled = b.matrix() * nalgebra::DVector::from_column_slice(e.vector());
            for k in 0..4 {
                let want = if k == i + 1 { 1.0 } else { 0.0 };
                prop_assert!((pulled[k] - want).abs() < 1e-8 * x.z0().powi(2));
            }
        }
    }
}

#[test]
fn points_off_the_sheet_are_rejected() {
    assert!(HPoint::from_coords(&[1.0, 0.5, 0.0]).is_err());
    assert!(HPoint::from_coords(&[-1.0, 0.0, 0.0]).is_err());
    assert!(HPoint::origin(0).is_err());
}

#[test]
fn points_in_different_dimensions_do_not_mix() {
    let a = HPoint::origin(2).unwrap();
    let b = HPoint::origin(3).unwrap();
    assert!(distance(&a, &b).is_err());
}
