use hvisc_core::ccmetric::{dcc_from_origin, GeodesicSolveConfig};
use hvisc_core::hgroup::{dist_left, dist_right};
use hvisc_core::Point;
use proptest::prelude::*;

fn point(r: f64) -> impl Strategy<Value = Point> {
    (-r..r, -r..r, -r..r).prop_map(|(x, y, z)| Point::new(x, y, z))
}

fn close(a: Point, b: Point, tol: f64) -> bool {
    (a.x - b.x).abs() <= tol && (a.y - b.y).abs() <= tol && (a.z - b.z).abs() <= tol
}

proptest! {
    #[test]
    fn group_axioms(p in point(5.0), q in point(5.0), r in point(5.0)) {
        prop_assert!(close((p * q) * r, p * (q * r), 1e-10));
        prop_assert!(close(p * p.inverse(), Point::ORIGIN, 1e-12));
        prop_assert!(close(p.inverse() * p, Point::ORIGIN, 1e-12));
        prop_assert_eq!(p * Point::ORIGIN, p);
        prop_assert!(close((p * q).inverse(), q.inverse() * p.inverse(), 1e-12));
    }

    #[test]
    fn gauge_metrics_are_invariant(p in point(3.0), q in point(3.0), g in point(3.0)) {
        let tol = 1e-9 * (1.0 + dist_left(p, q));
        prop_assert!((dist_left(g * p, g * q) - dist_left(p, q)).abs() <= tol);
        prop_assert!((dist_right(p * g, q * g) - dist_right(p, q)).abs() <= tol.max(1e-9 * (1.0 + dist_right(p, q))));
        prop_assert!((dist_left(p, q) - dist_left(q, p)).abs() <= tol);
        prop_assert!((dist_left(p, q) - dist_right(p.inverse(), q.inverse())).abs() <= tol);
    }

    #[test]
    fn gauge_triangle_inequality(p in point(3.0), q in point(3.0), r in point(3.0)) {
        let slack = 1e-9 * (1.0 + dist_left(p, q) + dist_left(q, r));
        prop_assert!(dist_left(p, r) <= dist_left(p, q) + dist_left(q, r) + slack);
        prop_assert!(dist_right(p, r) <= dist_right(p, q) + dist_right(q, r) + slack);
    }

    #[test]
    fn gauge_and_cc_are_homogeneous(p in point(2.0), lam in 0.05f64..5.0) {
        let d = p.dilate(lam);
        prop_assert!((d.gauge() - lam * p.gauge()).abs() <= 1e-10 * (1.0 + lam * p.gauge()));
        let cfg = GeodesicSolveConfig::default();
        let (a, b) = (dcc_from_origin(d, &cfg).unwrap(), dcc_from_origin(p, &cfg).unwrap());
        prop_assert!((a - lam * b).abs() <= 1e-8 * (1.0 + a));
    }

    #[test]
    fn cc_distance_dominates_planar_and_matches_on_it(p in point(2.0)) {
        let cfg = GeodesicSolveConfig::default();
        let planar = p.x.hypot(p.y);
        let d = dcc_from_origin(p, &cfg).unwrap();
        prop_assert!(d >= planar - 1e-12);
        let flat = dcc_from_origin(Point::new(p.x, p.y, 0.0), &cfg).unwrap();
        prop_assert!((flat - planar).abs() <= 1e-12 * (1.0 + planar));
    }

    #[test]
    fn holder_bridge_near_the_diagonal(p in point(1.0), h in point(0.7)) {
        let rho = 2.0f64;
        let q = h * p;
        prop_assume!(p.gauge() <= rho && q.gauge() <= rho);
        let dr = dist_right(p, q);
        prop_assume!(dr <= 1.0);
        let c = (1.0 + 16.0 * (0.25 + rho).powi(2)).powf(0.25);
        prop_assert!(dist_left(p, q) <= c * dr.sqrt() * (1.0 + 1e-12));
    }
}
