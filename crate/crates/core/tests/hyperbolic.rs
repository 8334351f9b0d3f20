use proptest::prelude::*;
use surfdom::hyperbolic::{angle_at_vertex, busemann, dist, horoflow, BoundaryPoint, MoebiusMap, Point};

fn point() -> impl Strategy<Value = Point> {
    (-3.0..3.0f64, -2.0..2.0f64).prop_map(|(x, t)| Point { x, y: t.exp() })
}

fn isometry() -> impl Strategy<Value = MoebiusMap> {
    (point(), 0.0..6.3f64, 0.0..3.0f64).prop_map(|(p, th, l)| MoebiusMap::moving_i_to(p) * MoebiusMap::rotation(th) * MoebiusMap::diagonal(l))
}

fn boundary() -> impl Strategy<Value = BoundaryPoint> {
    prop_oneof![Just(BoundaryPoint::Infinity), (-5.0..5.0f64).prop_map(BoundaryPoint::Finite)]
}

proptest! {
    #[test]
    fn distance_is_invariant(p in point(), q in point(), g in isometry()) {
        let d = dist(p, q);
        prop_assert!((dist(g.apply(p), g.apply(q)) - d).abs() < 1e-8 * (1.0 + d));
        prop_assert!((dist(q, p) - d).abs() < 1e-12 * (1.0 + d));
    }

    #[test]
    fn busemann_cocycle(p in boundary(), a in point(), b in point(), c in point()) {
        let err = busemann(p, a, c) - busemann(p, a, b) - busemann(p, b, c);
        prop_assert!(err.abs() < 1e-9);
    }

    #[test]
    fn busemann_is_equivariant(p in boundary(), a in point(), b in point(), g in isometry()) {
        let moved = busemann(g.apply_boundary(p), g.apply(a), g.apply(b));
        prop_assert!((moved - busemann(p, a, b)).abs() < 1e-7);
    }

    #[test]
    fn horoflow_does_not_expand(p in boundary(), a in point(), b in point(), t in 0.0..5.0f64) {
        let d = dist(a, b);
        prop_assert!(dist(horoflow(p, t, a), horoflow(p, t, b)) <= d + 1e-9 * (1.0 + d));
    }

    #[test]
    fn angles_are_invariant(x in point(), y in point(), z in point(), g in isometry()) {
        prop_assume!(dist(x, y) > 1e-3 && dist(x, z) > 1e-3);
        let a = angle_at_vertex(y, x, z).unwrap();
        let b = angle_at_vertex(g.apply(y), g.apply(x), g.apply(z)).unwrap();
        prop_assert!((a - b).abs() < 1e-7);
    }

    #[test]
    fn conjugation_keeps_translation_length(l in 0.01..8.0f64, g in isometry()) {
        let h = g * MoebiusMap::diagonal(l) * g.inverse();
        prop_assert!((h.translation_length() - l).abs() < 1e-7 * (1.0 + l));
    }
}
