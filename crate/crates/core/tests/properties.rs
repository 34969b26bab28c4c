use std::f64::consts::TAU;

use h1geom::bodies::{
    transform_body, Ball, Body, ConvexBody, Cuboid, Ellipsoid, Halfspace, Polytope,
};
use h1geom::estimators::line_window;
use h1geom::geometry::{
    contact_form_at, frame_from_line, line_from_frame, HorizontalLine, Point, PshMotion,
};
use h1geom::measures;
use nalgebra::Vector3;
use proptest::prelude::*;

fn motion() -> impl Strategy<Value = PshMotion> {
    (-3.0..3.0f64, -3.0..3.0f64, -3.0..3.0f64, 0.0..TAU)
        .prop_map(|(a, b, c, alpha)| PshMotion::new(a, b, c, alpha))
}

fn point() -> impl Strategy<Value = Point> {
    (-3.0..3.0f64, -3.0..3.0f64, -3.0..3.0f64).prop_map(|(x, y, t)| Point::new(x, y, t))
}

fn line() -> impl Strategy<Value = HorizontalLine> {
    (-2.0..2.0f64, 0.0..TAU, -3.0..3.0f64).prop_map(|(p, th, t)| HorizontalLine::new(p, th, t))
}

fn body() -> impl Strategy<Value = Body> {
    prop_oneof![
        (point(), 0.2..2.0f64).prop_map(|(c, r)| Ball::new(c, r).unwrap().into()),
        (point(), 0.2..2.0f64, 0.2..2.0f64, 0.2..2.0f64).prop_map(|(c, a, b, z)| Ellipsoid::new(
            c,
            Vector3::new(a, b, z)
        )
        .unwrap()
        .into()),
        (point(), 0.2..2.0f64, 0.2..2.0f64, 0.2..2.0f64).prop_map(|(c, a, b, z)| {
            let lo = c.to_vector();
            Cuboid::new(lo, lo + Vector3::new(a, b, z)).unwrap().into()
        }),
        prop::collection::vec(-0.25..0.25f64, 24).prop_map(|jitter| {
            let mut hs = Vec::new();
            for (k, s) in [
                (1.0, 1.0, 1.0),
                (1.0, 1.0, -1.0),
                (1.0, -1.0, 1.0),
                (1.0, -1.0, -1.0),
            ]
            .into_iter()
            .flat_map(|(a, b, c)| [(a, b, c), (-a, -b, -c)])
            .enumerate()
            {
                let n = Vector3::new(
                    s.0 + jitter[3 * k],
                    s.1 + jitter[3 * k + 1],
                    s.2 + jitter[3 * k + 2],
                );
                hs.push(Halfspace::new(n, 1.0).unwrap());
            }
            Polytope::from_halfspaces(hs).unwrap().into()
        }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn action_is_a_group_action(g in motion(), h in motion(), x in point()) {
        let a = g.compose(&h).apply_point(x);
        let b = g.apply_point(h.apply_point(x));
        prop_assert!(a.euclidean_distance(&b) < 1e-10);
        prop_assert!(g.inverse().apply_point(g.apply_point(x)).euclidean_distance(&x) < 1e-10);
        prop_assert!(g.inverse().inverse().approx_eq(&g, 1e-12));
    }

    #[test]
    fn motions_preserve_the_contact_form(g in motion(), x in point(), v in point()) {
        let v = v.to_vector();
        let (lin, _) = g.affine();
        prop_assert!((lin.determinant() - 1.0).abs() < 1e-12);
        let before = contact_form_at(x, v);
        let after = contact_form_at(g.apply_point(x), lin * v);
        prop_assert!((before - after).abs() < 1e-10 * (1.0 + v.norm()));
    }

    #[test]
    fn lines_map_to_lines(g in motion(), l in line(), s in -3.0..3.0f64) {
        let image = g.apply_line(&l);
        let moved = g.apply_point(l.point_at(s));
        let s2 = image.parameter_of(moved);
        prop_assert!(image.point_at(s2).euclidean_distance(&moved) < 1e-10);
        prop_assert!(contact_form_at(moved, image.direction()).abs() < 1e-10);
        // Motions are Levi isometries: parameters advance at the same rate.
        let ds = image.parameter_of(g.apply_point(l.point_at(s + 1.0))) - s2;
        prop_assert!((ds - 1.0).abs() < 1e-10);
    }

    #[test]
    fn reversed_lines_share_points(l in line(), s in -3.0..3.0f64) {
        let r = l.reversed();
        prop_assert!(r.same_point_set(&l, 1e-10));
        prop_assert!(r.point_at(-s).euclidean_distance(&l.point_at(s)) < 1e-10);
    }

    #[test]
    fn frames_round_trip(l in line(), h in -3.0..3.0f64) {
        let f = frame_from_line(&l, h);
        let (back, hb) = line_from_frame(&f);
        prop_assert!(back.same_point_set(&l, 1e-10));
        prop_assert!((hb - h).abs() < 1e-10);
        prop_assert!((back.p - l.p).abs() < 1e-10);
    }

    #[test]
    fn chords_are_equivariant(b in body(), g in motion(), l in line()) {
        let moved = transform_body(&g, &b).unwrap();
        let c0 = b.chord(&l);
        let c1 = moved.chord(&g.apply_line(&l));
        let scale = b.scale();
        // Near-tangent lines may flip between empty and a point.
        prop_assert!((c0.sigma() - c1.sigma()).abs() < 1e-6 * scale);
    }

    #[test]
    fn reversed_chord_has_same_length(b in body(), l in line()) {
        prop_assert!((b.chord(&l).sigma() - b.chord(&l.reversed()).sigma()).abs() < 1e-9);
    }

    #[test]
    fn chord_endpoints_straddle_the_boundary(b in body(), l in line()) {
        if let Some((lo, hi)) = b.chord(&l).bounds() {
            let eps = 1e-7 * b.scale();
            prop_assert!(b.contains(l.point_at(0.5 * (lo + hi))));
            prop_assert!(!b.contains(l.point_at(lo - eps)));
            prop_assert!(!b.contains(l.point_at(hi + eps)));
        }
    }

    #[test]
    fn every_hitting_line_is_in_the_window(b in body(), l in line(), u in prop::array::uniform4(0.0..1.0f64)) {
        let w = line_window(&b).unwrap();
        if !b.chord(&l).is_empty() {
            prop_assert!(w.contains(&l));
        }
        prop_assert!(w.contains(&w.line_at(u)));
    }

    #[test]
    fn volume_is_invariant(b in body(), g in motion()) {
        let moved = transform_body(&g, &b).unwrap();
        let (v0, v1) = (measures::volume(&b).value, measures::volume(&moved).value);
        prop_assert!((v0 - v1).abs() < 1e-9 * v0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn p_area_is_invariant(b in body(), g in motion()) {
        let moved = transform_body(&g, &b).unwrap();
        let a0 = measures::p_area(&b).unwrap().value;
        let a1 = measures::p_area(&moved).unwrap().value;
        prop_assert!((a0 - a1).abs() < 1e-4 * a0, "{a0} vs {a1}");
    }
}
