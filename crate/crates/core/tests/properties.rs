use grushin_core::curves::{CurveRecord, CurveSpec};
use grushin_core::geometry::{canonical_phi, canonical_phi_inverse, dilate, grushin_area, grushin_length};
use grushin_core::modulus::{solve_modulus, CurveFamily, DensityGrid, ModulusOptions};
use grushin_core::qc::{MapKind, MapSpec};
use grushin_core::{grushin_distance, Alpha, DistanceOptions, Metric, Point, Polyline, Rect};
use proptest::prelude::*;

fn alpha() -> impl Strategy<Value = Alpha> {
    prop_oneof![Just(0.5), Just(1.0), Just(2.0), 0.1f64..3.0].prop_map(|a| Alpha::new(a).unwrap())
}

fn point(r: f64) -> impl Strategy<Value = Point> {
    (-r..r, -r..r).prop_map(|(x, y)| Point::new(x, y))
}

fn off_axis_polyline() -> impl Strategy<Value = Vec<Point>> {
    // Stays in x > 0.1 so the length is finite for every alpha.
    prop::collection::vec((0.1f64..3.0, -3.0f64..3.0), 2..7)
        .prop_map(|v| v.into_iter().map(|(x, y)| Point::new(x, y)).collect())
}

fn gconf() -> impl Strategy<Value = MapKind> {
    (0.1f64..10.0, -5.0f64..5.0, any::<bool>()).prop_map(|(l, a, s)| MapKind::gconf(l, a, s).unwrap())
}

fn map_kind() -> impl Strategy<Value = MapKind> {
    let leaf = prop_oneof![
        Just(MapKind::CanonicalPhi),
        Just(MapKind::CanonicalPhiInverse),
        gconf(),
        prop::array::uniform6(-4.0f64..4.0)
            .prop_map(|m| MapKind::EuclideanAffine { m: [[m[0], m[1]], [m[2], m[3]]], b: [m[4], m[5]] }),
    ];
    prop::collection::vec(leaf, 1..5).prop_map(|mut maps| {
        if maps.len() == 1 {
            maps.pop().unwrap()
        } else {
            MapKind::Composition { maps }
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn distance_is_symmetric_and_dilation_equivariant(p in point(3.0), q in point(3.0), a in alpha(), lambda in 0.25f64..4.0) {
        prop_assume!(p.dist(q) > 1e-3);
        let opts = DistanceOptions::default();
        let d = grushin_distance(p, q, a, &opts).unwrap().distance;
        let back = grushin_distance(q, p, a, &opts).unwrap().distance;
        prop_assert!((d - back).abs() <= 1e-3 * d, "{d} vs {back}");
        let scaled = grushin_distance(dilate(p, lambda, a).unwrap(), dilate(q, lambda, a).unwrap(), a, &opts).unwrap().distance;
        prop_assert!((scaled - lambda * d).abs() <= 0.02 * lambda * d, "{scaled} vs {}", lambda * d);
    }

    #[test]
    fn distance_is_below_any_polyline_length(v in off_axis_polyline(), a in alpha()) {
        let Ok(c) = Polyline::from_vertices_dedup(v) else { return Ok(()) };
        let d = grushin_distance(c.first(), c.last(), a, &DistanceOptions::default()).unwrap().distance;
        prop_assert!(d <= grushin_length(&c, a).unwrap() * (1.0 + 1e-9));
    }
}

proptest! {
    #[test]
    fn phi_round_trip(p in point(100.0), a in alpha()) {
        let back = canonical_phi_inverse(canonical_phi(p, a), a);
        prop_assert!((back - p).norm() <= 1e-12 * p.norm().max(1.0));
    }

    #[test]
    fn length_ignores_parametrization(v in off_axis_polyline(), a in alpha(), s in 0.01f64..100.0, shift in -10.0f64..10.0) {
        let Ok(c) = Polyline::from_vertices_dedup(v) else { return Ok(()) };
        let params: Vec<f64> = c.params().iter().map(|t| shift + s * t * t).collect();
        let r = Polyline::new(c.vertices().to_vec(), params).unwrap();
        let (l0, l1) = (grushin_length(&c, a).unwrap(), grushin_length(&r, a).unwrap());
        prop_assert_eq!(l0, l1);
    }

    #[test]
    fn area_is_additive(x0 in -3.0f64..3.0, w in 0.01f64..3.0, cut in 0.01f64..0.99, y0 in -2.0f64..2.0, h in 0.1f64..2.0, a in 0.0f64..0.95) {
        let a = Alpha::new(a).unwrap();
        let xm = x0 + cut * w;
        let whole = grushin_area(&Rect::new(x0, x0 + w, y0, y0 + h).unwrap(), a);
        let left = grushin_area(&Rect::new(x0, xm, y0, y0 + h).unwrap(), a);
        let right = grushin_area(&Rect::new(xm, x0 + w, y0, y0 + h).unwrap(), a);
        prop_assert!((whole - left - right).abs() <= 1e-10 * whole);
    }

    #[test]
    fn map_spec_text_round_trip(kind in map_kind(), a in alpha()) {
        let m = MapSpec::new(a, kind).unwrap();
        let parsed = MapSpec::parse(&m.to_string(), a).unwrap();
        prop_assert_eq!(&parsed, &m);
        let json: MapSpec = serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
        prop_assert_eq!(json, m);
    }

    #[test]
    fn records_json_round_trip(v in off_axis_polyline(), shift in -1.0f64..1.0, a in alpha()) {
        let Ok(c) = Polyline::from_vertices_dedup(v) else { return Ok(()) };
        let back: Polyline = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        prop_assert_eq!(back, c);
        let rec = CurveRecord { label: "g".into(), spec: CurveSpec::NonrectifiableGrushin { a: shift, alpha: a } };
        let back: CurveRecord = serde_json::from_str(&serde_json::to_string(&rec).unwrap()).unwrap();
        prop_assert_eq!(back, rec);
    }
}

fn segments(ys: &[f64]) -> Vec<Polyline> {
    ys.iter().map(|&y| Polyline::from_vertices(vec![Point::new(0.1, y), Point::new(0.9, y + 0.05)]).unwrap()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 16, ..ProptestConfig::default() })]

    #[test]
    fn modulus_scales_with_weights_and_is_monotone(ys in prop::collection::vec(0.05f64..0.9, 2..6), c in 0.1f64..10.0) {
        let a = Alpha::new(1.0).unwrap();
        let grid = DensityGrid::euclidean(Rect::new(0.0, 1.0, 0.0, 1.0).unwrap(), 24, 24).unwrap();
        let opts = ModulusOptions::default();
        let full = CurveFamily::new("full", segments(&ys));
        let sub = CurveFamily::new("sub", segments(&ys[..ys.len() - 1]));
        let m = solve_modulus(&full, &grid, Metric::Euclidean, a, &opts).unwrap().value;
        let ms = solve_modulus(&sub, &grid, Metric::Euclidean, a, &opts).unwrap().value;
        prop_assert!(ms <= m * (1.0 + 1e-6), "subfamily {ms} > family {m}");
        let scaled = solve_modulus(&full, &grid.with_scaled_weights(c).unwrap(), Metric::Euclidean, a, &opts).unwrap().value;
        prop_assert!((scaled - c * m).abs() <= 1e-6 * c * m, "{scaled} vs {}", c * m);
    }
}
