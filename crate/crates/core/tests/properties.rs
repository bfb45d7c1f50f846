use approx::assert_abs_diff_eq;
use proptest::prelude::*;

use pdembed::bounded::BoundedEmbeddingSpec;
use pdembed::io;
use pdembed::verify::multiset_gap;
use pdembed::{
    bottleneck_bruteforce, bottleneck_distance, injective_embed, phi3, phi_scale, reconstruct, AnchorSet, DiagramPoint,
    PersistenceDiagram,
};

const FRAME: f64 = 10.0;

fn point() -> impl Strategy<Value = DiagramPoint<f64>> {
    prop_oneof![
        1 => Just(DiagramPoint::Diagonal),
        4 => (0.0..FRAME, 0.0..FRAME)
            .prop_filter("off-diagonal", |(u, v)| u != v)
            .prop_map(|(u, v)| DiagramPoint::new(u.min(v), u.max(v)).unwrap()),
    ]
}

fn diagram(n: usize) -> impl Strategy<Value = PersistenceDiagram<f64>> {
    prop::collection::vec(point(), n).prop_map(|ps| PersistenceDiagram::new(ps).unwrap())
}

fn triple(max_n: usize) -> impl Strategy<Value = (PersistenceDiagram<f64>, PersistenceDiagram<f64>, PersistenceDiagram<f64>)> {
    (1..=max_n).prop_flat_map(|n| (diagram(n), diagram(n), diagram(n)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn bottleneck_is_a_metric((x, y, z) in triple(4)) {
        let dxy = bottleneck_distance(&x, &y).unwrap();
        prop_assert_eq!(dxy, bottleneck_distance(&y, &x).unwrap());
        prop_assert_eq!(bottleneck_distance(&x, &x).unwrap(), 0.0);
        prop_assert!(dxy >= 0.0);
        if x != y {
            prop_assert!(dxy > 0.0);
        }
        let dxz = bottleneck_distance(&x, &z).unwrap();
        let dzy = bottleneck_distance(&z, &y).unwrap();
        prop_assert!(dxy <= dxz + dzy + 1e-12);
    }

    #[test]
    fn matching_agrees_with_permutations((x, y, _) in triple(5)) {
        prop_assert_eq!(bottleneck_distance(&x, &y).unwrap(), bottleneck_bruteforce(&x, &y).unwrap());
    }

    #[test]
    fn point_order_is_irrelevant(points in prop::collection::vec(point(), 1..5), seed in any::<u64>()) {
        let mut shuffled = points.clone();
        let len = shuffled.len();
        shuffled.rotate_left((seed % len as u64) as usize);
        shuffled.reverse();
        let a = PersistenceDiagram::new(points).unwrap();
        let b = PersistenceDiagram::new(shuffled).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(phi_scale(&a, 1.0).unwrap(), phi_scale(&b, 1.0).unwrap());
    }

    #[test]
    fn single_scale_bounds((x, y, _) in triple(3), r in 0.2f64..4.0) {
        let n = x.arity();
        let (px, py) = (phi_scale(&x, r).unwrap(), phi_scale(&y, r).unwrap());
        let d = bottleneck_distance(&x, &y).unwrap();
        prop_assert!(px.distance(&py).unwrap() <= 2f64.powi(n as i32) * d + 1e-9 * r.max(1.0));
        prop_assert!(px.norm() >= r / 8.0 - 1e-9);
        prop_assert!(px.len() <= 4usize.pow(n as u32));
        prop_assert!(px.entries.values().all(|v| *v > 0.0 && *v <= 1.5 * r));
        prop_assert_eq!(px.distance(&py).unwrap(), py.distance(&px).unwrap());
    }

    #[test]
    fn bounded_map_is_one_lipschitz((x, y, _) in triple(3), cut in 0.1f64..0.9, w in 0.05f64..0.95) {
        let spec = BoundedEmbeddingSpec::new(FRAME, vec![cut * FRAME, FRAME], vec![w.sqrt(), (1.0 - w).sqrt()], x.arity()).unwrap();
        let d = bottleneck_distance(&x, &y).unwrap();
        let e = phi3(&x, &spec).unwrap().distance(&phi3(&y, &spec).unwrap()).unwrap();
        prop_assert!(e <= d + 1e-9);
    }

    #[test]
    fn injective_round_trip((x, _, _) in triple(4)) {
        let anchors = AnchorSet::default_for(x.arity(), FRAME).unwrap();
        let v = injective_embed(&x, &anchors, FRAME).unwrap();
        prop_assert!(v.iter().all(|a| *a >= std::f64::consts::FRAC_PI_4 && *a < std::f64::consts::FRAC_PI_2));
        if let Ok(back) = reconstruct(&v, &anchors, x.arity(), FRAME, 1e-9) {
            prop_assert!(multiset_gap(&x, &back) < 1e-6);
        }
    }

    #[test]
    fn files_round_trip(ds in prop::collection::vec(diagram(3), 1..4)) {
        prop_assert_eq!(io::read_csv(&io::write_csv(&ds), None).unwrap(), ds.clone());
        prop_assert_eq!(io::read_json(&io::write_json(&ds), None).unwrap(), ds);
    }
}

#[test]
fn single_precision_tracks_double() {
    let pairs = [(0.5, 3.25), (2.0, 9.5)];
    let other = [(1.0, 2.0)];
    let x64 = PersistenceDiagram::from_pairs(&pairs, 3).unwrap();
    let y64 = PersistenceDiagram::from_pairs(&other, 3).unwrap();
    let x32 = PersistenceDiagram::from_pairs(&pairs.map(|(a, b)| (a as f32, b as f32)), 3).unwrap();
    let y32 = PersistenceDiagram::from_pairs(&other.map(|(a, b)| (a as f32, b as f32)), 3).unwrap();
    let d64 = bottleneck_distance(&x64, &y64).unwrap();
    let d32 = bottleneck_distance(&x32, &y32).unwrap();
    assert_abs_diff_eq!(d64, d32 as f64, epsilon = 1e-6);
    let e64 = phi_scale(&x64, 1.0).unwrap().distance(&phi_scale(&y64, 1.0).unwrap()).unwrap();
    let e32 = phi_scale(&x32, 1.0f32).unwrap().distance(&phi_scale(&y32, 1.0f32).unwrap()).unwrap();
    assert_abs_diff_eq!(e64, e32 as f64, epsilon = 1e-5);
}
