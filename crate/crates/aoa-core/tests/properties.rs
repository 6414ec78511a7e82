use aoa_core::array::{tolerance, unbalance, unbalance2_via_hamming};
use aoa_core::discrepancy::{check_discrepancy_bounds, dd, DdParams};
use aoa_core::io::{parse_array, write_array};
use aoa_core::ip::{build_model, emit_lp, parse_lp, IpInstance, IpSymmetry};
use aoa_core::metrics::{d1, d2};
use aoa_core::search::{front_insert, ObjectiveVector};
use aoa_core::symmetry::{act, compress, equivalent, GroupElement, SymmetryKind};
use aoa_core::{Array, Rational};
use proptest::prelude::*;

fn array(max_n: usize, min_k: usize, max_k: usize, max_s: u32) -> impl Strategy<Value = Array> {
    (1..=max_n, min_k..=max_k, 2..=max_s).prop_flat_map(|(n, k, s)| {
        prop::collection::vec(1..=s, n * k).prop_map(move |cells| Array::new(n, k, s, cells).unwrap())
    })
}

fn array_with_element() -> impl Strategy<Value = (Array, GroupElement)> {
    array(16, 2, 6, 5).prop_flat_map(|a| {
        let (s, k) = (a.n_levels(), a.n_factors());
        let levels = Just((1..=s).collect::<Vec<u32>>()).prop_shuffle();
        let cols = Just((0..k).collect::<Vec<usize>>()).prop_shuffle();
        (Just(a), levels, cols).prop_map(|(a, l, c)| (a, GroupElement::new(l, c).unwrap()))
    })
}

fn element(s: u32, k: usize) -> impl Strategy<Value = GroupElement> {
    let levels = Just((1..=s).collect::<Vec<u32>>()).prop_shuffle();
    let cols = Just((0..k).collect::<Vec<usize>>()).prop_shuffle();
    (levels, cols).prop_map(|(l, c)| GroupElement::new(l, c).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn hamming_identity(a in array(20, 1, 8, 5), t in 1usize..=3) {
        prop_assume!(t <= a.n_factors());
        prop_assert_eq!(unbalance2_via_hamming(&a, t).unwrap(), unbalance(&a, t, 2).unwrap());
    }

    #[test]
    fn metrics_invariant_under_actions((a, g) in array_with_element()) {
        let b = act(&g, &a).unwrap();
        for p in 1..=3 {
            prop_assert_eq!(unbalance(&a, 2, p).unwrap(), unbalance(&b, 2, p).unwrap());
        }
        prop_assert_eq!(tolerance(&a, 2).unwrap(), tolerance(&b, 2).unwrap());
    }

    #[test]
    fn action_laws(a in array(10, 4, 4, 3), g in element(3, 4), h in element(3, 4)) {
        prop_assume!(a.n_levels() == 3);
        let gh = act(&g.compose(&h).unwrap(), &a).unwrap();
        prop_assert!(equivalent(&gh, &act(&g, &act(&h, &a).unwrap()).unwrap()).unwrap());
        prop_assert!(equivalent(&act(&g.inverse(), &act(&g, &a).unwrap()).unwrap(), &a).unwrap());
    }

    #[test]
    fn d_criteria_are_normalised_unbalances(a in array(20, 2, 8, 5)) {
        let pairs = Rational::from_integer((a.n_factors() * (a.n_factors() - 1) / 2) as i128);
        prop_assert_eq!(d1(&a).unwrap(), unbalance(&a, 2, 1).unwrap() / pairs);
        prop_assert_eq!(d2(&a).unwrap(), unbalance(&a, 2, 2).unwrap() / pairs);
    }

    #[test]
    fn dd_forms_agree_and_bounds_hold(a in array(20, 1, 8, 5), ratio in 1.05f64..4.0) {
        let v = dd(&a, DdParams::new(ratio, 1.0).unwrap());
        prop_assert!(v.relative_gap().unwrap() <= 1e-9);
        for b in check_discrepancy_bounds(&a) {
            prop_assert!(b.holds, "{:?}", b);
            prop_assert!(!b.equality_expected || b.equality_holds, "{:?}", b);
        }
    }

    #[test]
    fn array_file_round_trip(a in array(12, 1, 6, 9)) {
        let text = write_array(&a, &[("seed".into(), "1".into())]);
        let back = parse_array(&text).unwrap();
        prop_assert_eq!(&back.array, &a);
        prop_assert_eq!(write_array(&back.array, &back.metadata), text);
    }

    #[test]
    fn front_is_an_antichain(points in prop::collection::vec((0u64..30, 0u64..6), 1..40)) {
        let mut front = vec![];
        for &(u, t) in &points {
            front_insert(&mut front, ObjectiveVector::new(u, t));
        }
        for (i, a) in front.iter().enumerate() {
            for (j, b) in front.iter().enumerate() {
                prop_assert!(i == j || !a.le(b), "{} dominates {}", a, b);
            }
        }
        for &(u, t) in &points {
            let p = ObjectiveVector::new(u, t);
            prop_assert!(front.iter().any(|f| f.le(&p)));
        }
    }

    #[test]
    fn semicyclic_compression_round_trips(core in prop::collection::vec(prop::collection::vec(1u32..=3, 4), 1..4)) {
        let g = SymmetryKind::Semicyclic { a: 2 }.generators(3, 4).unwrap();
        let mut rows = vec![];
        for r in core.iter().filter(|r| r.iter().any(|&v| v >= 2)) {
            rows.extend(aoa_core::symmetry::row_orbit(&g, r));
        }
        prop_assume!(!rows.is_empty());
        let a = Array::from_rows(3, &rows).unwrap();
        let enc = compress(&a, SymmetryKind::Semicyclic { a: 2 }).unwrap();
        prop_assert!(equivalent(&enc.expand().unwrap(), &a).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn lp_round_trip(s in 2u32..=3, k in 3usize..=5, lambda in 1usize..=2, p in 1u32..=2, eps in 1i64..=2, klein in any::<bool>()) {
        let sym = IpSymmetry { semicyclic: Some(2.min(s)), klein: klein && k >= 4 };
        let inst = IpInstance::new(s, k, lambda, p, eps).unwrap().with_symmetry(sym).unwrap();
        let text = emit_lp(&build_model(&inst).unwrap()).unwrap();
        prop_assert_eq!(emit_lp(&parse_lp(&text).unwrap()).unwrap(), text);
    }
}
