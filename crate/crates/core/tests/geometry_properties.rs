use fracterp::{
    affine_inverse, certify_sup_bound, coefficient, eval_coefficient, sup_distance, verify_partition, AffineMap,
    DomainBox, GridFunction,
};
use proptest::prelude::*;

fn nonzero() -> impl Strategy<Value = f64> {
    prop_oneof![-4.0..-0.05f64, 0.05..4.0f64]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn inverse_composes_to_identity(a in nonzero(), b in -3.0..3.0f64, x in -2.0..2.0f64) {
        let m = AffineMap::linear(a, b);
        let inv = affine_inverse(&m).unwrap();
        let back = m.apply(&inv.apply(&[x]))[0];
        prop_assert!((back - x).abs() <= 8.0 * f64::EPSILON * (1.0 + x.abs() + b.abs()));
    }

    #[test]
    fn rational_inverse_is_exact(num in -20i128..20, den in 1i128..20, off in -20i128..20, x in -64i32..64) {
        prop_assume!(num != 0);
        let m = AffineMap::ratio((num, den), (off, den));
        let inv = affine_inverse(&m).unwrap();
        let x = x as f64 / 64.0;
        let exact = fracterp::geometry::exact_from_f64(x).unwrap();
        let there = inv.apply_exact(&[exact]).unwrap();
        let back = m.apply_exact(&there).unwrap();
        prop_assert_eq!(back[0], exact);
    }

    #[test]
    fn sup_bound_never_under_reports(a in -3.0..3.0f64, b in -3.0..3.0f64, w in 0.5..8.0f64, n in 2usize..300, xs in proptest::collection::vec(0.0..=1.0f64, 20)) {
        let src = format!("{a}*sin({w}*x) + {b}*x^2 - cos(x)");
        let c = coefficient(&src, &DomainBox::closed(0.0, 1.0)).unwrap();
        let bound = certify_sup_bound(&c, n).unwrap();
        for x in xs {
            let v = eval_coefficient(&c, &[x]).unwrap().norm();
            prop_assert!(v <= bound, "{src} at {x}: {v} > {bound}");
        }
    }

    #[test]
    fn sup_distance_is_a_metric(
        f in proptest::collection::vec(-5.0..5.0f64, 17),
        g in proptest::collection::vec(-5.0..5.0f64, 17),
        h in proptest::collection::vec(-5.0..5.0f64, 17),
    ) {
        let grid = |v: Vec<f64>| GridFunction::new(DomainBox::closed(0.0, 1.0), 17, 1, v).unwrap();
        let (f, g, h) = (grid(f), grid(g), grid(h));
        let fg = sup_distance(&f, &g).unwrap();
        prop_assert_eq!(fg, sup_distance(&g, &f).unwrap());
        prop_assert_eq!(sup_distance(&f, &f).unwrap(), 0.0);
        prop_assert_eq!(fg == 0.0, f == g);
        prop_assert!(sup_distance(&f, &h).unwrap() <= fg + sup_distance(&g, &h).unwrap() + 1e-12);
    }
}

#[test]
fn first_example_maps_partition_and_perturbations_break_it() {
    let dom = DomainBox::half_open(0.0, 1.0);
    let maps = |off: f64| vec![AffineMap::ratio((1, 3), (0, 1)), AffineMap::linear(2.0 / 3.0, 1.0 / 3.0 + off)];
    let r = verify_partition(&maps(0.0), &dom).unwrap();
    assert!(r.disjoint && r.covers);
    for off in [1e-6, -1e-6] {
        let r = verify_partition(&maps(off), &dom).unwrap();
        assert!(!(r.disjoint && r.covers), "offset {off}");
    }
}

#[test]
fn certification_of_paper_scale_functions() {
    let unit = DomainBox::half_open(0.0, 1.0);
    let s1 = coefficient("1/2*sin(x)", &unit).unwrap();
    let s2 = coefficient("-2/3*cos(x)", &unit).unwrap();
    let half_sin_one = 0.5 * 1f64.sin();
    assert!(s1.sup_bound() >= half_sin_one && s1.sup_bound() <= half_sin_one + 1e-3);
    assert!(s2.sup_bound() >= 2.0 / 3.0 && s2.sup_bound() <= 2.0 / 3.0 + 1e-3);
}
