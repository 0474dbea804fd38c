use fracterp::fixtures::random_global_operator;
use fracterp::{build_fif, sup_distance, AffineMap, CoefficientFn, DomainBox, GridFunction, RBOperator};
use proptest::prelude::*;

fn grid(res: usize, v: Vec<f64>) -> GridFunction {
    GridFunction::new(DomainBox::closed(0.0, 1.0), res, 1, v).unwrap()
}

fn example1() -> RBOperator {
    RBOperator::from_exprs(
        DomainBox::half_open(0.0, 1.0),
        vec![AffineMap::ratio((1, 3), (0, 1)), AffineMap::ratio((2, 3), (1, 3))],
        &["-1", "x"],
        &["1/2*sin(x)", "-2/3*cos(x)"],
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // Multilinear interpolation is a convex combination, so the grid operator
    // contracts with no slack at all.
    #[test]
    fn apply_contracts(seed in 0u64..10_000, f in proptest::collection::vec(-3.0..3.0f64, 65), g in proptest::collection::vec(-3.0..3.0f64, 65)) {
        let t = random_global_operator(seed);
        let (f, g) = (grid(65, f), grid(65, g));
        let lhs = sup_distance(&t.apply(&f).unwrap(), &t.apply(&g).unwrap()).unwrap();
        let rhs = t.contraction_factor() * sup_distance(&f, &g).unwrap();
        prop_assert!(lhs <= rhs * (1.0 + 1e-12) + 1e-14, "{lhs} > {rhs}");
    }

    #[test]
    fn apriori_bound_is_honest(seed in 0u64..10_000, k in prop_oneof![Just(5usize), Just(10), Just(20)]) {
        let t = random_global_operator(seed);
        let s = t.contraction_factor();
        let f0 = GridFunction::zeros(DomainBox::closed(0.0, 1.0), 129, 1).unwrap();
        let psi1 = t.apply(&f0).unwrap();
        let bound = s.powi(k as i32) / (1.0 - s) * sup_distance(&psi1, &f0).unwrap();
        let pk = t.power(&f0, k).unwrap();
        let p2k = t.power(&pk, k).unwrap();
        prop_assert!(sup_distance(&pk, &p2k).unwrap() <= bound * (1.0 + 1e-9));
    }

    #[test]
    fn fixed_point_does_not_depend_on_start(seed in 0u64..10_000) {
        let t = random_global_operator(seed);
        let eps = 1e-9;
        let a = t.iterate_to_fixed_point(&GridFunction::zeros(DomainBox::closed(0.0, 1.0), 129, 1).unwrap(), eps, 500).unwrap();
        let b = t.iterate_to_fixed_point(&GridFunction::constant(DomainBox::closed(0.0, 1.0), 129, &[1.0]).unwrap(), eps, 500).unwrap();
        prop_assert!(sup_distance(&a.psi, &b.psi).unwrap() <= 2.0 * eps);
        prop_assert!(a.residual <= eps * (1.0 + t.contraction_factor()));
    }

    #[test]
    fn address_evaluation_agrees_on_aligned_nodes(j in 0usize..=81) {
        // 3^4 + 1 nodes: l_1^{-1} maps nodes to nodes, so the grid fixed point
        // is exact wherever the address stays in piece 1; elsewhere the
        // interpolation term is bounded by the sup of psi's variation.
        let t = example1();
        let f0 = GridFunction::zeros(t.domain().clone(), 82, 1).unwrap();
        let fp = t.iterate_to_fixed_point(&f0, 1e-10, 200).unwrap();
        let x = fp.psi.node(j);
        let a = t.evaluate_by_address(&x, 60, 0.0).unwrap();
        let grid_value = fp.psi.value(j)[0];
        if a.address.iter().all(|&i| i == 0) {
            prop_assert!((a.value - grid_value).abs() <= a.error_bound + fp.apriori_bound);
        } else {
            prop_assert!((a.value - grid_value).abs() <= a.error_bound + fp.apriori_bound + 0.5);
        }
    }
}

#[test]
fn address_evaluation_agrees_with_dyadic_grid() {
    // Dyadic maps send dyadic nodes to nodes, so grid and address values agree
    // up to both bounds at every node.
    let t = fracterp::builtin_operator("takagi").unwrap();
    let f0 = GridFunction::zeros(t.domain().clone(), 257, 1).unwrap();
    let fp = t.iterate_to_fixed_point(&f0, 1e-11, 200).unwrap();
    for j in 0..257 {
        let x = fp.psi.node(j);
        let a = t.evaluate_by_address(&x, 50, 0.0).unwrap();
        assert!((a.value - fp.psi.value(j)[0]).abs() <= a.error_bound + fp.apriori_bound + 1e-12, "node {j}");
    }
}

#[test]
fn fif_interpolates_its_data() {
    let data = [(0.0, 0.0), (0.25, 0.8), (0.5, -0.3), (1.0, 0.4)];
    let unit = DomainBox::closed(0.0, 1.0);
    let scales = vec![
        CoefficientFn::parse("0.4*cos(x)", unit.clone()).unwrap(),
        CoefficientFn::parse("-0.3", unit.clone()).unwrap(),
        CoefficientFn::parse("0.5*x", unit.clone()).unwrap(),
    ];
    let t = build_fif(&data, &scales).unwrap();
    assert!(t.check_continuity(1e-9).unwrap().verdict);
    let fp = t.iterate_to_fixed_point(&GridFunction::zeros(unit, 1025, 1).unwrap(), 1e-10, 200).unwrap();
    for (x, y) in data {
        assert!((fp.psi.eval(&[x]).unwrap()[0] - y).abs() <= 1e-9, "at {x}");
    }
}

#[test]
fn self_referential_residual_is_small() {
    let t = example1();
    let fp = t.iterate_to_fixed_point(&GridFunction::zeros(t.domain().clone(), 2188, 1).unwrap(), 1e-10, 200).unwrap();
    let again = t.apply(&fp.psi).unwrap();
    assert!(sup_distance(&again, &fp.psi).unwrap() <= 2.0 * 1e-10);
}

#[test]
fn iteration_count_matches_the_closed_form() {
    let t = example1();
    let f0 = GridFunction::zeros(t.domain().clone(), 244, 1).unwrap();
    let eps = 1e-8;
    let fp = t.iterate_to_fixed_point(&f0, eps, 200).unwrap();
    let s = fp.contraction_s;
    let d = sup_distance(&t.apply(&f0).unwrap(), &f0).unwrap();
    let k_max = ((eps * (1.0 - s) / d).ln() / s.ln()).ceil() as usize;
    assert!(fp.iterations <= k_max, "{} > {k_max}", fp.iterations);
}
