mod common;

use common::*;
use kronred::fixtures::*;
use kronred::reduction::{effective_curve, integrability_diagnostic, reduce_linear, RecoveryMethod};
use kronred::solver::{reduced_potential, solve_interior};
use kronred::{reduce, SamplingPlan};

#[test]
fn reduced_tables_reproduce_the_reduced_potential() {
    let net = mixed_chain();
    let reduced = reduce(&net, &SamplingPlan::default()).unwrap();
    assert_eq!(reduced.certificate.method, RecoveryMethod::Acyclic);
    assert!(reduced.certificate.accepted);
    for seed in 0..10 {
        let z_b = random_point(seed, 3, 1.5);
        // g(0) = 0 on every edge, so the all-zero state has K̂ = 0
        let want = reduced_potential(&net, &z_b).unwrap();
        let got = reduced.reduced_potential(&z_b).unwrap();
        assert!((got - want).abs() <= 1e-6 * (1.0 + want.abs()), "{got} vs {want}");
        let j = solve_interior(&net, &z_b, None).unwrap().j_b;
        assert!(max_abs_diff(&reduced.nodal_currents(&z_b).unwrap(), &j) <= 1e-6 * (1.0 + inf(&j)));
    }
}

#[test]
fn linear_inputs_carry_exact_weights() {
    let net = unit_star(4);
    let reduced = reduce(&net, &SamplingPlan::default()).unwrap();
    let exact = reduce_linear(&net).unwrap();
    assert_eq!(reduced.graph.edges(), exact.graph.edges());
    for (e, w) in reduced.edges.iter().zip(reduced.slopes_at_zero()) {
        assert!((e.exact_weight.unwrap() - 0.25).abs() < 1e-15);
        assert!((w - 0.25).abs() < 1e-8);
    }
    assert!(reduced.certificate.integrability_max_asymmetry <= 1e-6);
}

#[test]
fn same_seed_same_reduction() {
    let plan = SamplingPlan { count: 32, ..SamplingPlan::default() };
    let a = reduce(&diode_pair_same(), &plan).unwrap();
    let b = reduce(&diode_pair_same(), &plan).unwrap();
    assert_eq!(a, b);
}

#[test]
fn diode_curve_is_not_odd() {
    let curve = effective_curve(&diode_pair_same(), 2, 1, &[1.0, -1.0]).unwrap();
    assert!((curve[0].current + curve[1].current).abs() > 0.1);
    let curve = effective_curve(&diode_pair_opposite(), 1, 2, &[1.0, -1.0]).unwrap();
    assert!((curve[0].current + curve[1].current).abs() < 1e-12);
}

#[test]
fn nonlinear_cyclic_reduction_is_reported() {
    let net = diode_cyclic_triangle();
    match reduce(&net, &SamplingPlan::default()) {
        Ok(r) => {
            assert_eq!(r.certificate.method, RecoveryMethod::CyclicLeastSquares);
            assert!(r.certificate.consistency_residual.is_finite());
            let again = integrability_diagnostic(&net, &r, &SamplingPlan::default()).unwrap();
            assert_eq!(again, r.certificate.integrability_max_asymmetry);
        }
        Err(e) => panic!("cyclic reduction should report, not fail: {e}"),
    }
}
