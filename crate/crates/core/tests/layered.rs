use std::f64::consts::PI;

use faer::{c64, Mat};
use layered_gsm::fresnel::{rho_stack, Layer, LayerStack, Medium, Termination};
use layered_gsm::gsmio::{synthesize_gsm, IndexSpec, SyntheticGsmSpec};
use layered_gsm::interaction::{gamma_composite, gamma_composite_dense, max_abs_diff, SolveOptions};
use layered_gsm::oracle::{check_pec_boundary, default_sources, interface_sample_points};
use layered_gsm::waves::{Polarization, SvwfBasis};
use layered_gsm::wmatrix::{assemble_w, kappa_rule, ContourSpec, WMatrix, DEFAULT_IOTA};
use layered_gsm::{Complex64, C0};
use proptest::prelude::*;

const F: f64 = 3.5e9;
const R_MIN: f64 = 0.146;

fn omega() -> f64 {
    2.0 * PI * F
}

fn k() -> f64 {
    omega() / C0
}

fn w_for(l: usize, stack: &LayerStack, contour: &ContourSpec) -> WMatrix {
    assemble_w(&SvwfBasis::new(l).unwrap(), stack, k(), omega(), contour).unwrap()
}

fn rule(l: usize) -> ContourSpec {
    ContourSpec::from_rule(l, k() * R_MIN, DEFAULT_IOTA).unwrap()
}

#[test]
fn pec_residual_falls_with_degree() {
    let z = -0.2;
    let stack = LayerStack::pec(z).unwrap();
    let pts = interface_sample_points(z, 0.5 * z.abs(), 24, 1);
    let contour = ContourSpec::new(2.0).unwrap().with_orders(66, 66).unwrap();
    let residual = |l: usize| {
        let w = w_for(l, &stack, &contour);
        check_pec_boundary(&w, z, k(), &default_sources(w.basis()), &pts).unwrap()
    };
    let (r17, r24, r28) = (residual(17), residual(24), residual(28));
    assert!(r24 < 0.1 * r17 && r28 < 0.1 * r24, "{r17} {r24} {r28}");
    assert!(r28 <= 1e-3, "{r28}");
}

#[test]
fn m_major_solve_matches_dense_solve() {
    let l = 6;
    let basis = SvwfBasis::new(l).unwrap();
    let gsm = synthesize_gsm(&SyntheticGsmSpec::RandomPassive { seed: 3, ports: 3, radius: 0.6, kr: 5.0 }, &basis, F)
        .unwrap();
    let stack = LayerStack::half_space(Medium::dielectric(5.0, 0.02).unwrap(), -0.15).unwrap();
    let w = w_for(l, &stack, &rule(l));
    let dense = w.to_dense();
    for opts in [SolveOptions::default(), SolveOptions::neumann(6)] {
        let a = gamma_composite(&gsm, &w, &opts).unwrap();
        let b = gamma_composite_dense(
            gsm.gamma.as_ref(),
            gsm.r_block.as_ref(),
            gsm.t_block.as_ref(),
            gsm.s_block.as_ref(),
            dense.as_ref(),
            &opts,
        )
        .unwrap();
        assert!(max_abs_diff(a.as_ref(), b.as_ref()) < 1e-13);
    }
}

fn radiator(l_max: usize) -> layered_gsm::interaction::GsmBlocks {
    let spec = SyntheticGsmSpec::SingleModeRadiator {
        index: IndexSpec { tau: 1, sigma: 0, m: 1, l: 1 },
        amplitude: 1.0,
        gamma_re: 0.1,
        gamma_im: 0.0,
    };
    synthesize_gsm(&spec, &SvwfBasis::new(l_max).unwrap(), F).unwrap()
}

#[test]
fn pec_reflection_follows_image_distance() {
    // A low-order radiator over a PEC plane sees its image at 2|z_I|: moving
    // the plane from 100 mm to 200 mm away adds a round-trip phase 2kΔz and
    // roughly halves the reflected amplitude.
    let l = 12;
    let gsm = radiator(l);
    let reflected = |z: f64| {
        let w = w_for(l, &LayerStack::pec(z).unwrap(), &rule(l));
        let g = gamma_composite(&gsm, &w, &SolveOptions::default()).unwrap();
        g[(0, 0)] - gsm.gamma[(0, 0)]
    };
    let near = reflected(-0.1);
    let far = reflected(-0.2);
    let ratio = far / near;
    let expect = Complex64::from_polar(0.5, -2.0 * k() * 0.1);
    assert!((ratio.norm() / 0.5 - 1.0).abs() < 0.1, "{ratio}");
    assert!((ratio / expect).arg().abs() < 0.1, "{ratio} vs {expect}");
}

#[test]
fn near_regime_needs_evanescent_spectrum() {
    // Interface inside the minimum sphere: a contour ending just above u = j
    // misses evanescent spectrum that a longer one picks up.
    let l = 10;
    let gsm = synthesize_gsm(
        &SyntheticGsmSpec::RandomPassive { seed: 2, ports: 1, radius: 0.5, kr: k() * R_MIN },
        &SvwfBasis::new(l).unwrap(),
        F,
    )
    .unwrap();
    let stack = LayerStack::half_space(Medium::dielectric(4.0, 0.01).unwrap(), -0.1).unwrap();
    let solve = |kappa: f64, order: usize| {
        let c = ContourSpec::new(kappa).unwrap().with_orders(order, order).unwrap();
        gamma_composite(&gsm, &w_for(l, &stack, &c), &SolveOptions::default()).unwrap()
    };
    let reference = solve(6.0, 128);
    let e_short = max_abs_diff(solve(1.001, 66).as_ref(), reference.as_ref());
    let e_long = max_abs_diff(solve(4.0, 66).as_ref(), reference.as_ref());
    println!("near regime: κ̃ 1.001 → {e_short:e}, κ̃ 4 → {e_long:e}");
    assert!(e_short > 0.1 && e_long < 1e-2 * e_short, "short {e_short}, long {e_long}");
}

#[test]
fn rule_contour_covers_the_reference_antenna() {
    let kappa = kappa_rule(17, k() * R_MIN, DEFAULT_IOTA).unwrap();
    assert!(kappa > 1.0 && kappa < 2.0, "{kappa}");
}

fn arb_medium() -> impl Strategy<Value = Medium> {
    (1.0f64..20.0, 0.0f64..0.5, 1.0f64..3.0).prop_map(|(e, s, m)| Medium::new(e, s, m).unwrap())
}

fn arb_stack() -> impl Strategy<Value = LayerStack> {
    (
        prop::collection::vec((arb_medium(), 0.002f64..0.2), 0..4),
        prop_oneof![arb_medium().prop_map(Termination::HalfSpace), Just(Termination::Pec), Just(Termination::Pmc)],
        -0.3f64..-0.05,
    )
        .prop_map(|(layers, term, z)| {
            let layers = layers.into_iter().map(|(medium, thickness)| Layer { medium, thickness }).collect();
            LayerStack::new(Medium::VACUUM, layers, term, z).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn passive_stacks_do_not_amplify_propagating_waves(stack in arb_stack(), u in -1.0f64..0.0) {
        for i in [Polarization::Te, Polarization::Tm] {
            let rho = rho_stack(i, &stack, Complex64::new(u, 0.0), omega()).unwrap();
            prop_assert!(rho.norm() <= 1.0 + 1e-12, "{rho}");
        }
    }

    #[test]
    fn w_is_symmetric_and_finite(stack in arb_stack()) {
        let w = w_for(4, &stack, &rule(4));
        prop_assert!(w.symmetry_error() <= 1e-12 * w.max_abs());
        prop_assert!(w.max_abs().is_finite());
    }

    #[test]
    fn vacuum_below_returns_gsm_reflection(seed in 0u64..1000, z in -0.3f64..-0.05) {
        let basis = SvwfBasis::new(3).unwrap();
        let gsm = synthesize_gsm(&SyntheticGsmSpec::RandomPassive { seed, ports: 2, radius: 0.5, kr: 3.0 }, &basis, F).unwrap();
        let stack = LayerStack::half_space(Medium::VACUUM, z).unwrap();
        let g = gamma_composite(&gsm, &w_for(3, &stack, &rule(3)), &SolveOptions::default()).unwrap();
        prop_assert_eq!(g, gsm.gamma.clone());
    }

    #[test]
    fn composite_is_unchanged_by_zero_interaction(seed in 0u64..1000) {
        let basis = SvwfBasis::new(2).unwrap();
        let gsm = synthesize_gsm(&SyntheticGsmSpec::RandomPassive { seed, ports: 1, radius: 0.5, kr: 2.0 }, &basis, F).unwrap();
        let j = basis.len();
        let zero = Mat::<c64>::zeros(j, j);
        let g = gamma_composite_dense(
            gsm.gamma.as_ref(), gsm.r_block.as_ref(), gsm.t_block.as_ref(), gsm.s_block.as_ref(), zero.as_ref(),
            &SolveOptions::default(),
        ).unwrap();
        prop_assert_eq!(g, gsm.gamma.clone());
    }
}
