//! Actions, hierarchy, reduction and estimates on potentials with known
//! answers, and pipeline properties on seeded random potentials.

use std::f64::consts::PI;

use birkhoff::estimates::{analyse, check_act_sob_i, check_h3_lemma, check_sob_rep, AnalysisOptions};
use birkhoff::family::{Decay, FamilySpec, RandomSpec};
use birkhoff::lyapunov_schmidt::{coefficients_at, det_s_roots, ls_check};
use birkhoff::prelude::*;

fn random(seed: u64) -> FourierPotential {
    RandomSpec { band: 8, decay: Decay::Sobolev, s: 1.0, a: 0.0, seed, amplitude: 1.0 }.potential().unwrap()
}

fn actions_of(phi: &FourierPotential, extra: i64) -> (DiscriminantEvaluator, PeriodicSpectrum, ActionSpectrum) {
    let ev = DiscriminantEvaluator::new(phi.clone());
    let sp = locate_spectrum(&ev, localisation_threshold(phi).unwrap() + extra).unwrap();
    let acts = compute_actions(&ev, &sp, &DEFAULT_LEVELS, ActionMethod::GapIntegral, &ActionConfig::default()).unwrap();
    (ev, sp, acts)
}

#[test]
fn constant_half_actions() {
    let (ev, sp, acts) = actions_of(&FourierPotential::constant(0.5), 6);
    // Σ Iₙ = ½‖φ‖₀² = 0.25 with a single open gap
    assert!((acts.action(0) - 0.25).abs() < 1e-9);
    // Σ 4J_{n,3} = H₃ = ∫|ψ|⁴ = 0.0625
    assert!((acts.higher(0, 3).unwrap() - 0.015625).abs() < 1e-9);
    assert!(acts.indices().filter(|&n| n != 0).all(|n| acts.action(n) == 0.0));
    assert!((action_contour(&ev, &sp, 0).unwrap().value - 0.25).abs() < 1e-9);
    assert!((action_norms(&acts, &FourierPotential::constant(0.5), &ActionNorm::Sobolev(2.0)).unwrap().value - 0.25).abs() < 1e-9);
    let zeta = mean_value_nodes(&acts, &sp, 0, 1).unwrap();
    assert!((zeta.abs() - 0.25).abs() < 1e-8);
    assert!(matches!(mean_value_nodes(&acts, &sp, 2, 1), Err(Error::UndefinedNode(2))));
}

#[test]
fn shifted_constant_actions_move_with_the_gap() {
    let phi = gauge_shift(&FourierPotential::constant(0.5), 1).unwrap();
    let (ev, sp, acts) = actions_of(&phi, 6);
    assert!((acts.action(1) - 0.25).abs() < 1e-9);
    assert!((action_contour(&ev, &sp, 1).unwrap().value - 0.25).abs() < 1e-8);
    assert!((birkhoff_norm(&acts, &ActionNorm::Sobolev(0.0)).unwrap() - 0.5f64.sqrt()).abs() < 1e-9);
    let zeta = mean_value_nodes(&acts, &sp, 1, 1).unwrap();
    let g = sp.get(1).unwrap();
    assert!(zeta >= g.lambda_minus && zeta <= g.lambda_plus && (zeta - PI).abs() < 0.5);
}

#[test]
fn contour_and_gap_integral_agree_on_a_random_potential() {
    let (ev, sp, acts) = actions_of(&random(9), 8);
    let mut open = 0;
    for g in sp.open_gaps() {
        open += 1;
        let c = action_contour(&ev, &sp, g.n).unwrap();
        let i = acts.action(g.n);
        assert!((c.value - i).abs() <= 1e-6 * i.max(1e-12), "n = {}: {} vs {i}", g.n, c.value);
        assert!(c.omega_period < 1e-8);
    }
    assert!(open > 4);
}

#[test]
fn actions_approach_a_quarter_gap_squared() {
    let (_, sp, acts) = actions_of(&random(12), 8);
    let mut open: Vec<&GapRecord> = sp.open_gaps().collect();
    open.sort_by_key(|g| g.n.abs());
    let top = &open[open.len() - open.len().div_ceil(4)..];
    for g in top {
        let r = 4.0 * acts.action(g.n) / (g.gamma * g.gamma);
        assert!((r - 1.0).abs() <= 0.5, "n = {}: 4I/γ² = {r}", g.n);
    }
}

#[test]
fn trace_formulas_for_the_constant() {
    let phi = FourierPotential::constant(0.5);
    let (_, _, acts) = actions_of(&phi, 6);
    let h = hierarchy_compute(&phi, 3).unwrap();
    let t1 = trace_check(&h, &acts, 1).unwrap();
    assert!(t1.passed && (t1.sum - 0.25).abs() < 1e-9);
    let t3 = trace_check(&h, &acts, 3).unwrap();
    assert!(t3.passed && (t3.sum - 0.015625).abs() < 1e-9);
}

#[test]
fn hierarchy_of_a_single_mode() {
    // ψ = 0.5·e^{2πix}
    let phi = FourierPotential::real_type([(-1, Complex64::new(0.5, 0.0))]).unwrap();
    let h = hierarchy_compute(&phi, 3).unwrap();
    assert!((h.hamiltonian(1).unwrap() - 0.25).norm() < 1e-12);
    let h3 = 0.25 * 4.0 * PI * PI + 0.0625;
    assert!((h.hamiltonian(3).unwrap() - h3).norm() < 1e-10);
    assert!((h3 - 9.9321).abs() < 1e-4);
}

#[test]
fn hform_inequality_on_a_random_potential() {
    let rep = hform_check(&random(11), 2).unwrap();
    assert!(rep.passed && rep.constant.is_finite());
    assert!(rep.imag.abs() < 1e-10 * rep.hamiltonian.abs().max(1.0));
}

#[test]
fn reduction_of_the_constant() {
    let phi = FourierPotential::constant(0.5);
    let c = coefficients_at(&phi, 4, Complex64::from(4.0 * PI)).unwrap();
    let n1sq = 0.5;
    assert!(c.a().norm() <= n1sq / 5.0);
    // ‖φ±‖₁ = 0.5 for the constant
    let b_bound = 8.0 / 5.0 * n1sq * 0.5;
    assert!((c.b_plus - phi.phi_plus(8)).norm() <= b_bound);
    assert!((c.b_minus - phi.phi_minus(8)).norm() <= b_bound);
    let r = det_s_roots(&phi, 4).unwrap();
    let exact = ((4.0 * PI).powi(2) + 0.25).sqrt();
    assert!((r.xi_minus.re - exact).abs() < 1e-8 && (r.xi_plus.re - exact).abs() < 1e-8);
    assert!((exact - 12.5764).abs() < 1e-4);
}

#[test]
fn reduction_of_the_shifted_constant() {
    let phi = gauge_shift(&FourierPotential::constant(0.5), 1).unwrap();
    let n1 = sobolev_norm(&phi, 1.0).unwrap();
    let c = coefficients_at(&phi, 5, Complex64::from(5.0 * PI)).unwrap();
    assert!(c.a().norm() <= n1 * n1 / 6.0);
    let r = det_s_roots(&phi, 5).unwrap();
    let exact = PI + ((4.0 * PI).powi(2) + 0.25).sqrt();
    assert!((r.xi_minus.re - exact).abs() < 1e-8 && (r.xi_plus.re - exact).abs() < 1e-8);
}

#[test]
fn reduction_of_a_random_potential_at_the_threshold() {
    let phi = random(5);
    let n = localisation_threshold(&phi).unwrap();
    let ev = DiscriminantEvaluator::new(phi.clone());
    let sp = locate_spectrum(&ev, n + 2).unwrap();
    let e = ls_check(&phi, n, &Weight::sobolev(1.0).unwrap(), Some(&sp)).unwrap();
    assert!(e.passed(), "{:?}", e.failures);
    assert!(e.norms.iter().all(|x| x.t_norm <= x.t_bound && x.t2_norm <= x.t2_bound));
    assert!(e.root_mismatch.unwrap() < 1e-6);
}

#[test]
fn sobolev_representation_on_a_random_potential() {
    let a = analyse(&random(13), &AnalysisOptions::default()).unwrap();
    let r = check_sob_rep(&a, 2).unwrap();
    assert!(r.passed && r.residual < 1e-4, "{r:?}");
}

#[test]
fn estimates_on_a_small_family() {
    let opts = AnalysisOptions::default();
    for phi in FamilySpec::sobolev(3, 4).generate().unwrap() {
        let a = analyse(&phi, &opts).unwrap();
        let h3 = check_h3_lemma(&a).unwrap();
        assert!(h3.passed && h3.slack_first >= 0.0 && h3.slack_second >= 0.0, "{h3:?}");
        let r = check_act_sob_i(&a, 2).unwrap();
        assert!(r.ratio.is_finite() && r.ratio > 0.0);
    }
    let a = analyse(&FourierPotential::constant(0.5), &opts).unwrap();
    let r = check_act_sob_i(&a, 1).unwrap();
    assert!((r.lhs - 0.25).abs() < 1e-9);
    let rhs = 0.5 + (1.0 + 0.5f64.sqrt()).powi(4) * 0.5;
    assert!((r.rhs - rhs).abs() < 1e-9 && (r.ratio - 0.0527).abs() < 1e-4);
}
