use std::f64::consts::PI;

use birkhoff::family::{Decay, RandomSpec};
use birkhoff::prelude::*;

fn random(decay: Decay, seed: u64) -> FourierPotential {
    let a = if decay == Decay::Abel { 0.2 } else { 0.0 };
    RandomSpec { band: 8, decay, s: 1.0, a, seed, amplitude: 1.0 }.potential().unwrap()
}

fn spectrum_of(phi: &FourierPotential, extra: i64) -> (DiscriminantEvaluator, PeriodicSpectrum) {
    let ev = DiscriminantEvaluator::new(phi.clone());
    let n_max = localisation_threshold(phi).unwrap() + extra;
    let sp = locate_spectrum(&ev, n_max).unwrap();
    (ev, sp)
}

#[test]
fn zero_potential_has_double_eigenvalues_at_n_pi() {
    let ev = DiscriminantEvaluator::new(FourierPotential::zero());
    let sp = locate_spectrum(&ev, 8).unwrap();
    for g in &sp.entries {
        let c = g.n as f64 * PI;
        assert!(g.collapsed && g.gamma == 0.0);
        assert!((g.lambda_minus - c).abs() < 1e-9 && (g.lambda_plus - c).abs() < 1e-9, "{g:?}");
    }
}

#[test]
fn constant_potential_closed_form() {
    let (_, sp) = spectrum_of(&FourierPotential::constant(0.5), 8);
    for g in &sp.entries {
        if g.n == 0 {
            assert!((g.lambda_minus + 0.5).abs() < 1e-10 && (g.lambda_plus - 0.5).abs() < 1e-10);
            assert!((g.gamma - 1.0).abs() < 1e-9 && !g.collapsed);
        } else {
            let exact = (g.n as f64).signum() * ((g.n as f64 * PI).powi(2) + 0.25).sqrt();
            assert!(g.collapsed, "n = {}", g.n);
            assert!((g.tau - exact).abs() < 1e-9, "n = {}: {} vs {exact}", g.n, g.tau);
        }
    }
}

#[test]
fn gauge_shift_translates_the_spectrum() {
    let phi = FourierPotential::constant(0.5);
    let shifted = gauge_shift(&phi, 1).unwrap();
    let (_, sp) = spectrum_of(&shifted, 8);
    let open: Vec<_> = sp.open_gaps().collect();
    assert_eq!(open.len(), 1);
    assert_eq!(open[0].n, 1);
    assert!((open[0].gamma - 1.0).abs() < 1e-9);
    assert!((open[0].tau - PI).abs() < 1e-9);
}

#[test]
fn counting_in_rectangles() {
    let zero = DiscriminantEvaluator::new(FourierPotential::zero());
    let h = 0.5 * PI;
    assert_eq!(count_in_rectangle(&zero, Rect { re_min: -h, re_max: h, im_min: -h, im_max: h }).unwrap(), 2);
    let ev = DiscriminantEvaluator::new(FourierPotential::constant(0.5));
    assert_eq!(count_in_rectangle(&ev, Rect { re_min: -1.0, re_max: 1.0, im_min: -1.0, im_max: 1.0 }).unwrap(), 2);
    let r = Rect { re_min: PI - 0.3, re_max: PI + 0.3, im_min: -0.3, im_max: 0.3 };
    assert_eq!(count_in_rectangle(&ev, r).unwrap(), 2);
    let empty = Rect { re_min: 1.0, re_max: 2.0, im_min: -0.3, im_max: 0.3 };
    assert_eq!(count_in_rectangle(&ev, empty).unwrap(), 0);
}

#[test]
fn localisation_of_the_constant_at_n_4() {
    let phi = FourierPotential::constant(0.5);
    let (_, sp) = spectrum_of(&phi, 4);
    assert_eq!(sp.threshold, 4);
    let rep = localization_report(&sp, &phi).unwrap();
    assert!(rep.passed);
    let e = rep.entries.iter().find(|e| e.n == 4).unwrap();
    let exact = ((4.0 * PI).powi(2) + 0.25).sqrt() - 4.0 * PI;
    assert!((e.displacement - exact).abs() < 1e-9);
    assert!((e.displacement - 0.00995).abs() < 5e-5);
    let bound = 0.5 / 5.0 + 2f64.sqrt() * 0.5f64.sqrt() / 9.0;
    assert!((e.bound - bound).abs() < 1e-12 && e.within_bound && e.within_cap);
}

#[test]
fn zero_potential_margins_are_the_full_bounds() {
    let phi = FourierPotential::zero();
    let ev = DiscriminantEvaluator::new(phi.clone());
    let sp = locate_spectrum(&ev, 6).unwrap();
    let rep = localization_report(&sp, &phi).unwrap();
    assert!(rep.entries.iter().all(|e| e.above_threshold && e.displacement < 1e-9));
    let min_bound = rep.entries.iter().map(|e| e.bound).fold(f64::INFINITY, f64::min);
    assert!((rep.worst_margin_above - min_bound).abs() < 1e-9);
    assert!(rep.passed);
}

#[test]
fn random_sobolev_potential_is_localised() {
    let phi = random(Decay::Sobolev, 7);
    let (_, sp) = spectrum_of(&phi, 8);
    assert!(localization_report(&sp, &phi).unwrap().passed);
}

#[test]
fn gap_estimates_hold() {
    let zero = FourierPotential::zero();
    let ev = DiscriminantEvaluator::new(zero.clone());
    let sp = locate_spectrum(&ev, 6).unwrap();
    let rep = gap_report(&sp, &zero, &Weight::sobolev(1.0).unwrap()).unwrap();
    assert!(rep.passed && rep.sum_lhs == 0.0);

    let phi = random(Decay::Abel, 3);
    let w = Weight::abel(1.0, 0.2).unwrap();
    let nw = weighted_norm(&phi, &w).unwrap();
    let n_max = localisation_threshold(&phi).unwrap().max((8.0 * nw * nw).ceil() as i64) + 4;
    let ev = DiscriminantEvaluator::new(phi.clone());
    let sp = locate_spectrum(&ev, n_max).unwrap();
    let rep = gap_report(&sp, &phi, &w).unwrap();
    assert!(rep.passed);
    assert!(rep.sum_rhs - rep.sum_lhs > 0.0);
    assert!(rep.entries.iter().filter(|e| e.above_threshold).all(|e| e.weighted_gap < rep.individual_bound));
}

#[test]
fn spectrum_is_ordered_and_consistent_with_delta() {
    let phi = random(Decay::Sobolev, 21);
    let (ev, sp) = spectrum_of(&phi, 6);
    for w in sp.entries.windows(2) {
        assert!(w[0].lambda_minus <= w[0].lambda_plus);
        assert!(w[0].lambda_plus < w[1].lambda_minus, "{:?} {:?}", w[0], w[1]);
        assert!(w[0].lambda_minus <= w[0].lambda_dot && w[0].lambda_dot <= w[0].lambda_plus + 1e-12);
    }
    for g in &sp.entries {
        let s = if g.n % 2 == 0 { 1.0 } else { -1.0 };
        let (d, _) = ev.delta(Complex64::from(g.tau)).unwrap();
        assert!(s * d.re >= 2.0 - 1e-9, "n = {}: (−1)ⁿΔ(τ) = {}", g.n, s * d.re);
    }
    for w in sp.entries.windows(2) {
        let mid = 0.5 * (w[0].lambda_plus + w[1].lambda_minus);
        let (d, _) = ev.delta(Complex64::from(mid)).unwrap();
        assert!(d.re.abs() <= 2.0 + 1e-12 && d.im.abs() < 1e-12);
    }
}

#[test]
fn discriminant_grows_like_cosh_on_the_imaginary_axis() {
    let phi = random(Decay::Sobolev, 2);
    let ev = DiscriminantEvaluator::new(phi);
    let mut prev = f64::INFINITY;
    for tau in [5.0, 10.0, 20.0] {
        let (d, _) = ev.delta(Complex64::new(0.0, tau)).unwrap();
        let dev = (d / (2.0 * f64::cosh(tau)) - 1.0).norm();
        assert!(dev < prev, "τ = {tau}: {dev}");
        prev = dev;
    }
    assert!(prev < 0.05);
}

#[test]
fn short_gaps_are_resolved_in_the_shifted_frame() {
    let phi = random(Decay::Sobolev, 4);
    let (ev, sp) = spectrum_of(&phi, 12);
    let short: Vec<_> = sp.open_gaps().filter(|g| wants_local_frame(g)).collect();
    assert!(!short.is_empty());
    for g in short {
        let local = LocalGap::from_spectrum(&ev, &sp, g.n).unwrap();
        let back = local.global();
        assert_eq!(back.n, g.n);
        assert!((back.gamma - g.gamma).abs() <= 1e-6 * g.gamma);
        assert!((back.tau - g.tau).abs() <= 1e-13 * g.tau.abs());
        // the shifted potential sees this gap at index 0
        let v = local.ev.values(Complex64::from(local.gap.tau), 0).unwrap();
        assert!(v.delta.re > 0.0 && v.disc.re > 0.0);
    }
}
