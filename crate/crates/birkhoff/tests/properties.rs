use std::f64::consts::PI;

use birkhoff::config::{parse_json, PotentialSpec};
use birkhoff::prelude::*;
use proptest::prelude::*;

/// Small real-type potentials with band ≤ 3, so that spectra stay cheap.
fn small_potential() -> impl Strategy<Value = FourierPotential> {
    prop::collection::vec((-3i64..=3, -0.15f64..0.15, -0.15f64..0.15), 1..4).prop_map(|cs| {
        FourierPotential::real_type(cs.into_iter().map(|(k, re, im)| (k, Complex64::new(re, im)))).unwrap()
    })
}

fn spectrum(phi: &FourierPotential, n_max: i64) -> PeriodicSpectrum {
    let ev = DiscriminantEvaluator::new(phi.clone());
    let n = n_max.max(localisation_threshold(phi).unwrap() + 2);
    locate_spectrum(&ev, n).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

    #[test]
    fn discriminant_is_real_on_the_real_axis(phi in small_potential(), x in -30.0f64..30.0, y in -2.0f64..2.0) {
        let ev = DiscriminantEvaluator::new(phi);
        let (d, _) = ev.delta(Complex64::from(x)).unwrap();
        prop_assert!(d.im.abs() < 1e-10 * d.norm().max(1.0));
        // Δ(λ̄) = conj Δ(λ)
        let (a, _) = ev.delta(Complex64::new(x, y)).unwrap();
        let (b, _) = ev.delta(Complex64::new(x, -y)).unwrap();
        prop_assert!((a - b.conj()).norm() < 1e-9 * a.norm().max(1.0));
    }

    #[test]
    fn gauge_shift_translates_eigenvalues(phi in small_potential(), m in -2i64..=2) {
        let sp = spectrum(&phi, 8);
        let shifted = spectrum(&gauge_shift(&phi, m).unwrap(), 8 + m.abs());
        for g in sp.entries.iter().filter(|g| g.n.abs() <= 6) {
            let h = shifted.get(g.n + m).unwrap();
            let c = m as f64 * PI;
            prop_assert!((h.lambda_minus - g.lambda_minus - c).abs() < 1e-8, "n = {}", g.n);
            prop_assert!((h.lambda_plus - g.lambda_plus - c).abs() < 1e-8, "n = {}", g.n);
        }
    }

    #[test]
    fn parseval_and_first_hamiltonian(phi in small_potential()) {
        let ev = DiscriminantEvaluator::new(phi.clone());
        let sp = spectrum(&phi, 10);
        let acts = compute_actions(&ev, &sp, &[1], ActionMethod::GapIntegral, &ActionConfig::default()).unwrap();
        let n0 = sobolev_norm(&phi, 0.0).unwrap();
        let (sum, tail) = acts.level_sum(1).unwrap();
        prop_assert!((2.0 * (sum + tail) - n0 * n0).abs() <= 1e-8 * (n0 * n0).max(1e-12));
        let h = hierarchy_compute(&phi, 1).unwrap();
        prop_assert!((h.hamiltonian(1).unwrap().re - 0.5 * n0 * n0).abs() < 1e-12);
        prop_assert!(acts.i.iter().all(|&i| i >= 0.0));
    }

    #[test]
    fn gaps_are_ordered(phi in small_potential()) {
        let sp = spectrum(&phi, 8);
        for w in sp.entries.windows(2) {
            prop_assert!(w[0].lambda_minus <= w[0].lambda_plus);
            prop_assert!(w[0].lambda_plus < w[1].lambda_minus);
            prop_assert!(w[0].gamma >= 0.0);
        }
    }
}

proptest! {
    #[test]
    fn sobolev_norm_is_monotone_in_s(phi in small_potential(), s in 0.0f64..3.0, ds in 0.0f64..2.0) {
        prop_assert!(sobolev_norm(&phi, s).unwrap() <= sobolev_norm(&phi, s + ds).unwrap() * (1.0 + 1e-15));
    }

    #[test]
    fn weights_are_submultiplicative(s in 0.0f64..3.0, a in 0.0f64..0.5, n in -40i64..40, m in -40i64..40) {
        for w in [Weight::sobolev(s).unwrap(), Weight::abel(s, a.max(1e-3)).unwrap()] {
            let lhs = w.value(n + m).unwrap();
            prop_assert!(lhs <= w.value(n).unwrap() * w.value(m).unwrap() * (1.0 + 1e-12));
            prop_assert!(w.value(n).unwrap() == w.value(-n).unwrap());
        }
    }

    #[test]
    fn weight_extension_interpolates(s in 0.0f64..3.0, t in 0.0f64..30.0) {
        let w = Weight::sobolev(s).unwrap();
        let e = w.extension(t).unwrap();
        let lo = w.value(t.floor() as i64).unwrap();
        let hi = w.value(t.ceil() as i64).unwrap();
        prop_assert!(e >= lo * (1.0 - 1e-12) && e <= hi * (1.0 + 1e-12));
    }

    #[test]
    fn gauge_shift_round_trips(phi in small_potential(), m in -5i64..5) {
        let back = gauge_shift(&gauge_shift(&phi, m).unwrap(), -m).unwrap();
        for k in -3..=3 {
            prop_assert_eq!(back.coeff(k), phi.coeff(k));
        }
    }

    #[test]
    fn potential_specs_round_trip(a in -5.0f64..5.0, k in -6i64..6, re in -1.0f64..1.0, im in -1.0f64..1.0) {
        for spec in [
            PotentialSpec::Constant { a },
            PotentialSpec::Fourier { coeffs: vec![birkhoff::config::CoeffEntry { k, re, im }], plus: None },
        ] {
            let text = serde_json::to_string(&spec).unwrap();
            let back: PotentialSpec = parse_json(&text).unwrap();
            prop_assert_eq!(&back, &spec);
        }
    }
}
