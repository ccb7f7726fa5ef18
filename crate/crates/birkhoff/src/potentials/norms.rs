use std::f64::consts::PI;

use super::{bracket, FourierPotential, Weight};
use crate::error::{Error, Result};

/// Pairwise summation, used for every norm so results do not depend on
/// accumulation order beyond the fixed binary tree.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        n if n <= 8 => xs.iter().sum(),
        n => {
            let (a, b) = xs.split_at(n / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}

/// Which component of φ.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Component {
    Minus,
    Plus,
}

/// ‖φ‖_s with ‖φ‖_s² = Σ_k ⟨2πk⟩^{2s}(|c_k|² + |d_k|²).
pub fn sobolev_norm(phi: &FourierPotential, s: f64) -> Result<f64> {
    if !(s >= 0.0) {
        return Err(Error::InvalidArgument(format!("Sobolev exponent must be >= 0, got {s}")));
    }
    let terms: Vec<f64> = phi
        .coeffs()
        .zip(phi.coeffs_plus())
        .map(|((k, c), (_, d))| bracket(2.0 * PI * k as f64).powf(2.0 * s) * (c.norm_sqr() + d.norm_sqr()))
        .collect();
    Ok(pairwise_sum(&terms).sqrt())
}

/// ‖φ‖_w with ‖φ‖_w² = Σ_k w_{2k}²(|c_k|² + |d_k|²).
pub fn weighted_norm(phi: &FourierPotential, w: &Weight) -> Result<f64> {
    Ok(weighted_terms(phi, w, None, 0)?.sqrt())
}

/// ‖φ_±‖_w, the weighted norm of one component.
pub fn component_norm(phi: &FourierPotential, w: &Weight, which: Component) -> Result<f64> {
    Ok(weighted_terms(phi, w, Some(which), 0)?.sqrt())
}

/// ‖R_N φ‖_w, the weighted norm of the modes with |k| ≥ N.
pub fn remainder_norm(phi: &FourierPotential, w: &Weight, n: i64) -> Result<f64> {
    Ok(weighted_terms(phi, w, None, n)?.sqrt())
}

/// ‖ψ‖₀² = Σ|c_k|² (ψ = φ₋).
pub fn psi_l2_sqr(phi: &FourierPotential) -> f64 {
    let t: Vec<f64> = phi.coeffs().map(|(_, c)| c.norm_sqr()).collect();
    pairwise_sum(&t)
}

/// ∫|∂ˣᵐψ|² dx = Σ (2πk)^{2m}|c_k|².
pub fn derivative_energy(phi: &FourierPotential, m: u32) -> f64 {
    let t: Vec<f64> = phi
        .coeffs()
        .map(|(k, c)| (2.0 * PI * k as f64).powi(2 * m as i32) * c.norm_sqr())
        .collect();
    pairwise_sum(&t)
}

fn weighted_terms(phi: &FourierPotential, w: &Weight, which: Option<Component>, from: i64) -> Result<f64> {
    let mut terms = Vec::with_capacity(2 * phi.band() + 1);
    for ((k, c), (_, d)) in phi.coeffs().zip(phi.coeffs_plus()) {
        if k.abs() < from {
            continue;
        }
        let mag = match which {
            None => c.norm_sqr() + d.norm_sqr(),
            Some(Component::Minus) => c.norm_sqr(),
            Some(Component::Plus) => d.norm_sqr(),
        };
        if mag == 0.0 {
            continue;
        }
        let wk = w.value(2 * k)?;
        terms.push(wk * wk * mag);
    }
    Ok(pairwise_sum(&terms))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn sobolev_examples() {
        assert_eq!(sobolev_norm(&FourierPotential::zero(), 1.0).unwrap(), 0.0);
        let c = FourierPotential::constant(0.5);
        assert!((sobolev_norm(&c, 0.0).unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
        let e = FourierPotential::real_type([(1, Complex64::new(1.0, 0.0))]).unwrap();
        let want = 2f64.sqrt() * (1.0 + 2.0 * PI);
        assert!((sobolev_norm(&e, 1.0).unwrap() - want).abs() < 1e-13);
        assert!(sobolev_norm(&c, -0.1).is_err());
    }

    #[test]
    fn weighted_examples() {
        let e = FourierPotential::real_type([(1, Complex64::new(1.0, 0.0))]).unwrap();
        let abel = Weight::abel(0.0, 1.0).unwrap();
        let want = 2f64.sqrt() * 1f64.exp().powi(2);
        assert!((weighted_norm(&e, &abel).unwrap() - want).abs() < 1e-13);
        let a = 0.3;
        let c = FourierPotential::constant(a);
        for w in [Weight::sobolev(2.0).unwrap(), Weight::gevrey(1.0, 1.0, 0.5).unwrap()] {
            let w0 = w.value(0).unwrap();
            assert!((weighted_norm(&c, &w).unwrap() - w0 * 2f64.sqrt() * a).abs() < 1e-15);
        }
    }

    #[test]
    fn table_range_error() {
        let e = FourierPotential::real_type([(3, Complex64::new(1.0, 0.0))]).unwrap();
        let w = Weight::custom_symmetric(&[1.0, 2.0, 3.0]).unwrap();
        assert!(matches!(weighted_norm(&e, &w), Err(Error::WeightRange { index: 6, .. })));
    }

    #[test]
    fn pairwise_matches_naive() {
        let xs: Vec<f64> = (0..1000).map(|i| 1.0 / (1.0 + i as f64)).collect();
        let naive: f64 = xs.iter().sum();
        assert!((pairwise_sum(&xs) - naive).abs() < 1e-12);
    }
}
