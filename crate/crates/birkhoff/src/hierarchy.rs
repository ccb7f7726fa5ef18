//! NLS hierarchy Hamiltonians from the recursion
//!
//! u₁ = −φ₊,  u_{k+1} = u_k′ + φ₋ Σ_{l=1}^{k−1} u_{k−l} u_l,  H_k = s_k ∫ φ₋ u_k dx.
//!
//! Everything is a trigonometric polynomial, so derivatives and products are
//! done exactly on Fourier coefficients.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::actions::ActionSpectrum;
use crate::error::{Error, Result};
use crate::potentials::{derivative_energy, psi_l2_sqr, FourierPotential};

type C = Complex64;

pub const MAX_LEVEL: usize = 9;

/// Σ_{j=−B}^{B} a_j e^{2πijx}.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrigPoly {
    band: usize,
    coeffs: Vec<C>,
}

impl TrigPoly {
    pub fn zero() -> Self {
        Self { band: 0, coeffs: vec![C::new(0.0, 0.0)] }
    }

    pub fn band(&self) -> usize {
        self.band
    }

    pub fn coeff(&self, j: i64) -> C {
        if j.unsigned_abs() as usize > self.band {
            C::new(0.0, 0.0)
        } else {
            self.coeffs[(j + self.band as i64) as usize]
        }
    }

    /// Largest |j| with a nonzero coefficient.
    pub fn effective_band(&self) -> usize {
        let b = self.band as i64;
        (0..=b).rev().find(|&j| self.coeff(j) != C::new(0.0, 0.0) || self.coeff(-j) != C::new(0.0, 0.0)).unwrap_or(0) as usize
    }

    fn from_fn(band: usize, f: impl Fn(i64) -> C) -> Self {
        let b = band as i64;
        Self { band, coeffs: (-b..=b).map(f).collect() }
    }

    pub fn derivative(&self) -> Self {
        Self::from_fn(self.band, |j| self.coeff(j) * C::new(0.0, 2.0 * PI * j as f64))
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::from_fn(self.band.max(o.band), |j| self.coeff(j) + o.coeff(j))
    }

    pub fn scale(&self, s: C) -> Self {
        Self::from_fn(self.band, |j| self.coeff(j) * s)
    }

    pub fn mul(&self, o: &Self) -> Self {
        let band = self.band + o.band;
        let mut out = vec![C::new(0.0, 0.0); 2 * band + 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if *a == C::new(0.0, 0.0) {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self { band, coeffs: out }
    }

    /// ∫₀¹ f g dx.
    pub fn pair(&self, o: &Self) -> C {
        let b = self.band.min(o.band) as i64;
        (-b..=b).map(|j| self.coeff(j) * o.coeff(-j)).sum()
    }

    pub fn eval(&self, x: f64) -> C {
        let b = self.band as i64;
        (-b..=b).map(|j| self.coeff(j) * C::from_polar(1.0, 2.0 * PI * j as f64 * x)).sum()
    }
}

/// φ₋ and φ₊ as trigonometric polynomials.
pub fn components(phi: &FourierPotential) -> (TrigPoly, TrigPoly) {
    let k = phi.band();
    let minus = TrigPoly::from_fn(k, |j| phi.coeff(-j));
    let plus = TrigPoly::from_fn(k, |j| phi.coeff_plus(j));
    (minus, plus)
}

/// Sign s_k attached to ∫φ₋u_k.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HierarchySign {
    /// s₁ = −1, s_k = +1 otherwise: H₁ = ∫φ₋φ₊, H₂ = ½∫(φ₋′φ₊ − φ₋φ₊′),
    /// H₃ = ∫(φ₋′φ₊′ + φ₋²φ₊²).
    #[default]
    Calibrated,
    /// s_k = (−1)^k.
    Alternating,
    /// s_k = +1.
    PaperAppendix,
}

impl HierarchySign {
    pub fn sign(self, k: usize) -> f64 {
        match self {
            Self::Calibrated => {
                if k == 1 {
                    -1.0
                } else {
                    1.0
                }
            }
            Self::Alternating => {
                if k % 2 == 0 {
                    1.0
                } else {
                    -1.0
                }
            }
            Self::PaperAppendix => 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HierarchyEvaluation {
    /// Size of the coefficient grid (a power of two); every u_k fits in half of it.
    pub grid_size: usize,
    pub k_max: usize,
    pub sign: HierarchySign,
    /// u_k at index k − 1.
    pub u: Vec<TrigPoly>,
    /// ∫φ₋u_k at index k − 1.
    pub raw: Vec<C>,
    /// H_k = s_k ∫φ₋u_k at index k − 1.
    pub h: Vec<C>,
}

impl HierarchyEvaluation {
    /// H_k for 1 ≤ k ≤ k_max.
    pub fn hamiltonian(&self, k: usize) -> Result<C> {
        if k == 0 || k > self.k_max {
            return Err(Error::InvalidArgument(format!("level {k} outside 1..={}", self.k_max)));
        }
        Ok(self.h[k - 1])
    }

    /// The value predicted for Σₙ J_{n,k}: −∫φ₋u_k/(2i)^{k−1}.
    pub fn trace_value(&self, k: usize) -> Result<C> {
        self.hamiltonian(k)?;
        Ok(-self.raw[k - 1] / C::new(0.0, 2.0).powi(k as i32 - 1))
    }
}

pub fn default_grid_size(band: usize, k_max: usize) -> usize {
    (4 * (band + 1) * (k_max + 1)).next_power_of_two()
}

pub fn hierarchy_compute(phi: &FourierPotential, k_max: usize) -> Result<HierarchyEvaluation> {
    hierarchy_compute_with(phi, k_max, HierarchySign::default(), None)
}

/// As [`hierarchy_compute`] with an explicit sign rule and grid size.
pub fn hierarchy_compute_with(
    phi: &FourierPotential,
    k_max: usize,
    sign: HierarchySign,
    grid_size: Option<usize>,
) -> Result<HierarchyEvaluation> {
    if k_max == 0 || k_max > MAX_LEVEL {
        return Err(Error::InvalidArgument(format!("k_max must lie in 1..={MAX_LEVEL}")));
    }
    let band = phi.band();
    let grid_size = grid_size.unwrap_or_else(|| default_grid_size(band, k_max));
    let (minus, plus) = components(phi);
    let mut u: Vec<TrigPoly> = vec![plus.scale(C::new(-1.0, 0.0))];
    for k in 1..k_max {
        let mut next = u[k - 1].derivative();
        if k >= 2 {
            let mut acc = TrigPoly::zero();
            for l in 1..k {
                acc = acc.add(&u[k - 1 - l].mul(&u[l - 1]));
            }
            next = next.add(&minus.mul(&acc));
        }
        u.push(next);
    }
    for (k, uk) in u.iter().enumerate() {
        let need = uk.effective_band();
        if need > (k + 1) * band {
            return Err(Error::Convergence(format!("u_{} has band {need} > {}", k + 1, (k + 1) * band)));
        }
        if 2 * need + 1 > grid_size {
            return Err(Error::GridSize { required: (2 * need + 1).next_power_of_two(), given: grid_size });
        }
    }
    let raw: Vec<C> = u.iter().map(|uk| minus.pair(uk)).collect();
    let h = raw.iter().enumerate().map(|(i, r)| r * sign.sign(i + 1)).collect();
    Ok(HierarchyEvaluation { grid_size, k_max, sign, u, raw, h })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TraceReport {
    pub k: usize,
    /// Σ_{|n|≤N_max} J_{n,k}
    pub sum: f64,
    pub tail: f64,
    /// −∫φ₋u_k/(2i)^{k−1}
    pub expected: C,
    /// |sum + tail − expected| / max(|expected|, Σₙ|J_{n,k}|), absolute if both vanish.
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

pub const TRACE_TOLERANCE: [f64; 2] = [1e-5, 1e-4];

/// Compare Σₙ J_{n,k} with the hierarchy. The default tolerance is 1e-5 for
/// k = 1 and 1e-4 otherwise.
pub fn trace_check(hier: &HierarchyEvaluation, acts: &ActionSpectrum, k: usize) -> Result<TraceReport> {
    let expected = hier.trace_value(k)?;
    let (sum, tail) = acts
        .level_sum(k as u32)
        .ok_or_else(|| Error::InvalidArgument(format!("level {k} was not computed")))?;
    let tail = tail.copysign(sum);
    let diff = (C::from(sum + tail) - expected).norm();
    let l = acts.levels.iter().position(|&x| x as usize == k).unwrap_or(0);
    let mass: f64 = acts.j[l].iter().map(|x| x.abs()).sum();
    let scale = expected.norm().max(mass);
    let residual = if scale > 0.0 { diff / scale } else { diff };
    let tolerance = if k == 1 { TRACE_TOLERANCE[0] } else { TRACE_TOLERANCE[1] };
    Ok(TraceReport { k, sum, tail, expected, residual, tolerance, passed: residual <= tolerance })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HformReport {
    pub m: usize,
    /// (−1)^{m+1} H_{2m+1}
    pub hamiltonian: f64,
    /// ∫|ψ^{(m)}|²
    pub derivative_energy: f64,
    /// r_m = (−1)^{m+1}H_{2m+1} − ∫|ψ^{(m)}|²
    pub remainder: f64,
    /// Imaginary part of H_{2m+1}.
    pub imag: f64,
    /// ‖ψ‖₀²
    pub psi_sqr: f64,
    /// Smallest C with |r_m| ≤ ∫|ψ^{(m)}|² + C(1 + ‖ψ‖₀^{4m})‖ψ‖₀².
    pub constant: f64,
    pub passed: bool,
}

pub fn hform_check(phi: &FourierPotential, m: usize) -> Result<HformReport> {
    if !phi.is_real_type() {
        return Err(Error::NotRealType);
    }
    if m == 0 || 2 * m + 1 > MAX_LEVEL {
        return Err(Error::InvalidArgument(format!("m must lie in 1..={}", (MAX_LEVEL - 1) / 2)));
    }
    let hier = hierarchy_compute(phi, 2 * m + 1)?;
    hform_from(&hier, phi, m)
}

/// [`hform_check`] on an already computed hierarchy (k_max ≥ 2m + 1).
pub fn hform_from(hier: &HierarchyEvaluation, phi: &FourierPotential, m: usize) -> Result<HformReport> {
    let hk = hier.hamiltonian(2 * m + 1)?;
    let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
    let hamiltonian = sign * hk.re;
    let energy = derivative_energy(phi, m as u32);
    let remainder = hamiltonian - energy;
    let psi_sqr = psi_l2_sqr(phi);
    let denom = (1.0 + psi_sqr.powi(2 * m as i32)) * psi_sqr;
    let excess = (remainder.abs() - energy).max(0.0);
    let constant = if denom > 0.0 { excess / denom } else { 0.0 };
    Ok(HformReport {
        m,
        hamiltonian,
        derivative_energy: energy,
        remainder,
        imag: hk.im,
        psi_sqr,
        constant,
        passed: constant.is_finite() && hk.im.abs() <= 1e-10 * hk.norm().max(1e-300) + 1e-300,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::gauge_shift;

    fn close(a: C, b: f64, tol: f64) -> bool {
        (a - b).norm() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn zero_potential() {
        let h = hierarchy_compute(&FourierPotential::zero(), 7).unwrap();
        assert!(h.h.iter().all(|x| x.norm() == 0.0));
    }

    #[test]
    fn constant_hamiltonians() {
        let a: f64 = 0.5;
        let h = hierarchy_compute(&FourierPotential::constant(a), 7).unwrap();
        assert!(close(h.h[0], 0.25, 1e-15));
        assert!(close(h.h[1], 0.0, 1e-15));
        assert!(close(h.h[2], a.powi(4), 1e-15));
        assert!(close(h.h[4], -2.0 * a.powi(6), 1e-15));
        assert!(close(h.trace_value(3).unwrap(), a.powi(4) / 4.0, 1e-15));
        assert!(close(h.trace_value(5).unwrap(), a.powi(6) / 8.0, 1e-15));
    }

    #[test]
    fn single_mode() {
        let phi = gauge_shift(&FourierPotential::constant(0.5), 1).unwrap();
        let h = hierarchy_compute(&phi, 3).unwrap();
        assert!(close(h.h[0], 0.25, 1e-14));
        assert!(close(h.h[2], 0.25 * 4.0 * PI * PI + 0.0625, 1e-13));
    }

    #[test]
    fn explicit_low_hamiltonians() {
        let phi = FourierPotential::real_type([(-1, C::new(0.3, 0.1)), (0, C::new(0.2, 0.0)), (2, C::new(-0.1, 0.05))]).unwrap();
        let (m, p) = components(&phi);
        let h = hierarchy_compute(&phi, 3).unwrap();
        let h1 = m.pair(&p);
        let h2 = (m.derivative().pair(&p) - m.pair(&p.derivative())) * 0.5;
        let h3 = m.derivative().pair(&p.derivative()) + m.mul(&m).pair(&p.mul(&p));
        assert!((h.h[0] - h1).norm() < 1e-14);
        assert!((h.h[1] - h2).norm() < 1e-13);
        assert!((h.h[2] - h3).norm() < 1e-12);
    }

    #[test]
    fn sign_rules() {
        let h = hierarchy_compute_with(&FourierPotential::constant(0.5), 3, HierarchySign::Alternating, None).unwrap();
        assert!(close(h.h[2], -0.0625, 1e-15));
        let h = hierarchy_compute_with(&FourierPotential::constant(0.5), 3, HierarchySign::PaperAppendix, None).unwrap();
        assert!(close(h.h[0], -0.25, 1e-15));
    }

    #[test]
    fn grid_too_small() {
        let phi = FourierPotential::real_type([(0, C::new(0.5, 0.0)), (3, C::new(0.1, 0.0))]).unwrap();
        assert!(matches!(
            hierarchy_compute_with(&phi, 5, HierarchySign::default(), Some(8)),
            Err(Error::GridSize { .. })
        ));
    }

    #[test]
    fn hform_constant() {
        let r = hform_check(&FourierPotential::constant(0.5), 1).unwrap();
        assert!((r.remainder - 0.0625).abs() < 1e-15);
        assert_eq!(r.derivative_energy, 0.0);
        assert!(r.passed);
        let z = hform_check(&FourierPotential::zero(), 2).unwrap();
        assert_eq!(z.remainder, 0.0);
    }
}
