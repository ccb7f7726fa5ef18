//! Seeded random families of smooth band-limited potentials.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potentials::{bracket, sobolev_norm, FourierPotential};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Decay {
    Sobolev,
    Abel,
}

/// Coefficient law c_k = A·⟨2πk⟩^{−s−1}·(e^{−a|k|} for Abel)·e^{iθ_k}.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomSpec {
    #[serde(rename = "K")]
    pub band: usize,
    pub decay: Decay,
    pub s: f64,
    #[serde(default)]
    pub a: f64,
    pub seed: u64,
    pub amplitude: f64,
}

impl RandomSpec {
    fn check(&self) -> Result<()> {
        if !(self.s >= 0.0) || !(self.amplitude.is_finite()) || (self.decay == Decay::Abel && !(self.a > 0.0)) {
            return Err(Error::InvalidArgument(format!("bad random potential parameters {self:?}")));
        }
        Ok(())
    }

    /// One draw with the given amplitude from `rng`.
    fn draw<R: Rng>(&self, amplitude: f64, rng: &mut R) -> Result<FourierPotential> {
        let k = self.band as i64;
        let coeffs = (-k..=k).map(|j| {
            let mut mag = amplitude * bracket(2.0 * PI * j as f64).powf(-self.s - 1.0);
            if self.decay == Decay::Abel {
                mag *= (-self.a * j.abs() as f64).exp();
            }
            let theta = rng.random::<f64>() * 2.0 * PI;
            (j, Complex64::from_polar(mag, theta))
        });
        FourierPotential::real_type(coeffs.collect::<Vec<_>>())
    }

    /// The single potential described by this spec.
    pub fn potential(&self) -> Result<FourierPotential> {
        self.check()?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        self.draw(self.amplitude, &mut rng)
    }
}

/// A family of `members` potentials; member i depends only on (spec, i), so
/// a larger family extends a smaller one with the same seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub members: usize,
    #[serde(flatten)]
    pub law: RandomSpec,
    /// Cap on ‖φ‖₁; members above it are rescaled onto it.
    #[serde(default = "default_cap")]
    pub norm_cap: f64,
}

fn default_cap() -> f64 {
    2.0
}

impl FamilySpec {
    pub fn sobolev(members: usize, seed: u64) -> Self {
        Self {
            members,
            law: RandomSpec { band: 8, decay: Decay::Sobolev, s: 1.0, a: 0.0, seed, amplitude: 2.5 },
            norm_cap: 2.0,
        }
    }

    pub fn abel(members: usize, seed: u64) -> Self {
        Self {
            members,
            law: RandomSpec { band: 8, decay: Decay::Abel, s: 1.0, a: 0.2, seed, amplitude: 2.5 },
            norm_cap: 2.0,
        }
    }

    pub fn member(&self, i: usize) -> Result<FourierPotential> {
        self.law.check()?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.law.seed.wrapping_mul(1_000_003).wrapping_add(i as u64));
        let amp = self.law.amplitude * rng.random_range(0.2..1.0);
        let phi = self.law.draw(amp, &mut rng)?;
        let n1 = sobolev_norm(&phi, 1.0)?;
        if n1 > self.norm_cap {
            Ok(phi.scaled(self.norm_cap / n1 * (1.0 - 1e-12)))
        } else {
            Ok(phi)
        }
    }

    pub fn generate(&self) -> Result<Vec<FourierPotential>> {
        (0..self.members).map(|i| self.member(i)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn members_are_reproducible_and_capped() {
        let f = FamilySpec::sobolev(10, 42);
        let a = f.generate().unwrap();
        let b = FamilySpec::sobolev(20, 42).generate().unwrap();
        assert_eq!(&a[..], &b[..10]);
        for p in &a {
            assert!(p.is_real_type());
            assert!(sobolev_norm(p, 1.0).unwrap() <= 2.0);
            assert_eq!(p.band(), 8);
        }
        assert_ne!(a[0], a[1]);
    }

    #[test]
    fn coefficient_law() {
        let spec = RandomSpec { band: 3, decay: Decay::Abel, s: 1.0, a: 0.5, seed: 9, amplitude: 2.0 };
        let p = spec.potential().unwrap();
        for (k, c) in p.coeffs() {
            let want = 2.0 * bracket(2.0 * PI * k as f64).powi(-2) * (-0.5 * k.abs() as f64).exp();
            assert!((c.norm() - want).abs() < 1e-14);
        }
    }
}
