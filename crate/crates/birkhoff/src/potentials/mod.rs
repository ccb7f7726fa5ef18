//! Band-limited potentials of the Zakharov–Shabat operator.
//!
//! A potential is a pair φ = (φ₋, φ₊) of 1-periodic functions given by
//! finitely many Fourier coefficients
//!
//! ```text
//! φ₋(x) = Σ_k c_k e^{-2πikx},    φ₊(x) = Σ_k d_k e^{2πikx},    |k| ≤ K.
//! ```
//!
//! With this orientation `c_k` is the coefficient φ⁻_{2k} and `d_k` is φ⁺_{2k},
//! so a single mode `k` opens the gap with index `k`. A potential of real type
//! has φ₊ = conj(φ₋), i.e. `d_k = conj(c_k)`, and we write ψ = φ₋.

mod norms;
mod weight;

pub use norms::*;
pub use weight::*;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Japanese bracket ⟨x⟩ = 1 + |x|.
#[inline]
pub fn bracket(x: f64) -> f64 {
    1.0 + x.abs()
}

#[derive(Clone, Debug, PartialEq)]
pub struct FourierPotential {
    band: usize,
    minus: Vec<Complex64>,
    plus: Vec<Complex64>,
    real_type: bool,
}

impl FourierPotential {
    /// The zero potential.
    pub fn zero() -> Self {
        Self {
            band: 0,
            minus: vec![Complex64::new(0.0, 0.0)],
            plus: vec![Complex64::new(0.0, 0.0)],
            real_type: true,
        }
    }

    /// Real-type constant ψ ≡ a.
    pub fn constant(a: f64) -> Self {
        Self::constant_complex(Complex64::new(a, 0.0))
    }

    pub fn constant_complex(a: Complex64) -> Self {
        Self {
            band: 0,
            minus: vec![a],
            plus: vec![a.conj()],
            real_type: true,
        }
    }

    /// Real-type potential from `(k, c_k)` pairs. Repeated frequencies are summed.
    pub fn real_type<I>(coeffs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (i64, Complex64)>,
    {
        let pairs: Vec<(i64, Complex64)> = coeffs.into_iter().collect();
        let minus = dense(&pairs)?;
        let plus = minus.iter().map(|c| c.conj()).collect();
        let band = (minus.len() - 1) / 2;
        Ok(Self { band, minus, plus, real_type: true })
    }

    /// Real-type potential from a dense coefficient vector `c_{-K}, …, c_K`.
    pub fn from_dense(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() % 2 == 0 {
            return Err(Error::InvalidArgument(
                "dense coefficient vector must have odd length 2K+1".into(),
            ));
        }
        check_finite(&coeffs)?;
        let band = (coeffs.len() - 1) / 2;
        let plus = coeffs.iter().map(|c| c.conj()).collect();
        Ok(Self { band, minus: coeffs, plus, real_type: true })
    }

    /// General pair (φ₋, φ₊) with independent coefficients. Only the
    /// discriminant accepts such potentials.
    pub fn general<I, J>(minus: I, plus: J) -> Result<Self>
    where
        I: IntoIterator<Item = (i64, Complex64)>,
        J: IntoIterator<Item = (i64, Complex64)>,
    {
        let m: Vec<_> = minus.into_iter().collect();
        let p: Vec<_> = plus.into_iter().collect();
        let band = m.iter().chain(p.iter()).map(|(k, _)| k.unsigned_abs() as usize).max().unwrap_or(0);
        let mut md = dense(&m)?;
        let mut pd = dense(&p)?;
        pad(&mut md, band);
        pad(&mut pd, band);
        Ok(Self { band, minus: md, plus: pd, real_type: false })
    }

    /// Largest frequency K.
    pub fn band(&self) -> usize {
        self.band
    }

    pub fn is_real_type(&self) -> bool {
        self.real_type
    }

    pub fn is_zero(&self) -> bool {
        self.minus.iter().chain(self.plus.iter()).all(|c| c.norm_sqr() == 0.0)
    }

    /// c_k, the coefficient of e^{-2πikx} in φ₋ (zero outside the band).
    pub fn coeff(&self, k: i64) -> Complex64 {
        self.slot(&self.minus, k)
    }

    /// d_k, the coefficient of e^{2πikx} in φ₊.
    pub fn coeff_plus(&self, k: i64) -> Complex64 {
        self.slot(&self.plus, k)
    }

    /// φ⁻_m in the doubled-frequency indexing (zero for odd m).
    pub fn phi_minus(&self, m: i64) -> Complex64 {
        if m.rem_euclid(2) == 1 {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeff(m / 2)
        }
    }

    /// φ⁺_m in the doubled-frequency indexing (zero for odd m).
    pub fn phi_plus(&self, m: i64) -> Complex64 {
        if m.rem_euclid(2) == 1 {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeff_plus(m / 2)
        }
    }

    /// Coefficients `(k, c_k)` for |k| ≤ K.
    pub fn coeffs(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        let b = self.band as i64;
        self.minus.iter().enumerate().map(move |(i, c)| (i as i64 - b, *c))
    }

    /// Coefficients `(k, d_k)` for |k| ≤ K.
    pub fn coeffs_plus(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        let b = self.band as i64;
        self.plus.iter().enumerate().map(move |(i, c)| (i as i64 - b, *c))
    }

    /// (φ₋(x), φ₊(x)).
    pub fn eval(&self, x: f64) -> (Complex64, Complex64) {
        let mut m = Complex64::new(0.0, 0.0);
        let mut p = Complex64::new(0.0, 0.0);
        for ((k, c), (_, d)) in self.coeffs().zip(self.coeffs_plus()) {
            let e = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 * x);
            m += c * e.conj();
            p += d * e;
        }
        (m, p)
    }

    /// tφ.
    pub fn scaled(&self, t: f64) -> Self {
        Self {
            band: self.band,
            minus: self.minus.iter().map(|c| c * t).collect(),
            plus: self.plus.iter().map(|c| c * t).collect(),
            real_type: self.real_type,
        }
    }

    fn slot(&self, v: &[Complex64], k: i64) -> Complex64 {
        let b = self.band as i64;
        if k.abs() > b {
            Complex64::new(0.0, 0.0)
        } else {
            v[(k + b) as usize]
        }
    }
}

/// Multiplies ψ by e^{-2πimx} in our orientation, which maps c_k to c_{k-m}
/// and translates the periodic spectrum by mπ.
pub fn gauge_shift(phi: &FourierPotential, m: i64) -> Result<FourierPotential> {
    if !phi.is_real_type() {
        return Err(Error::NotRealType);
    }
    if m == 0 {
        return Ok(phi.clone());
    }
    FourierPotential::real_type(phi.coeffs().filter(|(_, c)| c.norm_sqr() > 0.0).map(|(k, c)| (k + m, c)))
        .map(|p| if p.is_zero() { FourierPotential::zero() } else { p })
}

fn dense(pairs: &[(i64, Complex64)]) -> Result<Vec<Complex64>> {
    let band = pairs.iter().map(|(k, _)| k.unsigned_abs() as usize).max().unwrap_or(0);
    let mut v = vec![Complex64::new(0.0, 0.0); 2 * band + 1];
    for (k, c) in pairs {
        if !c.re.is_finite() || !c.im.is_finite() {
            return Err(Error::InvalidArgument(format!("non-finite coefficient at k = {k}")));
        }
        v[(*k + band as i64) as usize] += c;
    }
    Ok(v)
}

fn pad(v: &mut Vec<Complex64>, band: usize) {
    let cur = (v.len() - 1) / 2;
    if cur < band {
        let extra = band - cur;
        let mut out = vec![Complex64::new(0.0, 0.0); extra];
        out.extend_from_slice(v);
        out.resize(out.len() + extra, Complex64::new(0.0, 0.0));
        *v = out;
    }
}

fn check_finite(v: &[Complex64]) -> Result<()> {
    if v.iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidArgument("non-finite coefficient".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn real_type_plus_is_conjugate() {
        let p = FourierPotential::real_type([(-1, c(0.1, 0.2)), (2, c(0.3, -0.4))]).unwrap();
        assert_eq!(p.band(), 2);
        for k in -2..=2 {
            assert_eq!(p.coeff_plus(k), p.coeff(k).conj());
        }
        let (m, pl) = p.eval(0.37);
        assert!((m.conj() - pl).norm() < 1e-15);
    }

    #[test]
    fn eval_orientation() {
        let p = FourierPotential::real_type([(1, c(1.0, 0.0))]).unwrap();
        let x = 0.1;
        let (m, _) = p.eval(x);
        let expect = Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * x);
        assert!((m - expect).norm() < 1e-15);
    }

    #[test]
    fn gauge_shift_examples() {
        let p = gauge_shift(&FourierPotential::constant(0.5), 1).unwrap();
        assert_eq!(p.coeff(1), c(0.5, 0.0));
        assert_eq!(p.coeff(0), c(0.0, 0.0));
        let q = FourierPotential::real_type([(1, c(1.0, 0.0))]).unwrap();
        let r = gauge_shift(&q, -1).unwrap();
        assert_eq!(r.band(), 0);
        assert_eq!(r.coeff(0), c(1.0, 0.0));
        assert_eq!(gauge_shift(&q, 0).unwrap(), q);
    }

    #[test]
    fn gauge_shift_rejects_general() {
        let g = FourierPotential::general([(0, c(1.0, 0.0))], [(0, c(2.0, 0.0))]).unwrap();
        assert_eq!(gauge_shift(&g, 1), Err(Error::NotRealType));
    }

    #[test]
    fn non_finite_rejected() {
        assert!(FourierPotential::real_type([(0, c(f64::NAN, 0.0))]).is_err());
        assert!(FourierPotential::from_dense(vec![c(1.0, 0.0), c(0.0, 0.0)]).is_err());
    }
}
