//! Floquet discriminant Δ(λ) = tr M(1, λ) of the Zakharov–Shabat operator
//!
//! ```text
//! L(φ) = [[i, 0], [0, -i]] d/dx + [[0, φ₋], [φ₊, 0]]
//! ```
//!
//! together with its first two λ-derivatives. The fundamental solution of
//! f' = B(x, λ) f, B = [[-iλ, iφ₋], [-iφ₊, iλ]], is propagated over N_x
//! subintervals of [0, 1] by exponentials of trace-free 2×2 matrices Ω that
//! are affine in λ, so the derivatives come from differentiating each factor.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potentials::FourierPotential;

type C = Complex64;

const ZERO: C = C::new(0.0, 0.0);
const ONE: C = C::new(1.0, 0.0);
const I: C = C::new(0.0, 1.0);

/// Per-subinterval exponential.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// Potential frozen at the midpoint; second order.
    Midpoint,
    /// Two-point Gauss Magnus expansion; fourth order.
    #[default]
    Magnus4,
}

impl Scheme {
    pub fn order(self) -> i32 {
        match self {
            Scheme::Midpoint => 2,
            Scheme::Magnus4 => 4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscriminantConfig {
    /// N_x; `None` picks [`default_subintervals`].
    pub subintervals: Option<usize>,
    pub scheme: Scheme,
    /// Extrapolate the sample values of [`DiscriminantEvaluator::evaluate`].
    pub richardson: bool,
    pub lambda_cap: f64,
}

impl Default for DiscriminantConfig {
    fn default() -> Self {
        Self { subintervals: None, scheme: Scheme::Magnus4, richardson: false, lambda_cap: 1e6 }
    }
}

/// max(512, 32K).
pub fn default_subintervals(band: usize) -> usize {
    (32 * band).max(512)
}

/// Values returned by [`DiscriminantEvaluator::evaluate`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DiscriminantSample {
    pub lambda: C,
    pub delta: C,
    pub delta_dot: C,
    pub delta_dot_dot: C,
    pub error_estimate: f64,
}

/// Raw values of the fine scheme.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Values {
    pub delta: C,
    pub delta_dot: C,
    pub delta_dot_dot: C,
    /// Δ² − 4 evaluated as (M₁₁ − M₂₂)² + 4M₁₂M₂₁.
    pub disc: C,
}

/// Trace-free matrix [[p, q], [r, -p]].
#[derive(Clone, Copy, Debug)]
struct Tf {
    p: C,
    q: C,
    r: C,
}

impl Tf {
    fn add(self, o: Tf) -> Tf {
        Tf { p: self.p + o.p, q: self.q + o.q, r: self.r + o.r }
    }

    fn scale(self, s: C) -> Tf {
        Tf { p: self.p * s, q: self.q * s, r: self.r * s }
    }

    fn commutator(self, o: Tf) -> Tf {
        Tf {
            p: self.q * o.r - o.q * self.r,
            q: (self.p * o.q - self.q * o.p) * 2.0,
            r: (self.r * o.p - self.p * o.r) * 2.0,
        }
    }
}

/// Ω_j(λ) = λU_j + V_j.
#[derive(Clone, Copy, Debug)]
struct Step {
    u: Tf,
    v: Tf,
}

type Mat = [C; 4];

#[inline]
fn mul(a: &Mat, b: &Mat) -> Mat {
    [
        a[0] * b[0] + a[1] * b[2],
        a[0] * b[1] + a[1] * b[3],
        a[2] * b[0] + a[3] * b[2],
        a[2] * b[1] + a[3] * b[3],
    ]
}

#[inline]
fn add(a: &Mat, b: &Mat) -> Mat {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]]
}

/// c·I + s·Ω + t·U
#[inline]
fn combo(c: C, s: C, om: &Tf, t: C, u: &Tf) -> Mat {
    [c + s * om.p + t * u.p, s * om.q + t * u.q, s * om.r + t * u.r, c - s * om.p - t * u.p]
}

/// cosh√z, sinh√z/√z and the first two z-derivatives of the latter.
#[inline]
fn entire(z: C) -> (C, C, C, C) {
    let a = z.norm();
    if a <= 4.0 {
        let terms = if a < 0.01 {
            6
        } else if a < 0.25 {
            9
        } else if a < 1.0 {
            12
        } else {
            16
        };
        // Horner in z for each series
        let mut c = ZERO;
        let mut s = ZERO;
        let mut s1 = ZERO;
        let mut s2 = ZERO;
        for k in (0..terms).rev() {
            c = c * z + INV_FACT[2 * k];
            s = s * z + INV_FACT[2 * k + 1];
            if k >= 1 {
                s1 = s1 * z + (k as f64) * INV_FACT[2 * k + 1];
            }
            if k >= 2 {
                s2 = s2 * z + ((k * (k - 1)) as f64) * INV_FACT[2 * k + 1];
            }
        }
        (c, s, s1, s2)
    } else {
        let w = z.sqrt();
        let c = w.cosh();
        let s = w.sinh() / w;
        let s1 = (c - s) / (z * 2.0);
        let s2 = (s * 0.5 - s1 * 3.0) / (z * 2.0);
        (c, s, s1, s2)
    }
}

const INV_FACT: [f64; 34] = {
    let mut t = [1.0; 34];
    let mut i = 1;
    while i < 34 {
        t[i] = t[i - 1] / i as f64;
        i += 1;
    }
    t
};

/// Evaluator of Δ, Δ̇, Δ̈ for a fixed potential and discretisation.
#[derive(Clone, Debug)]
pub struct DiscriminantEvaluator {
    potential: FourierPotential,
    config: DiscriminantConfig,
    n_x: usize,
    fine: Vec<Step>,
    coarse: Vec<Step>,
}

impl DiscriminantEvaluator {
    /// Default configuration.
    pub fn new(potential: FourierPotential) -> Self {
        Self::with_config(potential, DiscriminantConfig::default()).expect("default configuration is valid")
    }

    pub fn with_config(potential: FourierPotential, config: DiscriminantConfig) -> Result<Self> {
        let n_x = config.subintervals.unwrap_or_else(|| default_subintervals(potential.band()));
        if n_x < 8 || n_x % 2 != 0 {
            return Err(Error::InvalidArgument(format!("N_x must be even and >= 8, got {n_x}")));
        }
        if !(config.lambda_cap > 0.0) {
            return Err(Error::InvalidArgument("λ cap must be positive".into()));
        }
        let fine = build_steps(&potential, n_x, config.scheme);
        let coarse = build_steps(&potential, n_x / 2, config.scheme);
        Ok(Self { potential, config, n_x, fine, coarse })
    }

    /// Same potential and scheme with N_x subintervals.
    pub fn with_subintervals(&self, n_x: usize) -> Result<Self> {
        let config = DiscriminantConfig { subintervals: Some(n_x), ..self.config.clone() };
        Self::with_config(self.potential.clone(), config)
    }

    pub fn potential(&self) -> &FourierPotential {
        &self.potential
    }

    pub fn subintervals(&self) -> usize {
        self.n_x
    }

    pub fn config(&self) -> &DiscriminantConfig {
        &self.config
    }

    /// Monodromy matrix M(1, λ) in row-major order.
    pub fn monodromy(&self, lambda: C) -> Result<Mat> {
        self.check_cap(lambda)?;
        let (m, _, _) = propagate(&self.fine, lambda, 0);
        finite(lambda, &m)?;
        Ok(m)
    }

    /// Δ only, together with Δ² − 4.
    pub fn delta(&self, lambda: C) -> Result<(C, C)> {
        let m = self.monodromy(lambda)?;
        Ok((m[0] + m[3], disc_of(&m)))
    }

    /// Raw values with derivatives up to `order` (0, 1 or 2); higher
    /// derivatives not requested are returned as zero.
    pub fn values(&self, lambda: C, order: usize) -> Result<Values> {
        self.check_cap(lambda)?;
        let (m, dm, ddm) = propagate(&self.fine, lambda, order.min(2));
        finite(lambda, &m)?;
        finite(lambda, &dm)?;
        finite(lambda, &ddm)?;
        Ok(Values { delta: m[0] + m[3], delta_dot: dm[0] + dm[3], delta_dot_dot: ddm[0] + ddm[3], disc: disc_of(&m) })
    }

    /// Δ, Δ̇, Δ̈ with an interval-doubling error estimate.
    pub fn evaluate(&self, lambda: C) -> Result<DiscriminantSample> {
        let f = self.values(lambda, 2)?;
        let (m, dm, ddm) = propagate(&self.coarse, lambda, 2);
        finite(lambda, &m)?;
        let cd = m[0] + m[3];
        let cdd = dm[0] + dm[3];
        let cddd = ddm[0] + ddm[3];
        let fac = 1.0 / (2f64.powi(self.config.scheme.order()) - 1.0);
        let error_estimate = (f.delta - cd).norm() * fac / f.delta.norm().max(1.0);
        let (delta, delta_dot, delta_dot_dot) = if self.config.richardson {
            (
                f.delta + (f.delta - cd) * fac,
                f.delta_dot + (f.delta_dot - cdd) * fac,
                f.delta_dot_dot + (f.delta_dot_dot - cddd) * fac,
            )
        } else {
            (f.delta, f.delta_dot, f.delta_dot_dot)
        };
        Ok(DiscriminantSample { lambda, delta, delta_dot, delta_dot_dot, error_estimate })
    }

    /// Elementwise [`evaluate`](Self::evaluate), in parallel, order preserved.
    pub fn evaluate_grid(&self, lambdas: &[C]) -> Vec<Result<DiscriminantSample>> {
        lambdas.par_iter().map(|&l| self.evaluate(l)).collect()
    }

    fn check_cap(&self, lambda: C) -> Result<()> {
        let abs = lambda.norm();
        if !abs.is_finite() {
            return Err(Error::InvalidArgument("λ must be finite".into()));
        }
        if abs > self.config.lambda_cap {
            return Err(Error::LambdaCap { abs, cap: self.config.lambda_cap });
        }
        Ok(())
    }
}

fn disc_of(m: &Mat) -> C {
    let d = m[0] - m[3];
    d * d + m[1] * m[2] * 4.0
}

fn finite(lambda: C, m: &Mat) -> Result<()> {
    if m.iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::Overflow { re: lambda.re, im: lambda.im })
    }
}

fn coupling(phi: &FourierPotential, x: f64) -> Tf {
    let (m, p) = phi.eval(x);
    Tf { p: ZERO, q: I * m, r: -I * p }
}

fn build_steps(phi: &FourierPotential, n_x: usize, scheme: Scheme) -> Vec<Step> {
    let h = 1.0 / n_x as f64;
    let u0 = Tf { p: -I, q: ZERO, r: ZERO };
    (0..n_x)
        .map(|j| {
            let x0 = j as f64 * h;
            match scheme {
                Scheme::Midpoint => {
                    let pm = coupling(phi, x0 + 0.5 * h);
                    Step { u: u0.scale(C::from(h)), v: pm.scale(C::from(h)) }
                }
                Scheme::Magnus4 => {
                    let d = 3f64.sqrt() / 6.0;
                    let p1 = coupling(phi, x0 + (0.5 - d) * h);
                    let p2 = coupling(phi, x0 + (0.5 + d) * h);
                    let c = C::from(3f64.sqrt() * h * h / 12.0);
                    let diff = p1.add(p2.scale(-ONE));
                    let u = u0.scale(C::from(h)).add(u0.commutator(diff).scale(c));
                    let v = p1.add(p2).scale(C::from(0.5 * h)).add(p2.commutator(p1).scale(c));
                    Step { u, v }
                }
            }
        })
        .collect()
}

fn propagate(steps: &[Step], lambda: C, order: usize) -> (Mat, Mat, Mat) {
    let mut m: Mat = [ONE, ZERO, ZERO, ONE];
    let mut dm: Mat = [ZERO; 4];
    let mut ddm: Mat = [ZERO; 4];
    for st in steps {
        let om = st.u.scale(lambda).add(st.v);
        let z = om.p * om.p + om.q * om.r;
        let (c, s, sz, szz) = entire(z);
        let e = combo(c, s, &om, ZERO, &st.u);
        if order == 0 {
            m = mul(&e, &m);
            continue;
        }
        let u = &st.u;
        let zp = om.p * u.p * 2.0 + u.q * om.r + om.q * u.r;
        let cz = s * 0.5;
        let e1 = combo(cz * zp, sz * zp, &om, s, u);
        if order == 1 {
            dm = add(&mul(&e1, &m), &mul(&e, &dm));
            m = mul(&e, &m);
            continue;
        }
        let zpp = u.p * u.p * 2.0 + u.q * u.r * 2.0;
        let czz = sz * 0.5;
        let e2 = combo(czz * zp * zp + cz * zpp, szz * zp * zp + sz * zpp, &om, sz * zp * 2.0, u);
        let t = mul(&e1, &dm);
        ddm = add(&add(&mul(&e2, &m), &mul(&e, &ddm)), &[t[0] * 2.0, t[1] * 2.0, t[2] * 2.0, t[3] * 2.0]);
        dm = add(&mul(&e1, &m), &mul(&e, &dm));
        m = mul(&e, &m);
    }
    (m, dm, ddm)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn constant_delta(a: f64, l: C) -> C {
        (l * l - a * a).sqrt().cos() * 2.0
    }

    #[test]
    fn entire_series_and_closed_form_agree() {
        for z in [C::new(3.9, 0.5), C::new(-3.99, 0.1), C::new(0.5, -3.9)] {
            let (c, s, s1, s2) = entire(z);
            let w = z.sqrt();
            assert!((c - w.cosh()).norm() < 1e-14 * c.norm().max(1.0));
            assert!((s - w.sinh() / w).norm() < 1e-14);
            let h = 1e-4;
            let (_, sp, _, _) = entire(z + h);
            let (_, sm, _, _) = entire(z - h);
            assert!((s1 - (sp - sm) / (2.0 * h)).norm() < 1e-8);
            let (_, _, s1p, _) = entire(z + h);
            let (_, _, s1m, _) = entire(z - h);
            assert!((s2 - (s1p - s1m) / (2.0 * h)).norm() < 1e-8);
        }
    }

    #[test]
    fn zero_potential_cosine() {
        let ev = DiscriminantEvaluator::new(FourierPotential::zero());
        for l in [0.0, 0.3, 2.0, -7.5, 40.0] {
            let v = ev.values(C::from(l), 2).unwrap();
            assert!((v.delta - 2.0 * l.cos()).norm() < 1e-12);
            assert!((v.delta_dot + 2.0 * l.sin()).norm() < 1e-12);
            assert!((v.delta_dot_dot + 2.0 * l.cos()).norm() < 1e-12);
        }
    }

    #[test]
    fn constant_closed_form_both_schemes() {
        let a = 0.5;
        for scheme in [Scheme::Midpoint, Scheme::Magnus4] {
            let cfg = DiscriminantConfig { scheme, ..Default::default() };
            let ev = DiscriminantEvaluator::with_config(FourierPotential::constant(a), cfg).unwrap();
            for l in [C::new(0.0, 0.0), C::new(0.5, 0.0), C::new(3.0, 1.0), C::new(-11.0, 0.2)] {
                let d = ev.values(l, 0).unwrap().delta;
                let want = constant_delta(a, l);
                assert!((d - want).norm() < 1e-11 * want.norm().max(1.0), "{scheme:?} {l} {d} {want}");
            }
        }
    }

    #[test]
    fn sample_has_small_error_estimate() {
        let ev = DiscriminantEvaluator::new(FourierPotential::constant(0.5));
        let s = ev.evaluate(C::new(0.0, 0.0)).unwrap();
        assert!((s.delta.re - 2.0 * 0.5f64.cosh()).abs() < 1e-13);
        assert!(s.error_estimate >= 0.0 && s.error_estimate < 1e-12);
    }

    #[test]
    fn cap_and_config_errors() {
        let ev = DiscriminantEvaluator::new(FourierPotential::zero());
        assert!(matches!(ev.values(C::new(2e6, 0.0), 0), Err(Error::LambdaCap { .. })));
        let cfg = DiscriminantConfig { subintervals: Some(7), ..Default::default() };
        assert!(DiscriminantEvaluator::with_config(FourierPotential::zero(), cfg).is_err());
        assert!(matches!(ev.values(C::new(0.0, 800.0), 0), Err(Error::Overflow { .. })));
    }
}
