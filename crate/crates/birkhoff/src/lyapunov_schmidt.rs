//! Lyapunov–Schmidt reduction onto the resonant modes e_n^± on a truncated
//! Fourier basis.
//!
//! With e_m^+ = (0, e^{imπx}) and e_m^- = (e^{−imπx}, 0), the operator
//! T_n = Φ A_λ⁻¹ Q_n acts by
//!
//! T e_l^+ = Σ_k φ⁻_{k+l}/(λ − lπ) e_k^-,   T e_l^- = Σ_k φ⁺_{k+l}/(λ − lπ) e_k^+   (l ≠ n),
//!
//! and T e_n^± = 0. Only indices of the parity of n couple to e_n^±, so the
//! truncated space is {e_m^± : m ≡ n mod 2, |m| ≤ K_t}.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::potentials::{bracket, component_norm, weighted_norm, Component, FourierPotential, Weight};
use crate::spectrum::PeriodicSpectrum;

type C = Complex64;

/// K_t = 4(|n| + K + 8).
pub fn default_truncation(n: i64, band: usize) -> usize {
    4 * (n.unsigned_abs() as usize + band + 8)
}

#[derive(Clone, Debug)]
pub struct ReductionWorkspace {
    pub n: i64,
    pub lambda: C,
    pub truncation: usize,
    /// Basis indices m (both components use the same list).
    pub indices: Vec<i64>,
    /// Position of n in `indices`.
    pub centre: usize,
    /// Block T_{−+}: coefficients on e^+ to coefficients on e^-.
    pub t_mp: DMatrix<C>,
    /// Block T_{+−}.
    pub t_pm: DMatrix<C>,
    /// Φe_n^+ (an e^- vector) and Φe_n^- (an e^+ vector).
    pub phi_en_plus: DVector<C>,
    pub phi_en_minus: DVector<C>,
}

impl ReductionWorkspace {
    pub fn new(phi: &FourierPotential, n: i64, lambda: C) -> Result<Self> {
        Self::with_truncation(phi, n, lambda, default_truncation(n, phi.band()))
    }

    pub fn with_truncation(phi: &FourierPotential, n: i64, lambda: C, truncation: usize) -> Result<Self> {
        if (lambda.re - n as f64 * PI).abs() > 0.5 * PI + 1e-12 {
            return Err(Error::InvalidArgument(format!("λ = {lambda} is outside the strip of n = {n}")));
        }
        if !lambda.is_finite() {
            return Err(Error::InvalidArgument("λ must be finite".into()));
        }
        let kt = truncation as i64;
        if kt < n.abs() + 8 * phi.band() as i64 {
            return Err(Error::InvalidArgument(format!("truncation {kt} < |n| + 8K")));
        }
        let indices: Vec<i64> = (-kt..=kt).filter(|m| (m - n).rem_euclid(2) == 0).collect();
        let centre = indices.iter().position(|&m| m == n).expect("n lies in its own parity class");
        let d = indices.len();
        let inv: Vec<C> = indices
            .iter()
            .map(|&l| if l == n { C::new(0.0, 0.0) } else { 1.0 / (lambda - l as f64 * PI) })
            .collect();
        let t_mp = DMatrix::from_fn(d, d, |r, c| phi.phi_minus(indices[r] + indices[c]) * inv[c]);
        let t_pm = DMatrix::from_fn(d, d, |r, c| phi.phi_plus(indices[r] + indices[c]) * inv[c]);
        let phi_en_plus = DVector::from_fn(d, |r, _| phi.phi_minus(indices[r] + n));
        let phi_en_minus = DVector::from_fn(d, |r, _| phi.phi_plus(indices[r] + n));
        Ok(Self { n, lambda, truncation, indices, centre, t_mp, t_pm, phi_en_plus, phi_en_minus })
    }

    /// T² restricted to the e^- block, T_{−+}T_{+−}.
    pub fn t2_minus(&self) -> DMatrix<C> {
        sparse_mul(&self.t_mp, &self.t_pm)
    }

    /// T² restricted to the e^+ block, T_{+−}T_{−+}.
    pub fn t2_plus(&self) -> DMatrix<C> {
        sparse_mul(&self.t_pm, &self.t_mp)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LsCoefficients {
    pub lambda: C,
    pub a_plus: C,
    pub a_minus: C,
    pub b_plus: C,
    pub b_minus: C,
    /// Upper estimate of the spectral radius of T² on the truncated space.
    pub neumann_proxy: f64,
}

impl LsCoefficients {
    pub fn a(&self) -> C {
        0.5 * (self.a_plus + self.a_minus)
    }

    /// det S_n(λ) = (λ − nπ − a)² − b⁺b⁻.
    pub fn det(&self, n: i64) -> C {
        let d = self.lambda - n as f64 * PI - self.a();
        d * d - self.b_plus * self.b_minus
    }
}

// a·b skipping the (many) zero entries of a
fn sparse_mul(a: &DMatrix<C>, b: &DMatrix<C>) -> DMatrix<C> {
    let mut out = DMatrix::<C>::zeros(a.nrows(), b.ncols());
    for r in 0..a.nrows() {
        for k in 0..a.ncols() {
            let x = a[(r, k)];
            if x == C::new(0.0, 0.0) {
                continue;
            }
            for c in 0..b.ncols() {
                let y = b[(k, c)];
                if y != C::new(0.0, 0.0) {
                    out[(r, c)] += x * y;
                }
            }
        }
    }
    out
}

fn bandwidth(m: &DMatrix<C>) -> usize {
    let mut bw = 0;
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            if m[(r, c)] != C::new(0.0, 0.0) {
                bw = bw.max(r.abs_diff(c));
            }
        }
    }
    bw
}

fn strictly_diagonally_dominant(m: &DMatrix<C>) -> bool {
    m.row_iter().enumerate().all(|(r, row)| {
        let off: f64 = row.iter().enumerate().filter(|&(c, _)| c != r).map(|(_, x)| x.norm()).sum();
        row[r].norm() > off
    })
}

// Gaussian elimination without pivoting inside the band; stable for strictly
// diagonally dominant matrices.
fn banded_solve(a: &DMatrix<C>, rhs: &DVector<C>, bw: usize) -> DVector<C> {
    let d = a.nrows();
    let mut m = a.clone();
    let mut x = rhs.clone();
    for p in 0..d {
        let last = (p + bw).min(d - 1);
        let piv = m[(p, p)];
        for r in p + 1..=last {
            let f = m[(r, p)] / piv;
            if f == C::new(0.0, 0.0) {
                continue;
            }
            for c in p..=last {
                let v = m[(p, c)];
                m[(r, c)] -= f * v;
            }
            let v = x[p];
            x[r] -= f * v;
        }
    }
    for p in (0..d).rev() {
        let last = (p + bw).min(d - 1);
        let mut acc = x[p];
        for c in p + 1..=last {
            acc -= m[(p, c)] * x[c];
        }
        x[p] = acc / m[(p, p)];
    }
    x
}

fn inf_norm(m: &DMatrix<C>) -> f64 {
    m.row_iter().map(|r| r.iter().map(|x| x.norm()).sum::<f64>()).fold(0.0, f64::max)
}

/// Crude spectral-radius estimate by repeated squaring of the ∞-norm.
fn spectral_radius_proxy(m: &DMatrix<C>) -> f64 {
    let mut p = m.clone();
    let mut est = inf_norm(&p);
    let mut power = 1.0;
    for _ in 0..4 {
        if est < 1.0 {
            break;
        }
        p = &p * &p;
        power *= 2.0;
        est = est.min(inf_norm(&p).powf(1.0 / power));
    }
    est
}

/// a_n^±, b_n^± from (I − T²)x = Φe_n^±.
pub fn ls_coefficients(ws: &ReductionWorkspace) -> Result<LsCoefficients> {
    let g_minus = ws.t2_minus();
    let g_plus = ws.t2_plus();
    let proxy = spectral_radius_proxy(&g_minus).max(spectral_radius_proxy(&g_plus));
    if !(proxy < 1.0) {
        return Err(Error::Threshold(format!(
            "spectral radius estimate {proxy:.3} of T² is not below 1 for n = {}",
            ws.n
        )));
    }
    let d = ws.indices.len();
    let id = DMatrix::<C>::identity(d, d);
    let solve = |g: DMatrix<C>, rhs: &DVector<C>| -> Result<DVector<C>> {
        let a = &id - g;
        if strictly_diagonally_dominant(&a) {
            let bw = bandwidth(&a);
            return Ok(banded_solve(&a, rhs, bw));
        }
        a.lu().solve(rhs).ok_or_else(|| Error::Conditioning(format!("singular I − T² for n = {}", ws.n)))
    };
    let u = solve(g_minus, &ws.phi_en_plus)?;
    let v = solve(g_plus, &ws.phi_en_minus)?;
    let c = ws.centre;
    let a_plus = (ws.t_pm.row(c) * &u)[(0, 0)];
    let a_minus = (ws.t_mp.row(c) * &v)[(0, 0)];
    let b_minus = u[c];
    let b_plus = v[c];
    for x in [a_plus, a_minus, b_plus, b_minus] {
        if !x.is_finite() {
            return Err(Error::Conditioning(format!("non-finite coefficient for n = {}", ws.n)));
        }
    }
    Ok(LsCoefficients { lambda: ws.lambda, a_plus, a_minus, b_plus, b_minus, neumann_proxy: proxy })
}

/// Coefficients at λ with the default truncation.
pub fn coefficients_at(phi: &FourierPotential, n: i64, lambda: C) -> Result<LsCoefficients> {
    ls_coefficients(&ReductionWorkspace::new(phi, n, lambda)?)
}

/// The two roots ξ⁺, ξ⁻ of det S_n in the strip, ordered by real part.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DetRoots {
    pub xi_minus: C,
    pub xi_plus: C,
    /// |det S_n| at the roots.
    pub residual: f64,
    pub iterations: usize,
}

/// Roots of det S_n by the fixed-point iteration λ = nπ + a(λ) ± √(b⁺b⁻)(λ),
/// accelerated by secant steps on the fixed-point residual.
pub fn det_s_roots(phi: &FourierPotential, n: i64) -> Result<DetRoots> {
    let centre = n as f64 * PI;
    let c0 = coefficients_at(phi, n, C::from(centre))?;
    let r0 = (c0.b_plus * c0.b_minus).sqrt();
    let mut roots = [C::new(0.0, 0.0); 2];
    let mut total = 0;
    for (slot, sign) in [(0usize, -1.0), (1, 1.0)] {
        let mut last_err = None;
        let mut done = false;
        for attempt in 0..5 {
            let jitter = if attempt == 0 { 0.0 } else { 1e-3 * attempt as f64 * if attempt % 2 == 0 { 1.0 } else { -1.0 } };
            let seed = C::from(centre) + c0.a() + sign * r0 + jitter;
            let reference = if r0.norm() > 0.0 { sign * r0 } else { C::from(sign) };
            match fixed_point(phi, n, seed, reference) {
                Ok((x, it)) => {
                    roots[slot] = x;
                    total += it;
                    done = true;
                    break;
                }
                Err(e) => last_err = Some(e),
            }
        }
        if !done {
            return Err(last_err.unwrap_or_else(|| Error::Convergence("det S_n roots".into())));
        }
    }
    let mut residual = 0.0f64;
    for r in roots {
        let c = coefficients_at(phi, n, r)?;
        residual = residual.max(c.det(n).norm());
    }
    if roots[0].re > roots[1].re {
        roots.swap(0, 1);
    }
    Ok(DetRoots { xi_minus: roots[0], xi_plus: roots[1], residual, iterations: total })
}

fn fixed_point(phi: &FourierPotential, n: i64, seed: C, reference: C) -> Result<(C, usize)> {
    let centre = n as f64 * PI;
    // branch of √(b⁺b⁻) chosen by continuity, starting from `reference`
    let mut branch_c = reference;
    let mut map = |x: C| -> Result<C> {
        if (x.re - centre).abs() > 0.5 * PI {
            return Err(Error::Convergence(format!("det S_n iterate left the strip of n = {n}")));
        }
        let c = coefficients_at(phi, n, x)?;
        let mut r = (c.b_plus * c.b_minus).sqrt();
        if (r - branch_c).norm() > (-r - branch_c).norm() {
            r = -r;
        }
        branch_c = r;
        Ok(C::from(centre) + c.a() + r)
    };
    let mut x0 = seed;
    let mut g0 = map(x0)? - x0;
    let mut x1 = x0 + g0;
    for it in 1..=100 {
        let g1 = map(x1)? - x1;
        if g1.norm() <= 1e-15 * (1.0 + x1.norm()) {
            return Ok((x1, it));
        }
        let denom = g1 - g0;
        let x2 = if denom.norm() > 0.0 { x1 - g1 * (x1 - x0) / denom } else { x1 + g1 };
        x0 = x1;
        g0 = g1;
        x1 = x2;
        if (x1 - x0).norm() <= 1e-15 * (1.0 + x1.norm()) {
            return Ok((x1, it));
        }
    }
    Err(Error::Convergence(format!("det S_n root for n = {n} did not converge")))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OperatorNorms {
    pub lambda: C,
    /// max over i ∈ {0, n} of ‖T_n‖ from the (−i)- to the i-shifted norm.
    pub t_norm: f64,
    pub t_bound: f64,
    /// ‖T_n²‖ in the n-shifted norm.
    pub t2_norm: f64,
    pub t2_bound: f64,
    pub passed: bool,
}

fn weighted_block(m: &DMatrix<C>, idx: &[i64], w: &Weight, row_shift: i64, col_shift: i64) -> Result<DMatrix<C>> {
    let rows: Vec<f64> = idx.iter().map(|&k| w.value(k + row_shift)).collect::<Result<_>>()?;
    let cols: Vec<f64> = idx.iter().map(|&k| w.value(k + col_shift)).collect::<Result<_>>()?;
    Ok(DMatrix::from_fn(m.nrows(), m.ncols(), |r, c| m[(r, c)] * (rows[r] / cols[c])))
}

/// Largest singular value by block subspace iteration on MᴴM (singular
/// values of T come in near-equal pairs, which stalls plain power iteration),
/// with a full SVD when it does not settle.
fn spectral_norm(m: &DMatrix<C>) -> f64 {
    let d = m.ncols();
    if d <= 16 {
        return m.singular_values().iter().copied().fold(0.0, f64::max);
    }
    let block = 8;
    let start = DMatrix::<C>::from_fn(d, block, |i, j| {
        C::new(((i * (j + 3) + 1) % 11) as f64 - 5.0, ((i + 2 * j) % 7) as f64 - 3.0)
    });
    let mut q = start.qr().q();
    let mut est = 0.0f64;
    for _ in 0..300 {
        let y = m * &q;
        let next = y.singular_values().iter().copied().fold(0.0, f64::max);
        if next == 0.0 {
            break;
        }
        if (next - est).abs() <= 1e-13 * next {
            return next;
        }
        est = next;
        q = (m.adjoint() * y).qr().q();
    }
    m.singular_values().iter().copied().fold(0.0, f64::max)
}

/// Largest singular values of the weighted truncated T_n and T_n².
pub fn operator_norm_checks(ws: &ReductionWorkspace, phi: &FourierPotential, w: &Weight) -> Result<OperatorNorms> {
    let nw = weighted_norm(phi, w)?;
    let n = ws.n;
    let mut t_norm = 0.0f64;
    for i in [0, n] {
        for block in [&ws.t_mp, &ws.t_pm] {
            t_norm = t_norm.max(spectral_norm(&weighted_block(block, &ws.indices, w, i, -i)?));
        }
    }
    let mut t2_norm = 0.0f64;
    for g in [ws.t2_minus(), ws.t2_plus()] {
        t2_norm = t2_norm.max(spectral_norm(&weighted_block(&g, &ws.indices, w, n, n)?));
    }
    let t_bound = 2.0 * nw;
    let t2_bound = 4.0 * nw * nw / bracket(n as f64);
    let slack = 1e-12;
    Ok(OperatorNorms {
        lambda: ws.lambda,
        t_norm,
        t_bound,
        t2_norm,
        t2_bound,
        passed: t_norm <= t_bound * (1.0 + slack) && t2_norm <= t2_bound * (1.0 + slack),
    })
}

/// Finite-difference Cauchy–Riemann residual |∂ₓa − ∂ᵧa/i| at λ with step h.
pub fn cauchy_riemann_residual(phi: &FourierPotential, n: i64, lambda: C, h: f64) -> Result<f64> {
    let a = |z: C| coefficients_at(phi, n, z).map(|c| c.a());
    let dx = (a(lambda + h)? - a(lambda - h)?) / (2.0 * h);
    let dy = (a(lambda + C::new(0.0, h))? - a(lambda - C::new(0.0, h))?) / C::new(0.0, 2.0 * h);
    Ok((dx - dy).norm())
}

/// All checks of the reduction for one index n.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LsEntry {
    pub n: i64,
    /// ⟨n⟩ ≥ 8‖φ‖_w², where the coefficient bounds apply.
    pub applicable: bool,
    pub a_max: f64,
    pub a_bound: f64,
    /// max over samples of w_{2n}|b^± − φ^±_{2n}|, and the bound, for + and −.
    pub b_dev: (f64, f64),
    pub b_bound: (f64, f64),
    pub symmetry: f64,
    pub roots: DetRoots,
    /// max |ξ^± − λₙ^±|, if the spectrum was supplied.
    pub root_mismatch: Option<f64>,
    pub split_sqr: f64,
    pub b_product_max: f64,
    pub truncation_change: f64,
    pub cauchy_riemann: f64,
    pub norms: Vec<OperatorNorms>,
    pub failures: Vec<String>,
}

impl LsEntry {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

pub const ROOT_TOLERANCE: f64 = 1e-6;
pub const SYMMETRY_TOLERANCE: f64 = 1e-9;
pub const TRUNCATION_TOLERANCE: f64 = 1e-8;
pub const CR_TOLERANCE: f64 = 1e-6;

/// λ samples in the strip used for the sup-norm bounds.
pub fn strip_samples(n: i64) -> Vec<C> {
    let c = n as f64 * PI;
    let mut s: Vec<C> = (-4..=4).map(|j| C::from(c + j as f64 * PI / 8.0)).collect();
    s.push(C::new(c + PI / 4.0, 0.5));
    s.push(C::new(c - PI / 4.0, 0.5));
    s
}

/// Run every reduction check for index n against weight w.
pub fn ls_check(phi: &FourierPotential, n: i64, w: &Weight, sp: Option<&PeriodicSpectrum>) -> Result<LsEntry> {
    let nw = weighted_norm(phi, w)?;
    let applicable = bracket(n as f64) >= 8.0 * nw * nw;
    let w2n = w.value(2 * n)?;
    let a_bound = nw * nw / bracket(n as f64);
    let b_bound_p = 8.0 / bracket(n as f64) * nw * nw * component_norm(phi, w, Component::Plus)?;
    let b_bound_m = 8.0 / bracket(n as f64) * nw * nw * component_norm(phi, w, Component::Minus)?;
    let mut failures = Vec::new();

    let roots = det_s_roots(phi, n)?;
    let mut samples = strip_samples(n);
    samples.push(roots.xi_minus);
    samples.push(roots.xi_plus);

    let mut a_max = 0.0f64;
    let mut b_dev = (0.0f64, 0.0f64);
    let mut symmetry = 0.0f64;
    let mut b_product_max = 0.0f64;
    for &z in &samples {
        let c = coefficients_at(phi, n, z)?;
        a_max = a_max.max(c.a_plus.norm()).max(c.a_minus.norm());
        b_dev.0 = b_dev.0.max(w2n * (c.b_plus - phi.phi_plus(2 * n)).norm());
        b_dev.1 = b_dev.1.max(w2n * (c.b_minus - phi.phi_minus(2 * n)).norm());
        let scale = c.a_plus.norm().max(1.0);
        symmetry = symmetry.max((c.a_plus - c.a_minus).norm() / scale);
        b_product_max = b_product_max.max((c.b_plus * c.b_minus).norm());
    }
    if symmetry > SYMMETRY_TOLERANCE {
        failures.push(format!("a⁺ − a⁻ = {symmetry:e}"));
    }
    if applicable {
        if a_max > a_bound {
            failures.push(format!("|a| = {a_max:e} > {a_bound:e}"));
        }
        if b_dev.0 > b_bound_p || b_dev.1 > b_bound_m {
            failures.push(format!("b deviation {b_dev:?} exceeds {:?}", (b_bound_p, b_bound_m)));
        }
    }

    let split_sqr = (roots.xi_plus - roots.xi_minus).norm_sqr();
    // the roots are resolved to a few ulps of nπ
    let root_noise = 8.0 * f64::EPSILON * (1.0 + (n as f64 * PI).abs());
    if split_sqr > 6.0 * b_product_max * (1.0 + 1e-9) + root_noise * root_noise {
        failures.push(format!("|ξ⁺−ξ⁻|² = {split_sqr:e} > 6·{b_product_max:e}"));
    }

    let root_mismatch = match sp {
        Some(sp) => {
            let g = sp.get(n)?;
            let m = (roots.xi_minus - g.lambda_minus).norm().max((roots.xi_plus - g.lambda_plus).norm());
            if m > ROOT_TOLERANCE {
                failures.push(format!("det S roots differ from λₙ± by {m:e}"));
            }
            Some(m)
        }
        None => None,
    };

    let centre = C::from(n as f64 * PI);
    let base = coefficients_at(phi, n, centre)?;
    let kt = default_truncation(n, phi.band());
    let doubled = ls_coefficients(&ReductionWorkspace::with_truncation(phi, n, centre, 2 * kt)?)?;
    let mut truncation_change = 0.0f64;
    for (x, y) in [
        (base.a_plus, doubled.a_plus),
        (base.a_minus, doubled.a_minus),
        (base.b_plus, doubled.b_plus),
        (base.b_minus, doubled.b_minus),
    ] {
        truncation_change = truncation_change.max((x - y).norm() / x.norm().max(1e-300));
    }
    let tiny = base.a_plus.norm().max(base.b_plus.norm()) < 1e-300;
    if !tiny && truncation_change > TRUNCATION_TOLERANCE {
        failures.push(format!("doubling K_t changes coefficients by {truncation_change:e}"));
    }

    let cauchy_riemann = cauchy_riemann_residual(phi, n, centre + C::new(0.1, 0.1), 1e-4)?;
    if cauchy_riemann > CR_TOLERANCE {
        failures.push(format!("Cauchy–Riemann residual {cauchy_riemann:e}"));
    }

    let mut norms = Vec::new();
    for z in [centre, C::new(centre.re + 0.5 * PI, 0.5)] {
        let ws = ReductionWorkspace::new(phi, n, z)?;
        let r = operator_norm_checks(&ws, phi, w)?;
        if !r.passed && applicable {
            failures.push(format!("operator norms {:e}/{:e} exceed {:e}/{:e}", r.t_norm, r.t2_norm, r.t_bound, r.t2_bound));
        }
        norms.push(r);
    }

    Ok(LsEntry {
        n,
        applicable,
        a_max,
        a_bound,
        b_dev,
        b_bound: (b_bound_p, b_bound_m),
        symmetry,
        roots,
        root_mismatch,
        split_sqr,
        b_product_max,
        truncation_change,
        cauchy_riemann,
        norms,
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::gauge_shift;

    #[test]
    fn zero_potential() {
        let phi = FourierPotential::zero();
        let c = coefficients_at(&phi, 3, C::from(3.0 * PI)).unwrap();
        assert_eq!(c.a(), C::new(0.0, 0.0));
        assert_eq!(c.b_plus, C::new(0.0, 0.0));
        let r = det_s_roots(&phi, 3).unwrap();
        assert!((r.xi_minus - 3.0 * PI).norm() < 1e-14 && (r.xi_plus - 3.0 * PI).norm() < 1e-14);
        let ws = ReductionWorkspace::new(&phi, 3, C::from(3.0 * PI)).unwrap();
        let norms = operator_norm_checks(&ws, &phi, &Weight::sobolev(1.0).unwrap()).unwrap();
        assert_eq!(norms.t_norm, 0.0);
        assert_eq!(norms.t2_norm, 0.0);
    }

    #[test]
    fn constant_n4() {
        let phi = FourierPotential::constant(0.5);
        let c = coefficients_at(&phi, 4, C::from(4.0 * PI)).unwrap();
        assert!(c.a().norm() <= 0.1);
        assert!((c.a_plus - c.a_minus).norm() < 1e-12);
        let r = det_s_roots(&phi, 4).unwrap();
        let exact = (16.0 * PI * PI + 0.25f64).sqrt();
        assert!((r.xi_minus.re - exact).abs() < 1e-10, "{r:?}");
        assert!((r.xi_plus.re - exact).abs() < 1e-10);
        assert!((exact - 12.5764).abs() < 1e-4);
    }

    #[test]
    fn shifted_constant_n1() {
        let phi = gauge_shift(&FourierPotential::constant(0.1), 1).unwrap();
        let r = det_s_roots(&phi, 1).unwrap();
        assert!(((r.xi_plus - r.xi_minus).re - 0.2).abs() < 1e-12, "{r:?} {:?}", coefficients_at(&phi, 1, C::from(PI)));
        let phi5 = gauge_shift(&FourierPotential::constant(0.5), 1).unwrap();
        let e = ls_check(&phi5, 5, &Weight::sobolev(1.0).unwrap(), None).unwrap();
        assert!(e.symmetry < 1e-12);
    }

    #[test]
    fn constant_n6_norms() {
        let phi = FourierPotential::constant(0.5);
        let ws = ReductionWorkspace::new(&phi, 6, C::from(6.0 * PI)).unwrap();
        let r = operator_norm_checks(&ws, &phi, &Weight::sobolev(1.0).unwrap()).unwrap();
        assert!((r.t2_bound - 4.0 * 0.5 / 7.0).abs() < 1e-12);
        assert!(r.passed, "{r:?}");
    }

    #[test]
    fn subspace_norm_matches_svd() {
        let phi = crate::family::FamilySpec::sobolev(3, 5).member(0).unwrap();
        let n = 9;
        let ws = ReductionWorkspace::new(&phi, n, C::new(n as f64 * PI + 0.3, 0.2)).unwrap();
        let w = Weight::sobolev(1.0).unwrap();
        for m in [ws.t_mp.clone(), ws.t2_plus(), weighted_block(&ws.t_pm, &ws.indices, &w, n, -n).unwrap()] {
            let exact = m.singular_values().iter().copied().fold(0.0, f64::max);
            assert!((spectral_norm(&m) - exact).abs() <= 1e-10 * exact);
        }
    }

    #[test]
    fn strip_is_enforced() {
        let phi = FourierPotential::constant(0.5);
        assert!(ReductionWorkspace::new(&phi, 2, C::from(0.0)).is_err());
    }
}
