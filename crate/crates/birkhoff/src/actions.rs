//! Action variables Iₙ and higher actions J_{n,k}.
//!
//! The primary method integrates f_n = cosh⁻¹((−1)ⁿΔ/2) across each open gap
//! after the substitution λ = τₙ + (γₙ/2)cos θ, which turns the square-root
//! endpoint behaviour of f_n into a smooth integrand in θ:
//!
//! J_{n,k} = (2/π) ∫ λ^{k−1} f_n(λ) dλ = (γₙ/π) ∫₀^π λ(θ)^{k−1} f_n(λ(θ)) sin θ dθ.
//!
//! The contour method evaluates Iₙ = (1/π)∮ λΔ̇/√(Δ²−4) dλ around the gap and
//! serves as an independent cross-check.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::discriminant::DiscriminantEvaluator;
use crate::error::{Error, Result};
use crate::potentials::{bracket, pairwise_sum, sobolev_norm, weighted_norm, Weight};
use crate::quadrature::ladder;
use crate::spectrum::{wants_local_frame, GapRecord, LocalGap, PeriodicSpectrum};

type C = Complex64;

pub const DEFAULT_LEVELS: [u32; 5] = [1, 2, 3, 5, 7];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ActionMethod {
    GapIntegral,
    Contour,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ActionConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Gauss–Legendre rules used: 16·2^j for j = 0..=max_doublings.
    pub max_doublings: u32,
    pub contour_nodes: usize,
    pub contour_max_doublings: u32,
    pub contour_rel_tol: f64,
    /// Absolute floor for the contour doubling test; Δ̇ carries an absolute
    /// rounding error that dominates on very short gaps.
    pub contour_abs_tol: f64,
}

impl Default for ActionConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            abs_tol: 1e-300,
            max_doublings: 8,
            contour_nodes: 512,
            contour_max_doublings: 6,
            contour_rel_tol: 1e-11,
            contour_abs_tol: 1e-20,
        }
    }
}

/// Iₙ and J_{n,k} for |n| ≤ N_max.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ActionSpectrum {
    pub n_max: i64,
    pub levels: Vec<u32>,
    /// Iₙ at index n + N_max.
    pub i: Vec<f64>,
    /// J_{n,k}: `j[l][n + N_max]` for k = `levels[l]`.
    pub j: Vec<Vec<f64>>,
    /// Last doubling change per index (absolute).
    pub errors: Vec<f64>,
    /// Largest Gauss–Legendre rule used.
    pub quadrature_nodes: usize,
    pub method: ActionMethod,
}

impl ActionSpectrum {
    pub fn action(&self, n: i64) -> f64 {
        if n.abs() > self.n_max {
            0.0
        } else {
            self.i[(n + self.n_max) as usize]
        }
    }

    /// J_{n,k}, or `None` if level k was not computed.
    pub fn higher(&self, n: i64, k: u32) -> Option<f64> {
        let l = self.levels.iter().position(|&x| x == k)?;
        if n.abs() > self.n_max {
            return Some(0.0);
        }
        Some(self.j[l][(n + self.n_max) as usize])
    }

    pub fn indices(&self) -> impl Iterator<Item = i64> {
        -self.n_max..=self.n_max
    }

    /// Σₙ J_{n,k} plus a tail estimate of the same sign.
    pub fn level_sum(&self, k: u32) -> Option<(f64, f64)> {
        let l = self.levels.iter().position(|&x| x == k)?;
        let sum = pairwise_sum(&self.j[l]);
        let tail = self.tail_estimate(|n| self.j[l][(n + self.n_max) as usize].abs());
        Some((sum, tail))
    }

    /// Geometric extrapolation of Σ_{|n|>N_max} tₙ from the last two indices
    /// on each side; infinite if the terms do not decrease.
    pub fn tail_estimate<F: Fn(i64) -> f64>(&self, term: F) -> f64 {
        let n = self.n_max;
        if n < 1 {
            return 0.0;
        }
        let side = |last: f64, prev: f64| -> f64 {
            if last == 0.0 {
                return 0.0;
            }
            let q = last / prev;
            if !(q < 1.0) {
                return f64::INFINITY;
            }
            last * q / (1.0 - q)
        };
        side(term(n), term(n - 1)) + side(term(-n), term(-n + 1))
    }
}

/// f_n(λ) = cosh⁻¹((−1)ⁿΔ(λ)/2) for real λ in the closed n-th gap.
pub fn f_n(ev: &DiscriminantEvaluator, n: i64, lambda: f64) -> Result<f64> {
    let v = ev.values(C::from(lambda), 0)?;
    let sd = if n % 2 == 0 { v.delta.re } else { -v.delta.re };
    let s = if sd > 0.0 { 0.5 * v.disc.re / (sd + 2.0) } else { 0.5 * sd - 1.0 };
    if s < -1e-12 {
        return Err(Error::SpectrumInconsistency {
            n,
            detail: format!("(−1)ⁿΔ/2 = {} < 1 at λ = {lambda}", 1.0 + s),
        });
    }
    Ok(acosh1p(s.max(0.0)))
}

/// cosh⁻¹(1 + s) for s ≥ 0, accurate as s → 0.
fn acosh1p(s: f64) -> f64 {
    if s < 1e-6 {
        (2.0 * s).sqrt() * (1.0 - s / 12.0 + 3.0 * s * s / 160.0)
    } else {
        (s + (s * (2.0 + s)).sqrt()).ln_1p()
    }
}

/// J_{n,k} for each k in `levels` by Gauss–Legendre in θ with doubling.
/// Returns the values and the last change between successive rules.
fn gap_integrals(
    ev: &DiscriminantEvaluator,
    g: &GapRecord,
    offset: f64,
    levels: &[u32],
    cfg: &ActionConfig,
) -> Result<(Vec<f64>, f64, usize)> {
    if g.collapsed {
        return Ok((vec![0.0; levels.len()], 0.0, 0));
    }
    let half = 0.5 * g.gamma;
    // λ is resolved only to about one ulp, which limits the relative
    // accuracy of f_n on very short gaps
    let tol = cfg.rel_tol.max(4.0 * f64::EPSILON * (1.0 + g.tau.abs()) / g.gamma);
    let reach = (offset + g.lambda_minus).abs().max((offset + g.lambda_plus).abs());
    let mut prev: Option<Vec<f64>> = None;
    let mut last_change = f64::INFINITY;
    for d in 0..=cfg.max_doublings {
        let rule = ladder(d as usize);
        let mut terms = vec![Vec::with_capacity(rule.nodes.len()); levels.len()];
        for (x, w) in rule.nodes.iter().zip(&rule.weights) {
            let theta = 0.5 * PI * (x + 1.0);
            let lambda = g.tau + half * theta.cos();
            let f = f_n(ev, g.n, lambda)? * theta.sin() * w * 0.5 * PI;
            for (t, &k) in terms.iter_mut().zip(levels) {
                t.push((offset + lambda).powi(k as i32 - 1) * f);
            }
        }
        let vals: Vec<f64> = terms.iter().map(|t| g.gamma / PI * pairwise_sum(t)).collect();
        if let Some(p) = &prev {
            let mut ok = true;
            last_change = 0.0;
            for ((a, b), &k) in vals.iter().zip(p).zip(levels) {
                let change = (a - b).abs();
                last_change = last_change.max(change);
                // odd-in-λ levels can cancel to nearly zero on gaps near the origin
                let scale = 0.25 * g.gamma * g.gamma * reach.powi(k as i32 - 1);
                if change > tol * a.abs().max(scale).max(cfg.abs_tol) {
                    ok = false;
                }
            }
            if ok {
                return Ok((vals, last_change, rule.nodes.len()));
            }
        }
        prev = Some(vals);
    }
    Err(Error::Quadrature { n: g.n, k: levels.first().copied().unwrap_or(1), change: last_change })
}

/// [`gap_integrals`] in the gauge-shifted frame when the gap is too short to
/// be resolved at its own position.
fn gap_integrals_for(
    ev: &DiscriminantEvaluator,
    sp: &PeriodicSpectrum,
    g: &GapRecord,
    levels: &[u32],
    cfg: &ActionConfig,
) -> Result<(Vec<f64>, f64, usize)> {
    if wants_local_frame(g) {
        let lg = LocalGap::from_spectrum(ev, sp, g.n)?;
        gap_integrals(&lg.ev, &lg.gap, lg.offset, levels, cfg)
    } else {
        gap_integrals(ev, g, 0.0, levels, cfg)
    }
}

/// J_{n,k} by the gap integral.
pub fn action_gap_integral(ev: &DiscriminantEvaluator, sp: &PeriodicSpectrum, n: i64, k: u32) -> Result<f64> {
    if k < 1 {
        return Err(Error::InvalidArgument("level k must be at least 1".into()));
    }
    let g = sp.get(n)?;
    gap_integrals_for(ev, sp, g, &[k], &ActionConfig::default()).map(|r| r.0[0])
}

/// Result of the contour method for one gap.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ContourAction {
    pub n: i64,
    pub value: f64,
    /// Imaginary part of the quadrature (should vanish).
    pub imag: f64,
    /// ∮ Δ̇/√(Δ²−4) dλ, which vanishes for a closed cycle around one gap.
    pub omega_period: f64,
    pub radius: f64,
    pub nodes: usize,
}

/// Iₙ = (1/π)∮ (λ − τₙ)Δ̇/√(Δ²−4) dλ on a circle around the n-th gap.
pub fn action_contour(ev: &DiscriminantEvaluator, sp: &PeriodicSpectrum, n: i64) -> Result<ContourAction> {
    action_contour_with(ev, sp, n, &ActionConfig::default())
}

pub fn action_contour_with(
    ev: &DiscriminantEvaluator,
    sp: &PeriodicSpectrum,
    n: i64,
    cfg: &ActionConfig,
) -> Result<ContourAction> {
    let g = sp.get(n)?;
    if g.collapsed {
        return Ok(ContourAction { n, value: 0.0, imag: 0.0, omega_period: 0.0, radius: 0.0, nodes: 0 });
    }
    let left = match sp.entry(n - 1) {
        Some(e) => g.lambda_minus - e.lambda_plus,
        None => g.lambda_minus - sp.critical(n - 1).unwrap_or(g.lambda_minus - PI),
    };
    let right = match sp.entry(n + 1) {
        Some(e) => e.lambda_minus - g.lambda_plus,
        None => sp.critical(n + 1).unwrap_or(g.lambda_plus + PI) - g.lambda_plus,
    };
    let room = left.min(right);
    if !(room > 0.0) {
        return Err(Error::Geometry { n, detail: "gap touches its neighbour".into() });
    }
    if wants_local_frame(g) {
        let lg = LocalGap::from_spectrum(ev, sp, n)?;
        contour_on(&lg.ev, &lg.gap, room, cfg).map(|c| ContourAction { n, ..c })
    } else {
        contour_on(ev, g, room, cfg)
    }
}

fn contour_on(ev: &DiscriminantEvaluator, g: &GapRecord, room: f64, cfg: &ActionConfig) -> Result<ContourAction> {
    let n = g.n;
    let delta = (0.25 * g.gamma).min(0.5 * room);
    let radius = 0.5 * g.gamma + delta;
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };

    // branch of √(Δ²−4) at τ + i0, carried up to τ + iR
    let disc = |z: C| ev.values(z, 1).map(|v| (v.disc, v.delta_dot));
    let d0 = disc(C::from(g.tau))?.0;
    if !(d0.re > 0.0) {
        return Err(Error::SpectrumInconsistency { n, detail: "Δ²−4 ≤ 0 at the gap midpoint".into() });
    }
    let mut root = C::from(sign * d0.re.sqrt());
    let climb = 32;
    for i in 1..=climb {
        let z = C::new(g.tau, radius * i as f64 / climb as f64);
        root = follow(root, disc(z)?.0.sqrt());
    }
    let top_root = root;

    let tol = cfg.contour_rel_tol.max(4.0 * f64::EPSILON * (1.0 + g.tau.abs()) / g.gamma);
    let mut nodes = cfg.contour_nodes.max(16);
    let mut prev: Option<(C, C)> = None;
    for _ in 0..=cfg.contour_max_doublings {
        match circle_sum(&disc, g.tau, radius, top_root, nodes)? {
            None => {}
            Some((val, om)) => {
                if let Some((p, _)) = prev {
                    if (val - p).norm() <= tol * val.norm() + cfg.contour_abs_tol {
                        return Ok(ContourAction {
                            n,
                            value: val.re,
                            imag: val.im,
                            omega_period: om.norm(),
                            radius,
                            nodes,
                        });
                    }
                }
                prev = Some((val, om));
            }
        }
        nodes *= 2;
    }
    Err(Error::Quadrature { n, k: 1, change: prev.map(|p| p.0.norm()).unwrap_or(f64::NAN) })
}

/// Pick ±r closest to `prev`.
fn follow(prev: C, r: C) -> C {
    if (r - prev).norm() <= (r + prev).norm() {
        r
    } else {
        -r
    }
}

type DiscFn<'a> = dyn Fn(C) -> Result<(C, C)> + Sync + 'a;

/// Trapezoid sums on the circle starting at the top; `None` on a branch jump.
fn circle_sum(disc: &DiscFn<'_>, tau: f64, radius: f64, top_root: C, nodes: usize) -> Result<Option<(C, C)>> {
    let step = 2.0 * PI / nodes as f64;
    let samples: Vec<(C, C, C)> = (0..=nodes)
        .into_par_iter()
        .map(|j| {
            let th = 0.5 * PI + step * j as f64;
            let e = C::from_polar(1.0, th);
            let z = tau + radius * e;
            let (d, dd) = disc(z)?;
            Ok((z, d.sqrt(), dd * C::i() * radius * e))
        })
        .collect::<Result<_>>()?;
    let mut root = top_root;
    let mut val = Vec::with_capacity(2 * nodes);
    let mut om = Vec::with_capacity(2 * nodes);
    for (j, (z, r, dz)) in samples.iter().enumerate() {
        let next = follow(root, *r);
        if j > 0 && (next / root).arg().abs() > 0.5 * PI {
            return Ok(None);
        }
        root = next;
        if j == nodes {
            if (root - top_root).norm() > 1e-6 * top_root.norm() {
                return Ok(None);
            }
            break;
        }
        let w = dz / root;
        om.push(w);
        val.push((z - tau) * w);
    }
    let sum = |v: &[C]| {
        let re: Vec<f64> = v.iter().map(|c| c.re).collect();
        let im: Vec<f64> = v.iter().map(|c| c.im).collect();
        C::new(pairwise_sum(&re), pairwise_sum(&im))
    };
    Ok(Some((sum(&val) * step / PI, sum(&om) * step)))
}

/// Actions for all |n| ≤ N_max at the requested levels (level 1 is always
/// included), by the chosen method. The contour method fills only Iₙ and
/// uses the gap integral for higher levels.
pub fn compute_actions(
    ev: &DiscriminantEvaluator,
    sp: &PeriodicSpectrum,
    levels: &[u32],
    method: ActionMethod,
    cfg: &ActionConfig,
) -> Result<ActionSpectrum> {
    if !ev.potential().is_real_type() {
        return Err(Error::NotRealType);
    }
    let mut lv: Vec<u32> = levels.to_vec();
    if lv.contains(&0) {
        return Err(Error::InvalidArgument("level k must be at least 1".into()));
    }
    if !lv.contains(&1) {
        lv.push(1);
    }
    lv.sort_unstable();
    lv.dedup();
    let per: Vec<(Vec<f64>, f64, usize)> = sp
        .entries
        .par_iter()
        .map(|g| {
            let (mut vals, err, nodes) = gap_integrals_for(ev, sp, g, &lv, cfg)?;
            if method == ActionMethod::Contour {
                let c = action_contour_with(ev, sp, g.n, cfg)?;
                vals[0] = c.value;
            }
            Ok((vals, err, nodes))
        })
        .collect::<Result<_>>()?;
    let mut j = vec![Vec::with_capacity(per.len()); lv.len()];
    let mut errors = Vec::with_capacity(per.len());
    let mut quadrature_nodes = 0;
    for (vals, err, nodes) in per {
        for (col, v) in j.iter_mut().zip(vals) {
            col.push(v);
        }
        errors.push(err);
        quadrature_nodes = quadrature_nodes.max(nodes);
    }
    Ok(ActionSpectrum {
        n_max: sp.n_max,
        i: j[0].clone(),
        levels: lv,
        j,
        errors,
        quadrature_nodes,
        method,
    })
}

/// Norm specification for action sums.
#[derive(Clone, Debug, PartialEq)]
pub enum ActionNorm<'a> {
    /// Σ ⟨2nπ⟩^s |Iₙ|
    Sobolev(f64),
    /// Σ w_{2n}² |Iₙ|
    Weighted(&'a Weight),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NormValue {
    /// Truncated sum over |n| ≤ N_max.
    pub value: f64,
    /// Extrapolated tail, used when folding truncation into comparisons.
    pub tail_estimate: f64,
    /// Rigorous tail bound from the gap and action-gap estimates.
    pub tail_bound: f64,
}

impl NormValue {
    pub fn with_tail(&self) -> f64 {
        self.value + self.tail_estimate
    }
}

fn action_weight(norm: &ActionNorm<'_>, n: i64) -> Result<f64> {
    match norm {
        ActionNorm::Sobolev(s) => Ok(bracket(2.0 * PI * n as f64).powf(*s)),
        ActionNorm::Weighted(w) => {
            let v = w.value(2 * n)?;
            Ok(v * v)
        }
    }
}

/// Weighted ℓ¹ norm of the actions.
pub fn action_norms(acts: &ActionSpectrum, phi: &crate::potentials::FourierPotential, norm: &ActionNorm<'_>) -> Result<NormValue> {
    if let ActionNorm::Sobolev(s) = norm {
        if !(*s >= 0.0) {
            return Err(Error::InvalidArgument(format!("negative exponent {s}")));
        }
    }
    let mut terms = Vec::with_capacity(acts.i.len());
    for n in acts.indices() {
        terms.push(action_weight(norm, n)? * acts.action(n).abs());
    }
    let value = pairwise_sum(&terms);
    let tail_estimate = acts.tail_estimate(|n| terms[(n + acts.n_max) as usize]);
    let tail_bound = tail_bound(acts.n_max, phi, norm)?;
    Ok(NormValue { value, tail_estimate, tail_bound })
}

/// Σ_{|n|>N} weight_n·|Iₙ| bounded through |Iₙ| ≤ 2¹¹(1+‖φ‖₁²)γₙ² and the
/// gap estimate Σ_{|n|≥N} w_{2n}²γₙ² ≤ 6‖R_Nφ‖_w² + 1152‖φ‖_w⁶/⟨N⟩.
/// For `Sobolev(s)` the weight ⟨2nπ⟩^s is w_{2n}² for the Sobolev weight of
/// exponent s/2.
pub fn tail_bound(n_max: i64, phi: &crate::potentials::FourierPotential, norm: &ActionNorm<'_>) -> Result<f64> {
    let n1 = sobolev_norm(phi, 1.0)?;
    let c6 = 2048.0 * (1.0 + n1 * n1);
    let n = n_max + 1;
    let band = phi.band() as i64;
    let nw = match norm {
        ActionNorm::Sobolev(s) => sobolev_norm(phi, 0.5 * s)?,
        ActionNorm::Weighted(w) => weighted_norm(phi, w)?,
    };
    let remainder = if band >= n { nw } else { 0.0 };
    let gap_sum = 6.0 * remainder * remainder + 1152.0 * nw.powi(6) / bracket(n as f64);
    Ok(c6 * gap_sum)
}

/// ‖Ω(φ)‖ = (2 Σ weight²·Iₙ)^{1/2}; for `Sobolev(s)` the weight is ⟨2nπ⟩^s.
pub fn birkhoff_norm(acts: &ActionSpectrum, norm: &ActionNorm<'_>) -> Result<f64> {
    let mut terms = Vec::with_capacity(acts.i.len());
    for n in acts.indices() {
        let w = match norm {
            ActionNorm::Sobolev(s) => bracket(2.0 * PI * n as f64).powf(2.0 * s),
            ActionNorm::Weighted(_) => action_weight(norm, n)?,
        };
        terms.push(w * acts.action(n));
    }
    Ok((2.0 * pairwise_sum(&terms)).max(0.0).sqrt())
}

/// ζ_{n,m} with J_{n,2m+1} = ζ^{2m}·Iₙ, taken in [λₙ⁻, λₙ⁺].
pub fn mean_value_nodes(acts: &ActionSpectrum, sp: &PeriodicSpectrum, n: i64, m: u32) -> Result<f64> {
    if m < 1 {
        return Err(Error::InvalidArgument("m must be at least 1".into()));
    }
    let g = sp.get(n)?;
    let i = acts.action(n);
    if g.collapsed || !(i > 0.0) {
        return Err(Error::UndefinedNode(n));
    }
    let k = 2 * m + 1;
    let jk = acts
        .higher(n, k)
        .ok_or_else(|| Error::InvalidArgument(format!("level {k} was not computed")))?;
    let mag = (jk / i).max(0.0).powf(1.0 / (2 * m) as f64);
    let z = if g.lambda_plus.abs() >= g.lambda_minus.abs() { mag } else { -mag };
    let slack = 1e-9 * bracket(z);
    if z < g.lambda_minus - slack || z > g.lambda_plus + slack {
        return Err(Error::SpectrumInconsistency {
            n,
            detail: format!("mean-value node {z} outside [{}, {}]", g.lambda_minus, g.lambda_plus),
        });
    }
    Ok(z)
}

/// One two-sided action comparison 2⁻ᵐ⟨2nπ⟩^{2m}Iₙ ≤ 4ᵐJ_{n,2m+1} ≤ ⟨2nπ⟩^{2m}Iₙ.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ComparisonEntry {
    pub n: i64,
    pub m: u32,
    pub lower: f64,
    pub middle: f64,
    pub upper: f64,
    pub ok: bool,
}

/// Checks the two-sided comparison for every n ≠ 0 with ⟨n⟩ ≥ 8‖φ‖₁² and
/// Iₙ > `min_action`, for each m with level 2m+1 available.
pub fn action_comparison(
    acts: &ActionSpectrum,
    threshold: f64,
    ms: &[u32],
    min_action: f64,
) -> Vec<ComparisonEntry> {
    let mut out = Vec::new();
    for &m in ms {
        let k = 2 * m + 1;
        for n in acts.indices() {
            if n == 0 || bracket(n as f64) < threshold {
                continue;
            }
            let i = acts.action(n);
            if !(i > min_action) {
                continue;
            }
            let Some(j) = acts.higher(n, k) else { continue };
            let p = bracket(2.0 * PI * n as f64).powi(2 * m as i32) * i;
            let lower = p / 2f64.powi(m as i32);
            let middle = 4f64.powi(m as i32) * j;
            let tol = 1e-9 * p;
            out.push(ComparisonEntry { n, m, lower, middle, upper: p, ok: lower <= middle + tol && middle <= p + tol });
        }
    }
    out
}
