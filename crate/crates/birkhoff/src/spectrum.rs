//! Periodic eigenvalues λₙ± (zeros of Δ² − 4), critical points λₙ• (zeros
//! of Δ̇), gap midpoints and lengths for potentials of real type.
//!
//! Indices with ⟨n⟩ ≥ N_loc = ⌈8‖φ‖₁²⌉ are localised near nπ, so λₙ• is found
//! by safeguarded Newton on [nπ − π/2, nπ + π/2]. The finitely many remaining
//! critical points are found by scanning Δ̇ between the innermost localised
//! ones, and the count of eigenvalues there is confirmed by the argument
//! principle. Each λₙ± is then the unique zero of (−1)ⁿΔ − 2 between
//! consecutive critical points.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::discriminant::{default_subintervals, DiscriminantConfig, DiscriminantEvaluator};
use crate::error::{Error, Result};
use crate::potentials::{bracket, gauge_shift, sobolev_norm, weighted_norm, remainder_norm, FourierPotential, Weight};

type C = Complex64;

/// Gap tolerance factor: a gap is collapsed iff γ ≤ 1e-9·max(1, ‖φ‖₁).
pub const GAP_TOL_FACTOR: f64 = 1e-9;

/// Tolerance on localisation inequalities absorbing root-finding round-off.
pub const LOCALISATION_SLACK: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GapRecord {
    pub n: i64,
    pub lambda_minus: f64,
    pub lambda_plus: f64,
    pub lambda_dot: f64,
    pub tau: f64,
    pub gamma: f64,
    pub collapsed: bool,
    /// |(−1)ⁿΔ(λₙ−) − 2|
    pub residual_minus: f64,
    /// |(−1)ⁿΔ(λₙ+) − 2|
    pub residual_plus: f64,
    /// |Δ̇(λₙ•)|
    pub residual_dot: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PeriodicSpectrum {
    pub entries: Vec<GapRecord>,
    pub n_max: i64,
    /// N_loc = ⌈8‖φ‖₁²⌉.
    pub threshold: i64,
    /// (8‖φ‖₁² − 1/2)π
    pub box_half_width: f64,
    /// ‖φ‖₁
    pub box_height: f64,
    pub gap_tol: f64,
    /// λ•_{−N_max−1}, λ•_{N_max+1}
    pub outer_critical: (f64, f64),
    /// Argument-principle count over the low-frequency rectangle: (found, expected).
    pub low_count: Option<(i64, i64)>,
}

impl PeriodicSpectrum {
    pub fn entry(&self, n: i64) -> Option<&GapRecord> {
        if n.abs() > self.n_max {
            None
        } else {
            self.entries.get((n + self.n_max) as usize)
        }
    }

    pub fn get(&self, n: i64) -> Result<&GapRecord> {
        self.entry(n).ok_or(Error::IndexRange { n, n_max: self.n_max })
    }

    pub fn open_gaps(&self) -> impl Iterator<Item = &GapRecord> {
        self.entries.iter().filter(|e| !e.collapsed)
    }

    /// Largest |n| with ⟨n⟩ < N_loc, or −1 if there is none.
    pub fn low_index(&self) -> i64 {
        self.threshold - 2
    }

    /// λ•_n for |n| ≤ N_max + 1.
    pub fn critical(&self, n: i64) -> Option<f64> {
        if n == -self.n_max - 1 {
            Some(self.outer_critical.0)
        } else if n == self.n_max + 1 {
            Some(self.outer_critical.1)
        } else {
            self.entry(n).map(|e| e.lambda_dot)
        }
    }
}

/// N_loc = ⌈8‖φ‖₁²⌉.
pub fn localisation_threshold(phi: &FourierPotential) -> Result<i64> {
    let n1 = sobolev_norm(phi, 1.0)?;
    Ok(threshold_ceil(8.0 * n1 * n1))
}

/// ⌈x⌉ for a threshold like 8‖φ‖², ignoring a few ulps of rounding so that
/// exact integers stay put.
pub fn threshold_ceil(x: f64) -> i64 {
    (x * (1.0 - 8.0 * f64::EPSILON)).ceil() as i64
}

/// Full periodic spectrum for |n| ≤ N_max.
pub fn locate_spectrum(ev: &DiscriminantEvaluator, n_max: i64) -> Result<PeriodicSpectrum> {
    let phi = ev.potential();
    if !phi.is_real_type() {
        return Err(Error::NotRealType);
    }
    let norm1 = sobolev_norm(phi, 1.0)?;
    let n_loc = threshold_ceil(8.0 * norm1 * norm1);
    if n_max < n_loc + 2 {
        return Err(Error::InvalidArgument(format!("N_max = {n_max} must be at least N_loc + 2 = {}", n_loc + 2)));
    }
    let gap_tol = GAP_TOL_FACTOR * norm1.max(1.0);
    let n_lo = n_loc - 2;

    // critical points of localised indices
    let outer: Vec<i64> = (-(n_max + 1)..=(n_max + 1)).filter(|n| n.abs() > n_lo).collect();
    let outer_dots: Vec<(i64, f64)> = outer
        .par_iter()
        .map(|&n| localised_critical(ev, n).map(|x| (n, x)))
        .collect::<Result<_>>()?;

    let mut dots = vec![0.0; (2 * n_max + 3) as usize];
    let slot = |n: i64| (n + n_max + 1) as usize;
    for (n, x) in &outer_dots {
        dots[slot(*n)] = *x;
    }
    if n_lo >= 0 {
        let a = dots[slot(-n_lo - 1)];
        let b = dots[slot(n_lo + 1)];
        let inner = scan_critical(ev, a, b, (2 * n_lo + 1) as usize)?;
        for (i, x) in inner.into_iter().enumerate() {
            dots[slot(i as i64 - n_lo)] = x;
        }
    }

    let entries: Vec<GapRecord> = (-n_max..=n_max)
        .into_par_iter()
        .map(|n| {
            let (lo, mid, hi) = (dots[slot(n - 1)], dots[slot(n)], dots[slot(n + 1)]);
            let g = gap(ev, n, lo, mid, hi, gap_tol)?;
            if wants_local_frame(&g) {
                Ok(LocalGap::new(ev, n, lo, mid, hi, gap_tol)?.global())
            } else {
                Ok(g)
            }
        })
        .collect::<Result<_>>()?;

    let mut sp = PeriodicSpectrum {
        entries,
        n_max,
        threshold: n_loc,
        box_half_width: (8.0 * norm1 * norm1 - 0.5) * PI,
        box_height: norm1,
        gap_tol,
        outer_critical: (dots[0], dots[slot(n_max + 1)]),
        low_count: None,
    };

    if n_lo >= 0 {
        let left = 0.5 * (sp.get(-n_lo - 1)?.lambda_plus + sp.get(-n_lo)?.lambda_minus);
        let right = 0.5 * (sp.get(n_lo)?.lambda_plus + sp.get(n_lo + 1)?.lambda_minus);
        let h = norm1 + 0.5;
        let found = count_in_rectangle(ev, Rect { re_min: left, re_max: right, im_min: -h, im_max: h })?;
        let expected = 2 * (2 * n_lo + 1);
        sp.low_count = Some((found, expected));
        if found != expected {
            return Err(Error::Indexing { found, expected });
        }
    }
    Ok(sp)
}

fn localised_critical(ev: &DiscriminantEvaluator, n: i64) -> Result<f64> {
    let c = n as f64 * PI;
    let f = |x: f64| ev.values(C::from(x), 2).map(|v| (v.delta_dot.re, v.delta_dot_dot.re));
    let a = c - 0.5 * PI;
    let b = c + 0.5 * PI;
    let fa = f(a)?.0;
    let fb = f(b)?.0;
    if fa * fb > 0.0 {
        return Err(Error::Convergence(format!("Δ̇ has no sign change on the strip of n = {n}")));
    }
    rtsafe(f, a, b, fa, c)
}

/// Zeros of Δ̇ strictly between the critical points `a < b`, expecting `expect` of them.
fn scan_critical(ev: &DiscriminantEvaluator, a: f64, b: f64, expect: usize) -> Result<Vec<f64>> {
    let f = |x: f64| ev.values(C::from(x), 2).map(|v| (v.delta_dot.re, v.delta_dot_dot.re));
    let sa = f(a)?.1.signum();
    let sb = -f(b)?.1.signum();
    let mut steps = ((b - a) / (PI / 8.0)).ceil().max(2.0) as usize;
    let mut found = 0;
    for _ in 0..7 {
        let h = (b - a) / steps as f64;
        let xs: Vec<f64> = (1..steps).map(|i| a + h * i as f64).collect();
        let vals: Vec<f64> = xs.par_iter().map(|&x| f(x).map(|v| v.0)).collect::<Result<_>>()?;
        let mut pts = Vec::with_capacity(steps + 1);
        pts.push((a, sa));
        pts.extend(xs.iter().copied().zip(vals.iter().copied()));
        pts.push((b, sb));
        let brackets: Vec<(f64, f64, f64)> = pts
            .windows(2)
            .filter(|w| w[0].1 * w[1].1 < 0.0 || (w[1].1 == 0.0 && w[0].1 != 0.0))
            .map(|w| (w[0].0, w[1].0, w[0].1))
            .collect();
        found = brackets.len();
        if found == expect {
            return brackets
                .par_iter()
                .map(|&(l, r, fl)| {
                    let fl = if l == a { sa } else { fl };
                    let (l, fl) = if l == a { (a + 1e-3 * (r - a), f(a + 1e-3 * (r - a))?.0) } else { (l, fl) };
                    let (r, fr) = if r == b { (b - 1e-3 * (b - l), f(b - 1e-3 * (b - l))?.0) } else { (r, f(r)?.0) };
                    if fl * fr > 0.0 {
                        return Err(Error::Convergence("lost a Δ̇ bracket near a scan end".into()));
                    }
                    rtsafe(f, l, r, fl, 0.5 * (l + r))
                })
                .collect();
        }
        steps *= 2;
    }
    Err(Error::Indexing { found: found as i64, expected: expect as i64 })
}

fn gap(ev: &DiscriminantEvaluator, n: i64, lo: f64, mid: f64, hi: f64, gap_tol: f64) -> Result<GapRecord> {
    let s = if n % 2 == 0 { 1.0 } else { -1.0 };
    let g = |x: f64| -> Result<(f64, f64)> {
        let v = ev.values(C::from(x), 1)?;
        let sd = s * v.delta.re;
        let val = if sd > 0.0 { v.disc.re / (sd + 2.0) } else { sd - 2.0 };
        Ok((val, s * v.delta_dot.re))
    };
    let vm = ev.values(C::from(mid), 2)?;
    let sd = s * vm.delta.re;
    let h = if sd > 0.0 { vm.disc.re / (sd + 2.0) } else { sd - 2.0 };
    let curv = (s * vm.delta_dot_dot.re).abs().max(1e-300);
    let est = if h > 0.0 { (2.0 * h / curv).sqrt() } else { 0.0 };
    let residual_dot = vm.delta_dot.norm();
    if est < 0.25 * gap_tol {
        return Ok(GapRecord {
            n,
            lambda_minus: mid,
            lambda_plus: mid,
            lambda_dot: mid,
            tau: mid,
            gamma: 0.0,
            collapsed: true,
            residual_minus: h.abs(),
            residual_plus: h.abs(),
            residual_dot,
        });
    }
    let glo = g(lo)?.0;
    let ghi = g(hi)?.0;
    if glo > 0.0 || ghi > 0.0 {
        return Err(Error::SpectrumInconsistency { n, detail: "(−1)ⁿΔ ≥ 2 at a neighbouring critical point".into() });
    }
    let lm = rtsafe(g, lo, mid, glo, (mid - est).max(lo))?;
    let lp = rtsafe(g, mid, hi, h, (mid + est).min(hi))?;
    let rm = g(lm)?;
    let rp = g(lp)?;
    let gamma = (lp - lm).max(0.0);
    Ok(GapRecord {
        n,
        lambda_minus: lm,
        lambda_plus: lp,
        lambda_dot: mid,
        tau: 0.5 * (lm + lp),
        gamma,
        collapsed: gamma <= gap_tol,
        residual_minus: rm.0.abs(),
        residual_plus: rp.0.abs(),
        residual_dot,
    })
}

/// Relative resolution of a gap that f64 can offer at its own position.
fn position_noise(g: &GapRecord) -> f64 {
    4.0 * f64::EPSILON * (1.0 + g.tau.abs()) / g.gamma
}

/// Short open gaps away from the origin are recomputed in the frame of the
/// gauge-shifted potential, where they sit near λ = 0.
pub fn wants_local_frame(g: &GapRecord) -> bool {
    g.n != 0 && !g.collapsed && position_noise(g) > LOCAL_FRAME_NOISE
}

const LOCAL_FRAME_NOISE: f64 = 1e-11;

/// The n-th gap seen from the potential gauge-shifted by −n, whose spectrum
/// is the original one translated by −nπ. There it is gap 0, and values of λ
/// in `gap` are relative to `offset` = nπ.
#[derive(Clone, Debug)]
pub struct LocalGap {
    pub ev: DiscriminantEvaluator,
    pub gap: GapRecord,
    pub n: i64,
    pub offset: f64,
}

impl LocalGap {
    /// `lo` and `hi` are the neighbouring critical points and `mid` a point
    /// inside the gap, all in the original frame.
    pub fn new(ev: &DiscriminantEvaluator, n: i64, lo: f64, mid: f64, hi: f64, gap_tol: f64) -> Result<Self> {
        let shifted = gauge_shift(ev.potential(), -n)?;
        let n_x = ev.subintervals().max(default_subintervals(shifted.band()));
        let n_x = n_x + n_x % 2;
        let config = DiscriminantConfig { subintervals: Some(n_x), ..ev.config().clone() };
        let local = DiscriminantEvaluator::with_config(shifted, config)?;
        let offset = n as f64 * PI;
        let gap = gap(&local, 0, lo - offset, mid - offset, hi - offset, gap_tol)?;
        Ok(Self { ev: local, gap, n, offset })
    }

    pub fn from_spectrum(ev: &DiscriminantEvaluator, sp: &PeriodicSpectrum, n: i64) -> Result<Self> {
        let g = sp.get(n)?;
        let lo = sp.critical(n - 1).unwrap_or(g.lambda_minus - PI);
        let hi = sp.critical(n + 1).unwrap_or(g.lambda_plus + PI);
        Self::new(ev, n, lo, g.lambda_dot, hi, sp.gap_tol)
    }

    /// The record expressed in the original frame.
    pub fn global(&self) -> GapRecord {
        let g = &self.gap;
        GapRecord {
            lambda_minus: self.offset + g.lambda_minus,
            lambda_plus: self.offset + g.lambda_plus,
            lambda_dot: self.offset + g.lambda_dot,
            tau: self.offset + g.tau,
            n: self.n,
            ..*g
        }
    }
}

/// Newton iteration safeguarded by bisection on a bracket `[a, b]` with
/// f(a)·f(b) ≤ 0, in the spirit of the classical `rtsafe`.
pub(crate) fn rtsafe<F>(mut f: F, a: f64, b: f64, fa: f64, x0: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<(f64, f64)>,
{
    let (mut xl, mut xh) = if fa < 0.0 { (a, b) } else { (b, a) };
    let mut x = if x0 > a.min(b) && x0 < a.max(b) { x0 } else { 0.5 * (a + b) };
    let mut dxold = (b - a).abs();
    let mut dx = dxold;
    let tol = 4.0 * f64::EPSILON * x.abs().max(1.0);
    for _ in 0..200 {
        let (fx, dfx) = f(x)?;
        if fx == 0.0 {
            return Ok(x);
        }
        if fx < 0.0 {
            xl = x;
        } else {
            xh = x;
        }
        let out_of_range = ((x - xh) * dfx - fx) * ((x - xl) * dfx - fx) > 0.0;
        if out_of_range || (2.0 * fx).abs() > (dxold * dfx).abs() {
            dxold = dx;
            dx = 0.5 * (xh - xl);
            x = xl + dx;
        } else {
            dxold = dx;
            dx = fx / dfx;
            x -= dx;
        }
        if dx.abs() < tol || (xh - xl).abs() < tol {
            return Ok(x);
        }
    }
    Err(Error::Convergence(format!("root iteration stalled near {x}")))
}

/// Axis-aligned rectangle in the λ-plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Rect {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

/// Number of zeros of Δ² − 4 inside `rect`, counted with multiplicity, as
/// the winding number of Δ² − 4 along the boundary.
pub fn count_in_rectangle(ev: &DiscriminantEvaluator, rect: Rect) -> Result<i64> {
    let mut attempts = 0;
    loop {
        let grow = 1e-3 * attempts as f64;
        let r = Rect {
            re_min: rect.re_min - grow,
            re_max: rect.re_max + grow,
            im_min: rect.im_min - grow,
            im_max: rect.im_max + grow,
        };
        match winding(ev, r) {
            Ok(w) => return Ok(w),
            Err(Error::Boundary { .. }) if attempts < 3 => attempts += 1,
            Err(Error::Boundary { .. }) => return Err(Error::Boundary { attempts }),
            Err(e) => return Err(e),
        }
    }
}

fn winding(ev: &DiscriminantEvaluator, r: Rect) -> Result<i64> {
    let corners = [
        C::new(r.re_min, r.im_min),
        C::new(r.re_max, r.im_min),
        C::new(r.re_max, r.im_max),
        C::new(r.re_min, r.im_max),
    ];
    let disc = |z: C| -> Result<C> {
        let d = ev.delta(z)?.1;
        if d.norm() < 1e-8 {
            Err(Error::Boundary { attempts: 0 })
        } else {
            Ok(d)
        }
    };
    let mut total = 0.0;
    for i in 0..4 {
        let z0 = corners[i];
        let z1 = corners[(i + 1) % 4];
        let len = (z1 - z0).norm();
        let mut t = 0.0;
        let mut h = (len / 16.0).min(0.1);
        let mut d0 = disc(z0)?;
        while t < len {
            let step = h.min(len - t);
            let z = z0 + (z1 - z0) * ((t + step) / len);
            let d1 = disc(z)?;
            let dtheta = (d1 / d0).arg();
            if dtheta.abs() > PI / 4.0 {
                h = step * 0.5;
                if h < 1e-10 {
                    return Err(Error::Boundary { attempts: 0 });
                }
                continue;
            }
            total += dtheta;
            t += step;
            d0 = d1;
            h = (step * 1.5).min(0.25);
        }
    }
    let w = total / (2.0 * PI);
    if (w - w.round()).abs() > 0.1 {
        return Err(Error::Boundary { attempts: 0 });
    }
    Ok(w.round() as i64)
}

/// Localisation check for one index.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LocalisationEntry {
    pub n: i64,
    pub above_threshold: bool,
    /// max |λₙ± − nπ| above threshold, max |λₙ±| below.
    pub displacement: f64,
    /// ‖φ‖₁²/⟨n⟩ + √2‖φ‖₁/⟨2n⟩ above threshold, the box half-width below.
    pub bound: f64,
    pub within_bound: bool,
    pub within_cap: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LocalisationReport {
    pub entries: Vec<LocalisationEntry>,
    pub worst_margin_above: f64,
    pub worst_margin_below: f64,
    pub passed: bool,
}

pub fn localization_report(sp: &PeriodicSpectrum, phi: &FourierPotential) -> Result<LocalisationReport> {
    let norm1 = sobolev_norm(phi, 1.0)?;
    let n_loc = sp.threshold;
    let mut entries = Vec::with_capacity(sp.entries.len());
    let mut worst_above = f64::INFINITY;
    let mut worst_below = f64::INFINITY;
    for e in &sp.entries {
        let n = e.n;
        let above = bracket(n as f64) >= n_loc as f64;
        let (disp, bound, cap_ok) = if above {
            let c = n as f64 * PI;
            let d = (e.lambda_minus - c).abs().max((e.lambda_plus - c).abs());
            let b = norm1 * norm1 / bracket(n as f64) + 2f64.sqrt() * norm1 / bracket(2.0 * n as f64);
            (d, b, d <= PI / 5.0 + LOCALISATION_SLACK)
        } else {
            let d = e.lambda_minus.abs().max(e.lambda_plus.abs());
            (d, sp.box_half_width, true)
        };
        let slack = LOCALISATION_SLACK * bracket(n as f64 * PI);
        let ok = disp <= bound + slack;
        if above {
            worst_above = worst_above.min(bound - disp);
        } else {
            worst_below = worst_below.min(bound - disp);
        }
        entries.push(LocalisationEntry {
            n,
            above_threshold: above,
            displacement: disp,
            bound,
            within_bound: ok,
            within_cap: cap_ok,
        });
    }
    let passed = entries.iter().all(|e| e.within_bound && e.within_cap);
    Ok(LocalisationReport { entries, worst_margin_above: worst_above, worst_margin_below: worst_below, passed })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GapEntry {
    pub n: i64,
    pub weighted_gap: f64,
    pub above_threshold: bool,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GapReport {
    pub norm_w: f64,
    /// Smallest N ≥ 0 with ⟨N⟩ ≥ 8‖φ‖_w².
    pub n_threshold: i64,
    /// Σ_{N ≤ |n| ≤ N_max} w_{2n}²γₙ²
    pub sum_lhs: f64,
    /// 6‖R_Nφ‖_w² + 1152‖φ‖_w⁶/⟨N⟩
    pub sum_rhs: f64,
    /// 4‖φ‖_w
    pub individual_bound: f64,
    pub entries: Vec<GapEntry>,
    pub passed: bool,
}

/// Weighted gap estimates: the sum bound over |n| ≥ N and the individual
/// bound w_{2n}γₙ ≤ 4‖φ‖_w above the weighted threshold.
pub fn gap_report(sp: &PeriodicSpectrum, phi: &FourierPotential, w: &Weight) -> Result<GapReport> {
    let range = (2 * sp.n_max + 2).max(crate::potentials::DEFAULT_VALIDATION_RANGE);
    let rep = w.validate(range);
    if !rep.m1 {
        return Err(Error::InvalidArgument("gap estimates need a weight of class M¹".into()));
    }
    let nw = weighted_norm(phi, w)?;
    let n_thr = (threshold_ceil(8.0 * nw * nw) - 1).max(0);
    if n_thr > sp.n_max {
        return Err(Error::Threshold(format!(
            "weighted threshold N = {n_thr} exceeds the computed range N_max = {}",
            sp.n_max
        )));
    }
    let mut entries = Vec::new();
    let mut terms = Vec::new();
    let ib = 4.0 * nw;
    for e in &sp.entries {
        let wg = w.value(2 * e.n)? * e.gamma;
        let above = e.n.abs() >= n_thr;
        if above {
            terms.push(wg * wg);
        }
        entries.push(GapEntry { n: e.n, weighted_gap: wg, above_threshold: above, ok: !above || wg <= ib });
    }
    let sum_lhs = crate::potentials::pairwise_sum(&terms);
    let r = remainder_norm(phi, w, n_thr)?;
    let sum_rhs = 6.0 * r * r + 1152.0 * nw.powi(6) / bracket(n_thr as f64);
    let passed = sum_lhs <= sum_rhs && entries.iter().all(|e| e.ok);
    Ok(GapReport { norm_w: nw, n_threshold: n_thr, sum_lhs, sum_rhs, individual_bound: ib, entries, passed })
}
