//! Both sides of the two-sided action and Birkhoff-norm estimates, evaluated
//! per potential and reduced to empirical constants over families.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::actions::{
    action_norms, birkhoff_norm, compute_actions, ActionConfig, ActionMethod, ActionNorm, ActionSpectrum,
    DEFAULT_LEVELS,
};
use crate::discriminant::{DiscriminantConfig, DiscriminantEvaluator};
use crate::error::{Error, Result};
use crate::hierarchy::{hform_from, hierarchy_compute, HierarchyEvaluation};
use crate::potentials::{derivative_energy, sobolev_norm, weighted_norm, FourierPotential, Weight};
use crate::spectrum::{gap_report, localisation_threshold, locate_spectrum, threshold_ceil, GapReport, PeriodicSpectrum};

/// lhs ≤ C·rhs, with ratio = lhs/rhs (0/0 = 0).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Record {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

impl Record {
    pub fn new(lhs: f64, rhs: f64) -> Self {
        let ratio = if lhs == 0.0 {
            0.0
        } else if rhs == 0.0 {
            f64::INFINITY
        } else {
            lhs / rhs
        };
        Self { lhs, rhs, ratio }
    }
}

/// Everything the estimates need about one potential.
#[derive(Clone, Debug)]
pub struct Analysis {
    pub phi: FourierPotential,
    pub spectrum: PeriodicSpectrum,
    pub actions: ActionSpectrum,
    pub hierarchy: HierarchyEvaluation,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnalysisOptions {
    pub discriminant: DiscriminantConfig,
    pub actions: ActionConfig,
    pub method: ActionMethod,
    pub levels: Vec<u32>,
    /// Weights whose thresholds N_max must cover.
    pub weights: Vec<Weight>,
    /// Lower bound for N_max; raised to [`family_n_max`] when smaller.
    pub n_max: Option<i64>,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            discriminant: DiscriminantConfig::default(),
            actions: ActionConfig::default(),
            method: ActionMethod::GapIntegral,
            levels: DEFAULT_LEVELS.to_vec(),
            weights: vec![],
            n_max: None,
        }
    }
}

/// max(4·max(N_loc, K), N_loc + 2, ⌈8‖φ‖_w²⌉ + 2 over the weights).
pub fn family_n_max(phi: &FourierPotential, weights: &[Weight]) -> Result<i64> {
    let n_loc = localisation_threshold(phi)?;
    let mut n = (4 * n_loc.max(phi.band() as i64)).max(n_loc + 2);
    for w in weights {
        let nw = weighted_norm(phi, w)?;
        n = n.max(threshold_ceil(8.0 * nw * nw) + 2);
    }
    Ok(n)
}

pub fn analyse(phi: &FourierPotential, opts: &AnalysisOptions) -> Result<Analysis> {
    if !phi.is_real_type() {
        return Err(Error::NotRealType);
    }
    let floor = family_n_max(phi, &opts.weights)?;
    let n_max = opts.n_max.map_or(floor, |n| n.max(floor));
    let ev = DiscriminantEvaluator::with_config(phi.clone(), opts.discriminant.clone())?;
    let spectrum = locate_spectrum(&ev, n_max)?;
    let actions = compute_actions(&ev, &spectrum, &opts.levels, opts.method, &opts.actions)?;
    let k_max = opts.levels.iter().copied().max().unwrap_or(1).max(3) as usize;
    let hierarchy = hierarchy_compute(phi, k_max)?;
    Ok(Analysis { phi: phi.clone(), spectrum, actions, hierarchy })
}

fn sob(a: &Analysis, s: f64) -> Result<f64> {
    sobolev_norm(&a.phi, s)
}

/// ‖I‖_{ℓ¹_s} with the extrapolated tail folded in.
fn action_l1(a: &Analysis, s: f64) -> Result<f64> {
    Ok(action_norms(&a.actions, &a.phi, &ActionNorm::Sobolev(s))?.with_tail())
}

/// ‖I‖_{ℓ¹_s} over the computed range only.
fn action_l1_truncated(a: &Analysis, s: f64) -> Result<f64> {
    Ok(action_norms(&a.actions, &a.phi, &ActionNorm::Sobolev(s))?.value)
}

/// ‖I‖_{ℓ¹_{2m}} ≤ c_m²(‖φ‖_m² + (1+‖φ‖₁)^{4m}‖φ‖₀²).
pub fn check_act_sob_i(a: &Analysis, m: u32) -> Result<Record> {
    let lhs = action_l1(a, 2.0 * m as f64)?;
    let (nm, n1, n0) = (sob(a, m as f64)?, sob(a, 1.0)?, sob(a, 0.0)?);
    Ok(Record::new(lhs, nm * nm + (1.0 + n1).powi(4 * m as i32) * n0 * n0))
}

/// ‖φ‖_m² ≤ d_m²(‖I‖_{ℓ¹_{2m}} + (1+‖I‖_{ℓ¹_2})^{4m−3}‖I‖_{ℓ¹}).
pub fn check_act_sob_ii(a: &Analysis, m: u32) -> Result<Record> {
    if m == 0 {
        return Err(Error::InvalidArgument("m must be at least 1".into()));
    }
    let nm = sob(a, m as f64)?;
    let i2m = action_l1_truncated(a, 2.0 * m as f64)?;
    let i2 = action_l1_truncated(a, 2.0)?;
    let i0 = action_l1_truncated(a, 0.0)?;
    Ok(Record::new(nm * nm, i2m + (1.0 + i2).powi(4 * m as i32 - 3) * i0))
}

fn omega_norm(a: &Analysis, s: f64, with_tail: bool) -> Result<f64> {
    if with_tail {
        Ok((2.0 * action_l1(a, 2.0 * s)?).max(0.0).sqrt())
    } else {
        birkhoff_norm(&a.actions, &ActionNorm::Sobolev(s))
    }
}

/// (i) ‖Ω‖_m ≤ c_m(‖φ‖_m + (1+‖φ‖₁)^{2m}‖φ‖₀),
/// (ii) ‖φ‖_m ≤ d_m(‖Ω‖_m + (1+‖Ω‖₁)^{4m−3}‖Ω‖₀).
pub fn check_b_est(a: &Analysis, m: u32) -> Result<(Record, Record)> {
    if m == 0 {
        return Err(Error::InvalidArgument("m must be at least 1".into()));
    }
    let (nm, n1, n0) = (sob(a, m as f64)?, sob(a, 1.0)?, sob(a, 0.0)?);
    let i = Record::new(omega_norm(a, m as f64, true)?, nm + (1.0 + n1).powi(2 * m as i32) * n0);
    let om = omega_norm(a, m as f64, false)?;
    let o1 = omega_norm(a, 1.0, false)?;
    let o0 = omega_norm(a, 0.0, false)?;
    let ii = Record::new(nm, om + (1.0 + o1).powi(4 * m as i32 - 3) * o0);
    Ok((i, ii))
}

/// (i) Σ w_{2n}²|Iₙ| ≤ c_w² w[16‖φ‖_w²]²‖φ‖_w², (ii) ‖Ω‖_w ≤ c_w w[16‖φ‖_w²]‖φ‖_w.
pub fn check_act_west(a: &Analysis, w: &Weight) -> Result<(Record, Record)> {
    let nw = weighted_norm(&a.phi, w)?;
    let ext = w.extension(16.0 * nw * nw)?;
    let sum = action_norms(&a.actions, &a.phi, &ActionNorm::Weighted(w))?.with_tail();
    let i = Record::new(sum, ext * ext * nw * nw);
    let ii = Record::new((2.0 * sum).max(0.0).sqrt(), ext * nw);
    Ok((i, ii))
}

/// ‖I‖_{ℓ¹_{2s}} ≤ c_s²(1+‖φ‖_s)^{4s}‖φ‖_s² and ‖Ω‖_s ≤ c_s(1+‖φ‖_s)^{2s}‖φ‖_s.
pub fn check_corollary(a: &Analysis, s: f64) -> Result<(Record, Record)> {
    if !(s >= 1.0) {
        return Err(Error::InvalidArgument(format!("the real-exponent estimate needs s >= 1, got {s}")));
    }
    let ns = sob(a, s)?;
    let i = Record::new(action_l1(a, 2.0 * s)?, (1.0 + ns).powf(4.0 * s) * ns * ns);
    let ii = Record::new(omega_norm(a, s, true)?, (1.0 + ns).powf(2.0 * s) * ns);
    Ok((i, ii))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct H3Report {
    /// H₃ − 2H₁²
    pub lhs_first: f64,
    /// Σ(2nπ)²Iₙ
    pub rhs_first: f64,
    /// ⅓‖φ‖₁²
    pub lhs_second: f64,
    /// ‖I‖_{ℓ¹_2} + ‖I‖_{ℓ¹}²
    pub rhs_second: f64,
    pub slack_first: f64,
    pub slack_second: f64,
    pub passed: bool,
}

/// Relative slack allowed for quadrature noise in inequalities that hold
/// with equality in exact arithmetic only for trivial potentials.
pub const INEQUALITY_SLACK: f64 = 1e-9;

fn holds(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs + INEQUALITY_SLACK * lhs.abs().max(rhs.abs()).max(1e-300)
}

/// H₃ − 2H₁² ≤ Σ(2nπ)²Iₙ and ⅓‖φ‖₁² ≤ ‖I‖_{ℓ¹_2} + ‖I‖_{ℓ¹}², with the
/// action sums truncated to |n| ≤ N_max.
pub fn check_h3_lemma(a: &Analysis) -> Result<H3Report> {
    let h1 = a.hierarchy.hamiltonian(1)?.re;
    let h3 = a.hierarchy.hamiltonian(3)?.re;
    let terms: Vec<f64> = a
        .actions
        .indices()
        .map(|n| (2.0 * PI * n as f64).powi(2) * a.actions.action(n))
        .collect();
    let rhs_first = crate::potentials::pairwise_sum(&terms);
    let lhs_first = h3 - 2.0 * h1 * h1;
    let n1 = sob(a, 1.0)?;
    let lhs_second = n1 * n1 / 3.0;
    let i0 = action_l1_truncated(a, 0.0)?;
    let rhs_second = action_l1_truncated(a, 2.0)? + i0 * i0;
    Ok(H3Report {
        lhs_first,
        rhs_first,
        lhs_second,
        rhs_second,
        slack_first: rhs_first - lhs_first,
        slack_second: rhs_second - lhs_second,
        passed: holds(lhs_first, rhs_first) && holds(lhs_second, rhs_second),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SobRepReport {
    pub m: u32,
    /// ½‖φ_{(m)}‖₀² = ∫|ψ^{(m)}|²
    pub lhs: f64,
    /// 4^m Σ J_{n,2m+1} − ∫p_{2m}
    pub rhs: f64,
    pub residual: f64,
    pub passed: bool,
}

pub const SOB_REP_TOLERANCE: f64 = 1e-4;

/// ∫|ψ^{(m)}|² = 4^m Σ J_{n,2m+1} − ∫p_{2m}, the polynomial part taken from
/// the hierarchy.
pub fn check_sob_rep(a: &Analysis, m: u32) -> Result<SobRepReport> {
    let h = hform_from(&a.hierarchy, &a.phi, m as usize)?;
    let (sum, tail) = a
        .actions
        .level_sum(2 * m + 1)
        .ok_or_else(|| Error::InvalidArgument(format!("level {} was not computed", 2 * m + 1)))?;
    let lhs = derivative_energy(&a.phi, m);
    let rhs = 4f64.powi(m as i32) * (sum + tail.copysign(sum)) - h.remainder;
    let residual = (lhs - rhs).abs() / lhs.max(1.0);
    Ok(SobRepReport { m, lhs, rhs, residual, passed: residual <= SOB_REP_TOLERANCE })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ActionGapReport {
    /// 2¹¹(1+‖φ‖₁²)
    pub constant: f64,
    /// Indices with |n| ≥ 8‖φ‖₁² that were checked.
    pub checked: usize,
    /// max |Iₙ|/γₙ² over checked open gaps.
    pub worst_ratio: f64,
    pub failures: Vec<i64>,
    pub passed: bool,
}

/// |Iₙ| ≤ 2¹¹(1+‖φ‖₁²)γₙ² for |n| ≥ 8‖φ‖₁²; collapsed gaps must carry
/// actions at quadrature-noise level.
pub fn check_action_gap(a: &Analysis) -> Result<ActionGapReport> {
    let n1 = sob(a, 1.0)?;
    let constant = 2048.0 * (1.0 + n1 * n1);
    let mut checked = 0;
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    for (idx, g) in a.spectrum.entries.iter().enumerate() {
        if (g.n.abs() as f64) < 8.0 * n1 * n1 {
            continue;
        }
        checked += 1;
        let i = a.actions.i[idx].abs();
        let noise = a.actions.errors[idx].abs() + 1e-14 * f64::EPSILON;
        if g.gamma > 0.0 {
            worst = worst.max(i / (g.gamma * g.gamma));
        }
        if i > constant * g.gamma * g.gamma + noise {
            failures.push(g.n);
        }
    }
    Ok(ActionGapReport { constant, checked, worst_ratio: worst, passed: failures.is_empty(), failures })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GapTotalReport {
    /// Σₙ w_{2n}²γₙ² over |n| ≤ N_max.
    pub lhs: f64,
    /// 265π² w[16‖φ‖_w²]² (1+‖φ‖_w²)‖φ‖_w²
    pub rhs: f64,
    pub passed: bool,
}

/// The all-index gap sum for real-type potentials.
pub fn check_gap_total(a: &Analysis, w: &Weight) -> Result<GapTotalReport> {
    let nw = weighted_norm(&a.phi, w)?;
    let ext = w.extension(16.0 * nw * nw)?;
    let mut terms = Vec::with_capacity(a.spectrum.entries.len());
    for g in &a.spectrum.entries {
        let x = w.value(2 * g.n)? * g.gamma;
        terms.push(x * x);
    }
    let lhs = crate::potentials::pairwise_sum(&terms);
    let rhs = 265.0 * PI * PI * ext * ext * (1.0 + nw * nw) * nw * nw;
    Ok(GapTotalReport { lhs, rhs, passed: lhs <= rhs })
}

/// Every inequality with an explicit constant, for one weight.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExplicitReport {
    pub gaps: GapReport,
    pub gap_total: GapTotalReport,
    pub action_gap: ActionGapReport,
    pub h3: H3Report,
    pub passed: bool,
}

pub fn check_explicit(a: &Analysis, w: &Weight) -> Result<ExplicitReport> {
    let gaps = gap_report(&a.spectrum, &a.phi, w)?;
    let gap_total = check_gap_total(a, w)?;
    let action_gap = check_action_gap(a)?;
    let h3 = check_h3_lemma(a)?;
    let passed = gaps.passed && gap_total.passed && action_gap.passed && h3.passed;
    Ok(ExplicitReport { gaps, gap_total, action_gap, h3, passed })
}

/// Theorem families that carry empirical constants.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Theorem {
    /// Birkhoff-norm bounds, both directions.
    BEst,
    /// Sobolev action bounds, both directions.
    ActSob,
    /// Weighted action and Birkhoff-norm bounds.
    ActWest,
    /// Real-exponent Sobolev version of the weighted bounds.
    Corollary,
}

impl std::str::FromStr for Theorem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "b-est" => Ok(Theorem::BEst),
            "act-sob" => Ok(Theorem::ActSob),
            "act-west" => Ok(Theorem::ActWest),
            "corollary" => Ok(Theorem::Corollary),
            _ => Err(Error::Config(format!("unknown theorem '{s}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct EstimateReport {
    pub theorem: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weight: Option<Weight>,
    pub per_potential: Vec<Record>,
    /// Largest ratio over the family.
    pub empirical_constant: f64,
    /// All ratios finite.
    pub passed: bool,
}

impl EstimateReport {
    fn new(theorem: &str, per_potential: Vec<Record>) -> Self {
        let empirical_constant = per_potential.iter().map(|r| r.ratio).fold(0.0, f64::max);
        let passed = per_potential.iter().all(|r| r.ratio.is_finite() && r.ratio >= 0.0);
        Self { theorem: theorem.into(), m: None, s: None, weight: None, per_potential, empirical_constant, passed }
    }
}

pub const COROLLARY_EXPONENTS: [f64; 3] = [1.0, 1.5, 2.5];

fn collect<F>(analyses: &[Analysis], f: F) -> Result<(Vec<Record>, Vec<Record>)>
where
    F: Fn(&Analysis) -> Result<(Record, Record)> + Sync + Send,
{
    let pairs: Vec<(Record, Record)> = analyses.par_iter().map(f).collect::<Result<_>>()?;
    Ok(pairs.into_iter().unzip())
}

/// Empirical-constant reports for the requested theorems. Sobolev theorems
/// run for m ∈ {1, 2, 3}; the weighted one for each weight.
pub fn estimate_reports(analyses: &[Analysis], theorems: &[Theorem], weights: &[Weight]) -> Result<Vec<EstimateReport>> {
    let mut out = Vec::new();
    for th in theorems {
        match th {
            Theorem::BEst | Theorem::ActSob => {
                for m in 1..=3u32 {
                    let (i, ii) = if *th == Theorem::BEst {
                        collect(analyses, |a| check_b_est(a, m))?
                    } else {
                        collect(analyses, |a| Ok((check_act_sob_i(a, m)?, check_act_sob_ii(a, m)?)))?
                    };
                    let name = if *th == Theorem::BEst { "b-est" } else { "act-sob" };
                    for (part, recs) in [("i", i), ("ii", ii)] {
                        let mut r = EstimateReport::new(&format!("{name} ({part})"), recs);
                        r.m = Some(m);
                        out.push(r);
                    }
                }
            }
            Theorem::ActWest => {
                for w in weights {
                    let (i, ii) = collect(analyses, |a| check_act_west(a, w))?;
                    for (part, recs) in [("i", i), ("ii", ii)] {
                        let mut r = EstimateReport::new(&format!("act-west ({part})"), recs);
                        r.weight = Some(w.clone());
                        out.push(r);
                    }
                }
            }
            Theorem::Corollary => {
                for s in COROLLARY_EXPONENTS {
                    let (i, ii) = collect(analyses, |a| check_corollary(a, s))?;
                    for (part, recs) in [("i", i), ("ii", ii)] {
                        let mut r = EstimateReport::new(&format!("corollary ({part})"), recs);
                        r.s = Some(s);
                        out.push(r);
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Analyses of every family member, in member order.
pub fn analyse_family(members: &[FourierPotential], opts: &AnalysisOptions) -> Result<Vec<Analysis>> {
    members.par_iter().map(|p| analyse(p, opts)).collect()
}
