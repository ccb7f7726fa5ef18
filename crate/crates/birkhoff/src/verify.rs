//! The acceptance suite: ten end-to-end checks over constant potentials and a
//! seeded random family.

use std::time::Instant;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::actions::{action_comparison, action_contour};
use crate::discriminant::{DiscriminantConfig, DiscriminantEvaluator};
use crate::error::Result;
use crate::estimates::{
    analyse, check_act_sob_i, check_act_sob_ii, check_act_west, check_explicit, check_sob_rep, Analysis,
    AnalysisOptions,
};
use crate::family::FamilySpec;
use crate::hierarchy::trace_check;
use crate::lyapunov_schmidt::ls_check;
use crate::potentials::{sobolev_norm, FourierPotential, Weight};
use crate::spectrum::{localisation_threshold, localization_report, locate_spectrum};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriterionResult {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    /// Worst value of the checked quantity (residual, ratio growth, …).
    pub worst: f64,
    pub tolerance: f64,
    pub seconds: f64,
    pub detail: String,
}

impl std::fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "criterion {:>2} {:<28} {}  worst={:.3e} tol={:.1e} ({:.1} s) {}",
            self.id,
            self.name,
            if self.passed { "PASS" } else { "FAIL" },
            self.worst,
            self.tolerance,
            self.seconds,
            self.detail
        )
    }
}

/// Missing fields in JSON take their values from [`VerifyOptions::full`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyOptions {
    /// Family used by criteria 2–8 and 10.
    pub members: usize,
    /// Family sizes compared by criterion 9.
    pub uniformity: (usize, usize),
    pub seed: u64,
    pub constants: Vec<f64>,
}

impl VerifyOptions {
    pub fn full() -> Self {
        Self { members: 20, uniformity: (40, 80), seed: 1, constants: vec![0.25, 0.5, 1.0] }
    }

    pub fn quick() -> Self {
        Self { members: 4, uniformity: (6, 12), seed: 1, constants: vec![0.25, 0.5, 1.0] }
    }
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self::full()
    }
}

pub fn family_weights() -> Vec<Weight> {
    vec![Weight::Sobolev { s: 1.0 }, Weight::Abel { s: 1.0, a: 0.2 }]
}

/// Family analyses shared by the criteria, with per-member wall time.
pub struct Verifier {
    pub opts: VerifyOptions,
    pub analyses: Vec<Analysis>,
    pub seconds: Vec<f64>,
}

impl Verifier {
    pub fn new(opts: VerifyOptions) -> Result<Self> {
        let total = opts.members.max(opts.uniformity.1);
        let members = FamilySpec::sobolev(total, opts.seed).generate()?;
        let aopts = AnalysisOptions { weights: family_weights(), ..Default::default() };
        let mut analyses = Vec::with_capacity(total);
        let mut seconds = Vec::with_capacity(total);
        for p in &members {
            let t = Instant::now();
            analyses.push(analyse(p, &aopts)?);
            seconds.push(t.elapsed().as_secs_f64());
        }
        Ok(Self { opts, analyses, seconds })
    }

    fn family(&self) -> &[Analysis] {
        &self.analyses[..self.opts.members]
    }

    fn family_seconds(&self) -> f64 {
        self.seconds[..self.opts.members].iter().sum()
    }

    pub fn run(&self, id: u32) -> CriterionResult {
        let t = Instant::now();
        let r = match id {
            1 => self.constants(),
            2 => self.trace(1),
            3 => self.trace(3),
            4 => self.localisation(),
            5 => self.comparison(),
            6 => self.methods(),
            7 => self.reduction(),
            8 => self.explicit(),
            9 => self.uniformity(),
            10 => self.sob_rep(),
            _ => Err(crate::Error::InvalidArgument(format!("no criterion {id}"))),
        };
        let mut r = r.unwrap_or_else(|e| CriterionResult {
            id,
            name: NAMES.get(id as usize - 1).copied().unwrap_or("?"),
            passed: false,
            worst: f64::NAN,
            tolerance: f64::NAN,
            seconds: 0.0,
            detail: format!("error: {e}"),
        });
        r.seconds += t.elapsed().as_secs_f64();
        r
    }

    pub fn run_all(&self) -> Vec<CriterionResult> {
        (1..=10).map(|i| self.run(i)).collect()
    }

    fn constants(&self) -> Result<CriterionResult> {
        let opts = AnalysisOptions { levels: vec![1], ..Default::default() };
        let mut worst = 0.0f64;
        let mut fails = Vec::new();
        for &a in &self.opts.constants {
            let ev = DiscriminantEvaluator::new(FourierPotential::constant(a));
            for i in 0..100 {
                let l = -20.0 + 40.0 * i as f64 / 99.0;
                let exact = 2.0 * Complex64::from(l * l - a * a).sqrt().cos();
                let (d, _) = ev.delta(Complex64::from(l))?;
                let err = (d - exact).norm() / exact.norm();
                worst = worst.max(err / 1e-8);
                if err > 1e-8 {
                    fails.push(format!("a={a} Δ({l:.3}) off by {err:.1e}"));
                }
            }
            let an = analyse(&FourierPotential::constant(a), &opts)?;
            let g0 = an.spectrum.get(0)?.gamma;
            let e = (g0 - 2.0 * a).abs() / (2.0 * a);
            worst = worst.max(e / 1e-8);
            if e > 1e-8 {
                fails.push(format!("a={a} γ₀ off by {e:.1e}"));
            }
            let e = (an.actions.action(0) - a * a).abs() / (a * a);
            worst = worst.max(e / 1e-7);
            if e > 1e-7 {
                fails.push(format!("a={a} I₀ off by {e:.1e}"));
            }
            for n in an.actions.indices().filter(|&n| n != 0) {
                let i = an.actions.action(n).abs();
                worst = worst.max(i / 1e-10);
                if i >= 1e-10 {
                    fails.push(format!("a={a} |I_{n}| = {i:.1e}"));
                }
            }
        }
        Ok(result(1, worst, 1.0, fails, "worst error / tolerance"))
    }

    fn trace(&self, k: usize) -> Result<CriterionResult> {
        let id = if k == 1 { 2 } else { 3 };
        let tol = if k == 1 { 1e-5 } else { 1e-4 };
        let mut worst = 0.0f64;
        let mut fails = Vec::new();
        for (i, a) in self.family().iter().enumerate() {
            let res = if k == 1 {
                let n0 = sobolev_norm(&a.phi, 0.0)?;
                let (s, tail) = a.actions.level_sum(1).expect("level 1");
                (2.0 * (s + tail) - n0 * n0).abs() / (n0 * n0)
            } else {
                let h3 = a.hierarchy.hamiltonian(3)?.re;
                let r = trace_check(&a.hierarchy, &a.actions, 3)?;
                (4.0 * (r.sum + r.tail) - h3).abs() / h3.abs()
            };
            worst = worst.max(res);
            if !(res <= tol) {
                fails.push(format!("member {i}: {res:.2e}"));
            }
        }
        let mut r = result(id, worst, tol, fails, "");
        if k == 1 {
            let secs = self.family_seconds();
            r.detail = format!("family analysis {secs:.1} s (limit 120 s) {}", r.detail);
            if secs > 120.0 {
                r.passed = false;
            }
        }
        Ok(r)
    }

    fn localisation(&self) -> Result<CriterionResult> {
        let mut fails = Vec::new();
        let mut worst = f64::NEG_INFINITY;
        let mut check = |label: String, sp: &crate::spectrum::PeriodicSpectrum, phi: &FourierPotential| -> Result<()> {
            let rep = localization_report(sp, phi)?;
            for e in &rep.entries {
                worst = worst.max(e.displacement / e.bound);
            }
            if !rep.passed {
                let bad: Vec<i64> = rep.entries.iter().filter(|e| !(e.within_bound && e.within_cap)).map(|e| e.n).collect();
                fails.push(format!("{label}: n = {bad:?}"));
            }
            Ok(())
        };
        for (i, a) in self.family().iter().enumerate() {
            check(format!("member {i}"), &a.spectrum, &a.phi)?;
        }
        for &c in &self.opts.constants {
            let phi = FourierPotential::constant(c);
            let ev = DiscriminantEvaluator::new(phi.clone());
            let sp = locate_spectrum(&ev, localisation_threshold(&phi)? + 8)?;
            check(format!("constant {c}"), &sp, &phi)?;
        }
        Ok(result(4, worst, 1.0, fails, "max displacement / bound"))
    }

    fn comparison(&self) -> Result<CriterionResult> {
        let mut fails = Vec::new();
        let mut worst = 0.0f64;
        let mut count = 0;
        for (i, a) in self.family().iter().enumerate() {
            for e in action_comparison(&a.actions, a.spectrum.threshold as f64, &[1, 2, 3], 1e-12) {
                count += 1;
                worst = worst.max(e.middle / e.upper).max(e.lower / e.middle);
                if !e.ok {
                    fails.push(format!("member {i} n={} m={}", e.n, e.m));
                }
            }
        }
        let mut r = result(5, worst, 1.0, fails, "");
        r.detail = format!("{count} comparisons {}", r.detail);
        Ok(r)
    }

    /// Agreement is measured against max(Iₙ, 10⁻¹²).
    fn methods(&self) -> Result<CriterionResult> {
        let mut fails = Vec::new();
        let mut worst = 0.0f64;
        let mut gaps = 0;
        for (i, a) in self.family().iter().enumerate() {
            let ev = DiscriminantEvaluator::with_config(a.phi.clone(), DiscriminantConfig::default())?;
            for g in a.spectrum.open_gaps() {
                gaps += 1;
                let c = action_contour(&ev, &a.spectrum, g.n)?;
                let gi = a.actions.action(g.n);
                let rel = (c.value - gi).abs() / gi.abs().max(ACTION_FLOOR);
                worst = worst.max(rel);
                if !(rel <= 1e-6) {
                    fails.push(format!("member {i} n={}: {rel:.1e}", g.n));
                }
            }
        }
        let mut r = result(6, worst, 1e-6, fails, "");
        r.detail = format!("{gaps} open gaps {}", r.detail);
        Ok(r)
    }

    fn reduction(&self) -> Result<CriterionResult> {
        let w = Weight::sobolev(1.0)?;
        let mut fails = Vec::new();
        let mut worst = 0.0f64;
        for (i, a) in self.family().iter().enumerate() {
            let n_loc = a.spectrum.threshold;
            for n in n_loc..=n_loc + 8 {
                let e = ls_check(&a.phi, n, &w, Some(&a.spectrum))?;
                worst = worst.max(e.root_mismatch.unwrap_or(0.0));
                if !e.passed() {
                    fails.push(format!("member {i} n={n}: {}", e.failures.join("; ")));
                }
            }
        }
        Ok(result(7, worst, 1e-6, fails, "worst |ξ − λ|"))
    }

    fn explicit(&self) -> Result<CriterionResult> {
        let mut fails = Vec::new();
        let mut worst = 0.0f64;
        for w in family_weights() {
            for (i, a) in self.family().iter().enumerate() {
                let e = check_explicit(a, &w)?;
                worst = worst
                    .max(e.gaps.sum_lhs / e.gaps.sum_rhs)
                    .max(e.gap_total.lhs / e.gap_total.rhs)
                    .max(e.action_gap.worst_ratio / e.action_gap.constant);
                if !e.passed {
                    let mut what = Vec::new();
                    if !e.gaps.passed {
                        what.push("gap estimates");
                    }
                    if !e.gap_total.passed {
                        what.push("total gap sum");
                    }
                    if !e.action_gap.passed {
                        what.push("action/gap bound");
                    }
                    if !e.h3.passed {
                        what.push("H3 bound");
                    }
                    fails.push(format!("{w:?} member {i}: {}", what.join(", ")));
                }
            }
        }
        Ok(result(8, worst, 1.0, fails, "worst lhs/rhs"))
    }

    fn uniformity(&self) -> Result<CriterionResult> {
        let (small, large) = self.opts.uniformity;
        let weights = family_weights();
        let constants = |fam: &[Analysis]| -> Result<Vec<(String, f64)>> {
            let mut out = Vec::new();
            for m in 1..=3 {
                let mut c = 0.0f64;
                let mut d = 0.0f64;
                for a in fam {
                    c = c.max(check_act_sob_i(a, m)?.ratio);
                    d = d.max(check_act_sob_ii(a, m)?.ratio);
                }
                out.push((format!("c_{m}²"), c));
                out.push((format!("d_{m}²"), d));
            }
            for w in &weights {
                let mut c = 0.0f64;
                for a in fam {
                    c = c.max(check_act_west(a, w)?.0.ratio);
                }
                out.push((format!("c_w² {w:?}"), c));
            }
            Ok(out)
        };
        let a = constants(&self.analyses[..small])?;
        let b = constants(&self.analyses[..large])?;
        let mut fails = Vec::new();
        let mut worst = 0.0f64;
        for ((name, x), (_, y)) in a.iter().zip(&b) {
            let growth = if *x > 0.0 { y / x - 1.0 } else if *y > 0.0 { f64::INFINITY } else { 0.0 };
            worst = worst.max(growth);
            if !(x.is_finite() && y.is_finite() && growth <= 0.1) {
                fails.push(format!("{name}: {x:.4e} → {y:.4e}"));
            }
        }
        let secs: f64 = self.seconds[..large].iter().sum();
        let mut r = result(9, worst, 0.1, fails, "");
        r.seconds = secs;
        r.detail = format!("{small} vs {large} members, relative growth {}", r.detail);
        if secs > 600.0 {
            r.passed = false;
        }
        Ok(r)
    }

    fn sob_rep(&self) -> Result<CriterionResult> {
        let mut fails = Vec::new();
        let mut worst = 0.0f64;
        for (i, a) in self.family().iter().enumerate() {
            for m in [1, 2] {
                let s = check_sob_rep(a, m)?;
                worst = worst.max(s.residual);
                if !s.passed {
                    fails.push(format!("member {i} m={m}: {:.1e}", s.residual));
                }
            }
        }
        Ok(result(10, worst, 1e-4, fails, ""))
    }
}

const ACTION_FLOOR: f64 = 1e-12;

pub const NAMES: [&str; 10] = [
    "constant-potential oracle",
    "trace formula, level 1",
    "trace formula, level 3",
    "eigenvalue localisation",
    "two-sided action comparison",
    "contour vs gap integral",
    "Lyapunov-Schmidt reduction",
    "explicit-constant bounds",
    "uniformity of constants",
    "Sobolev representation",
];

fn result(id: u32, worst: f64, tolerance: f64, fails: Vec<String>, note: &str) -> CriterionResult {
    let mut detail = note.to_string();
    if !fails.is_empty() {
        let shown: Vec<&str> = fails.iter().take(5).map(String::as_str).collect();
        detail = format!("{} failures: {}", fails.len(), shown.join(" | "));
    }
    CriterionResult {
        id,
        name: NAMES[id as usize - 1],
        passed: fails.is_empty(),
        worst,
        tolerance,
        seconds: 0.0,
        detail,
    }
}
