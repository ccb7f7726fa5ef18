use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::bracket;
use crate::error::{Error, Result};

/// Default index range N_w used when validating built-in weights.
pub const DEFAULT_VALIDATION_RANGE: i64 = 128;

const REL_TOL: f64 = 1e-12;

/// Weight families on ℤ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Weight {
    /// ⟨nπ⟩^s
    Sobolev { s: f64 },
    /// ⟨nπ⟩^s e^{a|n|}
    Abel { s: f64, a: f64 },
    /// ⟨n⟩^s e^{a|n|^σ}
    Gevrey { s: f64, a: f64, sigma: f64 },
    /// ⟨n⟩^s exp(a|n| / (1 + log^σ⟨n⟩))
    LogLight { s: f64, a: f64, sigma: f64 },
    /// Explicit values w_n on a finite index set.
    Custom { table: BTreeMap<i64, f64> },
}

impl Weight {
    pub fn sobolev(s: f64) -> Result<Self> {
        check_s(s)?;
        Ok(Weight::Sobolev { s })
    }

    pub fn abel(s: f64, a: f64) -> Result<Self> {
        check_s(s)?;
        check_a(a)?;
        Ok(Weight::Abel { s, a })
    }

    pub fn gevrey(s: f64, a: f64, sigma: f64) -> Result<Self> {
        check_s(s)?;
        check_a(a)?;
        check_sigma(sigma)?;
        Ok(Weight::Gevrey { s, a, sigma })
    }

    pub fn log_light(s: f64, a: f64, sigma: f64) -> Result<Self> {
        check_s(s)?;
        check_a(a)?;
        check_sigma(sigma)?;
        Ok(Weight::LogLight { s, a, sigma })
    }

    /// Symmetric table from w_0, w_1, …, w_N.
    pub fn custom_symmetric(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument("empty weight table".into()));
        }
        let mut table = BTreeMap::new();
        for (n, &v) in values.iter().enumerate() {
            table.insert(n as i64, v);
            table.insert(-(n as i64), v);
        }
        Self::custom(table)
    }

    /// Arbitrary table; it must cover a contiguous range −N..=N.
    pub fn custom(table: BTreeMap<i64, f64>) -> Result<Self> {
        let n = table.keys().map(|k| k.abs()).max().unwrap_or(0);
        if table.len() as i64 != 2 * n + 1 {
            return Err(Error::InvalidArgument(format!(
                "custom weight table must cover every index in -{n}..={n}"
            )));
        }
        if table.values().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite weight value".into()));
        }
        Ok(Weight::Custom { table })
    }

    /// Largest |n| at which the weight is defined; `None` for built-in kinds.
    pub fn support(&self) -> Option<i64> {
        match self {
            Weight::Custom { table } => table.keys().map(|k| k.abs()).max(),
            _ => None,
        }
    }

    /// w_n.
    pub fn value(&self, n: i64) -> Result<f64> {
        let x = n as f64;
        let v = match self {
            Weight::Sobolev { s } => bracket(x * PI).powf(*s),
            Weight::Abel { s, a } => bracket(x * PI).powf(*s) * (a * x.abs()).exp(),
            Weight::Gevrey { s, a, sigma } => bracket(x).powf(*s) * (a * x.abs().powf(*sigma)).exp(),
            Weight::LogLight { s, a, sigma } => {
                let l = bracket(x).ln().powf(*sigma);
                bracket(x).powf(*s) * (a * x.abs() / (1.0 + l)).exp()
            }
            Weight::Custom { table } => {
                return table.get(&n).copied().ok_or(Error::WeightRange {
                    index: n,
                    max: self.support().unwrap_or(0),
                })
            }
        };
        Ok(v)
    }

    /// Piecewise linear extension w[t] for t ≥ 0.
    pub fn extension(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::InvalidArgument(format!("w[t] needs t >= 0, got {t}")));
        }
        let lo = t.floor();
        let hi = t.ceil();
        let wl = self.value(lo as i64)?;
        if lo == hi {
            return Ok(wl);
        }
        let wh = self.value(hi as i64)?;
        Ok(wl + (t - lo) * (wh - wl))
    }

    /// Table w_{-N..=N}.
    pub fn table(&self, n: i64) -> Result<Vec<f64>> {
        (-n..=n).map(|k| self.value(k)).collect()
    }

    /// Checks the axioms of a normalised, submultiplicative, monotone weight
    /// on |n| ≤ range (or on the table support for custom weights), together
    /// with membership of w_n/⟨n⟩ in the same class.
    pub fn validate(&self, range: i64) -> WeightReport {
        let n = self.support().map_or(range, |s| s.min(range));
        let vals: Vec<f64> = self.table(n).unwrap_or_default();
        let violations = axiom_violations(&vals, n);
        let reduced: Vec<f64> = vals
            .iter()
            .enumerate()
            .map(|(i, w)| w / bracket((i as i64 - n) as f64))
            .collect();
        let m1_violations = axiom_violations(&reduced, n);
        WeightReport {
            range: n,
            m1: violations.is_empty() && m1_violations.is_empty(),
            violations,
            m1_violations,
        }
    }
}

/// Outcome of [`Weight::validate`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeightReport {
    pub range: i64,
    pub violations: Vec<Violation>,
    pub m1: bool,
    pub m1_violations: Vec<Violation>,
}

impl WeightReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Violation {
    BelowOne { n: i64 },
    Asymmetric { n: i64 },
    NotSubmultiplicative { n: i64, m: i64 },
    NotMonotone { n: i64 },
}

/// Convenience wrapper over [`Weight::validate`] on the default range.
pub fn validate_weight(w: &Weight) -> WeightReport {
    w.validate(DEFAULT_VALIDATION_RANGE)
}

pub fn weight_extension(w: &Weight, t: f64) -> Result<f64> {
    w.extension(t)
}

fn axiom_violations(vals: &[f64], n: i64) -> Vec<Violation> {
    let mut out = Vec::new();
    if vals.len() as i64 != 2 * n + 1 {
        return out;
    }
    let at = |k: i64| vals[(k + n) as usize];
    for k in -n..=n {
        if at(k) < 1.0 - REL_TOL {
            out.push(Violation::BelowOne { n: k });
        }
    }
    for k in 1..=n {
        if (at(k) - at(-k)).abs() > REL_TOL * at(k).abs().max(1.0) {
            out.push(Violation::Asymmetric { n: k });
        }
    }
    for k in 0..n {
        if at(k) > at(k + 1) * (1.0 + REL_TOL) || at(-k) > at(-k - 1) * (1.0 + REL_TOL) {
            out.push(Violation::NotMonotone { n: k });
        }
    }
    for a in -n..=n {
        for b in -n..=n {
            let s = a + b;
            if s.abs() <= n && at(s) > at(a) * at(b) * (1.0 + REL_TOL) {
                out.push(Violation::NotSubmultiplicative { n: a, m: b });
            }
        }
    }
    out
}

fn check_s(s: f64) -> Result<()> {
    if s >= 0.0 && s.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("weight exponent s must be >= 0, got {s}")))
    }
}

fn check_a(a: f64) -> Result<()> {
    if a > 0.0 && a.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("weight rate a must be > 0, got {a}")))
    }
}

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma > 0.0 && sigma < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("σ must lie in (0, 1), got {sigma}")))
    }
}
