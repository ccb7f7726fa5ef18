//! JSON input formats: potentials, weights, families and λ grids.

use std::path::Path;

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::{FamilySpec, RandomSpec};
use crate::potentials::{FourierPotential, Weight};
use crate::spectrum::localisation_threshold;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoeffEntry {
    pub k: i64,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

impl CoeffEntry {
    fn value(&self) -> (i64, Complex64) {
        (self.k, Complex64::new(self.re, self.im))
    }
}

/// `{"type":"fourier","coeffs":[{"k":0,"re":0.5,"im":0}]}`,
/// `{"type":"constant","a":0.5}` or
/// `{"type":"random","K":8,"decay":"sobolev","s":1,"a":0,"seed":5,"amplitude":1}`.
///
/// A Fourier spec is of real type unless `plus` lists the coefficients of φ₊
/// separately.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum PotentialSpec {
    Fourier {
        coeffs: Vec<CoeffEntry>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        plus: Option<Vec<CoeffEntry>>,
    },
    Constant {
        a: f64,
    },
    Random(RandomSpec),
}

impl PotentialSpec {
    pub fn to_potential(&self) -> Result<FourierPotential> {
        match self {
            PotentialSpec::Fourier { coeffs, plus: None } => {
                FourierPotential::real_type(coeffs.iter().map(CoeffEntry::value).collect::<Vec<_>>())
            }
            PotentialSpec::Fourier { coeffs, plus: Some(plus) } => FourierPotential::general(
                coeffs.iter().map(CoeffEntry::value).collect::<Vec<_>>(),
                plus.iter().map(CoeffEntry::value).collect::<Vec<_>>(),
            ),
            PotentialSpec::Constant { a } => {
                if !a.is_finite() {
                    return Err(Error::Config(format!("constant potential needs a finite a, got {a}")));
                }
                Ok(FourierPotential::constant(*a))
            }
            PotentialSpec::Random(r) => r.potential(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightKind {
    Sobolev,
    Abel,
    Gevrey,
    LogLight,
    Custom,
}

/// `{"kind":"abel","s":1,"a":0.2}`; custom tables list w₀, w₁, …, w_N and are
/// extended symmetrically.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightSpec {
    pub kind: WeightKind,
    #[serde(default)]
    pub s: Option<f64>,
    #[serde(default)]
    pub a: Option<f64>,
    #[serde(default)]
    pub sigma: Option<f64>,
    #[serde(default)]
    pub table: Option<Vec<f64>>,
}

impl WeightSpec {
    pub fn to_weight(&self) -> Result<Weight> {
        let need = |v: Option<f64>, name: &str| {
            v.ok_or_else(|| Error::Config(format!("weight kind {:?} needs field '{name}'", self.kind)))
        };
        match self.kind {
            WeightKind::Sobolev => Weight::sobolev(need(self.s, "s")?),
            WeightKind::Abel => Weight::abel(need(self.s, "s")?, need(self.a, "a")?),
            WeightKind::Gevrey => Weight::gevrey(need(self.s, "s")?, need(self.a, "a")?, need(self.sigma, "sigma")?),
            WeightKind::LogLight => {
                Weight::log_light(need(self.s, "s")?, need(self.a, "a")?, need(self.sigma, "sigma")?)
            }
            WeightKind::Custom => {
                let t = self.table.as_ref().ok_or_else(|| Error::Config("custom weight needs 'table'".into()))?;
                Weight::custom_symmetric(t)
            }
        }
    }
}

/// Either a seeded random family or an explicit list of potentials.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FamilyConfig {
    List { potentials: Vec<PotentialSpec> },
    Random(FamilySpec),
}

impl FamilyConfig {
    pub fn members(&self) -> Result<Vec<FourierPotential>> {
        match self {
            FamilyConfig::List { potentials } => potentials.iter().map(PotentialSpec::to_potential).collect(),
            FamilyConfig::Random(f) => f.generate(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineSpec {
    pub from: [f64; 2],
    pub to: [f64; 2],
    pub count: usize,
}

/// λ points as `[re, im]` pairs and/or evenly spaced segments (endpoints
/// included).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default)]
    pub points: Vec<[f64; 2]>,
    #[serde(default)]
    pub lines: Vec<LineSpec>,
}

impl GridSpec {
    pub fn lambdas(&self) -> Vec<Complex64> {
        let mut out: Vec<Complex64> = self.points.iter().map(|p| Complex64::new(p[0], p[1])).collect();
        for l in &self.lines {
            let a = Complex64::new(l.from[0], l.from[1]);
            let b = Complex64::new(l.to[0], l.to[1]);
            match l.count {
                0 => {}
                1 => out.push(a),
                c => out.extend((0..c).map(|i| a + (b - a) * (i as f64 / (c - 1) as f64))),
            }
        }
        out
    }
}

pub fn parse_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
}

pub fn load_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

/// Smallest admissible N_max, ⌈8‖φ‖₁²⌉ + 2.
pub fn minimal_n_max(phi: &FourierPotential) -> Result<i64> {
    Ok(localisation_threshold(phi)? + 2)
}

/// The requested N_max, or the minimal one with a warning when it is too
/// small.
pub fn resolve_n_max(phi: &FourierPotential, requested: i64) -> Result<(i64, Option<String>)> {
    let min = minimal_n_max(phi)?;
    if requested >= min {
        Ok((requested, None))
    } else {
        Ok((min, Some(format!("N_max = {requested} is below ⌈8‖φ‖₁²⌉ + 2 = {min}; raised to {min}"))))
    }
}
