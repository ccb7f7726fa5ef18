//! `birkhoff`: periodic spectra, actions, hierarchy Hamiltonians and the
//! estimate checks from the command line.
//!
//! Exit status: 0 when every check in scope passes, 1 when a check fails,
//! 2 for unusable input and 3 for a numerical failure (with a JSON
//! diagnostic on stderr).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use birkhoff::actions::{action_contour, compute_actions, ActionConfig, ActionMethod};
use birkhoff::config::{load_json, resolve_n_max, FamilyConfig, GridSpec, PotentialSpec, WeightSpec};
use birkhoff::discriminant::{DiscriminantConfig, DiscriminantEvaluator};
use birkhoff::estimates::{analyse_family, estimate_reports, AnalysisOptions, Theorem};
use birkhoff::hierarchy::{hierarchy_compute_with, HierarchySign};
use birkhoff::lyapunov_schmidt::ls_check;
use birkhoff::potentials::{FourierPotential, Weight};
use birkhoff::spectrum::locate_spectrum;
use birkhoff::verify::{family_weights, Verifier, VerifyOptions};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use output::{num, write_atomic, Table};

#[derive(Parser, Debug)]
#[command(name = "birkhoff", version, about = "Zakharov–Shabat spectra, NLS actions and hierarchy checks")]
struct Cli {
    /// Worker threads (default: logical cores).
    #[arg(long, global = true, env = "BIRKHOFF_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Δ, Δ̇ and an error estimate on a λ grid.
    Discriminant {
        #[arg(long)]
        potential: PathBuf,
        #[arg(long)]
        grid: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Subintervals N_x of the propagator.
        #[arg(long)]
        nx: Option<usize>,
    },
    /// Periodic eigenvalues λₙ± and critical points for |n| ≤ N_max.
    Spectrum {
        #[arg(long)]
        potential: PathBuf,
        #[arg(long, default_value_t = 64)]
        nmax: i64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Actions Iₙ and higher actions J_{n,k}.
    Actions {
        #[arg(long)]
        potential: PathBuf,
        #[arg(long, default_value_t = 64)]
        nmax: i64,
        #[arg(long, value_delimiter = ',', default_values_t = [1u32, 3, 5])]
        levels: Vec<u32>,
        #[arg(long, value_enum, default_value_t = MethodArg::GapIntegral)]
        method: MethodArg,
        /// Relative tolerance of the gap-integral quadrature.
        #[arg(long, default_value_t = 1e-9)]
        rel_tol: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Hamiltonians H_k of the NLS hierarchy.
    Hierarchy {
        #[arg(long)]
        potential: PathBuf,
        #[arg(long, default_value_t = 7)]
        kmax: usize,
        #[arg(long, value_enum, default_value_t = SignArg::Calibrated)]
        sign: SignArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Lyapunov–Schmidt reduction checks for a range of n.
    LsCheck {
        #[arg(long)]
        potential: PathBuf,
        /// A single index or an inclusive range `a..b`.
        #[arg(long)]
        n: String,
        /// Weight JSON (default: Sobolev s = 1).
        #[arg(long)]
        weight: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Empirical constants of the two-sided estimates over a family.
    Estimates {
        #[arg(long)]
        family: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "b-est,act-sob,act-west")]
        theorems: Vec<String>,
        /// Weight JSON files for act-west (default: Sobolev 1 and Abel(1, 0.2)).
        #[arg(long)]
        weight: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// The ten acceptance criteria.
    VerifyAll {
        /// Small families for a fast run.
        #[arg(long)]
        quick: bool,
        /// JSON with members, uniformity, seed and constants.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    GapIntegral,
    Contour,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SignArg {
    Calibrated,
    Alternating,
    PaperAppendix,
}

impl From<SignArg> for HierarchySign {
    fn from(s: SignArg) -> Self {
        match s {
            SignArg::Calibrated => HierarchySign::Calibrated,
            SignArg::Alternating => HierarchySign::Alternating,
            SignArg::PaperAppendix => HierarchySign::PaperAppendix,
        }
    }
}

enum Failure {
    Input(String),
    Numerical(birkhoff::Error),
    Io(String),
}

impl From<birkhoff::Error> for Failure {
    fn from(e: birkhoff::Error) -> Self {
        if e.is_input() {
            Failure::Input(e.to_string())
        } else {
            Failure::Numerical(e)
        }
    }
}

type Outcome = Result<bool, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if t == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("warning: thread pool already initialised: {e}");
        }
    }
    let name = subcommand_name(&cli.command);
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(e)) => {
            let diag = json!({
                "status": "numerical-failure",
                "subcommand": name,
                "kind": e.kind(),
                "message": e.to_string(),
            });
            eprintln!("{diag}");
            ExitCode::from(3)
        }
        Err(Failure::Io(msg)) => {
            let diag = json!({ "status": "io-failure", "subcommand": name, "kind": "io", "message": msg });
            eprintln!("{diag}");
            ExitCode::from(3)
        }
    }
}

fn subcommand_name(c: &Command) -> &'static str {
    match c {
        Command::Discriminant { .. } => "discriminant",
        Command::Spectrum { .. } => "spectrum",
        Command::Actions { .. } => "actions",
        Command::Hierarchy { .. } => "hierarchy",
        Command::LsCheck { .. } => "ls-check",
        Command::Estimates { .. } => "estimates",
        Command::VerifyAll { .. } => "verify-all",
    }
}

fn run(command: Command) -> Outcome {
    match command {
        Command::Discriminant { potential, grid, out, nx } => discriminant(&potential, &grid, &out, nx),
        Command::Spectrum { potential, nmax, out } => spectrum(&potential, nmax, &out),
        Command::Actions { potential, nmax, levels, method, rel_tol, out } => {
            actions(&potential, nmax, &levels, method, rel_tol, &out)
        }
        Command::Hierarchy { potential, kmax, sign, out } => hierarchy(&potential, kmax, sign.into(), &out),
        Command::LsCheck { potential, n, weight, out } => ls(&potential, &n, weight.as_deref(), &out),
        Command::Estimates { family, theorems, weight, out } => estimates(&family, &theorems, &weight, &out),
        Command::VerifyAll { quick, config, out } => verify_all(quick, config.as_deref(), out.as_deref()),
    }
}

fn load_potential(path: &Path) -> Result<FourierPotential, Failure> {
    let spec: PotentialSpec = load_json(path)?;
    Ok(spec.to_potential()?)
}

fn load_weight(path: &Path) -> Result<Weight, Failure> {
    let spec: WeightSpec = load_json(path)?;
    Ok(spec.to_weight()?)
}

fn save(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    write_atomic(path, bytes).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn n_max_for(phi: &FourierPotential, requested: i64) -> Result<i64, Failure> {
    let (n, warning) = resolve_n_max(phi, requested)?;
    if let Some(w) = warning {
        eprintln!("warning: {w}");
    }
    Ok(n)
}

fn discriminant(potential: &Path, grid: &Path, out: &Path, nx: Option<usize>) -> Outcome {
    let phi = load_potential(potential)?;
    let grid: GridSpec = load_json(grid)?;
    let config = DiscriminantConfig { subintervals: nx, ..Default::default() };
    let ev = DiscriminantEvaluator::with_config(phi, config)?;
    let lambdas = grid.lambdas();
    let mut t = Table::new(&["lambda_re", "lambda_im", "delta_re", "delta_im", "delta_dot_re", "delta_dot_im", "err"]);
    for s in ev.evaluate_grid(&lambdas) {
        let s = s?;
        t.row([s.lambda.re, s.lambda.im, s.delta.re, s.delta.im, s.delta_dot.re, s.delta_dot.im, s.error_estimate].map(num));
    }
    save(out, &t.into_bytes())?;
    Ok(true)
}

fn spectrum(potential: &Path, nmax: i64, out: &Path) -> Outcome {
    let phi = load_potential(potential)?;
    let n_max = n_max_for(&phi, nmax)?;
    let ev = DiscriminantEvaluator::new(phi);
    let sp = locate_spectrum(&ev, n_max)?;
    let mut t = Table::new(&[
        "n",
        "lambda_minus",
        "lambda_plus",
        "lambda_dot",
        "tau",
        "gamma",
        "collapsed",
        "residual_minus",
        "residual_plus",
        "residual_dot",
    ]);
    for g in &sp.entries {
        let mut row = vec![g.n.to_string()];
        row.extend([g.lambda_minus, g.lambda_plus, g.lambda_dot, g.tau, g.gamma].map(num));
        row.push(g.collapsed.to_string());
        row.extend([g.residual_minus, g.residual_plus, g.residual_dot].map(num));
        t.row(row);
    }
    save(out, &t.into_bytes())?;
    Ok(true)
}

/// Agreement measure of the two action methods.
fn method_gap(contour: f64, gap: f64) -> f64 {
    (contour - gap).abs() / gap.abs().max(1e-12)
}

fn actions(potential: &Path, nmax: i64, levels: &[u32], method: MethodArg, rel_tol: f64, out: &Path) -> Outcome {
    if !(rel_tol > 0.0) {
        return Err(Failure::Input(format!("--rel-tol must be positive, got {rel_tol}")));
    }
    let phi = load_potential(potential)?;
    let n_max = n_max_for(&phi, nmax)?;
    let ev = DiscriminantEvaluator::new(phi);
    let sp = locate_spectrum(&ev, n_max)?;
    let cfg = ActionConfig { rel_tol, ..Default::default() };
    let acts = compute_actions(&ev, &sp, levels, ActionMethod::GapIntegral, &cfg)?;
    let mut t = Table::new(&["n", "k", "J", "method", "err"]);
    let mut agree = true;
    for n in acts.indices() {
        let idx = (n + acts.n_max) as usize;
        let mut contour = None;
        if method != MethodArg::GapIntegral {
            let c = action_contour(&ev, &sp, n)?;
            if method == MethodArg::Both && method_gap(c.value, acts.i[idx]) > 1e-6 {
                eprintln!("warning: methods disagree at n = {n}: contour {} vs gap integral {}", c.value, acts.i[idx]);
                agree = false;
            }
            contour = Some(c);
        }
        if method != MethodArg::Contour {
            for (l, &k) in acts.levels.iter().enumerate() {
                if k == 1 || levels.contains(&k) {
                    t.row([n.to_string(), k.to_string(), num(acts.j[l][idx]), "gap-integral".into(), num(acts.errors[idx])]);
                }
            }
        }
        if let Some(c) = contour {
            t.row([n.to_string(), "1".into(), num(c.value), "contour".into(), num(c.imag.abs())]);
        }
    }
    save(out, &t.into_bytes())?;
    Ok(agree)
}

fn hierarchy(potential: &Path, kmax: usize, sign: HierarchySign, out: &Path) -> Outcome {
    let phi = load_potential(potential)?;
    let h = hierarchy_compute_with(&phi, kmax, sign, None)?;
    let mut map = Map::new();
    for k in 1..=kmax {
        let v = h.hamiltonian(k)?;
        map.insert(k.to_string(), json!({ "re": v.re, "im": v.im }));
    }
    let text = serde_json::to_string_pretty(&Value::Object(map)).expect("finite JSON") + "\n";
    save(out, text.as_bytes())?;
    Ok(true)
}

fn parse_range(s: &str) -> Result<(i64, i64), Failure> {
    let bad = || Failure::Input(format!("--n expects an integer or a range a..b, got '{s}'"));
    let (a, b) = match s.split_once("..") {
        Some((a, b)) => (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?),
        None => {
            let v = s.trim().parse().map_err(|_| bad())?;
            (v, v)
        }
    };
    if a > b {
        return Err(bad());
    }
    Ok((a, b))
}

fn ls(potential: &Path, n: &str, weight: Option<&Path>, out: &Path) -> Outcome {
    let phi = load_potential(potential)?;
    let (lo, hi) = parse_range(n)?;
    let w = match weight {
        Some(p) => load_weight(p)?,
        None => Weight::sobolev(1.0)?,
    };
    let reach = lo.abs().max(hi.abs()) + 1;
    let (n_max, _) = resolve_n_max(&phi, reach)?;
    let ev = DiscriminantEvaluator::new(phi.clone());
    let sp = locate_spectrum(&ev, n_max)?;
    let mut t = Table::new(&[
        "n",
        "status",
        "applicable",
        "xi_minus",
        "xi_plus",
        "root_mismatch",
        "a_max",
        "a_bound",
        "b_dev_plus",
        "b_bound_plus",
        "b_dev_minus",
        "b_bound_minus",
        "symmetry",
        "split_sqr",
        "b_product_max",
        "truncation_change",
        "cauchy_riemann",
        "t_norm",
        "t_bound",
        "t2_norm",
        "t2_bound",
        "failures",
    ]);
    let mut all = true;
    for n in lo..=hi {
        let e = match ls_check(&phi, n, &w, Some(&sp)) {
            Ok(e) => e,
            Err(birkhoff::Error::Threshold(msg)) => {
                let mut row = vec![n.to_string(), "skipped".to_string()];
                row.extend(std::iter::repeat(String::new()).take(19));
                row.push(msg);
                t.row(row);
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        all &= e.passed();
        let worst = e
            .norms
            .iter()
            .max_by(|a, b| (a.t2_norm / a.t2_bound).total_cmp(&(b.t2_norm / b.t2_bound)))
            .copied();
        let mut row = vec![
            n.to_string(),
            if e.passed() { "pass" } else { "fail" }.to_string(),
            e.applicable.to_string(),
            num(e.roots.xi_minus.re),
            num(e.roots.xi_plus.re),
            e.root_mismatch.map(num).unwrap_or_default(),
        ];
        row.extend(
            [e.a_max, e.a_bound, e.b_dev.0, e.b_bound.0, e.b_dev.1, e.b_bound.1, e.symmetry, e.split_sqr, e.b_product_max]
                .map(num),
        );
        row.extend([e.truncation_change, e.cauchy_riemann].map(num));
        match worst {
            Some(w) => row.extend([w.t_norm, w.t_bound, w.t2_norm, w.t2_bound].map(num)),
            None => row.extend(std::iter::repeat(String::new()).take(4)),
        }
        row.push(e.failures.join("; "));
        t.row(row);
    }
    save(out, &t.into_bytes())?;
    Ok(all)
}

fn estimates(family: &Path, theorems: &[String], weights: &[PathBuf], out: &Path) -> Outcome {
    let fam: FamilyConfig = load_json(family)?;
    let members = fam.members()?;
    if members.is_empty() {
        return Err(Failure::Input("the family is empty".into()));
    }
    let theorems: Vec<Theorem> = theorems.iter().map(|s| s.trim().parse()).collect::<Result<_, _>>()?;
    let weights = if weights.is_empty() {
        family_weights()
    } else {
        weights.iter().map(|p| load_weight(p)).collect::<Result<_, _>>()?
    };
    let opts = AnalysisOptions { weights: weights.clone(), ..Default::default() };
    let analyses = analyse_family(&members, &opts)?;
    let reports = estimate_reports(&analyses, &theorems, &weights)?;
    let passed = reports.iter().all(|r| r.passed);
    let text = serde_json::to_string_pretty(&reports).map_err(|e| Failure::Io(e.to_string()))? + "\n";
    save(out, text.as_bytes())?;
    Ok(passed)
}

fn verify_all(quick: bool, config: Option<&Path>, out: Option<&Path>) -> Outcome {
    let opts = match config {
        Some(p) => load_json::<VerifyOptions>(p)?,
        None if quick => VerifyOptions::quick(),
        None => VerifyOptions::full(),
    };
    let v = Verifier::new(opts)?;
    let mut results = Vec::new();
    for id in 1..=10 {
        let r = v.run(id);
        println!("{r}");
        results.push(r);
    }
    let passed = results.iter().all(|r| r.passed);
    println!("{} of 10 criteria passed", results.iter().filter(|r| r.passed).count());
    if let Some(path) = out {
        let text = serde_json::to_string_pretty(&results).map_err(|e| Failure::Io(e.to_string()))? + "\n";
        save(path, text.as_bytes())?;
    }
    Ok(passed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert!(matches!(parse_range("4..32"), Ok((4, 32))));
        assert!(matches!(parse_range("7"), Ok((7, 7))));
        assert!(matches!(parse_range("-3..-1"), Ok((-3, -1))));
        assert!(parse_range("5..2").is_err());
        assert!(parse_range("x").is_err());
    }

    #[test]
    fn agreement_scale() {
        assert!((method_gap(1.0 + 1e-7, 1.0) - 1e-7).abs() < 1e-15);
        assert!(method_gap(1e-19, 2e-19) <= 1e-6);
    }

    #[test]
    fn cli_parses() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
