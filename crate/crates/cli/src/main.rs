//! `buckingham`: unit lookup, Π-group analysis, bound evaluation and
//! verification runs over JSON problem files.
//!
//! Exit codes: 0 success, 1 bound violated, 2 input error, 3 evaluation error.

use std::path::PathBuf;
use std::process::ExitCode;

use buckingham_core::bounds::{epsilon_for_tau, BoundReport};
use buckingham_core::rational::{format_rational, format_real, round_sig};
use buckingham_core::{
    estimate_epsilon, make_perturbed, parse_unit, verify_bound, EpsilonEstimate, Error, PiDecomposition,
    ProblemFile, Rational, ScalarFn, VerifyReport,
};
use clap::{Args, Parser, Subcommand};
use num_traits::{Signed, Zero};
use serde::Serialize;

const DEFAULT_K: f64 = 2.0;
const DEFAULT_L: f64 = 2.0;
const DEFAULT_SAMPLES: usize = 1000;
const DEFAULT_TRIALS: usize = 1000;

#[derive(Parser)]
#[command(name = "buckingham", version, about = "Dimensional analysis with error bounds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Dimension and SI factor of a unit expression.
    Units {
        expr: String,
        #[arg(long)]
        json: bool,
    },
    /// Dimension matrix, exponents and Π groups of a problem file.
    Analyze {
        file: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Evaluates the applicable bound.
    Bound {
        file: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Samples the problem function and checks it against the bound.
    Verify {
        file: PathBuf,
        #[command(flatten)]
        common: Common,
        /// Multiplies the function by a seeded field H in [1-tau, 1+tau].
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    json: bool,
    /// Sampling box radius; must exceed 1.
    #[arg(long = "K")]
    k: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    /// Shifts the exponents y so that |Ay - beta|_inf equals this value.
    #[arg(long = "delta-perturb")]
    delta_perturb: Option<f64>,
}

struct Failure {
    code: u8,
    msg: String,
}

impl Failure {
    fn input(e: impl std::fmt::Display) -> Self {
        Self { code: 2, msg: e.to_string() }
    }

    /// Evaluation failures exit with 3, anything else is bad input.
    fn classify(e: Error) -> Self {
        let code = match e {
            Error::Evaluation { .. } | Error::Domain(_) => 3,
            _ => 2,
        };
        Self { code, msg: e.to_string() }
    }
}

type Outcome = Result<ExitCode, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Units { expr, json } => units(&expr, json),
        Command::Analyze { file, json } => analyze(&file, json),
        Command::Bound { file, common } => bound(&file, &common),
        Command::Verify { file, common, tau, trials, seed } => verify(&file, &common, tau, trials, seed),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}

fn emit<T: Serialize>(json: bool, value: &T, text: impl FnOnce() -> String) {
    if json {
        println!("{}", serde_json::to_string_pretty(value).expect("serializable report"));
    } else {
        print!("{}", text());
    }
}

fn rationals(v: &[Rational]) -> Vec<String> {
    v.iter().map(format_rational).collect()
}

fn tuple(v: &[String]) -> String {
    format!("({})", v.join(", "))
}

#[derive(Serialize)]
struct UnitsReport {
    expr: String,
    basis: Vec<String>,
    exponents: Vec<String>,
    factor: f64,
    canonical: String,
}

fn units(expr: &str, json: bool) -> Outcome {
    let parsed = parse_unit(expr).map_err(Failure::input)?;
    let report = UnitsReport {
        expr: expr.to_string(),
        basis: parsed.dimension.basis().units().to_vec(),
        exponents: rationals(parsed.dimension.exponents()),
        factor: round_sig(parsed.factor),
        canonical: parsed.to_string(),
    };
    emit(json, &report, || {
        format!(
            "expression: {}\nbasis:      {}\nexponents:  {}\nfactor:     {}\ncanonical:  {}\n",
            report.expr,
            tuple(&report.basis),
            tuple(&report.exponents),
            format_real(parsed.factor),
            report.canonical
        )
    });
    Ok(ExitCode::SUCCESS)
}

struct Loaded {
    file: ProblemFile,
    dec: PiDecomposition,
    f: Option<ScalarFn>,
}

fn load(path: &PathBuf, delta_perturb: Option<f64>) -> Result<Loaded, Failure> {
    let file = ProblemFile::from_path(path).map_err(Failure::input)?;
    let problem = file.to_problem().map_err(Failure::input)?;
    let f = problem.candidate_fn().transpose().map_err(Failure::input)?;
    let mut dec = problem.decompose().map_err(Failure::classify)?;
    if let Some(y) = file.exponent_override().map_err(Failure::input)? {
        dec = dec.with_exact_exponents(y).map_err(Failure::input)?;
    }
    if let Some(d) = delta_perturb {
        dec = perturb_delta(dec, d)?;
    }
    Ok(Loaded { file, dec, f })
}

/// Shifts `y_j` for the first column `j` of `A` with a nonzero entry by
/// `d / max_i |A_ij|`, so that `‖A y − β‖∞` grows from 0 to `d`.
fn perturb_delta(dec: PiDecomposition, d: f64) -> Result<PiDecomposition, Failure> {
    if !(d.is_finite() && d >= 0.0) {
        return Err(Failure::input(format!("--delta-perturb {d} must be >= 0")));
    }
    if d == 0.0 {
        return Ok(dec);
    }
    if !dec.is_exact() {
        return Err(Failure::input("--delta-perturb needs exponents with A y = beta exactly"));
    }
    let column = (0..dec.n()).find_map(|j| {
        let top = (0..dec.m()).map(|i| dec.a.row(i)[j].abs()).max().unwrap_or_else(Rational::zero);
        (!top.is_zero()).then(|| (j, buckingham_core::rational::to_f64(&top)))
    });
    let Some((j, top)) = column else {
        return Err(Failure::input("--delta-perturb needs a dimensioned variable"));
    };
    let mut y = dec.y.clone();
    y[j] += d / top;
    dec.with_exponents(y).map_err(Failure::input)
}

#[derive(Serialize)]
struct PiGroupReport {
    label: String,
    exponents: Vec<String>,
}

#[derive(Serialize)]
struct AnalyzeReport {
    basis: Vec<String>,
    variables: Vec<String>,
    target: String,
    matrix: Vec<Vec<String>>,
    beta: Vec<String>,
    rank: usize,
    k: usize,
    y: Vec<String>,
    exact: bool,
    delta: String,
    pi_groups: Vec<PiGroupReport>,
    template: String,
    constant: Option<f64>,
    d_norm: f64,
    m_max: f64,
    xdag_norm: f64,
}

fn exponents_text(dec: &PiDecomposition) -> Vec<String> {
    match &dec.y_exact {
        Some(y) => rationals(y),
        None => dec.y.iter().map(|&x| format_real(x)).collect(),
    }
}

fn delta_text(dec: &PiDecomposition) -> String {
    match &dec.delta_exact {
        Some(d) => format_rational(d),
        None => format_real(dec.delta),
    }
}

fn analyze(path: &PathBuf, json: bool) -> Outcome {
    let Loaded { file, dec, .. } = load(path, None)?;
    let basis = file.basis().map_err(Failure::input)?;
    let report = AnalyzeReport {
        basis: basis.units().to_vec(),
        variables: dec.names.clone(),
        target: dec.target.clone(),
        matrix: dec.a.to_rows().iter().map(|r| rationals(r)).collect(),
        beta: rationals(&dec.beta),
        rank: dec.rank,
        k: dec.k,
        y: exponents_text(&dec),
        exact: dec.is_exact(),
        delta: delta_text(&dec),
        pi_groups: dec
            .pi_groups
            .iter()
            .map(|p| PiGroupReport { label: p.label.clone(), exponents: rationals(&p.exponents) })
            .collect(),
        template: dec.template.clone(),
        constant: dec.constant.map(round_sig),
        d_norm: round_sig(dec.d_norm),
        m_max: round_sig(dec.m_max),
        xdag_norm: round_sig(dec.xdag_norm),
    };
    emit(json, &report, || {
        let width = report.matrix.iter().flatten().chain(&report.beta).map(String::len).max().unwrap_or(1);
        let mut out = format!("variables: {}  target: {}\n", report.variables.join(" "), report.target);
        out += "A | beta:\n";
        for (unit, (row, b)) in report.basis.iter().zip(report.matrix.iter().zip(&report.beta)) {
            let cells: Vec<String> = row.iter().map(|c| format!("{c:>width$}")).collect();
            out += &format!("  {unit:>4}  [{}] | {b:>width$}\n", cells.join(" "));
        }
        out += &format!("rank: {}  k: {}\n", report.rank, report.k);
        out += &format!("y: {}\n", tuple(&report.y));
        out += &format!("delta: {}\n", report.delta);
        if report.pi_groups.is_empty() {
            out += "pi groups: none\n";
        } else {
            out += "pi groups:\n";
            for (s, p) in report.pi_groups.iter().enumerate() {
                out += &format!("  pi{} = {}   {}\n", s + 1, p.label, tuple(&p.exponents));
            }
        }
        out += &format!("template: {}\n", report.template);
        if let Some(c) = dec.constant {
            out += &format!("F(1, ..., 1) = {}\n", format_real(c));
        }
        out += &format!(
            "norms: |D| = {}  M = {}  |X+| = {}\n",
            format_real(dec.d_norm),
            format_real(dec.m_max),
            format_real(dec.xdag_norm)
        );
        out
    });
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct BoundJson {
    theorem: u8,
    eps: f64,
    delta: f64,
    #[serde(rename = "K")]
    k: f64,
    m: usize,
    n: usize,
    d_norm: f64,
    m_max: f64,
    xdag_norm: f64,
    bound: f64,
}

impl From<&BoundReport> for BoundJson {
    fn from(b: &BoundReport) -> Self {
        Self {
            theorem: b.theorem.number(),
            eps: round_sig(b.eps),
            delta: round_sig(b.delta),
            k: round_sig(b.k),
            m: b.m,
            n: b.n,
            d_norm: round_sig(b.d_norm),
            m_max: round_sig(b.m_max),
            xdag_norm: round_sig(b.xdag_norm),
            bound: round_sig(b.bound),
        }
    }
}

fn bound_text(b: &BoundReport) -> String {
    let formula = if b.theorem.number() == 1 {
        "(1+eps) K^(m delta |D|) - 1"
    } else {
        "(1+eps) K^(m delta |D| (n M |X+| + 1)) - 1"
    };
    format!(
        "theorem {}: {formula}\n  eps = {}  delta = {}  K = {}\n  m = {}  n = {}  |D| = {}  M = {}  |X+| = {}\nbound: {}\n",
        b.theorem.number(),
        format_real(b.eps),
        format_real(b.delta),
        format_real(b.k),
        b.m,
        b.n,
        format_real(b.d_norm),
        format_real(b.m_max),
        format_real(b.xdag_norm),
        format_real(b.bound)
    )
}

fn radius(common: &Common, file: &ProblemFile) -> f64 {
    common.k.or(file.options.k).unwrap_or(DEFAULT_K)
}

fn bound(path: &PathBuf, common: &Common) -> Outcome {
    let Loaded { file, dec, .. } = load(path, common.delta_perturb)?;
    let eps = common.eps.or(file.options.epsilon).unwrap_or(0.0);
    let report = dec.bound(eps, radius(common, &file)).map_err(Failure::input)?;
    emit(common.json, &BoundJson::from(&report), || bound_text(&report));
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct EstimateJson {
    eps_hat: f64,
    samples: usize,
    #[serde(rename = "K")]
    k_v: f64,
    #[serde(rename = "L")]
    l_c: f64,
}

#[derive(Serialize)]
struct VerifyJson {
    function: String,
    tau: Option<f64>,
    seed: u64,
    estimate: EstimateJson,
    eps_source: &'static str,
    bound: BoundJson,
    tolerance: f64,
    trials: usize,
    violations: usize,
    max_ratio: f64,
    max_relative: f64,
    worst_v: Option<Vec<f64>>,
    passed: bool,
}

fn verify(
    path: &PathBuf,
    common: &Common,
    tau: Option<f64>,
    trials: Option<usize>,
    seed: Option<u64>,
) -> Outcome {
    let Loaded { file, dec, f } = load(path, common.delta_perturb)?;
    let opts = &file.options;
    let k = radius(common, &file);
    let l = opts.l.unwrap_or(DEFAULT_L);
    let seed = seed.or(opts.seed).unwrap_or(0);
    let trials = trials.or(opts.samples).unwrap_or(DEFAULT_TRIALS);
    let samples = opts.samples.unwrap_or(DEFAULT_SAMPLES);
    let tau = tau.or(opts.tau);
    let n = dec.n();

    // without a function the exact monomial v^y stands in for F
    let (base, base_name) = match (f, &file.function) {
        (Some(f), Some(src)) => (f, src.clone()),
        _ => match &dec.y_exact {
            Some(y) if tau.is_some() => {
                let y: Vec<f64> = y.iter().map(buckingham_core::rational::to_f64).collect();
                (ScalarFn::monomial(y), "v^y".to_string())
            }
            _ => return Err(Failure::input("problem has no function; add one or pass --tau")),
        },
    };
    let (f, name) = match tau {
        Some(t) => {
            let h = make_perturbed(vec![0.0; n], t, seed).map_err(Failure::input)?;
            (h.times(&base).map_err(Failure::input)?, format!("H(v) * ({base_name})"))
        }
        None => (base, base_name),
    };

    let est: EpsilonEstimate =
        estimate_epsilon(&f, &dec.a, &dec.beta, k, l, samples, seed).map_err(Failure::classify)?;
    let (eps, eps_source) = match (common.eps.or(opts.epsilon), tau) {
        (Some(e), _) => (e, "given"),
        (None, Some(t)) => (epsilon_for_tau(t), "tau"),
        (None, None) => (est.eps_hat, "estimate"),
    };
    let report: VerifyReport = verify_bound(&dec, &f, k, eps, trials, seed).map_err(Failure::classify)?;

    let out = VerifyJson {
        function: name,
        tau,
        seed,
        estimate: EstimateJson { eps_hat: round_sig(est.eps_hat), samples, k_v: k, l_c: l },
        eps_source,
        bound: BoundJson::from(&report.bound),
        tolerance: round_sig(report.tolerance),
        trials,
        violations: report.violations,
        max_ratio: round_sig(report.max_ratio),
        max_relative: round_sig(report.max_relative),
        worst_v: report.worst_v.as_ref().map(|v| v.iter().map(|&x| round_sig(x)).collect()),
        passed: report.passed(),
    };
    emit(common.json, &out, || {
        let worst = out
            .worst_v
            .as_ref()
            .map(|v| tuple(&v.iter().map(|&x| format_real(x)).collect::<Vec<_>>()))
            .unwrap_or_else(|| "-".into());
        format!(
            "function: {}\ntemplate: {}\neps_hat: {} ({} samples, K = {}, L = {})\neps used: {} ({})\n{}tolerance: {}\ntrials: {}  violations: {}\nmax |F - approx| / (|F| tol): {}\nmax relative residual: {}\nworst v: {worst}\n{}\n",
            out.function,
            dec.template,
            format_real(est.eps_hat),
            samples,
            format_real(k),
            format_real(l),
            format_real(eps),
            eps_source,
            bound_text(&report.bound),
            format_real(report.tolerance),
            trials,
            report.violations,
            format_real(report.max_ratio),
            format_real(report.max_relative),
            if out.passed { "PASS" } else { "FAIL" }
        )
    });
    Ok(if report.passed() { ExitCode::SUCCESS } else { ExitCode::from(1) })
}
