//! Command-line front end.
//!
//! Exit codes: 0 success / equivalent, 1 not equivalent, 2 usage or input
//! error, 3 series non-convergence, 4 construction error, 5 inconclusive.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_traits::One;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::exec::Execution;
use crate::gpseries::{caputo_value_at_zero, compose_check, ml_to_series, regularity_class, GpSeries, SeriesError};
use crate::mlf::{ml1, ml2, ml_multi, ml_prabhakar, EvalControl, MLSpec, MlError};
use crate::rational::{exp, exp_f64, fmt_ratio, parse_exp, q_int, serde_str, Exp, Q};
use crate::sdomain::{
    fde_denominator, fde_laplace, inverse_laplace_to_ml, residual_over_common_den, split_laplace, srational_equal,
    SDomainError, SPoly,
};
use crate::solver::{
    abm_solve_with, closed_form_solve_with, max_shifted_gap, stepping_split, verify_equivalence_with, SolveError,
    Verdict, DEFAULT_TOL, MIN_STEPS,
};
use crate::splitter::{
    build_naive_split, build_split_2m1, build_split_2m1_with_cut, build_split_chain, naive_pair_case, refine_split,
    MultiTermFde, NaiveVariant, SplitError, SplitSystem,
};

/// Environment variable overriding the default series tolerance.
pub const RTOL_ENV: &str = "FRACSPLIT_RTOL";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Ml(#[from] MlError),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Split(#[from] SplitError),
    #[error(transparent)]
    SDomain(#[from] SDomainError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => 2,
            CliError::Ml(e) | CliError::Series(SeriesError::Ml(e)) => ml_code(e),
            CliError::Series(_) => 2,
            CliError::Split(_) => 4,
            CliError::SDomain(e) => sdomain_code(e),
            CliError::Solve(e) => match e {
                SolveError::StepTooCoarse(_) | SolveError::BadHorizon(_) => 2,
                SolveError::UnsupportedOrder(_) | SolveError::Split(_) => 4,
                SolveError::SDomain(e) => sdomain_code(e),
            },
        }
    }
}

fn ml_code(e: &MlError) -> i32 {
    match e {
        MlError::Domain(_) => 2,
        MlError::NonConvergence { .. } | MlError::PrecisionLoss { .. } => 3,
    }
}

fn sdomain_code(e: &SDomainError) -> i32 {
    match e {
        SDomainError::Ml(e) => ml_code(e),
        _ => 4,
    }
}

#[derive(Debug, Parser)]
#[command(name = "fracsplit", version, about = "Mittag-Leffler evaluation and split checks for multi-term fractional ODEs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Run sequentially even when built with the `parallel` feature.
    #[arg(long, global = true)]
    pub sequential: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate a Mittag-Leffler function.
    Ml(MlArgs),
    /// Print a split system as JSON.
    Split(SplitArgs),
    /// Print the Laplace transform of the FDE and its Mittag-Leffler form.
    Transform(SpecArg),
    /// Time-step a split system and write CSV.
    Solve(SolveArgs),
    /// Compare the FDE with a split system symbolically and numerically.
    Verify(VerifyArgs),
    /// Reproduce one of the built-in counterexamples.
    Counterexample(CounterexampleArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Ml1,
    Ml2,
    Multi,
    Prabhakar,
}

#[derive(Debug, Args)]
pub struct MlArgs {
    #[arg(long, value_enum)]
    pub family: Family,
    #[arg(long, value_parser = exp_arg)]
    pub alpha: Option<Exp>,
    #[arg(long, value_parser = exp_arg)]
    pub beta: Option<Exp>,
    #[arg(long, value_parser = exp_arg)]
    pub gamma: Option<Exp>,
    /// Arguments for ml1/ml2/prabhakar (comma separated).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub z: Vec<f64>,
    /// Inner orders a_1..a_n for `multi`.
    #[arg(long, value_delimiter = ',', value_parser = exp_arg)]
    pub a: Vec<Exp>,
    /// Outer parameter b for `multi`.
    #[arg(long, value_parser = exp_arg)]
    pub b: Option<Exp>,
    /// Argument scales for `multi`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub scales: Vec<f64>,
    /// Argument exponents for `multi`; defaults to `a`.
    #[arg(long, value_delimiter = ',', value_parser = exp_arg)]
    pub powers: Vec<Exp>,
    /// Times for `multi`.
    #[arg(long, value_delimiter = ',')]
    pub t: Vec<f64>,
    #[arg(long)]
    pub rtol: Option<f64>,
    #[arg(long)]
    pub k_max: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
pub enum SplitKind {
    #[value(name = "2m1")]
    #[serde(rename = "2m1")]
    TwoMMinusOne,
    #[value(name = "chain")]
    #[serde(rename = "chain")]
    Chain,
    #[value(name = "naive_pair")]
    #[serde(rename = "naive_pair")]
    NaivePair,
    #[value(name = "naive_cut")]
    #[serde(rename = "naive_cut")]
    NaiveCut,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Refinement {
    pub equation: usize,
    #[serde(with = "serde_str")]
    pub gamma: Exp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub kind: SplitKind,
    /// Split point of the single-term `2m1` case.
    #[serde(default, with = "serde_str::option", skip_serializing_if = "Option::is_none")]
    pub cut: Option<Exp>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub refine: Vec<Refinement>,
}

/// Problem file: `{"a": [...], "alpha": [...], "ics": [...], "split": {...}}`
/// with every number given as an exact string (`"3/2"`, `"0.25"`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    #[serde(with = "serde_str::vec")]
    pub a: Vec<Q>,
    #[serde(with = "serde_str::vec")]
    pub alpha: Vec<Exp>,
    #[serde(with = "serde_str::vec")]
    pub ics: Vec<Q>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<SplitSpec>,
}

impl ProblemSpec {
    pub fn from_fde(fde: &MultiTermFde, split: Option<SplitSpec>) -> Self {
        ProblemSpec { a: fde.a().to_vec(), alpha: fde.alpha().to_vec(), ics: fde.ics().to_vec(), split }
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Usage(format!("bad problem file: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
        ProblemSpec::parse(&text)
    }

    pub fn fde(&self) -> Result<MultiTermFde, CliError> {
        MultiTermFde::new(self.a.clone(), self.alpha.clone(), self.ics.clone())
            .map_err(|e| CliError::Usage(e.to_string()))
    }

    pub fn build_split(&self, kind: Option<SplitKind>) -> Result<SplitSystem, CliError> {
        let fde = self.fde()?;
        let spec = match (kind, &self.split) {
            (Some(kind), Some(s)) => SplitSpec { kind, ..s.clone() },
            (Some(kind), None) => SplitSpec { kind, cut: None, refine: Vec::new() },
            (None, Some(s)) => s.clone(),
            (None, None) => return Err(CliError::Usage("no split given: add a `split` block or --kind".into())),
        };
        let mut sys = match spec.kind {
            SplitKind::TwoMMinusOne => match spec.cut {
                Some(cut) => build_split_2m1_with_cut(&fde, cut)?,
                None => build_split_2m1(&fde)?,
            },
            SplitKind::Chain => build_split_chain(&fde)?,
            SplitKind::NaivePair => build_naive_split(&fde, NaiveVariant::TwoTermPair)?,
            SplitKind::NaiveCut => build_naive_split(&fde, NaiveVariant::Cut2m2)?,
        };
        for r in &spec.refine {
            sys = refine_split(&sys, r.equation, r.gamma)?;
        }
        Ok(sys)
    }
}

#[derive(Debug, Args)]
pub struct SpecArg {
    pub spec: PathBuf,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    pub spec: PathBuf,
    #[arg(long, value_enum)]
    pub kind: Option<SplitKind>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    pub spec: PathBuf,
    #[arg(long, value_enum)]
    pub kind: Option<SplitKind>,
    #[arg(long, default_value_t = 1.0)]
    pub t_end: f64,
    #[arg(long, default_value_t = 1000)]
    pub steps: usize,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Add the closed-form solution as a column and report the largest gap.
    #[arg(long)]
    pub compare: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    pub spec: PathBuf,
    #[arg(long, value_enum)]
    pub kind: Option<SplitKind>,
    #[arg(long, default_value_t = 1.0)]
    pub t_end: f64,
    #[arg(long, default_value_t = 2000)]
    pub steps: usize,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct CounterexampleArgs {
    /// ex4.1, ex4.2, ex4.3, case-i, case-ii, case-iii or thm-2m2
    pub name: String,
}

fn exp_arg(s: &str) -> Result<Exp, String> {
    parse_exp(s).map_err(|e| e.to_string())
}

/// Parses `args` (including the program name), runs the command, and returns
/// the exit code. Output goes to `out`, diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    match dispatch(&cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn default_ctrl(rtol: Option<f64>, k_max: Option<usize>) -> Result<EvalControl, CliError> {
    let base = EvalControl::default();
    let env = match std::env::var(RTOL_ENV) {
        Ok(v) => Some(v.parse::<f64>().map_err(|_| CliError::Usage(format!("{RTOL_ENV}={v:?} is not a number")))?),
        Err(_) => None,
    };
    Ok(EvalControl::new(rtol.or(env).unwrap_or(base.rtol), k_max.unwrap_or(base.k_max))?)
}

fn dispatch(cli: &Cli, out: &mut dyn Write) -> Result<i32, CliError> {
    let exec = if cli.sequential { Execution::Sequential } else { Execution::default() };
    match &cli.command {
        Command::Ml(args) => cmd_ml(args, out),
        Command::Split(args) => cmd_split(args, out),
        Command::Transform(args) => cmd_transform(args, out),
        Command::Solve(args) => cmd_solve(args, exec, out),
        Command::Verify(args) => cmd_verify(args, exec, out),
        Command::Counterexample(args) => cmd_counterexample(&args.name, out),
    }
}

fn need<T: Copy>(v: Option<T>, flag: &str) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::Usage(format!("--{flag} is required for this family")))
}

fn cmd_ml(args: &MlArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let ctrl = default_ctrl(args.rtol, args.k_max)?;
    if args.family == Family::Multi {
        if args.t.is_empty() {
            return Err(CliError::Usage("--t is required for the multi family".into()));
        }
        let powers = if args.powers.is_empty() { args.a.clone() } else { args.powers.clone() };
        let spec = MLSpec {
            a: args.a.clone(),
            b: args.b.unwrap_or_else(Exp::one),
            gamma: Exp::one(),
            scales: args.scales.clone(),
            power_exponents: powers,
        };
        writeln!(out, "t,value")?;
        for &t in &args.t {
            writeln!(out, "{},{}", t, fmt_f64(ml_multi(&spec, t, &ctrl)?))?;
        }
        return Ok(0);
    }
    if args.z.is_empty() {
        return Err(CliError::Usage("--z is required for this family".into()));
    }
    let alpha = need(args.alpha, "alpha")?;
    writeln!(out, "z,value")?;
    for &z in &args.z {
        let v = match args.family {
            Family::Ml1 => ml1(alpha, z, &ctrl)?,
            Family::Ml2 => ml2(alpha, need(args.beta, "beta")?, z, &ctrl)?,
            Family::Prabhakar => ml_prabhakar(alpha, need(args.beta, "beta")?, need(args.gamma, "gamma")?, z, &ctrl)?,
            Family::Multi => unreachable!(),
        };
        writeln!(out, "{},{}", z, fmt_f64(v))?;
    }
    Ok(0)
}

fn cmd_split(args: &SplitArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let sys = ProblemSpec::load(&args.spec)?.build_split(args.kind)?;
    writeln!(out, "{}", serde_json::to_string_pretty(&sys).expect("serializable"))?;
    Ok(0)
}

fn cmd_transform(args: &SpecArg, out: &mut dyn Write) -> Result<i32, CliError> {
    let fde = ProblemSpec::load(&args.spec)?.fde()?;
    let x = fde_laplace(&fde);
    let terms = inverse_laplace_to_ml(&x)?;
    let report = json!({
        "laplace": x.to_string(),
        "numerator": x.num().to_string(),
        "denominator": x.den().to_string(),
        "time_domain": terms.terms.iter().map(ToString::to_string).collect::<Vec<_>>(),
    });
    writeln!(out, "{}", serde_json::to_string_pretty(&report).expect("serializable"))?;
    Ok(0)
}

/// 17 significant digits, enough to round-trip an f64.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn check_steps(steps: usize) -> Result<(), CliError> {
    if steps < MIN_STEPS {
        return Err(CliError::Usage(format!("--steps must be at least {MIN_STEPS}, got {steps}")));
    }
    Ok(())
}

fn cmd_solve(args: &SolveArgs, exec: Execution, out: &mut dyn Write) -> Result<i32, CliError> {
    check_steps(args.steps)?;
    let spec = ProblemSpec::load(&args.spec)?;
    let fde = spec.fde()?;
    let sys = if args.kind.is_some() || spec.split.is_some() { spec.build_split(args.kind)? } else { stepping_split(&fde)? };
    let traj = abm_solve_with(&sys, args.t_end, args.steps, exec)?;
    let closed = if args.compare {
        Some(closed_form_solve_with(&fde, &traj.t, &default_ctrl(None, None)?, exec)?)
    } else {
        None
    };

    let mut csv = String::new();
    csv.push('t');
    for name in &traj.names {
        csv.push(',');
        csv.push_str(name);
    }
    if closed.is_some() {
        csv.push_str(",x_closed_form");
    }
    csv.push('\n');
    for (k, row) in traj.values.iter().enumerate() {
        csv.push_str(&fmt_f64(traj.t[k]));
        for v in row {
            csv.push(',');
            csv.push_str(&fmt_f64(*v));
        }
        if let Some(c) = &closed {
            csv.push(',');
            csv.push_str(&fmt_f64(c[k]));
        }
        csv.push('\n');
    }
    if let Some(c) = &closed {
        let gap = max_shifted_gap(&traj.x(), &traj.t, c, 1);
        csv.push_str(&format!("# max_rel_gap={}\n", fmt_f64(gap)));
    }
    match &args.out {
        Some(path) => fs::write(path, csv)?,
        None => out.write_all(csv.as_bytes())?,
    }
    Ok(0)
}

fn cmd_verify(args: &VerifyArgs, exec: Execution, out: &mut dyn Write) -> Result<i32, CliError> {
    check_steps(args.steps)?;
    let spec = ProblemSpec::load(&args.spec)?;
    let fde = spec.fde()?;
    let sys = spec.build_split(args.kind)?;
    let report = verify_equivalence_with(&fde, &sys, args.t_end, args.steps, args.tol, exec)?;
    writeln!(out, "{}", serde_json::to_string_pretty(&report).expect("serializable"))?;
    Ok(verdict_code(report.verdict))
}

pub fn verdict_code(v: Verdict) -> i32 {
    match v {
        Verdict::Equivalent => 0,
        Verdict::NotEquivalent => 1,
        Verdict::Inconclusive => 5,
    }
}

/// Names accepted by `counterexample`.
pub const COUNTEREXAMPLES: [&str; 7] = ["ex4.1", "ex4.2", "ex4.3", "case-i", "case-ii", "case-iii", "thm-2m2"];

fn cmd_counterexample(name: &str, out: &mut dyn Write) -> Result<i32, CliError> {
    let text = match name {
        "ex4.1" => composition_example(exp(1, 4))?,
        "ex4.2" => composition_example(exp(1, 2))?,
        "ex4.3" => composition_example(exp(3, 10))?,
        "case-i" => naive_pair_example(exp(9, 5), exp(3, 10))?,
        "case-ii" => naive_pair_example(exp(6, 5), exp(7, 10))?,
        "case-iii" => naive_pair_example(exp(3, 2), exp(1, 2))?,
        "thm-2m2" => cut_2m2_example()?,
        _ => {
            return Err(CliError::Usage(format!(
                "unknown counterexample {name:?}; expected one of {}",
                COUNTEREXAMPLES.join(", ")
            )))
        }
    };
    write!(out, "{text}")?;
    Ok(0)
}

fn head(s: &GpSeries, n: usize) -> String {
    let shown = GpSeries::exact(s.terms().iter().take(n).copied());
    if s.len() > n {
        format!("{shown} + ...")
    } else {
        shown.to_string()
    }
}

/// `D^α D^α E_α(λt^α)` against `D^{2α} E_α(λt^α)` with `λ = 1`.
pub fn composition_example(alpha: Exp) -> Result<String, CliError> {
    let lambda = 1.0;
    let f = ml_to_series(alpha, lambda, 40)?;
    let samples = [0.25, 1.0];
    let report = compose_check(&f, alpha, alpha, &samples, 1e-9)?;
    let a = fmt_ratio(&alpha);
    let two_a = fmt_ratio(&(alpha + alpha));
    let ctrl = EvalControl::default();
    let mut s = String::new();
    s.push_str(&format!("f(t) = E_{a}(lambda*t^({a})), lambda = 1\n"));
    s.push_str(&format!("regularity class of f at 0: {}\n", regularity_class(&f)));
    s.push_str(&format!("D^({a}) f at t=0: {:?}\n", caputo_value_at_zero(&f, alpha)?));
    s.push_str(&format!("D^({a}) D^({a}) f = {}\n", head(&report.lhs_series, 4)));
    s.push_str(&format!("D^({two_a}) f       = {}\n", head(&report.rhs_series, 4)));
    s.push_str(&format!("closed forms: lambda^2*E_{a}(lambda*t^({a}))  vs  lambda*t^(-{a})*E_({a},{})(lambda*t^({a}))\n", fmt_ratio(&(Exp::one() - alpha))));
    let af = exp_f64(alpha);
    for &t in &samples {
        let z = lambda * t.powf(af);
        let lhs = lambda * lambda * ml1(alpha, z, &ctrl)?;
        let rhs = lambda * t.powf(-af) * ml2(alpha, Exp::one() - alpha, z, &ctrl)?;
        s.push_str(&format!("  t = {t}: lhs = {}, rhs = {}\n", fmt_f64(lhs), fmt_f64(rhs)));
    }
    match &report.first_mismatch {
        Some(m) => s.push_str(&format!(
            "NOT EQUAL: lowest mismatching exponent {} (lhs coefficient {}, rhs coefficient {})\n",
            fmt_ratio(&m.exponent),
            m.lhs,
            m.rhs
        )),
        None => s.push_str("EQUAL\n"),
    }
    Ok(s)
}

/// The naive two-term split against the proper one for
/// `D^α x + D^β x + x = 0`, `x(0) = x'(0) = 1`.
fn naive_pair_example(alpha: Exp, beta: Exp) -> Result<String, CliError> {
    let fde = MultiTermFde::new(vec![q_int(1), q_int(1), q_int(1)], vec![beta, alpha], vec![q_int(1), q_int(1)])?;
    let x = fde_laplace(&fde);
    let naive = build_naive_split(&fde, NaiveVariant::TwoTermPair)?;
    let proper = build_split_2m1(&fde)?;
    let y_naive = split_laplace(&naive)?;
    let y_proper = split_laplace(&proper)?;
    let den = fde_denominator(&fde);
    let gap = residual_over_common_den(&x, &y_naive, &den).unwrap_or_default();
    let mut s = String::new();
    s.push_str(&format!(
        "D^({})x + D^({})x + x = 0, x(0) = 1, x'(0) = 1; alpha - beta = {} ({:?})\n",
        fmt_ratio(&alpha),
        fmt_ratio(&beta),
        fmt_ratio(&(alpha - beta)),
        naive_pair_case(&fde).expect("parameters are in the two-term range")
    ));
    s.push_str(&format!("X(s)             = {x}\n"));
    s.push_str(&format!("naive split:\n{naive}"));
    s.push_str(&format!("Y0(s) naive      = {y_naive}\n"));
    s.push_str(&format!("missing numerator over [{den}]: {gap}\n"));
    s.push_str(&format!(
        "naive split: {}\n",
        if srational_equal(&x, &y_naive) { "EQUIVALENT" } else { "NOT EQUIVALENT" }
    ));
    s.push_str(&format!("proper split:\n{proper}"));
    s.push_str(&format!(
        "proper split: {}\n",
        if srational_equal(&x, &y_proper) { "EQUIVALENT" } else { "NOT EQUIVALENT" }
    ));
    Ok(s)
}

/// Worked `2m−2` split at `m = 3`.
fn cut_2m2_example() -> Result<String, CliError> {
    let fde = MultiTermFde::new(
        vec![q_int(1), q_int(2), q_int(-1), q_int(3)],
        vec![exp(1, 3), exp(4, 3), exp(5, 2)],
        vec![q_int(1), q_int(-1), q_int(2)],
    )?;
    let x = fde_laplace(&fde);
    let sys = build_naive_split(&fde, NaiveVariant::Cut2m2)?;
    let y = split_laplace(&sys)?;
    let den = fde_denominator(&fde);
    let gap = residual_over_common_den(&x, &y, &den).unwrap_or_default();
    let m = fde.m();
    let predicted = SPoly::monomial(&fde.a()[m] * &fde.ics()[m - 1], fde.alpha()[m - 1] - Exp::from_integer(m as i64));
    let mut s = String::new();
    s.push_str("x + 2 D^(1/3)x - D^(4/3)x + 3 D^(5/2)x = 0, C = (1, -1, 2)\n");
    s.push_str(&format!("2m-2 system:\n{sys}"));
    s.push_str(&format!("X(s)  = {x}\n"));
    s.push_str(&format!("Y0(s) = {y}\n"));
    s.push_str(&format!("residual numerator over [{den}]: {gap}\n"));
    s.push_str(&format!(
        "predicted a_m*C_(m-1)*s^(alpha_m - m) = a_3*C_2*s^({}) = {predicted}\n",
        fmt_ratio(&(fde.alpha()[m - 1] - Exp::from_integer(m as i64)))
    ));
    s.push_str(&format!(
        "{}\n",
        if srational_equal(&x, &y) { "EQUIVALENT" } else { "NOT EQUIVALENT" }
    ));
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Zero;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("fracsplit").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn ml1_prints_e() {
        let (code, out, _) = run_capture(&["ml", "--family", "ml1", "--alpha", "1", "--z", "1"]);
        assert_eq!(code, 0);
        assert!(out.contains("2.718281828459"), "{out}");
    }

    #[test]
    fn bad_rational_is_usage_error() {
        let (code, _, err) = run_capture(&["ml", "--family", "ml1", "--alpha", "x/2", "--z", "1"]);
        assert_eq!(code, 2, "{err}");
    }

    #[test]
    fn non_convergence_exit_code() {
        let (code, _, _) = run_capture(&["ml", "--family", "ml1", "--alpha", "1", "--z", "5", "--k-max", "3"]);
        assert_eq!(code, 3);
    }

    #[test]
    fn unknown_counterexample_is_usage_error() {
        let (code, _, _) = run_capture(&["counterexample", "ex9"]);
        assert_eq!(code, 2);
    }

    #[test]
    fn problem_spec_round_trip() {
        let text = r#"{"a": ["1", "0.5", "3/2"], "alpha": ["1/2", "3/2"], "ics": ["1", "-0.25"],
                       "split": {"kind": "2m1"}}"#;
        let spec = ProblemSpec::parse(text).unwrap();
        assert_eq!(spec.a[1], Q::new(1.into(), 2.into()));
        let again = ProblemSpec::parse(&serde_json::to_string(&spec).unwrap()).unwrap();
        assert_eq!(again, spec);
        assert!(spec.fde().unwrap().ics()[1] < Q::zero());
    }

    #[test]
    fn composition_example_reports_exponent() {
        let text = composition_example(exp(1, 4)).unwrap();
        assert!(text.contains("NOT EQUAL: lowest mismatching exponent -1/4"), "{text}");
    }
}
