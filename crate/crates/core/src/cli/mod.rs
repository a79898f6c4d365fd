//! `gcf-forge` command line.
//!
//! Exit codes: 0 verified (or command succeeded), 1 refuted at depth,
//! 2 parse or I/O error, 3 precondition failure, 4 inconclusive.

pub mod report;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use thiserror::Error;

use crate::expr::{parse_const_expr, parse_polynomial, ParseError};
use crate::factorize::{find_couplings, verify_coupling, Coupling, FactorizeError};
use crate::gcf::{convergents, GcfError, GcfProblem};
use crate::numerics::{BigRational, PrecisionPolicy, PrecisionReal};
use crate::series::{certified_sum, ratio_certificate, sum_to_precision_with, terms, Classification, SeriesError};
use crate::verify::{check_boundary_selection, verify_conjecture_with, Verdict, VerifyError, VerifyOptions};

pub const DEFAULT_DIGITS: u32 = 30;
pub const DEFAULT_DEPTH: usize = 256;

pub const EXIT_OK: i32 = 0;
pub const EXIT_REFUTED: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_PRECONDITION: i32 = 3;
pub const EXIT_INCONCLUSIVE: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("problem file: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("field `{field}`: {source}")]
    Expr { field: &'static str, source: ParseError },
    #[error("field `b0`: `{0}` is not a rational constant")]
    NonConstantB0(String),
    #[error(transparent)]
    Problem(#[from] GcfError),
    #[error(transparent)]
    Factorize(#[from] FactorizeError),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Verify(#[from] VerifyError),
    #[error("{0}")]
    Precondition(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } | CliError::Toml(_) | CliError::Expr { .. } | CliError::NonConstantB0(_) => EXIT_PARSE,
            CliError::Problem(_)
            | CliError::Factorize(_)
            | CliError::Series(_)
            | CliError::Verify(_)
            | CliError::Precondition(_) => EXIT_PRECONDITION,
        }
    }
}

pub fn verdict_exit_code(v: Verdict) -> i32 {
    match v {
        Verdict::Verified => EXIT_OK,
        Verdict::RefutedAtDepth => EXIT_REFUTED,
        Verdict::Inconclusive => EXIT_INCONCLUSIVE,
    }
}

/// A TOML field holding expression text; bare integers are accepted too.
#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(untagged)]
pub enum ExprText {
    Int(i64),
    Text(String),
}

impl ExprText {
    fn text(&self) -> String {
        match self {
            ExprText::Int(i) => i.to_string(),
            ExprText::Text(s) => s.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub name: Option<String>,
    pub b0: ExprText,
    pub a: ExprText,
    pub b: ExprText,
    pub target: Option<ExprText>,
}

impl ProblemFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        Ok(toml::from_str(text)?)
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn to_problem(&self) -> Result<GcfProblem, CliError> {
        let poly = |field, t: &ExprText| parse_polynomial(&t.text()).map_err(|source| CliError::Expr { field, source });
        let b0_text = self.b0.text();
        let b0 = poly("b0", &self.b0)?
            .as_constant()
            .ok_or(CliError::NonConstantB0(b0_text))?;
        let target = self
            .target
            .as_ref()
            .map(|t| {
                parse_const_expr(&t.text()).map_err(|source| CliError::Expr {
                    field: "target",
                    source,
                })
            })
            .transpose()?;
        Ok(GcfProblem::new(b0, poly("a", &self.a)?, poly("b", &self.b)?, target)?)
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "gcf-forge",
    version,
    about = "Verify polynomial continued fraction identities"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone)]
pub struct CommonArgs {
    /// Problem file (TOML with b0, a, b and optional target, name)
    pub file: PathBuf,
    /// Number of recurrence steps
    #[arg(long, default_value_t = DEFAULT_DEPTH)]
    pub depth: usize,
    /// Requested decimal digits
    #[arg(long, default_value_t = DEFAULT_DIGITS)]
    pub digits: u32,
    /// Print exact rationals instead of decimal previews
    #[arg(long)]
    pub exact: bool,
    /// Write the verification report as JSON
    #[arg(long, value_name = "PATH")]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Table of convergents A_n / B_n
    Eval(CommonArgs),
    /// Search for couplings c, d of the recurrence
    Factorize(CommonArgs),
    /// Ratio certificate and sum of the reciprocal series
    Series(CommonArgs),
    /// Full verification against the target constant
    Verify(CommonArgs),
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = if e.use_stderr() {
                write!(err, "{e}")
            } else {
                write!(out, "{e}")
            };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Eval(a) => cmd_eval(a, out),
        Command::Factorize(a) => cmd_factorize(a, out),
        Command::Series(a) => cmd_series(a, out),
        Command::Verify(a) => cmd_verify(a, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn load(args: &CommonArgs) -> Result<(ProblemFile, GcfProblem), CliError> {
    let file = ProblemFile::read(&args.file)?;
    let problem = file.to_problem()?;
    Ok((file, problem))
}

fn preview(q: &BigRational, digits: usize) -> String {
    let bits = (digits as f64 * 3.33) as u32 + 16;
    PrecisionReal::from_rational(q, bits).to_significant(digits.max(1))
}

fn exact_or_preview(q: &BigRational, exact: bool, digits: usize) -> String {
    if exact {
        q.to_string()
    } else {
        preview(q, digits)
    }
}

fn io_out(e: std::io::Error) -> CliError {
    CliError::Io {
        path: PathBuf::from("<stdout>"),
        source: e,
    }
}

pub fn cmd_eval(args: &CommonArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let (_, problem) = load(args)?;
    let digits = args.digits as usize;
    writeln!(out, "n\tA_n\tB_n\tx_n").map_err(io_out)?;
    for t in convergents(&problem, args.depth) {
        let x = match &t.value {
            Some(x) => exact_or_preview(x, args.exact, digits),
            None => "undefined".to_string(),
        };
        writeln!(
            out,
            "{}\t{}\t{}\t{}",
            t.n,
            exact_or_preview(&t.numerator, args.exact, 12),
            exact_or_preview(&t.denominator, args.exact, 12),
            x
        )
        .map_err(io_out)?;
    }
    Ok(EXIT_OK)
}

fn coupling_line(c: &Coupling) -> String {
    format!("c = {}; d = {}", c.c, c.d)
}

pub fn cmd_factorize(args: &CommonArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let (_, problem) = load(args)?;
    let found = find_couplings(problem.a(), problem.b())?;
    if found.is_empty() {
        writeln!(out, "no coupling within linear-split search space").map_err(io_out)?;
    }
    for c in &found {
        let tick = if verify_coupling(problem.a(), problem.b(), c) {
            "✓"
        } else {
            "✗"
        };
        let boundary = if check_boundary_selection(&problem, c) {
            "  (b0 = d(1))"
        } else {
            ""
        };
        writeln!(out, "{}  {tick}{boundary}", coupling_line(c)).map_err(io_out)?;
    }
    Ok(EXIT_OK)
}

pub fn cmd_series(args: &CommonArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let (_, problem) = load(args)?;
    let found = find_couplings(problem.a(), problem.b())?;
    let coupling = found
        .iter()
        .find(|c| check_boundary_selection(&problem, c))
        .or_else(|| found.first())
        .ok_or_else(|| CliError::Precondition("no coupling within linear-split search space".into()))?;
    let cert = ratio_certificate(coupling);
    writeln!(out, "coupling: {}", coupling_line(coupling)).map_err(io_out)?;
    if !check_boundary_selection(&problem, coupling) {
        writeln!(out, "warning: b0 != d(1); 1/S is not the continued fraction value").map_err(io_out)?;
    }
    writeln!(out, "ratio: ({}) / ({})", cert.numerator, cert.denominator).map_err(io_out)?;
    writeln!(out, "rho: {}", cert.rho).map_err(io_out)?;
    writeln!(out, "classification: {}", cert.classification).map_err(io_out)?;
    if cert.classification != Classification::Convergent {
        return Err(SeriesError::NotConvergent(cert.rho).into());
    }
    for (k, t) in terms(coupling, 6)?.iter().enumerate() {
        writeln!(out, "t_{k} = {}", exact_or_preview(t, args.exact, 12)).map_err(io_out)?;
    }
    let policy = PrecisionPolicy::from_env();
    let (sum, used) = sum_to_precision_with(coupling, args.digits, &policy)?;
    writeln!(out, "terms_used: {used}").map_err(io_out)?;
    writeln!(out, "series_value: {}", sum.to_significant(args.digits as usize)).map_err(io_out)?;
    if args.exact {
        let tol = crate::numerics::pow10(args.digits as i64 + 1);
        let cs = certified_sum(coupling, &tol)?;
        writeln!(out, "partial_sum: {}", cs.partial).map_err(io_out)?;
        writeln!(out, "tail_bound: {}", cs.tail_bound).map_err(io_out)?;
    }
    Ok(EXIT_OK)
}

pub fn cmd_verify(args: &CommonArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let (file, problem) = load(args)?;
    if args.digits < 1 {
        return Err(CliError::Precondition("--digits must be at least 1".into()));
    }
    let opts = VerifyOptions {
        digits: args.digits,
        depth: args.depth,
        policy: PrecisionPolicy::from_env(),
    };
    let r = verify_conjecture_with(&problem, &opts)?;
    let shown = if r.target_value.is_some() {
        r.digits_matched
    } else {
        r.certified_digits
    } as usize
        + 5;
    let real = |x: &Option<PrecisionReal>| x.as_ref().map_or("none".to_string(), |x| x.to_significant(shown));
    let opt = |x: Option<i64>| x.map_or("none".to_string(), |x| x.to_string());

    let mut lines = vec![format!(
        "problem: {}",
        file.name.as_deref().unwrap_or(&args.file.display().to_string())
    )];
    lines.push(format!(
        "coupling: {}",
        r.coupling.as_ref().map_or("none".to_string(), coupling_line)
    ));
    for c in &r.alternative_couplings {
        lines.push(format!("alternative coupling: {}", coupling_line(c)));
    }
    lines.push(format!("boundary_rule_holds: {}", r.boundary_rule_holds));
    lines.push(format!("exact_identity_depth: {}", opt(r.exact_identity_depth)));
    lines.push(format!("numerator_product_depth: {}", opt(r.numerator_product_depth)));
    lines.push(format!("casoratian_depth: {}", r.casoratian_depth));
    if let (Some(rho), Some(cl)) = (&r.rho, &r.classification) {
        lines.push(format!("rho: {rho} ({cl})"));
    }
    if let Some(n) = r.terms_used {
        lines.push(format!("terms_used: {n}"));
    }
    lines.push(format!("series_value: {}", real(&r.series_value)));
    lines.push(format!("gcf_value: {}", real(&r.gcf_value)));
    lines.push(format!("target_value: {}", real(&r.target_value)));
    lines.push(format!("digits_matched: {}", r.digits_matched));
    lines.push(format!("certified_digits: {}", r.certified_digits));
    lines.push(format!("monotone_convergents: {}", r.monotone_convergents));
    lines.push(format!("cauchy_digits: {}", r.cauchy_digits));
    lines.push(format!("verdict: {}", r.verdict));
    for l in lines {
        writeln!(out, "{l}").map_err(io_out)?;
    }

    if let Some(path) = &args.json {
        std::fs::write(path, report::to_json(&r)).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?;
    }
    Ok(verdict_exit_code(r.verdict))
}
