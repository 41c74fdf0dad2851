//! The `star-solve` command-line front end.
//!
//! Exit codes: 0 success, 1 internal error, 2 parse or usage error,
//! 3 operand not MP-invertible, 4 unsolvable, 5 hypotheses fail,
//! 6 verification failure.

pub mod format;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::matrix::{mp_inverse, ComplexFloat, GaussianRational as Q, Involution, Matrix, MatrixRing, RectOps};
use crate::oracle::generate::{rect_pair, square_pair, symmetric_rhs, two_sided_rhs, Family, GenError};
use crate::oracle::{oracle_for_equation, verify_family_against_oracle, CheckOutcome};
use crate::rect::{rect_hypotheses, solve_rect, Dims, RectProblem};
use crate::ring::{penrose_checks, Agreement, RandomElement};
use crate::solvers::{
    check_hypotheses, family_sample, solvability, solve, solve_sym_left, solve_sym_right, sym_solvability, Condition,
    Equation, EquationKind, HypothesisReport, Outcome, Sign, SolutionFamily, SolveError, Verdict,
};

use format::{matrix_from_raw, matrix_to_raw, Backend, CliScalar, DimsArg, InstanceFile, Kind, MatrixFile, RawMatrix};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_NOT_MP_INVERTIBLE: i32 = 3;
pub const EXIT_UNSOLVABLE: i32 = 4;
pub const EXIT_HYPOTHESES_FAIL: i32 = 5;
pub const EXIT_VERIFICATION: i32 = 6;

/// Default relative tolerance for the float backend.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Seeded parameters checked against the oracle in `solve --oracle`.
const ORACLE_TRIALS: u64 = 5;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("{0}")]
    Usage(String),
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("operand `{0}` is not MP-invertible")]
    NotMpInvertible(String),
    #[error("verification failed (residual {0:e})")]
    Verification(f64),
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) | CliError::Usage(_) | CliError::Io { .. } => EXIT_PARSE,
            CliError::NotMpInvertible(_) => EXIT_NOT_MP_INVERTIBLE,
            CliError::Verification(_) => EXIT_VERIFICATION,
            CliError::Internal(_) => EXIT_INTERNAL,
        }
    }
}

impl From<SolveError> for CliError {
    fn from(e: SolveError) -> Self {
        match e {
            SolveError::NotMpInvertible(name) => CliError::NotMpInvertible(name.to_string()),
            SolveError::VerificationFailed { residual } => CliError::Verification(residual),
            SolveError::NotAMember { .. } | SolveError::Shape(_) | SolveError::Matrix(_) => CliError::Parse(e.to_string()),
        }
    }
}

impl From<GenError> for CliError {
    fn from(e: GenError) -> Self {
        CliError::Usage(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "star-solve", version, about = "Solve axb* ∓ bx*a* = c and related equations over matrices with involution")]
pub struct Cli {
    /// Relative tolerance for float comparisons.
    #[arg(long, global = true, env = "STAR_SOLVE_TOL", default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Moore–Penrose inverse of one matrix, with the Penrose residuals.
    Mp(IoArgs),
    /// Hypotheses and solvability conditions, without solving.
    Check {
        #[command(flatten)]
        io: IoArgs,
        /// Add the real-linearization verdict (exact backend only).
        #[arg(long)]
        oracle: bool,
    },
    /// Particular solution plus seeded samples of the general solution.
    Solve {
        #[command(flatten)]
        io: IoArgs,
        #[arg(long, default_value_t = 3)]
        samples: u64,
        /// First sample seed; defaults to the instance seed, then 0.
        #[arg(long)]
        seed: Option<u64>,
        /// Cross-check the family against the oracle (exact backend only).
        #[arg(long)]
        oracle: bool,
    },
    /// Random instance satisfying the hypotheses.
    Gen(GenArgs),
    /// Substitute a claimed solution into an instance.
    Verify {
        /// Matrix file, or a `solve` report (its `x0` is used).
        #[arg(long)]
        solution: PathBuf,
        #[command(flatten)]
        io: IoArgs,
    },
}

#[derive(Debug, Args)]
pub struct IoArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Where to write the JSON report.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub kind: Kind,
    /// unitary, identical, diagonal or rejection. Defaults to unitary
    /// (square kinds) or diagonal (rect kinds).
    #[arg(long)]
    pub family: Option<Family>,
    /// `n` for square kinds, `m,n,p` for rect kinds.
    #[arg(long)]
    pub dims: Option<DimsArg>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Build c as the image of a random x, so the instance is solvable.
    #[arg(long)]
    pub force_solvable: bool,
    #[arg(long, default_value = "conjugate_transpose")]
    pub involution: Involution,
    #[arg(long, default_value = "exact")]
    pub backend: Backend,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

/// Parses `args` (including the program name) and runs the command,
/// writing the text summary to `out`. Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_PARSE } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok(done) => {
            let _ = out.write_all(done.summary.as_bytes());
            done.code
        }
        Err(e) => {
            eprintln!("star-solve: {e}");
            e.exit_code()
        }
    }
}

struct Done {
    code: i32,
    summary: String,
}

fn execute(cli: &Cli) -> Result<Done, CliError> {
    if !(cli.tol.is_finite() && cli.tol >= 0.0) {
        return Err(CliError::Usage(format!("tolerance must be a finite non-negative number, found {}", cli.tol)));
    }
    match &cli.command {
        Command::Mp(io) => {
            let file = MatrixFile::parse(&read(&io.input)?)?;
            let (report, summary) = match file.backend {
                Backend::Exact => cmd_mp::<Q>(&file, cli.tol)?,
                Backend::Float => cmd_mp::<ComplexFloat>(&file, cli.tol)?,
            };
            finish(EXIT_OK, &report, summary, io.output.as_deref())
        }
        Command::Check { io, oracle } => {
            let inst = InstanceFile::parse(&read(&io.input)?)?;
            let (report, summary) = match inst.backend {
                Backend::Exact => cmd_check::<Q>(&inst, cli.tol, *oracle)?,
                Backend::Float => cmd_check::<ComplexFloat>(&inst, cli.tol, *oracle)?,
            };
            finish(EXIT_OK, &report, summary, io.output.as_deref())
        }
        Command::Solve { io, samples, seed, oracle } => {
            let inst = InstanceFile::parse(&read(&io.input)?)?;
            let opts = SolveOptions { samples: *samples, seed: seed.or(inst.seed).unwrap_or(0), oracle: *oracle };
            let (code, report, summary) = match inst.backend {
                Backend::Exact => cmd_solve::<Q>(&inst, cli.tol, opts)?,
                Backend::Float => cmd_solve::<ComplexFloat>(&inst, cli.tol, opts)?,
            };
            finish(code, &report, summary, io.output.as_deref())
        }
        Command::Gen(args) => {
            let inst = cmd_gen(args)?;
            let json = inst.to_json();
            match &args.output {
                Some(path) => {
                    write(path, &json)?;
                    Ok(Done { code: EXIT_OK, summary: format!("wrote {} instance to {}\n", inst.kind, path.display()) })
                }
                None => Ok(Done { code: EXIT_OK, summary: json }),
            }
        }
        Command::Verify { solution, io } => {
            let inst = InstanceFile::parse(&read(&io.input)?)?;
            let claimed = read(solution)?;
            let (code, report, summary) = match inst.backend {
                Backend::Exact => cmd_verify::<Q>(&inst, &claimed, cli.tol)?,
                Backend::Float => cmd_verify::<ComplexFloat>(&inst, &claimed, cli.tol)?,
            };
            finish(code, &report, summary, io.output.as_deref())
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_owned(), source })
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Io { path: path.to_owned(), source })
}

fn finish(code: i32, report: &Report, summary: String, output: Option<&Path>) -> Result<Done, CliError> {
    if let Some(path) = output {
        let mut json = serde_json::to_string_pretty(report).expect("report serializes");
        json.push('\n');
        write(path, &json)?;
    }
    Ok(Done { code, summary })
}

/// UTC time of the run, or `SOURCE_DATE_EPOCH` when set.
fn timestamp() -> String {
    let now = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.parse::<i64>().ok())
        .and_then(|secs| chrono::DateTime::from_timestamp(secs, 0))
        .unwrap_or_else(chrono::Utc::now);
    now.to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictLabel {
    Solvable,
    Unsolvable,
    Indeterminate,
    HypothesesFail,
}

impl From<Verdict> for VerdictLabel {
    fn from(v: Verdict) -> Self {
        match v {
            Verdict::Solvable => VerdictLabel::Solvable,
            Verdict::Unsolvable => VerdictLabel::Unsolvable,
            Verdict::Indeterminate => VerdictLabel::Indeterminate,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct HypothesesSection {
    pub range_ok: bool,
    pub hermitian_ok: bool,
    pub indeterminate: bool,
    pub range_residual: f64,
    pub hermitian_residual: f64,
    pub failed: Vec<&'static str>,
    pub a_dagger: RawMatrix,
    pub b_dagger: RawMatrix,
    pub d: RawMatrix,
    pub d_dagger: RawMatrix,
}

impl HypothesesSection {
    fn of<S: CliScalar>(r: &HypothesisReport<Matrix<S>>) -> Self {
        HypothesesSection {
            range_ok: r.range_ok(),
            hermitian_ok: r.hermitian_ok(),
            indeterminate: r.is_indeterminate(),
            range_residual: r.range.residual,
            hermitian_residual: r.hermitian.residual,
            failed: r.failed(),
            a_dagger: matrix_to_raw(&r.a_dagger),
            b_dagger: matrix_to_raw(&r.b_dagger),
            d: matrix_to_raw(&r.d),
            d_dagger: matrix_to_raw(&r.d_dagger),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct SampleSection {
    pub seed: u64,
    pub x: RawMatrix,
    pub residual: f64,
}

#[derive(Debug, Serialize)]
pub struct OracleSection {
    pub solvable: bool,
    pub real_dimension: usize,
    pub rank: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub checks: Option<Vec<CheckOutcome>>,
}

impl OracleSection {
    fn passed(&self) -> bool {
        self.checks.as_ref().is_none_or(|c| c.iter().all(|c| c.passed))
    }
}

#[derive(Debug, Serialize)]
pub struct PenroseLine {
    pub equation: &'static str,
    pub agreement: Agreement,
    pub residual: f64,
}

#[derive(Debug, Serialize)]
pub struct VerificationSection {
    pub passed: bool,
    pub residual: f64,
}

/// Machine-readable report. Sections not produced by a command are
/// omitted.
#[derive(Debug, Serialize)]
pub struct Report {
    pub version: &'static str,
    pub command: &'static str,
    pub timestamp: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<Kind>,
    pub backend: Backend,
    pub involution: Involution,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hypotheses: Option<HypothesesSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<VerdictLabel>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub indeterminate: Option<bool>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub failed_conditions: Vec<&'static str>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub conditions: Vec<Condition>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x0: Option<RawMatrix>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x0_residual: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub samples: Vec<SampleSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mp: Option<RawMatrix>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub penrose: Vec<PenroseLine>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verification: Option<VerificationSection>,
}

impl Report {
    fn new<S: CliScalar>(command: &'static str, kind: Option<Kind>, involution: Involution, tol: f64) -> Self {
        Report {
            version: format::FORMAT_VERSION,
            command,
            timestamp: timestamp(),
            kind,
            backend: S::BACKEND,
            involution,
            tol: (!S::EXACT).then_some(tol),
            hypotheses: None,
            verdict: None,
            indeterminate: None,
            failed_conditions: Vec::new(),
            conditions: Vec::new(),
            x0: None,
            x0_residual: None,
            samples: Vec::new(),
            oracle: None,
            mp: None,
            penrose: Vec::new(),
            verification: None,
        }
    }

    fn set_conditions(&mut self, conditions: &[Condition]) {
        self.failed_conditions = conditions.iter().filter(|c| !c.comparison.holds()).map(|c| c.name).collect();
        self.conditions = conditions.to_vec();
    }
}

/// Backends that may or may not support the oracle.
pub trait OracleBackend: CliScalar {
    fn oracle_section<R>(
        eq: &Equation<Matrix<Self>>,
        fam: Option<&SolutionFamily<R>>,
        trials: u64,
    ) -> Result<OracleSection, CliError>
    where
        R: RandomElement<Elem = Matrix<Self>>;
}

impl OracleBackend for Q {
    fn oracle_section<R>(eq: &Equation<Matrix<Q>>, fam: Option<&SolutionFamily<R>>, trials: u64) -> Result<OracleSection, CliError>
    where
        R: RandomElement<Elem = Matrix<Q>>,
    {
        let oracle = oracle_for_equation(eq).map_err(|e| CliError::Internal(e.to_string()))?;
        let checks = fam.map(|f| verify_family_against_oracle(f, &oracle, trials).checks);
        Ok(OracleSection { solvable: oracle.solvable, real_dimension: oracle.real_dimension, rank: oracle.rank, checks })
    }
}

impl OracleBackend for ComplexFloat {
    fn oracle_section<R>(_: &Equation<Matrix<Self>>, _: Option<&SolutionFamily<R>>, _: u64) -> Result<OracleSection, CliError>
    where
        R: RandomElement<Elem = Matrix<Self>>,
    {
        Err(CliError::Usage("the oracle is exact-only; use the exact backend".into()))
    }
}

/// A parsed, shape-checked instance.
enum Problem<S: CliScalar> {
    Square { kind: Kind, ring: MatrixRing<S>, a: Matrix<S>, b: Matrix<S>, c: Option<Matrix<S>> },
    Rect { sign: Sign, problem: RectProblem<S> },
}

impl<S: CliScalar> Problem<S> {
    fn from_instance(inst: &InstanceFile, tol: f64) -> Result<Self, CliError> {
        let names = inst.kind.operand_names();
        let ops: Vec<Matrix<S>> = names.iter().map(|n| inst.operand(n)).collect::<Result<_, _>>()?;
        if let Some(sign) = inst.kind.sign().filter(|_| inst.kind.is_rect()) {
            let problem = RectProblem::new(ops[0].clone(), ops[1].clone(), ops[2].clone())?;
            if inst.dims.is_some_and(|d| d != problem.dims()) {
                return Err(CliError::Parse(format!("dims {:?} do not match operands {:?}", inst.dims, problem.dims())));
            }
            return Ok(Problem::Rect { sign, problem });
        }
        let ring = MatrixRing::with_tol(ops[0].rows(), inst.involution, tol);
        for (name, m) in names.iter().zip(&ops) {
            ring.check_member(m).map_err(|e| CliError::Parse(format!("operand {name}: {e}")))?;
        }
        let mut it = ops.into_iter();
        let (a, b, c) = (it.next().expect("a"), it.next().expect("b"), it.next());
        Ok(Problem::Square { kind: inst.kind, ring, a, b, c })
    }

    /// The equation in two-sided form, with the ops that evaluate it.
    fn equation(&self, tol: f64) -> (RectOps<S>, Equation<Matrix<S>>) {
        let (inv, eq) = match self {
            Problem::Square { kind, ring, a, b, c } => {
                let inv = ring.involution();
                let one = Matrix::identity(ring.order(), inv);
                let eq = match (kind, c) {
                    (Kind::SymRight, _) => Equation { sign: Sign::Plus, a: one, b: a.clone(), c: b.clone() },
                    (Kind::SymLeft, _) => Equation { sign: Sign::Plus, a: a.star(), b: one, c: b.clone() },
                    (kind, Some(c)) => Equation {
                        sign: kind.sign().expect("two-sided kind"),
                        a: a.clone(),
                        b: b.clone(),
                        c: c.clone(),
                    },
                    (_, None) => unreachable!("two-sided kinds carry c"),
                };
                (inv, eq)
            }
            Problem::Rect { sign, problem } => (
                problem.involution(),
                Equation { sign: *sign, a: problem.a().clone(), b: problem.b().clone(), c: problem.c().clone() },
            ),
        };
        (RectOps::new(inv, tol), eq)
    }

    fn unknown_shape(&self) -> (usize, usize) {
        match self {
            Problem::Square { ring, .. } => (ring.order(), ring.order()),
            Problem::Rect { problem, .. } => (problem.dims().n, problem.dims().p),
        }
    }
}

fn cmd_mp<S: CliScalar>(file: &MatrixFile, tol: f64) -> Result<(Report, String), CliError> {
    let m: Matrix<S> = matrix_from_raw(&file.matrix, file.involution)?;
    let mp = mp_inverse(&m).map_err(|_| CliError::NotMpInvertible("matrix".into()))?;
    let checks = penrose_checks(&RectOps::<S>::new(file.involution, tol), &m, &mp);
    let labels = ["aba = a", "bab = b", "(ab)* = ab", "(ba)* = ba"];
    let mut report = Report::new::<S>("mp", None, file.involution, tol);
    report.penrose = labels
        .iter()
        .zip(&checks)
        .map(|(equation, c)| PenroseLine { equation, agreement: c.agreement, residual: c.residual })
        .collect();
    report.mp = Some(matrix_to_raw(&mp));
    if let Some(bad) = checks.iter().find(|c| !c.holds()) {
        return Err(CliError::Verification(bad.residual));
    }
    let shown = serde_json::to_string(&matrix_to_raw(&mp)).expect("matrix serializes");
    Ok((report, format!("mp: {}x{} matrix, Penrose equations hold\nmp = {shown}\n", m.rows(), m.cols())))
}

fn cmd_check<S: OracleBackend>(inst: &InstanceFile, tol: f64, with_oracle: bool) -> Result<(Report, String), CliError> {
    let problem = Problem::<S>::from_instance(inst, tol)?;
    let mut report = Report::new::<S>("check", Some(inst.kind), inst.involution, tol);
    match &problem {
        Problem::Square { kind: kind @ (Kind::SymRight | Kind::SymLeft), ring, a, b, .. } => {
            let eq_kind = if *kind == Kind::SymRight { EquationKind::SymRight } else { EquationKind::SymLeft };
            let s = sym_solvability(ring, eq_kind, a, b)?;
            report.set_conditions(&s.conditions);
            report.verdict = Some(s.verdict().into());
        }
        Problem::Square { kind, ring, a, b, c: Some(c) } => {
            let hyp = check_hypotheses(ring, a, b)?;
            fill_two_sided(&mut report, ring, kind.sign().expect("two-sided"), &hyp, c);
        }
        Problem::Square { c: None, .. } => unreachable!("two-sided kinds carry c"),
        Problem::Rect { sign, problem } => {
            let ops = RectOps::new(problem.involution(), tol);
            let hyp = rect_hypotheses(&ops, problem.a(), problem.b())?;
            fill_two_sided(&mut report, &ops, *sign, &hyp, problem.c());
        }
    }
    report.indeterminate = Some(report.verdict == Some(VerdictLabel::Indeterminate)
        || report.hypotheses.as_ref().is_some_and(|h| h.indeterminate));
    if with_oracle {
        let (_, eq) = problem.equation(tol);
        report.oracle = Some(S::oracle_section::<RectOps<S>>(&eq, None, 0)?);
    }
    let summary = summarize(&report);
    Ok((report, summary))
}

fn fill_two_sided<S: CliScalar, R: crate::ring::StarOps<Elem = Matrix<S>>>(
    report: &mut Report,
    ops: &R,
    sign: Sign,
    hyp: &HypothesisReport<Matrix<S>>,
    c: &Matrix<S>,
) {
    report.hypotheses = Some(HypothesesSection::of(hyp));
    if hyp.holds() {
        let s = solvability(ops, sign, hyp, c);
        report.set_conditions(&s.conditions);
        report.verdict = Some(s.verdict().into());
    } else {
        report.verdict = Some(VerdictLabel::HypothesesFail);
    }
}

#[derive(Clone, Copy, Debug)]
struct SolveOptions {
    samples: u64,
    seed: u64,
    oracle: bool,
}

fn cmd_solve<S: OracleBackend>(inst: &InstanceFile, tol: f64, opts: SolveOptions) -> Result<(i32, Report, String), CliError> {
    let problem = Problem::<S>::from_instance(inst, tol)?;
    let mut report = Report::new::<S>("solve", Some(inst.kind), inst.involution, tol);
    let (_, eq) = problem.equation(tol);
    let code = match &problem {
        Problem::Square { kind, ring, a, b, c } => {
            let outcome = match (kind, c) {
                (Kind::SymRight, _) => solve_sym_right(ring, a, b)?,
                (Kind::SymLeft, _) => solve_sym_left(ring, a, b)?,
                (kind, Some(c)) => solve(ring, kind.sign().expect("two-sided"), a, b, c)?,
                (_, None) => unreachable!("two-sided kinds carry c"),
            };
            report_outcome(&mut report, outcome, &eq, opts)?
        }
        Problem::Rect { sign, problem } => report_outcome(&mut report, solve_rect(*sign, problem, tol)?, &eq, opts)?,
    };
    let summary = summarize(&report);
    Ok((code, report, summary))
}

fn report_outcome<S: OracleBackend, R: RandomElement<Elem = Matrix<S>>>(
    report: &mut Report,
    outcome: Outcome<R>,
    eq: &Equation<Matrix<S>>,
    opts: SolveOptions,
) -> Result<i32, CliError> {
    match outcome {
        Outcome::Solved(fam) => {
            if let Some(hyp) = fam.report() {
                report.hypotheses = Some(HypothesesSection::of(hyp));
            }
            let x0_check = fam.residual(fam.x0());
            if !x0_check.holds() {
                return Err(CliError::Verification(x0_check.residual));
            }
            report.verdict = Some(VerdictLabel::Solvable);
            report.indeterminate = Some(false);
            report.x0 = Some(matrix_to_raw(fam.x0()));
            report.x0_residual = Some(x0_check.residual);
            for seed in opts.seed..opts.seed.saturating_add(opts.samples) {
                let x = family_sample(&fam, seed)?;
                let residual = fam.residual(&x).residual;
                report.samples.push(SampleSection { seed, x: matrix_to_raw(&x), residual });
            }
            if opts.oracle {
                let section = S::oracle_section(eq, Some(&fam), ORACLE_TRIALS)?;
                let passed = section.passed();
                report.oracle = Some(section);
                if !passed {
                    return Ok(EXIT_VERIFICATION);
                }
            }
            Ok(EXIT_OK)
        }
        Outcome::Unsolvable { report: hyp, solvability } => {
            report.hypotheses = hyp.as_deref().map(HypothesesSection::of);
            report.set_conditions(&solvability.conditions);
            report.verdict = Some(solvability.verdict().into());
            report.indeterminate = Some(solvability.verdict() == Verdict::Indeterminate);
            if opts.oracle {
                report.oracle = Some(S::oracle_section::<R>(eq, None, 0)?);
            }
            Ok(EXIT_UNSOLVABLE)
        }
        Outcome::HypothesesFail(hyp) => {
            report.indeterminate = Some(hyp.is_indeterminate());
            report.hypotheses = Some(HypothesesSection::of(&hyp));
            report.verdict = Some(VerdictLabel::HypothesesFail);
            if opts.oracle {
                report.oracle = Some(S::oracle_section::<R>(eq, None, 0)?);
            }
            Ok(EXIT_HYPOTHESES_FAIL)
        }
    }
}

fn cmd_gen(args: &GenArgs) -> Result<InstanceFile, CliError> {
    let kind = args.kind;
    let inv = args.involution;
    let family = args.family.unwrap_or(if kind.is_rect() { Family::Diagonal } else { Family::Unitary });
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let (names, operands, dims) = match (kind.sign(), args.dims) {
        (Some(sign), Some(DimsArg::Rect(dims))) if kind.is_rect() => {
            let (a, b) = rect_pair(family, dims, inv, &mut rng)?;
            let c = two_sided_rhs(sign, &a, &b, args.force_solvable, &mut rng);
            (kind.operand_names(), vec![a, b, c], Some(dims))
        }
        (Some(sign), None) if kind.is_rect() => {
            let dims = Dims::new(2, 2, 2);
            let (a, b) = rect_pair(family, dims, inv, &mut rng)?;
            let c = two_sided_rhs(sign, &a, &b, args.force_solvable, &mut rng);
            (kind.operand_names(), vec![a, b, c], Some(dims))
        }
        (_, Some(DimsArg::Rect(_))) => {
            return Err(CliError::Usage(format!("kind {kind} takes --dims n, not m,n,p")));
        }
        (_, Some(DimsArg::Square(_))) if kind.is_rect() => {
            return Err(CliError::Usage(format!("kind {kind} takes --dims m,n,p")));
        }
        (sign, dims) => {
            let n = match dims {
                Some(DimsArg::Square(n)) => n,
                _ => 2,
            };
            let (a, b) = square_pair(family, n, inv, &mut rng)?;
            let ops = match (sign, kind) {
                (Some(sign), _) => {
                    let c = two_sided_rhs(sign, &a, &b, args.force_solvable, &mut rng);
                    vec![a, b, c]
                }
                (None, Kind::SymRight) => {
                    let rhs = symmetric_rhs(EquationKind::SymRight, &a, args.force_solvable, &mut rng);
                    vec![a, rhs]
                }
                (None, _) => {
                    let rhs = symmetric_rhs(EquationKind::SymLeft, &a, args.force_solvable, &mut rng);
                    vec![a, rhs]
                }
            };
            (kind.operand_names(), ops, None)
        }
    };
    if let (Some(_), [a, b, ..]) = (kind.sign(), operands.as_slice()) {
        let ops = RectOps::<Q>::new(inv, 0.0);
        if !rect_hypotheses(&ops, a, b)?.holds() {
            return Err(CliError::Internal(format!("generated {family} pair fails the hypotheses")));
        }
    }
    let raw = |m: &Matrix<Q>| match args.backend {
        Backend::Exact => matrix_to_raw(m),
        Backend::Float => matrix_to_raw(&m.to_float()),
    };
    Ok(InstanceFile {
        version: format::FORMAT_VERSION.into(),
        kind,
        backend: args.backend,
        involution: inv,
        operands: names.iter().zip(&operands).map(|(n, m)| (n.to_string(), raw(m))).collect(),
        dims,
        seed: Some(args.seed),
    })
}

fn parse_solution<S: CliScalar>(text: &str, inst: &InstanceFile) -> Result<Matrix<S>, CliError> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
    if let Some(x0) = value.get("x0") {
        let raw: RawMatrix = serde_json::from_value(x0.clone()).map_err(|e| CliError::Parse(e.to_string()))?;
        return matrix_from_raw(&raw, inst.involution);
    }
    let file = MatrixFile::parse(text)?;
    if file.backend != inst.backend || file.involution != inst.involution {
        return Err(CliError::Parse("solution backend or involution differs from the instance".into()));
    }
    matrix_from_raw(&file.matrix, file.involution)
}

fn cmd_verify<S: CliScalar>(inst: &InstanceFile, claimed: &str, tol: f64) -> Result<(i32, Report, String), CliError> {
    let problem = Problem::<S>::from_instance(inst, tol)?;
    let x: Matrix<S> = parse_solution(claimed, inst)?;
    if x.shape() != problem.unknown_shape() {
        return Err(CliError::Parse(format!("solution must be {:?}, found {:?}", problem.unknown_shape(), x.shape())));
    }
    let (ops, eq) = problem.equation(tol);
    let check = eq.residual(&ops, &x);
    let mut report = Report::new::<S>("verify", Some(inst.kind), inst.involution, tol);
    report.verification = Some(VerificationSection { passed: check.holds(), residual: check.residual });
    let (code, summary) = if check.holds() {
        (EXIT_OK, format!("verify: solution satisfies the {} equation\n", inst.kind))
    } else {
        (EXIT_VERIFICATION, format!("verify: FAILED, residual {:e}\n", check.residual))
    };
    Ok((code, report, summary))
}

fn summarize(report: &Report) -> String {
    let mut s = String::new();
    let kind = report.kind.map_or("-", Kind::name);
    s.push_str(&format!("{}: {kind} ({}, {})\n", report.command, report.backend.name(), report.involution.name()));
    if let Some(h) = &report.hypotheses {
        let status = if h.failed.is_empty() { "hold".to_string() } else { format!("fail: {}", h.failed.join(", ")) };
        s.push_str(&format!("hypotheses: {status}\n"));
    }
    if let Some(v) = report.verdict {
        let label = serde_json::to_value(v).expect("label serializes");
        s.push_str(&format!("verdict: {}\n", label.as_str().unwrap_or_default()));
    }
    if !report.failed_conditions.is_empty() {
        s.push_str(&format!("failed conditions: {}\n", report.failed_conditions.join(", ")));
    }
    if report.indeterminate == Some(true) {
        s.push_str("indeterminate: residuals fall inside the tolerance band\n");
    }
    if let Some(x0) = &report.x0 {
        s.push_str(&format!("x0 = {}\n", serde_json::to_string(x0).expect("matrix serializes")));
    }
    if !report.samples.is_empty() {
        s.push_str(&format!("samples: {} verified\n", report.samples.len()));
    }
    if let Some(o) = &report.oracle {
        let checks = match &o.checks {
            None => String::new(),
            Some(_) if o.passed() => ", all checks passed".into(),
            Some(c) => {
                let failed: Vec<&str> = c.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
                format!(", FAILED: {}", failed.join(", "))
            }
        };
        s.push_str(&format!(
            "oracle: {}, kernel dimension {}{checks}\n",
            if o.solvable { "solvable" } else { "unsolvable" },
            o.real_dimension
        ));
    }
    s
}
