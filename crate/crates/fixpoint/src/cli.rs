//! `fixpoint` command-line driver.
//!
//! Exit codes: 0 success, 1 usage or input errors, 2 when the mathematics
//! refuses (no contraction certificate, not a self-map, divergence, or the
//! iteration budget ran out).

use std::ffi::OsString;
use std::fmt::{self, Write as _};
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use fixpoint_core::fredholm::{self, DiscretizedFredholm, FredholmOptions, FredholmSolution, Kernel};
use fixpoint_core::oracle;
use fixpoint_core::quadrature::{QuadratureKind, QuadratureRule};
use fixpoint_core::scalar::{self, ScalarOptions, ScalarProblem};
use fixpoint_core::sparse::{
    self, ContractionCertificate, CsrMatrix, NormKind, Preconditioner, SolveOptions, SolveReport,
};
use fixpoint_core::{Error, FixedPointResult, IterationTrace, Status, StoppingRule};

use crate::expr::Expr;
use crate::report::{
    write_json, CertificateDocument, FredholmDocument, FredholmProblem, ScalarDocument, ScalarProblemInfo,
};
use crate::{mtx, vector, FormatError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_REFUSED: i32 = 2;

/// Largest system the `--verify` oracle will densify.
pub const VERIFY_MAX_DIM: usize = 1000;

#[derive(Debug, Parser)]
#[command(name = "fixpoint", version, about = "Certified contraction-mapping solvers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Certify whether x <- x - Ax + b is a contraction.
    Certify(CertifyArgs),
    /// Solve Ax = b by fixed-point iteration.
    Solve(SolveArgs),
    /// Solve a Fredholm equation of the second kind with a built-in kernel.
    Fredholm(FredholmArgs),
    /// Find the fixed point of a real function on [a, b].
    Scalar(ScalarArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NormArg {
    Inf,
    One,
    Fro,
    All,
}

impl NormArg {
    fn kind(self) -> Option<NormKind> {
        match self {
            NormArg::Inf => Some(NormKind::Infinity),
            NormArg::One => Some(NormKind::One),
            NormArg::Fro => Some(NormKind::Frobenius),
            NormArg::All => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PreconditionArg {
    None,
    Jacobi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KernelArg {
    /// M(x, y) = x y
    SeparableXy,
    /// The sine kernel: f(t) = 1/2 ∫_0^1 sin(f(t) - y) dy
    Example4,
    /// M(x, y) = 1
    Constant,
}

impl KernelArg {
    fn name(self) -> &'static str {
        match self {
            KernelArg::SeparableXy => "separable-xy",
            KernelArg::Example4 => "example4",
            KernelArg::Constant => "constant",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GArg {
    /// g(x) = x
    Linear,
    /// g(x) = 1
    Constant,
    /// g(x) = 0
    Zero,
    /// g(x) = sin(x)
    Sin,
}

impl GArg {
    fn name(self) -> &'static str {
        match self {
            GArg::Linear => "linear",
            GArg::Constant => "constant",
            GArg::Zero => "zero",
            GArg::Sin => "sin",
        }
    }

    fn eval(self, x: f64) -> f64 {
        match self {
            GArg::Linear => x,
            GArg::Constant => 1.0,
            GArg::Zero => 0.0,
            GArg::Sin => x.sin(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum QuadratureArg {
    Gauss,
    Trapezoid,
}

#[derive(Debug, Args)]
pub struct IterationArgs {
    /// Stopping tolerance on the (estimated) distance to the fixed point.
    #[arg(long, default_value_t = 1e-10, value_parser = positive_f64)]
    pub tol: f64,
    /// Iteration budget.
    #[arg(long = "max-iter", default_value_t = 100_000)]
    pub max_iter: usize,
    /// Iterate even without a contraction certificate, relying on divergence detection.
    #[arg(long)]
    pub force: bool,
    /// Cross-check the result against an independent solver.
    #[arg(long)]
    pub verify: bool,
    /// Write `iteration,step_distance,step_ratio` CSV to this path.
    #[arg(long, value_name = "PATH")]
    pub trace: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
    pub output: OutputFormat,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    /// Matrix Market file.
    #[arg(value_name = "MATRIX", required_unless_present = "matrix", conflicts_with = "matrix")]
    pub path: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    pub matrix: Option<PathBuf>,
    /// Norm of I - A that decides the verdict; `all` takes the smallest.
    #[arg(long, value_enum, default_value_t = NormArg::All)]
    pub norm: NormArg,
    #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
    pub output: OutputFormat,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long, value_name = "PATH")]
    pub matrix: PathBuf,
    #[arg(long, value_name = "PATH")]
    pub rhs: PathBuf,
    /// Starting vector; zero when absent.
    #[arg(long, value_name = "PATH")]
    pub x0: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = PreconditionArg::None)]
    pub precondition: PreconditionArg,
    #[arg(long, value_enum, default_value_t = NormArg::All)]
    pub norm: NormArg,
    #[command(flatten)]
    pub iteration: IterationArgs,
}

#[derive(Debug, Args)]
pub struct FredholmArgs {
    #[arg(long, value_enum)]
    pub kernel: KernelArg,
    /// Left end of the interval [default: 0].
    #[arg(long, allow_negative_numbers = true)]
    pub a: Option<f64>,
    /// Right end of the interval [default: 1].
    #[arg(long, allow_negative_numbers = true)]
    pub b: Option<f64>,
    /// Coefficient of the integral term [default: 1].
    #[arg(long, allow_negative_numbers = true)]
    pub u: Option<f64>,
    /// Right-hand side g [default: linear].
    #[arg(long, value_enum)]
    pub g: Option<GArg>,
    #[arg(long, default_value_t = 64)]
    pub nodes: usize,
    #[arg(long, value_enum, default_value_t = QuadratureArg::Gauss)]
    pub quadrature: QuadratureArg,
    /// Gauss–Legendre panels; `nodes` must be a multiple.
    #[arg(long, default_value_t = 1)]
    pub panels: usize,
    /// Constant starting function.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub start: f64,
    /// Also write the `node,f` table to this path.
    #[arg(long, value_name = "PATH")]
    pub csv: Option<PathBuf>,
    #[command(flatten)]
    pub iteration: IterationArgs,
}

#[derive(Debug, Args)]
pub struct ScalarArgs {
    /// Expression in x, e.g. `cos(x)`.
    #[arg(long = "f", value_name = "EXPR", allow_hyphen_values = true)]
    pub expression: String,
    #[arg(long, allow_negative_numbers = true)]
    pub a: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub b: f64,
    /// Grid size for the Lipschitz estimate.
    #[arg(long, default_value_t = scalar::DEFAULT_SAMPLES)]
    pub samples: usize,
    /// Starting point [default: midpoint of [a, b]].
    #[arg(long, allow_negative_numbers = true)]
    pub start: Option<f64>,
    #[command(flatten)]
    pub iteration: IterationArgs,
}

fn positive_f64(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        Ok(_) => Err("must be a positive finite number".into()),
        Err(e) => Err(e.to_string()),
    }
}

/// A failed command: exit code plus message for stderr.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl fmt::Display) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.to_string(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NotContractive { .. } | Error::NotSelfMap { .. } => EXIT_REFUSED,
            _ => EXIT_USAGE,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Self::usage(e)
    }
}

fn read_failure(path: &Path) -> impl FnOnce(FormatError) -> Failure + '_ {
    move |e| Failure::usage(format!("{}: {e}", path.display()))
}

type Outcome = Result<i32, Failure>;

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", e.render());
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{}", e.render());
                    EXIT_USAGE
                }
            };
        }
    };
    let outcome = match &cli.command {
        Command::Certify(args) => certify(args, out),
        Command::Solve(args) => solve(args, out, err),
        Command::Fredholm(args) => fredholm_cmd(args, out, err),
        Command::Scalar(args) => scalar_cmd(args, out, err),
    };
    match outcome {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn exit_for(status: Status) -> i32 {
    match status {
        Status::Converged => EXIT_OK,
        Status::DivergenceDetected | Status::MaxIterationsReached => EXIT_REFUSED,
    }
}

fn stopping_rule(args: &IterationArgs) -> Result<StoppingRule, Failure> {
    StoppingRule::new(args.tol, args.max_iter).map_err(Failure::usage)
}

fn write_trace<P>(path: &Path, trace: &IterationTrace<P>) -> Result<(), Failure> {
    let mut csv = String::from("iteration,step_distance,step_ratio\n");
    let ratios = std::iter::once(None).chain(trace.step_ratios());
    for (k, (d, r)) in trace.step_distances().iter().zip(ratios).enumerate() {
        let _ = match r {
            Some(r) => writeln!(csv, "{},{d:?},{r:?}", k + 1),
            None => writeln!(csv, "{},{d:?},", k + 1),
        };
    }
    std::fs::write(path, csv).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn load_matrix(path: &Path) -> Result<CsrMatrix, Failure> {
    let coo = mtx::read_matrix_market_file(path).map_err(read_failure(path))?;
    Ok(CsrMatrix::from_coo(&coo))
}

fn load_vector(path: &Path) -> Result<Vec<f64>, Failure> {
    vector::read_vector_file(path).map_err(read_failure(path))
}

fn text_certificate(s: &mut String, cert: &ContractionCertificate, norm: NormArg) {
    for (kind, value) in cert.norms.iter() {
        if norm.kind().is_none_or(|k| k == kind) {
            let _ = writeln!(s, "norm {}: {value:?}", kind.as_str());
        }
    }
    let _ = writeln!(s, "verdict: {} ({} norm {:?})", cert.verdict.as_str(), cert.norm_kind.as_str(), cert.value);
    match cert.determinant_diagnostic {
        Some(d) => {
            let _ = writeln!(s, "determinant_diagnostic: {d:?}");
        }
        None => {
            let _ = writeln!(s, "determinant_diagnostic: skipped (n > {})", sparse::DETERMINANT_MAX_DIM);
        }
    }
}

fn judged(cert: &ContractionCertificate, norm: NormArg) -> ContractionCertificate {
    match norm.kind() {
        Some(kind) => cert.restricted_to(kind),
        None => cert.clone(),
    }
}

fn certify(args: &CertifyArgs, out: &mut dyn Write) -> Outcome {
    let path = args.path.as_ref().or(args.matrix.as_ref()).expect("clap enforces a matrix");
    let a = load_matrix(path)?;
    let cert = judged(&sparse::certify(&a)?, args.norm);
    match args.output {
        OutputFormat::Json => {
            out.write_all(write_json(&CertificateDocument::new(&a, &cert, args.norm.kind())).as_bytes())?;
        }
        OutputFormat::Text => {
            let mut s = String::new();
            let _ = writeln!(s, "matrix: {} x {}, {} nonzeros", a.n_rows(), a.n_cols(), a.nnz());
            text_certificate(&mut s, &cert, args.norm);
            out.write_all(s.as_bytes())?;
        }
    }
    Ok(if cert.is_contractive() { EXIT_OK } else { EXIT_REFUSED })
}

fn text_result<P>(s: &mut String, result: &FixedPointResult<P>) {
    let _ = writeln!(s, "status: {}", result.status);
    let _ = writeln!(s, "iterations: {}", result.iterations);
    let _ = writeln!(s, "last_step: {:?}", result.last_step);
    if let Some(b) = result.a_priori_bound {
        let _ = writeln!(s, "a_priori_bound: {b:?}");
    }
    if let Some(b) = result.a_posteriori_bound {
        let _ = writeln!(s, "a_posteriori_bound: {b:?}");
    }
}

fn solve(args: &SolveArgs, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let a = load_matrix(&args.matrix)?;
    let b = load_vector(&args.rhs)?;
    let rule = stopping_rule(&args.iteration)?;
    let preconditioner = match args.precondition {
        PreconditionArg::None => Preconditioner::None,
        PreconditionArg::Jacobi => Preconditioner::Jacobi,
    };
    let mut options = SolveOptions::new(rule);
    options.preconditioner = preconditioner;
    options.force = args.iteration.force;
    if let Some(path) = &args.x0 {
        options.x0 = Some(load_vector(path)?);
    }

    if a.is_square() && b.len() != a.n_rows() {
        return Err(Error::DimensionMismatch {
            expected: a.n_rows(),
            found: b.len(),
        }
        .into());
    }

    // Judge the iterated system under the selected norm before solving.
    let iterated = match preconditioner {
        Preconditioner::None => None,
        Preconditioner::Jacobi => Some(sparse::jacobi_precondition(&a, &b)?.0),
    };
    let cert = judged(&sparse::certify(iterated.as_ref().unwrap_or(&a))?, args.norm);
    let json = args.iteration.output == OutputFormat::Json;

    if !cert.is_contractive() && !options.force {
        let doc = CertificateDocument::new(&a, &cert, args.norm.kind());
        let mut s = String::new();
        if json {
            s = write_json(&doc);
        } else {
            text_certificate(&mut s, &cert, args.norm);
        }
        out.write_all(s.as_bytes())?;
        if args.iteration.verify {
            let v = verify_linear(&a, &b, None);
            if json { err.write_all(v.as_bytes())? } else { out.write_all(v.as_bytes())? }
        }
        writeln!(err, "error: not contractive: {} norm of I - A is {}", cert.norm_kind.as_str(), cert.value)?;
        return Ok(EXIT_REFUSED);
    }

    let (report, trace) = sparse::solve_fixed_point(&a, &b, &options)?;
    let report = SolveReport {
        certificate: judged(&report.certificate, args.norm),
        ..report
    };
    if let Some(path) = &args.iteration.trace {
        write_trace(path, &trace)?;
    }

    let verification = args
        .iteration
        .verify
        .then(|| verify_linear(&a, &b, Some(&report)));
    if json {
        let doc = CertificateDocument::new(&a, &report.certificate, args.norm.kind()).with_solve(&report);
        out.write_all(write_json(&doc).as_bytes())?;
        if let Some(v) = verification {
            err.write_all(v.as_bytes())?;
        }
    } else {
        let mut s = String::new();
        text_result(&mut s, &report.fixed_point);
        let _ = writeln!(s, "residual: {:?}", report.residual_norm);
        let _ = writeln!(s, "residual_tolerance: {:?}", report.residual_tolerance);
        let _ = writeln!(s, "preconditioner: {}", report.preconditioner.as_str());
        s.push_str("solution:\n");
        s.push_str(&vector::write_vector(&report.solution));
        s.push_str("certificate:\n");
        text_certificate(&mut s, &report.certificate, args.norm);
        if let Some(v) = verification {
            s.push_str(&v);
        }
        out.write_all(s.as_bytes())?;
    }
    Ok(exit_for(report.fixed_point.status))
}

/// Dense-oracle comparison appended by `solve --verify`.
fn verify_linear(a: &CsrMatrix, b: &[f64], report: Option<&SolveReport>) -> String {
    let mut s = String::from("oracle:\n");
    if a.n_rows() > VERIFY_MAX_DIM {
        let _ = writeln!(s, "  skipped: n = {} exceeds {VERIFY_MAX_DIM}", a.n_rows());
        return s;
    }
    let solved = oracle::dense_from_sparse(a).and_then(|d| oracle::dense_solve(&d, b));
    let x = match solved {
        Ok(x) => x,
        Err(e) => {
            let _ = writeln!(s, "  failed: {e}");
            return s;
        }
    };
    s.push_str("  solution:\n");
    for v in &x {
        let _ = writeln!(s, "  {v:?}");
    }
    if let Ok(r) = sparse::residual_norm(a, &x, b) {
        let _ = writeln!(s, "  residual: {r:?}");
    }
    if let Some(report) = report {
        let diff = sparse::euclidean_distance(&report.solution, &x);
        let _ = writeln!(s, "  distance_to_iterate: {diff:?}");
        if let Some(bound) = report.fixed_point.a_posteriori_bound {
            let _ = writeln!(s, "  within_a_posteriori_bound: {}", diff <= bound);
        }
    }
    s
}

fn fredholm_cmd(args: &FredholmArgs, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let rule = stopping_rule(&args.iteration)?;
    let json = args.iteration.output == OutputFormat::Json;

    let (problem, solved, verification) = if args.kernel == KernelArg::Example4 {
        if args.a.is_some() || args.b.is_some() || args.u.is_some() || args.g.is_some() {
            return Err(Failure::usage("the example4 kernel fixes a, b, u and g"));
        }
        if args.quadrature != QuadratureArg::Gauss || args.panels != 1 {
            return Err(Failure::usage("the example4 kernel uses single-panel Gauss–Legendre nodes"));
        }
        let problem = FredholmProblem {
            a: 0.0,
            b: 1.0,
            g: GArg::Zero.name().to_string(),
            kernel: args.kernel.name().to_string(),
            nodes: args.nodes,
            quadrature: "gauss".to_string(),
            u: fredholm::EXAMPLE4_FACTOR,
        };
        let start = args.start;
        let (solution, trace) = fredholm::solve_example4(args.nodes, |_| start, &rule)?;
        let residual = max_abs_diff(&fredholm::example4_map(&solution.f_samples)?, &solution.f_samples);
        let nodes = QuadratureRule::gauss_legendre(args.nodes, 0.0, 1.0)?.nodes().to_vec();
        let verification = args.iteration.verify.then(|| verify_example4(&solution));
        (problem, Ok((solution, trace, nodes, residual)), verification)
    } else {
        let a = args.a.unwrap_or(0.0);
        let b = args.b.unwrap_or(1.0);
        let u = args.u.unwrap_or(1.0);
        let g = args.g.unwrap_or(GArg::Linear);
        let (kind, quadrature) = match args.quadrature {
            QuadratureArg::Gauss => (
                QuadratureKind::GaussLegendre { panels: args.panels },
                if args.panels == 1 {
                    "gauss".to_string()
                } else {
                    format!("gauss:{}", args.panels)
                },
            ),
            QuadratureArg::Trapezoid => (QuadratureKind::Trapezoid, "trapezoid".to_string()),
        };
        let qrule = QuadratureRule::build(kind, args.nodes, a, b)?;
        let disc = match args.kernel {
            KernelArg::SeparableXy => fredholm::discretize_with(&Kernel::new(|x, y| x * y, a, b)?, |x| g.eval(x), u, &qrule)?,
            _ => fredholm::discretize_with(&Kernel::new(|_, _| 1.0, a, b)?, |x| g.eval(x), u, &qrule)?,
        };
        let problem = FredholmProblem {
            a,
            b,
            g: g.name().to_string(),
            kernel: args.kernel.name().to_string(),
            nodes: args.nodes,
            quadrature,
            u,
        };
        let mut options = FredholmOptions::new(rule);
        options.force = args.iteration.force;
        options.initial = Some(vec![args.start; disc.len()]);
        let solved = fredholm::solve_fredholm(&disc, &options).map(|(solution, trace)| {
            let residual = disc.residual(&solution.f_samples);
            (solution, trace, disc.nodes().to_vec(), residual)
        });
        let verification = match &solved {
            Ok((solution, ..)) if args.iteration.verify => Some(verify_nystrom(&disc, Some(solution))),
            Err(_) if args.iteration.verify => Some(verify_nystrom(&disc, None)),
            _ => None,
        };
        match solved {
            Err(Error::NotContractive { .. }) => {
                let doc = FredholmDocument::new(problem, disc.kernel_norm(), disc.contraction_factor(), "not_contractive");
                let s = if json {
                    write_json(&doc)
                } else {
                    let mut s = String::new();
                    text_fredholm_header(&mut s, &doc);
                    s
                };
                out.write_all(s.as_bytes())?;
                if let Some(v) = verification {
                    if json { err.write_all(v.as_bytes())? } else { out.write_all(v.as_bytes())? }
                }
                writeln!(
                    err,
                    "error: not contractive: |u| * ‖M‖ = {} is not below 1",
                    disc.contraction_factor()
                )?;
                return Ok(EXIT_REFUSED);
            }
            other => (problem, other, verification),
        }
    };

    let (solution, trace, nodes, residual) = solved?;
    if let Some(path) = &args.iteration.trace {
        write_trace(path, &trace)?;
    }
    let table = node_table(&nodes, &solution.f_samples);
    if let Some(path) = &args.csv {
        std::fs::write(path, &table).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    }
    let verdict = if fredholm::is_certified(solution.contraction_factor) {
        "contractive"
    } else {
        "not_contractive"
    };
    let doc = FredholmDocument::new(problem, solution.kernel_norm, solution.contraction_factor, verdict)
        .with_solve(&solution, residual);
    if json {
        out.write_all(write_json(&doc).as_bytes())?;
        if let Some(v) = verification {
            err.write_all(v.as_bytes())?;
        }
    } else {
        let mut s = String::new();
        text_fredholm_header(&mut s, &doc);
        text_result(&mut s, &solution.fixed_point);
        let _ = writeln!(s, "residual: {residual:?}");
        s.push_str(&table);
        if let Some(v) = verification {
            s.push_str(&v);
        }
        out.write_all(s.as_bytes())?;
    }
    Ok(exit_for(solution.fixed_point.status))
}

fn text_fredholm_header(s: &mut String, doc: &FredholmDocument) {
    let p = &doc.problem;
    let _ = writeln!(s, "kernel: {} on [{:?}, {:?}], u = {:?}, g = {}", p.kernel, p.a, p.b, p.u, p.g);
    let _ = writeln!(s, "quadrature: {} with {} nodes", p.quadrature, p.nodes);
    let _ = writeln!(s, "kernel_norm: {:?}", doc.kernel_norm);
    let _ = writeln!(s, "contraction_factor: {:?}", doc.contraction_factor);
    let _ = writeln!(s, "verdict: {}", doc.verdict);
}

fn node_table(nodes: &[f64], f: &[f64]) -> String {
    let mut s = String::from("node,f\n");
    for (x, v) in nodes.iter().zip(f) {
        let _ = writeln!(s, "{x:?},{v:?}");
    }
    s
}

fn max_abs_diff(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

/// Dense solve of the Nyström system `(I - u M W) f = g`.
fn verify_nystrom(disc: &DiscretizedFredholm, solution: Option<&FredholmSolution>) -> String {
    let mut s = String::from("oracle:\n");
    if disc.len() > VERIFY_MAX_DIM {
        let _ = writeln!(s, "  skipped: n = {} exceeds {VERIFY_MAX_DIM}", disc.len());
        return s;
    }
    let (m, g) = disc.linear_system();
    match oracle::dense_solve(&m, &g) {
        Ok(f) => {
            let _ = writeln!(s, "  residual: {:?}", disc.residual(&f));
            if let Some(sol) = solution {
                let _ = writeln!(s, "  max_node_difference: {:?}", max_abs_diff(&f, &sol.f_samples));
                let dist = disc.weighted_distance(&f, &sol.f_samples);
                let _ = writeln!(s, "  distance_to_iterate: {dist:?}");
                if let Some(bound) = sol.fixed_point.a_posteriori_bound {
                    let _ = writeln!(s, "  within_a_posteriori_bound: {}", dist <= bound);
                }
            }
        }
        Err(e) => {
            let _ = writeln!(s, "  failed: {e}");
        }
    }
    s
}

/// The sine-kernel solution is the constant root of `c = (cos(c - 1) - cos c) / 2`.
fn verify_example4(solution: &FredholmSolution) -> String {
    let h = |c: f64| c - 0.5 * ((c - 1.0).cos() - c.cos());
    // |h'| >= 1/2, and h(-1) < 0 < h(1).
    let c = bisect(h, -1.0, 1.0);
    let mut s = String::from("oracle:\n");
    let _ = writeln!(s, "  constant: {c:?}");
    let diff = solution.f_samples.iter().map(|f| (f - c).abs()).fold(0.0, f64::max);
    let _ = writeln!(s, "  max_node_difference: {diff:?}");
    s
}

fn bisect(h: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut h_lo = h(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let h_mid = h(mid);
        if (h_mid < 0.0) == (h_lo < 0.0) {
            lo = mid;
            h_lo = h_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn scalar_cmd(args: &ScalarArgs, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let expr = Expr::parse(&args.expression).map_err(|e| Failure::usage(format!("--f: {e}")))?;
    let f = |x: f64| expr.eval(x);
    let problem = ScalarProblem::new(f, args.a, args.b)?;
    let json = args.iteration.output == OutputFormat::Json;
    let info = ScalarProblemInfo {
        a: args.a,
        b: args.b,
        expression: args.expression.clone(),
        samples: args.samples,
    };

    let k = scalar::estimate_lipschitz(&problem, args.samples)?;
    let contractive = fixpoint_core::metric::is_contraction_factor(k);
    let verdict = if contractive { "contractive" } else { "not_contractive" };
    let verification = args.iteration.verify.then(|| verify_scalar(&f, args.a, args.b));

    if !contractive && !args.iteration.force {
        let doc = ScalarDocument::new(info, k, verdict);
        let s = if json {
            write_json(&doc)
        } else {
            format!("lipschitz_estimate: {k:?}\nverdict: {verdict}\n")
        };
        out.write_all(s.as_bytes())?;
        if let Some(v) = verification {
            if json { err.write_all(v.as_bytes())? } else { out.write_all(v.as_bytes())? }
        }
        writeln!(err, "error: not contractive: estimated Lipschitz constant {k}")?;
        return Ok(EXIT_REFUSED);
    }

    let mut options = ScalarOptions::new(args.iteration.tol, args.iteration.max_iter);
    options.samples = args.samples;
    options.start = args.start;
    options.force = args.iteration.force;
    let (solution, trace) = scalar::solve_scalar_fixed_point(&problem, &options)?;
    if let Some(path) = &args.iteration.trace {
        write_trace(path, &trace)?;
    }
    let doc = ScalarDocument::new(info, solution.lipschitz_estimate, verdict).with_solve(&solution);
    if json {
        out.write_all(write_json(&doc).as_bytes())?;
        if let Some(v) = verification {
            err.write_all(v.as_bytes())?;
        }
    } else {
        let mut s = String::new();
        let _ = writeln!(s, "lipschitz_estimate: {:?}", solution.lipschitz_estimate);
        let _ = writeln!(s, "verdict: {verdict}");
        let _ = writeln!(s, "fixed_point: {:?}", solution.fixed_point.point);
        text_result(&mut s, &solution.fixed_point);
        let _ = writeln!(s, "residual: {:?}", solution.residual);
        if let Some(v) = verification {
            s.push_str(&v);
        }
        out.write_all(s.as_bytes())?;
    }
    Ok(exit_for(solution.fixed_point.status))
}

/// Bisection on `f(x) - x`, which changes sign on `[a, b]` for any continuous self-map.
fn verify_scalar(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> String {
    let h = |x: f64| f(x) - x;
    let mut s = String::from("oracle:\n");
    if h(a) == 0.0 {
        let _ = writeln!(s, "  fixed_point: {a:?}");
    } else if h(b) == 0.0 {
        let _ = writeln!(s, "  fixed_point: {b:?}");
    } else if (h(a) < 0.0) != (h(b) < 0.0) {
        let _ = writeln!(s, "  fixed_point: {:?}", bisect(h, a, b));
    } else {
        s.push_str("  failed: f(x) - x has no sign change on [a, b]\n");
    }
    s
}
