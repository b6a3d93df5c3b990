use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cosmo_qfi_core::estimation::{optimize, sweep};
use cosmo_qfi_core::probe::{bound, probe_with};
use cosmo_qfi_core::verify::{run_all, ODE_POINTS};
use cosmo_qfi_core::{
    DerivativeMethod, ModelParams, Spacing, SweepRow, SweepSpec, SweepVariable, DEFAULT_TRIALS,
};
use serde::Serialize;

mod output;

use output::{fmt_f64, num};

const THREADS_ENV: &str = "COSMO_QFI_THREADS";

/// QFI and Cramér-Rao bounds for estimating the expansion volume ratio of a
/// 1+1 Robertson-Walker universe from Dirac particle creation.
#[derive(Parser)]
#[command(name = "cosmo-qfi", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the probe at one parameter point (JSON).
    Point(PointArgs),
    /// Sweep one parameter and write a CSV curve.
    Sweep(SweepArgs),
    /// Find the coordinate minimising the bound (JSON).
    Optimize(OptimizeArgs),
    /// Run the numerical self-consistency checks.
    Verify(VerifyArgs),
}

#[derive(Args, Clone, Copy)]
struct Fixed {
    /// Volume ratio of the expansion.
    #[arg(long, default_value_t = 1.0)]
    eps: f64,
    /// Dimensionless mass.
    #[arg(long, default_value_t = 1.0)]
    m: f64,
    /// Dimensionless wave number.
    #[arg(long, default_value_t = 1.0)]
    k: f64,
    /// Number of measurement repetitions.
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    trials: f64,
    #[arg(long, value_enum, default_value_t = Method::Analytic)]
    deriv_method: Method,
}

impl Fixed {
    fn params(&self) -> ModelParams {
        ModelParams {
            eps: self.eps,
            m_tilde: self.m,
            k_tilde: self.k,
        }
    }
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct PointArgs {
    #[command(flatten)]
    fixed: Fixed,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct SweepArgs {
    #[arg(long, value_enum, default_value_t = Var::M)]
    var: Var,
    #[arg(long, default_value_t = 0.1)]
    lo: f64,
    #[arg(long, default_value_t = 10.0)]
    hi: f64,
    #[arg(long, default_value_t = 200)]
    points: usize,
    #[arg(long, value_enum, default_value_t = SpacingArg::Linear)]
    spacing: SpacingArg,
    /// Output file; the CSV goes to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    fixed: Fixed,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct OptimizeArgs {
    #[arg(long, value_enum, default_value_t = Var::K)]
    var: Var,
    #[arg(long, default_value_t = 0.05)]
    lo: f64,
    #[arg(long, default_value_t = 20.0)]
    hi: f64,
    #[command(flatten)]
    fixed: Fixed,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct VerifyArgs {
    /// Points per axis of the parameter grid over [0.1, 5]^3.
    #[arg(long, default_value_t = 10)]
    grid: usize,
    /// Relative tolerance of the mode-equation integrator.
    #[arg(long, default_value_t = 1e-11)]
    tol: f64,
    /// Number of mode-equation comparisons.
    #[arg(long, default_value_t = 5)]
    ode_points: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Analytic,
    Fd,
}

impl From<Method> for DerivativeMethod {
    fn from(m: Method) -> Self {
        match m {
            Method::Analytic => DerivativeMethod::Analytic,
            Method::Fd => DerivativeMethod::FiniteDifference,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Var {
    #[value(alias = "m_tilde")]
    M,
    #[value(alias = "k_tilde")]
    K,
    Eps,
}

impl From<Var> for SweepVariable {
    fn from(v: Var) -> Self {
        match v {
            Var::M => SweepVariable::MTilde,
            Var::K => SweepVariable::KTilde,
            Var::Eps => SweepVariable::Eps,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SpacingArg {
    Linear,
    Log,
}

impl From<SpacingArg> for Spacing {
    fn from(s: SpacingArg) -> Self {
        match s {
            SpacingArg::Linear => Spacing::Linear,
            SpacingArg::Log => Spacing::Log,
        }
    }
}

enum Failure {
    Usage(String),
    Core(cosmo_qfi_core::Error),
    Io(String),
    Verify,
}

impl From<cosmo_qfi_core::Error> for Failure {
    fn from(e: cosmo_qfi_core::Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Verify => 1,
            Failure::Usage(_) => 2,
            Failure::Core(e) if e.is_degenerate() => 3,
            Failure::Core(_) => 2,
            Failure::Io(_) => 4,
        }
    }
}

fn io_err(what: &str) -> impl Fn(io::Error) -> Failure + '_ {
    move |e| Failure::Io(format!("{what}: {e}"))
}

#[derive(Serialize)]
struct PointOut {
    #[serde(serialize_with = "num")]
    eps: f64,
    #[serde(serialize_with = "num")]
    m_tilde: f64,
    #[serde(serialize_with = "num")]
    k_tilde: f64,
    #[serde(rename = "X", serialize_with = "num")]
    x: f64,
    #[serde(serialize_with = "num")]
    p0: f64,
    #[serde(serialize_with = "num")]
    p1: f64,
    #[serde(serialize_with = "num")]
    qfi: f64,
    #[serde(serialize_with = "num")]
    bound: f64,
    #[serde(serialize_with = "num")]
    entropy: f64,
    derivative_method: DerivativeMethod,
}

#[derive(Serialize)]
struct OptimizeOut {
    variable: SweepVariable,
    #[serde(serialize_with = "num")]
    optimum: f64,
    #[serde(serialize_with = "num")]
    qfi: f64,
    #[serde(serialize_with = "num")]
    bound: f64,
    boundary_warning: bool,
}

#[derive(Serialize)]
struct Manifest {
    command: &'static str,
    variable: SweepVariable,
    #[serde(serialize_with = "num")]
    lo: f64,
    #[serde(serialize_with = "num")]
    hi: f64,
    points: usize,
    spacing: Spacing,
    params: ModelParams,
    #[serde(serialize_with = "num")]
    trials: f64,
    derivative_method: DerivativeMethod,
    tool_version: &'static str,
    output_path: String,
}

fn print_json<T: Serialize>(value: &T) -> Result<(), Failure> {
    let s = serde_json::to_string(value).map_err(|e| Failure::Io(e.to_string()))?;
    let mut out = io::stdout().lock();
    writeln!(out, "{s}").map_err(io_err("stdout"))
}

fn cmd_point(a: &PointArgs) -> Result<(), Failure> {
    let p = ModelParams::new(a.fixed.eps, a.fixed.m, a.fixed.k)?;
    let method = a.fixed.deriv_method.into();
    let r = bound(&p, a.fixed.trials, method)?;
    let s = probe_with(&p, method)?;
    print_json(&PointOut {
        eps: p.eps,
        m_tilde: p.m_tilde,
        k_tilde: p.k_tilde,
        x: s.x,
        p0: s.p0,
        p1: s.p1,
        qfi: r.qfi,
        bound: r.bound,
        entropy: s.entropy(),
        derivative_method: method,
    })
}

fn write_csv(w: &mut dyn Write, manifest: &Manifest, rows: &[SweepRow]) -> io::Result<()> {
    let m = serde_json::to_string(manifest).map_err(io::Error::other)?;
    writeln!(w, "# manifest: {m}")?;
    writeln!(w, "value,qfi,bound,entropy,p1")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{}",
            fmt_f64(r.value),
            fmt_f64(r.qfi),
            fmt_f64(r.bound),
            fmt_f64(r.entropy),
            fmt_f64(r.p1)
        )?;
    }
    w.flush()
}

fn cmd_sweep(a: &SweepArgs) -> Result<(), Failure> {
    let spec = SweepSpec {
        variable: a.var.into(),
        lo: a.lo,
        hi: a.hi,
        points: a.points,
        fixed: a.fixed.params(),
        trials: a.fixed.trials,
        spacing: a.spacing.into(),
        method: a.fixed.deriv_method.into(),
    };
    spec.validate()?;
    // the swept coordinate is overwritten per row; the other two must be valid
    spec.variable.apply(spec.fixed, spec.lo).validate()?;
    let rows = sweep(&spec)?;
    let manifest = Manifest {
        command: "sweep",
        variable: spec.variable,
        lo: spec.lo,
        hi: spec.hi,
        points: spec.points,
        spacing: spec.spacing,
        params: spec.fixed,
        trials: spec.trials,
        derivative_method: spec.method,
        tool_version: env!("CARGO_PKG_VERSION"),
        output_path: a
            .out
            .as_ref()
            .map_or_else(|| "-".to_string(), |p| p.display().to_string()),
    };
    match &a.out {
        Some(path) => {
            let what = path.display().to_string();
            let file = File::create(path).map_err(io_err(&what))?;
            write_csv(&mut BufWriter::new(file), &manifest, &rows).map_err(io_err(&what))?;
            println!("{what}");
        }
        None => {
            write_csv(&mut io::stdout().lock(), &manifest, &rows).map_err(io_err("stdout"))?;
        }
    }
    Ok(())
}

fn cmd_optimize(a: &OptimizeArgs) -> Result<(), Failure> {
    let variable: SweepVariable = a.var.into();
    let fixed = a.fixed.params();
    variable
        .apply(fixed, a.lo.max(f64::MIN_POSITIVE))
        .validate()?;
    let o = optimize(
        variable,
        a.lo,
        a.hi,
        fixed,
        a.fixed.trials,
        a.fixed.deriv_method.into(),
    )?;
    if o.boundary_warning {
        eprintln!(
            "warning: optimum {} lies at the edge of [{}, {}]",
            o.coordinate, a.lo, a.hi
        );
    }
    print_json(&OptimizeOut {
        variable,
        optimum: o.coordinate,
        qfi: o.result.qfi,
        bound: o.result.bound,
        boundary_warning: o.boundary_warning,
    })
}

fn cmd_verify(a: &VerifyArgs) -> Result<(), Failure> {
    if a.ode_points == 0 || a.ode_points > ODE_POINTS.len() {
        return Err(Failure::Usage(format!(
            "--ode-points must be in 1..={}",
            ODE_POINTS.len()
        )));
    }
    let reports = run_all(a.grid, a.ode_points, a.tol)?;
    let mut out = io::stdout().lock();
    let io = io_err("stdout");
    writeln!(
        out,
        "{:<32} {:>6} {:>12} {:>10}  result",
        "check", "cases", "max error", "tolerance"
    )
    .map_err(&io)?;
    for r in &reports {
        writeln!(
            out,
            "{:<32} {:>6} {:>12.3e} {:>10.0e}  {}",
            r.name,
            r.cases,
            r.max_error,
            r.tolerance,
            if r.passed { "PASS" } else { "FAIL" }
        )
        .map_err(&io)?;
    }
    if reports.iter().all(|r| r.passed) {
        Ok(())
    } else {
        Err(Failure::Verify)
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().map_err(|_| {
        Failure::Usage(format!(
            "{THREADS_ENV} must be a non-negative integer, got {raw:?}"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Usage(format!("cannot configure thread pool: {e}")))
}

fn run(cli: &Cli) -> Result<(), Failure> {
    configure_threads()?;
    match &cli.command {
        Command::Point(a) => cmd_point(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Optimize(a) => cmd_optimize(a),
        Command::Verify(a) => cmd_verify(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Usage(msg) | Failure::Io(msg) => eprintln!("error: {msg}"),
                Failure::Core(e) => eprintln!("error: {e}"),
                Failure::Verify => eprintln!("error: verification failed"),
            }
            ExitCode::from(f.exit_code())
        }
    }
}
