//! `quadham`: analyze, verify, sweep and simulate symmetric quadratic
//! Hamiltonians.
//!
//! Exit codes: 0 success, 1 failed check or invalid input, 2 parse error or
//! non-symmetric Hamiltonian, 3 numerical failure.

mod output;
mod source;
mod verify;

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use quadham::catalog::{Instance, Model, ModelError};
use quadham::dynamics::{default_initial_state, estimate_frequencies, evolution_matrix, growth_rate, integrate};
use quadham::report::{AnalysisReport, MatrixFile, ReportError, F17, SCHEMA_VERSION};
use quadham::spectra::{classify_with, clusters, eigen, Phase, SpectraError};
use quadham::sweep::{find_boundary, sweep, SweepAxis, SweepError};
use quadham::{DVector, Tolerances};
use serde::Serialize;

use crate::verify::Outcome;

#[derive(Parser)]
#[command(name = "quadham", version, about = "Spectral analysis of symmetric quadratic Hamiltonians")]
struct Cli {
    /// Tolerance overrides: a number (pseudo, ladder, orthogonality) or
    /// key=value pairs such as `reality=1e-8,ep=1e-6`. Defaults to $QUADHAM_TOL.
    #[arg(long, global = true, value_name = "SPEC")]
    tolerances: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct SourceArgs {
    /// Catalog model: toy1d, toy2d, gainloss, selfforce, lrc.
    #[arg(long, value_name = "ID")]
    model: Option<String>,
    /// JSON model file with fields name, K, hamiltonian, parameters.
    #[arg(long, value_name = "PATH")]
    file: Option<PathBuf>,
}

#[derive(Args)]
struct ModelArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Parameter override `name=value`; repeatable.
    #[arg(long = "set", value_name = "NAME=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Print a JSON analysis report.
    Analyze(ModelArgs),
    /// Run the structural checks and print a pass/fail table.
    Verify(VerifyArgs),
    /// Classify a 1D or 2D parameter grid and write CSV.
    Sweep(SweepArgs),
    /// Locate a real/non-real boundary by bisection.
    Boundary(BoundaryArgs),
    /// Integrate the equations of motion and summarize frequencies.
    Simulate(SimulateArgs),
}

#[derive(Args)]
struct VerifyArgs {
    /// Catalog model id.
    #[arg(long, value_name = "ID", conflicts_with_all = ["file", "matrix"], required_unless_present_any = ["file", "matrix"])]
    model: Option<String>,
    /// JSON model file.
    #[arg(long, value_name = "PATH", conflicts_with = "matrix")]
    file: Option<PathBuf>,
    /// JSON adjoint matrix file `{"schema":1,"k":K,"entries":[[[re,im],..],..]}`.
    #[arg(long, value_name = "PATH")]
    matrix: Option<PathBuf>,
    /// Parameter override `name=value`; repeatable.
    #[arg(long = "set", value_name = "NAME=VALUE", conflicts_with = "matrix")]
    set: Vec<String>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Axis `name=lo:hi:n`; give one or two.
    #[arg(long, value_name = "NAME=LO:HI:N", required = true)]
    axis: Vec<String>,
    /// Worker threads; output order does not depend on it.
    #[arg(long, value_name = "N")]
    jobs: Option<usize>,
    /// CSV destination; standard output when absent.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Also render the grid as an SVG heatmap.
    #[arg(long, value_name = "PATH")]
    svg: Option<PathBuf>,
}

#[derive(Args)]
struct BoundaryArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Parameter to vary; the others keep their bound values.
    #[arg(long, value_name = "NAME")]
    param: String,
    /// Bracket `lo:hi` whose ends classify differently.
    #[arg(long, value_name = "LO:HI", allow_hyphen_values = true)]
    bracket: String,
    /// Final bracket width.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// Print the full result as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Horizon.
    #[arg(long = "T", default_value_t = 200.0)]
    horizon: f64,
    /// Step size.
    #[arg(long, default_value_t = 0.01)]
    dt: f64,
    /// Initial state, comma-separated (x1..xK, p1..pK); unit all-ones by default.
    #[arg(long, value_name = "LIST", allow_hyphen_values = true)]
    z0: Option<String>,
    /// Trajectory CSV destination.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

/// Error with the process exit code it maps to.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure { code: 1, error: e.into() }
    }
}

fn model_error_code(e: &ModelError) -> u8 {
    match e {
        ModelError::Parse(_) | ModelError::Gamma(_) => 2,
        _ => 1,
    }
}

fn spectra_error_code(e: &SpectraError) -> u8 {
    match e {
        SpectraError::NumericalFailure { .. } | SpectraError::TooLarge(_) => 3,
        _ => 1,
    }
}

fn tolerances(spec: Option<&str>) -> Result<Tolerances, Failure> {
    Ok(match spec {
        Some(s) => Tolerances::default().apply_spec(s)?,
        None => Tolerances::from_env()?,
    })
}

fn load(args: &ModelArgs) -> Result<(Model, quadham::ParamBindings), Failure> {
    let model = source::resolve(args.source.model.as_deref(), args.source.file.as_deref())?;
    let overrides = source::parse_overrides(&args.set)?;
    Ok((model, overrides))
}

fn instantiate(model: &Model, overrides: &quadham::ParamBindings) -> Result<Instance, Failure> {
    model.instantiate(overrides).map_err(|e| Failure {
        code: model_error_code(&e),
        error: anyhow::Error::new(e).context(format!("instantiating model `{}`", model.name)),
    })
}

fn open_out(path: Option<&PathBuf>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Writes one line to standard output; a closed pipe is not an error.
fn emit(text: impl std::fmt::Display) -> anyhow::Result<()> {
    match writeln!(io::stdout().lock(), "{text}") {
        Err(e) if e.kind() == io::ErrorKind::BrokenPipe => Ok(()),
        r => Ok(r?),
    }
}

fn cmd_analyze(args: &ModelArgs, tol: &Tolerances) -> Result<(), Failure> {
    let (model, overrides) = load(args)?;
    let inst = instantiate(&model, &overrides)?;
    let catalog = model.catalog.map(|c| c.as_str());
    let report = AnalysisReport::build(&model.name, &model.expression, catalog, &inst, tol).map_err(|e| {
        let code = match &e {
            ReportError::Spectra(s) => spectra_error_code(s),
            _ => 3,
        };
        Failure { code, error: e.into() }
    })?;
    emit(report.to_json()?)?;
    Ok(())
}

fn cmd_verify(args: &VerifyArgs, tol: &Tolerances) -> Result<(), Failure> {
    let (h, op, label) = if let Some(path) = &args.matrix {
        let src = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let file = MatrixFile::from_json(&src)?;
        (file.to_adjoint()?, None, path.display().to_string())
    } else {
        let margs = ModelArgs {
            source: SourceArgs {
                model: args.model.clone(),
                file: args.file.clone(),
            },
            set: args.set.clone(),
        };
        let (model, overrides) = load(&margs)?;
        let inst = instantiate(&model, &overrides)?;
        (inst.adjoint, Some(inst.hamiltonian), model.name)
    };
    let checks = verify::run_checks(&h, op.as_ref(), tol).map_err(|e| Failure {
        code: spectra_error_code(&e),
        error: e.into(),
    })?;
    emit(format!("verify {label}"))?;
    for c in &checks {
        emit(c)?;
    }
    let failed = checks.iter().filter(|c| c.outcome == Outcome::Fail).count();
    if failed > 0 {
        return Err(Failure {
            code: 1,
            error: anyhow!("{failed} check(s) failed"),
        });
    }
    emit("all checks passed")?;
    Ok(())
}

fn cmd_sweep(args: &SweepArgs, tol: &Tolerances) -> Result<(), Failure> {
    let (model, overrides) = load(&args.model)?;
    let axes = args
        .axis
        .iter()
        .map(|a| a.parse::<SweepAxis>())
        .collect::<Result<Vec<_>, _>>()?;
    let run = || sweep(&model, &overrides, &axes, tol);
    let grid = match args.jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .context("building worker pool")?
            .install(run),
        None => run(),
    }?;
    let mut out = open_out(args.out.as_ref())?;
    output::write_sweep_csv(&grid, &mut out)?;
    out.flush()?;
    if let Some(p) = &args.svg {
        std::fs::write(p, output::render_svg(&grid)).with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(())
}

fn parse_bracket(s: &str) -> anyhow::Result<(f64, f64)> {
    let (lo, hi) = s.split_once(':').with_context(|| format!("bad bracket `{s}`: expected lo:hi"))?;
    let p = |v: &str| v.trim().parse::<f64>().with_context(|| format!("bad bracket `{s}`"));
    Ok((p(lo)?, p(hi)?))
}

/// Decimal places that resolve `tol`.
fn decimals_for(tol: f64) -> usize {
    (-tol.log10()).ceil().clamp(0.0, 17.0) as usize
}

fn cmd_boundary(args: &BoundaryArgs, tol: &Tolerances) -> Result<(), Failure> {
    let (model, overrides) = load(&args.model)?;
    let bracket = parse_bracket(&args.bracket)?;
    let r = find_boundary(&model, &overrides, &args.param, bracket, args.tol, tol).map_err(|e| {
        let code = match &e {
            SweepError::Evaluation { .. } => 3,
            _ => 1,
        };
        Failure { code, error: e.into() }
    })?;
    if args.json {
        emit(serde_json::to_string_pretty(&r)?)?;
    } else {
        emit(format!("{:.*}", decimals_for(args.tol), r.critical_value))?;
    }
    Ok(())
}

#[derive(Serialize)]
struct SimulationSummary {
    schema: u32,
    model: String,
    parameters: BTreeMap<String, F17>,
    horizon: F17,
    dt: F17,
    samples: usize,
    overflow: Option<F17>,
    phase: Phase,
    frequencies: Vec<F17>,
    expected_frequencies: Vec<F17>,
    growth_rate: Option<F17>,
    expected_growth_rate: Option<F17>,
}

fn cmd_simulate(args: &SimulateArgs, tol: &Tolerances) -> Result<(), Failure> {
    let (model, overrides) = load(&args.model)?;
    let inst = instantiate(&model, &overrides)?;
    let dim = inst.adjoint.dim();
    let z0 = match &args.z0 {
        Some(s) => {
            let v = s
                .split(',')
                .map(|t| t.trim().parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .with_context(|| format!("bad --z0 `{s}`"))?;
            DVector::from_vec(v)
        }
        None => default_initial_state(dim),
    };
    let m = evolution_matrix(&inst.adjoint)?;
    let s = eigen(&inst.adjoint).map_err(|e| Failure {
        code: spectra_error_code(&e),
        error: e.into(),
    })?;
    let phase = classify_with(&s, tol).label;
    let tr = integrate(&m, &z0, args.horizon, args.dt)?;

    let mut expected: Vec<f64> = clusters(&s.values, tol.cluster)
        .iter()
        .map(|g| g.iter().map(|&i| s.values[i].norm()).sum::<f64>() / g.len() as f64)
        .filter(|&w| w > tol.cluster)
        .collect();
    expected.sort_by(f64::total_cmp);
    expected.dedup_by(|a, b| (*a - *b).abs() <= tol.cluster * a.abs().max(1.0));
    let max_im = s.values.iter().map(|v| v.im.abs()).fold(0.0, f64::max);

    let (frequencies, growth, exp_f, exp_g) = match phase {
        Phase::Real => (estimate_frequencies(&tr), None, expected, None),
        Phase::Broken => (Vec::new(), Some(growth_rate(&tr)?), Vec::new(), Some(max_im)),
        Phase::Exceptional => (Vec::new(), None, Vec::new(), None),
    };
    if let Some(p) = &args.out {
        let mut w = open_out(Some(p))?;
        output::write_trajectory_csv(&tr, inst.adjoint.k, &mut w)?;
        w.flush()?;
    }
    let summary = SimulationSummary {
        schema: SCHEMA_VERSION,
        model: model.name.clone(),
        parameters: inst.params.iter().map(|(n, v)| (n.to_string(), F17(v))).collect(),
        horizon: F17(args.horizon),
        dt: F17(args.dt),
        samples: tr.len(),
        overflow: tr.overflow.map(F17),
        phase,
        frequencies: frequencies.into_iter().map(F17).collect(),
        expected_frequencies: exp_f.into_iter().map(F17).collect(),
        growth_rate: growth.map(F17),
        expected_growth_rate: exp_g.map(F17),
    };
    emit(serde_json::to_string_pretty(&summary)?)?;
    Ok(())
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let tol = tolerances(cli.tolerances.as_deref())?;
    match &cli.command {
        Command::Analyze(a) => cmd_analyze(a, &tol),
        Command::Verify(a) => cmd_verify(a, &tol),
        Command::Sweep(a) => cmd_sweep(a, &tol),
        Command::Boundary(a) => cmd_boundary(a, &tol),
        Command::Simulate(a) => cmd_simulate(a, &tol),
    }
}

fn main() -> ExitCode {
    // usage errors exit 1; code 2 is reserved for rejected Hamiltonians
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(1);
        }
        Err(e) => e.exit(),
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
