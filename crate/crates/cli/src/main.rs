//! Command-line front end tying the gap-tooth modules into reproducible
//! experiments. Every table and figure of the reference study is one
//! subcommand invocation; identical configuration produces byte-identical
//! CSV output.

mod config;
mod output;

use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gaptooth_core::microsim::{
    self, initial, IntegrateOptions, MicroState, ModelSpec, PatchConfig, SimError, TimeScheme,
};
use gaptooth_core::opcalc::{parse_ratio, DeltaSeries, EdgeSign, Rational, SeriesError};
use gaptooth_core::ptbc::{PtbcStencil, StencilError, StencilPair};
use gaptooth_core::refmodel::{macro_stencil, RefmodelError};
use gaptooth_core::spectra::{
    convergence_fit, spectrum_for, SpectraError, TableRow,
};

use config::{pick, pick_opt, FileConfig};

const MAX_EXPANSION_ORDER: usize = 16;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(String),
    Io(std::io::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "configuration error: {msg}"),
            CliError::Numerical(msg) => write!(f, "numerical failure: {msg}"),
            CliError::Io(e) => write!(f, "i/o: {e}"),
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::BlowUp { .. } | SimError::NonFinite(_) => CliError::Numerical(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<StencilError> for CliError {
    fn from(e: StencilError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<SeriesError> for CliError {
    fn from(e: SeriesError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<SpectraError> for CliError {
    fn from(e: SpectraError) -> Self {
        match e {
            SpectraError::EigenFailed | SpectraError::DegenerateFit => {
                CliError::Numerical(e.to_string())
            }
            SpectraError::Sim(inner) => inner.into(),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<RefmodelError> for CliError {
    fn from(e: RefmodelError) -> Self {
        match e {
            RefmodelError::EigenFailed => CliError::Numerical(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

#[derive(Parser)]
#[command(
    name = "gaptooth",
    version,
    about = "Gap-tooth patch dynamics: boundary-condition calculus, microsimulation and eigenvalue analysis"
)]
struct Cli {
    /// TOML configuration file; explicit flags override file values
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Expand the patch-edge derivative operator in exact arithmetic
    Expand(ExpandArgs),
    /// Dump one boundary-condition stencil as JSON
    Stencil(StencilArgs),
    /// Growth rates of the coupled patch dynamics (2π-periodic domain)
    Spectrum(SpectrumArgs),
    /// Integrate the patch microsimulation and write a trajectory CSV
    Simulate(SimulateArgs),
    /// Eigenvalues of the classical high-order macroscale operator
    MacroEig(MacroEigArgs),
    /// Convergence order of the slow diffusive mode over a patch-count sweep
    Convergence(ConvergenceArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SignArg {
    Plus,
    Minus,
}

impl SignArg {
    fn edge(self) -> EdgeSign {
        match self {
            SignArg::Plus => EdgeSign::Plus,
            SignArg::Minus => EdgeSign::Minus,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SchemeArg {
    Euler,
    Rk4,
}

impl SchemeArg {
    fn scheme(self) -> TimeScheme {
        match self {
            SchemeArg::Euler => TimeScheme::Euler,
            SchemeArg::Rk4 => TimeScheme::Rk4,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ModelArg {
    Diffusion,
    #[value(alias = "advdiff")]
    AdvectionDiffusion,
    Burgers,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum IcArg {
    BurgersDemo,
    Cos,
    Sin,
    Zero,
}

impl IcArg {
    fn function(self) -> fn(f64) -> f64 {
        match self {
            IcArg::BurgersDemo => initial::burgers_demo,
            IcArg::Cos => initial::cosine,
            IcArg::Sin => initial::sine,
            IcArg::Zero => initial::zero,
        }
    }
}

#[derive(Args)]
struct ExpandArgs {
    /// Truncation order in δ (1..=16)
    #[arg(long)]
    order: Option<usize>,
    /// Patch ratio; when given, coefficients are evaluated numerically
    #[arg(long)]
    r: Option<String>,
    /// Which patch edge
    #[arg(long, value_enum)]
    sign: Option<SignArg>,
    /// Output format
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Output file (stdout when absent)
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct StencilArgs {
    /// Boundary-condition order (even: 2, 4, 6, 8, ...)
    #[arg(long)]
    order: Option<usize>,
    /// Patch ratio in (0, 1/2], e.g. 0.1 or 1/10
    #[arg(long)]
    r: Option<String>,
    /// Which patch edge
    #[arg(long, value_enum)]
    sign: Option<SignArg>,
    /// Output file (stdout when absent)
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SpectrumArgs {
    /// Patch counts (table rows)
    #[arg(long, value_delimiter = ',')]
    patches: Option<Vec<usize>>,
    /// Fine grid points per patch (odd)
    #[arg(long)]
    npoints: Option<usize>,
    /// Patch ratio
    #[arg(long)]
    r: Option<String>,
    /// Boundary-condition order (even)
    #[arg(long)]
    order: Option<usize>,
    /// Microscopic time step
    #[arg(long)]
    dt: Option<f64>,
    /// Linear model to analyse
    #[arg(long, value_enum)]
    model: Option<ModelArg>,
    /// Advection coefficient for advection-diffusion
    #[arg(long)]
    c: Option<f64>,
    /// Time stepping scheme
    #[arg(long, value_enum)]
    scheme: Option<SchemeArg>,
    /// Write the full spectrum CSV here (requires a single patch count)
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Write the table rows as CSV here
    #[arg(long)]
    table_csv: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Dynamics to integrate
    #[arg(long, value_enum)]
    model: Option<ModelArg>,
    /// Domain length (periodic)
    #[arg(long)]
    length: Option<f64>,
    /// Patch count
    #[arg(long)]
    patches: Option<usize>,
    /// Fine grid points per patch (odd)
    #[arg(long)]
    npoints: Option<usize>,
    /// Patch ratio
    #[arg(long)]
    r: Option<String>,
    /// Boundary-condition order (even)
    #[arg(long)]
    order: Option<usize>,
    /// Time step
    #[arg(long)]
    dt: Option<f64>,
    /// End time
    #[arg(long)]
    t_end: Option<f64>,
    /// Time stepping scheme
    #[arg(long, value_enum)]
    scheme: Option<SchemeArg>,
    /// Initial condition
    #[arg(long, value_enum)]
    ic: Option<IcArg>,
    /// Snapshot count over [0, t_end] (endpoints included)
    #[arg(long)]
    snapshots: Option<usize>,
    /// Burgers advection strength
    #[arg(long)]
    advection: Option<f64>,
    /// Advection coefficient for advection-diffusion
    #[arg(long)]
    c: Option<f64>,
    /// Skip the diffusive stability check
    #[arg(long)]
    allow_unstable: bool,
    /// Output file (stdout when absent)
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MacroEigArgs {
    /// Consistency order (2, 4 or 6)
    #[arg(long)]
    order: Option<usize>,
    /// Grid points
    #[arg(long)]
    patches: Option<usize>,
    /// Fourth-order dissipation coefficient
    #[arg(long)]
    a: Option<f64>,
    /// Dispersion coefficient
    #[arg(long)]
    b: Option<f64>,
    /// Advection coefficient
    #[arg(long)]
    c: Option<f64>,
    /// Output file (stdout when absent)
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ConvergenceArgs {
    /// Patch counts, a doubling sequence
    #[arg(long, value_delimiter = ',')]
    patches: Option<Vec<usize>>,
    /// Fine grid points per patch (odd)
    #[arg(long)]
    npoints: Option<usize>,
    /// Patch ratio
    #[arg(long)]
    r: Option<String>,
    /// Boundary-condition order (even)
    #[arg(long)]
    order: Option<usize>,
    /// Microscopic time step
    #[arg(long)]
    dt: Option<f64>,
    /// Time stepping scheme
    #[arg(long, value_enum)]
    scheme: Option<SchemeArg>,
    /// Estimate the Δt error floor by a Δt-halving probe and exclude
    /// floored points from the fit
    #[arg(long)]
    probe_floor: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        // downstream consumers (head, etc.) closing the pipe is not an error
        Err(CliError::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let file = FileConfig::load(cli.config.as_deref())?;
    match cli.command {
        Command::Expand(args) => cmd_expand(args, &file),
        Command::Stencil(args) => cmd_stencil(args, &file),
        Command::Spectrum(args) => cmd_spectrum(args, &file),
        Command::Simulate(args) => cmd_simulate(args, &file),
        Command::MacroEig(args) => cmd_macro_eig(args, &file),
        Command::Convergence(args) => cmd_convergence(args, &file),
    }
}

fn out_writer(path: Option<&PathBuf>) -> Result<Box<dyn Write>, CliError> {
    match path {
        Some(p) => Ok(Box::new(std::io::BufWriter::new(std::fs::File::create(p)?))),
        None => Ok(Box::new(std::io::stdout().lock())),
    }
}

fn parse_enum<T: ValueEnum + Clone>(s: &str, what: &str) -> Result<T, CliError> {
    T::from_str(s, true).map_err(|_| CliError::Config(format!("invalid {what} `{s}`")))
}

fn pick_enum<T: ValueEnum + Clone>(
    flag: Option<T>,
    file: Option<&str>,
    default: T,
    what: &str,
) -> Result<T, CliError> {
    match flag {
        Some(v) => Ok(v),
        None => file.map(|s| parse_enum(s, what)).transpose().map(|v| v.unwrap_or(default)),
    }
}

fn ratio_of(flag: Option<&str>, file: Option<&str>) -> Result<Rational, CliError> {
    let text = flag.or(file).unwrap_or("0.1");
    parse_ratio(text).map_err(|e| CliError::Config(e.to_string()))
}

fn even_ptbc_order(order: usize) -> Result<usize, CliError> {
    if order == 0 || !order.is_multiple_of(2) || order > MAX_EXPANSION_ORDER {
        return Err(CliError::Config(format!(
            "boundary-condition order must be even and within 2..={MAX_EXPANSION_ORDER}, got {order}"
        )));
    }
    Ok(order)
}

fn finite(value: f64, what: &str) -> Result<f64, CliError> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(CliError::Config(format!("{what} must be finite, got {value}")))
    }
}

fn linear_model(model: ModelArg, c: f64) -> Result<ModelSpec, CliError> {
    match model {
        ModelArg::Diffusion => Ok(ModelSpec::Diffusion),
        ModelArg::AdvectionDiffusion => Ok(ModelSpec::AdvectionDiffusion {
            c: finite(c, "advection coefficient")?,
        }),
        ModelArg::Burgers => Err(CliError::Config(
            "spectrum analysis requires a linear model (burgers is nonlinear)".into(),
        )),
    }
}

fn cmd_expand(args: ExpandArgs, file: &FileConfig) -> Result<(), CliError> {
    let f = &file.expand;
    let order = pick(args.order, f.order, 8);
    if order == 0 || order > MAX_EXPANSION_ORDER {
        return Err(CliError::Config(format!(
            "expansion order must be within 1..={MAX_EXPANSION_ORDER}, got {order}"
        )));
    }
    let sign = pick_enum(args.sign, f.sign.as_deref(), SignArg::Plus, "sign")?;
    let format = pick_enum(args.format, f.format.as_deref(), FormatArg::Json, "format")?;
    let ratio = match pick_opt(args.r, f.r.clone()) {
        Some(text) => Some(parse_ratio(&text).map_err(|e| CliError::Config(e.to_string()))?),
        None => None,
    };

    let series = DeltaSeries::expand_edge_derivative(sign.edge(), order);
    let mut w = out_writer(args.out.as_ref())?;
    match (format, ratio) {
        (FormatArg::Json, None) => {
            serde_json::to_writer_pretty(&mut w, &series.to_json())
                .map_err(|e| CliError::Config(e.to_string()))?;
            writeln!(w)?;
        }
        (FormatArg::Json, Some(r)) => {
            let numeric = output::numeric_series(&series, &r, sign.edge().symbol());
            serde_json::to_writer_pretty(&mut w, &numeric)
                .map_err(|e| CliError::Config(e.to_string()))?;
            writeln!(w)?;
        }
        (FormatArg::Csv, None) => output::write_series_csv(&mut w, &series)?,
        (FormatArg::Csv, Some(r)) => {
            let numeric = output::numeric_series(&series, &r, sign.edge().symbol());
            output::write_numeric_series_csv(&mut w, &numeric)?;
        }
    }
    Ok(())
}

fn cmd_stencil(args: StencilArgs, file: &FileConfig) -> Result<(), CliError> {
    let f = &file.stencil;
    let order = even_ptbc_order(pick(args.order, f.order, 4))?;
    let sign = pick_enum(args.sign, f.sign.as_deref(), SignArg::Plus, "sign")?;
    let r = ratio_of(args.r.as_deref(), f.r.as_deref())?;
    let stencil = PtbcStencil::build(order / 2, &r, sign.edge())?;
    let mut w = out_writer(args.out.as_ref())?;
    serde_json::to_writer_pretty(&mut w, &stencil.to_json())
        .map_err(|e| CliError::Config(e.to_string()))?;
    writeln!(w)?;
    Ok(())
}

fn cmd_spectrum(args: SpectrumArgs, file: &FileConfig) -> Result<(), CliError> {
    let f = &file.spectrum;
    let patches = pick(args.patches, f.patches.clone(), vec![8]);
    let npoints = pick(args.npoints, f.npoints, 11);
    let r = ratio_of(args.r.as_deref(), f.r.as_deref())?;
    let order = even_ptbc_order(pick(args.order, f.order, 4))?;
    let dt = pick(args.dt, f.dt, 1e-6);
    let c = pick(args.c, f.c, 1.0);
    let model_arg = pick_enum(args.model, f.model.as_deref(), ModelArg::Diffusion, "model")?;
    let model = linear_model(model_arg, c)?;
    let scheme = pick_enum(args.scheme, f.scheme.as_deref(), SchemeArg::Euler, "scheme")?.scheme();

    if args.csv.is_some() && patches.len() != 1 {
        return Err(CliError::Config(
            "--csv expects a single patch count; use --table-csv for sweeps".into(),
        ));
    }

    let mut rows = Vec::with_capacity(patches.len());
    for &m in &patches {
        let cfg = PatchConfig::new(std::f64::consts::TAU, m, r.clone(), npoints)?;
        let spectrum = spectrum_for(&cfg, order, &model, dt, scheme)?;
        if let Some(path) = &args.csv {
            let mut w = out_writer(Some(path))?;
            output::write_spectrum_csv(&mut w, &spectrum)?;
        }
        rows.push(TableRow::from_spectrum(&spectrum));
    }
    if let Some(path) = &args.table_csv {
        let mut w = out_writer(Some(path))?;
        output::write_table_csv(&mut w, &rows)?;
    }
    print!("{}", output::format_table(&rows));
    Ok(())
}

fn cmd_simulate(args: SimulateArgs, file: &FileConfig) -> Result<(), CliError> {
    let f = &file.simulate;
    let model_arg = pick_enum(args.model, f.model.as_deref(), ModelArg::Burgers, "model")?;
    let length = pick(args.length, f.length, std::f64::consts::TAU);
    let patches = pick(args.patches, f.patches, 8);
    let npoints = pick(args.npoints, f.npoints, 11);
    let r = ratio_of(args.r.as_deref(), f.r.as_deref())?;
    let order = even_ptbc_order(pick(args.order, f.order, 6))?;
    let dt = pick(args.dt, f.dt, 1e-4);
    let t_end = pick(args.t_end, f.t_end, 0.1);
    let scheme = pick_enum(args.scheme, f.scheme.as_deref(), SchemeArg::Rk4, "scheme")?.scheme();
    let snapshots = pick(args.snapshots, f.snapshots, 5);
    let advection = pick(args.advection, f.advection, ModelSpec::BURGERS_DEFAULT_ADVECTION);
    let c = pick(args.c, f.c, 1.0);
    let allow_unstable = args.allow_unstable || f.allow_unstable.unwrap_or(false);

    let model = match model_arg {
        ModelArg::Diffusion => ModelSpec::Diffusion,
        ModelArg::AdvectionDiffusion => ModelSpec::AdvectionDiffusion {
            c: finite(c, "advection coefficient")?,
        },
        ModelArg::Burgers => ModelSpec::Burgers {
            advection: finite(advection, "advection strength")?,
        },
    };
    let default_ic = match model_arg {
        ModelArg::Burgers => IcArg::BurgersDemo,
        _ => IcArg::Cos,
    };
    let ic = pick_enum(args.ic, f.ic.as_deref(), default_ic, "ic")?;
    if !(t_end.is_finite() && t_end >= 0.0) {
        return Err(CliError::Config(format!("t-end must be nonnegative, got {t_end}")));
    }

    let cfg = PatchConfig::new(length, patches, r, npoints)?;
    let pair = StencilPair::of_ptbc_order(order, cfg.ratio())?;
    let state = MicroState::sample(&cfg, ic.function());
    let opts = IntegrateOptions {
        snapshots,
        allow_unstable,
        ..Default::default()
    };
    let traj = microsim::integrate(&state, &cfg, &model, &pair, dt, t_end, scheme, &opts)?;
    let mut w = out_writer(args.out.as_ref())?;
    output::write_trajectory_csv(&mut w, &traj, &cfg)?;
    Ok(())
}

fn cmd_macro_eig(args: MacroEigArgs, file: &FileConfig) -> Result<(), CliError> {
    let f = &file.macro_eig;
    let order = pick(args.order, f.order, 6);
    if !(order.is_multiple_of(2) && (2..=6).contains(&order)) {
        return Err(CliError::Config(format!(
            "macroscale consistency order must be 2, 4 or 6, got {order}"
        )));
    }
    let m = pick(args.patches, f.patches, 32);
    let a = pick(args.a, f.a, 0.0);
    let b = pick(args.b, f.b, 0.0);
    let c = pick(args.c, f.c, 0.0);
    let spacing = std::f64::consts::TAU / m as f64;
    let op = macro_stencil(order / 2, a, b, c, spacing, m)?;
    let mut w = out_writer(args.out.as_ref())?;
    output::write_macro_csv(&mut w, &op.eigenvalues())?;
    Ok(())
}

fn cmd_convergence(args: ConvergenceArgs, file: &FileConfig) -> Result<(), CliError> {
    let f = &file.convergence;
    let patches = pick(args.patches, f.patches.clone(), vec![4, 8, 16, 32]);
    let npoints = pick(args.npoints, f.npoints, 11);
    let r = ratio_of(args.r.as_deref(), f.r.as_deref())?;
    let order = even_ptbc_order(pick(args.order, f.order, 4))?;
    let dt = pick(args.dt, f.dt, 1e-6);
    let scheme = pick_enum(args.scheme, f.scheme.as_deref(), SchemeArg::Euler, "scheme")?.scheme();
    let probe_floor = args.probe_floor || f.probe_floor.unwrap_or(false);

    let fit = convergence_fit(&patches, npoints, &r, order, dt, scheme, probe_floor)?;
    let mut w = std::io::stdout().lock();
    writeln!(w, "m,h,abs_err")?;
    for s in &fit.samples {
        writeln!(w, "{},{:.12e},{:.12e}", s.m, s.h, s.err)?;
    }
    match fit.floor {
        Some(floor) => writeln!(w, "floor,{floor:.12e}")?,
        None => writeln!(w, "floor,none")?,
    }
    writeln!(w, "fitted_order,{:.6}", fit.fitted_order)?;
    Ok(())
}
