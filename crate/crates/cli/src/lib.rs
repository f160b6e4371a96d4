//! `homdip` command-line front end.
//!
//! Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 1 | output could not be written |
//! | 2 | malformed or unreadable input (schema error) |
//! | 3 | physics error, e.g. a scan the quadrature grid cannot hold |
//! | 4 | fit did not converge, or too many Monte-Carlo refits failed |
//! | 5 | no significant dip in the data |
//! | 6 | dip narrower than the dispersion-free width |
//!
//! Output files default to the directory named by `HOMDIP_OUT_DIR`, or the
//! working directory when it is unset.

pub mod curve_file;
pub mod experiment_file;
pub mod plot;
pub mod report;

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use homdip::experiment::{expected_curve, sample_counts};
use homdip::fitting::{dispersion_from_dip, monte_carlo_fit, DispersionInputs, DEFAULT_MC_TRIALS};
use homdip::{HomError, Measured};

use curve_file::CurveFile;
use experiment_file::ExperimentFile;
use report::{DispersionReport, FitReport};

pub const OUT_DIR_ENV: &str = "HOMDIP_OUT_DIR";

#[derive(Debug)]
pub enum CliError {
    Schema(String),
    Physics(HomError),
    Input { path: PathBuf, source: std::io::Error },
    Output { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Output { .. } => 1,
            CliError::Schema(_) | CliError::Input { .. } => 2,
            CliError::Physics(e) => match e {
                HomError::NonConvergence { .. } | HomError::TooManyFailedTrials { .. } => 4,
                HomError::DipNotFound { .. } => 5,
                HomError::InfeasibleWidth { .. } => 6,
                _ => 3,
            },
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Schema(msg) => write!(f, "invalid input: {msg}"),
            CliError::Physics(e) => write!(f, "{e}"),
            CliError::Input { path, source } => write!(f, "cannot read {}: {source}", path.display()),
            CliError::Output { path, source } => write!(f, "cannot write {}: {source}", path.display()),
        }
    }
}

impl std::error::Error for CliError {}

impl From<HomError> for CliError {
    fn from(e: HomError) -> Self {
        CliError::Physics(e)
    }
}

#[derive(Debug, Parser)]
#[command(name = "homdip", version, about = "Simulate, fit and invert Hong-Ou-Mandel delay scans")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the noiseless expected curve of an experiment file.
    Simulate(SimulateArgs),
    /// Write a Poisson-sampled curve of an experiment file.
    Synth(SynthArgs),
    /// Fit a Gaussian dip to a curve, with Monte-Carlo uncertainties.
    Fit(FitArgs),
    /// Infer the dispersion of an element present in one arm only.
    ExtractDispersion(ExtractArgs),
    /// Render a curve, and optionally a fit, as SVG.
    Plot(PlotArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Json,
    Text,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Experiment file (TOML), or a curve file whose recorded configuration
    /// is reused.
    pub experiment: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    pub experiment: PathBuf,
    /// Seed for the Poisson draws; falls back to the file's seed, then to
    /// fresh entropy. The seed used is recorded in the output header.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    pub curve: PathBuf,
    #[arg(long, default_value_t = DEFAULT_MC_TRIALS)]
    pub mc_trials: usize,
    /// Monte-Carlo seed; defaults to the curve's recorded seed, else 0.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = ReportFormat::Json)]
    pub report: ReportFormat,
    /// Write the report here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    /// Curve to fit for the dip width. Alternatively give --dip-fwhm.
    #[arg(required_unless_present = "dip_fwhm", conflicts_with = "dip_fwhm")]
    pub curve: Option<PathBuf>,
    /// Dip FWHM d in ps.
    #[arg(long)]
    pub dip_fwhm: Option<f64>,
    #[arg(long, default_value_t = 0.0, requires = "dip_fwhm")]
    pub dip_fwhm_sigma: f64,
    /// Intensity FWHM of the source pulses, ps.
    #[arg(long)]
    pub t0_fwhm: f64,
    #[arg(long, default_value_t = 0.0)]
    pub t0_fwhm_sigma: f64,
    /// Length of the unbalanced element, m.
    #[arg(long)]
    pub length: f64,
    /// Centre wavelength, nm.
    #[arg(long)]
    pub wavelength: f64,
    /// Trials for both the dip fit and the width inversion.
    #[arg(long, default_value_t = DEFAULT_MC_TRIALS)]
    pub mc_trials: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = ReportFormat::Json)]
    pub report: ReportFormat,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    pub curve: PathBuf,
    /// JSON fit report to overlay.
    pub fit: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Input {
        path: path.to_path_buf(),
        source,
    })
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    let output = |source| CliError::Output {
        path: path.to_path_buf(),
        source,
    };
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(output)?;
    }
    std::fs::write(path, contents).map_err(output)
}

/// `--out`, or `<$HOMDIP_OUT_DIR or .>/<input stem><suffix>`.
fn output_path(explicit: Option<&PathBuf>, input: &Path, suffix: &str) -> PathBuf {
    if let Some(path) = explicit {
        return path.clone();
    }
    let dir = std::env::var_os(OUT_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("."));
    let stem = input.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "homdip".into());
    dir.join(format!("{stem}{suffix}"))
}

/// Experiment from a TOML file, or from the configuration recorded in a
/// curve file. The second value is the curve's recorded seed.
fn load_experiment(path: &Path) -> Result<(ExperimentFile, Option<u64>), CliError> {
    let text = read(path)?;
    if text.starts_with("# homdip-curve") {
        let file = CurveFile::parse(&text)?;
        let config = file
            .config
            .ok_or_else(|| CliError::Schema(format!("{} records no configuration", path.display())))?;
        return Ok((ExperimentFile::parse(&config)?, file.curve.metadata.seed));
    }
    let experiment = ExperimentFile::parse(&text).map_err(|e| match e {
        CliError::Schema(msg) => CliError::Schema(format!("{}: {msg}", path.display())),
        other => other,
    })?;
    Ok((experiment, None))
}

fn load_curve(path: &Path) -> Result<CurveFile, CliError> {
    CurveFile::parse(&read(path)?).map_err(|e| match e {
        CliError::Schema(msg) => CliError::Schema(format!("{}: {msg}", path.display())),
        other => other,
    })
}

fn emit(out: Option<&PathBuf>, text: &str, stdout: &mut dyn Write) -> Result<(), CliError> {
    match out {
        Some(path) => write(path, text),
        None => stdout.write_all(text.as_bytes()).map_err(|source| CliError::Output {
            path: PathBuf::from("<stdout>"),
            source,
        }),
    }
}

fn simulate_curve(experiment: &ExperimentFile, seed: Option<u64>) -> Result<CurveFile, CliError> {
    let normalized = experiment.normalized()?;
    let config = normalized.scan_config(seed)?;
    let mut curve = expected_curve(&config)?;
    if let Some(seed) = seed {
        curve = sample_counts(&curve, seed)?;
    }
    Ok(CurveFile {
        curve,
        config: Some(normalized.to_toml()),
    })
}

pub fn simulate(args: &SimulateArgs, stderr: &mut dyn Write) -> Result<PathBuf, CliError> {
    let (experiment, _) = load_experiment(&args.experiment)?;
    let file = simulate_curve(&experiment, None)?;
    let path = output_path(args.out.as_ref(), &args.experiment, "-expected.tsv");
    write(&path, &file.render())?;
    let _ = writeln!(stderr, "wrote {}", path.display());
    Ok(path)
}

pub fn synth(args: &SynthArgs, stderr: &mut dyn Write) -> Result<PathBuf, CliError> {
    let (experiment, recorded) = load_experiment(&args.experiment)?;
    let seed = args
        .seed
        .or(recorded)
        .or(experiment.scan.seed)
        .unwrap_or_else(rand::random::<u64>);
    let file = simulate_curve(&experiment, Some(seed))?;
    let path = output_path(args.out.as_ref(), &args.experiment, "-synth.tsv");
    write(&path, &file.render())?;
    let _ = writeln!(stderr, "wrote {} (seed {seed})", path.display());
    Ok(path)
}

pub fn fit_report(curve: &CurveFile, mc_trials: usize, seed: Option<u64>) -> Result<FitReport, CliError> {
    let seed = seed.or(curve.curve.metadata.seed).unwrap_or(0);
    let fit = monte_carlo_fit(&curve.curve, mc_trials, seed)?;
    Ok(FitReport::new(&fit, seed))
}

pub fn fit(args: &FitArgs, stdout: &mut dyn Write) -> Result<FitReport, CliError> {
    let curve = load_curve(&args.curve)?;
    let report = fit_report(&curve, args.mc_trials, args.seed)?;
    let text = match args.report {
        ReportFormat::Json => serde_json::to_string_pretty(&report).expect("report serialises") + "\n",
        ReportFormat::Text => report.text(),
    };
    emit(args.out.as_ref(), &text, stdout)?;
    Ok(report)
}

pub fn extract_dispersion(args: &ExtractArgs, stdout: &mut dyn Write) -> Result<DispersionReport, CliError> {
    let (dip, fit, seed) = match (&args.curve, args.dip_fwhm) {
        (Some(path), _) => {
            let curve = load_curve(path)?;
            let fit = fit_report(&curve, args.mc_trials, args.seed)?;
            let seed = fit.mc_seed;
            (Measured::new(fit.fwhm_ps.value, fit.fwhm_ps.sigma), Some(fit), seed)
        }
        (None, Some(d)) => (Measured::new(d, args.dip_fwhm_sigma), None, args.seed.unwrap_or(0)),
        (None, None) => return Err(CliError::Schema("give a curve file or --dip-fwhm".into())),
    };
    let inputs = DispersionInputs {
        dip_fwhm: dip,
        pulse_fwhm: Measured::new(args.t0_fwhm, args.t0_fwhm_sigma),
        length_m: args.length,
        wavelength_nm: args.wavelength,
    };
    let estimate = dispersion_from_dip(inputs, args.mc_trials, seed)?;
    let report = DispersionReport::new(&estimate, seed, fit);
    let text = match args.report {
        ReportFormat::Json => serde_json::to_string_pretty(&report).expect("report serialises") + "\n",
        ReportFormat::Text => report.text(),
    };
    emit(args.out.as_ref(), &text, stdout)?;
    Ok(report)
}

pub fn plot(args: &PlotArgs, stderr: &mut dyn Write) -> Result<PathBuf, CliError> {
    let curve = load_curve(&args.curve)?;
    let fit = match &args.fit {
        Some(path) => Some(
            serde_json::from_str::<FitReport>(&read(path)?)
                .map_err(|e| CliError::Schema(format!("{}: {e}", path.display())))?,
        ),
        None => None,
    };
    let title = args.curve.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let svg = plot::render_svg(&curve.curve, fit.as_ref(), &title)?;
    let path = output_path(args.out.as_ref(), &args.curve, ".svg");
    write(&path, &svg)?;
    let _ = writeln!(stderr, "wrote {}", path.display());
    Ok(path)
}

/// Runs one command. Machine-readable output goes to `stdout`, progress
/// notes to `stderr`.
pub fn run(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    match &cli.command {
        Command::Simulate(args) => simulate(args, stderr).map(drop),
        Command::Synth(args) => synth(args, stderr).map(drop),
        Command::Fit(args) => fit(args, stdout).map(drop),
        Command::ExtractDispersion(args) => extract_dispersion(args, stdout).map(drop),
        Command::Plot(args) => plot(args, stderr).map(drop),
    }
}
