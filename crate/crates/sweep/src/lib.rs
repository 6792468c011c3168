//! `pdarray`: parameter sweeps, plots and verification runs for PD-array
//! loss factors.
//!
//! Exit codes: 0 on success, 1 on a usage or input error, 2 on a numerical
//! failure or a failed verification check.

pub mod config;
pub mod plot;
pub mod sweep;
pub mod verify;

use std::ffi::OsString;
use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use pdarray_core::beam::{capture_profile, BeamPattern, Normalization};
use pdarray_core::hexgeom::{layout, rings_for, DistanceModel};
use pdarray_core::scaling::PdRegime;

use crate::config::Config;
use crate::plot::PlotSpec;
use crate::sweep::{run_sweep, SweepKind, SweepSpec};
use crate::verify::{CheckGroup, VerifyOptions};

/// Environment variable naming the directory for outputs without an explicit path.
pub const OUT_DIR_ENV: &str = "PDARRAY_OUT_DIR";

/// An error in how the tool was invoked; exits with code 1.
#[derive(Debug, Clone, PartialEq)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

/// Verification found failing checks; exits with code 2.
#[derive(Debug, Clone, PartialEq)]
pub struct VerificationFailed(pub usize);

impl fmt::Display for VerificationFailed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} verification check(s) failed", self.0)
    }
}

impl std::error::Error for VerificationFailed {}

#[derive(Parser, Debug)]
#[command(name = "pdarray", version, about = "Loss-factor sweeps for photodetector-array receivers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run a parameter sweep and write it as CSV
    Sweep(SweepArgs),
    /// Render a sweep CSV as an SVG chart
    Plot(PlotArgs),
    /// Cross-check closed forms against numerics and the scaling laws against their limits
    Verify(VerifyArgs),
    /// Write the PD positions of an array as CSV
    Layout(LayoutArgs),
    /// Write the per-PD captured power fractions of an array as CSV
    Profile(ProfileArgs),
}

#[derive(Args, Debug, Default)]
pub struct SweepArgs {
    /// key = value file; flags given on the command line take precedence
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// betamin, beta-fixed or beta-scaled
    #[arg(long, value_name = "KIND")]
    pub sweep: Option<SweepKind>,
    #[arg(long = "G-min", value_name = "G")]
    pub g_min: Option<u32>,
    #[arg(long = "G-max", value_name = "G")]
    pub g_max: Option<u32>,
    /// Largest PD count for the betamin sweep
    #[arg(long = "m-max", value_name = "M")]
    pub m_max: Option<u64>,
    #[arg(long = "m-per-decade", value_name = "N")]
    pub m_per_decade: Option<u32>,
    /// PD radius over beam waist, comma separated (beta-fixed)
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub rho: Option<Vec<f64>>,
    /// Radius scale, rho = rho0/(G+1), comma separated (beta-scaled)
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub rho0: Option<Vec<f64>>,
    /// Bandwidth exponents, from 1, 0.5 (or 1/2), 0
    #[arg(long, value_delimiter = ',')]
    pub xi: Option<Vec<PdRegime>>,
    /// Electrical SNR of the reference PD in dB (10·log10), comma separated
    #[arg(long = "snr-db", value_delimiter = ',', allow_hyphen_values = true)]
    pub snr_db: Option<Vec<f64>>,
    /// gaussian, lg10, uniform, degenerate; comma separated
    #[arg(long, value_delimiter = ',')]
    pub beams: Option<Vec<BeamPattern>>,
    /// Output CSV path, or - for stdout [default: $PDARRAY_OUT_DIR/<sweep>.csv]
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// inradius or exact
    #[arg(long = "distance-model")]
    pub distance_model: Option<DistanceModel>,
    /// reference-disk or array-sum
    #[arg(long)]
    pub normalization: Option<Normalization>,
    /// Also render the CSV as an SVG next to it
    #[arg(long)]
    pub svg: bool,
}

#[derive(Args, Debug)]
pub struct PlotArgs {
    /// Sweep CSV to plot
    pub csv: PathBuf,
    /// Output SVG [default: the CSV path with an .svg extension]
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub title: Option<String>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Check groups to run, comma separated [default: all]
    #[arg(long, value_delimiter = ',')]
    pub checks: Option<Vec<CheckGroup>>,
    /// Relative tolerance of the adaptive quadrature
    #[arg(long = "quad-tol", default_value_t = 1e-9)]
    pub quad_tol: f64,
    /// Scale corner-PD distances on the closed-form side by this factor
    #[arg(long = "inject-corner-fault", value_name = "FACTOR")]
    pub inject_corner_fault: Option<f64>,
    #[arg(long, default_value_t = VerifyOptions::default().seed)]
    pub seed: u64,
    /// Report CSV path, or - for stdout [default: $PDARRAY_OUT_DIR/verify_report.csv]
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct LayoutArgs {
    /// Number of hexagonal rings around the central PD
    #[arg(long = "G", conflicts_with = "m", required_unless_present = "m")]
    pub g: Option<u32>,
    /// Number of PDs, 1 + 3G(G+1)
    #[arg(long)]
    pub m: Option<u64>,
    #[arg(long)]
    pub rho: f64,
    #[arg(long = "distance-model", default_value = "inradius")]
    pub distance_model: DistanceModel,
    /// Output CSV path, or - for stdout
    #[arg(long, default_value = "-")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct ProfileArgs {
    #[command(flatten)]
    pub array: LayoutArgs,
    #[arg(long)]
    pub beam: BeamPattern,
    #[arg(long, default_value = "reference-disk")]
    pub normalization: Normalization,
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_code(&e)
        }
    }
}

/// 1 for usage and input-domain errors, 2 for everything else.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    // Context layers are only visible through anyhow's own downcast.
    if err.downcast_ref::<UsageError>().is_some() {
        return 1;
    }
    for cause in err.chain() {
        if cause.is::<UsageError>() {
            return 1;
        }
        if let Some(e) = cause.downcast_ref::<pdarray_core::Error>() {
            return match e {
                pdarray_core::Error::Numerical(_) => 2,
                _ => 1,
            };
        }
    }
    2
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Sweep(args) => cmd_sweep(args),
        Command::Plot(args) => cmd_plot(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Layout(args) => cmd_layout(args),
        Command::Profile(args) => cmd_profile(args),
    }
}

fn default_out_dir() -> PathBuf {
    std::env::var_os(OUT_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("."))
}

fn parse_value<T: FromStr>(line: usize, key: &str, value: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    value
        .parse()
        .map_err(|e| UsageError(format!("config line {line}: bad value '{value}' for {key}: {e}")).into())
}

fn parse_list<T: FromStr>(line: usize, key: &str, value: &str) -> Result<Vec<T>>
where
    T::Err: fmt::Display,
{
    value.split(',').map(|v| parse_value(line, key, v.trim())).collect()
}

/// Combines the config file and the command-line flags into a sweep spec;
/// flags override file entries.
pub fn resolve_sweep(args: &SweepArgs) -> Result<(SweepSpec, Option<PathBuf>, bool)> {
    let config = match &args.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    let kind = match (args.sweep, config.get("sweep")) {
        (Some(k), _) => k,
        (None, Some((line, v))) => parse_value(line, "sweep", v)?,
        (None, None) => return Err(UsageError("no sweep given; pass --sweep or set sweep in the config".into()).into()),
    };
    let mut spec = SweepSpec::new(kind);
    let mut out = None;
    let mut svg = false;
    for (line, key, value) in &config.entries {
        let (line, value) = (*line, value.as_str());
        match key.as_str() {
            "sweep" => {}
            "G-min" => spec.g_min = parse_value(line, key, value)?,
            "G-max" => spec.g_max = parse_value(line, key, value)?,
            "m-max" => spec.m_max = parse_value(line, key, value)?,
            "m-per-decade" => spec.m_per_decade = parse_value(line, key, value)?,
            "rho" => spec.rho = parse_list(line, key, value)?,
            "rho0" => spec.rho0 = parse_list(line, key, value)?,
            "xi" => spec.xi = parse_list(line, key, value)?,
            "snr-db" => spec.snr_db = parse_list(line, key, value)?,
            "beams" => spec.beams = parse_list(line, key, value)?,
            "out" => out = Some(PathBuf::from(value)),
            "distance-model" => spec.distance_model = parse_value(line, key, value)?,
            "normalization" => spec.normalization = parse_value(line, key, value)?,
            "svg" => svg = parse_value(line, key, value)?,
            _ => unreachable!("config keys are validated on load"),
        }
    }
    if let Some(v) = args.g_min {
        spec.g_min = v;
    }
    if let Some(v) = args.g_max {
        spec.g_max = v;
    }
    if let Some(v) = args.m_max {
        spec.m_max = v;
    }
    if let Some(v) = args.m_per_decade {
        spec.m_per_decade = v;
    }
    if let Some(v) = &args.rho {
        spec.rho = v.clone();
    }
    if let Some(v) = &args.rho0 {
        spec.rho0 = v.clone();
    }
    if let Some(v) = &args.xi {
        spec.xi = v.clone();
    }
    if let Some(v) = &args.snr_db {
        spec.snr_db = v.clone();
    }
    if let Some(v) = &args.beams {
        spec.beams = v.clone();
    }
    if let Some(v) = args.distance_model {
        spec.distance_model = v;
    }
    if let Some(v) = args.normalization {
        spec.normalization = v;
    }
    if args.out.is_some() {
        out = args.out.clone();
    }
    spec.validate().map_err(|e| UsageError(e.to_string()))?;
    Ok((spec, out, svg || args.svg))
}

fn is_stdout(path: &Path) -> bool {
    path.as_os_str() == "-"
}

fn write_output(path: &Path, contents: &[u8]) -> Result<()> {
    if is_stdout(path) {
        return match io::stdout().write_all(contents) {
            Err(e) if e.kind() == io::ErrorKind::BrokenPipe => Ok(()),
            other => Ok(other?),
        };
    }
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn cmd_sweep(args: SweepArgs) -> Result<()> {
    let (spec, out, svg) = resolve_sweep(&args)?;
    let out = out.unwrap_or_else(|| default_out_dir().join(format!("{}.csv", spec.kind)));
    let table = run_sweep(&spec)?;
    write_output(&out, table.to_csv_string()?.as_bytes())?;
    if !is_stdout(&out) {
        eprintln!("wrote {} rows to {}", table.rows.len(), out.display());
        if svg {
            let svg_path = out.with_extension("svg");
            plot::render_plot(&out, &svg_path, &PlotSpec::default())?;
            eprintln!("wrote {}", svg_path.display());
        }
    }
    Ok(())
}

fn cmd_plot(args: PlotArgs) -> Result<()> {
    let out = args.out.unwrap_or_else(|| args.csv.with_extension("svg"));
    let spec = PlotSpec {
        title: args.title,
        ..PlotSpec::default()
    };
    plot::render_plot(&args.csv, &out, &spec).map_err(|e| e.context(UsageError("cannot plot".into())))?;
    eprintln!("wrote {}", out.display());
    Ok(())
}

fn cmd_verify(args: VerifyArgs) -> Result<()> {
    let opts = VerifyOptions {
        groups: args.checks.unwrap_or_else(|| CheckGroup::ALL.to_vec()),
        quad_rel_tolerance: args.quad_tol,
        corner_fault: args.inject_corner_fault,
        seed: args.seed,
    };
    let report = verify::verify(&opts);
    let mut stdout = io::stdout().lock();
    for c in &report.checks {
        let status = if c.passed { "pass" } else { "FAIL" };
        let line = writeln!(stdout, "{status:4}  {}/{}  observed {}  expected {}", c.group, c.name, c.observed, c.expected);
        // A closed pipe (e.g. `| head`) just ends the listing.
        if line.is_err() {
            break;
        }
    }
    drop(stdout);
    let path = args.report.unwrap_or_else(|| default_out_dir().join("verify_report.csv"));
    let mut buf = Vec::new();
    report.write_csv(&mut buf)?;
    write_output(&path, &buf)?;
    let failed = report.failures().count();
    if failed > 0 {
        return Err(VerificationFailed(failed).into());
    }
    Ok(())
}

fn array_layout(args: &LayoutArgs) -> Result<pdarray_core::hexgeom::ArrayLayout> {
    let g = match (args.g, args.m) {
        (Some(g), _) => g,
        (None, Some(m)) => rings_for(m)?,
        (None, None) => unreachable!("clap requires one of --G and --m"),
    };
    Ok(layout(g, args.rho, args.distance_model)?)
}

fn cmd_layout(args: LayoutArgs) -> Result<()> {
    let l = array_layout(&args)?;
    let mut buf = Vec::new();
    l.write_csv(&mut buf)?;
    write_output(&args.out, &buf)
}

fn cmd_profile(args: ProfileArgs) -> Result<()> {
    let l = array_layout(&args.array)?;
    let profile = capture_profile(args.beam, &l, args.normalization)?;
    let mut buf = Vec::new();
    profile.write_csv(&mut buf)?;
    write_output(&args.array.out, &buf)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_config() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sweep.conf");
        fs::write(&path, "sweep = beta-fixed\nG-max = 7\nrho = 0.2, 0.4\nbeams = gaussian\n").unwrap();
        let args = SweepArgs {
            config: Some(path),
            rho: Some(vec![0.3]),
            ..SweepArgs::default()
        };
        let (spec, out, svg) = resolve_sweep(&args).unwrap();
        assert_eq!(spec.kind, SweepKind::BetaFixed);
        assert_eq!(spec.g_max, 7);
        assert_eq!(spec.rho, vec![0.3]);
        assert_eq!(spec.beams, vec![BeamPattern::Gaussian]);
        assert_eq!(out, None);
        assert!(!svg);
    }

    #[test]
    fn bad_config_value_is_a_usage_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sweep.conf");
        fs::write(&path, "sweep = betamin\nxi = 0.7\n").unwrap();
        let args = SweepArgs {
            config: Some(path),
            ..SweepArgs::default()
        };
        let err = resolve_sweep(&args).unwrap_err();
        assert_eq!(exit_code(&err), 1);
        assert!(format!("{err:#}").contains("line 2"));
    }

    #[test]
    fn missing_sweep_kind() {
        let err = resolve_sweep(&SweepArgs::default()).unwrap_err();
        assert_eq!(exit_code(&err), 1);
    }

    #[test]
    fn exit_codes_by_error_kind() {
        let numerical: anyhow::Error = pdarray_core::Error::Numerical("x".into()).into();
        assert_eq!(exit_code(&numerical), 2);
        let domain: anyhow::Error = pdarray_core::Error::Domain("x".into()).into();
        assert_eq!(exit_code(&domain.context("while sweeping")), 1);
        assert_eq!(exit_code(&VerificationFailed(3).into()), 2);
        let plot = anyhow::anyhow!("bad csv").context(UsageError("cannot plot".into()));
        assert_eq!(exit_code(&plot), 1);
    }
}
