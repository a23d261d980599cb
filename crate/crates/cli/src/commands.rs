//! Argument definitions and command drivers.

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rabi_core::analytic;
use rabi_core::fit::{self, FitOptions, FluxCalibration};
use rabi_core::regimes;
use rabi_core::response::{self, BiasSweep, ProbeConfig, ThermalConfig};
use rabi_core::{ModelParams, TruncationConfig};
use serde_json::json;

use crate::error::{exit, CliError, Result};
use crate::format;
use crate::ingest;
use crate::manifest::RunManifest;
use crate::parallel;
use crate::verify;

#[derive(Debug, Parser)]
#[command(name = "rabi-spec", version, about = "Spectra, regime classification and fitting for the biased quantum Rabi model")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Energies and transition frequencies along a bias sweep (CSV).
    Levels(LevelsArgs),
    /// Transmission over a bias and probe-frequency lattice.
    Spectrum(SpectrumArgs),
    /// Coupling-regime classification (JSON).
    Classify(ClassifyArgs),
    /// Regime boundaries for a given delta/omega (JSON).
    Boundaries(BoundariesArgs),
    /// Fit delta, omega and g to measured resonance frequencies (JSON).
    Fit(FitArgs),
    /// Run the built-in invariant suite.
    Verify,
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub delta: f64,
    #[arg(long, default_value_t = 1.0)]
    pub omega: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub g: f64,
}

impl ModelArgs {
    fn params(&self) -> Result<ModelParams> {
        Ok(ModelParams::new(self.delta, 0.0, self.omega, self.g)?)
    }
}

#[derive(Debug, Clone, Args)]
pub struct TruncArgs {
    /// Convergence tolerance on the checked energies.
    #[arg(long, default_value_t = 1e-9)]
    pub energy_tol: f64,
    /// Largest Fock cutoff tried before giving up.
    #[arg(long, default_value_t = 2048)]
    pub max_cutoff: usize,
    /// Smallest Fock cutoff.
    #[arg(long, default_value_t = 8)]
    pub n_fock: usize,
}

impl TruncArgs {
    fn config(&self) -> Result<TruncationConfig> {
        let t = TruncationConfig {
            n_fock: self.n_fock,
            energy_tol: self.energy_tol,
            n_levels_checked: 8,
            max_cutoff: self.max_cutoff,
        };
        t.validate()?;
        Ok(t)
    }
}

/// Bias axis; limits default to `+-2 omega`.
#[derive(Debug, Clone, Args)]
pub struct BiasAxisArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub eps_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub eps_max: Option<f64>,
    #[arg(long, default_value_t = 241)]
    pub eps_steps: usize,
}

impl BiasAxisArgs {
    fn axis(&self, omega: f64) -> Result<(f64, f64, Vec<f64>)> {
        let lo = self.eps_min.unwrap_or(-2.0 * omega);
        let hi = self.eps_max.unwrap_or(2.0 * omega);
        if self.eps_steps == 0 || !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(CliError::Usage(format!(
                "empty epsilon range: [{lo}, {hi}] with {} steps",
                self.eps_steps
            )));
        }
        Ok((lo, hi, response::linspace(lo, hi, self.eps_steps)))
    }
}

fn parse_pair(s: &str) -> std::result::Result<(usize, usize), String> {
    let (a, b) = s
        .split_once('-')
        .ok_or_else(|| format!("expected i-j, got `{s}`"))?;
    let i = a.trim().parse().map_err(|_| format!("bad level `{a}`"))?;
    let j = b.trim().parse().map_err(|_| format!("bad level `{b}`"))?;
    if i >= j {
        return Err(format!("transition {i}-{j} requires i < j"));
    }
    Ok((i, j))
}

#[derive(Debug, Clone, Args)]
pub struct LevelsArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub bias: BiasAxisArgs,
    /// Number of energy columns.
    #[arg(long, default_value_t = 4)]
    pub levels: usize,
    /// Transition columns, e.g. `0-1,0-2,1-3`.
    #[arg(long, value_delimiter = ',', value_parser = parse_pair)]
    pub transitions: Vec<(usize, usize)>,
    #[command(flatten)]
    pub trunc: TruncArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GridFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub bias: BiasAxisArgs,
    /// Probe axis; limits default to `0.8 omega` and `1.2 omega`.
    #[arg(long)]
    pub probe_min: Option<f64>,
    #[arg(long)]
    pub probe_max: Option<f64>,
    #[arg(long, default_value_t = 201)]
    pub probe_steps: usize,
    /// Drive amplitude; default `2e-3 omega`.
    #[arg(long)]
    pub amplitude: Option<f64>,
    /// Decoherence rate; default `3e-3 omega`.
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub r0: f64,
    /// Thermal energy; default `0.5 omega`.
    #[arg(long)]
    pub kt: Option<f64>,
    #[arg(long, default_value_t = 8)]
    pub max_levels: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub population_floor: f64,
    #[command(flatten)]
    pub trunc: TruncArgs,
    #[arg(long, value_enum, default_value_t = GridFormat::Csv)]
    pub format: GridFormat,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write a P6 heatmap.
    #[arg(long)]
    pub heatmap: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Classify by the higher-level (2->4, 3->5) criteria instead.
    #[arg(long)]
    pub high: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct BoundariesArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub delta_ratio: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    /// CSV with header `bias,bias_kind,i,j,frequency,weight`.
    #[arg(long)]
    pub observations: PathBuf,
    #[arg(long)]
    pub init_delta: f64,
    #[arg(long)]
    pub init_omega: f64,
    #[arg(long)]
    pub init_g: f64,
    /// Persistent current, for `nphi` biases.
    #[arg(long)]
    pub ip: Option<f64>,
    #[arg(long)]
    pub flux_quantum: Option<f64>,
    /// Pinned symmetry point; nearest half-integer when omitted.
    #[arg(long, allow_negative_numbers = true)]
    pub n_phi0: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 500)]
    pub max_iterations: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub xtol: f64,
    #[arg(long)]
    pub no_restart: bool,
    #[arg(long, default_value_t = 1e-10)]
    pub energy_tol: f64,
    #[arg(long, default_value_t = 2048)]
    pub max_cutoff: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Result of a command that ran to completion.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub code: i32,
}

struct Emitter {
    command: &'static str,
    argv: Vec<String>,
    start: Instant,
    outputs: Vec<String>,
    manifest_target: Option<PathBuf>,
}

impl Emitter {
    fn new(command: &'static str, argv: &[String]) -> Self {
        Emitter {
            command,
            argv: argv.to_vec(),
            start: Instant::now(),
            outputs: Vec::new(),
            manifest_target: None,
        }
    }

    /// Writes to `path`, or to stdout when `None`.
    fn emit(&mut self, path: Option<&Path>, bytes: &[u8]) -> Result<()> {
        match path {
            Some(p) => {
                std::fs::write(p, bytes).map_err(|e| CliError::io(p.display().to_string(), e))?;
                self.outputs.push(p.display().to_string());
                if self.manifest_target.is_none() {
                    self.manifest_target = Some(RunManifest::path_for(p));
                }
            }
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(bytes)
                    .and_then(|_| out.flush())
                    .map_err(|e| CliError::io("stdout", e))?;
                self.outputs.push("-".into());
            }
        }
        Ok(())
    }

    fn finish(self, resolved: serde_json::Value) -> Result<()> {
        let Some(target) = self.manifest_target else {
            return Ok(());
        };
        RunManifest {
            command: self.command.into(),
            argv: self.argv,
            resolved,
            outputs: self.outputs,
            version: env!("CARGO_PKG_VERSION").into(),
            duration_seconds: self.start.elapsed().as_secs_f64(),
        }
        .write(&target)
    }
}

fn to_json<T: serde::Serialize>(v: &T) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s.into_bytes()
}

fn levels(args: &LevelsArgs, argv: &[String]) -> Result<Outcome> {
    let mut em = Emitter::new("levels", argv);
    let params = args.model.params()?;
    let trunc = args.trunc.config()?;
    let (lo, hi, axis) = args.bias.axis(params.omega)?;
    if args.levels == 0 {
        return Err(CliError::Usage("--levels must be at least 1".into()));
    }
    let sweep = BiasSweep::new(params, axis)?;
    let rows = parallel::level_table(&sweep, args.levels, &args.transitions, &trunc)?;
    let csv = format::levels_csv(args.levels, &args.transitions, &rows);
    em.emit(args.out.as_deref(), csv.as_bytes())?;
    em.finish(json!({
        "params": params,
        "eps_min": lo,
        "eps_max": hi,
        "eps_steps": args.bias.eps_steps,
        "levels": args.levels,
        "transitions": args.transitions,
        "truncation": trunc,
    }))?;
    Ok(Outcome { code: exit::OK })
}

fn spectrum(args: &SpectrumArgs, argv: &[String]) -> Result<Outcome> {
    let mut em = Emitter::new("spectrum", argv);
    let params = args.model.params()?;
    let w = params.omega;
    let trunc = args.trunc.config()?;
    let (lo, hi, axis) = args.bias.axis(w)?;
    let p_lo = args.probe_min.unwrap_or(0.8 * w);
    let p_hi = args.probe_max.unwrap_or(1.2 * w);
    if args.probe_steps == 0 || !(p_lo <= p_hi) {
        return Err(CliError::Usage(format!(
            "empty probe range: [{p_lo}, {p_hi}] with {} steps",
            args.probe_steps
        )));
    }
    let probe_axis = response::linspace(p_lo, p_hi, args.probe_steps);
    let probe = ProbeConfig {
        amplitude: args.amplitude.unwrap_or(2e-3 * w),
        gamma: args.gamma.unwrap_or(3e-3 * w),
        r0: args.r0,
    };
    let thermal = ThermalConfig {
        kt: args.kt.unwrap_or(0.5 * w),
        max_levels: args.max_levels,
        population_floor: args.population_floor,
    };
    let sweep = BiasSweep::new(params, axis)?;
    let grid = parallel::transmission_grid(&sweep, &probe, &thermal, &probe_axis, &trunc)?;
    if grid.clamped_points > 0 {
        eprintln!(
            "warning: reflection exceeded 1 and was clamped at {} lattice points",
            grid.clamped_points
        );
    }
    let body = match args.format {
        GridFormat::Csv => format::grid_csv(&grid),
        GridFormat::Json => format::grid_json(&grid, &trunc),
    };
    em.emit(args.out.as_deref(), body.as_bytes())?;
    if let Some(path) = &args.heatmap {
        em.emit(Some(path), &format::heatmap_ppm(&grid))?;
    }
    em.finish(json!({
        "params": params,
        "eps_min": lo,
        "eps_max": hi,
        "eps_steps": args.bias.eps_steps,
        "probe_min": p_lo,
        "probe_max": p_hi,
        "probe_steps": args.probe_steps,
        "probe": probe,
        "thermal": thermal,
        "truncation": trunc,
        "format": format!("{:?}", args.format).to_lowercase(),
    }))?;
    Ok(Outcome { code: exit::OK })
}

fn unsupported(params: &ModelParams) -> Result<()> {
    if params.delta_ratio() >= 1.0 {
        return Err(CliError::Usage(format!(
            "unsupported regime: delta/omega = {} >= 1, where the taxonomy does not apply",
            params.delta_ratio()
        )));
    }
    Ok(())
}

fn classify(args: &ClassifyArgs, argv: &[String]) -> Result<Outcome> {
    let mut em = Emitter::new("classify", argv);
    let params = args.model.params()?;
    unsupported(&params)?;
    let code;
    if args.high {
        let pattern = regimes::classify_high(&params)?;
        let cell = pattern.reference_values();
        if cell.is_none() {
            eprintln!("warning: pattern is not one of the populated table cells");
        }
        let doc = json!({
            "g_ratio": params.g_ratio(),
            "delta_ratio": params.delta_ratio(),
            "pattern": pattern,
            "cell_index": pattern.cell_index(),
            "cell_reference_values": cell,
        });
        em.emit(args.out.as_deref(), &to_json(&doc))?;
        code = exit::OK;
    } else {
        let report = regimes::classify_low(&params)?;
        code = if report.near_boundary.is_some() {
            exit::NEAR_BOUNDARY
        } else {
            exit::OK
        };
        em.emit(args.out.as_deref(), &to_json(&report))?;
    }
    em.finish(json!({ "params": params, "high": args.high }))?;
    Ok(Outcome { code })
}

fn boundaries(args: &BoundariesArgs, argv: &[String]) -> Result<Outcome> {
    let mut em = Emitter::new("boundaries", argv);
    let set = analytic::regime_boundaries(args.delta_ratio)?;
    em.emit(args.out.as_deref(), &to_json(&set))?;
    em.finish(json!({ "delta_ratio": args.delta_ratio }))?;
    Ok(Outcome { code: exit::OK })
}

/// Options the CLI passes to the library for `fit`.
pub fn fit_options(args: &FitArgs) -> FitOptions {
    FitOptions {
        max_iterations: args.max_iterations,
        xtol: args.xtol,
        restart: !args.no_restart,
        seed: args.seed,
        trunc: TruncationConfig {
            energy_tol: args.energy_tol,
            max_cutoff: args.max_cutoff,
            ..TruncationConfig::default()
        },
        ..FitOptions::default()
    }
}

fn fit_cmd(args: &FitArgs, argv: &[String]) -> Result<Outcome> {
    let mut em = Emitter::new("fit", argv);
    let path = args.observations.display().to_string();
    let file = std::fs::File::open(&args.observations).map_err(|e| CliError::io(path.clone(), e))?;
    let obs = ingest::read_observations(std::io::BufReader::new(file), &path)?;
    let cal = match (args.ip, args.flux_quantum) {
        (Some(ip), Some(phi0)) => Some(FluxCalibration::new(ip, phi0, args.n_phi0)?),
        (None, None) => None,
        _ => return Err(CliError::Usage("--ip and --flux-quantum must be given together".into())),
    };
    let initial = ModelParams::new(args.init_delta, 0.0, args.init_omega, args.init_g)?;
    let opts = fit_options(args);
    let result = fit::fit_parameters(&obs, &initial, cal.as_ref(), &opts)?;
    if !result.converged {
        eprintln!("warning: fit did not converge; reporting the best point found");
    }
    em.emit(args.out.as_deref(), &to_json(&result))?;
    em.finish(json!({
        "observations": path,
        "initial": initial,
        "calibration": cal,
        "options": opts,
    }))?;
    Ok(Outcome {
        code: if result.converged { exit::OK } else { exit::FIT_NOT_CONVERGED },
    })
}

fn verify_cmd() -> Result<Outcome> {
    let report = verify::run(&verify::VerifyReference::default());
    print!("{}", report.render());
    Ok(Outcome {
        code: if report.passed() { exit::OK } else { exit::VERIFY_FAILED },
    })
}

/// Runs a parsed command. `argv` (without the program name) is recorded in
/// manifests.
pub fn run(cli: &Cli, argv: &[String]) -> Result<Outcome> {
    match &cli.command {
        Command::Levels(a) => levels(a, argv),
        Command::Spectrum(a) => spectrum(a, argv),
        Command::Classify(a) => classify(a, argv),
        Command::Boundaries(a) => boundaries(a, argv),
        Command::Fit(a) => fit_cmd(a, argv),
        Command::Verify => verify_cmd(),
    }
}
