//! Command-line flags, the TOML config file, and their resolution into a
//! validated run configuration. Flags override the file, which overrides
//! the built-in defaults.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use pairsirs_core::bifurcation::{Axis, SliceSpec};
use pairsirs_core::model::r0;
use pairsirs_core::{Params, ReducedState, SlowPoint};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "pairsirs", version, about = "Fast-slow analysis of the pair-approximation SIRS model")]
pub struct Cli {
    /// TOML config file; flags given on the command line take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (created if missing).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate the full (reduced five-dimensional), layer or slow system.
    Integrate {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        opts: IntegrateArgs,
    },
    /// Singular cycle candidate and the J1 -> J3 interval test.
    Singular {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        opts: SingularArgs,
    },
    /// Classify a two-parameter slice and locate its Hopf boundary.
    Hopf {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        opts: HopfArgs,
    },
    /// Exact stochastic simulation on a random regular graph.
    Netsim {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        opts: NetsimArgs,
    },
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParamArgs {
    #[arg(long)]
    pub beta: Option<f64>,
    /// Recovery rate (default 1).
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Waning rate.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Network degree.
    #[arg(long)]
    pub n: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum System {
    Full,
    Layer,
    Slow,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegrateArgs {
    #[arg(long, value_enum)]
    pub system: Option<System>,
    #[arg(long = "S")]
    #[serde(rename = "S")]
    pub s: Option<f64>,
    #[arg(long = "I")]
    #[serde(rename = "I")]
    pub i: Option<f64>,
    #[arg(long = "SS")]
    #[serde(rename = "SS")]
    pub ss: Option<f64>,
    #[arg(long = "SI")]
    #[serde(rename = "SI")]
    pub si: Option<f64>,
    #[arg(long = "II")]
    #[serde(rename = "II")]
    pub ii: Option<f64>,
    #[arg(long)]
    pub tmax: Option<f64>,
    /// Output sampling interval (default tmax / 1000).
    #[arg(long)]
    pub sample_dt: Option<f64>,
    #[arg(long)]
    pub rtol: Option<f64>,
    #[arg(long)]
    pub atol: Option<f64>,
    /// Comma-separated components to draw in an SVG line plot.
    #[arg(long)]
    pub plot: Option<String>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SingularArgs {
    /// Start of the return-map iteration, as `S` on the parabola.
    #[arg(long)]
    pub s0: Option<f64>,
    /// Width of J1 in `SS`.
    #[arg(long)]
    pub width: Option<f64>,
    #[arg(long)]
    pub samples: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AxisArg {
    N,
    Beta,
    Epsilon,
}

impl From<AxisArg> for Axis {
    fn from(a: AxisArg) -> Self {
        match a {
            AxisArg::N => Axis::N,
            AxisArg::Beta => Axis::Beta,
            AxisArg::Epsilon => Axis::Epsilon,
        }
    }
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HopfArgs {
    #[arg(long, value_enum)]
    pub x_axis: Option<AxisArg>,
    #[arg(long, value_enum)]
    pub y_axis: Option<AxisArg>,
    #[arg(long)]
    pub x_min: Option<f64>,
    #[arg(long)]
    pub x_max: Option<f64>,
    #[arg(long)]
    pub y_min: Option<f64>,
    #[arg(long)]
    pub y_max: Option<f64>,
    /// Grid points per axis.
    #[arg(long)]
    pub resolution: Option<usize>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetsimArgs {
    #[arg(long)]
    pub nodes: Option<usize>,
    #[arg(long)]
    pub replicas: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Fraction of nodes infected at time 0.
    #[arg(long)]
    pub initial_fraction: Option<f64>,
    #[arg(long)]
    pub tmax: Option<f64>,
    #[arg(long)]
    pub sample_dt: Option<f64>,
    /// Allowed relative error of the peak-I time against the ODE.
    #[arg(long)]
    pub tolerance: Option<f64>,
}

/// Layout of the TOML config file.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub out: Option<PathBuf>,
    pub params: ParamArgs,
    pub integrate: IntegrateArgs,
    pub singular: SingularArgs,
    pub hopf: HopfArgs,
    pub netsim: NetsimArgs,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct IntegrateConfig {
    pub params: Params,
    pub system: System,
    pub initial: ReducedState,
    pub tmax: f64,
    pub sample_dt: f64,
    pub rtol: f64,
    pub atol: f64,
    pub plot: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SingularConfig {
    pub params: Params,
    pub s0: f64,
    pub width: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct HopfConfig {
    pub slice: SliceSpec,
}

#[derive(Debug, Clone, Serialize)]
pub struct NetsimConfig {
    pub params: Params,
    pub nodes: usize,
    pub degree: usize,
    pub replicas: usize,
    pub seed: u64,
    pub initial_infected: usize,
    pub tmax: f64,
    pub sample_dt: f64,
    pub tolerance: f64,
}

/// A fully resolved and validated run.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum RunConfig {
    Integrate(IntegrateConfig),
    Singular(SingularConfig),
    Hopf(HopfConfig),
    Netsim(NetsimConfig),
}

#[derive(Debug, Clone, Serialize)]
pub struct Resolved {
    pub out: PathBuf,
    #[serde(flatten)]
    pub run: RunConfig,
}

fn pick<T: Copy>(flag: Option<T>, file: Option<T>) -> Option<T> {
    flag.or(file)
}

fn require<T>(v: Option<T>, name: &str) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::Usage(format!("missing required value --{name}")))
}

fn merge_params(flags: &ParamArgs, file: &ParamArgs) -> ParamArgs {
    ParamArgs {
        beta: pick(flags.beta, file.beta),
        gamma: pick(flags.gamma, file.gamma),
        epsilon: pick(flags.epsilon, file.epsilon),
        n: pick(flags.n, file.n),
    }
}

fn params(beta: f64, gamma: f64, epsilon: f64, n: f64) -> Result<Params, CliError> {
    Params::new(beta, gamma, epsilon, n).map_err(|e| CliError::Usage(e.to_string()))
}

fn positive(v: f64, name: &str) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Usage(format!("--{name} must be positive and finite, got {v}")))
    }
}

impl Cli {
    /// Merge flags, config file and defaults, and validate the result.
    pub fn resolve(&self) -> Result<Resolved, CliError> {
        let file = match &self.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };
        let out = self.out.clone().or(file.out.clone()).unwrap_or_else(|| PathBuf::from("."));
        let run = match &self.command {
            Command::Integrate { params, opts } => {
                resolve_integrate(&merge_params(params, &file.params), opts, &file.integrate)?
            }
            Command::Singular { params, opts } => {
                resolve_singular(&merge_params(params, &file.params), opts, &file.singular)?
            }
            Command::Hopf { params, opts } => resolve_hopf(&merge_params(params, &file.params), opts, &file.hopf)?,
            Command::Netsim { params, opts } => {
                resolve_netsim(&merge_params(params, &file.params), opts, &file.netsim)?
            }
        };
        Ok(Resolved { out, run })
    }
}

fn resolve_integrate(p: &ParamArgs, flags: &IntegrateArgs, file: &IntegrateArgs) -> Result<RunConfig, CliError> {
    let system = require(pick(flags.system, file.system), "system")?;
    let n = require(p.n, "n")?;
    let gamma = p.gamma.unwrap_or(1.0);
    let beta = match system {
        System::Slow => p.beta.unwrap_or(0.0),
        _ => require(p.beta, "beta")?,
    };
    let epsilon = match system {
        System::Full => require(p.epsilon, "epsilon")?,
        _ => 0.0,
    };
    let params = params(beta, gamma, epsilon, n)?;
    let s = require(pick(flags.s, file.s), "S")?;
    let ss = require(pick(flags.ss, file.ss), "SS")?;
    let initial = ReducedState::new(
        s,
        pick(flags.i, file.i).unwrap_or(0.0),
        ss,
        pick(flags.si, file.si).unwrap_or(0.0),
        pick(flags.ii, file.ii).unwrap_or(0.0),
    );
    match system {
        System::Slow => {
            if initial.i != 0.0 || initial.si != 0.0 || initial.ii != 0.0 {
                return Err(CliError::Usage("the slow system lives on I = SI = II = 0".into()));
            }
            let pt = SlowPoint::new(s, ss);
            if !(pt.s.is_finite() && pt.ss.is_finite()) {
                return Err(CliError::Usage("initial point must be finite".into()));
            }
        }
        _ => initial.check_delta(n).map_err(|e| CliError::Usage(e.to_string()))?,
    }
    let tmax = positive(pick(flags.tmax, file.tmax).unwrap_or(100.0), "tmax")?;
    let sample_dt = positive(pick(flags.sample_dt, file.sample_dt).unwrap_or(tmax / 1000.0), "sample-dt")?;
    let rtol = positive(pick(flags.rtol, file.rtol).unwrap_or(1e-10), "rtol")?;
    let atol = positive(pick(flags.atol, file.atol).unwrap_or(1e-13), "atol")?;
    let labels: &[&str] = if system == System::Slow { &SlowPoint::COMPONENTS } else { &ReducedState::COMPONENTS };
    let plot: Vec<String> = flags
        .plot
        .clone()
        .or(file.plot.clone())
        .map(|s| s.split(',').map(|c| c.trim().to_string()).filter(|c| !c.is_empty()).collect())
        .unwrap_or_default();
    if let Some(bad) = plot.iter().find(|c| !labels.contains(&c.as_str())) {
        return Err(CliError::Usage(format!("unknown component {bad:?}; expected one of {labels:?}")));
    }
    Ok(RunConfig::Integrate(IntegrateConfig { params, system, initial, tmax, sample_dt, rtol, atol, plot }))
}

fn resolve_singular(p: &ParamArgs, flags: &SingularArgs, file: &SingularArgs) -> Result<RunConfig, CliError> {
    let params = params(require(p.beta, "beta")?, p.gamma.unwrap_or(1.0), 0.0, require(p.n, "n")?)?;
    let r = r0(&params).map_err(|e| CliError::Usage(e.to_string()))?;
    if r <= 1.0 {
        return Err(CliError::Usage(format!("singular cycles need R0 > 1, got R0 = {r}")));
    }
    // midway between the knee 1/R1 of the parabola and the disease-free point
    let knee = 1.0 / pairsirs_core::model::r1_limit(&params).map_err(|e| CliError::Usage(e.to_string()))?;
    let s0 = pick(flags.s0, file.s0).unwrap_or(0.5 * (knee.min(1.0) + 1.0));
    if !(s0 > 0.0 && s0 < 1.0) {
        return Err(CliError::Usage(format!("--s0 must lie in (0, 1), got {s0}")));
    }
    let width = pick(flags.width, file.width).unwrap_or(pairsirs_core::singular::INTERVAL_WIDTH);
    if !(width >= 0.0 && width.is_finite()) {
        return Err(CliError::Usage(format!("--width must be non-negative, got {width}")));
    }
    let samples = pick(flags.samples, file.samples).unwrap_or(pairsirs_core::singular::INTERVAL_SAMPLES);
    if samples < 2 {
        return Err(CliError::Usage(format!("--samples must be at least 2, got {samples}")));
    }
    Ok(RunConfig::Singular(SingularConfig { params, s0, width, samples }))
}

fn resolve_hopf(p: &ParamArgs, flags: &HopfArgs, file: &HopfArgs) -> Result<RunConfig, CliError> {
    let x_axis: Axis = pick(flags.x_axis, file.x_axis).unwrap_or(AxisArg::Beta).into();
    let y_axis: Axis = pick(flags.y_axis, file.y_axis).unwrap_or(AxisArg::N).into();
    let default_range = |a: Axis| match a {
        Axis::N => (2.2, 7.0),
        Axis::Beta => (0.2, 15.0),
        Axis::Epsilon => (1e-3, 0.25),
    };
    let x_range = (
        pick(flags.x_min, file.x_min).unwrap_or(default_range(x_axis).0),
        pick(flags.x_max, file.x_max).unwrap_or(default_range(x_axis).1),
    );
    let y_range = (
        pick(flags.y_min, file.y_min).unwrap_or(default_range(y_axis).0),
        pick(flags.y_max, file.y_max).unwrap_or(default_range(y_axis).1),
    );
    let fixed = |a: Axis, v: Option<f64>, name: &str| -> Result<f64, CliError> {
        if a == x_axis {
            Ok(x_range.0)
        } else if a == y_axis {
            Ok(y_range.0)
        } else {
            require(v, name)
        }
    };
    let base = params(
        fixed(Axis::Beta, p.beta, "beta")?,
        p.gamma.unwrap_or(1.0),
        fixed(Axis::Epsilon, p.epsilon, "epsilon")?,
        fixed(Axis::N, p.n, "n")?,
    )?;
    let r = pick(flags.resolution, file.resolution).unwrap_or(100);
    let slice = SliceSpec { x_axis, y_axis, x_range, y_range, base, resolution: (r, r) };
    slice.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(RunConfig::Hopf(HopfConfig { slice }))
}

fn resolve_netsim(p: &ParamArgs, flags: &NetsimArgs, file: &NetsimArgs) -> Result<RunConfig, CliError> {
    let params =
        params(require(p.beta, "beta")?, p.gamma.unwrap_or(1.0), p.epsilon.unwrap_or(0.0), require(p.n, "n")?)?;
    let degree = params.degree().map_err(|e| CliError::Usage(e.to_string()))?;
    let nodes = pick(flags.nodes, file.nodes).unwrap_or(10_000);
    if nodes <= degree || (nodes * degree) % 2 == 1 {
        return Err(CliError::Usage(format!("need nodes > n and nodes * n even, got nodes = {nodes}, n = {degree}")));
    }
    let fraction = pick(flags.initial_fraction, file.initial_fraction).unwrap_or(0.01);
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(CliError::Usage(format!("--initial-fraction must lie in (0, 1], got {fraction}")));
    }
    let replicas = pick(flags.replicas, file.replicas).unwrap_or(50);
    if replicas == 0 {
        return Err(CliError::Usage("--replicas must be at least 1".into()));
    }
    let tmax = positive(pick(flags.tmax, file.tmax).unwrap_or(30.0), "tmax")?;
    let sample_dt = positive(pick(flags.sample_dt, file.sample_dt).unwrap_or(0.1), "sample-dt")?;
    let tolerance = positive(pick(flags.tolerance, file.tolerance).unwrap_or(0.15), "tolerance")?;
    Ok(RunConfig::Netsim(NetsimConfig {
        params,
        nodes,
        degree,
        replicas,
        seed: pick(flags.seed, file.seed).unwrap_or(1),
        initial_infected: ((fraction * nodes as f64).round() as usize).max(1),
        tmax,
        sample_dt,
        tolerance,
    }))
}
