//! Run configuration: command-line flags layered over an optional
//! `key = value` file.

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, ValueEnum};
use igc_core::complexity::VolumeMode;
use igc_core::geodesics::{GeodesicConstants, DEFAULT_HORIZON, DEFAULT_STEP};
use igc_core::model::{admissible_rho_interval, linspace};
use igc_core::CorrelationStructure;

use crate::error::CliError;

pub const DEFAULT_RHO_COUNT: usize = 401;
/// Default grids stop this far short of the admissible boundary.
pub const GRID_INSET: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Separable,
    Rectangle,
}

impl From<Mode> for VolumeMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Separable => VolumeMode::Separable,
            Mode::Rectangle => VolumeMode::RectangleQuadrature,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Flags shared by every subcommand. Each one may also be given in the
/// `--config` file under the same name without the leading dashes.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Correlation structure, e.g. `bivariate-strong`; all structures when omitted.
    #[arg(long)]
    pub structure: Option<CorrelationStructure>,
    /// Explicit correlation values, comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub rho: Option<Vec<f64>>,
    #[arg(long, allow_negative_numbers = true)]
    pub rho_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub rho_max: Option<f64>,
    #[arg(long)]
    pub rho_count: Option<usize>,
    #[arg(long)]
    pub sigma0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub a1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub a2: Option<f64>,
    /// Time horizon.
    #[arg(long)]
    pub tau: Option<f64>,
    /// Integration step.
    #[arg(long)]
    pub step: Option<f64>,
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Values of sigma for metric and curvature rows, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub sigma: Option<Vec<f64>>,
    #[arg(long, allow_negative_numbers = true)]
    pub mu: Option<f64>,
    /// Emit every n-th trajectory sample (the last sample is always kept).
    #[arg(long)]
    pub stride: Option<usize>,
    /// `key = value` file mirroring the flags; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RhoSpec {
    List(Vec<f64>),
    Grid {
        min: Option<f64>,
        max: Option<f64>,
        count: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub structure: Option<CorrelationStructure>,
    pub rho: RhoSpec,
    pub constants: GeodesicConstants,
    pub tau: f64,
    pub step: f64,
    pub mode: VolumeMode,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
    pub sigma: Vec<f64>,
    pub mu: f64,
    pub stride: usize,
}

fn parse_value<T: FromStr>(key: &str, raw: &str) -> Result<T, CliError> {
    raw.trim()
        .parse()
        .map_err(|_| CliError::Config(format!("config key `{key}`: cannot parse `{raw}`")))
}

fn parse_list(key: &str, raw: &str) -> Result<Vec<f64>, CliError> {
    raw.split(',').map(|v| parse_value(key, v)).collect()
}

fn parse_enum<T: ValueEnum>(key: &str, raw: &str) -> Result<T, CliError> {
    T::from_str(raw.trim(), true).map_err(|_| CliError::Config(format!("config key `{key}`: unknown value `{raw}`")))
}

fn read_file(path: &PathBuf) -> Result<BTreeMap<String, String>, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    let mut map = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("{}:{}: expected key = value", path.display(), n + 1)))?;
        map.insert(k.trim().replace('_', "-"), v.trim().to_string());
    }
    Ok(map)
}

/// Fills the unset flags from the config file.
fn merge_file(mut args: CommonArgs, file: BTreeMap<String, String>) -> Result<CommonArgs, CliError> {
    for (k, v) in &file {
        let k = k.as_str();
        match k {
            "structure" => {
                if args.structure.is_none() {
                    args.structure = Some(
                        v.parse()
                            .map_err(|e: String| CliError::Config(format!("config key `structure`: {e}")))?,
                    )
                }
            }
            "rho" => args.rho = args.rho.or(Some(parse_list(k, v)?)),
            "rho-min" => args.rho_min = args.rho_min.or(Some(parse_value(k, v)?)),
            "rho-max" => args.rho_max = args.rho_max.or(Some(parse_value(k, v)?)),
            "rho-count" => args.rho_count = args.rho_count.or(Some(parse_value(k, v)?)),
            "sigma0" => args.sigma0 = args.sigma0.or(Some(parse_value(k, v)?)),
            "a1" => args.a1 = args.a1.or(Some(parse_value(k, v)?)),
            "a2" => args.a2 = args.a2.or(Some(parse_value(k, v)?)),
            "tau" => args.tau = args.tau.or(Some(parse_value(k, v)?)),
            "step" => args.step = args.step.or(Some(parse_value(k, v)?)),
            "mode" => args.mode = args.mode.or(Some(parse_enum(k, v)?)),
            "format" => args.format = args.format.or(Some(parse_enum(k, v)?)),
            "out" => args.out = args.out.or(Some(PathBuf::from(v))),
            "sigma" => args.sigma = args.sigma.or(Some(parse_list(k, v)?)),
            "mu" => args.mu = args.mu.or(Some(parse_value(k, v)?)),
            "stride" => args.stride = args.stride.or(Some(parse_value(k, v)?)),
            other => return Err(CliError::Config(format!("unknown config key `{other}`"))),
        }
    }
    Ok(args)
}

impl RunConfig {
    pub fn resolve(args: CommonArgs) -> Result<Self, CliError> {
        let args = match &args.config {
            Some(path) => {
                let file = read_file(path)?;
                merge_file(args, file)?
            }
            None => args,
        };
        let constants = GeodesicConstants::new(
            args.sigma0.unwrap_or(1.0),
            args.a1.unwrap_or(1.0),
            args.a2.unwrap_or(1.0),
        )?;
        let tau = args.tau.unwrap_or(DEFAULT_HORIZON);
        if !(tau.is_finite() && tau > 0.0) {
            return Err(CliError::Config("--tau must be > 0".into()));
        }
        let step = args.step.unwrap_or(DEFAULT_STEP);
        if !(step.is_finite() && step > 0.0) {
            return Err(CliError::Config("--step must be > 0".into()));
        }
        let rho = match args.rho {
            Some(list) if list.is_empty() => return Err(CliError::Config("--rho needs at least one value".into())),
            Some(list) => {
                if args.rho_min.is_some() || args.rho_max.is_some() || args.rho_count.is_some() {
                    return Err(CliError::Config(
                        "--rho cannot be combined with --rho-min/--rho-max/--rho-count".into(),
                    ));
                }
                RhoSpec::List(list)
            }
            None => {
                let count = args.rho_count.unwrap_or(DEFAULT_RHO_COUNT);
                if count == 0 {
                    return Err(CliError::Config("--rho-count must be >= 1".into()));
                }
                RhoSpec::Grid {
                    min: args.rho_min,
                    max: args.rho_max,
                    count,
                }
            }
        };
        let sigma = args.sigma.unwrap_or_else(|| vec![1.0]);
        if sigma.is_empty() || sigma.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(CliError::Config("--sigma values must be > 0".into()));
        }
        let stride = args.stride.unwrap_or(1);
        if stride == 0 {
            return Err(CliError::Config("--stride must be >= 1".into()));
        }
        Ok(Self {
            structure: args.structure,
            rho,
            constants,
            tau,
            step,
            mode: args.mode.unwrap_or(Mode::Separable).into(),
            format: args.format,
            out: args.out,
            sigma,
            mu: args.mu.unwrap_or(0.0),
            stride,
        })
    }

    pub fn structures(&self) -> Vec<CorrelationStructure> {
        match self.structure {
            Some(s) => vec![s],
            None => CorrelationStructure::ALL.to_vec(),
        }
    }

    /// Correlation values for `s`: the explicit list as given, otherwise the
    /// grid over `s`'s admissible interval (inset) clipped to
    /// `--rho-min/--rho-max`. The uncorrelated structures get `[0]`.
    pub fn rhos_for(&self, s: CorrelationStructure) -> Vec<f64> {
        match (&self.rho, admissible_rho_interval(s)) {
            (RhoSpec::List(list), _) => list.clone(),
            (RhoSpec::Grid { .. }, None) => vec![0.0],
            (RhoSpec::Grid { min, max, count }, Some(iv)) => {
                let (lo, hi) = iv.inset(GRID_INSET);
                let lo = min.map_or(lo, |m| m.max(lo));
                let hi = max.map_or(hi, |m| m.min(hi));
                linspace(lo, hi, *count)
            }
        }
    }

    /// Shared grid for several structures: the explicit list, or a grid over
    /// the widest interval among them.
    pub fn union_rhos(&self, structures: &[CorrelationStructure]) -> Vec<f64> {
        match &self.rho {
            RhoSpec::List(list) => list.clone(),
            RhoSpec::Grid { min, max, count } => {
                let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
                for &s in structures {
                    if let Some(iv) = admissible_rho_interval(s) {
                        let (a, b) = iv.inset(GRID_INSET);
                        lo = lo.min(a);
                        hi = hi.max(b);
                    }
                }
                let lo = min.map_or(lo, |m| m.max(lo));
                let hi = max.map_or(hi, |m| m.min(hi));
                linspace(lo, hi, *count)
            }
        }
    }
}
