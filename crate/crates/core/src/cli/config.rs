//! Run configuration: command-line flags layered over an optional flat
//! `key=value` file whose keys are the flag names without dashes.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::Args;
use serde::Serialize;

use crate::potential::UnitSystem;

pub const DEFAULT_HORIZON: usize = 30;
pub const DEFAULT_CONFIDENCE: f64 = 0.95;
pub const DEFAULT_GRID_POINTS: usize = 100;
pub const DEFAULT_STATES: usize = 2;
/// Days of closes fed to the placeholder potential.
pub const DEFAULT_LOOKBACK: usize = 20;

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// Flat key=value file; flags given on the command line take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,

    /// Price CSV with date, close and volume columns.
    #[arg(long)]
    pub input: Option<PathBuf>,

    /// Potential CSV with price and potential columns.
    #[arg(long)]
    pub potential: Option<PathBuf>,

    /// Use the built-in visit-frequency placeholder instead of a potential file.
    #[arg(long)]
    pub placeholder_potential: bool,

    /// Kernel bandwidth of the placeholder potential, in price units
    /// [default: 2% of the wall center].
    #[arg(long)]
    pub bandwidth: Option<f64>,

    /// Height of the placeholder potential's ridges, in energy units [default: 1].
    #[arg(long)]
    pub potential_scale: Option<f64>,

    /// Trailing days of closes used by the placeholder potential [default: 20].
    #[arg(long)]
    pub lookback: Option<usize>,

    /// Forecast horizon in trading days [default: 30].
    #[arg(long)]
    pub horizon: Option<usize>,

    /// Confidence level for the wall placement [default: 0.95].
    #[arg(long)]
    pub confidence: Option<f64>,

    /// Interior grid points [default: 100].
    #[arg(long)]
    pub grid_points: Option<usize>,

    /// Stationary states kept in the thermal mixture [default: 2].
    #[arg(long)]
    pub states: Option<usize>,

    /// Use this market temperature instead of estimating it.
    #[arg(long)]
    pub temperature_override: Option<f64>,

    /// Trailing days averaged by the temperature estimate [default: horizon].
    #[arg(long)]
    pub temperature_window: Option<usize>,

    /// `natural` or comma-separated `hbar=..,boltzmann=..,return_to_length=..,volume_to_mass=..`.
    #[arg(long)]
    pub units: Option<String>,

    /// Particle mass [default: mean volume over the temperature window, converted].
    #[arg(long)]
    pub mass: Option<f64>,

    /// Wall center price [default: last close].
    #[arg(long)]
    pub center: Option<f64>,

    /// Wall half-width as a fraction of the center [default: estimated fluctuation limit].
    #[arg(long)]
    pub half_width: Option<f64>,

    /// Output directory [default: current directory].
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Fully resolved settings for one run; echoed into every report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub input: PathBuf,
    pub potential: Option<PathBuf>,
    pub placeholder_potential: bool,
    pub bandwidth: Option<f64>,
    pub potential_scale: f64,
    pub lookback: usize,
    pub horizon: usize,
    pub confidence: f64,
    pub grid_points: usize,
    pub states: usize,
    pub temperature_override: Option<f64>,
    pub temperature_window: usize,
    pub units: UnitSystem,
    pub mass: Option<f64>,
    pub center: Option<f64>,
    pub half_width: Option<f64>,
    pub out: PathBuf,
}

const KNOWN_KEYS: [&str; 18] = [
    "config",
    "input",
    "potential",
    "placeholder-potential",
    "bandwidth",
    "potential-scale",
    "lookback",
    "horizon",
    "confidence",
    "grid-points",
    "states",
    "temperature-override",
    "temperature-window",
    "units",
    "mass",
    "center",
    "half-width",
    "out",
];

/// Parses `key=value` lines. Blank lines and `#` comments are skipped; keys
/// may use dashes or underscores.
pub fn parse_config_file(text: &str) -> Result<BTreeMap<String, String>, String> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("config line {}: expected key=value", i + 1))?;
        let key = key.trim().replace('_', "-");
        if !KNOWN_KEYS.contains(&key.as_str()) || key == "config" {
            return Err(format!("config line {}: unknown key `{key}`", i + 1));
        }
        map.insert(key, value.trim().to_string());
    }
    Ok(map)
}

impl RunConfig {
    /// Resolves flags against the config file (if any) and the defaults.
    /// Relative paths in the config file are taken relative to the file.
    pub fn resolve(args: &RunArgs) -> Result<Self, String> {
        let (file, base) = match &args.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
                let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
                (parse_config_file(&text)?, base)
            }
            None => (BTreeMap::new(), PathBuf::new()),
        };

        fn pick<T: FromStr>(
            flag: Option<T>,
            file: &BTreeMap<String, String>,
            key: &str,
        ) -> Result<Option<T>, String> {
            if flag.is_some() {
                return Ok(flag);
            }
            file.get(key)
                .map(|v| {
                    v.parse::<T>()
                        .map_err(|_| format!("config key `{key}` has invalid value {v:?}"))
                })
                .transpose()
        }
        let pick_path = |flag: &Option<PathBuf>, key: &str| -> Option<PathBuf> {
            flag.clone().or_else(|| file.get(key).map(|v| base.join(v)))
        };

        let input = pick_path(&args.input, "input").ok_or("an --input price file is required")?;
        let horizon = pick(args.horizon, &file, "horizon")?.unwrap_or(DEFAULT_HORIZON);
        let units_text = pick(args.units.clone(), &file, "units")?;
        let units = match units_text {
            Some(text) => text.parse::<UnitSystem>().map_err(|e| e.to_string())?,
            None => UnitSystem::natural(),
        };
        let placeholder = args.placeholder_potential
            || pick::<bool>(None, &file, "placeholder-potential")?.unwrap_or(false);

        Ok(RunConfig {
            input,
            potential: pick_path(&args.potential, "potential"),
            placeholder_potential: placeholder,
            bandwidth: pick(args.bandwidth, &file, "bandwidth")?,
            potential_scale: pick(args.potential_scale, &file, "potential-scale")?.unwrap_or(1.0),
            lookback: pick(args.lookback, &file, "lookback")?.unwrap_or(DEFAULT_LOOKBACK),
            horizon,
            confidence: pick(args.confidence, &file, "confidence")?.unwrap_or(DEFAULT_CONFIDENCE),
            grid_points: pick(args.grid_points, &file, "grid-points")?.unwrap_or(DEFAULT_GRID_POINTS),
            states: pick(args.states, &file, "states")?.unwrap_or(DEFAULT_STATES),
            temperature_override: pick(args.temperature_override, &file, "temperature-override")?,
            temperature_window: pick(args.temperature_window, &file, "temperature-window")?
                .unwrap_or(horizon),
            units,
            mass: pick(args.mass, &file, "mass")?,
            center: pick(args.center, &file, "center")?,
            half_width: pick(args.half_width, &file, "half-width")?,
            out: pick_path(&args.out, "out").unwrap_or_else(|| PathBuf::from(".")),
        })
    }
}
