use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use log::{info, warn};
use num_complex::Complex64;
use serde_json::{json, Value};

use super::config::RunConfig;
use super::{CliError, Stage, StageExt};
use crate::format::{round_sig, sig};
use crate::forecast::{band_probability, distribution_stats, evolve, price_density, revival_period, WavePacket};
use crate::marketdata::{fluctuation_limit, log_returns, market_temperature, parse_price_csv, PriceSeries};
use crate::potential::{build_grid, load_potential, parse_potential_csv, reference_potential, Grid, PotentialWell};
use crate::spectrum::{assemble_hamiltonian, solve_spectrum, TridiagonalMatrix};
use crate::thermal::{average_energy, boltzmann_weights, two_level};

/// Placeholder bandwidth as a fraction of the wall center.
const DEFAULT_BANDWIDTH_FRACTION: f64 = 0.02;

struct Prepared {
    series: PriceSeries,
    grid: Grid,
    temperature: f64,
    temperature_estimated: bool,
    mass: f64,
    matrix: TridiagonalMatrix,
}

fn read(path: &Path, stage: Stage) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::data(stage, format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::data(Stage::Output, format!("cannot write {}: {e}", path.display())))
}

fn output_dir(config: &RunConfig) -> Result<&Path, CliError> {
    fs::create_dir_all(&config.out).map_err(|e| {
        CliError::data(Stage::Output, format!("cannot create {}: {e}", config.out.display()))
    })?;
    Ok(&config.out)
}

fn prepare(config: &RunConfig) -> Result<Prepared, CliError> {
    let text = read(&config.input, Stage::Ingest)?;
    let mut series = parse_price_csv(&text).stage(Stage::Ingest)?;
    if series.ticker().is_empty() {
        let stem = config
            .input
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        series = series.with_ticker(stem);
    }
    let last_close = series
        .last_close()
        .ok_or_else(|| CliError::data(Stage::Ingest, "price file has no rows"))?;
    info!("[ingest] {} rows for `{}`, last close {last_close}", series.len(), series.ticker());

    let half_width = match config.half_width {
        Some(hw) => hw,
        None => fluctuation_limit(&series, config.horizon, config.confidence).stage(Stage::Walls)?,
    };
    let center = config.center.unwrap_or(last_close);
    let grid = build_grid(center, half_width, config.grid_points).stage(Stage::Walls)?;
    info!(
        "[walls] center {center}, half-width {half_width:.6}, walls [{:.6}, {:.6}], delta {:.6e}, {} points",
        grid.lower_wall(),
        grid.upper_wall(),
        grid.delta(),
        grid.len()
    );

    let well = match (&config.potential, config.placeholder_potential) {
        (Some(path), false) => {
            let table = parse_potential_csv(&read(path, Stage::Potential)?).stage(Stage::Potential)?;
            load_potential(&table, &grid).stage(Stage::Potential)?
        }
        (None, true) => {
            let recent = PriceSeries::new(series.ticker(), series.tail(config.lookback).to_vec())
                .stage(Stage::Potential)?;
            let bandwidth = config.bandwidth.unwrap_or(DEFAULT_BANDWIDTH_FRACTION * center);
            warn!("[potential] using the visit-frequency placeholder, not an estimated market potential");
            reference_potential(&recent, &grid, bandwidth, config.potential_scale).stage(Stage::Potential)?
        }
        (Some(_), true) => {
            return Err(CliError::usage(
                Stage::Potential,
                "--potential and --placeholder-potential are mutually exclusive",
            ))
        }
        (None, false) => {
            return Err(CliError::usage(
                Stage::Potential,
                "no potential given: pass --potential FILE or select --placeholder-potential",
            ))
        }
    };
    log_potential(&well);

    let window = config.temperature_window;
    let (temperature, estimated) = match config.temperature_override {
        Some(t) => {
            if !(t >= 0.0) || !t.is_finite() {
                return Err(CliError::usage(
                    Stage::Temperature,
                    format!("temperature override must be non-negative, got {t}"),
                ));
            }
            (t, false)
        }
        None => {
            let returns = log_returns(&series).stage(Stage::Temperature)?;
            let t = market_temperature(&returns, &series, window, &config.units).stage(Stage::Temperature)?;
            (t.value, true)
        }
    };
    let mass = match config.mass {
        Some(m) => m,
        None => {
            let recent = series.tail(window);
            let mean_volume = recent.iter().map(|r| r.volume).sum::<f64>() / recent.len() as f64;
            config.units.volume_to_mass * mean_volume
        }
    };
    if !(mass > 0.0) || !mass.is_finite() {
        return Err(CliError::data(
            Stage::Temperature,
            format!("particle mass must be positive, got {mass} (are the volumes zero?)"),
        ));
    }
    info!(
        "[temperature] T = {temperature:.6e} ({}), mass {mass:.6e}",
        if estimated { format!("estimated over {window} days") } else { "override".to_string() }
    );

    let matrix = assemble_hamiltonian(&well, mass, &config.units).stage(Stage::Solve)?;
    Ok(Prepared {
        series,
        grid,
        temperature,
        temperature_estimated: estimated,
        mass,
        matrix,
    })
}

fn log_potential(well: &PotentialWell) {
    let max = well.values().iter().copied().fold(0.0, f64::max);
    info!("[potential] {} samples, max {max:.6e}", well.values().len());
}

/// Rounds every float in a JSON tree to the serialized precision.
fn round_json(value: Value) -> Value {
    match value {
        Value::Number(n) if n.is_f64() => n
            .as_f64()
            .and_then(|x| serde_json::Number::from_f64(round_sig(x)))
            .map(Value::Number)
            .unwrap_or(Value::Null),
        Value::Array(items) => Value::Array(items.into_iter().map(round_json).collect()),
        Value::Object(map) => Value::Object(map.into_iter().map(|(k, v)| (k, round_json(v))).collect()),
        other => other,
    }
}

pub struct ForecastOutput {
    pub distribution_csv: PathBuf,
    pub report_json: PathBuf,
}

/// Full pipeline: ingest, walls, potential, temperature, solve, thermal
/// populations, density. Writes `distribution.csv` and `report.json`.
pub fn run_forecast(config: &RunConfig) -> Result<ForecastOutput, CliError> {
    let prep = prepare(config)?;
    let n = prep.grid.len();

    // full spectrum so the truncation tail covers every dropped state
    solve_spectrum(&prep.matrix, config.states).stage(Stage::Solve)?;
    let full = solve_spectrum(&prep.matrix, n).stage(Stage::Solve)?;
    let energies = full.energies();
    info!(
        "[solve] E1 = {:.6e}{}",
        energies[0],
        energies.get(1).map(|e| format!(", E2 = {e:.6e}")).unwrap_or_default()
    );

    let kept = &energies[..config.states];
    let thermal = boltzmann_weights(kept, prep.temperature, &config.units).stage(Stage::Thermal)?;
    let dist = price_density(&full, &thermal).stage(Stage::Distribution)?;
    let two = if n >= 2 {
        Some(two_level(&full, prep.temperature, &config.units).stage(Stage::Thermal)?)
    } else {
        None
    };
    info!(
        "[thermal] T = {:.6e}, ln Z = {:.6e}, weights {:?}, tail {:.6e}",
        prep.temperature,
        thermal.ln_partition(),
        thermal.weights().iter().map(|w| round_sig(*w)).collect::<Vec<_>>(),
        dist.truncation_tail()
    );

    let stats = distribution_stats(&dist);
    let grid = &prep.grid;
    let center = grid.center();
    let inner = 0.5 * grid.half_width() * center;
    let bands: Vec<(&str, f64, f64)> = vec![
        ("below_center", grid.lower_wall(), center),
        ("above_center", center, grid.upper_wall()),
        ("inner_half", center - inner, center + inner),
    ];
    let bands: Vec<Value> = bands
        .into_iter()
        .map(|(name, lo, hi)| {
            band_probability(&dist, lo, hi).map(|p| json!({ "name": name, "lo": lo, "hi": hi, "probability": p }))
        })
        .collect::<Result<_, _>>()
        .stage(Stage::Distribution)?;
    info!(
        "[distribution] mean {:.6}, stdev {:.6}, total probability {:.12}",
        stats.mean,
        stats.stdev,
        dist.total_probability()
    );

    let report = json!({
        "version": env!("CARGO_PKG_VERSION"),
        "config": config,
        "ticker": prep.series.ticker(),
        "last_close": prep.series.last_close(),
        "grid": {
            "center": center,
            "half_width": grid.half_width(),
            "lower_wall": grid.lower_wall(),
            "upper_wall": grid.upper_wall(),
            "points": n,
            "delta": grid.delta(),
            "delta_length": prep.matrix.delta_length(),
        },
        "mass": prep.mass,
        "temperature": {
            "value": prep.temperature,
            "estimated": prep.temperature_estimated,
            "window": config.temperature_window,
        },
        "energies": kept,
        "weights": thermal.weights(),
        "ln_partition": finite_or_null(thermal.ln_partition()),
        "average_energy": average_energy(&thermal),
        "truncation_tail": dist.truncation_tail(),
        "two_level": two,
        "stats": stats,
        "bands": bands,
    });

    let dir = output_dir(config)?;
    let distribution_csv = dir.join("distribution.csv");
    let report_json = dir.join("report.json");
    write(&distribution_csv, &dist.to_csv())?;
    let mut text = serde_json::to_string_pretty(&round_json(report))
        .map_err(|e| CliError::data(Stage::Output, e.to_string()))?;
    text.push('\n');
    write(&report_json, &text)?;
    info!("[output] wrote {} and {}", distribution_csv.display(), report_json.display());

    Ok(ForecastOutput {
        distribution_csv,
        report_json,
    })
}

fn finite_or_null(x: f64) -> Value {
    serde_json::Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null)
}

/// Solves through the spectrum stage and writes `spectrum.csv` with the
/// `states` lowest eigenpairs.
pub fn run_spectrum(config: &RunConfig) -> Result<PathBuf, CliError> {
    let prep = prepare(config)?;
    let spectrum = solve_spectrum(&prep.matrix, config.states).stage(Stage::Solve)?;
    info!("[solve] energies {:?}", spectrum.energies().iter().map(|e| round_sig(*e)).collect::<Vec<_>>());
    let path = output_dir(config)?.join("spectrum.csv");
    write(&path, &spectrum.to_csv())?;
    info!("[output] wrote {}", path.display());
    Ok(path)
}

fn parse_coefficients(text: &str) -> Result<Vec<Complex64>, CliError> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|item| {
            let (re, im) = item.split_once(':').unwrap_or((item, "0"));
            match (re.trim().parse::<f64>(), im.trim().parse::<f64>()) {
                (Ok(re), Ok(im)) => Ok(Complex64::new(re, im)),
                _ => Err(CliError::usage(Stage::Config, format!("invalid coefficient {item:?}"))),
            }
        })
        .collect()
}

fn parse_times(text: &str, revival: impl Fn() -> Result<f64, CliError>) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|item| {
            if item.eq_ignore_ascii_case("revival") {
                revival()
            } else {
                item.parse::<f64>()
                    .map_err(|_| CliError::usage(Stage::Config, format!("invalid time {item:?}")))
            }
        })
        .collect()
}

/// Evolves a superposition of the lowest states and writes `evolution.csv`
/// with one `|psi|^2` column per requested time.
pub fn run_evolve(config: &RunConfig, coefficients: &str, times: &str) -> Result<PathBuf, CliError> {
    let coefficients = parse_coefficients(coefficients)?;
    if coefficients.is_empty() {
        return Err(CliError::usage(Stage::Evolve, "coefficient list is empty"));
    }
    let prep = prepare(config)?;
    let k = coefficients.len().max(2).min(prep.grid.len());
    if coefficients.len() > prep.grid.len() {
        return Err(CliError::usage(
            Stage::Evolve,
            format!("{} coefficients for a {}-point grid", coefficients.len(), prep.grid.len()),
        ));
    }
    let spectrum = solve_spectrum(&prep.matrix, k).stage(Stage::Solve)?;

    let times = parse_times(times, || revival_period(&spectrum).stage(Stage::Evolve))?;
    if times.is_empty() {
        return Err(CliError::usage(Stage::Evolve, "time list is empty"));
    }

    let (packet, norm) = WavePacket::normalized(&spectrum, coefficients).stage(Stage::Evolve)?;
    if (norm - 1.0).abs() > 1e-10 {
        warn!("[evolve] coefficients had squared norm {norm}; renormalized to 1");
    }

    let states: Vec<Vec<f64>> = times.iter().map(|&t| evolve(&packet, t).density()).collect();
    let mut out = String::from("price");
    for t in &times {
        let _ = write!(out, ",t={}", sig(*t));
    }
    out.push('\n');
    for (i, p) in spectrum.grid().points().iter().enumerate() {
        out.push_str(&sig(*p));
        for column in &states {
            out.push(',');
            out.push_str(&sig(column[i]));
        }
        out.push('\n');
    }

    let path = output_dir(config)?.join("evolution.csv");
    write(&path, &out)?;
    info!("[output] wrote {} ({} times)", path.display(), times.len());
    Ok(path)
}
