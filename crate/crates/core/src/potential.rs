//! Price grid between infinite walls and the potential sampled on it.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::marketdata::PriceSeries;

/// Conversion factors between market quantities and the physical ones used
/// by the Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UnitSystem {
    pub hbar: f64,
    pub boltzmann: f64,
    /// Price-return fraction to length.
    pub return_to_length: f64,
    /// Thousand-currency volume to mass.
    pub volume_to_mass: f64,
}

impl UnitSystem {
    pub fn new(hbar: f64, boltzmann: f64, return_to_length: f64, volume_to_mass: f64) -> Result<Self> {
        let units = Self {
            hbar,
            boltzmann,
            return_to_length,
            volume_to_mass,
        };
        for (name, value) in units.factors() {
            if !(value > 0.0) || !value.is_finite() {
                return Err(Error::domain(format!(
                    "unit factor `{name}` must be positive and finite, got {value}"
                )));
            }
        }
        Ok(units)
    }

    /// All factors equal to one.
    pub fn natural() -> Self {
        Self {
            hbar: 1.0,
            boltzmann: 1.0,
            return_to_length: 1.0,
            volume_to_mass: 1.0,
        }
    }

    fn factors(&self) -> [(&'static str, f64); 4] {
        [
            ("hbar", self.hbar),
            ("boltzmann", self.boltzmann),
            ("return_to_length", self.return_to_length),
            ("volume_to_mass", self.volume_to_mass),
        ]
    }
}

impl Default for UnitSystem {
    fn default() -> Self {
        Self::natural()
    }
}

impl fmt::Display for UnitSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if *self == Self::natural() {
            return f.write_str("natural");
        }
        let parts: Vec<String> = self
            .factors()
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect();
        f.write_str(&parts.join(","))
    }
}

/// Accepts `natural` or a comma-separated list of `name=value` overrides
/// applied on top of the natural preset, e.g.
/// `hbar=0.658,boltzmann=8.617e-5`.
impl FromStr for UnitSystem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("natural") {
            return Ok(Self::natural());
        }
        let mut units = Self::natural();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| Error::domain(format!("unit factor {part:?} is not `name=value`")))?;
            let value: f64 = value
                .trim()
                .parse()
                .map_err(|_| Error::domain(format!("unit factor {part:?} is not a number")))?;
            match key.trim() {
                "hbar" => units.hbar = value,
                "boltzmann" | "k" => units.boltzmann = value,
                "return_to_length" => units.return_to_length = value,
                "volume_to_mass" => units.volume_to_mass = value,
                other => return Err(Error::domain(format!("unknown unit factor `{other}`"))),
            }
        }
        Self::new(
            units.hbar,
            units.boltzmann,
            units.return_to_length,
            units.volume_to_mass,
        )
    }
}

/// Uniform price grid strictly between two walls. The walls themselves are
/// not grid points; the wave function vanishes there.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Grid {
    center: f64,
    half_width: f64,
    points: Vec<f64>,
    delta: f64,
}

impl Grid {
    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Spacing between neighbouring points, in price units.
    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn lower_wall(&self) -> f64 {
        self.center * (1.0 - self.half_width)
    }

    pub fn upper_wall(&self) -> f64 {
        self.center * (1.0 + self.half_width)
    }
}

/// Places `n` interior points between walls at `center * (1 ± half_width)`.
pub fn build_grid(center: f64, half_width: f64, n: usize) -> Result<Grid> {
    if !(center > 0.0) || !center.is_finite() {
        return Err(Error::domain(format!("grid center must be positive, got {center}")));
    }
    if !(half_width > 0.0 && half_width < 1.0) {
        return Err(Error::domain(format!(
            "wall half-width must lie in (0, 1), got {half_width}"
        )));
    }
    if n < 2 {
        return Err(Error::domain(format!("grid needs at least 2 points, got {n}")));
    }
    let lower = center * (1.0 - half_width);
    let delta = 2.0 * half_width * center / (n as f64 + 1.0);
    let points = (1..=n).map(|i| lower + i as f64 * delta).collect();
    Ok(Grid {
        center,
        half_width,
        points,
        delta,
    })
}

/// Potential sampled on a grid, shifted so its minimum is zero.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PotentialWell {
    grid: Grid,
    values: Vec<f64>,
}

impl PotentialWell {
    /// Builds a well from raw samples, applying the min = 0 gauge.
    pub fn new(grid: Grid, mut values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::domain(format!(
                "{} potential samples for {} grid points",
                values.len(),
                grid.len()
            )));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::domain(format!("potential sample {bad} is not finite")));
        }
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        values.iter_mut().for_each(|v| *v -= min);
        Ok(Self { grid, values })
    }

    pub fn flat(grid: Grid) -> Self {
        let values = vec![0.0; grid.len()];
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Reads a two-column `price,potential` CSV with strictly increasing prices.
pub fn parse_potential_csv(text: &str) -> Result<Vec<(f64, f64)>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| Error::Parse {
            line: 1,
            message: e.to_string(),
        })?
        .clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or_else(|| Error::Parse {
                line: 1,
                message: format!("missing required column `{name}`"),
            })
    };
    let price_col = column("price")?;
    let value_col = column("potential")?;

    let mut table: Vec<(f64, f64)> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let number = |idx: usize| -> Result<f64> {
            let raw = record.get(idx).unwrap_or_default();
            raw.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Parse {
                    line,
                    message: format!("cannot parse number {raw:?}"),
                })
        };
        let price = number(price_col)?;
        let value = number(value_col)?;
        if let Some(&(prev, _)) = table.last() {
            if price <= prev {
                return Err(Error::Parse {
                    line,
                    message: format!("price {price} does not exceed previous price {prev}"),
                });
            }
        }
        table.push((price, value));
    }
    Ok(table)
}

/// Linearly interpolates a `(price, value)` table onto the grid.
pub fn load_potential(table: &[(f64, f64)], grid: &Grid) -> Result<PotentialWell> {
    if table.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: table.len(),
        });
    }
    if table.windows(2).any(|w| !(w[1].0 > w[0].0)) {
        return Err(Error::domain("potential table prices must be strictly increasing"));
    }
    let lo = table[0].0;
    let hi = table[table.len() - 1].0;

    let mut values = Vec::with_capacity(grid.len());
    let mut seg = 0;
    for &p in grid.points() {
        if p < lo || p > hi {
            return Err(Error::Coverage { price: p, lo, hi });
        }
        while seg + 2 < table.len() && p > table[seg + 1].0 {
            seg += 1;
        }
        let (x0, y0) = table[seg];
        let (x1, y1) = table[seg + 1];
        let t = (p - x0) / (x1 - x0);
        values.push(y0 + t * (y1 - y0));
    }
    PotentialWell::new(grid.clone(), values)
}

/// Placeholder potential built from how often recent closes visited each
/// price: `V = scale * (1 - f / max f)` with `f` a Gaussian kernel density of
/// the given closes. Frequently visited prices become valleys.
///
/// This is a stand-in so the pipeline can run end to end; it is not a
/// statistical-physics estimate of the market potential.
pub fn reference_potential(
    series: &PriceSeries,
    grid: &Grid,
    bandwidth: f64,
    scale: f64,
) -> Result<PotentialWell> {
    if series.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    if !(bandwidth > 0.0) || !bandwidth.is_finite() {
        return Err(Error::domain(format!("bandwidth must be positive, got {bandwidth}")));
    }
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(Error::domain(format!("potential scale must be positive, got {scale}")));
    }

    // log-sum-exp keeps the ratio f / max f finite when every kernel underflows
    let log_density: Vec<f64> = grid
        .points()
        .iter()
        .map(|&p| {
            let exponents: Vec<f64> = series
                .closes()
                .map(|c| {
                    let z = (p - c) / bandwidth;
                    -0.5 * z * z
                })
                .collect();
            let top = exponents.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            top + exponents.iter().map(|e| (e - top).exp()).sum::<f64>().ln()
        })
        .collect();
    let peak = log_density.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let values = log_density
        .iter()
        .map(|l| scale * (1.0 - (l - peak).exp()))
        .collect();
    PotentialWell::new(grid.clone(), values)
}
