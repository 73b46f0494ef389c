//! Thermal price density, its summaries, and coherent evolution of a
//! superposition of stationary states.

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::format::sig;
use crate::potential::Grid;
use crate::spectrum::Spectrum;
use crate::thermal::{tail_at_kt, ThermalState};

/// Price density sampled on the grid, normalized so `sum(density) * delta = 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PriceDistribution {
    grid: Grid,
    density: Vec<f64>,
    truncation_tail: f64,
}

impl PriceDistribution {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn density(&self) -> &[f64] {
        &self.density
    }

    /// Population the full spectrum assigns to states left out of the mixture.
    pub fn truncation_tail(&self) -> f64 {
        self.truncation_tail
    }

    /// Discrete integral of the density over the whole grid.
    pub fn total_probability(&self) -> f64 {
        self.density.iter().sum::<f64>() * self.grid.delta()
    }

    /// CSV with `price,density` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("price,density\n");
        for (p, d) in self.grid.points().iter().zip(&self.density) {
            let _ = writeln!(out, "{},{}", sig(*p), sig(*d));
        }
        out
    }
}

/// Mixes the stationary densities `phi_n^2` with the thermal populations.
///
/// `thermal` must have been computed from the leading energies of
/// `spectrum`. Any further states in `spectrum` only contribute to the
/// reported truncation tail.
pub fn price_density(spectrum: &Spectrum, thermal: &ThermalState) -> Result<PriceDistribution> {
    let levels = thermal.levels();
    let energies = spectrum.energies();
    if levels.len() > energies.len() {
        return Err(Error::domain(format!(
            "{} thermal levels but only {} states",
            levels.len(),
            energies.len()
        )));
    }
    for (i, (level, energy)) in levels.iter().zip(energies).enumerate() {
        if (level - energy).abs() > 1e-12 * energy.abs().max(level.abs()).max(f64::MIN_POSITIVE) {
            return Err(Error::domain(format!(
                "thermal level {} ({level}) does not match state energy {energy}",
                i + 1
            )));
        }
    }

    let n = spectrum.grid().len();
    let mut density = vec![0.0; n];
    for (w, state) in thermal.weights().iter().zip(spectrum.states()) {
        for (d, phi) in density.iter_mut().zip(state) {
            *d += w * phi * phi;
        }
    }

    Ok(PriceDistribution {
        grid: spectrum.grid().clone(),
        density,
        truncation_tail: tail_at_kt(energies, levels.len(), thermal.kt()),
    })
}

/// Probability of the closed price band `[lo, hi]`.
pub fn band_probability(dist: &PriceDistribution, lo: f64, hi: f64) -> Result<f64> {
    if !(lo <= hi) {
        return Err(Error::domain(format!("band [{lo}, {hi}] is empty")));
    }
    let mass: f64 = dist
        .grid
        .points()
        .iter()
        .zip(&dist.density)
        .filter(|(p, _)| **p >= lo && **p <= hi)
        .map(|(_, d)| d)
        .sum();
    Ok((mass * dist.grid.delta()).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Quantile {
    pub fraction: f64,
    pub price: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistributionStats {
    pub mean: f64,
    pub stdev: f64,
    pub quantiles: Vec<Quantile>,
}

pub const DEFAULT_QUANTILES: [f64; 5] = [0.05, 0.25, 0.5, 0.75, 0.95];

/// Mean, standard deviation and the [`DEFAULT_QUANTILES`].
pub fn distribution_stats(dist: &PriceDistribution) -> DistributionStats {
    distribution_stats_at(dist, &DEFAULT_QUANTILES)
}

/// Moments use the point masses `density * delta` (divided by their total,
/// which is one up to rounding). Quantiles invert the cumulative sum: each
/// point's mass is spread over its cell `[p - delta/2, p + delta/2]`, so the
/// cumulative probability is linear between cell edges.
pub fn distribution_stats_at(dist: &PriceDistribution, fractions: &[f64]) -> DistributionStats {
    let points = dist.grid.points();
    let delta = dist.grid.delta();
    let masses: Vec<f64> = dist.density.iter().map(|d| d * delta).collect();
    let total: f64 = masses.iter().sum();

    let mean = points.iter().zip(&masses).map(|(p, m)| p * m).sum::<f64>() / total;
    let variance = points
        .iter()
        .zip(&masses)
        .map(|(p, m)| m * (p - mean) * (p - mean))
        .sum::<f64>()
        / total;

    let mut cumulative = Vec::with_capacity(masses.len());
    let mut acc = 0.0;
    for m in &masses {
        acc += m;
        cumulative.push(acc / total);
    }

    let quantiles = fractions
        .iter()
        .map(|&q| {
            let i = cumulative.partition_point(|&c| c < q).min(points.len() - 1);
            let x0 = points[i] - 0.5 * delta;
            let c0 = if i == 0 { 0.0 } else { cumulative[i - 1] };
            let (x1, c1) = (points[i] + 0.5 * delta, cumulative[i]);
            let price = if c1 > c0 {
                x0 + (q - c0) / (c1 - c0) * (x1 - x0)
            } else {
                x1
            };
            Quantile { fraction: q, price }
        })
        .collect();

    DistributionStats {
        mean,
        stdev: variance.max(0.0).sqrt(),
        quantiles,
    }
}

/// Superposition `sum_n c_n phi_n` of the leading stationary states.
#[derive(Debug, Clone, PartialEq)]
pub struct WavePacket<'a> {
    coefficients: Vec<Complex64>,
    spectrum: &'a Spectrum,
}

const PACKET_NORM_TOLERANCE: f64 = 1e-10;

impl<'a> WavePacket<'a> {
    /// Requires `sum |c_n|^2 = 1` to within `1e-10`.
    pub fn new(spectrum: &'a Spectrum, coefficients: Vec<Complex64>) -> Result<Self> {
        let norm = Self::check(spectrum, &coefficients)?;
        if (norm - 1.0).abs() > PACKET_NORM_TOLERANCE {
            return Err(Error::domain(format!(
                "packet coefficients have squared norm {norm}, expected 1"
            )));
        }
        Ok(Self {
            coefficients,
            spectrum,
        })
    }

    /// Rescales the coefficients to unit norm. Also returns the squared norm
    /// they had before.
    pub fn normalized(spectrum: &'a Spectrum, mut coefficients: Vec<Complex64>) -> Result<(Self, f64)> {
        let norm = Self::check(spectrum, &coefficients)?;
        if !(norm > 0.0) {
            return Err(Error::domain("packet coefficients are all zero"));
        }
        let scale = norm.sqrt().recip();
        coefficients.iter_mut().for_each(|c| *c *= scale);
        Ok((
            Self {
                coefficients,
                spectrum,
            },
            norm,
        ))
    }

    fn check(spectrum: &Spectrum, coefficients: &[Complex64]) -> Result<f64> {
        if coefficients.is_empty() {
            return Err(Error::domain("packet needs at least one coefficient"));
        }
        if coefficients.len() > spectrum.len() {
            return Err(Error::domain(format!(
                "{} coefficients for {} stationary states",
                coefficients.len(),
                spectrum.len()
            )));
        }
        let norm: f64 = coefficients.iter().map(|c| c.norm_sqr()).sum();
        if !norm.is_finite() {
            return Err(Error::domain("packet coefficients must be finite"));
        }
        Ok(norm)
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn spectrum(&self) -> &Spectrum {
        self.spectrum
    }
}

/// Wave function on the grid at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolvedState {
    pub time: f64,
    pub amplitudes: Vec<Complex64>,
}

impl EvolvedState {
    /// `|psi(p_i, t)|^2`.
    pub fn density(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// `sum |psi|^2 * delta`.
    pub fn norm(&self, delta: f64) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() * delta
    }
}

/// `psi(p, t) = sum_n c_n phi_n(p) exp(-i E_n t / hbar)`.
pub fn evolve(packet: &WavePacket<'_>, time: f64) -> EvolvedState {
    let spectrum = packet.spectrum;
    let mut amplitudes = vec![Complex64::new(0.0, 0.0); spectrum.grid().len()];
    for ((c, energy), state) in packet
        .coefficients
        .iter()
        .zip(spectrum.energies())
        .zip(spectrum.states())
    {
        let phase = Complex64::from_polar(1.0, -energy * time / spectrum.hbar());
        let amp = c * phase;
        for (a, phi) in amplitudes.iter_mut().zip(state) {
            *a += amp * phi;
        }
    }
    EvolvedState { time, amplitudes }
}

/// `2 pi hbar / (E_2 - E_1)`: after this time a packet built from the two
/// lowest states has the same density again.
pub fn revival_period(spectrum: &Spectrum) -> Result<f64> {
    let e = spectrum.energies();
    if e.len() < 2 {
        return Err(Error::domain("revival period needs two states"));
    }
    let gap = e[1] - e[0];
    if !(gap > 0.0) {
        return Err(Error::domain("lowest two levels are degenerate"));
    }
    Ok(2.0 * std::f64::consts::PI * spectrum.hbar() / gap)
}
