//! Canonical-ensemble populations of the stationary states.
//!
//! In the energy eigenbasis the thermal density matrix is diagonal, so a
//! [`ThermalState`] stores only the populations `rho_nn = exp(-E_n/KT) / Z`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::potential::UnitSystem;
use crate::spectrum::Spectrum;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThermalState {
    temperature: f64,
    /// Thermal energy `K * T`.
    kt: f64,
    /// `sum_n exp(-(E_n - E_1) / KT)`.
    shifted_partition: f64,
    weights: Vec<f64>,
    levels: Vec<f64>,
}

impl ThermalState {
    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    pub fn kt(&self) -> f64 {
        self.kt
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    /// Natural log of the partition function `Z = sum_n exp(-E_n / KT)`.
    /// At zero temperature this is `-inf` unless the ground energy is zero.
    pub fn ln_partition(&self) -> f64 {
        let e1 = self.levels[0];
        if self.kt == 0.0 {
            return if e1 == 0.0 {
                self.shifted_partition.ln()
            } else {
                f64::NEG_INFINITY * e1.signum()
            };
        }
        self.shifted_partition.ln() - e1 / self.kt
    }

    /// The partition function itself; may under- or overflow where
    /// [`ln_partition`](Self::ln_partition) does not.
    pub fn partition(&self) -> f64 {
        self.ln_partition().exp()
    }

    /// Partition function measured from the ground level,
    /// `Z * exp(E_1 / KT)`.
    pub fn shifted_partition(&self) -> f64 {
        self.shifted_partition
    }
}

/// Boltzmann populations of ascending `energies` at temperature `temperature`.
///
/// Exponents are taken relative to the ground level so nothing overflows.
/// At zero temperature the ground level (and any exact ties with it) share
/// the whole population.
pub fn boltzmann_weights(energies: &[f64], temperature: f64, units: &UnitSystem) -> Result<ThermalState> {
    if energies.is_empty() {
        return Err(Error::domain("no energy levels given"));
    }
    if energies.iter().any(|e| !e.is_finite()) {
        return Err(Error::domain("energy levels must be finite"));
    }
    if energies.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::domain("energy levels must be ascending"));
    }
    if !(temperature >= 0.0) || !temperature.is_finite() {
        return Err(Error::domain(format!(
            "temperature must be finite and non-negative, got {temperature}"
        )));
    }

    let kt = units.boltzmann * temperature;
    let (shifted_partition, weights) = populations(energies, kt);
    Ok(ThermalState {
        temperature,
        kt,
        shifted_partition,
        weights,
        levels: energies.to_vec(),
    })
}

/// Shifted partition function and normalized populations at thermal energy `kt`.
fn populations(energies: &[f64], kt: f64) -> (f64, Vec<f64>) {
    let ground = energies[0];
    let factors: Vec<f64> = if kt == 0.0 {
        energies
            .iter()
            .map(|&e| if e == ground { 1.0 } else { 0.0 })
            .collect()
    } else {
        energies.iter().map(|e| (-(e - ground) / kt).exp()).collect()
    };
    let z: f64 = factors.iter().sum();
    (z, factors.iter().map(|f| f / z).collect())
}

/// Population beyond the first `kept` levels of ascending `energies` at
/// thermal energy `kt`.
pub(crate) fn tail_at_kt(energies: &[f64], kept: usize, kt: f64) -> f64 {
    if kept >= energies.len() {
        return 0.0;
    }
    populations(energies, kt).1.iter().skip(kept).sum()
}

/// Thermal average `<H> = sum_n rho_nn E_n`.
pub fn average_energy(state: &ThermalState) -> f64 {
    // measured from the ground level so rounding cannot break monotonicity in T
    let ground = state.levels[0];
    ground
        + state
            .weights
            .iter()
            .zip(&state.levels)
            .map(|(w, e)| w * (e - ground))
            .sum::<f64>()
}

/// Population the full ensemble over `energies` puts on levels beyond the
/// first `kept`.
pub fn truncation_tail(energies: &[f64], kept: usize, temperature: f64, units: &UnitSystem) -> Result<f64> {
    let full = boltzmann_weights(energies, temperature, units)?;
    Ok(tail_at_kt(energies, kept, full.kt))
}

/// Ground and first excited level only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoLevelSystem {
    pub e1: f64,
    pub e2: f64,
    /// `(rho_11, rho_22)`.
    pub weights: (f64, f64),
    /// Population the full spectrum would put above the first excited level.
    pub tail: f64,
}

impl TwoLevelSystem {
    pub fn average_energy(&self) -> f64 {
        self.e1 + self.weights.1 * (self.e2 - self.e1)
    }
}

/// Reduces `spectrum` to its two lowest levels, renormalizing the
/// populations over those two.
pub fn two_level(spectrum: &Spectrum, temperature: f64, units: &UnitSystem) -> Result<TwoLevelSystem> {
    let energies = spectrum.energies();
    if energies.len() < 2 {
        return Err(Error::domain(format!(
            "two-level reduction needs 2 states, spectrum has {}",
            energies.len()
        )));
    }
    let pair = boltzmann_weights(&energies[..2], temperature, units)?;
    Ok(TwoLevelSystem {
        e1: energies[0],
        e2: energies[1],
        weights: (pair.weights[0], pair.weights[1]),
        tail: truncation_tail(energies, 2, temperature, units)?,
    })
}
