//! Price distributions from a particle-in-a-well model.
//!
//! A stock's price is treated as the position of a quantum particle confined
//! between two infinite walls placed at the statistically attainable price
//! extremes. The stationary states of the finite-difference Hamiltonian are
//! weighted with canonical populations at a market temperature derived from
//! returns and volumes, giving a thermal density over prices.
//!
//! The pipeline, module by module:
//!
//! 1. [`marketdata`]: parse closes and volumes, compute log returns, the
//!    market temperature and the wall half-width.
//! 2. [`potential`]: lay out the grid and sample the well-bottom potential.
//! 3. [`spectrum`]: assemble the tridiagonal Hamiltonian and solve it.
//! 4. [`thermal`]: Boltzmann populations, partition function, mean energy.
//! 5. [`forecast`]: mix the state densities, summarize, evolve packets.

// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod forecast;
pub mod format;
pub mod marketdata;
pub mod potential;
pub mod spectrum;
pub mod thermal;

pub use error::{Error, ErrorKind, Result};
pub use forecast::{
    band_probability, distribution_stats, evolve, price_density, revival_period, DistributionStats,
    EvolvedState, PriceDistribution, WavePacket,
};
pub use marketdata::{
    fluctuation_limit, log_returns, market_temperature, parse_price_csv, PriceRow, PriceSeries,
    ReturnSeries, Temperature,
};
pub use potential::{
    build_grid, load_potential, parse_potential_csv, reference_potential, Grid, PotentialWell,
    UnitSystem,
};
pub use spectrum::{assemble_hamiltonian, normalize_states, solve_spectrum, Spectrum, TridiagonalMatrix};
pub use thermal::{average_energy, boltzmann_weights, two_level, ThermalState, TwoLevelSystem};
