//! Finite-difference Hamiltonian on the price grid and its stationary states.
//!
//! With walls excluded from the grid, the discretized time-independent
//! equation becomes the symmetric tridiagonal eigenproblem
//!
//! ```text
//! -phi[i-1] + v[i] phi[i] - phi[i+1] = lambda phi[i],
//! v[i] = 2 + dl^2 * 2 m V(p[i]) / hbar^2
//! ```
//!
//! where `dl` is the grid spacing in length units. Energies follow as
//! `E = lambda * hbar^2 / (2 m dl^2)`.

mod ql;

use std::cmp::Ordering;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::format::sig;
use crate::potential::{Grid, PotentialWell, UnitSystem};

/// Sweeps allowed per matrix row before the solver gives up.
pub const ITERATIONS_PER_ROW: usize = 50;

/// Components at or below this magnitude are skipped by the sign convention.
const SIGN_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalMatrix {
    diag: Vec<f64>,
    offdiag: Vec<f64>,
    grid: Grid,
    mass: f64,
    delta_length: f64,
    hbar: f64,
}

impl TridiagonalMatrix {
    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    /// Always `-1`.
    pub fn offdiag(&self) -> &[f64] {
        &self.offdiag
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// Grid spacing converted to length units.
    pub fn delta_length(&self) -> f64 {
        self.delta_length
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    /// `hbar^2 / (2 m dl^2)`: converts matrix eigenvalues to energies.
    pub fn energy_scale(&self) -> f64 {
        self.hbar * self.hbar / (2.0 * self.mass * self.delta_length * self.delta_length)
    }

    /// `H x` for the dimensionless matrix.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut y = self.diag[i] * x[i];
                if i > 0 {
                    y += self.offdiag[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    y += self.offdiag[i] * x[i + 1];
                }
                y
            })
            .collect()
    }
}

/// Builds the Hamiltonian for a well and particle mass.
pub fn assemble_hamiltonian(
    well: &PotentialWell,
    mass: f64,
    units: &UnitSystem,
) -> Result<TridiagonalMatrix> {
    assemble_from_values(well.grid(), well.values(), mass, units)
}

/// Same as [`assemble_hamiltonian`] but without the min = 0 gauge on the
/// potential samples.
pub fn assemble_from_values(
    grid: &Grid,
    values: &[f64],
    mass: f64,
    units: &UnitSystem,
) -> Result<TridiagonalMatrix> {
    if !(mass > 0.0) || !mass.is_finite() {
        return Err(Error::domain(format!("particle mass must be positive, got {mass}")));
    }
    if values.len() != grid.len() {
        return Err(Error::domain(format!(
            "{} potential samples for {} grid points",
            values.len(),
            grid.len()
        )));
    }
    // positions are returns relative to the center, not raw prices
    let delta_length = units.return_to_length * grid.delta() / grid.center();
    let coupling = delta_length * delta_length * 2.0 * mass / (units.hbar * units.hbar);
    let diag = values.iter().map(|v| 2.0 + coupling * v).collect();
    Ok(TridiagonalMatrix {
        diag,
        offdiag: vec![-1.0; grid.len() - 1],
        grid: grid.clone(),
        mass,
        delta_length,
        hbar: units.hbar,
    })
}

/// Lowest energies and grid-sampled stationary states.
///
/// States are normalized so that `sum(phi^2) * delta = 1` with `delta` the
/// price spacing, and the first non-negligible component of each is positive.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    energies: Vec<f64>,
    eigenvalues: Vec<f64>,
    states: Vec<Vec<f64>>,
    grid: Grid,
    hbar: f64,
}

impl Spectrum {
    /// Assembles a spectrum from precomputed parts. States are normalized
    /// and sign-fixed here; energies must be ascending.
    pub fn from_parts(grid: Grid, energies: Vec<f64>, states: Vec<Vec<f64>>, hbar: f64) -> Result<Self> {
        if energies.is_empty() || energies.len() != states.len() {
            return Err(Error::domain(format!(
                "{} energies for {} states",
                energies.len(),
                states.len()
            )));
        }
        if energies.windows(2).any(|w| !(w[0] <= w[1])) {
            return Err(Error::domain("energies must be ascending"));
        }
        if states.iter().any(|s| s.len() != grid.len()) {
            return Err(Error::domain("state length does not match the grid"));
        }
        if !(hbar > 0.0) {
            return Err(Error::domain("hbar must be positive"));
        }
        let states = normalize_states(states, grid.delta())?;
        Ok(Self {
            eigenvalues: energies.clone(),
            energies,
            states,
            grid,
            hbar,
        })
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    /// Dimensionless eigenvalues of the tridiagonal matrix. For spectra built
    /// with [`Spectrum::from_parts`] these equal the energies.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn states(&self) -> &[Vec<f64>] {
        &self.states
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    /// Keeps the `k` lowest states.
    pub fn truncated(&self, k: usize) -> Result<Spectrum> {
        if k == 0 || k > self.len() {
            return Err(Error::domain(format!(
                "cannot keep {k} of {} states",
                self.len()
            )));
        }
        Ok(Spectrum {
            energies: self.energies[..k].to_vec(),
            eigenvalues: self.eigenvalues[..k].to_vec(),
            states: self.states[..k].to_vec(),
            grid: self.grid.clone(),
            hbar: self.hbar,
        })
    }

    /// CSV with one row per state: `index,energy,phi_at_p1,...,phi_at_pn`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,energy");
        for i in 1..=self.grid.len() {
            let _ = write!(out, ",phi_at_p{i}");
        }
        out.push('\n');
        for (idx, (energy, state)) in self.energies.iter().zip(&self.states).enumerate() {
            let _ = write!(out, "{},{}", idx + 1, sig(*energy));
            for v in state {
                out.push(',');
                out.push_str(&sig(*v));
            }
            out.push('\n');
        }
        out
    }
}

/// Solves for the `k` lowest eigenpairs.
pub fn solve_spectrum(matrix: &TridiagonalMatrix, k: usize) -> Result<Spectrum> {
    let n = matrix.len();
    if k == 0 || k > n {
        return Err(Error::domain(format!(
            "requested {k} states from a {n}-point grid"
        )));
    }

    let (values, vectors) =
        ql::symmetric_tridiagonal_eigen(&matrix.diag, &matrix.offdiag, ITERATIONS_PER_ROW * n)?;
    let vectors = normalize_states(vectors, matrix.grid.delta())?;

    let mut pairs: Vec<(f64, Vec<f64>)> = values.into_iter().zip(vectors).collect();
    pairs.sort_by(|a, b| match a.0.total_cmp(&b.0) {
        Ordering::Equal => lexicographic(&a.1, &b.1),
        other => other,
    });
    pairs.truncate(k);

    let scale = matrix.energy_scale();
    let eigenvalues: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    Ok(Spectrum {
        energies: eigenvalues.iter().map(|l| l * scale).collect(),
        eigenvalues,
        states: pairs.into_iter().map(|p| p.1).collect(),
        grid: matrix.grid.clone(),
        hbar: matrix.hbar,
    })
}

fn lexicographic(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| *o != Ordering::Equal)
        .unwrap_or(Ordering::Equal)
}

/// Scales each state to `sum(phi^2) * delta = 1` and flips it so the first
/// component with magnitude above `1e-12` is positive.
pub fn normalize_states(states: Vec<Vec<f64>>, delta: f64) -> Result<Vec<Vec<f64>>> {
    states
        .into_iter()
        .map(|mut s| {
            let norm = (s.iter().map(|x| x * x).sum::<f64>() * delta).sqrt();
            if !(norm > 0.0) || !norm.is_finite() {
                return Err(Error::Numeric("cannot normalize a zero state".into()));
            }
            let mut factor = 1.0 / norm;
            if let Some(first) = s.iter().find(|x| (x.abs() * factor) > SIGN_THRESHOLD) {
                if *first < 0.0 {
                    factor = -factor;
                }
            }
            s.iter_mut().for_each(|x| *x *= factor);
            Ok(s)
        })
        .collect()
}
