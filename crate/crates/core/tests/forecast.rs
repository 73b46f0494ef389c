mod common;

use common::{dense_tridiagonal, expm, random_well, standard_grid};
use num_complex::Complex64;
use pricewell::forecast::distribution_stats_at;
use pricewell::{
    assemble_hamiltonian, band_probability, boltzmann_weights, evolve, price_density, revival_period,
    solve_spectrum, two_level, PotentialWell, Spectrum, UnitSystem, WavePacket,
};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn natural() -> UnitSystem {
    UnitSystem::natural()
}

fn random_spectrum(rng: &mut StdRng, n: usize, depth: f64) -> Spectrum {
    let (well, mass) = random_well(rng, n, depth);
    solve_spectrum(&assemble_hamiltonian(&well, mass, &natural()).unwrap(), n).unwrap()
}

fn random_temperature(rng: &mut StdRng, spectrum: &Spectrum) -> f64 {
    if rng.gen_bool(0.1) {
        return 0.0;
    }
    let gap = spectrum.energies()[1] - spectrum.energies()[0];
    gap * 10f64.powf(rng.gen_range(-3.0..3.0))
}

#[test]
fn density_is_valid_for_random_cases() {
    let mut rng = StdRng::seed_from_u64(11);
    for _ in 0..50 {
        let n = rng.gen_range(8..=60);
        let depth = rng.gen_range(0.0..8.0);
        let s = random_spectrum(&mut rng, n, depth);
        let k = rng.gen_range(1..=n);
        let t = random_temperature(&mut rng, &s);
        let thermal = boltzmann_weights(&s.energies()[..k], t, &natural()).unwrap();
        let dist = price_density(&s, &thermal).unwrap();
        assert!(dist.density().iter().all(|d| *d >= 0.0));
        assert!((dist.total_probability() - 1.0).abs() < 1e-9);
        assert!(dist.truncation_tail() >= 0.0 && dist.truncation_tail() <= 1.0);
        if k == n {
            assert_eq!(dist.truncation_tail(), 0.0);
        }
    }
}

#[test]
fn band_probabilities_add_and_grow() {
    let mut rng = StdRng::seed_from_u64(12);
    let s = random_spectrum(&mut rng, 40, 3.0);
    let thermal = boltzmann_weights(&s.energies()[..6], 0.5, &natural()).unwrap();
    let dist = price_density(&s, &thermal).unwrap();
    let grid = dist.grid();
    let delta = grid.delta();

    // cuts halfway between grid points so no point lands in two bands
    let mut cuts: Vec<f64> = (0..5).map(|_| grid.points()[rng.gen_range(0..39)] + 0.5 * delta).collect();
    cuts.sort_by(f64::total_cmp);
    let mut edges = vec![grid.lower_wall()];
    edges.extend(cuts);
    edges.push(grid.upper_wall());
    let total: f64 = edges.windows(2).map(|w| band_probability(&dist, w[0], w[1]).unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-9);

    let mut previous = 0.0;
    for hi in grid.points() {
        let p = band_probability(&dist, grid.lower_wall(), *hi).unwrap();
        assert!(p >= previous);
        previous = p;
    }
    assert!(band_probability(&dist, 3.0, 2.0).is_err());
}

#[test]
fn completeness_of_full_basis() {
    let mut rng = StdRng::seed_from_u64(13);
    let s = random_spectrum(&mut rng, 30, 5.0);
    let delta = s.grid().delta();
    for i in 0..30 {
        let column: f64 = s.states().iter().map(|phi| phi[i] * phi[i]).sum::<f64>() * delta;
        assert!((column - 1.0).abs() < 1e-8, "point {i}: {column}");
    }
    let total: f64 = s.states().iter().flatten().map(|x| x * x).sum::<f64>() * delta;
    assert!((total - 30.0).abs() < 1e-8);
}

#[test]
fn density_is_diagonal_of_thermal_operator() {
    let mut rng = StdRng::seed_from_u64(14);
    let n = 12;
    let (well, mass) = random_well(&mut rng, n, 2.0);
    let units = natural();
    let m = assemble_hamiltonian(&well, mass, &units).unwrap();
    let s = solve_spectrum(&m, n).unwrap();
    let delta = s.grid().delta();
    for kt in [0.3, 1.0, 4.0] {
        let scale = -m.energy_scale() / kt;
        let exponent: Vec<Vec<f64>> = dense_tridiagonal(m.diag())
            .into_iter()
            .map(|row| row.into_iter().map(|x| x * scale).collect())
            .collect();
        let rho = expm(&exponent);
        let trace: f64 = (0..n).map(|i| rho[i][i]).sum();

        let thermal = boltzmann_weights(s.energies(), kt, &units).unwrap();
        let dist = price_density(&s, &thermal).unwrap();
        for i in 0..n {
            let expected = rho[i][i] / trace / delta;
            assert!(
                (dist.density()[i] - expected).abs() < 1e-9 * expected.max(1.0),
                "kT {kt} point {i}: {} vs {expected}",
                dist.density()[i]
            );
        }
        assert!((thermal.partition() / trace - 1.0).abs() < 1e-10);
    }
}

#[test]
fn two_level_density_within_tail_bound() {
    // a deep central trap pushes the third level far above the second
    let grid = standard_grid(80);
    let values: Vec<f64> = grid
        .points()
        .iter()
        .map(|p| if (p - 10.0).abs() < 0.3 { 0.0 } else { 50.0 })
        .collect();
    let well = PotentialWell::new(grid, values).unwrap();
    let units = natural();
    let s = solve_spectrum(&assemble_hamiltonian(&well, 1.0, &units).unwrap(), 80).unwrap();
    let e = s.energies();
    for t in [0.1 * (e[1] - e[0]), e[1] - e[0], 5.0 * (e[1] - e[0])] {
        let two = price_density(&s, &boltzmann_weights(&e[..2], t, &units).unwrap()).unwrap();
        let five = price_density(&s, &boltzmann_weights(&e[..5], t, &units).unwrap()).unwrap();
        let max_state = s.states()[..5].iter().flatten().fold(0.0_f64, |m, x| m.max(x * x));
        let gap = two
            .density()
            .iter()
            .zip(five.density())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let reduced = two_level(&s, t, &units).unwrap();
        assert_eq!(reduced.tail, two.truncation_tail());
        assert!(gap <= reduced.tail * max_state, "gap {gap} tail {}", reduced.tail);
    }
}

fn random_packet<'a>(rng: &mut StdRng, spectrum: &'a Spectrum, len: usize) -> WavePacket<'a> {
    let c: Vec<Complex64> = (0..len)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    WavePacket::normalized(spectrum, c).unwrap().0
}

#[test]
fn evolution_preserves_norm() {
    let mut rng = StdRng::seed_from_u64(15);
    let s = random_spectrum(&mut rng, 50, 4.0);
    let packet = random_packet(&mut rng, &s, 10);
    let period = revival_period(&s).unwrap();
    let delta = s.grid().delta();
    for _ in 0..100 {
        let t = period * 10f64.powf(rng.gen_range(-2.0..2.0));
        let norm = evolve(&packet, t).norm(delta);
        assert!((norm - 1.0).abs() < 1e-9, "t {t}: {norm}");
    }
}

#[test]
fn two_state_packet_revives() {
    let mut rng = StdRng::seed_from_u64(16);
    let s = random_spectrum(&mut rng, 50, 4.0);
    let packet = random_packet(&mut rng, &s, 2);
    let period = revival_period(&s).unwrap();
    let start = evolve(&packet, 0.0).density();
    let mid = evolve(&packet, 0.5 * period).density();
    for cycles in [1.0, 2.0, 7.0] {
        let later = evolve(&packet, cycles * period).density();
        for (a, b) in start.iter().zip(&later) {
            assert!((a - b).abs() < 1e-9);
        }
    }
    // half a period apart the interference term flips sign
    let c = packet.coefficients();
    let cross = (c[0] * c[1].conj()).re;
    for i in 0..start.len() {
        let expected = -4.0 * cross * s.states()[0][i] * s.states()[1][i];
        assert!((mid[i] - start[i] - expected).abs() < 1e-9);
    }
}

fn brute_quantile(points: &[f64], masses: &[f64], delta: f64, q: f64) -> f64 {
    // bisection on the piecewise linear cumulative distribution
    let total: f64 = masses.iter().sum();
    let cdf = |x: f64| -> f64 {
        points
            .iter()
            .zip(masses)
            .map(|(p, m)| m * ((x - (p - 0.5 * delta)) / delta).clamp(0.0, 1.0))
            .sum::<f64>()
            / total
    };
    let (mut lo, mut hi) = (points[0] - 0.5 * delta, points[points.len() - 1] + 0.5 * delta);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if cdf(mid) < q {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn distribution_stats_match_brute_force() {
    let mut rng = StdRng::seed_from_u64(17);
    let s = random_spectrum(&mut rng, 16, 3.0);
    let thermal = boltzmann_weights(&s.energies()[..4], 0.8, &natural()).unwrap();
    let dist = price_density(&s, &thermal).unwrap();
    let points = dist.grid().points();
    let delta = dist.grid().delta();
    let masses: Vec<f64> = dist.density().iter().map(|d| d * delta).collect();
    let total: f64 = masses.iter().sum();
    let mean = points.iter().zip(&masses).map(|(p, m)| p * m).sum::<f64>() / total;
    let var = points.iter().zip(&masses).map(|(p, m)| m * (p - mean).powi(2)).sum::<f64>() / total;

    let fractions = [0.01, 0.05, 0.25, 0.5, 0.75, 0.95, 0.99];
    let stats = distribution_stats_at(&dist, &fractions);
    assert!((stats.mean - mean).abs() < 1e-12 * mean);
    assert!((stats.stdev - var.sqrt()).abs() < 1e-12 * mean);
    for q in &stats.quantiles {
        let expected = brute_quantile(points, &masses, delta, q.fraction);
        assert!((q.price - expected).abs() < 1e-12 * expected, "{} {} {expected}", q.fraction, q.price);
    }
    assert!(stats.quantiles.windows(2).all(|w| w[0].price <= w[1].price));
}

#[test]
fn concentrated_density_stats() {
    // a single localized state puts almost all mass on one cell
    let grid = standard_grid(21);
    let values: Vec<f64> = (0..21).map(|i| if i == 10 { 0.0 } else { 1e6 }).collect();
    let well = PotentialWell::new(grid, values).unwrap();
    let dl = well.grid().delta() / well.grid().center();
    let units = natural();
    let s = solve_spectrum(&assemble_hamiltonian(&well, 1.0 / (2.0 * dl * dl), &units).unwrap(), 1).unwrap();
    let dist = price_density(&s, &boltzmann_weights(s.energies(), 0.0, &units).unwrap()).unwrap();
    let stats = distribution_stats_at(&dist, &[0.5]);
    let center = dist.grid().points()[10];
    assert!((stats.mean - center).abs() < 1e-9);
    assert!(stats.stdev < 1e-5 * dist.grid().delta());
    assert!((stats.quantiles[0].price - center).abs() < 1e-9);
}
