//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use pricewell::{build_grid, Grid, PotentialWell};

/// Cyclic Jacobi rotations on a dense symmetric matrix. Returns eigenvalues
/// ascending with unit eigenvectors (`vectors[j]` pairs with `values[j]`).
pub fn jacobi_eigen(matrix: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = matrix.len();
    let mut a: Vec<Vec<f64>> = matrix.to_vec();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();

    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let vp = row[p];
                    let vq = row[q];
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i][i].total_cmp(&a[j][j]));
    let values = order.iter().map(|&i| a[i][i]).collect();
    let vectors = order.iter().map(|&j| (0..n).map(|i| v[i][j]).collect()).collect();
    (values, vectors)
}

/// Dense copy of the `(-1, diag, -1)` tridiagonal matrix.
pub fn dense_tridiagonal(diag: &[f64]) -> Vec<Vec<f64>> {
    let n = diag.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        diag[i]
                    } else if i.abs_diff(j) == 1 {
                        -1.0
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect()
}

/// Rescales to `sum(x^2) * delta = 1` with the first sizeable entry positive.
pub fn grid_normalized(v: &[f64], delta: f64) -> Vec<f64> {
    let norm = (v.iter().map(|x| x * x).sum::<f64>() * delta).sqrt();
    let first = v.iter().find(|x| x.abs() / norm > 1e-12).copied().unwrap_or(1.0);
    let s = first.signum() / norm;
    v.iter().map(|x| x * s).collect()
}

/// Number of sign changes, ignoring entries below `tol * max|v|`.
pub fn sign_changes(v: &[f64], tol: f64) -> usize {
    let scale = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let signs: Vec<bool> = v.iter().filter(|x| x.abs() > tol * scale).map(|x| *x > 0.0).collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

/// Type-7 empirical quantile by explicit sorting.
pub fn quantile(values: &[f64], q: f64) -> f64 {
    let mut s = values.to_vec();
    s.sort_by(f64::total_cmp);
    let h = (s.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    s[lo] + (h - lo as f64) * (s[hi] - s[lo])
}

pub fn standard_grid(n: usize) -> Grid {
    build_grid(10.0, 0.15, n).unwrap()
}

/// Random well on the standard grid with a mass that puts the matrix
/// diagonal in `[2, 2 + depth]`, so energies equal matrix eigenvalues.
pub fn random_well<R: rand::Rng>(rng: &mut R, n: usize, depth: f64) -> (PotentialWell, f64) {
    let grid = standard_grid(n);
    let values = (0..n).map(|_| rng.gen_range(0.0..depth.max(f64::MIN_POSITIVE))).collect();
    let dl = grid.delta() / grid.center();
    let mass = 1.0 / (2.0 * dl * dl);
    (PotentialWell::new(grid, values).unwrap(), mass)
}

/// `exp(a)` for a small dense symmetric matrix by scaling and squaring a
/// truncated Taylor series.
pub fn expm(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let norm = a.iter().map(|row| row.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max);
    let mut squarings = 0;
    while norm / 2f64.powi(squarings) > 0.25 {
        squarings += 1;
    }
    let s = 2f64.powi(squarings);
    let scaled: Vec<Vec<f64>> = a.iter().map(|row| row.iter().map(|x| x / s).collect()).collect();
    let identity: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    let mut result = identity.clone();
    let mut term = identity;
    for k in 1..30 {
        term = matmul(&term, &scaled).into_iter().map(|row| row.into_iter().map(|x| x / k as f64).collect()).collect();
        for (r, t) in result.iter_mut().zip(&term) {
            for (x, y) in r.iter_mut().zip(t) {
                *x += y;
            }
        }
    }
    for _ in 0..squarings {
        result = matmul(&result, &result);
    }
    result
}

pub fn matmul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let m = b[0].len();
    (0..n)
        .map(|i| (0..m).map(|j| (0..b.len()).map(|k| a[i][k] * b[k][j]).sum()).collect())
        .collect()
}
