//! Implicit-shift QL iteration for real symmetric tridiagonal matrices.
//!
//! Follows the structure of the classic EISPACK `tql2` procedure: deflate
//! from the top, apply a Wilkinson-style shift, then chase the bulge with
//! Givens rotations while accumulating them into the eigenvector basis.

use crate::error::{Error, Result};

/// Eigen-decomposition of a symmetric tridiagonal matrix.
///
/// `diag` has length `n`, `offdiag` length `n - 1`. Returns the unsorted
/// eigenvalues and the matching unit eigenvectors (`vectors[j]` pairs with
/// `values[j]`). At most `max_iterations` QL sweeps are performed in total.
pub(crate) fn symmetric_tridiagonal_eigen(
    diag: &[f64],
    offdiag: &[f64],
    max_iterations: usize,
) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = diag.len();
    debug_assert_eq!(offdiag.len() + 1, n.max(1));

    let mut d = diag.to_vec();
    let mut e = vec![0.0; n];
    e[..n.saturating_sub(1)].copy_from_slice(offdiag);
    let mut z: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let mut col = vec![0.0; n];
            col[j] = 1.0;
            col
        })
        .collect();

    let eps = f64::EPSILON;
    let mut shift_total = 0.0;
    let mut scale = 0.0_f64;
    let mut iterations = 0;

    for l in 0..n {
        scale = scale.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * scale {
            m += 1;
        }

        if m > l {
            loop {
                iterations += 1;
                if iterations > max_iterations {
                    return Err(Error::Numeric(format!(
                        "tridiagonal eigensolver did not converge within {max_iterations} iterations"
                    )));
                }

                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let h = g - d[l];
                for di in &mut d[l + 2..] {
                    *di -= h;
                }
                shift_total += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    let h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);

                    let (left, right) = z.split_at_mut(i + 1);
                    let zi = &mut left[i];
                    let zi1 = &mut right[0];
                    for (a, b) in zi.iter_mut().zip(zi1.iter_mut()) {
                        let t = *b;
                        *b = s * *a + c * t;
                        *a = c * *a - s * t;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;

                if e[l].abs() <= eps * scale {
                    break;
                }
            }
        }
        d[l] += shift_total;
        e[l] = 0.0;
    }

    Ok((d, z))
}
