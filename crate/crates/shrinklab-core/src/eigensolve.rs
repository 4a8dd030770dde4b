//! Symmetric eigensolvers for the generalized pencil S u = lambda M u:
//! shift-invert Lanczos with full reorthogonalization for the cyclic
//! tridiagonal operators of curves, and a dense path for 2d grids.

use crate::error::{Error, Result};
use crate::numerics::{CyclicTri, CyclicTriFactor};
use nalgebra::DMatrix;

/// Smallest `k` eigenpairs of S u = lambda M u for symmetric cyclic
/// tridiagonal S (positive semidefinite) and M (positive definite).
/// Eigenvectors are returned M-normalized, eigenvalues ascending.
pub fn lanczos_smallest(
    stiff: &CyclicTri,
    mass: &CyclicTri,
    k: usize,
) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = stiff.len();
    assert_eq!(mass.len(), n);
    let k = k.min(n);
    // Shifted operator W = S + sigma M is positive definite for sigma > 0;
    // Lanczos on W^{-1} M in the M-inner product finds the bottom of the
    // pencil first.
    let sigma = 0.5;
    let w = CyclicTri::lin_comb(1.0, stiff, sigma, mass);
    let factor = CyclicTriFactor::new(&w).ok_or(Error::EigenNonConvergence { iters: 0 })?;

    let m_ip = |a: &[f64], b: &[f64]| -> f64 {
        let mut mb = vec![0.0; n];
        mass.matvec(b, &mut mb);
        a.iter().zip(&mb).map(|(x, y)| x * y).sum()
    };

    // Deterministic start vector with energy on every mode.
    let mut v0: Vec<f64> = (0..n)
        .map(|i| {
            let x = (i as f64 * 0.7311 + 0.137).sin() + 0.3;
            x
        })
        .collect();
    let n0 = m_ip(&v0, &v0).sqrt();
    for x in &mut v0 {
        *x /= n0;
    }

    let max_iters = (4 * k + 60).min(n);
    let mut basis: Vec<Vec<f64>> = vec![v0];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut scratch = vec![0.0; n];
    for j in 0..max_iters {
        // r = W^{-1} (M q_j)
        mass.matvec(&basis[j], &mut scratch);
        let mut r = vec![0.0; n];
        factor.solve(&scratch, &mut r);
        if j > 0 {
            let beta = betas[j - 1];
            for i in 0..n {
                r[i] -= beta * basis[j - 1][i];
            }
        }
        let alpha = m_ip(&basis[j], &r);
        for i in 0..n {
            r[i] -= alpha * basis[j][i];
        }
        alphas.push(alpha);
        // Full reorthogonalization (twice) keeps the basis M-orthonormal.
        for _ in 0..2 {
            for q in &basis {
                let c = m_ip(q, &r);
                for i in 0..n {
                    r[i] -= c * q[i];
                }
            }
        }
        let beta = m_ip(&r, &r).sqrt();
        if beta < 1e-13 || j + 1 == max_iters {
            break;
        }
        betas.push(beta);
        for x in &mut r {
            *x /= beta;
        }
        basis.push(r);
    }

    // Eigen decomposition of the small tridiagonal Rayleigh matrix.
    let jdim = alphas.len();
    let mut t = DMatrix::zeros(jdim, jdim);
    for i in 0..jdim {
        t[(i, i)] = alphas[i];
        if i + 1 < jdim {
            t[(i, i + 1)] = betas[i];
            t[(i + 1, i)] = betas[i];
        }
    }
    let eig = nalgebra::SymmetricEigen::new(t);
    // Largest theta of W^{-1} M corresponds to the smallest pencil
    // eigenvalue via lambda = 1/theta - sigma.
    let mut order: Vec<usize> = (0..jdim).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap()
    });
    let take = k.min(jdim);
    let mut values = Vec::with_capacity(take);
    let mut vectors = Vec::with_capacity(take);
    for &idx in order.iter().take(take) {
        let theta = eig.eigenvalues[idx];
        if theta <= 0.0 {
            return Err(Error::EigenNonConvergence { iters: jdim });
        }
        values.push(1.0 / theta - sigma);
        let y = eig.eigenvectors.column(idx);
        let mut x = vec![0.0; n];
        for (j, q) in basis.iter().take(jdim).enumerate() {
            for i in 0..n {
                x[i] += y[j] * q[i];
            }
        }
        let nx = m_ip(&x, &x).sqrt();
        for xi in &mut x {
            *xi /= nx;
        }
        vectors.push(x);
    }
    // Ascending eigenvalues.
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
    let values_sorted: Vec<f64> = idx.iter().map(|&i| values[i]).collect();
    let vectors_sorted: Vec<Vec<f64>> = idx.iter().map(|&i| vectors[i].clone()).collect();
    Ok((values_sorted, vectors_sorted))
}

/// Hard cap for the dense path (nodes), keeping runtimes desk-scale.
pub const DENSE_EIGEN_MAX_NODES: usize = 2600;

/// Smallest `k` eigenpairs of S u = lambda M u for sparse symmetric S (row
/// list form) and diagonal M, via the dense symmetric transform
/// D^{-1/2} S D^{-1/2}.
pub fn dense_smallest(
    stiff_rows: &[Vec<(usize, f64)>],
    mass_diag: &[f64],
    k: usize,
) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = mass_diag.len();
    if n > DENSE_EIGEN_MAX_NODES {
        return Err(Error::EigenProblemTooLarge {
            max: DENSE_EIGEN_MAX_NODES,
            got: n,
        });
    }
    let inv_sqrt: Vec<f64> = mass_diag.iter().map(|m| 1.0 / m.sqrt()).collect();
    let mut c: DMatrix<f64> = DMatrix::zeros(n, n);
    for (i, row) in stiff_rows.iter().enumerate() {
        for &(j, v) in row {
            c[(i, j)] += inv_sqrt[i] * v * inv_sqrt[j];
        }
    }
    // Symmetrize against assembly rounding.
    for i in 0..n {
        for j in i + 1..n {
            let avg = 0.5 * (c[(i, j)] + c[(j, i)]);
            c[(i, j)] = avg;
            c[(j, i)] = avg;
        }
    }
    let eig = nalgebra::SymmetricEigen::new(c);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        let (x, y): (f64, f64) = (eig.eigenvalues[a], eig.eigenvalues[b]);
        x.partial_cmp(&y).unwrap()
    });
    let take = k.min(n);
    let mut values = Vec::with_capacity(take);
    let mut vectors = Vec::with_capacity(take);
    for &idx in order.iter().take(take) {
        values.push(eig.eigenvalues[idx]);
        let y = eig.eigenvectors.column(idx);
        let x: Vec<f64> = (0..n).map(|i| y[i] * inv_sqrt[i]).collect();
        vectors.push(x);
    }
    Ok((values, vectors))
}

/// Residual check ||S x - lambda M x||_inf used by tests.
pub fn pencil_residual_tri(
    stiff: &CyclicTri,
    mass: &CyclicTri,
    lambda: f64,
    x: &[f64],
) -> f64 {
    let n = x.len();
    let mut sx = vec![0.0; n];
    let mut mx = vec![0.0; n];
    stiff.matvec(x, &mut sx);
    mass.matvec(x, &mut mx);
    (0..n)
        .map(|i| (sx[i] - lambda * mx[i]).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    /// Constant-coefficient circle operator: -u'' on a circle of length L.
    fn circle_pencil(n: usize, len: f64) -> (CyclicTri, CyclicTri) {
        let h = len / n as f64;
        let mut s = CyclicTri::zeros(n);
        let mut m = CyclicTri::zeros(n);
        for i in 0..n {
            s.diag[i] = 2.0 / h;
            s.off[i] = -1.0 / h;
            m.diag[i] = 10.0 * h / 12.0;
            m.off[i] = h / 12.0;
        }
        (s, m)
    }

    #[test]
    fn circle_spectrum_via_lanczos() {
        let n = 512;
        let len = TAU * std::f64::consts::SQRT_2;
        let (s, m) = circle_pencil(n, len);
        let (vals, vecs) = lanczos_smallest(&s, &m, 7).unwrap();
        // Exact: (2 pi k / L)^2 = k^2 / 2, doubly degenerate for k >= 1.
        let exact = [0.0, 0.5, 0.5, 2.0, 2.0, 4.5, 4.5];
        for (i, e) in exact.iter().enumerate() {
            assert!(
                (vals[i] - e).abs() < 1e-4,
                "eig {i}: {} vs {e}",
                vals[i]
            );
            let r = pencil_residual_tri(&s, &m, vals[i], &vecs[i]);
            assert!(r < 1e-8, "residual {r}");
        }
        // Constant eigenfunction at zero.
        let spread = vecs[0].iter().fold((f64::MAX, f64::MIN), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
        assert!((spread.1 - spread.0).abs() < 1e-8);
    }

    #[test]
    fn dense_path_matches_lanczos() {
        let n = 64;
        let (s, m) = circle_pencil(n, TAU);
        // Lump the mass for the dense comparison (diagonal M).
        let rows: Vec<Vec<(usize, f64)>> = (0..n)
            .map(|i| {
                vec![
                    ((i + n - 1) % n, s.off[(i + n - 1) % n]),
                    (i, s.diag[i]),
                    ((i + 1) % n, s.off[i]),
                ]
            })
            .collect();
        let lumped: Vec<f64> = (0..n).map(|_| TAU / n as f64).collect();
        let (vals, _) = dense_smallest(&rows, &lumped, 5).unwrap();
        for (i, e) in [0.0, 1.0, 1.0, 4.0, 4.0].iter().enumerate() {
            // Lumped mass is 2nd-order accurate: error ~ lambda (k h)^2 / 12.
            assert!((vals[i] - e).abs() < 2e-2, "eig {i}: {} vs {e}", vals[i]);
        }
    }

    #[test]
    fn dense_cap_enforced() {
        let rows = vec![vec![(0usize, 1.0)]; DENSE_EIGEN_MAX_NODES + 1];
        let mass = vec![1.0; DENSE_EIGEN_MAX_NODES + 1];
        assert!(matches!(
            dense_smallest(&rows, &mass, 1),
            Err(Error::EigenProblemTooLarge { .. })
        ));
    }
}
