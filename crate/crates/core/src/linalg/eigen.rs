use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::sparse::{dense_from_operator, HermitianOperator};
use super::{dot, norm};
use crate::error::{Error, Result};

/// Eigenvalues (ascending) and matching eigenvector columns of a Hermitian matrix.
pub fn hermitian_eigen(matrix: DMatrix<Complex64>) -> (Vec<f64>, DMatrix<Complex64>) {
    let eig = nalgebra::SymmetricEigen::new(matrix);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(eig.eigenvectors.nrows(), order.len(), |r, c| {
        eig.eigenvectors[(r, order[c])]
    });
    (values, vectors)
}

pub fn min_eigenvalue_dense<A: HermitianOperator + ?Sized>(op: &A) -> f64 {
    let (values, _) = hermitian_eigen(dense_from_operator(op));
    values[0]
}

#[derive(Debug, Clone)]
pub struct LanczosReport {
    pub eigenvalue: f64,
    pub eigenvector: Vec<Complex64>,
    pub residual: f64,
    pub restarts: usize,
}

/// Smallest eigenvalue by explicitly restarted Lanczos.
///
/// Each cycle runs up to `krylov_dim` steps with full reorthogonalisation
/// from the current Ritz vector; convergence is declared when the residual
/// norm `|A x - theta x|` drops below `tol`.
pub fn lanczos_min_eigen<A: HermitianOperator + ?Sized>(
    op: &A,
    tol: f64,
    krylov_dim: usize,
    max_restarts: usize,
    seed: u64,
) -> Result<LanczosReport> {
    let n = op.dim();
    if n == 0 {
        return Err(Error::invalid("empty operator"));
    }
    let m = krylov_dim.clamp(1, n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x: Vec<Complex64> = (0..n)
        .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        .collect();
    let nx = norm(&x);
    x.iter_mut().for_each(|v| *v /= nx);

    let mut u = vec![Complex64::new(0.0, 0.0); n];
    let mut last_residual = f64::INFINITY;
    for restart in 0..=max_restarts {
        let mut basis: Vec<Vec<Complex64>> = vec![x.clone()];
        let mut t = DMatrix::<f64>::zeros(m, m);
        let mut k = 0;
        let mut scale = 0.0_f64;
        for j in 0..m {
            op.apply(&basis[j], &mut u);
            let a = dot(&basis[j], &u).re;
            t[(j, j)] = a;
            scale = scale.max(a.abs());
            k = j + 1;
            for _ in 0..2 {
                for v in &basis {
                    let c = dot(v, &u);
                    for (ui, vi) in u.iter_mut().zip(v) {
                        *ui -= c * vi;
                    }
                }
            }
            let b = norm(&u);
            scale = scale.max(b);
            if j + 1 == m || b <= 1e-13 * scale.max(1.0) {
                break;
            }
            t[(j, j + 1)] = b;
            t[(j + 1, j)] = b;
            basis.push(u.iter().map(|v| v / b).collect());
        }
        let tk = t.view((0, 0), (k, k)).into_owned();
        let eig = nalgebra::SymmetricEigen::new(tk);
        let lowest = (0..k)
            .min_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]))
            .unwrap();
        let theta = eig.eigenvalues[lowest];
        let mut ritz = vec![Complex64::new(0.0, 0.0); n];
        for (j, v) in basis.iter().enumerate() {
            let c = eig.eigenvectors[(j, lowest)];
            for (ri, vi) in ritz.iter_mut().zip(v) {
                *ri += vi * c;
            }
        }
        let nr = norm(&ritz);
        ritz.iter_mut().for_each(|v| *v /= nr);
        op.apply(&ritz, &mut u);
        let residual = u
            .iter()
            .zip(&ritz)
            .map(|(a, b)| (a - b * theta).norm_sqr())
            .sum::<f64>()
            .sqrt();
        last_residual = residual;
        if residual <= tol {
            return Ok(LanczosReport {
                eigenvalue: theta,
                eigenvector: ritz,
                residual,
                restarts: restart,
            });
        }
        x = ritz;
    }
    Err(Error::numerical(format!(
        "Lanczos did not converge after {max_restarts} restarts (residual {last_residual:.3e}, \
         tolerance {tol:.3e})"
    )))
}
