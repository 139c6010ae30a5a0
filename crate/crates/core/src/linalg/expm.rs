//! Action of `exp(-i t A)` on a vector for Hermitian `A`.
//!
//! The Krylov path builds a Lanczos basis with full reorthogonalisation,
//! exponentiates the small tridiagonal projection exactly and accepts a
//! step when the a posteriori estimate `beta_m |[exp(-i tau T)]_{m,1}|` is
//! below the per-step share of the tolerance. Rejected steps are halved and
//! reuse the same basis.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::eigen::hermitian_eigen;
use super::sparse::HermitianOperator;
use super::{dot, norm};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct KrylovOptions {
    /// Bound on the accumulated truncation error estimate.
    pub tol: f64,
    /// Krylov subspace dimension per step.
    pub krylov_dim: usize,
    /// Maximum number of accepted plus rejected steps.
    pub max_steps: usize,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        KrylovOptions {
            tol: 1e-10,
            krylov_dim: 40,
            max_steps: 200_000,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct KrylovStats {
    pub accepted_steps: usize,
    pub halvings: usize,
    pub error_estimate: f64,
}

/// Computes `exp(-i t A) v`.
pub fn expm_multiply<A: HermitianOperator + ?Sized>(
    op: &A,
    v: &[Complex64],
    t: f64,
    opts: &KrylovOptions,
) -> Result<(Vec<Complex64>, KrylovStats)> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::invalid(format!("evolution time must be finite and >= 0, got {t}")));
    }
    let n = op.dim();
    assert_eq!(v.len(), n);
    let mut stats = KrylovStats::default();
    let mut w = v.to_vec();
    if t == 0.0 || norm(v) == 0.0 {
        return Ok((w, stats));
    }
    let m = opts.krylov_dim.clamp(1, n);
    let mut elapsed = 0.0;
    let mut tau = t;
    let mut attempts = 0usize;

    while elapsed < t {
        let beta0 = norm(&w);
        let basis = lanczos_basis(op, &w, beta0, m);
        let k = basis.alpha.len();
        let mut tri = DMatrix::<f64>::zeros(k, k);
        for j in 0..k {
            tri[(j, j)] = basis.alpha[j];
            if j + 1 < k {
                tri[(j, j + 1)] = basis.beta[j];
                tri[(j + 1, j)] = basis.beta[j];
            }
        }
        let eig = nalgebra::SymmetricEigen::new(tri);

        let mut grew = true;
        let coeffs = loop {
            attempts += 1;
            if attempts > opts.max_steps {
                return Err(Error::numerical(format!(
                    "Krylov exponential did not reach t={t} within {} steps (reached {elapsed}, \
                     last error estimate {:.3e})",
                    opts.max_steps, stats.error_estimate
                )));
            }
            let step = tau.min(t - elapsed);
            let y = tridiag_exp_e1(&eig, step);
            let err = if basis.invariant {
                0.0
            } else {
                beta0 * basis.tail_beta * y[k - 1].norm()
            };
            if err <= opts.tol * step / t {
                stats.error_estimate += err;
                elapsed = if t - elapsed <= step { t } else { elapsed + step };
                break y;
            }
            grew = false;
            stats.halvings += 1;
            tau = step / 2.0;
            if tau < t * 1e-14 {
                return Err(Error::numerical(format!(
                    "Krylov step collapsed below {:.3e} at t={elapsed} (error estimate {err:.3e}, \
                     tolerance {:.3e})",
                    t * 1e-14,
                    opts.tol
                )));
            }
        };
        stats.accepted_steps += 1;
        w.iter_mut().for_each(|x| *x = Complex64::new(0.0, 0.0));
        for (vec, c) in basis.vectors.iter().zip(&coeffs) {
            let c = c * beta0;
            for (wi, vi) in w.iter_mut().zip(vec) {
                *wi += c * vi;
            }
        }
        if grew {
            tau *= 2.0;
        }
    }
    Ok((w, stats))
}

struct LanczosBasis {
    vectors: Vec<Vec<Complex64>>,
    alpha: Vec<f64>,
    beta: Vec<f64>,
    tail_beta: f64,
    invariant: bool,
}

fn lanczos_basis<A: HermitianOperator + ?Sized>(
    op: &A,
    start: &[Complex64],
    start_norm: f64,
    m: usize,
) -> LanczosBasis {
    let n = op.dim();
    let mut vectors: Vec<Vec<Complex64>> = Vec::with_capacity(m);
    vectors.push(start.iter().map(|x| x / start_norm).collect());
    let mut alpha = Vec::with_capacity(m);
    let mut beta = Vec::with_capacity(m);
    let mut u = vec![Complex64::new(0.0, 0.0); n];
    let mut scale = 0.0_f64;
    for j in 0..m {
        op.apply(&vectors[j], &mut u);
        let a = dot(&vectors[j], &u).re;
        alpha.push(a);
        scale = scale.max(a.abs());
        // two passes of classical Gram-Schmidt against the whole basis
        for _ in 0..2 {
            for v in &vectors {
                let c = dot(v, &u);
                for (ui, vi) in u.iter_mut().zip(v) {
                    *ui -= c * vi;
                }
            }
        }
        let b = norm(&u);
        scale = scale.max(b);
        if b <= 1e-12 * scale.max(1.0) {
            return LanczosBasis {
                vectors,
                alpha,
                beta,
                tail_beta: 0.0,
                invariant: true,
            };
        }
        if j + 1 == m {
            return LanczosBasis {
                vectors,
                alpha,
                beta,
                tail_beta: b,
                invariant: false,
            };
        }
        beta.push(b);
        vectors.push(u.iter().map(|x| x / b).collect());
    }
    unreachable!("loop returns on its last iteration")
}

fn tridiag_exp_e1(eig: &nalgebra::SymmetricEigen<f64, nalgebra::Dyn>, step: f64) -> Vec<Complex64> {
    let q = &eig.eigenvectors;
    let k = q.nrows();
    let mut y = vec![Complex64::new(0.0, 0.0); k];
    for (l, &lambda) in eig.eigenvalues.iter().enumerate() {
        let phase = Complex64::from_polar(1.0, -lambda * step) * q[(0, l)];
        for (r, yr) in y.iter_mut().enumerate() {
            *yr += q[(r, l)] * phase;
        }
    }
    y
}

/// `exp(-i t A)` through a full eigendecomposition; reusable across times.
#[derive(Debug, Clone)]
pub struct DensePropagator {
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<Complex64>,
}

impl DensePropagator {
    pub fn new(matrix: DMatrix<Complex64>) -> Self {
        let (eigenvalues, eigenvectors) = hermitian_eigen(matrix);
        DensePropagator {
            eigenvalues,
            eigenvectors,
        }
    }

    pub fn apply(&self, v: &[Complex64], t: f64) -> Vec<Complex64> {
        let n = self.eigenvalues.len();
        let q = &self.eigenvectors;
        let mut coeff = vec![Complex64::new(0.0, 0.0); n];
        for (l, c) in coeff.iter_mut().enumerate() {
            let overlap: Complex64 = (0..n).map(|r| q[(r, l)].conj() * v[r]).sum();
            *c = overlap * Complex64::from_polar(1.0, -self.eigenvalues[l] * t);
        }
        (0..n)
            .map(|r| (0..n).map(|l| q[(r, l)] * coeff[l]).sum())
            .collect()
    }
}
