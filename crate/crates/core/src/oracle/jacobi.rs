//! Cyclic Jacobi eigendecomposition of dense Hermitian matrices.
//!
//! Each rotation first removes the phase of the pivot `a_pq` with a diagonal
//! unitary, then applies a real plane rotation that annihilates it.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone)]
pub struct DenseEig<F: Scalar> {
    /// Ascending eigenvalues.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns, in the order of `values`.
    pub vectors: DMatrix<F>,
}

impl<F: Scalar> DenseEig<F> {
    pub fn min(&self) -> (f64, Vec<F>) {
        (self.values[0], self.vectors.column(0).iter().copied().collect())
    }

    /// `Q diag(f(λ)) Qᴴ`
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> DMatrix<F> {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for (j, &l) in self.values.iter().enumerate() {
            let w = F::from_real(f(l));
            scaled.column_mut(j).iter_mut().for_each(|x| *x *= w);
        }
        let mut out = DMatrix::zeros(n, n);
        out.gemm(F::one(), &scaled, &self.vectors.adjoint(), F::zero());
        out
    }
}

const MAX_SWEEPS: usize = 60;

/// Eigendecomposition of the Hermitian part of `a`, iterating until the
/// off-diagonal Frobenius norm is at most `tol · ‖a‖_F`.
pub fn jacobi_eigh<F: Scalar>(a: &DMatrix<F>, tol: f64) -> Result<DenseEig<F>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::Dimension {
            what: "square matrix",
            expected: n,
            found: a.ncols(),
        });
    }
    let mut m = (a + a.adjoint()) * F::from_real(0.5);
    let mut v = DMatrix::<F>::identity(n, n);
    let scale = m.norm().max(f64::MIN_POSITIVE);
    let mut converged = n <= 1;
    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0;
        for j in 0..n {
            for i in 0..n {
                if i != j {
                    off += m[(i, j)].modulus_squared();
                }
            }
        }
        if off.sqrt() <= tol * scale {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut m, &mut v, p, q, scale);
            }
        }
    }
    if !converged {
        return Err(Error::IterationCap {
            method: "Jacobi eigensolver",
            cap: MAX_SWEEPS,
            best: f64::NAN,
        });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].real().total_cmp(&m[(j, j)].real()));
    let values = order.iter().map(|&i| m[(i, i)].real()).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(DenseEig { values, vectors })
}

fn rotate<F: Scalar>(m: &mut DMatrix<F>, v: &mut DMatrix<F>, p: usize, q: usize, scale: f64) {
    let n = m.nrows();
    let b = m[(p, q)];
    let ab = b.modulus();
    if ab <= 1e-300 || ab <= 1e-30 * scale {
        return;
    }
    // make a_pq real positive: column q ← w·column q, row q ← w̄·row q
    let w = b.conjugate() * F::from_real(1.0 / ab);
    if w != F::one() {
        for k in 0..n {
            m[(k, q)] *= w;
            v[(k, q)] *= w;
        }
        let wc = w.conjugate();
        for k in 0..n {
            m[(q, k)] *= wc;
        }
    }
    let app = m[(p, p)].real();
    let aqq = m[(q, q)].real();
    let theta = (aqq - app) / (2.0 * ab);
    let t = if theta >= 0.0 { 1.0 } else { -1.0 } / (theta.abs() + (theta * theta + 1.0).sqrt());
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let (cf, sf) = (F::from_real(c), F::from_real(s));
    for k in 0..n {
        let (akp, akq) = (m[(k, p)], m[(k, q)]);
        m[(k, p)] = cf * akp - sf * akq;
        m[(k, q)] = sf * akp + cf * akq;
        let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
        v[(k, p)] = cf * vkp - sf * vkq;
        v[(k, q)] = sf * vkp + cf * vkq;
    }
    for k in 0..n {
        let (apk, aqk) = (m[(p, k)], m[(q, k)]);
        m[(p, k)] = cf * apk - sf * aqk;
        m[(q, k)] = sf * apk + cf * aqk;
    }
    m[(p, q)] = F::zero();
    m[(q, p)] = F::zero();
    m[(p, p)] = F::from_real(m[(p, p)].real());
    m[(q, q)] = F::from_real(m[(q, q)].real());
}
