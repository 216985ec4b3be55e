//! Dense representation of an SDP, recovered from its callbacks.

use std::sync::Arc;

use nalgebra::DMatrix;

use super::jacobi::jacobi_eigh;
use crate::error::{Error, Result};
use crate::problem::{SdpOperators, SdpProblem};
use crate::scalar::{vec, Scalar};

/// Size guardrail for dense reconstruction.
pub const MAX_DENSE_N: usize = 200;

/// `M • N = Re tr(Mᴴ N)`
pub fn inner<F: Scalar>(a: &DMatrix<F>, b: &DMatrix<F>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x.conjugate() * *y).real()).sum()
}

#[derive(Debug, Clone)]
pub struct DenseSdp<F: Scalar> {
    pub c: DMatrix<F>,
    pub a: Vec<DMatrix<F>>,
    pub b: Vec<f64>,
    pub tau: f64,
}

impl<F: Scalar> DenseSdp<F> {
    pub fn n(&self) -> usize {
        self.c.nrows()
    }

    pub fn m(&self) -> usize {
        self.a.len()
    }

    /// `A(X)`
    pub fn apply_a(&self, x: &DMatrix<F>) -> Vec<f64> {
        self.a.iter().map(|ak| inner(ak, x)).collect()
    }

    /// `A* p = Σ p_k A_k`
    pub fn adjoint(&self, p: &[f64]) -> DMatrix<F> {
        let n = self.n();
        let mut out = DMatrix::zeros(n, n);
        for (ak, &pk) in self.a.iter().zip(p) {
            out += ak * F::from_real(pk);
        }
        out
    }

    /// `‖A‖² = λ_max(Gram)` with `Gram_kl = A_k • A_l`.
    pub fn operator_norm_sq(&self) -> Result<f64> {
        let m = self.m();
        if m == 0 {
            return Ok(0.0);
        }
        let gram = DMatrix::<f64>::from_fn(m, m, |k, l| inner(&self.a[k], &self.a[l]));
        let e = jacobi_eigh(&gram, 1e-13)?;
        Ok(e.values[m - 1].max(0.0))
    }

    /// Largest deviation from Hermitian symmetry among `C` and the `A_k`.
    pub fn hermitian_defect(&self) -> f64 {
        std::iter::once(&self.c)
            .chain(&self.a)
            .map(|m| (m - m.adjoint()).norm())
            .fold(0.0, f64::max)
    }

    /// A matrix-free problem backed by these dense matrices.
    pub fn to_problem(&self) -> Result<SdpProblem<F>> {
        let c_norm = self.c.norm();
        let ops = DenseOps {
            c: self.c.clone(),
            a: self.a.clone(),
        };
        SdpProblem::new(self.n(), self.b.clone(), self.tau, Arc::new(ops), Some(c_norm))
    }
}

struct DenseOps<F: Scalar> {
    c: DMatrix<F>,
    a: Vec<DMatrix<F>>,
}

fn matvec<F: Scalar>(m: &DMatrix<F>, v: &[F], out: &mut [F]) {
    out.fill(F::zero());
    for (j, &x) in v.iter().enumerate() {
        for (o, &mij) in out.iter_mut().zip(m.column(j).iter()) {
            *o += mij * x;
        }
    }
}

impl<F: Scalar> SdpOperators<F> for DenseOps<F> {
    fn apply_objective(&self, v: &[F], out: &mut [F]) {
        matvec(&self.c, v, out)
    }

    fn apply_adjoint(&self, p: &[f64], v: &[F], out: &mut [F]) {
        let mut tmp = vec![F::zero(); v.len()];
        out.fill(F::zero());
        for (ak, &pk) in self.a.iter().zip(p) {
            if pk != 0.0 {
                matvec(ak, v, &mut tmp);
                vec::axpy_real(pk, &tmp, out);
            }
        }
    }

    fn quadratic_constraint(&self, y: &[F], out: &mut [f64]) {
        let mut tmp = vec![F::zero(); y.len()];
        for (o, ak) in out.iter_mut().zip(&self.a) {
            matvec(ak, y, &mut tmp);
            *o = vec::re_dot(y, &tmp);
        }
    }
}

/// Rebuilds `C` column by column and each `A_k` by polarization of `q_A`:
/// `A_ii = q(e_i)`, `2 Re A_ij = q(e_i + e_j) − q(e_i) − q(e_j)` and, over
/// the complex field, `2 Im A_ij = −(q(e_i + i e_j) − q(e_i) − q(e_j))`.
pub fn densify<F: Scalar>(problem: &SdpProblem<F>) -> Result<DenseSdp<F>> {
    let n = problem.n();
    let m = problem.m();
    if n > MAX_DENSE_N {
        return Err(Error::TooLarge(format!("n = {n} exceeds the dense limit {MAX_DENSE_N}")));
    }
    let mut c = DMatrix::zeros(n, n);
    let mut e = vec![F::zero(); n];
    let mut col = vec![F::zero(); n];
    for j in 0..n {
        e[j] = F::one();
        problem.apply_objective(&e, &mut col);
        c.column_mut(j).iter_mut().zip(&col).for_each(|(d, s)| *d = *s);
        e[j] = F::zero();
    }

    let diag: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            e[i] = F::one();
            let q = problem.q_a(&e);
            e[i] = F::zero();
            q
        })
        .collect();
    let mut a = vec![DMatrix::<F>::zeros(n, n); m];
    for i in 0..n {
        for (k, ak) in a.iter_mut().enumerate() {
            ak[(i, i)] = F::from_real(diag[i][k]);
        }
    }
    let imag_unit = F::from_parts(0.0, 1.0);
    let complex = F::FIELD == crate::scalar::Field::Complex;
    for i in 0..n {
        for j in i + 1..n {
            e[i] = F::one();
            e[j] = F::one();
            let qs = problem.q_a(&e);
            let qi = if complex {
                e[j] = imag_unit;
                problem.q_a(&e)
            } else {
                Vec::new()
            };
            e[i] = F::zero();
            e[j] = F::zero();
            for (k, ak) in a.iter_mut().enumerate() {
                let re = 0.5 * (qs[k] - diag[i][k] - diag[j][k]);
                let im = if complex {
                    -0.5 * (qi[k] - diag[i][k] - diag[j][k])
                } else {
                    0.0
                };
                let z = F::from_parts(re, im);
                ak[(i, j)] = z;
                ak[(j, i)] = z.conjugate();
            }
        }
    }
    Ok(DenseSdp {
        c,
        a,
        b: problem.b().to_vec(),
        tau: problem.tau(),
    })
}

/// Euclidean projection onto `Δ_τ = {X ⪰ 0 : tr X ≤ τ}`.
pub fn project_spectraplex<F: Scalar>(x: &DMatrix<F>, tau: f64) -> Result<DMatrix<F>> {
    let e = jacobi_eigh(x, 1e-13)?;
    let pos: f64 = e.values.iter().map(|l| l.max(0.0)).sum();
    if pos <= tau {
        return Ok(e.reconstruct_with(|l| l.max(0.0)));
    }
    let shift = simplex_shift(&e.values, tau);
    Ok(e.reconstruct_with(|l| (l - shift).max(0.0)))
}

/// `μ` with `Σ max(λ_i − μ, 0) = τ` (assumes `Σ max(λ_i, 0) > τ`).
fn simplex_shift(values: &[f64], tau: f64) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut acc = 0.0;
    let mut mu = 0.0;
    for (k, &l) in sorted.iter().enumerate() {
        acc += l;
        let cand = (acc - tau) / (k + 1) as f64;
        if l - cand > 0.0 {
            mu = cand;
        } else {
            break;
        }
    }
    mu
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factor::Factor;
    use crate::problems::{build_stable_set, Graph};
    use nalgebra::DVector;

    #[test]
    fn single_edge_stable_set() {
        let d = densify(&build_stable_set(&Graph::new(2, [(1, 2)]).unwrap())).unwrap();
        assert_eq!(d.c, DMatrix::from_element(2, 2, -1.0));
        assert_eq!(d.a[0], DMatrix::from_row_slice(2, 2, &[0.0, 0.5, 0.5, 0.0]));
        assert_eq!(d.a[1], DMatrix::identity(2, 2));
    }

    #[test]
    fn round_trip_through_dense_ops() {
        let d = densify(&build_stable_set(&Graph::cycle(5).unwrap())).unwrap();
        let p = d.to_problem().unwrap();
        let y = Factor::from_vector(vec![0.1, -0.4, 0.3, 0.2, 0.5]);
        let x = y.outer();
        let lhs = p.apply_constraint(&y).unwrap();
        for (a, b) in lhs.iter().zip(d.apply_a(&x)) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn projection_properties() {
        let x = DMatrix::from_diagonal(&DVector::from_row_slice(&[2.0, 0.5, -1.0]));
        let p = project_spectraplex(&x, 1.0).unwrap();
        // λ = (2, 0.5, −1) → shift 1 → (1, 0, 0)
        assert!((p[(0, 0)] - 1.0).abs() < 1e-14);
        assert!(p[(1, 1)].abs() < 1e-14 && p[(2, 2)].abs() < 1e-14);
        let inside = DMatrix::from_diagonal(&DVector::from_row_slice(&[0.2, 0.3, 0.0]));
        assert!((project_spectraplex(&inside, 1.0).unwrap() - &inside).norm() < 1e-14);
    }

    #[test]
    fn simplex_shift_solves_equation() {
        let vals = [3.0, 1.0, 0.2, -4.0];
        let mu = simplex_shift(&vals, 2.0);
        let s: f64 = vals.iter().map(|l| (l - mu).max(0.0)).sum();
        assert!((s - 2.0).abs() < 1e-14);
    }
}
