//! Lovász theta SDP of a graph:
//!
//! ```text
//! max eeᵀ • X   s.t.  X_ij = 0 (ij ∈ E),  tr X = 1,  X ⪰ 0
//! ```
//!
//! stated in minimization form with `C = −eeᵀ` and reporting scale `−1`.

use std::sync::Arc;

use super::graph::Graph;
use crate::problem::{SdpOperators, SdpProblem};
use crate::scalar::Scalar;

/// Edge constraints `A_k = (e_i e_jᵀ + e_j e_iᵀ)/2` followed by the trace.
pub struct StableSetOps {
    edges: Vec<(usize, usize)>,
}

impl<F: Scalar> SdpOperators<F> for StableSetOps {
    fn apply_objective(&self, v: &[F], out: &mut [F]) {
        let s = v.iter().fold(F::zero(), |a, &x| a + x);
        out.fill(-s);
    }

    fn apply_adjoint(&self, p: &[f64], v: &[F], out: &mut [F]) {
        let tr = p[self.edges.len()];
        for (o, &x) in out.iter_mut().zip(v) {
            *o = x * F::from_real(tr);
        }
        for (&(i, j), &pk) in self.edges.iter().zip(p) {
            let h = F::from_real(0.5 * pk);
            out[i] += h * v[j];
            out[j] += h * v[i];
        }
    }

    fn quadratic_constraint(&self, y: &[F], out: &mut [f64]) {
        for (o, &(i, j)) in out.iter_mut().zip(&self.edges) {
            *o = (y[i] * y[j].conjugate()).real();
        }
        out[self.edges.len()] = crate::scalar::vec::norm_sq(y);
    }
}

pub fn build_stable_set(g: &Graph) -> SdpProblem<f64> {
    build_stable_set_over(g)
}

/// [`build_stable_set`] over an arbitrary field (the optimum is real).
pub fn build_stable_set_over<F: Scalar>(g: &Graph) -> SdpProblem<F> {
    let m = g.edges().len() + 1;
    let mut b = vec![0.0; m];
    b[m - 1] = 1.0;
    let ops = StableSetOps {
        edges: g.edges().iter().map(|&(i, j)| (i - 1, j - 1)).collect(),
    };
    SdpProblem::new(g.n(), b, 1.0, Arc::new(ops), Some(g.n() as f64))
        .expect("valid by construction")
        .with_objective_scale(-1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factor::Factor;

    #[test]
    fn single_edge_shapes() {
        let p = build_stable_set(&Graph::new(2, [(1, 2)]).unwrap());
        assert_eq!((p.n(), p.m()), (2, 2));
        assert_eq!(p.b(), &[0.0, 1.0]);
        assert_eq!(p.tau(), 1.0);
        assert_eq!(p.objective_scale, -1.0);
    }

    #[test]
    fn objective_is_minus_all_ones() {
        let p = build_stable_set(&Graph::empty(3).unwrap());
        let mut out = [0.0; 3];
        p.apply_objective(&[1.0, 2.0, 3.0], &mut out);
        assert_eq!(out, [-6.0; 3]);
        let y = Factor::from_vector(vec![1.0, 1.0, 1.0]);
        assert_eq!(p.objective_value(&y).unwrap(), -9.0);
        assert!((p.c_norm() - 3.0).abs() < 1e-15);
    }

    #[test]
    fn edge_constraint_reads_off_diagonal() {
        let p = build_stable_set(&Graph::cycle(5).unwrap());
        let y = [1.0, 2.0, 0.0, 0.0, 3.0];
        let q = p.q_a(&y);
        assert_eq!(q.len(), 6);
        assert_eq!(q[0], 2.0); // (1,2)
        assert_eq!(q[1], 3.0); // (1,5)
        assert_eq!(q[5], 14.0);
    }
}
