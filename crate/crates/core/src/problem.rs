//! Matrix-free description of
//!
//! ```text
//! min C • X   s.t.  A(X) = b,  tr X ≤ τ,  X ⪰ 0,  X ∈ Sⁿ(F)
//! ```
//!
//! The data enter only through three routines: `v ↦ C v`,
//! `(p, v) ↦ (A*p) v` and the quadratic map `q_A(y) = A(y yᴴ)`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::factor::Factor;
use crate::operator::LinearOperator;
use crate::scalar::{vec, Field, Scalar};

/// Operator callbacks of an SDP. Implementations must be re-entrant.
pub trait SdpOperators<F: Scalar>: Send + Sync {
    /// `out = C v`
    fn apply_objective(&self, v: &[F], out: &mut [F]);

    /// `out = (A* p) v`
    fn apply_adjoint(&self, p: &[f64], v: &[F], out: &mut [F]);

    /// `out = A(y yᴴ)`
    fn quadratic_constraint(&self, y: &[F], out: &mut [f64]);
}

#[derive(Clone)]
pub struct SdpProblem<F: Scalar> {
    n: usize,
    m: usize,
    tau: f64,
    b: Vec<f64>,
    /// Reported objective is `objective_scale · C • X` (e.g. `-1` for a
    /// maximization stated in min form).
    pub objective_scale: f64,
    c_norm: f64,
    ops: Arc<dyn SdpOperators<F>>,
}

impl<F: Scalar> fmt::Debug for SdpProblem<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SdpProblem")
            .field("field", &F::FIELD)
            .field("n", &self.n)
            .field("m", &self.m)
            .field("tau", &self.tau)
            .finish()
    }
}

impl<F: Scalar> SdpProblem<F> {
    /// `c_norm` is `‖C‖_F`; pass `None` to compute it from `n` applications of
    /// `C` to basis vectors.
    pub fn new(
        n: usize,
        b: Vec<f64>,
        tau: f64,
        ops: Arc<dyn SdpOperators<F>>,
        c_norm: Option<f64>,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("n must be positive".into()));
        }
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::InvalidArgument(format!("trace bound {tau} must be positive")));
        }
        if b.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("b"));
        }
        let c_norm = match c_norm {
            Some(c) => c,
            None => {
                let mut e = vec![F::zero(); n];
                let mut col = vec![F::zero(); n];
                let mut acc = 0.0;
                for j in 0..n {
                    e[j] = F::one();
                    ops.apply_objective(&e, &mut col);
                    acc += vec::norm_sq(&col);
                    e[j] = F::zero();
                }
                acc.sqrt()
            }
        };
        Ok(SdpProblem {
            n,
            m: b.len(),
            tau,
            b,
            objective_scale: 1.0,
            c_norm,
            ops,
        })
    }

    /// Builds a problem from three closures.
    pub fn from_callbacks<C, D, Q>(n: usize, b: Vec<f64>, tau: f64, c: C, adj: D, q: Q) -> Result<Self>
    where
        C: Fn(&[F], &mut [F]) + Send + Sync + 'static,
        D: Fn(&[f64], &[F], &mut [F]) + Send + Sync + 'static,
        Q: Fn(&[F], &mut [f64]) + Send + Sync + 'static,
    {
        let ops = Arc::new(Callbacks { c, adj, q });
        Self::new(n, b, tau, ops, None)
    }

    pub fn with_objective_scale(mut self, scale: f64) -> Self {
        self.objective_scale = scale;
        self
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn tau(&self) -> f64 {
        self.tau
    }

    #[inline]
    pub fn b(&self) -> &[f64] {
        &self.b
    }

    #[inline]
    pub fn field(&self) -> Field {
        F::FIELD
    }

    /// `‖C‖_F`
    #[inline]
    pub fn c_norm(&self) -> f64 {
        self.c_norm
    }

    #[inline]
    pub fn ops(&self) -> &dyn SdpOperators<F> {
        &*self.ops
    }

    pub fn apply_objective(&self, v: &[F], out: &mut [F]) {
        self.ops.apply_objective(v, out)
    }

    pub fn apply_adjoint(&self, p: &[f64], v: &[F], out: &mut [F]) {
        self.ops.apply_adjoint(p, v, out)
    }

    /// `q_A(y) = A(y yᴴ)`
    pub fn q_a(&self, y: &[F]) -> Vec<f64> {
        let mut out = vec![0.0; self.m];
        self.ops.quadratic_constraint(y, &mut out);
        out
    }

    fn check_factor(&self, y: &Factor<F>) -> Result<()> {
        if y.n() != self.n {
            return Err(Error::Dimension {
                what: "factor rows",
                expected: self.n,
                found: y.n(),
            });
        }
        Ok(())
    }

    /// `A(Y Yᴴ) = Σ_i q_A(y_i)` over the columns of `Y`.
    pub fn apply_constraint(&self, y: &Factor<F>) -> Result<Vec<f64>> {
        self.check_factor(y)?;
        let mut acc = vec![0.0; self.m];
        let mut buf = vec![0.0; self.m];
        for col in y.columns() {
            self.ops.quadratic_constraint(col, &mut buf);
            acc.iter_mut().zip(&buf).for_each(|(a, v)| *a += v);
        }
        Ok(acc)
    }

    /// `C • Y Yᴴ`
    pub fn objective_value(&self, y: &Factor<F>) -> Result<f64> {
        self.check_factor(y)?;
        Ok(self.objective_operator().quad_form(y))
    }

    /// `‖A(Y Yᴴ) − b‖`
    pub fn infeasibility(&self, y: &Factor<F>) -> Result<f64> {
        let ax = self.apply_constraint(y)?;
        Ok(ax
            .iter()
            .zip(&self.b)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt())
    }

    pub fn objective_operator(&self) -> ObjectiveOperator<'_, F> {
        ObjectiveOperator { problem: self }
    }

    /// The operator `v ↦ (C + A* w) v` for a fixed multiplier-like vector `w`.
    pub fn dual_slack_operator(&self, w: Vec<f64>) -> Result<GradientOperator<'_, F>> {
        if w.len() != self.m {
            return Err(Error::Dimension {
                what: "dual vector",
                expected: self.m,
                found: w.len(),
            });
        }
        Ok(GradientOperator {
            problem: self,
            q: w,
        })
    }

    /// Gradient of the augmented Lagrangian at `Y Yᴴ`:
    /// `v ↦ (C + A* q(Y;p)) v` with `q(Y;p) = p + β (A(YYᴴ) − b)`.
    /// `q` is computed once and cached in the returned operator.
    pub fn gradient_operator(
        &self,
        p: &[f64],
        beta: f64,
        y: &Factor<F>,
    ) -> Result<GradientOperator<'_, F>> {
        if p.len() != self.m {
            return Err(Error::Dimension {
                what: "multiplier",
                expected: self.m,
                found: p.len(),
            });
        }
        if !(beta >= 0.0) {
            return Err(Error::InvalidArgument(format!("penalty {beta} must be nonnegative")));
        }
        let ax = self.apply_constraint(y)?;
        let q = p
            .iter()
            .zip(ax.iter().zip(&self.b))
            .map(|(pi, (a, b))| pi + beta * (a - b))
            .collect();
        Ok(GradientOperator { problem: self, q })
    }
}

struct Callbacks<C, D, Q> {
    c: C,
    adj: D,
    q: Q,
}

impl<F, C, D, Q> SdpOperators<F> for Callbacks<C, D, Q>
where
    F: Scalar,
    C: Fn(&[F], &mut [F]) + Send + Sync,
    D: Fn(&[f64], &[F], &mut [F]) + Send + Sync,
    Q: Fn(&[F], &mut [f64]) + Send + Sync,
{
    fn apply_objective(&self, v: &[F], out: &mut [F]) {
        (self.c)(v, out)
    }
    fn apply_adjoint(&self, p: &[f64], v: &[F], out: &mut [F]) {
        (self.adj)(p, v, out)
    }
    fn quadratic_constraint(&self, y: &[F], out: &mut [f64]) {
        (self.q)(y, out)
    }
}

pub struct ObjectiveOperator<'a, F: Scalar> {
    problem: &'a SdpProblem<F>,
}

impl<F: Scalar> LinearOperator<F> for ObjectiveOperator<'_, F> {
    fn dim(&self) -> usize {
        self.problem.n
    }
    fn apply(&self, x: &[F], y: &mut [F]) {
        self.problem.ops.apply_objective(x, y)
    }
}

/// `v ↦ (C + A* q) v` with `q` cached.
pub struct GradientOperator<'a, F: Scalar> {
    problem: &'a SdpProblem<F>,
    q: Vec<f64>,
}

impl<F: Scalar> GradientOperator<'_, F> {
    /// The cached multiplier-like vector `q`.
    pub fn q(&self) -> &[f64] {
        &self.q
    }

    pub fn into_q(self) -> Vec<f64> {
        self.q
    }
}

impl<F: Scalar> LinearOperator<F> for GradientOperator<'_, F> {
    fn dim(&self) -> usize {
        self.problem.n
    }

    fn apply(&self, x: &[F], y: &mut [F]) {
        self.problem.ops.apply_objective(x, y);
        let mut tmp = vec![F::zero(); x.len()];
        self.problem.ops.apply_adjoint(&self.q, x, &mut tmp);
        y.iter_mut().zip(&tmp).for_each(|(a, b)| *a += *b);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `A(X) = (X₁₂, tr X)` on n = 2, `C = diag(1, 2)`.
    fn toy() -> SdpProblem<f64> {
        SdpProblem::from_callbacks(
            2,
            vec![0.0, 1.0],
            1.0,
            |v: &[f64], out: &mut [f64]| {
                out[0] = v[0];
                out[1] = 2.0 * v[1];
            },
            |p: &[f64], v: &[f64], out: &mut [f64]| {
                out[0] = 0.5 * p[0] * v[1] + p[1] * v[0];
                out[1] = 0.5 * p[0] * v[0] + p[1] * v[1];
            },
            |y: &[f64], out: &mut [f64]| {
                out[0] = y[0] * y[1];
                out[1] = y[0] * y[0] + y[1] * y[1];
            },
        )
        .unwrap()
    }

    #[test]
    fn constraint_on_unit_vector() {
        let p = toy();
        let y = Factor::from_vector(vec![1.0, 0.0]);
        assert_eq!(p.apply_constraint(&y).unwrap(), vec![0.0, 1.0]);
        let z = Factor::zeros(2, 1);
        assert_eq!(p.apply_constraint(&z).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn constraint_dimension_mismatch() {
        let p = toy();
        let y = Factor::<f64>::zeros(3, 1);
        assert!(matches!(p.apply_constraint(&y), Err(Error::Dimension { .. })));
    }

    #[test]
    fn c_norm_from_basis_columns() {
        let p = toy();
        assert!((p.c_norm() - 5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn gradient_operator_reduces_to_objective() {
        let p = toy();
        let y = Factor::from_vector(vec![0.3, -0.7]);
        let g = p.gradient_operator(&[0.0, 0.0], 0.0, &y).unwrap();
        let mut out = [0.0; 2];
        g.apply(&[1.0, 1.0], &mut out);
        assert_eq!(out, [1.0, 2.0]);
    }
}
