//! Matrix-free linear operators `v ↦ M v` for self-adjoint `M`.

use nalgebra::DMatrix;

use crate::factor::Factor;
use crate::scalar::{vec, Scalar};

pub trait LinearOperator<F: Scalar>: Sync {
    fn dim(&self) -> usize;

    /// Writes `M x` into `y` (overwriting it).
    fn apply(&self, x: &[F], y: &mut [F]);

    /// Applies the operator to every column of a factor.
    fn apply_factor(&self, y: &Factor<F>) -> Factor<F> {
        let mut out = Factor::zeros(y.n(), y.s());
        for j in 0..y.s() {
            self.apply(y.column(j), out.column_mut(j));
        }
        out
    }

    /// `M • Y Yᴴ = Re tr(Yᴴ M Y)`
    fn quad_form(&self, y: &Factor<F>) -> f64 {
        let mut buf = vec![F::zero(); y.n()];
        y.columns()
            .map(|c| {
                self.apply(c, &mut buf);
                vec::re_dot(c, &buf)
            })
            .sum()
    }
}

impl<F: Scalar, T: LinearOperator<F> + ?Sized> LinearOperator<F> for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn apply(&self, x: &[F], y: &mut [F]) {
        (**self).apply(x, y)
    }
}

impl<F: Scalar, T: LinearOperator<F> + ?Sized> LinearOperator<F> for Box<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn apply(&self, x: &[F], y: &mut [F]) {
        (**self).apply(x, y)
    }
}

/// Wraps a closure as an operator.
pub struct FnOperator<G> {
    n: usize,
    f: G,
}

impl<G> FnOperator<G> {
    pub fn new(n: usize, f: G) -> Self {
        FnOperator { n, f }
    }
}

impl<F: Scalar, G: Fn(&[F], &mut [F]) + Sync> LinearOperator<F> for FnOperator<G> {
    fn dim(&self) -> usize {
        self.n
    }
    fn apply(&self, x: &[F], y: &mut [F]) {
        (self.f)(x, y)
    }
}

/// Dense matrix operator, used for verification at small sizes.
pub struct DenseOperator<'a, F: Scalar>(pub &'a DMatrix<F>);

impl<F: Scalar> LinearOperator<F> for DenseOperator<'_, F> {
    fn dim(&self) -> usize {
        self.0.nrows()
    }

    fn apply(&self, x: &[F], y: &mut [F]) {
        let m = self.0;
        y.iter_mut().for_each(|v| *v = F::zero());
        for j in 0..m.ncols() {
            let xj = x[j];
            if xj == F::zero() {
                continue;
            }
            for (i, yi) in y.iter_mut().enumerate() {
                *yi += m[(i, j)] * xj;
            }
        }
    }
}

/// Operator `M + shift·I`.
pub struct Shifted<'a, F: Scalar> {
    pub inner: &'a dyn LinearOperator<F>,
    pub shift: f64,
}

impl<F: Scalar> LinearOperator<F> for Shifted<'_, F> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn apply(&self, x: &[F], y: &mut [F]) {
        self.inner.apply(x, y);
        vec::axpy_real(self.shift, x, y);
    }
}
