//! Low-rank factors `Y ∈ F^{n×s}` representing `X = Y Yᴴ`.

use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{Error, Result};
use crate::fista::Euclidean;
use crate::scalar::{vec, Scalar};

/// Tall factor stored column-major. The primal iterate is only ever kept in
/// this form.
#[derive(Debug, Clone, PartialEq)]
pub struct Factor<F> {
    n: usize,
    s: usize,
    data: Vec<F>,
}

impl<F: Scalar> Factor<F> {
    pub fn zeros(n: usize, s: usize) -> Self {
        Factor {
            n,
            s,
            data: vec![F::zero(); n * s],
        }
    }

    /// Builds a factor from column-major data.
    pub fn from_col_major(n: usize, s: usize, data: Vec<F>) -> Result<Self> {
        if data.len() != n * s {
            return Err(Error::Dimension {
                what: "factor data",
                expected: n * s,
                found: data.len(),
            });
        }
        Ok(Factor { n, s, data })
    }

    pub fn from_columns(n: usize, cols: &[Vec<F>]) -> Result<Self> {
        let mut data = Vec::with_capacity(n * cols.len());
        for c in cols {
            if c.len() != n {
                return Err(Error::Dimension {
                    what: "factor column",
                    expected: n,
                    found: c.len(),
                });
            }
            data.extend_from_slice(c);
        }
        Ok(Factor {
            n,
            s: cols.len(),
            data,
        })
    }

    /// Single-column factor.
    pub fn from_vector(v: Vec<F>) -> Self {
        Factor {
            n: v.len(),
            s: 1,
            data: v,
        }
    }

    /// Entries drawn i.i.d. from the standard normal over the field.
    pub fn random<R: Rng + ?Sized>(n: usize, s: usize, rng: &mut R) -> Self {
        let data = (0..n * s).map(|_| F::sample_normal(rng)).collect();
        Factor { n, s, data }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Column count.
    #[inline]
    pub fn s(&self) -> usize {
        self.s
    }

    #[inline]
    pub fn data(&self) -> &[F] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [F] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<F> {
        self.data
    }

    #[inline]
    pub fn column(&self, j: usize) -> &[F] {
        &self.data[j * self.n..(j + 1) * self.n]
    }

    #[inline]
    pub fn column_mut(&mut self, j: usize) -> &mut [F] {
        &mut self.data[j * self.n..(j + 1) * self.n]
    }

    pub fn columns(&self) -> impl Iterator<Item = &[F]> {
        // chunks_exact panics on a zero chunk size
        self.data.chunks_exact(self.n.max(1)).take(self.s)
    }

    pub fn push_column(&mut self, col: &[F]) {
        assert_eq!(col.len(), self.n, "column length");
        self.data.extend_from_slice(col);
        self.s += 1;
    }

    /// `‖Y‖_F² = tr(Y Yᴴ)`
    #[inline]
    pub fn norm_sq(&self) -> f64 {
        vec::norm_sq(&self.data)
    }

    #[inline]
    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// `Re tr(Selfᴴ Other)`
    pub fn inner(&self, other: &Self) -> f64 {
        debug_assert_eq!((self.n, self.s), (other.n, other.s));
        vec::re_dot(&self.data, &other.data)
    }

    pub fn scale_mut(&mut self, alpha: f64) {
        vec::scale(alpha, &mut self.data);
    }

    pub fn is_finite(&self) -> bool {
        vec::all_finite(&self.data)
    }

    /// Gram matrix `Yᴴ Y` (s×s).
    pub fn gram(&self) -> DMatrix<F> {
        let mut g = DMatrix::zeros(self.s, self.s);
        for j in 0..self.s {
            for i in 0..=j {
                let v = vec::dot(self.column(i), self.column(j));
                g[(i, j)] = v;
                g[(j, i)] = v.conjugate();
            }
        }
        g
    }

    /// Dense `Y Yᴴ` (n×n); intended for small verification problems only.
    pub fn outer(&self) -> DMatrix<F> {
        let mut x = DMatrix::zeros(self.n, self.n);
        for col in self.columns() {
            for j in 0..self.n {
                let cj = col[j].conjugate();
                for i in 0..self.n {
                    x[(i, j)] += col[i] * cj;
                }
            }
        }
        x
    }

    /// `Y · M` for an s×k matrix `M`.
    pub fn mul_small(&self, m: &DMatrix<F>) -> Self {
        assert_eq!(m.nrows(), self.s);
        let k = m.ncols();
        let mut out = Factor::zeros(self.n, k);
        for c in 0..k {
            let dst = &mut out.data[c * self.n..(c + 1) * self.n];
            for r in 0..self.s {
                let coef = m[(r, c)];
                if coef != F::zero() {
                    vec::axpy(coef, &self.data[r * self.n..(r + 1) * self.n], dst);
                }
            }
        }
        out
    }
}

/// Projection onto the Frobenius ball of radius `r`: returns `Y` when
/// `‖Y‖_F ≤ r`, else `(r/‖Y‖_F) Y`.
pub fn project_ball<F: Scalar>(y: &Factor<F>, r: f64) -> Factor<F> {
    let mut out = y.clone();
    project_ball_mut(&mut out, r);
    out
}

/// In-place variant of [`project_ball`]. Returns true when the input was
/// rescaled.
pub fn project_ball_mut<F: Scalar>(y: &mut Factor<F>, r: f64) -> bool {
    let nrm = y.norm();
    if nrm > r {
        y.scale_mut(r / nrm);
        true
    } else {
        false
    }
}

impl<F: Scalar> Euclidean for Factor<F> {
    fn inner(&self, other: &Self) -> f64 {
        Factor::inner(self, other)
    }

    fn axpy(&mut self, alpha: f64, x: &Self) {
        debug_assert_eq!((self.n, self.s), (x.n, x.s));
        vec::axpy_real(alpha, &x.data, &mut self.data);
    }

    fn scale(&mut self, alpha: f64) {
        self.scale_mut(alpha);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn project_ball_scales_down() {
        let y = Factor::from_vector(vec![2.0, 0.0]);
        assert_eq!(project_ball(&y, 1.0).data(), &[1.0, 0.0]);
        let y = Factor::from_vector(vec![0.3, 0.4]);
        assert_eq!(project_ball(&y, 1.0), y);
    }

    #[test]
    fn project_ball_complex_hits_radius() {
        let y = Factor::from_columns(
            2,
            &[vec![Complex64::new(1.0, 2.0), Complex64::new(0.0, 2.0)]],
        )
        .unwrap();
        assert!((y.norm() - 3.0).abs() < 1e-15);
        let r = 2f64.sqrt();
        let p = project_ball(&y, r);
        assert!((p.norm() - r).abs() < 1e-12);
        let ratio = p.data()[0] / y.data()[0];
        assert!((ratio.re - r / 3.0).abs() < 1e-15 && ratio.im.abs() < 1e-15);
        assert_eq!(project_ball(&p, r), p);
    }

    #[test]
    fn gram_and_outer_agree_on_trace() {
        let y = Factor::from_columns(3, &[vec![1.0, 2.0, 0.0], vec![0.5, -1.0, 3.0]]).unwrap();
        let g = y.gram();
        let x = y.outer();
        assert!((g.trace() - x.trace()).abs() < 1e-14);
        assert!((g.trace() - y.norm_sq()).abs() < 1e-14);
    }

    #[test]
    fn dimension_errors() {
        assert!(Factor::<f64>::from_col_major(2, 2, vec![0.0; 3]).is_err());
        assert!(Factor::<f64>::from_columns(2, &[vec![1.0]]).is_err());
    }
}
