//! Scalars over the real or complex field.
//!
//! Every matrix inner product in the solver is real valued,
//! `M • N = Re tr(Mᴴ N)`, so vectors over either field are treated as real
//! Euclidean spaces of dimension `n` or `2n`.

use nalgebra::ComplexField;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// Field tag of a problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Real,
    Complex,
}

/// Scalar type of an SDP: `f64` or `Complex64`.
pub trait Scalar:
    ComplexField<RealField = f64> + Copy + Default + PartialEq + Send + Sync + 'static
{
    const FIELD: Field;

    fn from_parts(re: f64, im: f64) -> Self;

    /// Imaginary part; zero for real scalars.
    fn im_part(self) -> f64;

    /// Draw from the standard normal distribution over the field,
    /// normalized so that `E|z|² = 1`.
    fn sample_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;
}

impl Scalar for f64 {
    const FIELD: Field = Field::Real;

    #[inline]
    fn from_parts(re: f64, _im: f64) -> Self {
        re
    }

    #[inline]
    fn im_part(self) -> f64 {
        0.0
    }

    fn sample_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.sample(StandardNormal)
    }
}

impl Scalar for Complex64 {
    const FIELD: Field = Field::Complex;

    #[inline]
    fn from_parts(re: f64, im: f64) -> Self {
        Complex64::new(re, im)
    }

    #[inline]
    fn im_part(self) -> f64 {
        self.im
    }

    fn sample_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    }
}

/// Helpers for slices of scalars.
pub mod vec {
    use super::Scalar;

    /// `Σ conj(a_i) b_i`
    #[inline]
    pub fn dot<F: Scalar>(a: &[F], b: &[F]) -> F {
        debug_assert_eq!(a.len(), b.len());
        a.iter()
            .zip(b)
            .fold(F::zero(), |acc, (x, y)| acc + x.conjugate() * *y)
    }

    /// `Re Σ conj(a_i) b_i`
    #[inline]
    pub fn re_dot<F: Scalar>(a: &[F], b: &[F]) -> f64 {
        debug_assert_eq!(a.len(), b.len());
        a.iter()
            .zip(b)
            .map(|(x, y)| (x.conjugate() * *y).real())
            .sum()
    }

    #[inline]
    pub fn norm_sq<F: Scalar>(a: &[F]) -> f64 {
        a.iter().map(|x| x.modulus_squared()).sum()
    }

    #[inline]
    pub fn norm<F: Scalar>(a: &[F]) -> f64 {
        norm_sq(a).sqrt()
    }

    /// `y += alpha x`
    #[inline]
    pub fn axpy<F: Scalar>(alpha: F, x: &[F], y: &mut [F]) {
        debug_assert_eq!(x.len(), y.len());
        for (yi, xi) in y.iter_mut().zip(x) {
            *yi += alpha * *xi;
        }
    }

    /// `y += alpha x` for a real coefficient.
    #[inline]
    pub fn axpy_real<F: Scalar>(alpha: f64, x: &[F], y: &mut [F]) {
        debug_assert_eq!(x.len(), y.len());
        for (yi, xi) in y.iter_mut().zip(x) {
            *yi += xi.scale(alpha);
        }
    }

    #[inline]
    pub fn scale<F: Scalar>(alpha: f64, x: &mut [F]) {
        for xi in x.iter_mut() {
            *xi = xi.scale(alpha);
        }
    }

    /// Normalize in place; returns the original norm.
    pub fn normalize<F: Scalar>(x: &mut [F]) -> f64 {
        let nrm = norm(x);
        if nrm > 0.0 {
            scale(1.0 / nrm, x);
        }
        nrm
    }

    pub fn all_finite<F: Scalar>(x: &[F]) -> bool {
        x.iter().all(|v| v.real().is_finite() && v.im_part().is_finite())
    }
}
