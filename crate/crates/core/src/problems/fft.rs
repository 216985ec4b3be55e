//! Power-of-two FFT plans.
//!
//! Both directions are unnormalized: `inverse(forward(x)) = n x`, so
//! `inverse` is the adjoint `Fᴴ` of `forward`.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

#[derive(Clone)]
pub struct Fft {
    n: usize,
    forward: Arc<dyn rustfft::Fft<f64>>,
    inverse: Arc<dyn rustfft::Fft<f64>>,
}

impl fmt::Debug for Fft {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Fft").field("n", &self.n).finish()
    }
}

impl Fft {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 || !n.is_power_of_two() {
            return Err(Error::InvalidArgument(format!("FFT length {n} is not a power of two")));
        }
        let mut planner = FftPlanner::new();
        Ok(Fft {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// `x_l ← Σ_k x_k exp(−2πi kl/n)`
    pub fn forward(&self, x: &mut [Complex64]) {
        assert_eq!(x.len(), self.n, "FFT length mismatch");
        self.forward.process(x)
    }

    /// `x_l ← Σ_k x_k exp(+2πi kl/n)`
    pub fn inverse(&self, x: &mut [Complex64]) {
        assert_eq!(x.len(), self.n, "FFT length mismatch");
        self.inverse.process(x)
    }
}
