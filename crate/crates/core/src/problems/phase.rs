//! Phase retrieval from coded diffraction patterns, as the complex SDP
//!
//! ```text
//! min tr X   s.t.  |DFT(y_j ∘ x)_l|²-measurements:  ⟨a_jl a_jlᴴ, X⟩ = b_jl,  X ⪰ 0
//! ```
//!
//! with twelve random masks `y_j`, unnormalized DFT and trace bound `τ = 3n`.

use std::sync::Arc;

use nalgebra::SymmetricEigen;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::fft::Fft;
use crate::error::{Error, Result};
use crate::problem::{SdpOperators, SdpProblem};
use crate::factor::Factor;
use crate::scalar::{vec, Scalar};

pub const NUM_MASKS: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub struct DiffractionModel {
    pub n: usize,
    pub masks: Vec<Vec<Complex64>>,
    /// Measurements indexed by `j n + l`.
    pub b: Vec<f64>,
    pub truth: Option<Vec<Complex64>>,
}

struct PhaseOps {
    masks: Vec<Vec<Complex64>>,
    fft: Fft,
}

impl PhaseOps {
    fn modulate(&self, j: usize, v: &[Complex64], buf: &mut [Complex64]) {
        for ((o, m), x) in buf.iter_mut().zip(&self.masks[j]).zip(v) {
            *o = m * x;
        }
        self.fft.forward(buf);
    }
}

impl SdpOperators<Complex64> for PhaseOps {
    fn apply_objective(&self, v: &[Complex64], out: &mut [Complex64]) {
        out.copy_from_slice(v);
    }

    /// `(A* p) v = Σ_j conj(y_j) ∘ Fᴴ (p_j ∘ F (y_j ∘ v))`
    fn apply_adjoint(&self, p: &[f64], v: &[Complex64], out: &mut [Complex64]) {
        let n = v.len();
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        out.fill(Complex64::new(0.0, 0.0));
        for j in 0..self.masks.len() {
            self.modulate(j, v, &mut buf);
            for (b, &w) in buf.iter_mut().zip(&p[j * n..(j + 1) * n]) {
                *b *= w;
            }
            self.fft.inverse(&mut buf);
            for ((o, m), b) in out.iter_mut().zip(&self.masks[j]).zip(&buf) {
                *o += m.conj() * b;
            }
        }
    }

    fn quadratic_constraint(&self, y: &[Complex64], out: &mut [f64]) {
        let n = y.len();
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        for j in 0..self.masks.len() {
            self.modulate(j, y, &mut buf);
            for (o, b) in out[j * n..(j + 1) * n].iter_mut().zip(&buf) {
                *o = b.norm_sqr();
            }
        }
    }
}

fn ops_for(model_n: usize, masks: &[Vec<Complex64>]) -> Result<PhaseOps> {
    let fft = Fft::new(model_n)?;
    if masks.len() != NUM_MASKS || masks.iter().any(|m| m.len() != model_n) {
        return Err(Error::InvalidArgument(format!(
            "expected {NUM_MASKS} masks of length {model_n}"
        )));
    }
    Ok(PhaseOps {
        masks: masks.to_vec(),
        fft,
    })
}

/// Measurements `|DFT(y_j ∘ x)_l|²` of a signal.
pub fn measure(masks: &[Vec<Complex64>], x: &[Complex64]) -> Result<Vec<f64>> {
    let ops = ops_for(x.len(), masks)?;
    let mut b = vec![0.0; NUM_MASKS * x.len()];
    ops.quadratic_constraint(x, &mut b);
    Ok(b)
}

pub fn build_phase_retrieval(model: &DiffractionModel) -> Result<SdpProblem<Complex64>> {
    let ops = ops_for(model.n, &model.masks)?;
    if model.b.len() != NUM_MASKS * model.n {
        return Err(Error::Dimension {
            what: "measurements",
            expected: NUM_MASKS * model.n,
            found: model.b.len(),
        });
    }
    SdpProblem::new(
        model.n,
        model.b.clone(),
        3.0 * model.n as f64,
        Arc::new(ops),
        Some((model.n as f64).sqrt()),
    )
}

/// One mask entry: a uniform phase in `{1, i, −1, −i}` times a modulus of
/// `√2/2` (probability 4/5) or `√3` (probability 1/5).
pub fn sample_mask_entry<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let phase = match rng.random_range(0..4u8) {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    };
    let modulus = if rng.random_bool(0.8) {
        std::f64::consts::FRAC_1_SQRT_2
    } else {
        3f64.sqrt()
    };
    phase * modulus
}

/// Random masks, complex standard normal signal, and its measurements.
pub fn generate_phase_retrieval(n: usize, seed: u64) -> Result<DiffractionModel> {
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::InvalidArgument(format!("n = {n} must be a power of two")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let masks: Vec<Vec<Complex64>> = (0..NUM_MASKS)
        .map(|_| (0..n).map(|_| sample_mask_entry(&mut rng)).collect())
        .collect();
    let truth: Vec<Complex64> = (0..n).map(|_| Complex64::sample_normal(&mut rng)).collect();
    let b = measure(&masks, &truth)?;
    Ok(DiffractionModel {
        n,
        masks,
        b,
        truth: Some(truth),
    })
}

/// `√λ₁ v₁` for the leading eigenpair of `U Uᴴ`, from the s×s Gram matrix.
pub fn leading_signal(u: &Factor<Complex64>) -> Vec<Complex64> {
    if u.s() == 0 {
        return vec![Complex64::new(0.0, 0.0); u.n()];
    }
    let eig = SymmetricEigen::new(u.gram());
    let top = eig.eigenvalues.imax();
    let w = eig.eigenvectors.columns(top, 1).into_owned();
    u.mul_small(&w).into_data()
}

/// `min_φ ‖e^{iφ} x̂ − x‖ / ‖x‖`.
pub fn phase_error(xhat: &[Complex64], x: &[Complex64]) -> f64 {
    let nx = vec::norm_sq(x);
    let nh = vec::norm_sq(xhat);
    let cross = xhat.iter().zip(x).map(|(a, b)| a.conj() * b).sum::<Complex64>().norm();
    ((nh + nx - 2.0 * cross).max(0.0) / nx).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_one_factor_recovers_signal_up_to_phase() {
        let x: Vec<Complex64> = (0..8).map(|k| Complex64::new(k as f64 - 3.0, 0.5 * k as f64)).collect();
        let rot = Complex64::from_polar(1.0, 0.7);
        let u = Factor::from_columns(8, &[x.iter().map(|v| v * rot).collect::<Vec<_>>()]).unwrap();
        assert!(phase_error(&leading_signal(&u), &x) < 1e-12);
        let zero = vec![Complex64::new(0.0, 0.0); 8];
        assert!((phase_error(&zero, &x) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn impulse_under_unit_masks_gives_ones() {
        let masks = vec![vec![Complex64::new(1.0, 0.0); 4]; NUM_MASKS];
        let mut e1 = vec![Complex64::new(0.0, 0.0); 4];
        e1[0] = Complex64::new(1.0, 0.0);
        let b = measure(&masks, &e1).unwrap();
        assert!(b.iter().all(|&v| (v - 1.0).abs() < 1e-15));
    }

    #[test]
    fn zero_signal_gives_zero() {
        let model = generate_phase_retrieval(8, 1).unwrap();
        let p = build_phase_retrieval(&model).unwrap();
        assert!(p.q_a(&[Complex64::new(0.0, 0.0); 8]).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn adjoint_matches_quadratic_form() {
        let model = generate_phase_retrieval(16, 5).unwrap();
        let prob = build_phase_retrieval(&model).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let v: Vec<Complex64> = (0..16).map(|_| Complex64::sample_normal(&mut rng)).collect();
            let p: Vec<f64> = (0..prob.m()).map(|_| rng.random::<f64>() - 0.5).collect();
            let lhs: f64 = prob.q_a(&v).iter().zip(&p).map(|(a, b)| a * b).sum();
            let mut av = vec![Complex64::new(0.0, 0.0); 16];
            prob.apply_adjoint(&p, &v, &mut av);
            let rhs = vec::re_dot(&v, &av);
            assert!((lhs - rhs).abs() <= 1e-10 * lhs.abs().max(1.0), "{lhs} {rhs}");
        }
    }

    #[test]
    fn generation_is_deterministic_and_shaped() {
        let a = generate_phase_retrieval(32, 7).unwrap();
        let b = generate_phase_retrieval(32, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.b.len(), 12 * 32);
        assert!(a.b.iter().all(|&v| v >= 0.0));
        assert!(generate_phase_retrieval(12, 7).is_err());
        let p = build_phase_retrieval(&a).unwrap();
        assert_eq!(p.tau(), 96.0);
        assert_eq!(p.field(), crate::scalar::Field::Complex);
    }
}
