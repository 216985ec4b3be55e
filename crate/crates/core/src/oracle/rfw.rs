//! Relaxed Frank-Wolfe method over `Δ_τ` with exact dense linear algebra.
//!
//! Iteration `k` first picks any `Z_k` with `g(Z_k) ≤ g(Z̃_{k−1})`, then
//! computes the FW vertex `Z_F` of `∇g(Z_k)` and the gap
//! `ε_k = ∇g(Z_k) • (Z_k − Z_F)`, stops when `ε_k ≤ ε̄`, and otherwise moves
//! to `Z̃_k = Z_k + α_k (Z_F − Z_k)` with an exact line search.

use nalgebra::DMatrix;

use super::dense::{inner, project_spectraplex, DenseSdp};
use super::jacobi::jacobi_eigh;
use crate::error::{Error, Result};
use crate::hlr::golden_section;
use crate::scalar::Scalar;

/// Convex smooth objective on dense matrices.
pub trait DenseObjective<F: Scalar> {
    fn tau(&self) -> f64;

    fn value(&self, z: &DMatrix<F>) -> f64;

    fn gradient(&self, z: &DMatrix<F>) -> DMatrix<F>;

    /// Minimizer of `α ↦ g(Z + α (Z_F − Z))` over `[0, 1]`.
    fn line_search(&self, z: &DMatrix<F>, zf: &DMatrix<F>, _gap: f64) -> f64 {
        let d = zf - z;
        golden_section(|a| self.value(&(z + &d * F::from_real(a))), 1e-12)
    }

    /// Lipschitz constant of the gradient, if known.
    fn smoothness(&self) -> Option<f64> {
        None
    }
}

/// `g(Z) = C • Z`
pub struct DenseLinear<F: Scalar> {
    pub c: DMatrix<F>,
    pub tau: f64,
}

impl<F: Scalar> DenseObjective<F> for DenseLinear<F> {
    fn tau(&self) -> f64 {
        self.tau
    }
    fn value(&self, z: &DMatrix<F>) -> f64 {
        inner(&self.c, z)
    }
    fn gradient(&self, _z: &DMatrix<F>) -> DMatrix<F> {
        self.c.clone()
    }
    fn smoothness(&self) -> Option<f64> {
        Some(0.0)
    }
}

/// `g(Z) = ½‖Z − D‖²_F`
pub struct DenseQuadratic<F: Scalar> {
    pub d: DMatrix<F>,
    pub tau: f64,
}

impl<F: Scalar> DenseObjective<F> for DenseQuadratic<F> {
    fn tau(&self) -> f64 {
        self.tau
    }
    fn value(&self, z: &DMatrix<F>) -> f64 {
        0.5 * (z - &self.d).norm_squared()
    }
    fn gradient(&self, z: &DMatrix<F>) -> DMatrix<F> {
        z - &self.d
    }
    fn smoothness(&self) -> Option<f64> {
        Some(1.0)
    }
}

/// Augmented Lagrangian `C • Z + pᵀ(A(Z) − b) + (β/2)‖A(Z) − b‖²`.
pub struct DenseAl<'a, F: Scalar> {
    pub sdp: &'a DenseSdp<F>,
    pub p: Vec<f64>,
    pub beta: f64,
    /// `β ‖A‖²`, if computed.
    pub lipschitz: Option<f64>,
}

impl<F: Scalar> DenseAl<'_, F> {
    fn residual(&self, z: &DMatrix<F>) -> Vec<f64> {
        self.sdp.apply_a(z).iter().zip(&self.sdp.b).map(|(a, b)| a - b).collect()
    }
}

impl<F: Scalar> DenseObjective<F> for DenseAl<'_, F> {
    fn tau(&self) -> f64 {
        self.sdp.tau
    }

    fn value(&self, z: &DMatrix<F>) -> f64 {
        let r = self.residual(z);
        let lin: f64 = r.iter().zip(&self.p).map(|(r, p)| r * p).sum();
        let sq: f64 = r.iter().map(|r| r * r).sum();
        inner(&self.sdp.c, z) + lin + 0.5 * self.beta * sq
    }

    fn gradient(&self, z: &DMatrix<F>) -> DMatrix<F> {
        let q: Vec<f64> = self.residual(z).iter().zip(&self.p).map(|(r, p)| p + self.beta * r).collect();
        &self.sdp.c + self.sdp.adjoint(&q)
    }

    fn line_search(&self, z: &DMatrix<F>, zf: &DMatrix<F>, gap: f64) -> f64 {
        if gap <= 0.0 {
            return 0.0;
        }
        let d = self.sdp.apply_a(&(zf - z));
        let denom = self.beta * d.iter().map(|x| x * x).sum::<f64>();
        if denom > 0.0 {
            (gap / denom).min(1.0)
        } else {
            1.0
        }
    }

    fn smoothness(&self) -> Option<f64> {
        self.lipschitz
    }
}

/// Choice of the point `Z_k` in step 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Step1 {
    /// `Z_k = Z̃_{k−1}`.
    Trivial,
    /// Up to `iters` accelerated projected-gradient steps from `Z̃_{k−1}`,
    /// keeping the best point (requires a known smoothness constant).
    ProjectedGradient { iters: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RfwOptions {
    pub eps_bar: f64,
    pub max_iter: usize,
    pub step1: Step1,
    pub eig_tol: f64,
}

impl RfwOptions {
    pub fn new(eps_bar: f64) -> Self {
        RfwOptions {
            eps_bar,
            max_iter: 1_000_000,
            step1: Step1::Trivial,
            eig_tol: 1e-13,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RfwStep {
    pub g_z: f64,
    pub g_tilde: f64,
    pub eps: f64,
    pub alpha: f64,
}

#[derive(Debug, Clone)]
pub struct RfwOutput<F: Scalar> {
    pub z: DMatrix<F>,
    pub value: f64,
    pub theta: f64,
    pub eps: f64,
    pub iterations: usize,
    pub steps: Vec<RfwStep>,
}

/// `(θ, Z_F)`: `θ = max{−λ_min(G), 0}`, `Z_F = τ v vᴴ` or `0`.
pub fn dense_fw_vertex<F: Scalar>(g: &DMatrix<F>, tau: f64, tol: f64) -> Result<(f64, DMatrix<F>)> {
    let e = jacobi_eigh(g, tol)?;
    let (lmin, v) = e.min();
    let n = g.nrows();
    if lmin < 0.0 {
        let v = nalgebra::DVector::from_vec(v);
        Ok((-lmin, &v * v.adjoint() * F::from_real(tau)))
    } else {
        Ok((0.0, DMatrix::zeros(n, n)))
    }
}

fn projected_gradient<F: Scalar, O: DenseObjective<F> + ?Sized>(
    obj: &O,
    start: &DMatrix<F>,
    l: f64,
    iters: usize,
) -> Result<DMatrix<F>> {
    let tau = obj.tau();
    let step = F::from_real(1.0 / l);
    let f0 = obj.value(start);
    let (mut best, mut f_best) = (start.clone(), f0);
    let mut x = start.clone();
    let mut fx = f0;
    let mut y = start.clone();
    let mut t = 1.0f64;
    for _ in 0..iters {
        let g = obj.gradient(&y);
        let x_new = project_spectraplex(&(&y - g * step), tau)?;
        let f_new = obj.value(&x_new);
        if f_new < f_best {
            best = x_new.clone();
            f_best = f_new;
        }
        if f_new > fx {
            // adaptive restart
            t = 1.0;
            y = x.clone();
            continue;
        }
        let t_new = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        y = &x_new + (&x_new - &x) * F::from_real((t - 1.0) / t_new);
        x = x_new;
        fx = f_new;
        t = t_new;
    }
    Ok(best)
}

pub fn rfw_solve<F: Scalar, O: DenseObjective<F> + ?Sized>(
    obj: &O,
    z0: &DMatrix<F>,
    opts: &RfwOptions,
) -> Result<RfwOutput<F>> {
    if !(opts.eps_bar > 0.0) {
        return Err(Error::InvalidArgument("eps_bar must be positive".into()));
    }
    let tau = obj.tau();
    let mut z_tilde = z0.clone();
    let mut steps = Vec::new();
    for k in 1..=opts.max_iter {
        let z = match (opts.step1, obj.smoothness()) {
            (Step1::ProjectedGradient { iters }, Some(l)) if l > 0.0 && iters > 0 => {
                projected_gradient(obj, &z_tilde, l, iters)?
            }
            _ => z_tilde.clone(),
        };
        let g_z = obj.value(&z);
        let grad = obj.gradient(&z);
        let (theta, zf) = dense_fw_vertex(&grad, tau, opts.eig_tol)?;
        let eps = inner(&grad, &z) + tau * theta;
        if eps <= opts.eps_bar {
            steps.push(RfwStep {
                g_z,
                g_tilde: g_z,
                eps,
                alpha: 0.0,
            });
            return Ok(RfwOutput {
                z,
                value: g_z,
                theta,
                eps,
                iterations: k,
                steps,
            });
        }
        let alpha = obj.line_search(&z, &zf, eps).clamp(0.0, 1.0);
        z_tilde = &z + (&zf - &z) * F::from_real(alpha);
        steps.push(RfwStep {
            g_z,
            g_tilde: obj.value(&z_tilde),
            eps,
            alpha,
        });
    }
    Err(Error::IterationCap {
        method: "RFW",
        cap: opts.max_iter,
        best: steps.iter().map(|s| s.eps).fold(f64::INFINITY, f64::min),
    })
}
