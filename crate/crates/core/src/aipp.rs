//! Adaptive accelerated inexact proximal point method (ADAP-AIPP) over a
//! Frobenius ball.
//!
//! Each iteration approximately solves the prox subproblem
//! `min_{‖U‖ ≤ r} λ g̃(U) + ½‖U − W_{j−1}‖²` with ADAP-FISTA, halving `λ` until
//! the call succeeds and the descent inequality holds. The method stops at a
//! `ρ̄`-approximate stationary point: `R̄ ∈ ∇g̃(W̄) + ∂δ_ball(W̄)`, `‖R̄‖ ≤ ρ̄`.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::fista::{adap_fista, CompositeObjective, Euclidean, FistaOutcome, FistaParams};

/// Smooth function minimized over the ball `‖W‖ ≤ radius`.
pub trait BallObjective<P: Euclidean> {
    fn value(&self, w: &P) -> f64;
    fn value_and_gradient(&self, w: &P) -> (f64, P);
    fn radius(&self) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AippParams {
    pub lambda0: f64,
    pub rho_bar: f64,
    pub fista: FistaParams,
    pub max_iter: usize,
    /// Curvature estimate carried over from a previous call.
    pub warm_m: Option<f64>,
}

impl Default for AippParams {
    fn default() -> Self {
        AippParams {
            lambda0: 1.0,
            rho_bar: 1e-6,
            fista: FistaParams::default(),
            max_iter: 100_000,
            warm_m: None,
        }
    }
}

/// One accepted iteration, recorded for diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AippStep {
    pub lambda: f64,
    pub g_prev: f64,
    pub g_new: f64,
    /// `‖V_j‖`
    pub v_norm: f64,
    /// `‖W_j − W_{j−1}‖`
    pub step_norm: f64,
    /// `‖R_j‖`
    pub r_norm: f64,
}

#[derive(Debug, Clone)]
pub struct AippOutput<P> {
    pub w: P,
    pub r: P,
    pub g_value: f64,
    pub lambda_final: f64,
    pub iterations: usize,
    pub fista_calls: usize,
    pub fista_iterations: usize,
    pub halvings: usize,
    /// Last accepted curvature estimate `M̄`.
    pub m_bar: f64,
    pub steps: Vec<AippStep>,
}

struct ProxSubproblem<'a, P, O: ?Sized> {
    obj: &'a O,
    lambda: f64,
    center: &'a P,
    radius: f64,
}

impl<P: Euclidean, O: BallObjective<P> + ?Sized> CompositeObjective<P> for ProxSubproblem<'_, P, O> {
    fn value(&self, u: &P) -> f64 {
        self.lambda * self.obj.value(u) + 0.5 * P::dist_sq(u, self.center)
    }

    fn value_and_gradient(&self, u: &P) -> (f64, P) {
        let (g, mut grad) = self.obj.value_and_gradient(u);
        grad.scale(self.lambda);
        grad.axpy(1.0, u);
        grad.axpy(-1.0, self.center);
        (self.lambda * g + 0.5 * P::dist_sq(u, self.center), grad)
    }

    fn prox(&self, z: P, _l: f64) -> P {
        project(z, self.radius)
    }
}

pub(crate) fn project<P: Euclidean>(mut z: P, radius: f64) -> P {
    let n = z.norm();
    if n > radius {
        z.scale(radius / n);
    }
    z
}

/// Runs ADAP-AIPP from `w_init` (which must lie in the ball).
pub fn adap_aipp<P, O>(obj: &O, w_init: &P, params: &AippParams, deadline: Option<Instant>) -> Result<AippOutput<P>>
where
    P: Euclidean,
    O: BallObjective<P> + ?Sized,
{
    if !(params.lambda0 > 0.0) {
        return Err(Error::InvalidArgument(format!("lambda0 = {} must be positive", params.lambda0)));
    }
    if !(params.rho_bar > 0.0) {
        return Err(Error::InvalidArgument(format!("rho_bar = {} must be positive", params.rho_bar)));
    }
    let radius = obj.radius();
    let w_norm = w_init.norm();
    if w_norm > radius * (1.0 + 1e-12) + 1e-12 {
        return Err(Error::InvalidArgument(format!(
            "initial point norm {w_norm} exceeds radius {radius}"
        )));
    }

    let mut w_prev = w_init.clone();
    let mut g_prev = obj.value(&w_prev);
    let mut lambda = params.lambda0;
    let mut m_bar = params.warm_m.unwrap_or(1.0).max(1.0);
    let mut fista_calls = 0;
    let mut fista_iterations = 0;
    let mut halvings = 0;
    let mut steps = Vec::new();
    let mut best_r = f64::INFINITY;
    let lambda_floor = params.lambda0 * 1e-30;

    for j in 1..=params.max_iter {
        if deadline.is_some_and(|d| Instant::now() >= d) {
            return Err(Error::TimeLimit);
        }
        let m_lower = (m_bar / 2.0).max(1.0);
        let (w, v, l, g_new) = loop {
            let sub = ProxSubproblem {
                obj,
                lambda,
                center: &w_prev,
                radius,
            };
            fista_calls += 1;
            let outcome = adap_fista(&sub, &w_prev, 0.5, m_lower, &params.fista);
            if let FistaOutcome::Success { y, v, l, iterations } = outcome {
                fista_iterations += iterations;
                let g_new = obj.value(&y);
                // λ g̃(W_{j−1}) − [λ g̃(W) + ½‖W − W_{j−1}‖²] ≥ V • (W_{j−1} − W)
                let lhs = lambda * g_prev - (lambda * g_new + 0.5 * P::dist_sq(&y, &w_prev));
                let mut diff = w_prev.clone();
                diff.axpy(-1.0, &y);
                let rhs = v.inner(&diff);
                let allowance = 1e-13 * lambda * (g_prev.abs() + g_new.abs()) + 1e-300;
                if lhs >= rhs - allowance {
                    break (y, v, l, g_new);
                }
            } else if let FistaOutcome::Failure { at_iter, .. } = outcome {
                fista_iterations += at_iter;
            }
            lambda /= 2.0;
            halvings += 1;
            if lambda < lambda_floor {
                return Err(Error::IterationCap {
                    method: "ADAP-AIPP stepsize halving",
                    cap: halvings,
                    best: best_r,
                });
            }
        };

        // R_j = (V_j + W_{j−1} − W_j) / λ_j
        let mut r = v.clone();
        r.axpy(1.0, &w_prev);
        r.axpy(-1.0, &w);
        r.scale(1.0 / lambda);
        let r_norm = r.norm();
        best_r = best_r.min(r_norm);
        steps.push(AippStep {
            lambda,
            g_prev,
            g_new,
            v_norm: v.norm(),
            step_norm: P::dist_sq(&w, &w_prev).sqrt(),
            r_norm,
        });
        m_bar = l;
        if !g_new.is_finite() {
            return Err(Error::NonFinite("ADAP-AIPP objective"));
        }
        if r_norm <= params.rho_bar {
            return Ok(AippOutput {
                w,
                r,
                g_value: g_new,
                lambda_final: lambda,
                iterations: j,
                fista_calls,
                fista_iterations,
                halvings,
                m_bar,
                steps,
            });
        }
        w_prev = w;
        g_prev = g_new;
    }
    Err(Error::IterationCap {
        method: "ADAP-AIPP",
        cap: params.max_iter,
        best: best_r,
    })
}

/// Distance of `w` from the normal cone of the ball of radius `radius` at
/// `y`: the cone is `{c y : c ≥ 0}` on the boundary and `{0}` inside.
pub fn ball_normal_residual<P: Euclidean>(y: &P, w: &P, radius: f64, boundary_tol: f64) -> f64 {
    let ny = y.norm();
    if ny < radius * (1.0 - boundary_tol) || ny == 0.0 {
        return w.norm();
    }
    let c = (w.inner(y) / (ny * ny)).max(0.0);
    let mut d = w.clone();
    d.axpy(-c, y);
    d.norm()
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Quad {
        d: Vec<f64>,
        r: f64,
    }

    impl BallObjective<Vec<f64>> for Quad {
        fn value(&self, w: &Vec<f64>) -> f64 {
            0.5 * Vec::dist_sq(w, &self.d)
        }
        fn value_and_gradient(&self, w: &Vec<f64>) -> (f64, Vec<f64>) {
            (self.value(w), Vec::lincomb(1.0, w, -1.0, &self.d))
        }
        fn radius(&self) -> f64 {
            self.r
        }
    }

    #[test]
    fn fixed_point_terminates_first_iteration() {
        let q = Quad {
            d: vec![0.1, 0.2, -0.3],
            r: 1.0,
        };
        let out = adap_aipp(&q, &q.d.clone(), &AippParams::default(), None).unwrap();
        assert_eq!(out.iterations, 1);
        assert_eq!(out.w, q.d);
        assert!(out.r.norm() <= 1e-10);
    }

    #[test]
    fn rejects_infeasible_start() {
        let q = Quad { d: vec![0.0], r: 1.0 };
        assert!(adap_aipp(&q, &vec![2.0], &AippParams::default(), None).is_err());
    }

    #[test]
    fn normal_residual() {
        let y = vec![1.0, 0.0];
        assert!(ball_normal_residual(&y, &vec![3.0, 0.0], 1.0, 1e-9) < 1e-15);
        assert!((ball_normal_residual(&y, &vec![-3.0, 0.0], 1.0, 1e-9) - 3.0).abs() < 1e-15);
        assert!((ball_normal_residual(&vec![0.5, 0.0], &vec![0.0, 2.0], 1.0, 1e-9) - 2.0).abs() < 1e-15);
    }
}
