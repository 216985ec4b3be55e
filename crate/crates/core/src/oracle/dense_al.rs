//! Dense augmented Lagrangian reference solver: the same outer loop as the
//! matrix-free method, with subproblems solved by RFW and all eigenvalue
//! work done by the Jacobi solver.

use nalgebra::DMatrix;

use super::dense::{inner, DenseSdp};
use super::jacobi::jacobi_eigh;
use super::rfw::{rfw_solve, DenseAl, RfwOptions, Step1};
use crate::error::{Error, Result};
use crate::hallar::{adapt_penalty, PenaltyState};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DenseAlOptions {
    /// Relative KKT tolerance.
    pub eps: f64,
    pub beta0: Option<f64>,
    pub max_outer: usize,
    /// Projected-gradient steps per RFW iteration.
    pub pg_iters: usize,
    pub max_rfw_iter: usize,
}

impl DenseAlOptions {
    pub fn new(eps: f64) -> Self {
        DenseAlOptions {
            eps,
            beta0: None,
            max_outer: 500,
            pg_iters: 25,
            max_rfw_iter: 200_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DenseAlOutput<F: Scalar> {
    pub x: DMatrix<F>,
    pub p: Vec<f64>,
    pub theta: f64,
    pub pval: f64,
    pub dval: f64,
    pub primal_rel: f64,
    pub gap_rel: f64,
    pub outer_iters: usize,
    pub rfw_iters: usize,
}

/// `(p, θ, dval)` for a multiplier: `θ = max{−λ_min(C + A*p), 0}`,
/// `dval = −bᵀp − τθ`.
pub fn dense_dual<F: Scalar>(sdp: &DenseSdp<F>, p: &[f64]) -> Result<(f64, f64)> {
    let s = &sdp.c + sdp.adjoint(p);
    let e = jacobi_eigh(&s, 1e-14)?;
    let theta = (-e.values[0]).max(0.0);
    let bp: f64 = sdp.b.iter().zip(p).map(|(b, p)| b * p).sum();
    Ok((theta, -bp - sdp.tau * theta))
}

pub fn dense_al_solve<F: Scalar>(sdp: &DenseSdp<F>, opts: &DenseAlOptions) -> Result<DenseAlOutput<F>> {
    let n = sdp.n();
    let m = sdp.m();
    let b_norm = sdp.b.iter().map(|b| b * b).sum::<f64>().sqrt();
    let a_norm_sq = sdp.operator_norm_sq()?;
    let beta0 = opts.beta0.unwrap_or(1.0 / b_norm.max(1.0));
    let beta_cap = 1e8 * beta0;
    let mut beta = beta0;
    let mut p = vec![0.0; m];
    let mut x = DMatrix::<F>::identity(n, n) * F::from_real(sdp.tau / n as f64);

    let resid = |x: &DMatrix<F>| -> (Vec<f64>, f64) {
        let r: Vec<f64> = sdp.apply_a(x).iter().zip(&sdp.b).map(|(a, b)| a - b).collect();
        let f = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        (r, f)
    };
    let eps_p = opts.eps * (1.0 + b_norm);
    let mut scale = 1.0 + inner(&sdp.c, &x).abs();
    let mut omega = eps_p.max(0.1 * resid(&x).1);
    let mut eps_bar = 1e-2 * scale;
    let mut rfw_iters = 0;

    for t in 1..=opts.max_outer {
        let obj = DenseAl {
            sdp,
            p: p.clone(),
            beta,
            lipschitz: Some(beta * a_norm_sq),
        };
        let ropts = RfwOptions {
            eps_bar,
            max_iter: opts.max_rfw_iter,
            step1: Step1::ProjectedGradient { iters: opts.pg_iters },
            eig_tol: 1e-13,
        };
        let out = rfw_solve(&obj, &x, &ropts)?;
        rfw_iters += out.iterations;
        x = out.z;
        let (r, feas) = resid(&x);
        let p_cand: Vec<f64> = p.iter().zip(&r).map(|(p, r)| p + beta * r).collect();
        let (theta, dval) = dense_dual(sdp, &p_cand)?;
        let pval = inner(&sdp.c, &x);
        scale = 1.0 + pval.abs() + dval.abs();
        let primal_rel = feas / (1.0 + b_norm);
        let gap_rel = (pval - dval).abs() / scale;
        log::debug!("dense AL t={t} beta={beta:.2e} eps_bar={eps_bar:.2e} pval={pval:.10e} dval={dval:.10e}");
        if primal_rel <= opts.eps && gap_rel <= opts.eps {
            return Ok(DenseAlOutput {
                x,
                p: p_cand,
                theta,
                pval,
                dval,
                primal_rel,
                gap_rel,
                outer_iters: t,
                rfw_iters,
            });
        }
        let up = adapt_penalty(&PenaltyState {
            beta,
            beta_cap,
            omega,
            eps_bar,
            eps_bar_floor: 0.25 * opts.eps * scale,
            feas,
        });
        if up.accept_multiplier {
            p = p_cand;
        }
        beta = up.beta;
        omega = up.omega;
        eps_bar = up.eps_bar;
    }
    Err(Error::IterationCap {
        method: "dense AL",
        cap: opts.max_outer,
        best: f64::NAN,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::densify;
    use crate::problems::{build_stable_set, Graph};

    #[test]
    fn complete_graph_theta_is_one() {
        let d = densify(&build_stable_set(&Graph::complete(4).unwrap())).unwrap();
        let out = dense_al_solve(&d, &DenseAlOptions::new(1e-7)).unwrap();
        assert!((out.pval + 1.0).abs() < 1e-5, "{}", out.pval);
    }

    #[test]
    fn empty_graph_theta_is_n() {
        let d = densify(&build_stable_set(&Graph::empty(5).unwrap())).unwrap();
        let out = dense_al_solve(&d, &DenseAlOptions::new(1e-7)).unwrap();
        assert!((out.pval + 5.0).abs() < 1e-5, "{}", out.pval);
    }
}
