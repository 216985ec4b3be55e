//! Hybrid low-rank method for `min {g(Z) : Z ∈ Δ_τ}` with `g` convex and
//! smooth.
//!
//! Iterates live in factored form `Z = Y Yᴴ`. Each iteration runs ADAP-AIPP
//! on `Y ↦ g(Y Yᴴ)` over the ball `‖Y‖_F ≤ √τ`, computes a minimum eigenpair
//! of `∇g(Z)` to evaluate the optimality gap, and, unless the gap is below the
//! target, takes a Frank-Wolfe step which appends one column (or resets the
//! factor to the vertex when the full step is optimal).

use std::time::Instant;

use nalgebra::SymmetricEigen;
use serde::{Deserialize, Serialize};

use crate::aipp::{adap_aipp, AippParams, BallObjective};
use crate::eig::{self, EigConfig};
use crate::error::{Error, Result};
use crate::factor::Factor;
use crate::operator::LinearOperator;
use crate::scalar::{vec, Scalar};
use crate::spectraplex::{gap_from_parts, vertex_from_eig, FwVertex, Vertex};

/// Convex objective over the spectraplex, accessed through factors.
pub trait SpectraplexObjective<F: Scalar> {
    fn n(&self) -> usize;

    fn tau(&self) -> f64;

    /// `g(Y Yᴴ)`
    fn value(&self, y: &Factor<F>) -> f64;

    /// `(g(Y Yᴴ), 2 ∇g(Y Yᴴ) Y)`
    fn value_and_gradient(&self, y: &Factor<F>) -> (f64, Factor<F>);

    /// The self-adjoint operator `∇g(Y Yᴴ)`.
    fn gradient_operator<'a>(&'a self, y: &Factor<F>) -> Box<dyn LinearOperator<F> + 'a>;

    /// Exact minimizer over `α ∈ [0, 1]` of `g((1−α) Y Yᴴ + α V)` where `V`
    /// is the vertex. The default is a golden-section search.
    fn line_search(&self, y: &Factor<F>, fw: &FwVertex<F>, _gap: f64) -> f64 {
        segment_search(self, y, &fw.vertex)
    }

    /// Known Lipschitz constant of `∇g`, if any.
    fn smoothness(&self) -> Option<f64> {
        None
    }
}

/// Adapter presenting `Y ↦ g(Y Yᴴ)` on the ball of radius `√τ`.
pub struct Factored<'a, O: ?Sized>(pub &'a O);

impl<F: Scalar, O: SpectraplexObjective<F> + ?Sized> BallObjective<Factor<F>> for Factored<'_, O> {
    fn value(&self, w: &Factor<F>) -> f64 {
        self.0.value(w)
    }
    fn value_and_gradient(&self, w: &Factor<F>) -> (f64, Factor<F>) {
        self.0.value_and_gradient(w)
    }
    fn radius(&self) -> f64 {
        self.0.tau().sqrt()
    }
}

/// Golden-section line search along the FW segment from `Y Yᴴ` toward the
/// vertex.
pub fn segment_search<F, O>(obj: &O, y: &Factor<F>, vertex: &Vertex<F>) -> f64
where
    F: Scalar,
    O: SpectraplexObjective<F> + ?Sized,
{
    golden_section(|a| obj.value(&fw_escape(y, vertex, a, obj.tau())), 1e-12)
}

/// Minimizes a unimodal function on `[0, 1]`: golden-section bracketing
/// followed by a parabolic polish on the final bracket, which makes the
/// result exact for quadratics up to round-off.
pub fn golden_section<G: Fn(f64) -> f64>(phi: G, tol: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut a, mut b) = (0.0f64, 1.0f64);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = phi(c);
    let mut fd = phi(d);
    let polish_width = 1e-4f64.max(tol);
    while b - a > polish_width {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = phi(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = phi(d);
        }
    }
    let (fa, fb) = (phi(a), phi(b));
    let m = 0.5 * (a + b);
    let fm = phi(m);
    let h = 0.5 * (b - a);
    let curv = fa - 2.0 * fm + fb;
    let mut cands = vec![(a, fa), (b, fb), (m, fm)];
    if curv > 0.0 {
        let t = (m + 0.5 * h * (fa - fb) / curv).clamp(a, b);
        cands.push((t, phi(t)));
    }
    // endpoints of [0, 1] are always admissible
    cands.push((0.0, phi(0.0)));
    cands.push((1.0, phi(1.0)));
    cands
        .into_iter()
        .min_by(|x, y| x.1.total_cmp(&y.1))
        .map(|(t, _)| t)
        .unwrap_or(0.0)
}

/// Frank-Wolfe update in factored form:
/// `Ỹ Ỹᴴ = (1−α) Y Yᴴ + α τ y yᴴ` (or `(1−α) Y Yᴴ` for the zero vertex).
pub fn fw_escape<F: Scalar>(y: &Factor<F>, vertex: &Vertex<F>, alpha: f64, tau: f64) -> Factor<F> {
    debug_assert!((0.0..=1.0).contains(&alpha));
    if alpha <= 0.0 {
        return y.clone();
    }
    if alpha >= 1.0 {
        return match vertex {
            Vertex::Rank1(v) => {
                let mut col = v.clone();
                vec::scale(tau.sqrt(), &mut col);
                Factor::from_vector(col)
            }
            Vertex::Zero => Factor::zeros(y.n(), 1),
        };
    }
    let mut out = y.clone();
    out.scale_mut((1.0 - alpha).sqrt());
    if let Vertex::Rank1(v) = vertex {
        let mut col = v.clone();
        vec::scale((alpha * tau).sqrt(), &mut col);
        out.push_column(&col);
    }
    out
}

/// Reduces the column count while preserving `Y Yᴴ`: with `Yᴴ Y = Q Λ Qᴴ`,
/// returns `Y Q_k` for the leading eigenvalues, dropping the tail whose
/// contribution `(Σ_dropped λ²)^{1/2}` is at most `tol · ‖Y Yᴴ‖_F`.
pub fn recompress<F: Scalar>(y: &Factor<F>, tol: f64) -> Factor<F> {
    if y.s() <= 1 {
        return y.clone();
    }
    let eig = SymmetricEigen::new(y.gram());
    let mut order: Vec<usize> = (0..y.s()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let vals: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i].max(0.0)).collect();
    let total = vals.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut keep = vals.len();
    let mut dropped_sq = 0.0;
    while keep > 1 {
        let next = dropped_sq + vals[keep - 1] * vals[keep - 1];
        if next.sqrt() <= tol * total {
            dropped_sq = next;
            keep -= 1;
        } else {
            break;
        }
    }
    let q = nalgebra::DMatrix::from_fn(y.s(), keep, |r, c| eig.eigenvectors[(r, order[c])]);
    y.mul_small(&q)
}

/// Column-count bound above which [`recompress`] is applied.
pub fn default_recompress_trigger(n: usize, m: usize) -> usize {
    let bp = 2 * ((2.0 * m as f64).sqrt().ceil() as usize);
    30usize.max(bp).min(n.max(1))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecompressConfig {
    pub trigger: usize,
    pub tol: f64,
}

#[derive(Debug, Clone)]
pub struct HlrConfig {
    pub eps_bar: f64,
    pub aipp: AippParams,
    /// Base eigensolver settings; the tolerance is set per call from the gap
    /// target unless `fixed_eig_tol` is true.
    pub eig: EigConfig,
    pub fixed_eig_tol: bool,
    pub max_iter: usize,
    pub recompress: Option<RecompressConfig>,
    pub deadline: Option<Instant>,
}

impl HlrConfig {
    pub fn new(eps_bar: f64) -> Self {
        HlrConfig {
            eps_bar,
            aipp: AippParams::default(),
            eig: EigConfig::default(),
            fixed_eig_tol: false,
            max_iter: 100_000,
            recompress: None,
            deadline: None,
        }
    }
}

/// Objective values around one HLR iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HlrStep {
    /// `g(Z_k)` after the ADAP-AIPP call.
    pub g_z: f64,
    /// `g(Z̃_k)` after the FW step (equals `g_z` on the final iteration).
    pub g_tilde: f64,
    pub eps: f64,
    pub theta: f64,
    pub alpha: f64,
    /// Column count of `Y_k`.
    pub rank: usize,
}

#[derive(Debug, Clone)]
pub struct HlrOutput<F> {
    pub y: Factor<F>,
    pub theta: f64,
    pub eps: f64,
    /// Iterations, equal to the number of minimum-eigenpair computations.
    pub k: usize,
    pub aipp_iterations: usize,
    pub fista_calls: usize,
    pub fista_iterations: usize,
    pub halvings: usize,
    pub eig_matvecs: usize,
    pub m_bar: f64,
    pub rank_history: Vec<usize>,
    pub steps: Vec<HlrStep>,
    /// Minimum eigenvector of the final gradient (when θ > 0).
    pub vertex: Vertex<F>,
    /// `g(Z̄₀)` at the input factor.
    pub g_initial: f64,
}

/// Failure with the last iterate kept.
#[derive(Debug, Clone)]
pub struct HlrFailure<F> {
    pub error: Error,
    pub last: Factor<F>,
    pub mev_count: usize,
}

/// Eigen-solve with one budget-doubling retry.
pub(crate) fn solve_vertex<F: Scalar, O: LinearOperator<F> + ?Sized>(
    op: &O,
    cfg: &EigConfig,
) -> Result<FwVertex<F>> {
    match eig::min_eigenpair(op, cfg) {
        Ok(e) => Ok(vertex_from_eig(e)),
        Err(Error::EigNonConverged { .. }) => {
            let retry = EigConfig {
                max_matvecs: cfg.max_matvecs.saturating_mul(2),
                seed: cfg.seed.wrapping_add(0x5851_F42D),
                ..*cfg
            };
            eig::min_eigenpair(op, &retry).map(vertex_from_eig)
        }
        Err(e) => Err(e),
    }
}

/// Relative eigen tolerance that makes the eigenvalue error negligible
/// against the gap target: absolute residual `min(ε̄/(10τ), 1e-8‖G‖)`.
pub fn eig_tolerance(eps_bar: f64, tau: f64, g_norm: f64) -> f64 {
    let abs = (eps_bar / (10.0 * tau)).min(1e-8 * g_norm.max(f64::MIN_POSITIVE));
    (abs / g_norm.max(1.0)).max(1e-14)
}

/// Runs HLR from `y0` (with `‖y0‖_F ≤ √τ`).
pub fn hlr_solve<F, O>(obj: &O, y0: &Factor<F>, cfg: &HlrConfig) -> std::result::Result<HlrOutput<F>, HlrFailure<F>>
where
    F: Scalar,
    O: SpectraplexObjective<F> + ?Sized,
{
    let fail = |error: Error, last: &Factor<F>, k: usize| HlrFailure {
        error,
        last: last.clone(),
        mev_count: k,
    };
    let tau = obj.tau();
    if y0.norm() > tau.sqrt() * (1.0 + 1e-12) + 1e-12 {
        return Err(fail(
            Error::InvalidArgument("initial factor outside the trace ball".into()),
            y0,
            0,
        ));
    }
    if !(cfg.eps_bar > 0.0) {
        return Err(fail(
            Error::InvalidArgument(format!("eps_bar = {} must be positive", cfg.eps_bar)),
            y0,
            0,
        ));
    }
    let factored = Factored(obj);
    let g_initial = obj.value(y0);
    let mut y_tilde = y0.clone();
    let mut aipp = cfg.aipp;
    let mut out = HlrOutput {
        y: y0.clone(),
        theta: 0.0,
        eps: f64::INFINITY,
        k: 0,
        aipp_iterations: 0,
        fista_calls: 0,
        fista_iterations: 0,
        halvings: 0,
        eig_matvecs: 0,
        m_bar: aipp.warm_m.unwrap_or(1.0),
        rank_history: Vec::new(),
        steps: Vec::new(),
        vertex: Vertex::Zero,
        g_initial,
    };

    for k in 1..=cfg.max_iter {
        if cfg.deadline.is_some_and(|d| Instant::now() >= d) {
            return Err(fail(Error::TimeLimit, &y_tilde, k - 1));
        }
        let a = match adap_aipp(&factored, &y_tilde, &aipp, cfg.deadline) {
            Ok(a) => a,
            Err(e) => return Err(fail(e, &y_tilde, k - 1)),
        };
        out.aipp_iterations += a.iterations;
        out.fista_calls += a.fista_calls;
        out.fista_iterations += a.fista_iterations;
        out.halvings += a.halvings;
        out.m_bar = a.m_bar;
        aipp.warm_m = Some(a.m_bar);
        let y_k = a.w;
        let g_z = a.g_value;
        out.rank_history.push(y_k.s());

        let grad = obj.gradient_operator(&y_k);
        let mut eig_cfg = cfg.eig;
        eig_cfg.seed = cfg.eig.seed.wrapping_add(k as u64);
        if !cfg.fixed_eig_tol {
            let g_norm = eig::estimate_norm(&*grad, 20, eig_cfg.seed);
            eig_cfg.tol = eig_tolerance(cfg.eps_bar, tau, g_norm);
        }
        let fw = match solve_vertex(&*grad, &eig_cfg) {
            Ok(v) => v,
            Err(e) => return Err(fail(e, &y_k, k)),
        };
        out.eig_matvecs += fw.eig.matvecs;
        let gz_lin = grad.quad_form(&y_k);
        drop(grad);
        let eps = gap_from_parts(gz_lin, fw.theta, tau).max(0.0);
        out.k = k;

        if eps <= cfg.eps_bar {
            out.steps.push(HlrStep {
                g_z,
                g_tilde: g_z,
                eps,
                theta: fw.theta,
                alpha: 0.0,
                rank: y_k.s(),
            });
            out.y = y_k;
            out.theta = fw.theta;
            out.eps = eps;
            out.vertex = fw.vertex;
            return Ok(out);
        }

        let alpha = obj.line_search(&y_k, &fw, eps).clamp(0.0, 1.0);
        let mut next = fw_escape(&y_k, &fw.vertex, alpha, tau);
        if let Some(rc) = cfg.recompress {
            // also drop numerically null directions below the trigger; the
            // factor keeps collinear columns once AIPP has converged
            let c = recompress(&next, rc.tol);
            if next.s() > rc.trigger || c.s() < next.s() {
                next = c;
            }
        }
        let g_tilde = obj.value(&next);
        out.steps.push(HlrStep {
            g_z,
            g_tilde,
            eps,
            theta: fw.theta,
            alpha,
            rank: y_k.s(),
        });
        log::trace!("hlr k={k} g={g_z:.6e} eps={eps:.3e} alpha={alpha:.3e} s={}", next.s());
        out.y = y_k;
        y_tilde = next;
    }
    Err(fail(
        Error::IterationCap {
            method: "HLR",
            cap: cfg.max_iter,
            best: out.eps,
        },
        &y_tilde,
        cfg.max_iter,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn escape_zero_step_is_identity() {
        let y = Factor::from_vector(vec![0.6, 0.0]);
        let v = Vertex::Rank1(vec![0.0, 1.0]);
        assert_eq!(fw_escape(&y, &v, 0.0, 1.0), y);
    }

    #[test]
    fn escape_full_step_resets_rank() {
        let y = Factor::from_columns(2, &[vec![0.6, 0.0], vec![0.0, 0.1]]).unwrap();
        let v = Vertex::Rank1(vec![0.0, 1.0]);
        let out = fw_escape(&y, &v, 1.0, 1.0);
        assert_eq!(out.s(), 1);
        assert_eq!(out.data(), &[0.0, 1.0]);
    }

    #[test]
    fn escape_partial_step_gram_identity() {
        let y = Factor::from_vector(vec![1.0, 0.0]);
        let v = Vertex::Rank1(vec![0.0, 1.0]);
        let out = fw_escape(&y, &v, 0.25, 1.0);
        assert_eq!(out.s(), 2);
        let x = out.outer();
        assert!((x[(0, 0)] - 0.75).abs() < 1e-15);
        assert!((x[(1, 1)] - 0.25).abs() < 1e-15);
        assert!(x[(0, 1)].abs() < 1e-15);
        assert!((out.column(0)[0] - 0.75f64.sqrt()).abs() < 1e-15);
        assert!((out.column(1)[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn escape_toward_zero_keeps_columns() {
        let y = Factor::from_columns(2, &[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let out = fw_escape(&y, &Vertex::Zero, 0.36, 1.0);
        assert_eq!(out.s(), 2);
        assert!((out.norm_sq() - 2.0 * 0.64).abs() < 1e-14);
    }

    #[test]
    fn recompress_merges_duplicate_columns() {
        let c = vec![1.0, 2.0, -1.0];
        let y = Factor::from_columns(3, &[c.clone(), c.clone()]).unwrap();
        let r = recompress(&y, 1e-12);
        assert_eq!(r.s(), 1);
        let expect: Vec<f64> = c.iter().map(|v| v * 2f64.sqrt()).collect();
        let sign = r.column(0)[0].signum();
        for (a, b) in r.column(0).iter().zip(&expect) {
            assert!((a * sign - b).abs() < 1e-12);
        }
    }

    #[test]
    fn recompress_orthonormal_is_lossless() {
        let y = Factor::from_columns(
            3,
            &[
                vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)],
                vec![Complex64::new(0.0, 0.0), Complex64::new(0.0, 1.0), Complex64::new(0.0, 0.0)],
            ],
        )
        .unwrap();
        let r = recompress(&y, 1e-12);
        assert_eq!(r.s(), 2);
        let d = r.outer() - y.outer();
        assert!(d.norm() < 1e-12);
    }

    #[test]
    fn golden_section_quadratic_and_endpoints() {
        let t = golden_section(|a| (a - 0.3137).powi(2), 1e-12);
        assert!((t - 0.3137).abs() < 1e-9, "{t}");
        assert_eq!(golden_section(|a| a, 1e-12), 0.0);
        assert_eq!(golden_section(|a| -a, 1e-12), 1.0);
    }

    #[test]
    fn trigger_rule() {
        assert_eq!(default_recompress_trigger(1000, 6), 30);
        assert_eq!(default_recompress_trigger(10, 6), 10);
        assert_eq!(default_recompress_trigger(10_000, 1536), 2 * 56);
    }
}
