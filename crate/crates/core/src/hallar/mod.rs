//! Inexact augmented Lagrangian outer loop.
//!
//! Outer iteration `t` approximately minimizes `L_β(·; p_{t−1})` over `Δ_τ`
//! with HLR, warm-started at the previous factor, and then updates the
//! multiplier `p_t = p_{t−1} + β (A(U_t U_tᴴ) − b)`. With
//! `θ_t = max{−λ_min(C + A* p_t), 0}` (a by-product of the last HLR
//! certificate) the pair `(p_t, θ_t)` is dual feasible by construction and
//! `ε_c`-complementary to `U_t U_tᴴ`.
//!
//! Two modes are offered. The *theory* mode keeps `β` fixed and uses the
//! subproblem tolerance `ε̄ = min{ε_c, ε_p² β / 6}`, stopping once
//! `‖A(U Uᴴ) − b‖ ≤ ε_p`. The *relative* mode (default) adapts `β` and `ε̄`
//! with a safeguarded feasibility-target rule and stops on the relative KKT
//! residuals.

mod al;

use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use al::AlObjective;

use crate::aipp::AippParams;
use crate::eig::{self, EigConfig};
use crate::error::{Error, Result};
use crate::factor::{project_ball_mut, Factor};
use crate::fista::FistaParams;
use crate::hlr::{default_recompress_trigger, hlr_solve, HlrConfig, RecompressConfig};
use crate::operator::LinearOperator;
use crate::problem::SdpProblem;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "mode")]
pub enum Tolerance {
    /// Stop when all relative KKT residuals are `≤ eps`.
    Relative { eps: f64 },
    /// Fixed-penalty method with absolute feasibility and complementarity
    /// tolerances.
    Theory { eps_p: f64, eps_c: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HallarConfig {
    pub tolerance: Tolerance,
    /// Initial penalty; defaults to `1 / max(1, ‖b‖)`.
    pub beta0: Option<f64>,
    /// Initial prox stepsize passed to every ADAP-AIPP call.
    pub lambda0: f64,
    /// Fixed ADAP-AIPP stationarity target. By default `β ε̄` in theory mode
    /// and `ε̄ / √τ` in relative mode, clamped to `[1e-10, 1]`.
    pub rho_bar: Option<f64>,
    pub sigma: f64,
    pub chi: f64,
    pub eig: EigConfig,
    pub recompress: bool,
    /// Column count that triggers recompression; defaults to
    /// `max(30, 2⌈√(2m)⌉)` capped at `n`.
    pub s_trigger: Option<usize>,
    pub recompress_tol: f64,
    /// Initial subproblem tolerance (relative mode).
    pub eps_bar0: Option<f64>,
    pub max_outer: usize,
    pub max_hlr_iter: usize,
    pub time_limit_s: Option<f64>,
    pub seed: u64,
}

impl Default for HallarConfig {
    fn default() -> Self {
        HallarConfig {
            tolerance: Tolerance::Relative { eps: 1e-5 },
            beta0: None,
            lambda0: 1.0,
            rho_bar: None,
            sigma: 0.3,
            chi: 0.01,
            eig: EigConfig::default(),
            recompress: true,
            s_trigger: None,
            recompress_tol: 1e-12,
            eps_bar0: None,
            max_outer: 1000,
            max_hlr_iter: 100_000,
            time_limit_s: None,
            seed: 0,
        }
    }
}

impl HallarConfig {
    pub fn relative(eps: f64) -> Self {
        HallarConfig {
            tolerance: Tolerance::Relative { eps },
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidArgument(what.to_string()));
        match self.tolerance {
            Tolerance::Relative { eps } if !(eps > 0.0) => return bad("eps must be positive"),
            Tolerance::Theory { eps_p, eps_c } if !(eps_p > 0.0 && eps_c > 0.0) => {
                return bad("eps_p and eps_c must be positive")
            }
            _ => {}
        }
        if self.beta0.is_some_and(|b| !(b > 0.0 && b.is_finite())) {
            return bad("beta0 must be positive");
        }
        if !(self.lambda0 > 0.0) {
            return bad("lambda0 must be positive");
        }
        if self.rho_bar.is_some_and(|r| !(r > 0.0)) {
            return bad("rho_bar must be positive");
        }
        if !(self.sigma > 0.0 && self.sigma < 0.5) {
            return bad("sigma must lie in (0, 1/2)");
        }
        if !(self.chi > 0.0 && self.chi < 1.0) {
            return bad("chi must lie in (0, 1)");
        }
        if !(self.eig.tol > 0.0) || self.eig.basis_size < 2 || self.eig.keep == 0 || self.eig.keep >= self.eig.basis_size {
            return bad("eigensolver settings need tol > 0 and 0 < keep < basis_size");
        }
        if self.time_limit_s.is_some_and(|t| !(t >= 0.0)) {
            return bad("time limit must be nonnegative");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Solved,
    IterCap,
    TimeCap,
    EigFailure,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KktResiduals {
    pub primal_rel: f64,
    pub gap_rel: f64,
    /// Zero by construction: the dual slack is defined as `C + A*p + θI`.
    pub dual_rel: f64,
}

impl KktResiduals {
    pub fn max(&self) -> f64 {
        self.primal_rel.max(self.gap_rel).max(self.dual_rel)
    }
}

/// Primal/dual evaluation of a candidate triple `(U, p, θ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub residuals: KktResiduals,
    pub pval: f64,
    pub dval: f64,
    /// `‖A(U Uᴴ) − b‖`
    pub feas: f64,
    /// `⟨X, S⟩ + θ (τ − tr X)` with `S = C + A*p + θ I`.
    pub complementarity: f64,
}

/// `−bᵀp − τθ`
pub fn dual_objective<F: Scalar>(problem: &SdpProblem<F>, p: &[f64], theta: f64) -> f64 {
    let bp: f64 = problem.b().iter().zip(p).map(|(b, p)| b * p).sum();
    -bp - problem.tau() * theta
}

/// Evaluates objectives, relative KKT residuals and complementarity.
pub fn evaluate<F: Scalar>(problem: &SdpProblem<F>, u: &Factor<F>, p: &[f64], theta: f64) -> Result<Evaluation> {
    if p.len() != problem.m() {
        return Err(Error::Dimension {
            what: "multiplier",
            expected: problem.m(),
            found: p.len(),
        });
    }
    let ax = problem.apply_constraint(u)?;
    let feas = ax
        .iter()
        .zip(problem.b())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    let b_norm = problem.b().iter().map(|b| b * b).sum::<f64>().sqrt();
    let pval = problem.objective_value(u)?;
    let dval = dual_objective(problem, p, theta);
    let tr = u.norm_sq();
    let slack = problem.dual_slack_operator(p.to_vec())?.quad_form(u) + theta * tr;
    Ok(Evaluation {
        residuals: KktResiduals {
            primal_rel: feas / (1.0 + b_norm),
            gap_rel: (pval - dval).abs() / (1.0 + pval.abs() + dval.abs()),
            dual_rel: 0.0,
        },
        pval,
        dval,
        feas,
        complementarity: slack + theta * (problem.tau() - tr),
    })
}

/// Relative KKT residuals of `(U Uᴴ, p, θ)`.
pub fn kkt_residuals<F: Scalar>(problem: &SdpProblem<F>, u: &Factor<F>, p: &[f64], theta: f64) -> Result<KktResiduals> {
    evaluate(problem, u, p, theta).map(|e| e.residuals)
}

/// `θ = max{−λ_min(C + A* p), 0}` from a fresh eigen-solve, together with
/// the eigen residual.
pub fn dual_theta<F: Scalar>(problem: &SdpProblem<F>, p: &[f64], cfg: &EigConfig) -> Result<(f64, f64)> {
    let op = problem.dual_slack_operator(p.to_vec())?;
    let e = eig::min_eigenpair(&op, cfg)?;
    Ok(((-e.value).max(0.0), e.residual))
}

/// Feasibility-target penalty schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenaltyState {
    pub beta: f64,
    pub beta_cap: f64,
    /// Feasibility target `ω`.
    pub omega: f64,
    pub eps_bar: f64,
    pub eps_bar_floor: f64,
    /// `‖A(U_t U_tᴴ) − b‖`
    pub feas: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenaltyUpdate {
    pub beta: f64,
    pub omega: f64,
    pub eps_bar: f64,
    pub accept_multiplier: bool,
    /// The penalty is at its cap and the multiplier was accepted anyway.
    pub capped: bool,
}

/// If the feasibility target is met, accept the multiplier, halve the target
/// and tighten `ε̄` by 0.3 (down to its floor); otherwise reject the
/// multiplier and quadruple `β`, unless `β` is already at its cap.
pub fn adapt_penalty(s: &PenaltyState) -> PenaltyUpdate {
    if s.feas <= s.omega {
        PenaltyUpdate {
            beta: s.beta,
            omega: 0.5 * s.omega,
            eps_bar: s.eps_bar_floor.max(0.3 * s.eps_bar),
            accept_multiplier: true,
            capped: false,
        }
    } else if s.beta >= s.beta_cap {
        PenaltyUpdate {
            beta: s.beta,
            omega: s.omega,
            eps_bar: s.eps_bar.max(s.eps_bar_floor),
            accept_multiplier: true,
            capped: true,
        }
    } else {
        PenaltyUpdate {
            beta: (4.0 * s.beta).min(s.beta_cap),
            omega: s.omega,
            eps_bar: s.eps_bar.max(s.eps_bar_floor),
            accept_multiplier: false,
            capped: false,
        }
    }
}

/// Diagnostics of one outer iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OuterRecord {
    pub t: usize,
    pub beta: f64,
    pub eps_bar: f64,
    pub rho_bar: f64,
    pub hlr_iters: usize,
    pub aipp_iters: usize,
    pub elapsed_s: f64,
    pub rank: usize,
    /// Final HLR gap `ε_k ≤ ε̄`.
    pub hlr_gap: f64,
    pub theta: f64,
    pub feas: f64,
    pub omega: f64,
    pub accepted: bool,
    pub complementarity: f64,
    pub primal_rel: f64,
    pub gap_rel: f64,
    pub pval: f64,
    pub dval: f64,
    pub p_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub status: Status,
    pub residuals: KktResiduals,
    /// Objective values in minimization form.
    pub pval: f64,
    pub dval: f64,
    /// Objective values multiplied by the problem's reporting scale.
    pub pval_user: f64,
    pub dval_user: f64,
    pub theta: f64,
    pub outer_iters: usize,
    /// Minimum-eigenpair computations inside HLR.
    pub mev_count: usize,
    pub fista_calls: usize,
    pub fista_iters: usize,
    pub aipp_iters: usize,
    pub eig_matvecs: usize,
    /// Factor column count after each outer iteration.
    pub rank_history: Vec<usize>,
    /// Penalty used by each outer iteration.
    pub beta_history: Vec<f64>,
    pub wall_time_s: f64,
    pub warnings: Vec<String>,
    pub trace: Vec<OuterRecord>,
}

impl Report {
    pub fn max_rank(&self) -> usize {
        self.rank_history.iter().copied().max().unwrap_or(0)
    }
}

/// Primal factor and dual certificate `(U, p, θ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution<F> {
    pub u: Factor<F>,
    pub p: Vec<f64>,
    pub theta: f64,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn status_of(err: &Error) -> Status {
    match err {
        Error::TimeLimit => Status::TimeCap,
        Error::EigNonConverged { .. } => Status::EigFailure,
        _ => Status::IterCap,
    }
}

struct Counters {
    mev: usize,
    fista: usize,
    fista_iters: usize,
    aipp: usize,
    matvecs: usize,
}

/// Runs the augmented Lagrangian method on `problem`.
pub fn solve<F: Scalar>(problem: &SdpProblem<F>, cfg: &HallarConfig) -> Result<(Report, Solution<F>)> {
    cfg.validate()?;
    let start = Instant::now();
    let deadline = cfg.time_limit_s.map(|s| start + Duration::from_secs_f64(s));
    let n = problem.n();
    let m = problem.m();
    let tau = problem.tau();
    let b_norm = norm(problem.b());

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut u = Factor::<F>::random(n, 1, &mut rng);
    let un = u.norm();
    if un > 0.0 {
        u.scale_mut(1.0 / un);
    }
    project_ball_mut(&mut u, tau.sqrt());
    let mut p = vec![0.0; m];

    let beta0 = cfg.beta0.unwrap_or(1.0 / b_norm.max(1.0));
    let beta_cap = 1e8 * beta0;
    let mut beta = beta0;

    let ax0 = problem.apply_constraint(&u)?;
    let feas0 = norm(&ax0.iter().zip(problem.b()).map(|(a, b)| a - b).collect::<Vec<_>>());
    let mut scale = 1.0 + problem.objective_value(&u)?.abs();

    // (ε_p, ε_c) and the tolerance floor for the current scale
    let tolerances = |scale: f64| match cfg.tolerance {
        Tolerance::Relative { eps } => (eps * (1.0 + b_norm), eps * scale),
        Tolerance::Theory { eps_p, eps_c } => (eps_p, eps_c),
    };
    let floor_of = |scale: f64, beta: f64| {
        let (eps_p, eps_c) = tolerances(scale);
        match cfg.tolerance {
            Tolerance::Relative { .. } => 0.25 * eps_c,
            Tolerance::Theory { .. } => eps_c.min(eps_p * eps_p * beta / 6.0),
        }
    };
    // Theory mode: β min{ε_c, ε_p² β / 6} = β ε̄. Relative mode: a factor
    // residual ρ̄ moves the gap by about ρ̄ ‖Y‖ / 2 ≤ ρ̄ √τ / 2, so ε̄ / √τ
    // keeps the two on the same scale regardless of β.
    let rho_of = |beta: f64, eps_bar: f64| {
        cfg.rho_bar.unwrap_or_else(|| {
            let r = match cfg.tolerance {
                Tolerance::Relative { .. } => eps_bar / problem.tau().sqrt(),
                Tolerance::Theory { .. } => beta * eps_bar,
            };
            r.clamp(1e-10, 1.0)
        })
    };

    let (eps_p0, _) = tolerances(scale);
    let mut omega = eps_p0.max(0.1 * feas0);
    let mut eps_bar = match cfg.tolerance {
        Tolerance::Relative { .. } => floor_of(scale, beta).max(cfg.eps_bar0.unwrap_or(1e-2 * scale)),
        Tolerance::Theory { .. } => floor_of(scale, beta),
    };

    let trigger = cfg.s_trigger.unwrap_or_else(|| default_recompress_trigger(n, m));
    let mut warm_m = None;
    let mut counters = Counters {
        mev: 0,
        fista: 0,
        fista_iters: 0,
        aipp: 0,
        matvecs: 0,
    };
    let mut rank_history = Vec::new();
    let mut beta_history = Vec::new();
    let mut trace = Vec::new();
    let mut warnings = Vec::new();
    let mut status = Status::IterCap;
    let mut last: Option<(Solution<F>, Evaluation)> = None;

    for t in 1..=cfg.max_outer {
        if deadline.is_some_and(|d| Instant::now() >= d) {
            status = Status::TimeCap;
            break;
        }
        let rho_bar = rho_of(beta, eps_bar);
        let hcfg = HlrConfig {
            eps_bar,
            aipp: AippParams {
                lambda0: cfg.lambda0,
                rho_bar,
                fista: FistaParams {
                    sigma: cfg.sigma,
                    chi: cfg.chi,
                    ..FistaParams::default()
                },
                max_iter: 100_000,
                warm_m,
            },
            eig: EigConfig {
                seed: cfg.eig.seed ^ cfg.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ ((t as u64) << 32),
                ..cfg.eig
            },
            fixed_eig_tol: false,
            max_iter: cfg.max_hlr_iter,
            recompress: cfg.recompress.then_some(RecompressConfig {
                trigger,
                tol: cfg.recompress_tol,
            }),
            deadline,
        };
        let obj = AlObjective::new(problem, &p, beta)?;
        let out = match hlr_solve(&obj, &u, &hcfg) {
            Ok(out) => out,
            Err(fail) => {
                log::warn!("outer iteration {t}: {}", fail.error);
                warnings.push(format!("outer iteration {t}: {}", fail.error));
                counters.mev += fail.mev_count;
                status = status_of(&fail.error);
                if last.is_none() || fail.last != u {
                    let ax = problem.apply_constraint(&fail.last)?;
                    let q = obj.multiplier_estimate(&ax);
                    let op = problem.dual_slack_operator(q.clone())?;
                    let (e, _) = eig::min_eigenpair_best(&op, &cfg.eig)?;
                    let theta = (-e.value).max(0.0);
                    let ev = evaluate(problem, &fail.last, &q, theta)?;
                    last = Some((
                        Solution {
                            u: fail.last,
                            p: q,
                            theta,
                        },
                        ev,
                    ));
                }
                break;
            }
        };
        counters.mev += out.k;
        counters.fista += out.fista_calls;
        counters.fista_iters += out.fista_iterations;
        counters.aipp += out.aipp_iterations;
        counters.matvecs += out.eig_matvecs;
        warm_m = Some(out.m_bar);
        u = out.y;

        let ax = problem.apply_constraint(&u)?;
        let p_cand = obj.multiplier_estimate(&ax);
        let theta = out.theta;
        let ev = evaluate(problem, &u, &p_cand, theta)?;
        scale = 1.0 + ev.pval.abs() + ev.dval.abs();
        let (eps_p, eps_c) = tolerances(scale);

        let solved = match cfg.tolerance {
            Tolerance::Relative { eps } => ev.residuals.primal_rel <= eps && ev.residuals.gap_rel <= eps,
            Tolerance::Theory { .. } => ev.feas <= eps_p && ev.complementarity <= eps_c,
        };
        let update = match cfg.tolerance {
            Tolerance::Relative { .. } => adapt_penalty(&PenaltyState {
                beta,
                beta_cap,
                omega,
                eps_bar,
                eps_bar_floor: floor_of(scale, beta),
                feas: ev.feas,
            }),
            Tolerance::Theory { .. } => PenaltyUpdate {
                beta,
                omega,
                eps_bar,
                accept_multiplier: true,
                capped: false,
            },
        };
        rank_history.push(u.s());
        beta_history.push(beta);
        trace.push(OuterRecord {
            t,
            beta,
            eps_bar,
            rho_bar,
            hlr_iters: out.k,
            aipp_iters: out.aipp_iterations,
            elapsed_s: start.elapsed().as_secs_f64(),
            rank: u.s(),
            hlr_gap: out.eps,
            theta,
            feas: ev.feas,
            omega,
            accepted: solved || update.accept_multiplier,
            complementarity: ev.complementarity,
            primal_rel: ev.residuals.primal_rel,
            gap_rel: ev.residuals.gap_rel,
            pval: ev.pval,
            dval: ev.dval,
            p_norm: norm(&p_cand),
        });
        log::debug!(
            "t={t} beta={beta:.3e} eps_bar={eps_bar:.3e} k={} s={} feas={:.3e} gap_rel={:.3e} pval={:.10e}",
            out.k,
            u.s(),
            ev.feas,
            ev.residuals.gap_rel,
            ev.pval
        );
        last = Some((
            Solution {
                u: u.clone(),
                p: p_cand.clone(),
                theta,
            },
            ev,
        ));
        if solved {
            status = Status::Solved;
            break;
        }
        if update.capped && !warnings.iter().any(|w: &String| w.starts_with("penalty cap")) {
            warnings.push(format!("penalty cap {beta_cap:.3e} reached"));
        }
        if update.accept_multiplier {
            p = p_cand;
        }
        beta = update.beta;
        omega = update.omega;
        eps_bar = match cfg.tolerance {
            Tolerance::Relative { .. } => update.eps_bar,
            Tolerance::Theory { .. } => floor_of(scale, beta),
        };
        let _ = eps_c;
    }

    let (solution, ev) = match last {
        Some(x) => x,
        None => {
            // no completed iteration: certify the starting point
            let q = p.clone();
            let op = problem.dual_slack_operator(q.clone())?;
            let (e, _) = eig::min_eigenpair_best(&op, &cfg.eig)?;
            let theta = (-e.value).max(0.0);
            let ev = evaluate(problem, &u, &q, theta)?;
            (Solution { u, p: q, theta }, ev)
        }
    };
    let report = Report {
        status,
        residuals: ev.residuals,
        pval: ev.pval,
        dval: ev.dval,
        pval_user: problem.objective_scale * ev.pval,
        dval_user: problem.objective_scale * ev.dval,
        theta: solution.theta,
        outer_iters: trace.len(),
        mev_count: counters.mev,
        fista_calls: counters.fista,
        fista_iters: counters.fista_iters,
        aipp_iters: counters.aipp,
        eig_matvecs: counters.matvecs,
        rank_history,
        beta_history,
        wall_time_s: start.elapsed().as_secs_f64(),
        warnings,
        trace,
    };
    Ok((report, solution))
}
