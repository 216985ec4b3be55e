//! Report file (schema 1) and iteration trace CSV.

use std::fmt::Write as _;

use anyhow::{bail, Result};
use hallar_core::hallar::{KktResiduals, OuterRecord};
use hallar_core::{Factor, Field, HallarConfig, Report, Scalar, Solution, Status};
use serde::{Deserialize, Serialize};

use crate::instance::{Kind, Source};
use crate::json::fmt_f64;

pub const SCHEMA: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceInfo {
    pub kind: Kind,
    pub source: Source,
    pub field: Field,
    pub n: usize,
    pub m: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counters {
    pub outer: usize,
    pub mev: usize,
    pub fista: usize,
    #[serde(default)]
    pub fista_iters: usize,
    #[serde(default)]
    pub aipp: usize,
    #[serde(default)]
    pub eig_matvecs: usize,
}

/// Primal factor (column-major; complex entries interleaved as re, im) and
/// multiplier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionRecord {
    pub n: usize,
    pub s: usize,
    pub factor: Vec<f64>,
    pub p: Vec<f64>,
}

impl SolutionRecord {
    pub fn from_solution<F: Scalar>(sol: &Solution<F>) -> Self {
        let mut factor = Vec::with_capacity(sol.u.data().len() * if F::FIELD == Field::Complex { 2 } else { 1 });
        for z in sol.u.data() {
            factor.push(z.real());
            if F::FIELD == Field::Complex {
                factor.push(z.im_part());
            }
        }
        SolutionRecord {
            n: sol.u.n(),
            s: sol.u.s(),
            factor,
            p: sol.p.clone(),
        }
    }

    pub fn factor<F: Scalar>(&self) -> Result<Factor<F>> {
        let data: Vec<F> = match F::FIELD {
            Field::Real => self.factor.iter().map(|&v| F::from_parts(v, 0.0)).collect(),
            Field::Complex => {
                if self.factor.len() % 2 != 0 {
                    bail!("complex factor has an odd number of entries");
                }
                self.factor.chunks(2).map(|c| F::from_parts(c[0], c[1])).collect()
            }
        };
        Ok(Factor::from_col_major(self.n, self.s, data)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub schema: u32,
    pub instance: InstanceInfo,
    pub status: Status,
    pub residuals: KktResiduals,
    pub pval: f64,
    pub dval: f64,
    pub pval_user: f64,
    pub dval_user: f64,
    pub theta: f64,
    pub counters: Counters,
    pub rank_history: Vec<usize>,
    pub beta_history: Vec<f64>,
    pub wall_time_s: f64,
    pub seed: u64,
    pub config_echo: HallarConfig,
    #[serde(default)]
    pub warnings: Vec<String>,
    /// Distance to the planted solution when the instance carries one: the
    /// phase-aligned signal error or the relative block error.
    #[serde(default)]
    pub recovery_error: Option<f64>,
    pub solution: SolutionRecord,
}

impl ReportFile {
    pub fn new<F: Scalar>(
        instance: InstanceInfo,
        report: &Report,
        sol: &Solution<F>,
        cfg: &HallarConfig,
        recovery_error: Option<f64>,
    ) -> Self {
        ReportFile {
            schema: SCHEMA,
            instance,
            status: report.status,
            residuals: report.residuals,
            pval: report.pval,
            dval: report.dval,
            pval_user: report.pval_user,
            dval_user: report.dval_user,
            theta: report.theta,
            counters: Counters {
                outer: report.outer_iters,
                mev: report.mev_count,
                fista: report.fista_calls,
                fista_iters: report.fista_iters,
                aipp: report.aipp_iters,
                eig_matvecs: report.eig_matvecs,
            },
            rank_history: report.rank_history.clone(),
            beta_history: report.beta_history.clone(),
            wall_time_s: report.wall_time_s,
            seed: cfg.seed,
            config_echo: cfg.clone(),
            warnings: report.warnings.clone(),
            recovery_error,
            solution: SolutionRecord::from_solution(sol),
        }
    }

    pub fn max_rank(&self) -> usize {
        self.rank_history.iter().copied().max().unwrap_or(0)
    }
}

pub fn trace_csv(trace: &[OuterRecord]) -> String {
    let mut out = String::from(
        "t,beta,eps_bar,rho_bar,hlr_iters,aipp_iters,rank,hlr_gap,theta,feas,omega,accepted,complementarity,primal_rel,gap_rel,pval,dval,p_norm,elapsed_s\n",
    );
    for r in trace {
        let f = |v: f64| fmt_f64(v);
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.t,
            f(r.beta),
            f(r.eps_bar),
            f(r.rho_bar),
            r.hlr_iters,
            r.aipp_iters,
            r.rank,
            f(r.hlr_gap),
            f(r.theta),
            f(r.feas),
            f(r.omega),
            r.accepted,
            f(r.complementarity),
            f(r.primal_rel),
            f(r.gap_rel),
            f(r.pval),
            f(r.dval),
            f(r.p_norm),
            f(r.elapsed_s)
        );
    }
    out
}
