//! Solve, verify and bench, independent of argument parsing.

use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use hallar_core::eig::EigConfig;
use hallar_core::hallar::{dual_theta, evaluate, OuterRecord};
use hallar_core::problems::{leading_signal, phase_error, recovered_block};
use hallar_core::{solve, Field, HallarConfig, Scalar, SdpProblem, Solution, Status};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::instance::{AnyProblem, Instance, Source};
use crate::json::fmt_f64;
use crate::report::{InstanceInfo, ReportFile};

/// Agreement required between stored and recomputed report values.
pub const VERIFY_TOL: f64 = 1e-9;

pub struct SolveOutcome {
    pub report: ReportFile,
    pub trace: Vec<OuterRecord>,
}

fn phase_recovery(inst: &Instance, sol: &Solution<Complex64>) -> Option<f64> {
    match inst {
        Instance::PhaseRetrieval(model) => Some(phase_error(&leading_signal(&sol.u), model.truth.as_ref()?)),
        _ => None,
    }
}

fn block_recovery(inst: &Instance, sol: &Solution<f64>) -> Option<f64> {
    let Instance::MatComp { obs, truth: Some(t) } = inst else {
        return None;
    };
    let y = recovered_block(&sol.u, obs.n1());
    let (mut num, mut den) = (0.0, 0.0);
    for (i, row) in t.iter().enumerate() {
        for (j, m) in row.iter().enumerate() {
            num += (y[(i, j)] - m).powi(2);
            den += m * m;
        }
    }
    Some((num / den).sqrt())
}

fn run<F: Scalar>(
    problem: &SdpProblem<F>,
    info: InstanceInfo,
    cfg: &HallarConfig,
    recovery: impl Fn(&Solution<F>) -> Option<f64>,
) -> Result<SolveOutcome> {
    let (report, sol) = solve(problem, cfg)?;
    Ok(SolveOutcome {
        report: ReportFile::new(info, &report, &sol, cfg, recovery(&sol)),
        trace: report.trace,
    })
}

pub fn solve_source(source: &Source, cfg: &HallarConfig) -> Result<SolveOutcome> {
    cfg.validate()?;
    let inst = source.load()?;
    let problem = inst.build()?;
    let info = |field| InstanceInfo {
        kind: inst.kind(),
        source: source.clone(),
        field,
        n: problem.n(),
        m: problem.m(),
    };
    match &problem {
        AnyProblem::Real(p) => run(p, info(Field::Real), cfg, |s| block_recovery(&inst, s)),
        AnyProblem::Complex(p) => run(p, info(Field::Complex), cfg, |s| phase_recovery(&inst, s)),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verification {
    pub primal_rel: f64,
    pub gap_rel: f64,
    pub pval: f64,
    pub dval: f64,
    /// Largest scaled discrepancy against the stored report.
    pub max_diff: f64,
    /// `θ` recomputed from the stored multiplier by a fresh eigen-solve.
    pub fresh_theta: f64,
}

impl Verification {
    pub fn agrees(&self) -> bool {
        self.max_diff <= VERIFY_TOL
    }
}

fn scaled_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

fn verify_with<F: Scalar>(problem: &SdpProblem<F>, r: &ReportFile) -> Result<Verification> {
    let u = r.solution.factor::<F>()?;
    let ev = evaluate(problem, &u, &r.solution.p, r.theta)?;
    let eig = EigConfig {
        tol: 1e-10,
        ..r.config_echo.eig
    };
    let (fresh_theta, _) = dual_theta(problem, &r.solution.p, &eig)?;
    let max_diff = [
        scaled_diff(ev.residuals.primal_rel, r.residuals.primal_rel),
        scaled_diff(ev.residuals.gap_rel, r.residuals.gap_rel),
        scaled_diff(ev.residuals.dual_rel, r.residuals.dual_rel),
        scaled_diff(ev.pval, r.pval),
        scaled_diff(ev.dval, r.dval),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    Ok(Verification {
        primal_rel: ev.residuals.primal_rel,
        gap_rel: ev.residuals.gap_rel,
        pval: ev.pval,
        dval: ev.dval,
        max_diff,
        fresh_theta,
    })
}

/// Rebuilds the instance named in the report and recomputes residuals and
/// objective values from the stored `(U, p, θ)`.
pub fn verify_report(r: &ReportFile) -> Result<Verification> {
    if r.schema != crate::report::SCHEMA {
        bail!("unsupported report schema {}", r.schema);
    }
    let inst = r.instance.source.load().context("rebuilding the instance")?;
    match inst.build()? {
        AnyProblem::Real(p) => verify_with(&p, r),
        AnyProblem::Complex(p) => verify_with(&p, r),
    }
}

pub const BENCH_HEADER: &str =
    "instance,n,m,status,primal_rel,gap_rel,dual_rel,pval,dval,outer_iters,mev_count,fista_calls,max_rank,wall_time_s";

fn bench_row(label: &str, outcome: &Result<SolveOutcome>) -> String {
    let label = label.replace(',', ";");
    match outcome {
        Ok(o) => {
            let r = &o.report;
            format!(
                "{label},{},{},{:?},{},{},{},{},{},{},{},{},{},{}",
                r.instance.n,
                r.instance.m,
                r.status,
                fmt_f64(r.residuals.primal_rel),
                fmt_f64(r.residuals.gap_rel),
                fmt_f64(r.residuals.dual_rel),
                fmt_f64(r.pval_user),
                fmt_f64(r.dval_user),
                r.counters.outer,
                r.counters.mev,
                r.counters.fista,
                r.max_rank(),
                fmt_f64(r.wall_time_s)
            )
        }
        Err(e) => {
            log::error!("{label}: {e:#}");
            format!("{label},,,Error,,,,,,,,,,")
        }
    }
}

/// Solves every instance on a pool of `workers` threads and returns the CSV
/// summary with rows in input order, plus the number of rows not Solved.
/// Instances that fail to load get an `Error` row; the batch continues.
pub fn bench(paths: &[PathBuf], cfg: &HallarConfig, workers: usize) -> Result<(String, usize)> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers.max(1)).build()?;
    let outcomes: Vec<Result<SolveOutcome>> = pool.install(|| {
        paths
            .par_iter()
            .map(|p| Source::from_path(p).and_then(|s| solve_source(&s, cfg)))
            .collect()
    });
    let mut csv = String::from(BENCH_HEADER);
    csv.push('\n');
    let mut unsolved = 0;
    for (p, o) in paths.iter().zip(&outcomes) {
        if !matches!(o, Ok(o) if o.report.status == Status::Solved) {
            unsolved += 1;
        }
        let label = match o {
            Ok(o) => o.report.instance.source.label(),
            Err(_) => p.display().to_string(),
        };
        let _ = writeln!(csv, "{}", bench_row(&label, o));
    }
    Ok((csv, unsolved))
}
