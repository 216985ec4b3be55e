//! Acceptance suite. Runs every criterion in sequence (timings are
//! wall-clock, so nothing else competes for the cores) and prints one
//! PASS/FAIL line per criterion; exits non-zero if any fails.

use std::process::ExitCode;
use std::time::Instant;

use hallar_cli::commands::{solve_source, verify_report, SolveOutcome};
use hallar_cli::instance::{Kind, Manifest, Params, Source};
use hallar_cli::json;
use hallar_cli::report::ReportFile;
use hallar_core::fista::{adap_fista, CompositeObjective, Euclidean, FistaOutcome, FistaParams};
use hallar_core::hallar::AlObjective;
use hallar_core::hlr::{hlr_solve, HlrConfig, SpectraplexObjective};
use hallar_core::oracle::rfw::dense_fw_vertex;
use hallar_core::oracle::{
    compute_hlr_bound, dense_al_solve, densify, inner, rfw_solve, DenseAl, DenseAlOptions,
    DenseQuadratic, DenseObjective, DenseSdp, RfwOptions, Step1,
};
use hallar_core::eig::EigConfig;
use hallar_core::operator::DenseOperator;
use hallar_core::problems::{build_stable_set_over, leading_signal, phase_error, recovered_block, Graph};
use hallar_core::spectraplex::{fw_vertex, optimality_gap};
use hallar_core::{hlr, Factor, HallarConfig, Scalar, SdpProblem, Status};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn check(ok: bool, msg: String) -> Outcome {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn manifest(kind: Kind, params: Params, seed: u64) -> Source {
    Source::Manifest(Manifest {
        kind,
        params,
        seed,
        n: 0,
        m: 0,
    })
}

fn graph(family: &str, n: Option<usize>, d: Option<u32>) -> Source {
    let params = Params {
        family: Some(family.into()),
        n,
        d,
        ..Params::default()
    };
    manifest(Kind::StableSet, params, 0)
}

/// Every Solved report produced along the way, for the duality checks.
#[derive(Default)]
struct Solved(Vec<ReportFile>);

impl Solved {
    fn solve(&mut self, source: &Source, cfg: &HallarConfig) -> Result<(SolveOutcome, f64), String> {
        let t = Instant::now();
        let out = solve_source(source, cfg).map_err(|e| format!("{e:#}"))?;
        let secs = t.elapsed().as_secs_f64();
        if out.report.status == Status::Solved {
            self.0.push(out.report.clone());
        }
        Ok((out, secs))
    }
}

/// Lovász theta from the dense augmented Lagrangian oracle.
fn oracle_theta(source: &Source) -> Result<f64, String> {
    let inst = source.load().map_err(|e| e.to_string())?;
    let hallar_cli::instance::AnyProblem::Real(p) = inst.build().map_err(|e| e.to_string())? else {
        return Err("stable set problems are real".into());
    };
    let dense = densify(&p).map_err(|e| e.to_string())?;
    let out = dense_al_solve(&dense, &DenseAlOptions::new(1e-7)).map_err(|e| e.to_string())?;
    Ok(-out.pval)
}

fn criterion_1(solved: &mut Solved) -> Outcome {
    // (name, source, exact value, tolerance, relative?, solve ε)
    let cases = [
        ("C5", graph("cycle", Some(5), None), 5f64.sqrt(), 1e-4, true, 1e-5),
        ("K4", graph("complete", Some(4), None), 1.0, 1e-6, false, 1e-7),
        ("E5", graph("empty", Some(5), None), 5.0, 1e-6, false, 1e-7),
        ("Q4", graph("hypercube", None, Some(4)), 8.0, 1e-3, true, 1e-5),
        ("Q6", graph("hypercube", None, Some(6)), 32.0, 1e-3, true, 1e-5),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, src, exact, tol, rel, eps) in cases {
        let truth = oracle_theta(&src)?;
        let (out, secs) = solved.solve(&src, &HallarConfig::relative(eps))?;
        let val = out.report.pval_user;
        let err = |v: f64| if rel { (v - exact).abs() / exact } else { (v - exact).abs() };
        let oracle_err = |v: f64| if rel { (v - truth).abs() / truth } else { (v - truth).abs() };
        let good = out.report.status == Status::Solved
            && err(val) <= tol
            && err(truth) <= tol
            && oracle_err(val) <= tol
            && secs < 30.0;
        ok &= good;
        parts.push(format!(
            "{name} θ={val:.9} oracle={truth:.9} err={:.1e} {:.2}s{}",
            err(val),
            secs,
            if good { "" } else { " ✗" }
        ));
    }
    check(ok, parts.join("; "))
}

fn criterion_2(solved: &mut Solved) -> Outcome {
    let src = graph("petersen", None, None);
    let truth = oracle_theta(&src)?;
    let (out, secs) = solved.solve(&src, &HallarConfig::relative(1e-5))?;
    let val = out.report.pval_user;
    check(
        out.report.status == Status::Solved && (val - 4.0).abs() <= 1e-3 && (truth - 4.0).abs() <= 1e-3 && secs < 10.0,
        format!("θ={val:.9} oracle={truth:.9} {secs:.2}s"),
    )
}

fn criterion_3(solved: &mut Solved) -> Outcome {
    let eps = 1e-5;
    let src = manifest(
        Kind::PhaseRetrieval,
        Params {
            n: Some(128),
            ..Params::default()
        },
        1,
    );
    let (out, secs) = solved.solve(&src, &HallarConfig::relative(eps))?;
    let r = &out.report;
    let hallar_cli::instance::Instance::PhaseRetrieval(model) = src.load().map_err(|e| e.to_string())? else {
        return Err("not a phase retrieval instance".into());
    };
    let truth = model.truth.as_ref().ok_or("generator returned no signal")?;
    let u = r.solution.factor::<Complex64>().map_err(|e| e.to_string())?;
    let err = phase_error(&leading_signal(&u), truth);
    let rank = hlr::recompress(&u, eps).s();
    check(
        r.status == Status::Solved && r.instance.n == 128 && r.instance.m == 1536 && err <= 1e-2 && rank <= 3 && secs < 120.0,
        format!("{:?} phase-aligned error={err:.2e} recompressed rank={rank} {secs:.1}s", r.status),
    )
}

fn criterion_4(solved: &mut Solved) -> Outcome {
    let src = manifest(
        Kind::MatComp,
        Params {
            n1: Some(40),
            n2: Some(40),
            r: Some(2),
            ..Params::default()
        },
        1,
    );
    let (out, secs) = solved.solve(&src, &HallarConfig::relative(1e-5))?;
    let hallar_cli::instance::Instance::MatComp { truth: Some(m), .. } = src.load().map_err(|e| e.to_string())? else {
        return Err("matrix completion manifest has no truth".into());
    };
    let u = out.report.solution.factor::<f64>().map_err(|e| e.to_string())?;
    let y = recovered_block(&u, 40);
    let (mut num, mut den) = (0.0, 0.0);
    for (i, row) in m.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            num += (y[(i, j)] - v).powi(2);
            den += v * v;
        }
    }
    let err = (num / den).sqrt();
    check(
        out.report.status == Status::Solved && err <= 1e-3 && secs < 120.0,
        format!("{:?} relative error={err:.2e} {secs:.2}s", out.report.status),
    )
}

fn random_hermitian<F: Scalar>(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<F> {
    let g = DMatrix::from_fn(n, n, |_, _| F::sample_normal(rng));
    (&g + g.adjoint()) * F::from_real(0.5)
}

/// One draw: `(gap, vertex sup, sampled sup, ε)`.
fn certificate_case<F: Scalar>(rng: &mut ChaCha8Rng) -> Result<(f64, f64, f64, f64), String> {
    let n = rng.random_range(2..=12);
    let s = rng.random_range(1..=4);
    let tau: f64 = rng.random_range(0.5..4.0);
    let mut y = Factor::<F>::random(n, s, rng);
    // inside the ball, on its boundary, or at the minimizer of g
    let radius = match rng.random_range(0..3) {
        0 => rng.random_range(0.05..1.0) * tau.sqrt(),
        _ => tau.sqrt(),
    };
    y.scale_mut(radius / y.norm());
    let z = y.outer();
    let d = if rng.random_bool(0.3) {
        // g(Z) = ½‖Z − D‖² with D = Z: Z is the minimizer, the gap is zero
        z.clone()
    } else {
        random_hermitian::<F>(n, rng) * F::from_real(rng.random_range(0.1..2.0))
    };
    let g = DenseQuadratic { d, tau };
    let grad = g.gradient(&z);
    let eig = EigConfig {
        tol: 1e-12,
        ..EigConfig::default()
    };
    let fw = fw_vertex(&DenseOperator(&grad), &eig).map_err(|e| e.to_string())?;
    let gap = optimality_gap(&DenseOperator(&grad), &y, fw.theta, tau);
    // ε-normal-cone inclusion −∇g(Z) ∈ N^ε(Z): sup over Δ_τ of ∇g(Z)•(Z − U),
    // attained at the dense FW vertex
    let (_, zf) = dense_fw_vertex(&grad, tau, 1e-14).map_err(|e| e.to_string())?;
    let sup = inner(&grad, &z) - inner(&grad, &zf);
    // sampled points of Δ_τ never beat the vertex
    let mut sampled = f64::NEG_INFINITY;
    for _ in 0..20 {
        let w = Factor::<F>::random(n, rng.random_range(1..=n), rng);
        let mut u = w.outer();
        u *= F::from_real(tau * rng.random_range(0.0..1.0) / w.norm_sq());
        sampled = sampled.max(inner(&grad, &z) - inner(&grad, &u));
    }
    let eps = match rng.random_range(0..3) {
        0 => gap * rng.random_range(0.5..1.5),
        1 => sup + rng.random_range(-1e-6..1e-6),
        _ => rng.random_range(0.0..1.0) * tau,
    };
    Ok((gap, sup, sampled, eps))
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let slack = 1e-8;
    let (mut violations, mut inside) = (0, 0);
    for k in 0..200 {
        let (gap, sup, sampled, eps) = if k % 2 == 0 {
            certificate_case::<f64>(&mut rng)?
        } else {
            certificate_case::<Complex64>(&mut rng)?
        };
        let certified = gap <= eps;
        let included = sup <= eps;
        if certified {
            inside += 1;
        }
        if (certified && sup > eps + slack) || (included && gap > eps + slack) || sampled > sup + slack {
            violations += 1;
        }
    }
    check(violations == 0, format!("200 draws, {inside} certified, {violations} violations"))
}

/// `½ xᵀ Q x − cᵀ x` over a ball or a box.
struct Quadratic {
    q: DMatrix<f64>,
    c: Vec<f64>,
    ball: Option<f64>,
    bx: f64,
}

impl CompositeObjective<Vec<f64>> for Quadratic {
    fn value(&self, u: &Vec<f64>) -> f64 {
        self.value_and_gradient(u).0
    }
    fn value_and_gradient(&self, u: &Vec<f64>) -> (f64, Vec<f64>) {
        let qu = &self.q * DVector::from_column_slice(u);
        let g: Vec<f64> = qu.iter().zip(&self.c).map(|(a, b)| a - b).collect();
        let v = 0.5 * qu.iter().zip(u).map(|(a, b)| a * b).sum::<f64>() - self.c.inner(u);
        (v, g)
    }
    fn prox(&self, mut z: Vec<f64>, _l: f64) -> Vec<f64> {
        match self.ball {
            Some(r) => {
                let nz = z.norm();
                if nz > r {
                    z.scale(r / nz);
                }
            }
            None => z.iter_mut().for_each(|v| *v = v.clamp(-self.bx, self.bx)),
        }
        z
    }
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let params = FistaParams::default();
    let (mut successes, mut bound_ok) = (0, 0);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let n = rng.random_range(2..=40);
        let mu = 10f64.powf(rng.random_range(-3.0..0.0));
        let l_bar = mu * 10f64.powf(rng.random_range(0.0..4.0));
        // spectrum spans [μ, L̄] exactly
        let mut eigs: Vec<f64> = (0..n).map(|_| rng.random_range(mu..=l_bar)).collect();
        eigs[0] = mu;
        if n > 1 {
            eigs[1] = l_bar;
        }
        let g = DMatrix::from_fn(n, n, |_, _| rng.random::<f64>() - 0.5);
        let qmat = g.qr().q();
        let q = &qmat * DMatrix::from_diagonal(&DVector::from_vec(eigs)) * qmat.transpose();
        let obj = Quadratic {
            q,
            c: (0..n).map(|_| rng.random_range(-5.0..5.0)).collect(),
            ball: rng.random_bool(0.5).then(|| rng.random_range(0.1..3.0)),
            bx: rng.random_range(0.1..2.0),
        };
        let x0: Vec<f64> = obj.prox((0..n).map(|_| rng.random_range(-1.0..1.0)).collect(), 1.0);
        let l0 = mu * 10f64.powf(rng.random_range(0.01..5.0));
        if let FistaOutcome::Success { l, .. } = adap_fista(&obj, &x0, mu, l0, &params) {
            successes += 1;
            let cap = l0.max(4.0 * l_bar / (1.0 - params.chi));
            worst = worst.max(l / cap);
            if l <= cap {
                bound_ok += 1;
            }
        }
    }
    check(
        successes == 50 && bound_ok == 50,
        format!("{successes}/50 Success, {bound_ok}/50 within the curvature cap (max L/cap = {worst:.3})"),
    )
}

/// Random small SDP over `Δ_1` with a feasible point of trace one.
fn random_dense_sdp<F: Scalar>(n: usize, m: usize, rng: &mut ChaCha8Rng) -> DenseSdp<F> {
    let w = Factor::<F>::random(n, 2, rng);
    let mut x0 = w.outer();
    x0 *= F::from_real(1.0 / w.norm_sq());
    let a: Vec<DMatrix<F>> = (0..m).map(|_| random_hermitian(n, rng)).collect();
    let mut sdp = DenseSdp {
        c: random_hermitian(n, rng),
        a,
        b: Vec::new(),
        tau: 1.0,
    };
    sdp.b = sdp.apply_a(&x0);
    sdp
}

struct Subproblem<F: Scalar> {
    problem: SdpProblem<F>,
    dense: DenseSdp<F>,
    p: Vec<f64>,
    beta: f64,
    y0: Factor<F>,
}

fn subproblem<F: Scalar>(k: usize, rng: &mut ChaCha8Rng) -> Result<Subproblem<F>, String> {
    let n = rng.random_range(5..=20);
    let problem = if k % 2 == 0 {
        build_stable_set_over::<F>(&Graph::random(n, rng.random_range(0.2..0.6), rng.random()).map_err(|e| e.to_string())?)
    } else {
        random_dense_sdp::<F>(n, rng.random_range(2..=8), rng)
            .to_problem()
            .map_err(|e| e.to_string())?
    };
    let dense = densify(&problem).map_err(|e| e.to_string())?;
    let p = (0..problem.m()).map(|_| rng.random_range(-1.0..1.0)).collect();
    let beta = rng.random_range(0.5..5.0);
    let mut y0 = Factor::<F>::random(n, 1, rng);
    y0.scale_mut(rng.random_range(0.1..1.0) / y0.norm());
    Ok(Subproblem {
        problem,
        dense,
        p,
        beta,
        y0,
    })
}

fn hlr_config(eps_bar: f64) -> HlrConfig {
    let mut cfg = HlrConfig::new(eps_bar);
    cfg.aipp.rho_bar = 0.1 * eps_bar;
    cfg
}

/// `(descent chain holds, k, bound)`
fn descent_and_bound<F: Scalar>(sp: &Subproblem<F>, eps_bar: f64) -> Result<(bool, usize, u64), String> {
    let al = AlObjective::new(&sp.problem, &sp.p, sp.beta).map_err(|e| e.to_string())?;
    let out = hlr_solve(&al, &sp.y0, &hlr_config(eps_bar)).map_err(|f| f.error.to_string())?;
    let tol = |v: f64| 1e-12 * v.abs().max(1.0);
    // g(Z_1) ≤ g(Z̄_0), then g(Z_{k+1}) ≤ g(Z̃_k) ≤ g(Z_k)
    let mut ok = out.steps.first().is_some_and(|s| s.g_z <= out.g_initial + tol(out.g_initial));
    for w in out.steps.windows(2) {
        ok &= w[1].g_z <= w[0].g_tilde + tol(w[0].g_tilde);
    }
    for s in &out.steps {
        ok &= s.g_tilde <= s.g_z + tol(s.g_z);
    }
    let l_g = sp.beta * sp.dense.operator_norm_sq().map_err(|e| e.to_string())?;
    let dal = DenseAl {
        sdp: &sp.dense,
        p: sp.p.clone(),
        beta: sp.beta,
        lipschitz: Some(l_g),
    };
    let opts = RfwOptions {
        step1: Step1::ProjectedGradient { iters: 50 },
        ..RfwOptions::new(1e-10)
    };
    let star = rfw_solve(&dal, &sp.y0.outer(), &opts).map_err(|e| e.to_string())?;
    let bound = compute_hlr_bound(out.g_initial, star.value, l_g, eps_bar);
    Ok((ok, out.k, bound))
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let eps_bar = 1e-4;
    let (mut chains, mut bounded) = (0, 0);
    let mut max_ratio = 0.0f64;
    for k in 0..20 {
        let (chain, mevs, bound) = if k < 14 {
            descent_and_bound(&subproblem::<f64>(k, &mut rng)?, eps_bar)?
        } else {
            descent_and_bound(&subproblem::<Complex64>(k, &mut rng)?, eps_bar)?
        };
        chains += chain as usize;
        bounded += (mevs as u64 <= bound) as usize;
        max_ratio = max_ratio.max(mevs as f64 / bound as f64);
    }
    check(
        chains == 20 && bounded == 20,
        format!("descent chain {chains}/20, MEV ≤ bound {bounded}/20 (max MEV/bound = {max_ratio:.2e})"),
    )
}

fn oracle_gap<F: Scalar>(sp: &Subproblem<F>, eps_bar: f64) -> Result<f64, String> {
    let al = AlObjective::new(&sp.problem, &sp.p, sp.beta).map_err(|e| e.to_string())?;
    let out = hlr_solve(&al, &sp.y0, &hlr_config(eps_bar)).map_err(|f| f.error.to_string())?;
    let dal = DenseAl {
        sdp: &sp.dense,
        p: sp.p.clone(),
        beta: sp.beta,
        lipschitz: None,
    };
    let rfw = rfw_solve(&dal, &sp.y0.outer(), &RfwOptions::new(eps_bar)).map_err(|e| e.to_string())?;
    Ok((al.value(&out.y) - rfw.value).abs() / eps_bar)
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let eps_bar = 1e-3;
    let mut worst = 0.0f64;
    let mut within = 0;
    for k in 0..20 {
        let ratio = if k < 14 {
            oracle_gap(&subproblem::<f64>(k, &mut rng)?, eps_bar)?
        } else {
            oracle_gap(&subproblem::<Complex64>(k, &mut rng)?, eps_bar)?
        };
        worst = worst.max(ratio);
        within += (ratio <= 2.0) as usize;
    }
    check(within == 20, format!("{within}/20 within 2ε̄ (max |ΔL|/ε̄ = {worst:.3})"))
}

fn criterion_9(solved: &Solved) -> Outcome {
    let mut bad = Vec::new();
    let mut worst_verify = 0.0f64;
    for r in &solved.0 {
        let eps = match r.config_echo.tolerance {
            hallar_core::hallar::Tolerance::Relative { eps } => eps,
            hallar_core::hallar::Tolerance::Theory { eps_c, .. } => eps_c,
        };
        let slack = eps * (1.0 + r.pval.abs() + r.dval.abs());
        let v = verify_report(r).map_err(|e| format!("{e:#}"))?;
        worst_verify = worst_verify.max(v.max_diff);
        if !(r.dval <= r.pval + slack && r.residuals.dual_rel == 0.0 && v.agrees()) {
            bad.push(r.instance.source.label());
        }
    }
    check(
        bad.is_empty() && !solved.0.is_empty(),
        format!(
            "{} Solved reports, max verify discrepancy {worst_verify:.1e}{}",
            solved.0.len(),
            if bad.is_empty() { String::new() } else { format!(", failing: {}", bad.join(" ")) }
        ),
    )
}

/// Report JSON with the wall-clock field removed.
fn numeric_fields(r: &ReportFile) -> Result<String, String> {
    let mut r = r.clone();
    r.wall_time_s = 0.0;
    json::to_string(&r).map_err(|e| e.to_string())
}

fn criterion_10() -> Outcome {
    let sources = [
        graph("petersen", None, None),
        manifest(
            Kind::MatComp,
            Params {
                n1: Some(40),
                n2: Some(45),
                r: Some(2),
                ..Params::default()
            },
            3,
        ),
        manifest(
            Kind::PhaseRetrieval,
            Params {
                n: Some(32),
                ..Params::default()
            },
            2,
        ),
    ];
    let cfg = HallarConfig {
        seed: 11,
        ..HallarConfig::relative(1e-5)
    };
    let mut same = 0;
    for src in &sources {
        let a = solve_source(src, &cfg).map_err(|e| format!("{e:#}"))?;
        let b = solve_source(src, &cfg).map_err(|e| format!("{e:#}"))?;
        let trace_eq = a.trace.len() == b.trace.len()
            && a.trace.iter().zip(&b.trace).all(|(x, y)| {
                let (mut x, mut y) = (x.clone(), y.clone());
                x.elapsed_s = 0.0;
                y.elapsed_s = 0.0;
                format!("{x:?}") == format!("{y:?}")
            });
        same += (numeric_fields(&a.report)? == numeric_fields(&b.report)? && trace_eq) as usize;
    }
    check(same == sources.len(), format!("{same}/{} instances bit-identical across two runs", sources.len()))
}

fn main() -> ExitCode {
    let mut solved = Solved::default();
    let mut failures = 0;
    let mut report = |n: usize, name: &str, out: Outcome| {
        let (tag, msg) = match out {
            Ok(m) => ("PASS", m),
            Err(m) => {
                failures += 1;
                ("FAIL", m)
            }
        };
        println!("{tag} criterion {n:>2} ({name}): {msg}");
    };
    let t = Instant::now();
    report(1, "Lovász theta exact values", criterion_1(&mut solved));
    report(2, "Petersen graph", criterion_2(&mut solved));
    report(3, "phase retrieval n = 128", criterion_3(&mut solved));
    report(4, "matrix completion 40×40", criterion_4(&mut solved));
    report(5, "certificate suite", criterion_5());
    report(6, "ADAP-FISTA guarantee", criterion_6());
    report(7, "HLR descent and bound", criterion_7());
    report(8, "oracle equivalence", criterion_8());
    report(9, "duality sanity", criterion_9(&solved));
    report(10, "determinism", criterion_10());
    println!("acceptance: {} failing, {:.1}s", failures, t.elapsed().as_secs_f64());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
