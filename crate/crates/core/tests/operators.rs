//! Operator-level identities for the three problem builders.

use hallar_core::hallar::AlObjective;
use hallar_core::hlr::SpectraplexObjective;
use hallar_core::oracle::{densify, inner};
use hallar_core::problems::{
    build_matrix_completion, build_phase_retrieval, build_stable_set, generate_matrix_completion,
    generate_phase_retrieval, Graph,
};
use hallar_core::{Factor, LinearOperator, Scalar, SdpProblem};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn normal_vec<F: Scalar>(n: usize, rng: &mut ChaCha8Rng) -> Vec<F> {
    (0..n).map(|_| F::sample_normal(rng)).collect()
}

fn re_dot<F: Scalar>(a: &[F], b: &[F]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x.conjugate() * *y).real()).sum()
}

/// `‖a − b‖ / max(‖b‖, 1)`
fn rel_err<F: Scalar>(a: &[F], b: &[F]) -> f64 {
    let d: f64 = a.iter().zip(b).map(|(x, y)| (*x - *y).modulus_squared()).sum();
    let nb: f64 = b.iter().map(|y| y.modulus_squared()).sum();
    d.sqrt() / nb.sqrt().max(1.0)
}

/// `⟨A(y yᴴ), p⟩ = Re yᴴ (A* p) y` on random draws.
fn check_adjoint<F: Scalar>(problem: &SdpProblem<F>, draws: usize, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = problem.n();
    let mut out = vec![F::zero(); n];
    for _ in 0..draws {
        let y: Vec<F> = normal_vec(n, &mut rng);
        let p: Vec<f64> = (0..problem.m()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let lhs: f64 = problem.q_a(&y).iter().zip(&p).map(|(a, b)| a * b).sum();
        problem.apply_adjoint(&p, &y, &mut out);
        let rhs = re_dot(&y, &out);
        let scale = lhs.abs().max(rhs.abs()).max(1.0);
        assert!((lhs - rhs).abs() <= 1e-10 * scale, "{lhs} vs {rhs}");
    }
}

#[test]
fn adjoint_identity_stable_set() {
    check_adjoint(&build_stable_set(&Graph::petersen()), 100, 1);
    check_adjoint(&build_stable_set(&Graph::random(30, 0.3, 4).unwrap()), 100, 2);
}

#[test]
fn adjoint_identity_phase_retrieval() {
    let model = generate_phase_retrieval(32, 3).unwrap();
    check_adjoint(&build_phase_retrieval(&model).unwrap(), 100, 3);
}

#[test]
fn adjoint_identity_matrix_completion() {
    let (obs, _) = generate_matrix_completion(12, 9, 1, 5).unwrap();
    check_adjoint(&build_matrix_completion(&obs).unwrap(), 100, 4);
}

/// The densified data reproduce every callback.
fn check_densify<F: Scalar>(problem: &SdpProblem<F>, seed: u64) {
    let dense = densify(problem).unwrap();
    assert!(dense.hermitian_defect() < 1e-12);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = problem.n();
    let mut out = vec![F::zero(); n];
    for _ in 0..10 {
        let y: Vec<F> = normal_vec(n, &mut rng);
        let yv = nalgebra::DVector::from_vec(y.clone());
        let x: DMatrix<F> = &yv * yv.adjoint();
        let q = problem.q_a(&y);
        for (a, b) in q.iter().zip(dense.apply_a(&x)) {
            assert!((a - b).abs() < 1e-9 * a.abs().max(1.0));
        }
        let p: Vec<f64> = (0..problem.m()).map(|_| rng.random_range(-1.0..1.0)).collect();
        problem.apply_adjoint(&p, &y, &mut out);
        let expect = dense.adjoint(&p) * &yv;
        assert!(rel_err(&out, expect.as_slice()) < 1e-9);
        problem.apply_objective(&y, &mut out);
        let expect = &dense.c * &yv;
        assert!(rel_err(&out, expect.as_slice()) < 1e-12);
    }
}

#[test]
fn densify_reproduces_callbacks() {
    check_densify(&build_stable_set(&Graph::cycle(7).unwrap()), 10);
    check_densify(&build_phase_retrieval(&generate_phase_retrieval(8, 1).unwrap()).unwrap(), 11);
    let (obs, _) = generate_matrix_completion(6, 5, 1, 2).unwrap();
    check_densify(&build_matrix_completion(&obs).unwrap(), 12);
}

/// Central differences of `Y ↦ L_β(Y Yᴴ; p)` against the analytic factor
/// gradient, and the gradient operator against the dense gradient.
fn check_al_gradient<F: Scalar>(problem: &SdpProblem<F>, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = problem.n();
    let p: Vec<f64> = (0..problem.m()).map(|_| rng.random_range(-1.0..1.0)).collect();
    let al = AlObjective::new(problem, &p, 0.7).unwrap();
    let mut y = Factor::<F>::random(n, 3, &mut rng);
    y.scale_mut(0.5 * problem.tau().sqrt() / y.norm());
    let (_, grad) = al.value_and_gradient(&y);
    let h = 1e-6;
    for _ in 0..5 {
        let mut d = Factor::<F>::random(n, 3, &mut rng);
        d.scale_mut(1.0 / d.norm());
        let shift = |t: f64| {
            let mut z = y.clone();
            z.data_mut().iter_mut().zip(d.data()).for_each(|(a, b)| *a += *b * F::from_real(t));
            al.value(&z)
        };
        let fd = (shift(h) - shift(-h)) / (2.0 * h);
        let an = grad.inner(&d);
        assert!((fd - an).abs() < 1e-5 * an.abs().max(1.0), "{fd} vs {an}");
    }

    let dense = densify(problem).unwrap();
    let x = y.outer();
    let q: Vec<f64> = dense.apply_a(&x).iter().zip(&dense.b).zip(&p).map(|((a, b), p)| p + 0.7 * (a - b)).collect();
    let g_dense = &dense.c + dense.adjoint(&q);
    let op = al.gradient_operator(&y);
    let v: Vec<F> = normal_vec(n, &mut rng);
    let mut out = vec![F::zero(); n];
    op.apply(&v, &mut out);
    let expect = &g_dense * nalgebra::DVector::from_vec(v);
    assert!(rel_err(&out, expect.as_slice()) < 1e-9);
    // C • Z + pᵀ(A(Z) − b) + (β/2)‖A(Z) − b‖² from the dense data
    let r: Vec<f64> = dense.apply_a(&x).iter().zip(&dense.b).map(|(a, b)| a - b).collect();
    let val = inner(&dense.c, &x)
        + r.iter().zip(&p).map(|(r, p)| r * p).sum::<f64>()
        + 0.35 * r.iter().map(|r| r * r).sum::<f64>();
    assert!((val - al.value(&y)).abs() < 1e-10 * val.abs().max(1.0));
}

#[test]
fn al_gradient_real() {
    check_al_gradient(&build_stable_set(&Graph::petersen()), 21);
    let (obs, _) = generate_matrix_completion(7, 6, 1, 3).unwrap();
    check_al_gradient(&build_matrix_completion(&obs).unwrap(), 22);
}

#[test]
fn al_gradient_complex() {
    let model = generate_phase_retrieval(16, 9).unwrap();
    check_al_gradient::<Complex64>(&build_phase_retrieval(&model).unwrap(), 23);
}
