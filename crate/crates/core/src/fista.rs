//! Adaptive accelerated composite gradient method (ADAP-FISTA).
//!
//! Minimizes `ψ_s + ψ_n` where `ψ_s` is smooth and `ψ_n` is the indicator of a
//! closed convex set with an exact projection. The curvature estimate `L` is
//! doubled until a descent-model inequality holds. The method stops either
//! with a pair `(y, v)` satisfying
//!
//! ```text
//! v ∈ ∇ψ_s(y) + ∂ψ_n(y),   ‖v‖ ≤ σ ‖y − x₀‖
//! ```
//!
//! or with a failure certificate, which can only happen when `ψ_s` is not
//! `μ`-strongly convex on the domain.

/// A real inner-product space.
pub trait Euclidean: Clone {
    fn inner(&self, other: &Self) -> f64;

    /// `self += alpha x`
    fn axpy(&mut self, alpha: f64, x: &Self);

    fn scale(&mut self, alpha: f64);

    fn norm_sq(&self) -> f64 {
        self.inner(self)
    }

    fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// `a x + b y`
    fn lincomb(a: f64, x: &Self, b: f64, y: &Self) -> Self {
        let mut out = x.clone();
        out.scale(a);
        out.axpy(b, y);
        out
    }

    /// `‖x − y‖²`
    fn dist_sq(x: &Self, y: &Self) -> f64 {
        Self::lincomb(1.0, x, -1.0, y).norm_sq()
    }
}

impl Euclidean for Vec<f64> {
    fn inner(&self, other: &Self) -> f64 {
        self.iter().zip(other).map(|(a, b)| a * b).sum()
    }

    fn axpy(&mut self, alpha: f64, x: &Self) {
        self.iter_mut().zip(x).for_each(|(a, b)| *a += alpha * b);
    }

    fn scale(&mut self, alpha: f64) {
        self.iter_mut().for_each(|a| *a *= alpha);
    }
}

/// Composite objective `ψ_s + ψ_n` with `ψ_n` an indicator function.
pub trait CompositeObjective<P: Euclidean> {
    fn value(&self, u: &P) -> f64;

    fn value_and_gradient(&self, u: &P) -> (f64, P);

    fn gradient(&self, u: &P) -> P {
        self.value_and_gradient(u).1
    }

    /// `argmin_u {ψ_n(u) + (L/2)‖u − z‖²}`; for an indicator this is the
    /// projection onto its domain and `L` is irrelevant.
    fn prox(&self, z: P, l: f64) -> P;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FistaParams {
    pub sigma: f64,
    pub chi: f64,
    pub max_iter: usize,
}

impl Default for FistaParams {
    fn default() -> Self {
        FistaParams {
            sigma: 0.3,
            chi: 0.01,
            max_iter: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailureKind {
    /// The step-4 growth test `‖y − x₀‖² ≥ χ A L ‖y − x̃‖²` failed.
    Certificate,
    IterationCap,
    /// The curvature estimate overflowed (the smooth part is not Lipschitz
    /// on the iterates at working precision).
    CurvatureOverflow,
}

#[derive(Debug, Clone)]
pub enum FistaOutcome<P> {
    Success {
        y: P,
        v: P,
        l: f64,
        iterations: usize,
    },
    Failure {
        kind: FailureKind,
        at_iter: usize,
    },
}

impl<P> FistaOutcome<P> {
    pub fn is_success(&self) -> bool {
        matches!(self, FistaOutcome::Success { .. })
    }
}

/// Per-iteration quantities exposed to observers (tests assert the method's
/// invariants through this hook).
#[derive(Debug, Clone, Copy)]
pub struct FistaStep {
    pub iter: usize,
    pub a_acc: f64,
    pub tau_acc: f64,
    pub l: f64,
    /// `ℓ(y; x̃) + (1−χ)L/4 ‖y − x̃‖² − ψ_s(y)`, nonnegative up to round-off.
    pub model_slack: f64,
}

/// Round-off allowance in the descent-model test, relative to the magnitude
/// of the function values compared.
const MODEL_RTOL: f64 = 1e-13;

/// Runs ADAP-FISTA from `x0` with strong-convexity parameter `mu` and initial
/// curvature `l0 > mu`.
pub fn adap_fista<P, O>(obj: &O, x0: &P, mu: f64, l0: f64, params: &FistaParams) -> FistaOutcome<P>
where
    P: Euclidean,
    O: CompositeObjective<P> + ?Sized,
{
    adap_fista_observed(obj, x0, mu, l0, params, |_| {})
}

/// [`adap_fista`] with a callback invoked after every accepted inner step.
pub fn adap_fista_observed<P, O, CB>(
    obj: &O,
    x0: &P,
    mu: f64,
    l0: f64,
    params: &FistaParams,
    mut observe: CB,
) -> FistaOutcome<P>
where
    P: Euclidean,
    O: CompositeObjective<P> + ?Sized,
    CB: FnMut(&FistaStep),
{
    debug_assert!(mu > 0.0 && l0 > mu, "need L0 > mu > 0");
    let chi = params.chi;
    let mut x = x0.clone();
    let mut y = x0.clone();
    let mut a_acc = 0.0f64;
    let mut tau_acc = 1.0f64;
    let mut l = l0;
    let l_ceiling = l0 * 1e30;

    for i in 0..params.max_iter {
        let mut l_next = l;
        let (a_i, x_tilde, grad_tilde, y_next, grad_y, slack) = loop {
            let denom = l_next - mu;
            let a_i = if denom < 1e-14 * mu {
                a_acc * 1e8 + 1.0
            } else {
                (tau_acc + (tau_acc * tau_acc + 4.0 * tau_acc * a_acc * denom).sqrt()) / (2.0 * denom)
            };
            let x_tilde = P::lincomb(a_acc / (a_acc + a_i), &y, a_i / (a_acc + a_i), &x);
            let (f_tilde, grad_tilde) = obj.value_and_gradient(&x_tilde);
            let mut z = x_tilde.clone();
            z.axpy(-1.0 / l_next, &grad_tilde);
            let y_next = obj.prox(z, l_next);
            let mut d = y_next.clone();
            d.axpy(-1.0, &x_tilde);
            // the gradient at y is needed only on acceptance, which is the common case
            let (fy, grad_y) = obj.value_and_gradient(&y_next);
            let model = f_tilde + grad_tilde.inner(&d) + 0.25 * (1.0 - chi) * l_next * d.norm_sq();
            let slack = model - fy;
            let allowance = MODEL_RTOL * (f_tilde.abs().max(fy.abs()) + f64::MIN_POSITIVE);
            if slack >= -allowance {
                break (a_i, x_tilde, grad_tilde, y_next, grad_y, slack);
            }
            l_next *= 2.0;
            if l_next > l_ceiling || !l_next.is_finite() {
                return FistaOutcome::Failure {
                    kind: FailureKind::CurvatureOverflow,
                    at_iter: i,
                };
            }
        };
        let a_new = a_acc + a_i;
        let tau_new = tau_acc + a_i * mu;
        // s = (L − μ)(x̃ − y);  x ← [μ a y + τ x − a s] / τ'
        let mut s = x_tilde.clone();
        s.axpy(-1.0, &y_next);
        s.scale(l_next - mu);
        let mut x_new = y_next.clone();
        x_new.scale(mu * a_i);
        x_new.axpy(tau_acc, &x);
        x_new.axpy(-a_i, &s);
        x_new.scale(1.0 / tau_new);

        observe(&FistaStep {
            iter: i,
            a_acc: a_new,
            tau_acc: tau_new,
            l: l_next,
            model_slack: slack,
        });

        let step_sq = P::dist_sq(&y_next, &x_tilde);
        let disp_sq = P::dist_sq(&y_next, x0);
        if disp_sq < chi * a_new * l_next * step_sq {
            return FistaOutcome::Failure {
                kind: FailureKind::Certificate,
                at_iter: i,
            };
        }

        // v = ∇ψ_s(y) − ∇ψ_s(x̃) + L (x̃ − y)
        let mut v = grad_y;
        v.axpy(-1.0, &grad_tilde);
        v.axpy(l_next, &x_tilde);
        v.axpy(-l_next, &y_next);
        if v.norm_sq() <= params.sigma * params.sigma * disp_sq {
            return FistaOutcome::Success {
                y: y_next,
                v,
                l: l_next,
                iterations: i + 1,
            };
        }

        x = x_new;
        y = y_next;
        a_acc = a_new;
        tau_acc = tau_new;
        l = l_next;
    }
    FistaOutcome::Failure {
        kind: FailureKind::IterationCap,
        at_iter: params.max_iter,
    }
}
