//! The augmented Lagrangian `L_β(X; p) = C • X + pᵀ(A(X) − b) + (β/2)‖A(X) − b‖²`
//! as a spectraplex objective.

use crate::error::{Error, Result};
use crate::factor::Factor;
use crate::hlr::{segment_search, SpectraplexObjective};
use crate::operator::LinearOperator;
use crate::problem::SdpProblem;
use crate::scalar::{vec, Scalar};
use crate::spectraplex::{FwVertex, Vertex};

pub struct AlObjective<'a, F: Scalar> {
    problem: &'a SdpProblem<F>,
    p: &'a [f64],
    beta: f64,
}

impl<'a, F: Scalar> AlObjective<'a, F> {
    pub fn new(problem: &'a SdpProblem<F>, p: &'a [f64], beta: f64) -> Result<Self> {
        if p.len() != problem.m() {
            return Err(Error::Dimension {
                what: "multiplier",
                expected: problem.m(),
                found: p.len(),
            });
        }
        if !(beta >= 0.0 && beta.is_finite()) {
            return Err(Error::InvalidArgument(format!("penalty {beta} must be nonnegative")));
        }
        Ok(AlObjective { problem, p, beta })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn multiplier(&self) -> &[f64] {
        self.p
    }

    fn constraint(&self, y: &Factor<F>) -> Vec<f64> {
        self.problem
            .apply_constraint(y)
            .expect("factor dimension checked by the caller")
    }

    /// Value from `C • Z` and `A(Z)`.
    pub fn value_from_parts(&self, cz: f64, az: &[f64]) -> f64 {
        let mut lin = 0.0;
        let mut sq = 0.0;
        for ((a, b), p) in az.iter().zip(self.problem.b()).zip(self.p) {
            let r = a - b;
            lin += p * r;
            sq += r * r;
        }
        cz + lin + 0.5 * self.beta * sq
    }

    /// `q(Y; p) = p + β (A(Y Yᴴ) − b)`
    pub fn multiplier_estimate(&self, az: &[f64]) -> Vec<f64> {
        az.iter()
            .zip(self.problem.b())
            .zip(self.p)
            .map(|((a, b), p)| p + self.beta * (a - b))
            .collect()
    }

    /// Closed-form exact line search toward `vertex`, given the gap `ε` at
    /// `Z = Y Yᴴ`. Along the segment the objective is the quadratic
    /// `φ(α) = φ(0) − ε α + (β/2)‖A(Z_F) − A(Z)‖² α²`, because the slope at 0
    /// is `∇g(Z) • (Z_F − Z) = −ε`.
    pub fn closed_form_step(&self, y: &Factor<F>, vertex: &Vertex<F>, gap: f64) -> Option<f64> {
        if gap <= 0.0 {
            return Some(0.0);
        }
        let az = self.constraint(y);
        let af = match vertex {
            Vertex::Zero => vec![0.0; az.len()],
            Vertex::Rank1(v) => {
                let mut q = self.problem.q_a(v);
                q.iter_mut().for_each(|x| *x *= self.problem.tau());
                q
            }
        };
        let d_sq: f64 = af.iter().zip(&az).map(|(f, z)| (f - z) * (f - z)).sum();
        let denom = self.beta * d_sq;
        let scale = gap.max(self.problem.c_norm() * self.problem.tau()).max(1.0);
        if !(denom >= 1e-14 * scale) {
            return None;
        }
        Some((gap / denom).min(1.0))
    }
}

impl<F: Scalar> SpectraplexObjective<F> for AlObjective<'_, F> {
    fn n(&self) -> usize {
        self.problem.n()
    }

    fn tau(&self) -> f64 {
        self.problem.tau()
    }

    fn value(&self, y: &Factor<F>) -> f64 {
        let cz = self.problem.objective_operator().quad_form(y);
        self.value_from_parts(cz, &self.constraint(y))
    }

    fn value_and_gradient(&self, y: &Factor<F>) -> (f64, Factor<F>) {
        let az = self.constraint(y);
        let q = self.multiplier_estimate(&az);
        let n = y.n();
        let mut grad = Factor::zeros(n, y.s());
        let mut tmp = vec![F::zero(); n];
        let mut cz = 0.0;
        for (j, col) in y.columns().enumerate() {
            let out = grad.column_mut(j);
            self.problem.apply_objective(col, out);
            cz += vec::re_dot(col, out);
            self.problem.apply_adjoint(&q, col, &mut tmp);
            for (o, t) in out.iter_mut().zip(&tmp) {
                *o = (*o + *t) * F::from_real(2.0);
            }
        }
        (self.value_from_parts(cz, &az), grad)
    }

    fn gradient_operator<'b>(&'b self, y: &Factor<F>) -> Box<dyn LinearOperator<F> + 'b> {
        Box::new(
            self.problem
                .gradient_operator(self.p, self.beta, y)
                .expect("dimensions validated at construction"),
        )
    }

    fn line_search(&self, y: &Factor<F>, fw: &FwVertex<F>, gap: f64) -> f64 {
        match self.closed_form_step(y, &fw.vertex, gap) {
            Some(a) => a,
            None => segment_search(self, y, &fw.vertex),
        }
    }
}
