//! Linear minimization and ε-optimality certificates over the spectraplex
//! `Δ_τ = {X ⪰ 0 : tr X ≤ τ}`.
//!
//! For a self-adjoint `G`, a minimizer of `G • U` over `Δ_τ` is `τ v vᴴ` with
//! `v` a unit minimum eigenvector when `λ_min(G) < 0`, and `0` otherwise. With
//! `θ = max{−λ_min(G), 0}`, a point `Z = Y Yᴴ` is ε-optimal for a convex `g`
//! with `∇g(Z) = G` iff `G • Z + τθ ≤ ε`.

use crate::eig::{self, EigConfig, EigResult};
use crate::error::Result;
use crate::factor::Factor;
use crate::operator::LinearOperator;
use crate::scalar::Scalar;

/// Frank-Wolfe vertex `τ y yᴴ`, or the zero matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum Vertex<F> {
    Zero,
    /// Unit direction `y`; the vertex is `τ y yᴴ`.
    Rank1(Vec<F>),
}

impl<F> Vertex<F> {
    pub fn is_zero(&self) -> bool {
        matches!(self, Vertex::Zero)
    }
}

/// Output of the linear minimization oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct FwVertex<F> {
    /// `θ = max{−λ_min(G), 0}`
    pub theta: f64,
    pub vertex: Vertex<F>,
    /// The underlying eigen-solve.
    pub eig: EigResult<F>,
}

/// Linear minimization oracle over `Δ_τ` via one minimum-eigenpair solve.
pub fn fw_vertex<F: Scalar, O: LinearOperator<F> + ?Sized>(grad: &O, cfg: &EigConfig) -> Result<FwVertex<F>> {
    let e = eig::min_eigenpair(grad, cfg)?;
    Ok(vertex_from_eig(e))
}

pub(crate) fn vertex_from_eig<F: Scalar>(e: EigResult<F>) -> FwVertex<F> {
    let theta = (-e.value).max(0.0);
    let vertex = if theta > 0.0 {
        Vertex::Rank1(e.vector.clone())
    } else {
        Vertex::Zero
    };
    FwVertex { theta, vertex, eig: e }
}

/// `ε = Re tr(Yᴴ G Y) + τ θ`, the smallest ε for which
/// `0 ∈ ∇g(Z) + ∂_ε δ_Δ(Z)` at `Z = Y Yᴴ`. Values within `−1e-12` of zero
/// are clamped to zero.
pub fn optimality_gap<F: Scalar, O: LinearOperator<F> + ?Sized>(grad: &O, y: &Factor<F>, theta: f64, tau: f64) -> f64 {
    gap_from_parts(grad.quad_form(y), theta, tau)
}

pub(crate) fn gap_from_parts(gz: f64, theta: f64, tau: f64) -> f64 {
    let eps = gz + tau * theta;
    if eps < 0.0 && eps > -1e-12 {
        0.0
    } else {
        eps
    }
}

/// `(τ − tr Z) θ + (G + θ I) • Z`; algebraically identical to the gap.
pub fn complementarity<F: Scalar, O: LinearOperator<F> + ?Sized>(grad: &O, y: &Factor<F>, theta: f64, tau: f64) -> f64 {
    let tr = y.norm_sq();
    (tau - tr) * theta + grad.quad_form(y) + theta * tr
}
