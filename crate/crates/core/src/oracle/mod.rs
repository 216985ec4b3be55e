//! Dense reference solvers and diagnostics for small instances.

pub mod dense;
pub mod dense_al;
pub mod jacobi;
pub mod rfw;

pub use dense::{densify, inner, project_spectraplex, DenseSdp};
pub use dense_al::{dense_al_solve, dense_dual, DenseAlOptions, DenseAlOutput};
pub use jacobi::{jacobi_eigh, DenseEig};
pub use rfw::{rfw_solve, DenseAl, DenseLinear, DenseObjective, DenseQuadratic, RfwOptions, RfwOutput, Step1};

/// Frank-Wolfe-type iteration bound
/// `⌈1 + 4 max{Δ, √(Δ L D²), L D²} / ε̄⌉` with `Δ = g(Z₀) − g_*` and
/// diameter `D`.
pub fn compute_fw_bound(g_z0: f64, g_star: f64, l_g: f64, diameter: f64, eps_bar: f64) -> u64 {
    let delta = (g_z0 - g_star).max(0.0);
    let ld2 = l_g * diameter * diameter;
    let m = delta.max((delta * ld2).sqrt()).max(ld2);
    (1.0 + 4.0 * m / eps_bar).ceil() as u64
}

/// HLR bound on the number of eigen-solves over the unit spectraplex:
/// `⌈1 + 4 max{Δ, √(4 L Δ), 4 L} / ε̄⌉`.
pub fn compute_hlr_bound(g_z0: f64, g_star: f64, l_g: f64, eps_bar: f64) -> u64 {
    compute_fw_bound(g_z0, g_star, l_g, 2.0, eps_bar)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bound_arithmetic() {
        assert_eq!(compute_hlr_bound(0.0, 0.0, 1.0, 1.0), 17);
        assert_eq!(compute_hlr_bound(4.0, 0.0, 1.0, 2.0), 9);
        // trace bound τ uses diameter 2τ
        assert_eq!(compute_fw_bound(0.0, 0.0, 1.0, 4.0, 1.0), 65);
    }
}
