//! Matrix-free low-rank solver for large semidefinite programs
//!
//! ```text
//! min C • X   s.t.  A(X) = b,  X ∈ Δ_τ = {X ⪰ 0 : tr X ≤ τ}
//! ```
//!
//! over real symmetric or complex Hermitian matrices. The data are accessed
//! only through three callbacks (`C v`, `(A* p) v` and `A(y yᴴ)`) and the
//! iterate is kept as a factor `X = U Uᴴ`. An augmented Lagrangian outer loop
//! ([`hallar`]) solves its subproblems with a hybrid low-rank method
//! ([`hlr`]) that alternates accelerated inexact proximal point steps on the
//! factor with Frank-Wolfe steps that grow its rank.

pub mod aipp;
pub mod eig;
pub mod error;
pub mod factor;
pub mod fista;
pub mod hallar;
pub mod hlr;
pub mod operator;
pub mod oracle;
pub mod problem;
pub mod problems;
pub mod scalar;
pub mod spectraplex;

pub use error::{Error, Result};
pub use factor::Factor;
pub use hallar::{solve, HallarConfig, Report, Solution, Status};
pub use operator::LinearOperator;
pub use problem::{SdpOperators, SdpProblem};
pub use scalar::{Field, Scalar};
