//! Ghost-perturbation scheme for second-order ODEs.
//!
//! The equation g(x, y, y')·y'' + h(x, y, y') = 0 is embedded in a family
//! L(x; p)y + ε(N(x)y − L(x; p)y) = 0 with an exactly solvable linear
//! operator L = p0 y'' + p1 y' + p2 y + p3.  Expanding in powers of the
//! ghost parameter ε yields an order-by-order hierarchy of linear problems;
//! the free parameters p are then chosen to minimize a residual distance at
//! ε = 1.  The crate provides the expansion machinery, the distance
//! metrics, parameter-space scans with multi-minimum tracking, asymptotic
//! fits, ghost expansions of the error, and a piecewise IVP marcher.

pub mod analysis;
pub mod epsseries;
pub mod error;
pub mod expr;
pub mod funcspace;
pub mod linsolve;
pub mod march;
pub mod metrics;
pub mod optimize;
pub mod problems;
pub mod recurrence;

pub use error::{Error, Result};
pub use expr::{parse, ExprNode, Var};
pub use funcspace::ChebFun;
