//! Invariance verification for linear dynamical systems.
//!
//! Given a system matrix `A` (discrete `x_{k+1} = A x_k` or continuous
//! `x' = A x`) and a candidate set (polyhedron, polyhedral cone, ellipsoid,
//! Lorenz cone, double cone, or quadratic set), the checkers in
//! [`conditions`] decide whether the set is positively invariant and return
//! a certificate that can be re-verified by substitution, or a refutation.
//!
//! The [`oracle`] module is an independent simulation-based counterpart used
//! to cross-validate verdicts, and [`bridge`] relates the continuous and
//! discrete checks through Euler discretization.

pub mod bridge;
pub mod cli;
pub mod conditions;
pub mod io;
pub mod lp;
pub mod numerics;
pub mod oracle;
pub mod problem;
pub mod sets;

pub use conditions::{CheckReport, Certificate, Verdict};
pub use numerics::Matrix;
pub use problem::{Problem, TimeRegime, Tolerances};
pub use sets::SetDescription;
