//! Building blocks shared by the solvers.

mod hessian;
mod linesearch;
mod merit;
mod qp;

pub use hessian::{HessianApprox, UpdateKind};
pub use linesearch::{armijo, line_search, wolfe, LineSearchKind, LineSearchParams, LineSearchResult};
pub use merit::{merit_gradient, merit_value, MeritKind, MeritSpec};
pub use qp::{qp_solve, QpSolution};
