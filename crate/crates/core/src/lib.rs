//! `optkit` is a small toolkit for nonlinear programming built from
//! interchangeable parts.
//!
//! Problems are described once as a [`ProblemSpec`](problem::ProblemSpec) with
//! two-sided variable and constraint bounds, and every solver talks to them
//! through a [`ScaledView`](problem::ScaledView). The view applies scaling,
//! fills in missing derivatives by forward differences, counts evaluations,
//! and optionally records every evaluation so a later run can be hot-started
//! from the log.
//!
//! The crate is organized as:
//!
//! * [`problem`] - problem definition, scaled evaluation, finite differences
//!   and derivative checking.
//! * [`kit`] - solver building blocks: Hessian updates, line searches, merit
//!   functions and a dense active-set QP solver.
//! * [`solvers`] - steepest descent, Newton, quasi-Newton, Newton-Lagrange,
//!   penalty methods, SQP, Nelder-Mead, particle swarm and simulated annealing.
//! * [`runtime`] - iteration outputs, run records, hot-start replay, readable
//!   text exports and result printing.
//! * [`bench`] - built-in test problems, suite runner and performance/data
//!   profiles.
//!
//! ```
//! use optkit::bench::registry::make_problem;
//! use optkit::problem::ScaledView;
//! use optkit::solvers::{solve, SolverKind};
//!
//! let spec = make_problem("rosenbrock2", None).unwrap();
//! let mut view = ScaledView::new(&spec);
//! let options = SolverKind::QuasiNewton.default_options();
//! let report = solve(SolverKind::QuasiNewton, &mut view, &options).unwrap();
//! assert!(report.converged);
//! assert!((report.x_star[0] - 1.0).abs() < 1e-4);
//! ```

pub mod bench;
pub mod error;
pub mod kit;
pub mod problem;
pub mod runtime;
pub mod solvers;

pub use error::{Error, Result};

/// Dense column vector used throughout the crate.
pub type Vector = nalgebra::DVector<f64>;
/// Dense matrix used throughout the crate.
pub type Matrix = nalgebra::DMatrix<f64>;
