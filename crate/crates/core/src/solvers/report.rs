use crate::problem::EvalCounters;
use crate::Vector;

/// Terminal state of a solver run, in unscaled units.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverReport {
    pub solver: String,
    pub problem: String,
    /// Number of constraints of the problem.
    pub m: usize,
    pub x_star: Vector,
    pub f_star: f64,
    /// Scaled optimality measure reported by the solver.
    pub optimality: f64,
    /// Largest scaled constraint violation, 0 without constraints.
    pub feasibility: f64,
    pub niter: usize,
    pub counters: EvalCounters,
    /// Evaluations served from a hot-start record.
    pub replayed: EvalCounters,
    pub wall_time: f64,
    pub converged: bool,
    /// Why the run stopped.
    pub message: String,
    /// Constraint multipliers (unscaled), for solvers that estimate them.
    pub multipliers: Option<Vector>,
}
