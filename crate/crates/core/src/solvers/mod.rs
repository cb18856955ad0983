//! Optimization algorithms. Every solver runs in the scaled space of a
//! [`ScaledView`], declares its per-iteration outputs, and returns a
//! [`SolverReport`] in unscaled units.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use crate::problem::ScaledView;
use crate::runtime::OutputsDecl;
use crate::{Error, Result};

mod common;
mod gradient;
mod nelder_mead;
mod newton_lagrange;
mod options;
mod penalty;
mod report;
mod sqp;
mod stochastic;

pub use options::{Check, OptionDecl, OptionValue, SolverOptions};
pub use report::SolverReport;
pub use stochastic::{acceptance_probability, temperature};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolverKind {
    SteepestDescent,
    Newton,
    QuasiNewton,
    NewtonLagrange,
    QuadraticPenalty,
    ExactPenalty,
    Sqp,
    NelderMead,
    Pso,
    SimulatedAnnealing,
}

impl SolverKind {
    pub const ALL: [SolverKind; 10] = [
        SolverKind::SteepestDescent,
        SolverKind::Newton,
        SolverKind::QuasiNewton,
        SolverKind::NewtonLagrange,
        SolverKind::QuadraticPenalty,
        SolverKind::ExactPenalty,
        SolverKind::Sqp,
        SolverKind::NelderMead,
        SolverKind::Pso,
        SolverKind::SimulatedAnnealing,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SolverKind::SteepestDescent => "steepest_descent",
            SolverKind::Newton => "newton",
            SolverKind::QuasiNewton => "quasi_newton",
            SolverKind::NewtonLagrange => "newton_lagrange",
            SolverKind::QuadraticPenalty => "quadratic_penalty",
            SolverKind::ExactPenalty => "exact_penalty",
            SolverKind::Sqp => "sqp",
            SolverKind::NelderMead => "nelder_mead",
            SolverKind::Pso => "pso",
            SolverKind::SimulatedAnnealing => "simulated_annealing",
        }
    }

    /// Whether the solver accepts general constraints (`m > 0`).
    pub fn handles_constraints(self) -> bool {
        matches!(
            self,
            SolverKind::NewtonLagrange | SolverKind::QuadraticPenalty | SolverKind::ExactPenalty | SolverKind::Sqp
        )
    }

    /// Whether the solver uses derivatives at all.
    pub fn gradient_free(self) -> bool {
        matches!(
            self,
            SolverKind::ExactPenalty | SolverKind::NelderMead | SolverKind::Pso | SolverKind::SimulatedAnnealing
        )
    }

    pub fn default_options(self) -> SolverOptions {
        match self {
            SolverKind::SteepestDescent => gradient::steepest_descent_options(),
            SolverKind::Newton => gradient::newton_options(),
            SolverKind::QuasiNewton => gradient::quasi_newton_options(),
            SolverKind::NewtonLagrange => newton_lagrange::options(),
            SolverKind::QuadraticPenalty => penalty::quadratic_options(),
            SolverKind::ExactPenalty => penalty::exact_options(),
            SolverKind::Sqp => sqp::options(),
            SolverKind::NelderMead => nelder_mead::options(),
            SolverKind::Pso => stochastic::pso_options(),
            SolverKind::SimulatedAnnealing => stochastic::sa_options(),
        }
    }

    /// Per-iteration outputs the solver records for a problem with `n`
    /// variables and `m` constraints.
    pub fn outputs(self, n: usize, m: usize) -> OutputsDecl {
        match self {
            SolverKind::SteepestDescent | SolverKind::Newton | SolverKind::QuasiNewton => gradient::outputs(n),
            SolverKind::NewtonLagrange => newton_lagrange::outputs(n, m),
            SolverKind::QuadraticPenalty => penalty::quadratic_outputs(n, m),
            SolverKind::ExactPenalty => penalty::exact_outputs(n),
            SolverKind::Sqp => sqp::outputs(n, m),
            SolverKind::NelderMead => nelder_mead::outputs(n),
            SolverKind::Pso => stochastic::pso_outputs(n),
            SolverKind::SimulatedAnnealing => stochastic::sa_outputs(n),
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::UnknownName {
                what: "solver",
                name: s.to_string(),
                valid: Self::ALL.map(|k| k.name()).join(", "),
            })
    }
}

/// Runs `kind` on `view` and reports the result in unscaled units.
///
/// The view's counters are not reset, so `report.counters` is the total
/// the view has seen at exit.
pub fn solve(kind: SolverKind, view: &mut ScaledView<'_>, options: &SolverOptions) -> Result<SolverReport> {
    if options.solver() != kind.name() {
        return Err(Error::Unsupported(format!(
            "options were declared for `{}`, not `{}`",
            options.solver(),
            kind.name()
        )));
    }
    let start = Instant::now();
    view.begin_run(kind.name(), options.as_strings(), kind.outputs(view.n(), view.m()));
    let out = match kind {
        SolverKind::SteepestDescent => gradient::steepest_descent(view, options),
        SolverKind::Newton => gradient::newton(view, options),
        SolverKind::QuasiNewton => gradient::quasi_newton(view, options),
        SolverKind::NewtonLagrange => newton_lagrange::newton_lagrange(view, options),
        SolverKind::QuadraticPenalty => penalty::quadratic_penalty(view, options),
        SolverKind::ExactPenalty => penalty::exact_penalty(view, options),
        SolverKind::Sqp => sqp::sqp(view, options),
        SolverKind::NelderMead => nelder_mead::nelder_mead(view, options),
        SolverKind::Pso => stochastic::pso(view, options),
        SolverKind::SimulatedAnnealing => stochastic::simulated_annealing(view, options),
    }?;
    Ok(SolverReport {
        solver: kind.name().to_string(),
        problem: view.spec().name().to_string(),
        m: view.m(),
        x_star: view.unscale_x(&out.x),
        f_star: view.unscale_objective(out.f),
        optimality: out.optimality,
        feasibility: out.feasibility,
        niter: out.niter,
        counters: view.counters(),
        replayed: view.replayed(),
        wall_time: start.elapsed().as_secs_f64(),
        converged: out.converged,
        message: out.message,
        multipliers: out.multipliers.map(|l| view.unscale_multipliers(&l)),
    })
}

#[cfg(test)]
mod tests;
