//! Running every solver on every problem and tabulating the outcome.

use std::fmt;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;

use super::profile::ProfileTable;
use super::registry::find;
use crate::problem::{ProblemSpec, ScaledView};
use crate::solvers::{solve, SolverKind, SolverReport};
use crate::{Error, Result};

/// A registry problem with an optional size, written `name` or
/// `name:size`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuiteProblem {
    pub name: String,
    pub size: Option<usize>,
}

impl SuiteProblem {
    pub fn new(name: &str, size: Option<usize>) -> Self {
        Self {
            name: name.to_string(),
            size,
        }
    }

    pub fn build(&self) -> Result<ProblemSpec> {
        find(&self.name)?.build(self.size)
    }
}

impl fmt::Display for SuiteProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.size {
            Some(s) => write!(f, "{}:{s}", self.name),
            None => f.write_str(&self.name),
        }
    }
}

impl FromStr for SuiteProblem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.split_once(':') {
            None => Ok(Self::new(s, None)),
            Some((name, size)) => {
                let size = size.parse().map_err(|_| {
                    Error::InvalidProblem(format!("bad size `{size}` in `{s}`"))
                })?;
                Ok(Self::new(name, Some(size)))
            }
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct SuiteConfig {
    /// `key=value` overrides applied to every solver that declares `key`.
    pub overrides: Vec<(String, String)>,
    pub maxiter: Option<usize>,
    /// Wall-clock cap per run; a run that exceeds it is unsolved.
    pub budget_seconds: Option<f64>,
    pub parallel: bool,
}

/// One (solver, problem) run.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub solver: String,
    pub problem: String,
    pub solved: bool,
    pub time_s: f64,
    pub n_obj: usize,
    pub n_grad: usize,
    pub f_star: f64,
    pub optimality: f64,
    /// Error or panic message when the run did not finish normally.
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CostKind {
    Time,
    Evaluations,
}

#[derive(Debug, Clone)]
pub struct SuiteResult {
    pub solvers: Vec<String>,
    pub problems: Vec<String>,
    /// Number of variables per problem.
    pub dims: Vec<usize>,
    /// Solver-major: run `(s, p)` is at `s * problems.len() + p`.
    pub runs: Vec<RunSummary>,
}

impl SuiteResult {
    pub fn run(&self, solver: usize, problem: usize) -> &RunSummary {
        &self.runs[solver * self.problems.len() + problem]
    }

    /// Cost table for profiles: wall time, or objective evaluations.
    pub fn table(&self, kind: CostKind) -> ProfileTable {
        let np = self.problems.len();
        let cost = self
            .runs
            .chunks(np)
            .map(|row| {
                row.iter()
                    .map(|r| match kind {
                        CostKind::Time => r.time_s,
                        CostKind::Evaluations => r.n_obj as f64,
                    })
                    .collect()
            })
            .collect();
        let solved = self.runs.chunks(np).map(|row| row.iter().map(|r| r.solved).collect()).collect();
        ProfileTable::new(self.solvers.clone(), self.problems.clone(), cost, solved).expect("suite table is well formed")
    }

    /// Writes `solver,problem,solved,time_s,n_obj,n_grad,f_star,optimality`.
    pub fn write_summary_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["solver", "problem", "solved", "time_s", "n_obj", "n_grad", "f_star", "optimality"])?;
        for r in &self.runs {
            w.write_record([
                r.solver.clone(),
                r.problem.clone(),
                r.solved.to_string(),
                format!("{:.6}", r.time_s),
                r.n_obj.to_string(),
                r.n_grad.to_string(),
                format!("{:e}", r.f_star),
                format!("{:e}", r.optimality),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// One line per run.
    pub fn format_summary(&self) -> String {
        let mut s = format!(
            "{:<20} {:<20} {:>6} {:>10} {:>8} {:>8} {:>14}\n",
            "solver", "problem", "solved", "time_s", "n_obj", "n_grad", "f*"
        );
        for r in &self.runs {
            s.push_str(&format!(
                "{:<20} {:<20} {:>6} {:>10.4} {:>8} {:>8} {:>14.6e}\n",
                r.solver, r.problem, r.solved, r.time_s, r.n_obj, r.n_grad, r.f_star
            ));
        }
        s
    }
}

/// Runs every solver on every problem with registry defaults plus the
/// overrides in `config`.
pub fn run_suite(problems: &[SuiteProblem], solvers: &[SolverKind], config: &SuiteConfig) -> Result<SuiteResult> {
    let names: Vec<String> = solvers.iter().map(|s| s.name().to_string()).collect();
    run_suite_with(problems, &names, config, |name, view| {
        let kind: SolverKind = name.parse()?;
        let mut opts = kind.default_options();
        if let Some(m) = config.maxiter {
            opts.set("maxiter", m)?;
        }
        for (k, v) in &config.overrides {
            if opts.is_declared(k) {
                opts.set_str(k, v)?;
            }
        }
        solve(kind, view, &opts)
    })
}

/// [`run_suite`] with a custom runner. Errors and panics inside a run mark
/// it unsolved; unknown problems are reported before anything runs.
pub fn run_suite_with<F>(problems: &[SuiteProblem], solvers: &[String], config: &SuiteConfig, runner: F) -> Result<SuiteResult>
where
    F: Fn(&str, &mut ScaledView<'_>) -> Result<SolverReport> + Sync,
{
    if problems.is_empty() || solvers.is_empty() {
        return Err(Error::InvalidProblem("a suite needs at least one problem and one solver".into()));
    }
    let specs = problems.iter().map(SuiteProblem::build).collect::<Result<Vec<_>>>()?;
    let pairs: Vec<(usize, usize)> = (0..solvers.len())
        .flat_map(|s| (0..specs.len()).map(move |p| (s, p)))
        .collect();
    let one = |&(s, p): &(usize, usize)| run_one(&solvers[s], &problems[p].to_string(), &specs[p], config, &runner);
    let runs = if config.parallel {
        pairs.par_iter().map(one).collect()
    } else {
        pairs.iter().map(one).collect()
    };
    Ok(SuiteResult {
        solvers: solvers.to_vec(),
        problems: problems.iter().map(|p| p.to_string()).collect(),
        dims: specs.iter().map(ProblemSpec::n).collect(),
        runs,
    })
}

fn run_one<F>(solver: &str, label: &str, spec: &ProblemSpec, config: &SuiteConfig, runner: &F) -> RunSummary
where
    F: Fn(&str, &mut ScaledView<'_>) -> Result<SolverReport> + Sync,
{
    let mut view = ScaledView::new(spec);
    if let Some(b) = config.budget_seconds {
        view.set_time_budget(b);
    }
    let start = Instant::now();
    let outcome = catch_unwind(AssertUnwindSafe(|| runner(solver, &mut view)));
    let time_s = start.elapsed().as_secs_f64();
    let counters = view.counters();
    let (report, error) = match outcome {
        Ok(Ok(r)) => (Some(r), None),
        Ok(Err(e)) => (None, Some(e.to_string())),
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            (None, Some(format!("panicked: {msg}")))
        }
    };
    let within_budget = config.budget_seconds.is_none_or(|b| time_s <= b);
    RunSummary {
        solver: solver.to_string(),
        problem: label.to_string(),
        solved: report.as_ref().is_some_and(|r| r.converged) && within_budget,
        time_s,
        n_obj: counters.n_obj,
        n_grad: counters.n_grad,
        f_star: report.as_ref().map_or(f64::NAN, |r| r.f_star),
        optimality: report.as_ref().map_or(f64::NAN, |r| r.optimality),
        error,
    }
}
