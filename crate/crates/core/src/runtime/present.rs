//! Human-readable summary of a solver run.

use std::fmt::Write;

use crate::solvers::SolverReport;

/// Formats `report` as a block of `key: value` lines in a fixed order.
///
/// Reals use Rust's shortest round-trip representation, so a value that is
/// exactly one prints as `1`. The feasibility line is omitted for problems
/// without constraints.
pub fn print_results(report: &SolverReport) -> String {
    let mut s = String::new();
    let c = &report.counters;
    let _ = writeln!(s, "solver: {}", report.solver);
    let _ = writeln!(s, "problem: {}", report.problem);
    let _ = writeln!(s, "converged: {}", report.converged);
    let _ = writeln!(s, "message: {}", report.message);
    let _ = writeln!(s, "f*: {}", report.f_star);
    let _ = writeln!(s, "x*: {}", vector(report.x_star.as_slice()));
    let _ = writeln!(s, "optimality: {:e}", report.optimality);
    if report.m > 0 {
        let _ = writeln!(s, "feasibility: {:e}", report.feasibility);
    }
    let _ = writeln!(s, "niter: {}", report.niter);
    let _ = writeln!(
        s,
        "evaluations: obj={} grad={} con={} jac={} hess={}",
        c.n_obj, c.n_grad, c.n_con, c.n_jac, c.n_hess
    );
    let r = &report.replayed;
    let _ = writeln!(
        s,
        "replayed: obj={} grad={} con={} jac={} hess={}",
        r.n_obj, r.n_grad, r.n_con, r.n_jac, r.n_hess
    );
    let _ = write!(s, "wall time: {:.6} s", report.wall_time);
    s
}

fn vector(v: &[f64]) -> String {
    const SHOWN: usize = 10;
    let mut parts: Vec<String> = v.iter().take(SHOWN).map(|x| x.to_string()).collect();
    if v.len() > SHOWN {
        parts.push(format!("... ({} total)", v.len()));
    }
    format!("[{}]", parts.join(", "))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::EvalCounters;
    use nalgebra::dvector;

    fn report(m: usize, n: usize) -> SolverReport {
        SolverReport {
            solver: "newton".into(),
            problem: "p".into(),
            m,
            x_star: crate::Vector::from_element(n, 1.0),
            f_star: 1.0,
            optimality: 2.5e-7,
            feasibility: 0.0,
            niter: 4,
            counters: EvalCounters {
                n_obj: 5,
                n_grad: 4,
                ..Default::default()
            },
            replayed: EvalCounters::default(),
            wall_time: 0.0,
            converged: true,
            message: "done".into(),
            multipliers: None,
        }
    }

    #[test]
    fn fixed_layout() {
        let text = print_results(&report(0, 2));
        let keys: Vec<&str> = text.lines().map(|l| l.split(':').next().unwrap()).collect();
        assert_eq!(
            keys,
            ["solver", "problem", "converged", "message", "f*", "x*", "optimality", "niter", "evaluations", "replayed", "wall time"]
        );
        assert!(text.contains("f*: 1\n"));
        assert!(text.contains("x*: [1, 1]\n"));
        assert!(text.contains("evaluations: obj=5 grad=4 con=0 jac=0 hess=0"));
    }

    #[test]
    fn feasibility_only_with_constraints() {
        assert!(print_results(&report(1, 2)).contains("feasibility: 0e0"));
    }

    #[test]
    fn long_vectors_are_elided() {
        let mut r = report(0, 12);
        r.x_star = dvector![0.5, 1.5, 2.5, 3.5, 4.5, 5.5, 6.5, 7.5, 8.5, 9.5, 10.5, 11.5];
        assert!(print_results(&r).contains("9.5, ... (12 total)]"));
    }
}
