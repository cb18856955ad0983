//! Unconstrained descent methods: steepest descent, Newton and
//! quasi-Newton.

use super::common::{
    common_decls, descent, require_unconstrained, DescentSettings, Direction, Objective, Outcome,
};
use super::options::{OptionDecl, SolverOptions};
use crate::kit::{HessianApprox, LineSearchKind, LineSearchParams, UpdateKind};
use crate::problem::ScaledView;
use crate::runtime::{OutputKind, OutputsDecl};
use crate::Result;

pub(crate) fn outputs(n: usize) -> OutputsDecl {
    OutputsDecl::new()
        .with("itr", OutputKind::Int)
        .with("obj", OutputKind::Real)
        .with("opt", OutputKind::Real)
        .with("alpha", OutputKind::Real)
        .with("x", OutputKind::Vector(n))
}

fn line_search_decls() -> Vec<OptionDecl> {
    vec![
        OptionDecl::new("c1", 1e-4, "sufficient-decrease constant").positive(),
        OptionDecl::new(
            "backtrack",
            "interpolate",
            "Armijo trial steps: safeguarded quadratic interpolation or halving",
        )
        .one_of(&["interpolate", "geometric"]),
    ]
}

fn params(opts: &SolverOptions) -> LineSearchParams {
    let mut p = LineSearchParams {
        c1: opts.real("c1"),
        interpolate: opts.text("backtrack") == "interpolate",
        ..Default::default()
    };
    if opts.is_declared("c2") {
        p.c2 = opts.real("c2");
    }
    p
}

fn settings(opts: &SolverOptions, kind: LineSearchKind) -> DescentSettings {
    DescentSettings {
        maxiter: opts.count("maxiter"),
        opt_tol: opts.real("opt_tol"),
        line_search: opts.bool("use_line_search").then_some(kind),
        params: params(opts),
    }
}

pub(crate) fn steepest_descent_options() -> SolverOptions {
    let mut d = common_decls(500, true);
    d.extend(line_search_decls());
    SolverOptions::new("steepest_descent", d)
}

pub(crate) fn newton_options() -> SolverOptions {
    let mut d = common_decls(500, true);
    d.extend(line_search_decls());
    SolverOptions::new("newton", d)
}

pub(crate) fn quasi_newton_options() -> SolverOptions {
    let mut d = common_decls(500, true);
    d.extend(line_search_decls());
    d.push(OptionDecl::new("c2", 0.9, "curvature constant (Wolfe)").positive());
    d.push(OptionDecl::new("variant", "bfgs", "Hessian update").one_of(&["bfgs", "sr1", "dfp", "broyden"]));
    d.push(OptionDecl::new("line_search", "wolfe", "line search").one_of(&["wolfe", "armijo"]));
    SolverOptions::new("quasi_newton", d)
}

fn finish(r: super::common::DescentResult, extra: String) -> Outcome {
    let mut message = if r.converged {
        "optimality tolerance reached".to_string()
    } else {
        "iteration limit reached".to_string()
    };
    if r.line_search_failures > 0 {
        message.push_str(&format!("; {} line searches hit their trial limit", r.line_search_failures));
    }
    message.push_str(&extra);
    Outcome {
        x: r.x,
        f: r.f,
        optimality: r.opt,
        feasibility: 0.0,
        niter: r.niter,
        converged: r.converged,
        message,
        multipliers: None,
    }
}

/// `x+ = x - alpha grad f` with an Armijo step, or a unit step when line
/// search is off.
pub(crate) fn steepest_descent(view: &mut ScaledView<'_>, opts: &SolverOptions) -> Result<Outcome> {
    require_unconstrained(view, "steepest_descent")?;
    let (x0, bounds) = (view.x0().clone(), view.var_bounds().clone());
    let s = settings(opts, LineSearchKind::Armijo);
    let r = descent(&mut Objective(view), &bounds, &x0, Direction::Steepest, &s)?;
    Ok(finish(r, String::new()))
}

/// Newton steps `H p = -g` with diagonal regularization of indefinite
/// Hessians.
pub(crate) fn newton(view: &mut ScaledView<'_>, opts: &SolverOptions) -> Result<Outcome> {
    require_unconstrained(view, "newton")?;
    let (x0, bounds) = (view.x0().clone(), view.var_bounds().clone());
    let s = settings(opts, LineSearchKind::Armijo);
    let r = descent(&mut Objective(view), &bounds, &x0, Direction::Newton, &s)?;
    Ok(finish(r, String::new()))
}

/// Quasi-Newton with `B0 = I`; the direction solves `B p = -g` and `B` is
/// reset to the identity whenever that is not a descent direction.
pub(crate) fn quasi_newton(view: &mut ScaledView<'_>, opts: &SolverOptions) -> Result<Outcome> {
    require_unconstrained(view, "quasi_newton")?;
    let (x0, bounds) = (view.x0().clone(), view.var_bounds().clone());
    let kind: UpdateKind = opts.text("variant").parse()?;
    let ls: LineSearchKind = opts.text("line_search").parse()?;
    let s = settings(opts, ls);
    let h = HessianApprox::new(x0.len(), kind);
    let r = descent(&mut Objective(view), &bounds, &x0, Direction::QuasiNewton(h), &s)?;
    let extra = if r.direction_resets > 0 {
        format!("; Hessian approximation reset {} times", r.direction_resets)
    } else {
        String::new()
    };
    Ok(finish(r, extra))
}
