//! Derivative-free simplex search.

use super::common::{
    common_decls, nelder_mead as simplex, require_unconstrained, Function, IterInfo, Outcome, SimplexSettings,
};
use super::options::{OptionDecl, SolverOptions};
use crate::problem::ScaledView;
use crate::runtime::{OutputKind, OutputValue, OutputsDecl};
use crate::{Result, Vector};

pub(crate) fn outputs(n: usize) -> OutputsDecl {
    OutputsDecl::new()
        .with("itr", OutputKind::Int)
        .with("obj", OutputKind::Real)
        .with("opt", OutputKind::Real)
        .with("x", OutputKind::Vector(n))
}

pub(crate) fn options() -> SolverOptions {
    let mut d = common_decls(500, false);
    d.push(OptionDecl::new("init_scale", 0.05, "initial simplex offset relative to max(1, |x0_i|)").positive());
    SolverOptions::new("nelder_mead", d)
}

/// Objective recording `itr, obj, opt, x`; `opt` is the spread of vertex
/// values.
pub(crate) struct SimplexObjective<'v, 'a>(pub &'v mut ScaledView<'a>);

impl Function for SimplexObjective<'_, '_> {
    fn value(&mut self, x: &Vector) -> Result<f64> {
        self.0.objective(x)
    }

    fn on_iter(&mut self, info: &IterInfo<'_>) -> Result<()> {
        self.0.update_outputs(&[
            ("itr", OutputValue::from(info.itr)),
            ("obj", info.f.into()),
            ("opt", info.opt.into()),
            ("x", info.x.into()),
        ])
    }
}

pub(crate) fn nelder_mead(view: &mut ScaledView<'_>, opts: &SolverOptions) -> Result<Outcome> {
    require_unconstrained(view, "nelder_mead")?;
    let (x0, bounds) = (view.x0().clone(), view.var_bounds().clone());
    let s = SimplexSettings {
        maxiter: opts.count("maxiter"),
        opt_tol: opts.real("opt_tol"),
        init_scale: opts.real("init_scale"),
    };
    let r = simplex(&mut SimplexObjective(view), &bounds, &x0, &s)?;
    Ok(Outcome {
        x: r.x,
        f: r.f,
        optimality: r.spread,
        feasibility: 0.0,
        niter: r.niter,
        converged: r.converged,
        message: if r.converged {
            "simplex collapsed below tolerance".into()
        } else {
            "iteration limit reached".into()
        },
        multipliers: None,
    })
}
