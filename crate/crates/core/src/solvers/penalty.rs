//! Penalty methods: a sequence of smooth quadratic-penalty subproblems, and
//! a single nonsmooth exact-penalty minimization.

use super::common::{
    common_decls, descent, max_violation, nelder_mead, DescentSettings, Direction, Function, IterInfo, Outcome,
    SimplexSettings, Smooth,
};
use super::options::{OptionDecl, SolverOptions};
use crate::kit::{merit_value, HessianApprox, LineSearchKind, LineSearchParams, MeritKind, MeritSpec, UpdateKind};
use crate::problem::{Bounds, ScaledView};
use crate::runtime::{OutputKind, OutputValue, OutputsDecl};
use crate::{Error, Result, Vector};

pub(crate) fn quadratic_outputs(n: usize, m: usize) -> OutputsDecl {
    OutputsDecl::new()
        .with("itr", OutputKind::Int)
        .with("obj", OutputKind::Real)
        .with("opt", OutputKind::Real)
        .with("feas", OutputKind::Real)
        .with("rho", OutputKind::Real)
        .with("x", OutputKind::Vector(n))
        .with("lam", OutputKind::Vector(m))
}

pub(crate) fn exact_outputs(n: usize) -> OutputsDecl {
    OutputsDecl::new()
        .with("itr", OutputKind::Int)
        .with("obj", OutputKind::Real)
        .with("opt", OutputKind::Real)
        .with("x", OutputKind::Vector(n))
}

pub(crate) fn quadratic_options() -> SolverOptions {
    let mut d = common_decls(50, true);
    d.extend([
        OptionDecl::new("rho0", 1.0, "initial penalty parameter").positive(),
        OptionDecl::new("rho_growth", 10.0, "penalty growth factor per outer iteration").positive(),
        OptionDecl::new("rho_max", 1e12, "penalty cap").positive(),
        OptionDecl::new("sub_tol0", 1e-2, "first subproblem optimality tolerance").positive(),
        OptionDecl::new("sub_tol_factor", 0.1, "subproblem tolerance reduction per outer iteration").positive(),
        OptionDecl::new("sub_maxiter", 500, "iteration limit of each subproblem").positive(),
        OptionDecl::new("variant", "bfgs", "quasi-Newton update of the subsolver")
            .one_of(&["bfgs", "sr1", "dfp", "broyden"]),
    ]);
    SolverOptions::new("quadratic_penalty", d)
}

pub(crate) fn exact_options() -> SolverOptions {
    let mut d = common_decls(2000, false);
    d.extend([
        OptionDecl::new("penalty", "l1", "penalty norm").one_of(&["l1", "linf"]),
        OptionDecl::new("rho", 100.0, "penalty parameter").non_negative(),
        OptionDecl::new("init_scale", 0.05, "initial simplex offset relative to max(1, |x0_i|)").positive(),
        OptionDecl::new("max_restarts", 3, "simplex restarts from the best point").non_negative(),
    ]);
    SolverOptions::new("exact_penalty", d)
}

/// Constraint values at the most recent point, so the gradient of a
/// penalty evaluated right after its value reuses them.
struct ConCache {
    x: Vector,
    c: Vector,
}

fn cached_constraints(view: &mut ScaledView<'_>, cache: &mut Option<ConCache>, x: &Vector) -> Result<Vector> {
    if let Some(cc) = cache {
        if cc.x.len() == x.len() && cc.x.iter().zip(x.iter()).all(|(a, b)| a.to_bits() == b.to_bits()) {
            return Ok(cc.c.clone());
        }
    }
    let c = view.constraints(x)?;
    *cache = Some(ConCache { x: x.clone(), c: c.clone() });
    Ok(c)
}

/// `f + rho/2 |v(x)|^2` with `v = c - clip(c)`.
struct QuadraticPenalty<'v, 'a> {
    view: &'v mut ScaledView<'a>,
    bounds: Bounds,
    rho: f64,
    cache: Option<ConCache>,
}

impl Function for QuadraticPenalty<'_, '_> {
    fn value(&mut self, x: &Vector) -> Result<f64> {
        let f = self.view.objective(x)?;
        if self.bounds.is_empty() {
            return Ok(f);
        }
        let c = cached_constraints(self.view, &mut self.cache, x)?;
        Ok(f + 0.5 * self.rho * self.bounds.signed_violation(&c).norm_squared())
    }
}

impl Smooth for QuadraticPenalty<'_, '_> {
    fn gradient(&mut self, x: &Vector) -> Result<Vector> {
        let g = self.view.gradient(x)?;
        if self.bounds.is_empty() {
            return Ok(g);
        }
        let c = cached_constraints(self.view, &mut self.cache, x)?;
        let j = self.view.jacobian(x)?;
        Ok(g + j.transpose() * (self.bounds.signed_violation(&c) * self.rho))
    }
}

/// Minimizes `f + rho_k/2 |v|^2` by quasi-Newton for `rho_k = rho0 growth^k`,
/// warm-starting each subproblem at the previous solution. The subproblem
/// tolerance shrinks from `sub_tol0` by `sub_tol_factor` down to `opt_tol`;
/// `rho` stops growing once the iterate is feasible.
pub(crate) fn quadratic_penalty(view: &mut ScaledView<'_>, opts: &SolverOptions) -> Result<Outcome> {
    let (opt_tol, feas_tol) = (opts.real("opt_tol"), opts.real("feas_tol"));
    let (growth, rho_max) = (opts.real("rho_growth"), opts.real("rho_max"));
    let maxiter = opts.count("maxiter");
    let variant: UpdateKind = opts.text("variant").parse()?;
    let line_search = opts.bool("use_line_search").then_some(LineSearchKind::Wolfe);
    let var_bounds = view.var_bounds().clone();
    let con_bounds = view.con_bounds().clone();
    let m = view.m();

    let mut x = view.x0().clone();
    let mut rho = opts.real("rho0");
    let mut sub_tol = opts.real("sub_tol0").max(opt_tol);
    let mut inner = 0;
    let mut itr = 0;
    loop {
        itr += 1;
        let settings = DescentSettings {
            maxiter: opts.count("sub_maxiter"),
            opt_tol: sub_tol,
            line_search,
            params: LineSearchParams::default(),
        };
        let mut pen = QuadraticPenalty {
            view: &mut *view,
            bounds: con_bounds.clone(),
            rho,
            cache: None,
        };
        let direction = Direction::QuasiNewton(HessianApprox::new(x.len(), variant));
        let r = descent(&mut pen, &var_bounds, &x, direction, &settings).map_err(|e| match e {
            Error::BudgetExceeded(_) | Error::NonFinite { .. } => e,
            e => Error::SolverFailure(format!("subproblem {itr} (rho = {rho:e}) failed: {e}")),
        })?;
        inner += r.niter;
        x = r.x;
        // the last accepted point of the subproblem is the cached one
        let c = match pen.cache.take() {
            Some(cc) if cc.x == x => cc.c,
            _ if m == 0 => Vector::zeros(0),
            _ => view.constraints(&x)?,
        };
        let s = con_bounds.signed_violation(&c);
        let lam = -&s * rho;
        let feas = max_violation(&con_bounds, &c);
        let f = r.f - 0.5 * rho * s.norm_squared();
        view.update_outputs(&[
            ("itr", OutputValue::from(itr)),
            ("obj", f.into()),
            ("opt", r.opt.into()),
            ("feas", feas.into()),
            ("rho", rho.into()),
            ("x", (&x).into()),
            ("lam", (&lam).into()),
        ])?;

        let converged = feas <= feas_tol && sub_tol <= opt_tol && r.converged;
        let stop = if converged {
            Some(format!("feasible and optimal after {inner} inner iterations"))
        } else if itr >= maxiter {
            Some("outer iteration limit reached".to_string())
        } else if feas > feas_tol && rho >= rho_max {
            Some(format!("penalty parameter reached its cap {rho_max:e} while infeasible"))
        } else {
            None
        };
        if let Some(message) = stop {
            return Ok(Outcome {
                x,
                f,
                optimality: r.opt,
                feasibility: feas,
                niter: itr,
                converged,
                message,
                multipliers: (m > 0).then_some(lam),
            });
        }
        if feas > feas_tol {
            rho = (rho * growth).min(rho_max);
        }
        sub_tol = (sub_tol * opts.real("sub_tol_factor")).max(opt_tol);
    }
}

/// Nonsmooth `f + rho |v|` through a view, remembering the objective and
/// constraint values at the lowest merit seen (the simplex best vertex).
struct ExactPenalty<'v, 'a> {
    view: &'v mut ScaledView<'a>,
    spec: MeritSpec,
    bounds: Bounds,
    best: Option<(Vector, f64, f64, Vector)>,
    itr_offset: usize,
}

impl Function for ExactPenalty<'_, '_> {
    fn value(&mut self, x: &Vector) -> Result<f64> {
        let f = self.view.objective(x)?;
        let c = if self.bounds.is_empty() {
            Vector::zeros(0)
        } else {
            self.view.constraints(x)?
        };
        let p = merit_value(&self.spec, f, &c, &self.bounds);
        if self.best.as_ref().is_none_or(|b| p < b.1) {
            self.best = Some((x.clone(), p, f, c));
        }
        Ok(p)
    }

    fn on_iter(&mut self, info: &IterInfo<'_>) -> Result<()> {
        self.view.update_outputs(&[
            ("itr", OutputValue::from(info.itr + self.itr_offset)),
            ("obj", info.f.into()),
            ("opt", info.opt.into()),
            ("x", info.x.into()),
        ])
    }
}

/// Minimizes `f + rho |v|_1` (or `|v|_inf`) at fixed `rho` with Nelder-Mead,
/// restarting the simplex at the best point while restarts still improve
/// the merit. `maxiter` bounds the total simplex iterations.
pub(crate) fn exact_penalty(view: &mut ScaledView<'_>, opts: &SolverOptions) -> Result<Outcome> {
    let kind = match opts.text("penalty") {
        "linf" => MeritKind::Linf,
        _ => MeritKind::L1,
    };
    let bounds = view.con_bounds().clone();
    let var_bounds = view.var_bounds().clone();
    let x0 = view.x0().clone();
    let opt_tol = opts.real("opt_tol");
    let mut pen = ExactPenalty {
        view: &mut *view,
        spec: MeritSpec::new(kind, opts.real("rho")),
        bounds: bounds.clone(),
        best: None,
        itr_offset: 0,
    };
    let mut budget = opts.count("maxiter");
    let mut x = x0;
    let mut total = 0;
    let mut restarts = 0;
    let mut last: Option<f64> = None;
    let r = loop {
        let s = SimplexSettings {
            maxiter: budget,
            opt_tol,
            init_scale: opts.real("init_scale"),
        };
        let r = nelder_mead(&mut pen, &var_bounds, &x, &s)?;
        total += r.niter;
        budget -= r.niter;
        pen.itr_offset = total;
        let stalled = last.is_some_and(|p| p - r.f <= opt_tol * p.abs().max(1.0));
        last = Some(r.f);
        if !r.converged || stalled || restarts >= opts.count("max_restarts") || budget == 0 {
            break r;
        }
        restarts += 1;
        x = r.x.clone();
    };
    let (f, c) = match pen.best.take() {
        Some((bx, _, f, c)) if bx == r.x => (f, c),
        _ => {
            let f = view.objective(&r.x)?;
            let c = if bounds.is_empty() { Vector::zeros(0) } else { view.constraints(&r.x)? };
            (f, c)
        }
    };
    let feas = max_violation(&bounds, &c);
    let message = if r.converged {
        format!("simplex converged on the penalty function ({restarts} restarts)")
    } else {
        "iteration limit reached".to_string()
    };
    Ok(Outcome {
        x: r.x,
        f,
        optimality: r.spread,
        feasibility: feas,
        niter: total,
        converged: r.converged && feas <= opts.real("feas_tol"),
        message,
        multipliers: None,
    })
}
