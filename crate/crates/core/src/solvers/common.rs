//! Pieces shared by several solvers: the unscaled-free outcome type, common
//! option declarations, and the descent and simplex loops that more than
//! one driver runs.

use nalgebra::linalg::{Cholesky, LU};

use super::options::OptionDecl;
use crate::kit::{armijo, wolfe, HessianApprox, LineSearchKind, LineSearchParams};
use crate::problem::{Bounds, ScaledView};
use crate::runtime::OutputValue;
use crate::{Error, Matrix, Result, Vector};

/// Final state of a solver in scaled space; converted to a report by
/// [`solve`](super::solve).
#[derive(Debug, Clone)]
pub(crate) struct Outcome {
    pub x: Vector,
    pub f: f64,
    pub optimality: f64,
    pub feasibility: f64,
    pub niter: usize,
    pub converged: bool,
    pub message: String,
    pub multipliers: Option<Vector>,
}

pub(crate) fn common_decls(maxiter: i64, use_line_search: bool) -> Vec<OptionDecl> {
    vec![
        OptionDecl::new("maxiter", maxiter, "maximum number of iterations").positive(),
        OptionDecl::new("opt_tol", 1e-6, "optimality tolerance").positive(),
        OptionDecl::new("feas_tol", 1e-6, "feasibility tolerance").positive(),
        OptionDecl::new("use_line_search", use_line_search, "use a line search instead of unit steps"),
        OptionDecl::new("seed", 0, "random seed for stochastic solvers").non_negative(),
    ]
}

pub(crate) fn require_unconstrained(view: &ScaledView<'_>, solver: &str) -> Result<()> {
    if view.m() > 0 {
        return Err(Error::Unsupported(format!(
            "{solver} handles unconstrained problems only; `{}` has {} constraints",
            view.spec().name(),
            view.m()
        )));
    }
    Ok(())
}

/// Largest entry of the two-sided violation, 0 when there are no rows.
pub(crate) fn max_violation(bounds: &Bounds, c: &Vector) -> f64 {
    if c.is_empty() {
        0.0
    } else {
        bounds.violation(c).amax()
    }
}

/// `|clip(x - g) - x|_2`, which is `|g|_2` away from active bounds.
pub(crate) fn projected_gradient_norm(x: &Vector, g: &Vector, bounds: &Bounds) -> f64 {
    if bounds.lower.iter().all(|v| *v == f64::NEG_INFINITY) && bounds.upper.iter().all(|v| *v == f64::INFINITY) {
        g.norm()
    } else {
        (bounds.clip(&(x - g)) - x).norm()
    }
}

fn has_finite_bounds(bounds: &Bounds) -> bool {
    bounds.lower.iter().chain(bounds.upper.iter()).any(|v| v.is_finite())
}

/// Iteration data passed to [`Smooth::on_iter`] and [`Function::on_iter`].
pub(crate) struct IterInfo<'a> {
    pub itr: usize,
    pub x: &'a Vector,
    pub f: f64,
    pub opt: f64,
    pub alpha: f64,
}

/// A scalar function evaluated through a view.
pub(crate) trait Function {
    fn value(&mut self, x: &Vector) -> Result<f64>;

    fn on_iter(&mut self, _info: &IterInfo<'_>) -> Result<()> {
        Ok(())
    }
}

/// A differentiable scalar function.
pub(crate) trait Smooth: Function {
    fn gradient(&mut self, x: &Vector) -> Result<Vector>;

    fn hessian(&mut self, _x: &Vector) -> Result<Matrix> {
        Err(Error::Unsupported("no Hessian available".into()))
    }
}

/// The objective of a view, recording `itr, obj, opt, alpha, x` each
/// iteration.
pub(crate) struct Objective<'v, 'a>(pub &'v mut ScaledView<'a>);

impl Function for Objective<'_, '_> {
    fn value(&mut self, x: &Vector) -> Result<f64> {
        self.0.objective(x)
    }

    fn on_iter(&mut self, info: &IterInfo<'_>) -> Result<()> {
        self.0.update_outputs(&[
            ("itr", OutputValue::from(info.itr)),
            ("obj", info.f.into()),
            ("opt", info.opt.into()),
            ("alpha", info.alpha.into()),
            ("x", info.x.into()),
        ])
    }
}

impl Smooth for Objective<'_, '_> {
    fn gradient(&mut self, x: &Vector) -> Result<Vector> {
        self.0.gradient(x)
    }

    fn hessian(&mut self, x: &Vector) -> Result<Matrix> {
        self.0.objective_hessian(x)
    }
}

/// How a descent loop picks its search direction.
pub(crate) enum Direction {
    Steepest,
    Newton,
    QuasiNewton(HessianApprox),
}

pub(crate) struct DescentSettings {
    pub maxiter: usize,
    pub opt_tol: f64,
    /// `None` takes unit steps.
    pub line_search: Option<LineSearchKind>,
    pub params: LineSearchParams,
}

pub(crate) struct DescentResult {
    pub x: Vector,
    pub f: f64,
    pub opt: f64,
    pub niter: usize,
    pub converged: bool,
    pub line_search_failures: usize,
    pub direction_resets: usize,
}

/// Generic line-search descent from `x0` on the box `bounds`.
///
/// Iterates are projected onto the box; with finite bounds the line search
/// backtracks along the projected path, checking
/// `f(x(a)) <= f + c1 g^T (x(a) - x)`. Optimality is the projected gradient
/// norm. Nothing is evaluated after the last iteration, so a shorter run
/// evaluates an exact prefix of a longer one.
pub(crate) fn descent<F: Smooth>(
    fun: &mut F,
    bounds: &Bounds,
    x0: &Vector,
    mut direction: Direction,
    s: &DescentSettings,
) -> Result<DescentResult> {
    let projected = has_finite_bounds(bounds);
    let mut x = bounds.clip(x0);
    let mut f = fun.value(&x)?;
    let mut g = fun.gradient(&x)?;
    let mut opt = projected_gradient_norm(&x, &g, bounds);
    let mut itr = 0;
    let mut failures = 0;
    let mut resets = 0;
    fun.on_iter(&IterInfo {
        itr,
        x: &x,
        f,
        opt,
        alpha: 0.0,
    })?;

    while opt > s.opt_tol && itr < s.maxiter {
        itr += 1;
        let mut p = match &mut direction {
            Direction::Steepest => -&g,
            Direction::Newton => newton_direction(&fun.hessian(&x)?, &g)?,
            Direction::QuasiNewton(h) => {
                let p = LU::new(h.matrix().clone()).solve(&(-&g));
                match p {
                    Some(p) if p.iter().all(|v| v.is_finite()) && g.dot(&p) < 0.0 => p,
                    _ => {
                        h.reset();
                        resets += 1;
                        -&g
                    }
                }
            }
        };
        if g.dot(&p) >= 0.0 {
            // only reachable for Newton with a regularized Hessian and
            // roundoff; fall back to the gradient
            p = -&g;
        }

        let (x_new, f_new, g_new, alpha) = match s.line_search {
            None => {
                let xn = bounds.clip(&(&x + &p));
                let fn_ = fun.value(&xn)?;
                (xn, fn_, None, 1.0)
            }
            Some(_) if projected => {
                let (xn, fn_, a, ok) = projected_armijo(fun, bounds, &x, f, &g, &p, &s.params)?;
                failures += usize::from(!ok);
                (xn, fn_, None, a)
            }
            Some(LineSearchKind::Armijo) => {
                let r = armijo(|a| fun.value(&(&x + &p * a)), f, g.dot(&p), &s.params)?;
                failures += usize::from(!r.converged);
                (&x + &p * r.alpha, r.f_new, None, r.alpha)
            }
            Some(LineSearchKind::Wolfe) => {
                let r = wolfe(
                    |a| {
                        let xa = &x + &p * a;
                        let fa = fun.value(&xa)?;
                        let ga = fun.gradient(&xa)?;
                        Ok((fa, ga.dot(&p), ga))
                    },
                    f,
                    g.dot(&p),
                    &s.params,
                )?;
                failures += usize::from(!r.converged);
                (&x + &p * r.alpha, r.f_new, r.g_new, r.alpha)
            }
        };
        let g_new = match g_new {
            Some(gn) => gn,
            None => fun.gradient(&x_new)?,
        };
        if let Direction::QuasiNewton(h) = &mut direction {
            h.update(&(&x_new - &x), &(&g_new - &g));
        }
        x = x_new;
        f = f_new;
        g = g_new;
        opt = projected_gradient_norm(&x, &g, bounds);
        fun.on_iter(&IterInfo {
            itr,
            x: &x,
            f,
            opt,
            alpha,
        })?;
    }

    Ok(DescentResult {
        converged: opt <= s.opt_tol,
        x,
        f,
        opt,
        niter: itr,
        line_search_failures: failures,
        direction_resets: resets,
    })
}

/// Backtracking along `clip(x + a p)`.
fn projected_armijo<F: Function>(
    fun: &mut F,
    bounds: &Bounds,
    x: &Vector,
    f: f64,
    g: &Vector,
    p: &Vector,
    params: &LineSearchParams,
) -> Result<(Vector, f64, f64, bool)> {
    let mut alpha = params.alpha0;
    let mut best: Option<(Vector, f64, f64)> = None;
    for _ in 0..params.max_iters {
        let xa = bounds.clip(&(x + p * alpha));
        let decrease = g.dot(&(&xa - x));
        let fa = fun.value(&xa)?;
        if decrease < 0.0 && fa <= f + params.c1 * decrease {
            return Ok((xa, fa, alpha, true));
        }
        if best.as_ref().is_none_or(|b| fa < b.1) {
            best = Some((xa, fa, alpha));
        }
        alpha *= params.tau;
    }
    let (xa, fa, a) = best.expect("at least one trial");
    Ok((xa, fa, a, false))
}

/// Newton direction `-H^{-1} g`, adding `mu I` with `mu` doubling from
/// `1e-6 |H|_inf` while the Cholesky factorization fails.
pub(crate) fn newton_direction(h: &Matrix, g: &Vector) -> Result<Vector> {
    if let Some(ch) = Cholesky::new(h.clone()) {
        return Ok(ch.solve(&(-g)));
    }
    let n = h.nrows();
    let norm = h.row_iter().map(|r| r.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max);
    let mut mu = 1e-6 * if norm > 0.0 { norm } else { 1.0 };
    for _ in 0..60 {
        let shifted = h + Matrix::identity(n, n) * mu;
        if let Some(ch) = Cholesky::new(shifted) {
            return Ok(ch.solve(&(-g)));
        }
        mu *= 2.0;
    }
    Err(Error::Singular(format!(
        "Hessian is not positive definite even after adding {mu:e} I"
    )))
}

pub(crate) struct SimplexSettings {
    pub maxiter: usize,
    pub opt_tol: f64,
    pub init_scale: f64,
}

pub(crate) struct SimplexResult {
    pub x: Vector,
    pub f: f64,
    pub spread: f64,
    pub niter: usize,
    pub converged: bool,
}

/// Nelder-Mead with reflection 1, expansion 2, contraction 1/2 and shrink
/// 1/2. Vertices are clipped to `bounds`. Stops when the spread of vertex
/// values is at most `opt_tol` and the simplex diameter is at most
/// `opt_tol * max(1, |x_best|)`.
pub(crate) fn nelder_mead<F: Function>(
    fun: &mut F,
    bounds: &Bounds,
    x0: &Vector,
    s: &SimplexSettings,
) -> Result<SimplexResult> {
    let n = x0.len();
    let x0 = bounds.clip(x0);
    let mut verts = vec![x0.clone()];
    for i in 0..n {
        let step = s.init_scale * x0[i].abs().max(1.0);
        let mut v = x0.clone();
        v[i] += step;
        v = bounds.clip(&v);
        if v[i] == x0[i] {
            v[i] -= step;
            v = bounds.clip(&v);
        }
        verts.push(v);
    }
    let mut vals = Vec::with_capacity(n + 1);
    for v in &verts {
        vals.push(fun.value(v)?);
    }

    let mut itr = 0;
    loop {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        verts = order.iter().map(|&i| verts[i].clone()).collect();
        vals = order.iter().map(|&i| vals[i]).collect();

        let spread = vals[n] - vals[0];
        let diameter = verts[1..].iter().map(|v| (v - &verts[0]).amax()).fold(0.0, f64::max);
        fun.on_iter(&IterInfo {
            itr,
            x: &verts[0],
            f: vals[0],
            opt: spread,
            alpha: diameter,
        })?;
        let converged = spread <= s.opt_tol && diameter <= s.opt_tol * verts[0].norm().max(1.0);
        if converged || itr >= s.maxiter {
            return Ok(SimplexResult {
                x: verts[0].clone(),
                f: vals[0],
                spread,
                niter: itr,
                converged,
            });
        }
        itr += 1;

        let centroid = verts[..n].iter().fold(Vector::zeros(n), |acc, v| acc + v) / n as f64;
        let worst = verts[n].clone();
        let xr = bounds.clip(&(&centroid * 2.0 - &worst));
        let fr = fun.value(&xr)?;
        if fr < vals[0] {
            let xe = bounds.clip(&(&centroid * 3.0 - &worst * 2.0));
            let fe = fun.value(&xe)?;
            if fe < fr {
                verts[n] = xe;
                vals[n] = fe;
            } else {
                verts[n] = xr;
                vals[n] = fr;
            }
            continue;
        }
        if fr < vals[n - 1] {
            verts[n] = xr;
            vals[n] = fr;
            continue;
        }
        let (xc, fc, accept) = if fr < vals[n] {
            let xc = bounds.clip(&((&centroid + &xr) * 0.5));
            let fc = fun.value(&xc)?;
            (xc, fc, fc <= fr)
        } else {
            let xc = bounds.clip(&((&centroid + &worst) * 0.5));
            let fc = fun.value(&xc)?;
            (xc, fc, fc < vals[n])
        };
        if accept {
            verts[n] = xc;
            vals[n] = fc;
            continue;
        }
        for i in 1..=n {
            verts[i] = (&verts[0] + &verts[i]) * 0.5;
            vals[i] = fun.value(&verts[i])?;
        }
    }
}

/// Solves `a x = b` by LU with full pivoting, rejecting numerically
/// singular matrices.
pub(crate) fn solve_checked(a: Matrix, b: &Vector, what: &str) -> Result<Vector> {
    let lu = a.full_piv_lu();
    let diag = lu.u().diagonal().map(f64::abs);
    if diag.is_empty() {
        return Ok(Vector::zeros(0));
    }
    if !(diag.min() > 1e-13 * diag.max()) {
        return Err(Error::Singular(format!("{what} is singular")));
    }
    lu.solve(b).ok_or_else(|| Error::Singular(format!("{what} is singular")))
}
