//! Sequential quadratic programming with a BFGS Lagrangian Hessian and an
//! l1 merit line search.

use super::common::{common_decls, max_violation, Outcome};
use super::options::{OptionDecl, SolverOptions};
use crate::kit::{armijo, qp_solve, HessianApprox, LineSearchParams, UpdateKind};
use crate::problem::{Bounds, ScaledView};
use crate::runtime::{OutputKind, OutputValue, OutputsDecl};
use crate::{Error, Matrix, Result, Vector};

pub(crate) fn outputs(n: usize, m: usize) -> OutputsDecl {
    OutputsDecl::new()
        .with("itr", OutputKind::Int)
        .with("obj", OutputKind::Real)
        .with("opt", OutputKind::Real)
        .with("feas", OutputKind::Real)
        .with("rho", OutputKind::Real)
        .with("alpha", OutputKind::Real)
        .with("x", OutputKind::Vector(n))
        .with("lam", OutputKind::Vector(m))
}

pub(crate) fn options() -> SolverOptions {
    let mut d = common_decls(500, true);
    d.extend([
        OptionDecl::new("c1", 1e-4, "sufficient-decrease constant for the merit").positive(),
        OptionDecl::new("rho0", 0.0, "initial l1 penalty parameter").non_negative(),
        OptionDecl::new("max_restorations", 5, "consecutive restoration steps before giving up").positive(),
    ]);
    SolverOptions::new("sqp", d)
}

/// Function values and first derivatives at one iterate.
struct Point {
    f: f64,
    g: Vector,
    c: Vector,
    jac: Matrix,
}

fn l1_violation(con: &Bounds, var: &Bounds, c: &Vector, x: &Vector) -> f64 {
    let vc: f64 = if c.is_empty() { 0.0 } else { con.violation(c).sum() };
    vc + var.violation(x).sum()
}

fn feasibility(con: &Bounds, var: &Bounds, c: &Vector, x: &Vector) -> f64 {
    max_violation(con, c).max(max_violation(var, x))
}

/// Largest `|multiplier * slack|` over inequality rows; the slack is taken
/// at the bound the multiplier's sign points to, so a multiplier pulling
/// toward an infinite bound gives infinity.
fn complementarity(bounds: &Bounds, values: &Vector, mult: &Vector) -> f64 {
    let mut worst: f64 = 0.0;
    for j in 0..values.len() {
        if bounds.is_equality(j) || mult[j] == 0.0 {
            continue;
        }
        let slack = if mult[j] > 0.0 {
            values[j] - bounds.lower[j]
        } else {
            bounds.upper[j] - values[j]
        };
        worst = worst.max((mult[j] * slack).abs());
    }
    worst
}

/// Linearized constraints `l <= v + A p <= u` split into QP rows.
fn push_rows(
    bounds: &Bounds,
    values: &Vector,
    a: &Matrix,
    eq: &mut Vec<(Vec<f64>, f64)>,
    ineq: &mut Vec<(Vec<f64>, f64)>,
    map_eq: &mut Vec<usize>,
    map_in: &mut Vec<(usize, f64)>,
    offset: usize,
) {
    for j in 0..values.len() {
        let row: Vec<f64> = a.row(j).iter().copied().collect();
        if bounds.is_equality(j) {
            eq.push((row, bounds.lower[j] - values[j]));
            map_eq.push(offset + j);
            continue;
        }
        if bounds.lower[j].is_finite() {
            ineq.push((row.clone(), bounds.lower[j] - values[j]));
            map_in.push((offset + j, 1.0));
        }
        if bounds.upper[j].is_finite() {
            ineq.push((row.iter().map(|v| -v).collect(), values[j] - bounds.upper[j]));
            map_in.push((offset + j, -1.0));
        }
    }
}

fn stack(rows: &[(Vec<f64>, f64)], n: usize) -> (Matrix, Vector) {
    let a = Matrix::from_fn(rows.len(), n, |i, k| rows[i].0[k]);
    let b = Vector::from_iterator(rows.len(), rows.iter().map(|r| r.1));
    (a, b)
}

/// Solves the QP subproblem; returns the step and signed multipliers for
/// the `m` constraints followed by the `n` variable bounds.
fn subproblem(
    b: &Matrix,
    pt: &Point,
    x: &Vector,
    con: &Bounds,
    var: &Bounds,
) -> Result<(Vector, Vector)> {
    let (n, m) = (x.len(), pt.c.len());
    let (mut eq, mut ineq) = (Vec::new(), Vec::new());
    let (mut map_eq, mut map_in) = (Vec::new(), Vec::new());
    push_rows(con, &pt.c, &pt.jac, &mut eq, &mut ineq, &mut map_eq, &mut map_in, 0);
    push_rows(var, x, &Matrix::identity(n, n), &mut eq, &mut ineq, &mut map_eq, &mut map_in, m);
    let (a_eq, b_eq) = stack(&eq, n);
    let (a_in, b_in) = stack(&ineq, n);
    let sol = qp_solve(b, &pt.g, &a_eq, &b_eq, &a_in, &b_in)?;
    let mut mult = Vector::zeros(m + n);
    for (k, &j) in map_eq.iter().enumerate() {
        mult[j] += sol.lambda_eq[k];
    }
    for (k, &(j, sign)) in map_in.iter().enumerate() {
        mult[j] += sign * sol.lambda_in[k];
    }
    Ok((sol.p, mult))
}

fn evaluate(view: &mut ScaledView<'_>, x: &Vector, m: usize) -> Result<Point> {
    let f = view.objective(x)?;
    let g = view.gradient(x)?;
    let (c, jac) = if m > 0 {
        (view.constraints(x)?, view.jacobian(x)?)
    } else {
        (Vector::zeros(0), Matrix::zeros(0, x.len()))
    };
    Ok(Point { f, g, c, jac })
}

/// SQP iteration: QP step from the current BFGS matrix, `rho = max(rho,
/// |lambda_hat|_inf + 1)`, Armijo backtracking on `f + rho |v|_1` (variable
/// bounds included), then `lambda += alpha (lambda_hat - lambda)`.
///
/// When the linearized constraints are inconsistent a restoration step is
/// taken instead: one Armijo step on `1/2 |v(x)|^2` (see
/// [`restoration_step`]).
pub(crate) fn sqp(view: &mut ScaledView<'_>, opts: &SolverOptions) -> Result<Outcome> {
    let (n, m) = (view.n(), view.m());
    let con = view.con_bounds().clone();
    let var = view.var_bounds().clone();
    let maxiter = opts.count("maxiter");
    let (opt_tol, feas_tol) = (opts.real("opt_tol"), opts.real("feas_tol"));
    let use_ls = opts.bool("use_line_search");
    let max_restorations = opts.count("max_restorations");
    let params = LineSearchParams {
        c1: opts.real("c1"),
        ..Default::default()
    };

    let mut x = view.x0().clone();
    let mut pt = evaluate(view, &x, m)?;
    // multipliers of the m constraints followed by the n variable bounds
    let mut mult = Vector::zeros(m + n);
    let mut hess = HessianApprox::new(n, UpdateKind::Bfgs);
    let mut rho = opts.real("rho0");
    let mut alpha = 0.0;
    let mut itr = 0;
    let mut restorations = 0;
    let mut total_restorations = 0;
    let mut ls_failures = 0;

    loop {
        let lam = mult.rows(0, m).into_owned();
        let z = mult.rows(m, n).into_owned();
        let grad_l = &pt.g - pt.jac.transpose() * &lam - &z;
        let opt = grad_l
            .amax()
            .max(complementarity(&con, &pt.c, &lam))
            .max(complementarity(&var, &x, &z));
        let feas = feasibility(&con, &var, &pt.c, &x);
        view.update_outputs(&[
            ("itr", OutputValue::from(itr)),
            ("obj", pt.f.into()),
            ("opt", opt.into()),
            ("feas", feas.into()),
            ("rho", rho.into()),
            ("alpha", alpha.into()),
            ("x", (&x).into()),
            ("lam", (&lam).into()),
        ])?;
        let converged = opt <= opt_tol && feas <= feas_tol;
        if converged || itr >= maxiter {
            let mut message = if converged {
                "optimality and feasibility tolerances reached".to_string()
            } else {
                "iteration limit reached".to_string()
            };
            if total_restorations > 0 {
                message.push_str(&format!("; {total_restorations} restoration steps"));
            }
            if ls_failures > 0 {
                message.push_str(&format!("; {ls_failures} line searches hit their trial limit"));
            }
            return Ok(Outcome {
                x,
                f: pt.f,
                optimality: opt,
                feasibility: feas,
                niter: itr,
                converged,
                message,
                multipliers: (m > 0).then_some(lam),
            });
        }
        itr += 1;

        let (p, mult_hat) = match subproblem(hess.matrix(), &pt, &x, &con, &var) {
            Ok(s) => s,
            Err(Error::QpInfeasible) => {
                restorations += 1;
                total_restorations += 1;
                if restorations > max_restorations {
                    return Err(Error::SolverFailure(format!(
                        "linearized constraints inconsistent after {max_restorations} restoration steps"
                    )));
                }
                let (xn, a) = restoration_step(view, &pt, &x, &con, &var, &params)?;
                alpha = a;
                x = xn;
                pt = evaluate(view, &x, m)?;
                continue;
            }
            Err(e) => return Err(e),
        };
        restorations = 0;

        rho = rho.max(mult_hat.amax() + 1.0);
        let viol0 = l1_violation(&con, &var, &pt.c, &x);
        let merit0 = pt.f + rho * viol0;
        let slope0 = pt.g.dot(&p) - rho * viol0;
        let mut last: Option<(f64, f64, Vector)> = None;
        alpha = if use_ls && slope0 < 0.0 {
            let r = armijo(
                |a| {
                    let xa = &x + &p * a;
                    let f = view.objective(&xa)?;
                    let c = if m > 0 { view.constraints(&xa)? } else { Vector::zeros(0) };
                    let v = l1_violation(&con, &var, &c, &xa);
                    last = Some((a, f, c));
                    Ok(f + rho * v)
                },
                merit0,
                slope0,
                &params,
            )?;
            ls_failures += usize::from(!r.converged);
            r.alpha
        } else {
            1.0
        };
        let x_new = &x + &p * alpha;
        let (f_new, c_new) = match last {
            Some((a, f, c)) if a == alpha => (f, c),
            _ => (
                view.objective(&x_new)?,
                if m > 0 { view.constraints(&x_new)? } else { Vector::zeros(0) },
            ),
        };
        let g_new = view.gradient(&x_new)?;
        let jac_new = if m > 0 { view.jacobian(&x_new)? } else { Matrix::zeros(0, n) };
        mult += (mult_hat - &mult) * alpha;

        let lam = mult.rows(0, m).into_owned();
        let d = &x_new - &x;
        let w = (&g_new - &pt.g) - (&jac_new - &pt.jac).transpose() * &lam;
        hess.update(&d, &damped(hess.matrix(), &d, w));

        x = x_new;
        pt = Point {
            f: f_new,
            g: g_new,
            c: c_new,
            jac: jac_new,
        };
    }
}

/// Powell damping: blends `w` toward `B d` so that `d^T w >= 0.2 d^T B d`,
/// keeping the BFGS matrix positive definite.
fn damped(b: &Matrix, d: &Vector, w: Vector) -> Vector {
    let bd = b * d;
    let dbd = d.dot(&bd);
    let dw = d.dot(&w);
    if dbd <= 0.0 || dw >= 0.2 * dbd {
        return w;
    }
    let theta = 0.8 * dbd / (dbd - dw);
    w * theta + bd * (1.0 - theta)
}

/// One Armijo step on `1/2 |v|^2`, with `v` covering both constraint and
/// variable-bound violation. The direction is a Levenberg-Marquardt step on
/// the violated rows, with trial points clipped to the variable bounds;
/// steepest descent `-J^T v` is the fallback when that search fails.
fn restoration_step(
    view: &mut ScaledView<'_>,
    pt: &Point,
    x: &Vector,
    con: &Bounds,
    var: &Bounds,
    params: &LineSearchParams,
) -> Result<(Vector, f64)> {
    let (m, n) = (pt.c.len(), x.len());
    let phi = |c: &Vector, x: &Vector| {
        let vc = if c.is_empty() { 0.0 } else { con.signed_violation(c).norm_squared() };
        0.5 * (vc + var.signed_violation(x).norm_squared())
    };
    let sc = if m > 0 { con.signed_violation(&pt.c) } else { Vector::zeros(0) };
    let sv = var.signed_violation(x);
    let grad = pt.jac.transpose() * &sc + &sv;
    if grad.amax() == 0.0 {
        return Err(Error::SolverFailure(
            "linearized constraints inconsistent at a stationary point of the violation".into(),
        ));
    }
    let phi0 = phi(&pt.c, x);

    // rows that contribute to the violation: equalities and violated bounds
    let mut normal = Matrix::zeros(n, n);
    for k in 0..m {
        if con.is_equality(k) || sc[k] != 0.0 {
            let row = pt.jac.row(k);
            normal += row.transpose() * row;
        }
    }
    for i in 0..n {
        if sv[i] != 0.0 {
            normal[(i, i)] += 1.0;
        }
    }
    let mu = 1e-8 * normal.diagonal().amax().max(1.0);
    for i in 0..n {
        normal[(i, i)] += mu;
    }
    if let Some(chol) = normal.cholesky() {
        let dir = -chol.solve(&grad);
        let slope = grad.dot(&dir);
        if slope < 0.0 {
            let mut clipped = x.clone();
            let r = armijo(
                |a| {
                    clipped = var.clip(&(x + &dir * a));
                    let c = if m > 0 { view.constraints(&clipped)? } else { Vector::zeros(0) };
                    Ok(phi(&c, &clipped))
                },
                phi0,
                slope,
                params,
            )?;
            if r.converged {
                return Ok((var.clip(&(x + dir * r.alpha)), r.alpha));
            }
        }
    }

    let dir = -&grad;
    let r = armijo(
        |a| {
            let xa = x + &dir * a;
            let c = if m > 0 { view.constraints(&xa)? } else { Vector::zeros(0) };
            Ok(phi(&c, &xa))
        },
        phi0,
        -grad.norm_squared(),
        params,
    )?;
    Ok((x + dir * r.alpha, r.alpha))
}
