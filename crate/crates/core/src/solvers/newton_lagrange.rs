//! Newton's method on the first-order conditions of an equality-constrained
//! problem.

use super::common::{common_decls, solve_checked, Outcome};
use super::options::{OptionDecl, SolverOptions};
use crate::kit::{armijo, LineSearchParams};
use crate::problem::ScaledView;
use crate::runtime::{OutputKind, OutputValue, OutputsDecl};
use crate::{Error, Matrix, Result, Vector};

pub(crate) fn outputs(n: usize, m: usize) -> OutputsDecl {
    OutputsDecl::new()
        .with("itr", OutputKind::Int)
        .with("obj", OutputKind::Real)
        .with("opt", OutputKind::Real)
        .with("feas", OutputKind::Real)
        .with("alpha", OutputKind::Real)
        .with("x", OutputKind::Vector(n))
        .with("lam", OutputKind::Vector(m))
}

pub(crate) fn options() -> SolverOptions {
    let mut d = common_decls(500, false);
    d.push(OptionDecl::new("c1", 1e-4, "sufficient-decrease constant for |grad L|^2").positive());
    SolverOptions::new("newton_lagrange", d)
}

/// First-order data at one point.
struct Point {
    c_res: Vector,
    g: Vector,
    jac: Matrix,
}

impl Point {
    fn eval(view: &mut ScaledView<'_>, x: &Vector, target: &Vector) -> Result<Self> {
        let c = view.constraints(x)?;
        let g = view.gradient(x)?;
        let jac = view.jacobian(x)?;
        Ok(Self {
            c_res: c - target,
            g,
            jac,
        })
    }

    fn grad_lagrangian(&self, lam: &Vector) -> Vector {
        &self.g - self.jac.transpose() * lam
    }

    /// `|grad L|^2` over both blocks.
    fn residual_sq(&self, lam: &Vector) -> f64 {
        self.grad_lagrangian(lam).norm_squared() + self.c_res.norm_squared()
    }
}

/// Iterates `(x, lambda) -= alpha [grad^2 L]^{-1} grad L` with
/// `L = f - lambda^T c`, starting from `lambda = 0`. The step is a full step
/// unless `use_line_search` asks for Armijo backtracking on `|grad L|^2`.
pub(crate) fn newton_lagrange(view: &mut ScaledView<'_>, opts: &SolverOptions) -> Result<Outcome> {
    let (n, m) = (view.n(), view.m());
    if !view.spec().equality_only() {
        return Err(Error::Unsupported(
            "newton_lagrange needs every constraint to be an equality".into(),
        ));
    }
    let target = view.con_bounds().lower.clone();
    let maxiter = opts.count("maxiter");
    let (opt_tol, feas_tol) = (opts.real("opt_tol"), opts.real("feas_tol"));
    let use_ls = opts.bool("use_line_search");
    let params = LineSearchParams {
        c1: opts.real("c1"),
        ..Default::default()
    };

    let mut x = view.x0().clone();
    let mut lam = Vector::zeros(m);
    let mut f = view.objective(&x)?;
    let mut pt = if m > 0 {
        Point::eval(view, &x, &target)?
    } else {
        Point {
            c_res: Vector::zeros(0),
            g: view.gradient(&x)?,
            jac: Matrix::zeros(0, n),
        }
    };
    let mut itr = 0;
    let mut alpha = 0.0;
    let mut failures = 0;
    loop {
        let opt = pt.grad_lagrangian(&lam).norm();
        let feas = if m > 0 { pt.c_res.amax() } else { 0.0 };
        view.update_outputs(&[
            ("itr", OutputValue::from(itr)),
            ("obj", f.into()),
            ("opt", opt.into()),
            ("feas", feas.into()),
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
            if failures > 0 {
                message.push_str(&format!("; {failures} line searches hit their trial limit"));
            }
            return Ok(Outcome {
                x,
                f,
                optimality: opt,
                feasibility: feas,
                niter: itr,
                converged,
                message,
                multipliers: Some(lam),
            });
        }
        itr += 1;

        let h = view.lagrangian_hessian(&x, &lam)?;
        let mut kkt = Matrix::zeros(n + m, n + m);
        kkt.view_mut((0, 0), (n, n)).copy_from(&h);
        kkt.view_mut((0, n), (n, m)).copy_from(&(-pt.jac.transpose()));
        kkt.view_mut((n, 0), (m, n)).copy_from(&(-&pt.jac));
        let mut rhs = Vector::zeros(n + m);
        rhs.rows_mut(0, n).copy_from(&(-pt.grad_lagrangian(&lam)));
        rhs.rows_mut(n, m).copy_from(&pt.c_res);
        let step = solve_checked(kkt, &rhs, "KKT matrix (constraint Jacobian rank-deficient?)")?;
        let dx = step.rows(0, n).into_owned();
        let dl = step.rows(n, m).into_owned();

        if use_ls {
            let r0 = pt.residual_sq(&lam);
            let mut last: Option<(f64, Point)> = None;
            let r = armijo(
                |a| {
                    let xa = &x + &dx * a;
                    let p = if m > 0 {
                        Point::eval(view, &xa, &target)?
                    } else {
                        Point {
                            c_res: Vector::zeros(0),
                            g: view.gradient(&xa)?,
                            jac: Matrix::zeros(0, n),
                        }
                    };
                    let val = p.residual_sq(&(&lam + &dl * a));
                    last = Some((a, p));
                    Ok(val)
                },
                r0,
                -2.0 * r0,
                &params,
            )?;
            failures += usize::from(!r.converged);
            alpha = r.alpha;
            x += &dx * alpha;
            lam += &dl * alpha;
            pt = match last {
                Some((a, p)) if a == alpha => p,
                _ => Point::eval(view, &x, &target)?,
            };
        } else {
            alpha = 1.0;
            x += &dx;
            lam += &dl;
            pt = if m > 0 {
                Point::eval(view, &x, &target)?
            } else {
                Point {
                    c_res: Vector::zeros(0),
                    g: view.gradient(&x)?,
                    jac: Matrix::zeros(0, n),
                }
            };
        }
        f = view.objective(&x)?;
    }
}
