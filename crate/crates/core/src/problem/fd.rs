//! First-order forward differences in unscaled space.

use super::{EvalKind, ScaledView};
use crate::{Matrix, Result, Vector};

/// Forward-difference step for a coordinate with value `xi`:
/// `sqrt(eps) * max(1, |xi|)`.
pub fn fd_step(xi: f64) -> f64 {
    f64::EPSILON.sqrt() * xi.abs().max(1.0)
}

/// Perturbs coordinate `i` and returns the point together with the step that
/// was actually representable.
fn perturbed(x: &Vector, i: usize) -> (Vector, f64) {
    let mut xp = x.clone();
    xp[i] += fd_step(x[i]);
    let h = xp[i] - x[i];
    (xp, h)
}

impl ScaledView<'_> {
    /// Gradient by forward differences of the objective: `n` objective
    /// evaluations when `f(x)` was the last one computed, `n + 1` otherwise.
    pub(super) fn fd_gradient(&mut self, x: &Vector) -> Result<Vector> {
        let f0 = match self.memo_objective(x) {
            Some(f) => f,
            None => self.raw_objective(x)?,
        };
        let mut g = Vector::zeros(x.len());
        for i in 0..x.len() {
            let (xp, h) = perturbed(x, i);
            let fp = self.raw_objective(&xp)?;
            g[i] = (fp - f0) / h;
        }
        if g.iter().any(|v| !v.is_finite()) {
            return Err(self.non_finite(EvalKind::Grad, x));
        }
        Ok(g)
    }

    /// Jacobian built column by column from `n` extra constraint evaluations.
    pub(super) fn fd_jacobian(&mut self, x: &Vector) -> Result<Matrix> {
        let c0 = match self.memo_constraints(x) {
            Some(c) => c,
            None => self.raw_constraints(x)?,
        };
        let mut j = Matrix::zeros(c0.len(), x.len());
        for i in 0..x.len() {
            let (xp, h) = perturbed(x, i);
            let cp = self.raw_constraints(&xp)?;
            j.set_column(i, &((cp - &c0) / h));
        }
        if j.iter().any(|v| !v.is_finite()) {
            return Err(self.non_finite(EvalKind::Jac, x));
        }
        Ok(j)
    }

    /// Hessian of `f - lam^T c` (or of `f` when `lam` is `None`) by
    /// differencing its gradient, symmetrized.
    pub(super) fn fd_hessian(&mut self, x: &Vector, lam: Option<&Vector>) -> Result<Matrix> {
        let n = x.len();
        let g0 = self.lagrangian_gradient(x, lam)?;
        let mut h = Matrix::zeros(n, n);
        for i in 0..n {
            let (xp, step) = perturbed(x, i);
            let gp = self.lagrangian_gradient(&xp, lam)?;
            h.set_column(i, &((gp - &g0) / step));
        }
        let h = (&h + h.transpose()) * 0.5;
        if h.iter().any(|v| !v.is_finite()) {
            let kind = if lam.is_some() { EvalKind::LagHess } else { EvalKind::ObjHess };
            return Err(self.non_finite(kind, x));
        }
        Ok(h)
    }

    fn lagrangian_gradient(&mut self, x: &Vector, lam: Option<&Vector>) -> Result<Vector> {
        let g = self.raw_gradient(x)?;
        match lam {
            Some(l) if !l.is_empty() => {
                let j = self.raw_jacobian(x)?;
                Ok(g - j.transpose() * l)
            }
            _ => Ok(g),
        }
    }
}
