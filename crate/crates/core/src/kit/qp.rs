//! Dense convex QP solver: primal active set over equality-constrained
//! subproblems.
//!
//! Solves
//!
//! ```text
//! minimize    1/2 p^T H p + g^T p
//! subject to  A_eq p  = b_eq
//!             A_in p >= b_in
//! ```
//!
//! Multipliers follow the stationarity condition
//! `H p + g = A_eq^T lambda_eq + A_in^T lambda_in` with `lambda_in >= 0`,
//! matching the Lagrangian `L = f - lambda^T c`.

use nalgebra::linalg::FullPivLU;

use crate::{Error, Matrix, Result, Vector};

#[derive(Debug, Clone, PartialEq)]
pub struct QpSolution {
    pub p: Vector,
    /// One entry per equality row; rows dropped as linearly dependent get 0.
    pub lambda_eq: Vector,
    /// One entry per inequality row; zero for inactive rows.
    pub lambda_in: Vector,
    /// Inequality rows in the final working set.
    pub active: Vec<usize>,
    pub iterations: usize,
}

/// Solves the QP above. `H` must be positive definite on the null space of
/// every working set the iteration visits; pass empty (`0 x n`) matrices for
/// absent constraint blocks.
///
/// A start point feasible for the inequalities is found, when needed, by an
/// elastic phase that minimizes the distance to the minimum-norm equality
/// solution plus an increasing penalty on a single slack shared by all inequality
/// rows. Linearly dependent equality rows are dropped; inconsistent ones give
/// [`Error::QpInfeasible`].
pub fn qp_solve(h: &Matrix, g: &Vector, a_eq: &Matrix, b_eq: &Vector, a_in: &Matrix, b_in: &Vector) -> Result<QpSolution> {
    let n = g.len();
    check_dims(h, n, a_eq, b_eq, a_in, b_in)?;
    let q = a_in.nrows();

    let kept = independent_rows(a_eq);
    let a_k = a_eq.select_rows(&kept);
    let b_k = Vector::from_iterator(kept.len(), kept.iter().map(|&i| b_eq[i]));
    let p0 = min_norm_solution(&a_k, &b_k, n);
    let eq_res = if a_eq.nrows() > 0 { (a_eq * &p0 - b_eq).amax() } else { 0.0 };
    let eq_scale = 1.0 + b_eq.amax() + a_eq.amax() * p0.amax();
    if eq_res > 1e-8 * eq_scale {
        return Err(Error::QpInfeasible);
    }

    let viol = max_violation(a_in, b_in, &p0);
    let in_tol = 1e-10 * (1.0 + b_in.amax() + a_in.amax() * p0.amax());
    let start = if viol > in_tol {
        elastic_start(&a_k, a_in, b_in, &p0, viol, in_tol)?
    } else {
        p0
    };

    let core = ActiveSet {
        h,
        g,
        a_eq: &a_k,
        a_in,
        b_in,
        cap: 10 * (n + q),
    };
    let (p, lam_k, mu_w, working, iterations) = core.run(start, Vec::new())?;

    let mut lambda_eq = Vector::zeros(a_eq.nrows());
    for (j, &i) in kept.iter().enumerate() {
        lambda_eq[i] = lam_k[j];
    }
    let mut lambda_in = Vector::zeros(q);
    for (j, &i) in working.iter().enumerate() {
        lambda_in[i] = mu_w[j];
    }
    let mut active = working;
    active.sort_unstable();
    Ok(QpSolution {
        p,
        lambda_eq,
        lambda_in,
        active,
        iterations,
    })
}

fn check_dims(h: &Matrix, n: usize, a_eq: &Matrix, b_eq: &Vector, a_in: &Matrix, b_in: &Vector) -> Result<()> {
    let dim = |what, expected, got| {
        if expected == got {
            Ok(())
        } else {
            Err(Error::Dimension { what, expected, got })
        }
    };
    dim("QP Hessian rows", n, h.nrows())?;
    dim("QP Hessian columns", n, h.ncols())?;
    dim("QP equality columns", n, a_eq.ncols())?;
    dim("QP equality right-hand side", a_eq.nrows(), b_eq.len())?;
    dim("QP inequality columns", n, a_in.ncols())?;
    dim("QP inequality right-hand side", a_in.nrows(), b_in.len())
}

/// Indices of a maximal linearly independent subset of the rows of `a`
/// (modified Gram-Schmidt, greedy in row order).
fn independent_rows(a: &Matrix) -> Vec<usize> {
    let mut basis: Vec<Vector> = Vec::new();
    let mut kept = Vec::new();
    for i in 0..a.nrows() {
        let row: Vector = a.row(i).transpose();
        let norm = row.norm();
        if norm == 0.0 {
            continue;
        }
        let mut r = row;
        for b in &basis {
            r -= b * b.dot(&r);
        }
        let rn = r.norm();
        if rn > 1e-10 * norm {
            basis.push(r / rn);
            kept.push(i);
        }
    }
    kept
}

fn min_norm_solution(a: &Matrix, b: &Vector, n: usize) -> Vector {
    if a.nrows() == 0 {
        return Vector::zeros(n);
    }
    let aat = a * a.transpose();
    match aat.clone().cholesky() {
        Some(ch) => a.transpose() * ch.solve(b),
        None => {
            let svd = a.clone().svd(true, true);
            let eps = 1e-12 * svd.singular_values.max();
            svd.solve(b, eps).unwrap_or_else(|_| Vector::zeros(n))
        }
    }
}

fn max_violation(a: &Matrix, b: &Vector, p: &Vector) -> f64 {
    if a.nrows() == 0 {
        return 0.0;
    }
    (b - a * p).max().max(0.0)
}

/// Phase one: minimize `1/2 |p - p0|^2 + 1/2 t^2 + M t` subject to the
/// equalities, `A_in p + t >= b_in` and `t >= 0`, starting from the feasible
/// point `(p0, max violation)`. Steps stay in the null space of the equality
/// rows, so their right-hand side is not needed.
fn elastic_start(a_k: &Matrix, a_in: &Matrix, b_in: &Vector, p0: &Vector, viol: f64, tol: f64) -> Result<Vector> {
    let n = p0.len();
    let q = a_in.nrows();
    let h = Matrix::identity(n + 1, n + 1);
    let mut a_eq = Matrix::zeros(a_k.nrows(), n + 1);
    a_eq.view_mut((0, 0), (a_k.nrows(), n)).copy_from(a_k);
    let mut a_el = Matrix::zeros(q + 1, n + 1);
    a_el.view_mut((0, 0), (q, n)).copy_from(a_in);
    for i in 0..=q {
        a_el[(i, n)] = 1.0;
    }
    let mut b_el = Vector::zeros(q + 1);
    b_el.rows_mut(0, q).copy_from(b_in);

    // the penalty is exact once it exceeds the multipliers of the projection
    // problem; start moderate to keep the KKT solves well conditioned
    let mut big_m = 1e2 * (1.0 + p0.amax() + viol);
    for _ in 0..6 {
        let mut g = Vector::zeros(n + 1);
        g.rows_mut(0, n).copy_from(&(-p0));
        g[n] = big_m;
        let mut z0 = Vector::zeros(n + 1);
        z0.rows_mut(0, n).copy_from(p0);
        z0[n] = viol;
        let core = ActiveSet {
            h: &h,
            g: &g,
            a_eq: &a_eq,
            a_in: &a_el,
            b_in: &b_el,
            cap: 10 * (n + 1 + q + 1),
        };
        let (z, ..) = core.run(z0, Vec::new())?;
        let p = z.rows(0, n).into_owned();
        if z[n] <= tol && max_violation(a_in, b_in, &p) <= 1e3 * tol.max(f64::EPSILON) {
            return Ok(p);
        }
        big_m *= 1e2;
    }
    Err(Error::QpInfeasible)
}

struct ActiveSet<'a> {
    h: &'a Matrix,
    g: &'a Vector,
    a_eq: &'a Matrix,
    a_in: &'a Matrix,
    b_in: &'a Vector,
    cap: usize,
}

type CoreOutput = (Vector, Vector, Vector, Vec<usize>, usize);

impl ActiveSet<'_> {
    /// Primal active-set iteration from a feasible `p`. Returns the solution,
    /// equality multipliers, working-set multipliers, the working set and
    /// the iteration count.
    fn run(&self, mut p: Vector, mut working: Vec<usize>) -> Result<CoreOutput> {
        let n = p.len();
        let k = self.a_eq.nrows();
        let h_scale = self.h.amax().max(1.0);
        let mut iterations = 0;
        // the row dropped last cannot block the following step; rounding
        // in the KKT solve must not put it straight back
        let mut dropped: Option<usize> = None;
        // after an unblocked full step p minimizes over the working set
        let mut settled = false;
        loop {
            iterations += 1;
            if iterations > self.cap {
                return Err(Error::QpCycle(self.cap));
            }
            let grad = self.h * &p + self.g;
            let (s, lam) = self.eq_step(&grad, &working)?;
            let lam_eq = lam.rows(0, k).into_owned();
            let mu = lam.rows(k, working.len()).into_owned();

            // a full working set pins p; otherwise a step below the rounding
            // level of the KKT solve counts as zero
            let s_tol = 1e-11 * (1.0 + p.amax()) + 1e-13 * grad.amax() / h_scale;
            if settled || k + working.len() >= n || s.amax() <= s_tol {
                let mu_tol = 1e-10 * (1.0 + lam.amax());
                match mu.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)) {
                    Some((j, &m)) if m < -mu_tol => {
                        dropped = Some(working.remove(j));
                        settled = false;
                        continue;
                    }
                    _ => return Ok((p, lam_eq, mu, working, iterations)),
                }
            }

            let curv = s.dot(&(self.h * &s));
            if curv <= 1e-14 * h_scale * s.norm_squared() {
                return Err(Error::Singular(
                    "QP Hessian is not positive definite on the working-set null space; regularize the Hessian".into(),
                ));
            }

            let mut alpha = 1.0;
            let mut blocking = None;
            for i in 0..self.a_in.nrows() {
                if working.contains(&i) || dropped == Some(i) {
                    continue;
                }
                let row = self.a_in.row(i);
                let as_ = row.dot(&s.transpose());
                if as_ < -1e-14 * row.amax() * s.amax() {
                    let slack = row.dot(&p.transpose()) - self.b_in[i];
                    let ratio = (-slack / as_).max(0.0);
                    if ratio < alpha {
                        alpha = ratio;
                        blocking = Some(i);
                    }
                }
            }
            p += &s * alpha;
            dropped = None;
            match blocking {
                Some(i) => working.push(i),
                None => settled = true,
            }
        }
    }

    /// Solves the equality-constrained step for the current working set:
    /// `H s - A_W^T lambda = -grad`, `A_W s = 0`.
    fn eq_step(&self, grad: &Vector, working: &[usize]) -> Result<(Vector, Vector)> {
        let n = grad.len();
        let k = self.a_eq.nrows();
        let r = k + working.len();
        let mut kkt = Matrix::zeros(n + r, n + r);
        kkt.view_mut((0, 0), (n, n)).copy_from(self.h);
        for j in 0..r {
            let row = if j < k { self.a_eq.row(j) } else { self.a_in.row(working[j - k]) };
            for c in 0..n {
                kkt[(n + j, c)] = row[c];
                kkt[(c, n + j)] = row[c];
            }
        }
        let mut rhs = Vector::zeros(n + r);
        rhs.rows_mut(0, n).copy_from(&(-grad));
        let lu = FullPivLU::new(kkt);
        let diag = lu.u().diagonal().map(f64::abs);
        let (lo, hi) = (diag.min(), diag.max());
        if !(lo > 1e-13 * hi) {
            return Err(Error::Singular(
                "QP KKT matrix is singular; regularize the Hessian or check constraint independence".into(),
            ));
        }
        let sol = lu.solve(&rhs).ok_or_else(|| Error::Singular("QP KKT matrix is singular".into()))?;
        let s = sol.rows(0, n).into_owned();
        let lam = -sol.rows(n, r).into_owned();
        Ok((s, lam))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{dmatrix, dvector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn none(n: usize) -> (Matrix, Vector) {
        (Matrix::zeros(0, n), Vector::zeros(0))
    }

    #[test]
    fn unconstrained_newton_step() {
        let (a, b) = none(2);
        let s = qp_solve(&Matrix::identity(2, 2), &dvector![-1.0, 0.0], &a, &b, &a, &b).unwrap();
        assert_eq!(s.p, dvector![1.0, 0.0]);
        assert!(s.lambda_eq.is_empty() && s.lambda_in.is_empty());
    }

    #[test]
    fn equality_multiplier_sign() {
        let (a, b) = none(2);
        let s = qp_solve(&Matrix::identity(2, 2), &dvector![0.0, 0.0], &dmatrix![1.0, 1.0], &dvector![1.0], &a, &b).unwrap();
        assert!((s.p - dvector![0.5, 0.5]).amax() < 1e-14);
        assert!((s.lambda_eq[0] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn active_inequality_multiplier() {
        let (a, b) = none(2);
        let s = qp_solve(&Matrix::identity(2, 2), &dvector![-2.0, 0.0], &a, &b, &dmatrix![-1.0, 0.0], &dvector![0.0]).unwrap();
        assert!(s.p.amax() < 1e-14);
        assert!((s.lambda_in[0] - 2.0).abs() < 1e-14);
        assert_eq!(s.active, vec![0]);
    }

    #[test]
    fn infeasible_start_uses_elastic_phase() {
        // p >= 3 and p <= 5 with the unconstrained minimum at 0
        let (a, b) = none(1);
        let s = qp_solve(&dmatrix![1.0], &dvector![0.0], &a, &b, &dmatrix![1.0; -1.0], &dvector![3.0, -5.0]).unwrap();
        assert!((s.p[0] - 3.0).abs() < 1e-12);
        assert!((s.lambda_in[0] - 3.0).abs() < 1e-10);
    }

    #[test]
    fn inconsistent_constraints_are_infeasible() {
        let (a, b) = none(1);
        let r = qp_solve(&dmatrix![1.0], &dvector![0.0], &a, &b, &dmatrix![1.0; -1.0], &dvector![3.0, -1.0]);
        assert!(matches!(r, Err(Error::QpInfeasible)));
        let r = qp_solve(&dmatrix![1.0], &dvector![0.0], &dmatrix![1.0; 1.0], &dvector![1.0, 2.0], &a, &b);
        assert!(matches!(r, Err(Error::QpInfeasible)));
    }

    #[test]
    fn duplicate_equality_rows_dropped() {
        let (a, b) = none(2);
        let s = qp_solve(
            &Matrix::identity(2, 2),
            &dvector![0.0, 0.0],
            &dmatrix![1.0, 1.0; 2.0, 2.0],
            &dvector![1.0, 2.0],
            &a,
            &b,
        )
        .unwrap();
        assert!((s.p - dvector![0.5, 0.5]).amax() < 1e-14);
        assert_eq!(s.lambda_eq[1], 0.0);
    }

    #[test]
    fn indefinite_hessian_reports_singular() {
        let (a, b) = none(2);
        let r = qp_solve(&dmatrix![1.0, 0.0; 0.0, -1.0], &dvector![1.0, 1.0], &a, &b, &a, &b);
        assert!(matches!(r, Err(Error::Singular(_))));
    }

    fn objective(h: &Matrix, g: &Vector, p: &Vector) -> f64 {
        0.5 * p.dot(&(h * p)) + g.dot(p)
    }

    #[test]
    fn matches_grid_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for trial in 0..40 {
            let n = 1 + trial % 3;
            let m = Matrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
            let h = &m * m.transpose() + Matrix::identity(n, n) * 0.5;
            let g = Vector::from_fn(n, |_, _| rng.random_range(-3.0..3.0));
            // box |p - center| <= 1 plus a half-space keeping the center
            // feasible; the origin is often infeasible, exercising the
            // elastic phase
            let center = Vector::from_fn(n, |_, _| rng.random_range(-1.5..1.5));
            let mut a_in = Matrix::zeros(2 * n + 1, n);
            let mut b_in = Vector::zeros(2 * n + 1);
            for i in 0..n {
                a_in[(2 * i, i)] = 1.0;
                b_in[2 * i] = center[i] - 1.0;
                a_in[(2 * i + 1, i)] = -1.0;
                b_in[2 * i + 1] = -center[i] - 1.0;
            }
            let normal = Vector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
            a_in.row_mut(2 * n).copy_from(&normal.transpose());
            b_in[2 * n] = normal.dot(&center) - rng.random_range(0.0..0.5);
            let (ae, be) = none(n);
            let sol = qp_solve(&h, &g, &ae, &be, &a_in, &b_in).unwrap();
            let f_qp = objective(&h, &g, &sol.p);
            assert!((&b_in - &a_in * &sol.p).max() <= 1e-9);

            let steps = [0, 400, 80, 30][n];
            let mut best = f64::INFINITY;
            let mut idx = vec![0usize; n];
            loop {
                let p = Vector::from_fn(n, |i, _| center[i] - 1.0 + 2.0 * idx[i] as f64 / steps as f64);
                if (&b_in - &a_in * &p).max() <= 0.0 {
                    best = best.min(objective(&h, &g, &p));
                }
                let mut d = 0;
                while d < n {
                    idx[d] += 1;
                    if idx[d] <= steps {
                        break;
                    }
                    idx[d] = 0;
                    d += 1;
                }
                if d == n {
                    break;
                }
            }
            // the grid only contains feasible points, so it can never beat
            // the exact minimizer; its own error is bounded by the spacing
            let spacing = 2.0 / steps as f64;
            let lip = (h.norm() * (center.norm() + 3.0_f64.sqrt()) + g.norm()) * spacing * (n as f64).sqrt() * 2.0;
            assert!(f_qp <= best + 1e-9, "trial {trial}: qp {f_qp} grid {best}");
            assert!(best - f_qp <= lip, "trial {trial}: qp {f_qp} grid {best}");
        }
    }
}
