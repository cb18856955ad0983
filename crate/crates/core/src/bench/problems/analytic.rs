//! Closed-form unconstrained test functions and the small constrained
//! quadratic.

use nalgebra::{dmatrix, dvector};

use crate::problem::ProblemSpec;
use crate::{Error, Matrix, Result, Vector};

/// `x1^4 + x2^4` from (1, 1).
pub fn quartic() -> Result<ProblemSpec> {
    ProblemSpec::builder("quartic", dvector![1.0, 1.0])
        .objective(|x| x.iter().map(|v| v.powi(4)).sum())
        .gradient(|x| x.map(|v| 4.0 * v.powi(3)))
        .objective_hessian(|x| Matrix::from_diagonal(&x.map(|v| 12.0 * v * v)))
        .build()
}

/// One `100 (b - a^2)^2 + (1 - a)^2` term with its derivatives accumulated
/// into `g` and `h` at indices `(i, j)`.
fn rosen_term(x: &Vector, i: usize, j: usize, g: Option<&mut Vector>, h: Option<&mut Matrix>) -> f64 {
    let (a, b) = (x[i], x[j]);
    let r = b - a * a;
    if let Some(g) = g {
        g[i] += -400.0 * a * r - 2.0 * (1.0 - a);
        g[j] += 200.0 * r;
    }
    if let Some(h) = h {
        h[(i, i)] += 1200.0 * a * a - 400.0 * b + 2.0;
        h[(i, j)] += -400.0 * a;
        h[(j, i)] += -400.0 * a;
        h[(j, j)] += 200.0;
    }
    100.0 * r * r + (1.0 - a).powi(2)
}

fn rosen_family(name: &str, x0: Vector, pairs: Vec<(usize, usize)>) -> Result<ProblemSpec> {
    let (p1, p2, p3) = (pairs.clone(), pairs.clone(), pairs);
    ProblemSpec::builder(name, x0)
        .objective(move |x| p1.iter().map(|&(i, j)| rosen_term(x, i, j, None, None)).sum())
        .gradient(move |x| {
            let mut g = Vector::zeros(x.len());
            for &(i, j) in &p2 {
                rosen_term(x, i, j, Some(&mut g), None);
            }
            g
        })
        .objective_hessian(move |x| {
            let mut h = Matrix::zeros(x.len(), x.len());
            for &(i, j) in &p3 {
                rosen_term(x, i, j, None, Some(&mut h));
            }
            h
        })
        .build()
}

fn alternating_start(n: usize) -> Vector {
    Vector::from_fn(n, |i, _| if i % 2 == 0 { -1.2 } else { 1.0 })
}

/// `(1 - x1)^2 + 100 (x2 - x1^2)^2` from (-1.2, 1).
pub fn rosenbrock2() -> Result<ProblemSpec> {
    rosen_family("rosenbrock2", dvector![-1.2, 1.0], vec![(0, 1)])
}

/// Sum of `n/2` independent two-dimensional Rosenbrock functions on the
/// pairs `(x_{2i-1}, x_{2i})`.
pub fn rosen_uncoupled(n: usize) -> Result<ProblemSpec> {
    if n < 2 || n % 2 != 0 {
        return Err(Error::InvalidProblem(format!("rosen_uncoupled needs an even n >= 2, got {n}")));
    }
    let pairs = (0..n / 2).map(|k| (2 * k, 2 * k + 1)).collect();
    rosen_family("rosen_uncoupled", alternating_start(n), pairs)
}

/// `sum_{i<n} 100 (x_{i+1} - x_i^2)^2 + (1 - x_i)^2`.
pub fn rosen_coupled(n: usize) -> Result<ProblemSpec> {
    if n < 2 {
        return Err(Error::InvalidProblem(format!("rosen_coupled needs n >= 2, got {n}")));
    }
    let pairs = (0..n - 1).map(|i| (i, i + 1)).collect();
    rosen_family("rosen_coupled", alternating_start(n), pairs)
}

fn bean_value(x: &Vector) -> f64 {
    (1.0 - x[0]).powi(2) + (1.0 - x[1]).powi(2) + 0.5 * (2.0 * x[1] - x[0] * x[0]).powi(2)
}

/// `(1 - x1)^2 + (1 - x2)^2 + 1/2 (2 x2 - x1^2)^2` from (0, 0).
pub fn bean() -> Result<ProblemSpec> {
    ProblemSpec::builder("bean", dvector![0.0, 0.0])
        .objective(bean_value)
        .gradient(|x| {
            let t = 2.0 * x[1] - x[0] * x[0];
            dvector![-2.0 * (1.0 - x[0]) - 2.0 * x[0] * t, -2.0 * (1.0 - x[1]) + 2.0 * t]
        })
        .objective_hessian(|x| {
            let t = 2.0 * x[1] - x[0] * x[0];
            dmatrix![2.0 - 2.0 * t + 4.0 * x[0] * x[0], -4.0 * x[0]; -4.0 * x[0], 6.0]
        })
        .build()
}

/// The bean function with no derivative callbacks.
pub fn bean_fd() -> Result<ProblemSpec> {
    ProblemSpec::builder("bean_fd", dvector![0.0, 0.0]).objective(bean_value).build()
}

/// `min x1^2 + x2^2` subject to `x1 >= 0`, `x1 + x2 = 1`, `x1 - x2 >= 1`,
/// from (500, 5). The solution is (1, 0) with both constraints active.
pub fn quadratic_example() -> Result<ProblemSpec> {
    ProblemSpec::builder("quadratic_example", dvector![500.0, 5.0])
        .variable_bounds(dvector![0.0, f64::NEG_INFINITY], dvector![f64::INFINITY, f64::INFINITY])
        .objective(|x| x.norm_squared())
        .gradient(|x| 2.0 * x)
        .objective_hessian(|_| Matrix::identity(2, 2) * 2.0)
        .constraints(
            |x| dvector![x[0] + x[1], x[0] - x[1]],
            dvector![1.0, 1.0],
            dvector![1.0, f64::INFINITY],
        )
        .jacobian(|_| dmatrix![1.0, 1.0; 1.0, -1.0])
        .lagrangian_hessian(|_, _| Matrix::identity(2, 2) * 2.0)
        .build()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn value(spec: &ProblemSpec, x: &Vector) -> f64 {
        (spec.callbacks().objective.as_ref().unwrap())(x)
    }

    #[test]
    fn published_values() {
        let rc2 = rosen_coupled(2).unwrap();
        assert_eq!(value(&rc2, &dvector![1.0, 1.0]), 0.0);
        let rc8 = rosen_coupled(8).unwrap();
        let mut x = Vector::from_element(8, 1.0);
        x[0] = -1.0;
        assert_eq!(value(&rc8, &x), 4.0);
        let b = bean().unwrap();
        assert!((value(&b, &dvector![1.21314, 0.82414]) - 0.09194).abs() < 5e-6);
        let ru = rosen_uncoupled(4).unwrap();
        assert_eq!(value(&ru, &Vector::from_element(4, 1.0)), 0.0);
        assert_eq!(ru.x0(), &dvector![-1.2, 1.0, -1.2, 1.0]);
    }

    #[test]
    fn invalid_sizes() {
        assert!(rosen_uncoupled(3).is_err());
        assert!(rosen_uncoupled(0).is_err());
        assert!(rosen_coupled(1).is_err());
    }

    #[test]
    fn hessians_match_gradient_differences() {
        for spec in [quartic(), rosenbrock2(), bean(), rosen_coupled(5), rosen_uncoupled(4)] {
            let spec = spec.unwrap();
            let cb = spec.callbacks();
            let (g, h) = (cb.gradient.as_ref().unwrap(), cb.obj_hessian.as_ref().unwrap());
            let x = Vector::from_fn(spec.n(), |i, _| 0.3 + 0.17 * i as f64);
            let hx = h(&x);
            for j in 0..spec.n() {
                let mut xp = x.clone();
                xp[j] += 1e-6;
                let col = (g(&xp) - g(&x)) / 1e-6;
                for i in 0..spec.n() {
                    assert!((col[i] - hx[(i, j)]).abs() < 1e-3 * hx[(i, j)].abs().max(1.0));
                }
            }
        }
    }
}
