//! Compliance minimization of a clamped Euler-Bernoulli cantilever with a
//! tip load and a fixed material volume.

use nalgebra::linalg::Cholesky;

use crate::problem::ProblemSpec;
use crate::{Error, Matrix, Result, Vector};

pub const LENGTH: f64 = 1.0;
pub const BREADTH: f64 = 0.1;
pub const VOLUME: f64 = 0.01;
pub const MODULUS: f64 = 1.0;

/// Element stiffness of a Hermite cubic beam element per unit `EI`.
fn unit_element(le: f64) -> [[f64; 4]; 4] {
    let (l2, l3) = (le * le, le * le * le);
    let k = [
        [12.0, 6.0 * le, -12.0, 6.0 * le],
        [6.0 * le, 4.0 * l2, -6.0 * le, 2.0 * l2],
        [-12.0, -6.0 * le, 12.0, -6.0 * le],
        [6.0 * le, 2.0 * l2, -6.0 * le, 4.0 * l2],
    ];
    k.map(|row| row.map(|v| v / l3))
}

/// Free-DOF indices of element `e` (node 0 is clamped, so global DOF `d`
/// maps to `d - 2`).
fn element_dofs(e: usize) -> [Option<usize>; 4] {
    let g = [2 * e, 2 * e + 1, 2 * e + 2, 2 * e + 3];
    g.map(|d| d.checked_sub(2))
}

fn second_moment(h: f64) -> f64 {
    BREADTH * h.powi(3) / 12.0
}

/// Assembled stiffness on the `2n` free DOFs (deflection, rotation per
/// node after the root).
pub fn stiffness(h: &Vector) -> Matrix {
    let n = h.len();
    let ke = unit_element(LENGTH / n as f64);
    let mut k = Matrix::zeros(2 * n, 2 * n);
    for (e, &he) in h.iter().enumerate() {
        let ei = MODULUS * second_moment(he);
        let dofs = element_dofs(e);
        for a in 0..4 {
            for b in 0..4 {
                if let (Some(i), Some(j)) = (dofs[a], dofs[b]) {
                    k[(i, j)] += ei * ke[a][b];
                }
            }
        }
    }
    k
}

/// Tip load: -1 on the last deflection, 0 on the last rotation.
pub fn load(n: usize) -> Vector {
    let mut f = Vector::zeros(2 * n);
    f[2 * n - 2] = -1.0;
    f
}

/// Displacements `D` solving `K(h) D = F`, or `None` when `K` is not
/// positive definite. Rotations are scaled by the element length before
/// factoring and the solution gets one step of iterative refinement, which
/// keeps finite differences of the compliance clean.
pub fn displacements(h: &Vector) -> Option<Vector> {
    let n = h.len();
    let le = LENGTH / n as f64;
    let s = Vector::from_fn(2 * n, |i, _| if i % 2 == 0 { 1.0 } else { 1.0 / le });
    let k = stiffness(h);
    let ks = Matrix::from_fn(2 * n, 2 * n, |i, j| s[i] * k[(i, j)] * s[j]);
    let ch = Cholesky::new(ks.clone())?;
    let fs = load(n).component_mul(&s);
    let mut d = ch.solve(&fs);
    for _ in 0..2 {
        let r = residual(&ks, &d, &fs);
        d += ch.solve(&r);
    }
    Some(d.component_mul(&s))
}

/// `b - A x` with compensated (error-free) products and sums per row.
fn residual(a: &Matrix, x: &Vector, b: &Vector) -> Vector {
    Vector::from_fn(b.len(), |i, _| {
        let (mut sum, mut comp) = (b[i], 0.0);
        for j in 0..x.len() {
            let p = -a[(i, j)] * x[j];
            let p_err = (-a[(i, j)]).mul_add(x[j], -p);
            let t = sum + p;
            let bb = t - sum;
            comp += (sum - (t - bb)) + (p - bb) + p_err;
            sum = t;
        }
        sum + comp
    })
}

pub fn compliance(h: &Vector) -> f64 {
    match displacements(h) {
        Some(d) => load(h.len()).dot(&d),
        None => f64::NAN,
    }
}

/// `dC/dh_e = -D^T (dK/dh_e) D`.
pub fn compliance_gradient(h: &Vector) -> Vector {
    let n = h.len();
    let Some(d) = displacements(h) else {
        return Vector::from_element(n, f64::NAN);
    };
    let ke = unit_element(LENGTH / n as f64);
    Vector::from_fn(n, |e, _| {
        let dei = MODULUS * BREADTH * h[e] * h[e] / 4.0;
        let dofs = element_dofs(e);
        let mut s = 0.0;
        for a in 0..4 {
            for b in 0..4 {
                if let (Some(i), Some(j)) = (dofs[a], dofs[b]) {
                    s += d[i] * ke[a][b] * d[j];
                }
            }
        }
        -dei * s
    })
}

/// `n_el` thickness variables `h >= 0`, volume equality
/// `(b L / n) sum h = V0`, starting from the uniform beam `h = V0 / (b L)`.
/// Scaled by `10` on `h`, by the reciprocal uniform compliance on the
/// objective and `1 / V0` on the volume.
pub fn cantilever(n_el: usize) -> Result<ProblemSpec> {
    if n_el < 2 {
        return Err(Error::InvalidProblem(format!("cantilever needs n_el >= 2, got {n_el}")));
    }
    let h0 = Vector::from_element(n_el, VOLUME / (BREADTH * LENGTH));
    let c0 = compliance(&h0);
    let w = BREADTH * LENGTH / n_el as f64;
    ProblemSpec::builder("cantilever", h0)
        .variable_bounds(Vector::zeros(n_el), Vector::from_element(n_el, f64::INFINITY))
        .objective(compliance)
        .gradient(compliance_gradient)
        .constraints(move |h| Vector::from_element(1, w * h.sum()), Vector::from_element(1, VOLUME), Vector::from_element(1, VOLUME))
        .jacobian(move |h| Matrix::from_element(1, h.len(), w))
        .x_scaler(Vector::from_element(n_el, 10.0))
        .f_scaler(1.0 / c0)
        .c_scaler(Vector::from_element(1, 1.0 / VOLUME))
        .build()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_beam_matches_closed_form() {
        for n in [2, 5, 20] {
            let h = 0.1;
            let c = compliance(&Vector::from_element(n, h));
            let exact = LENGTH.powi(3) / (3.0 * MODULUS * second_moment(h));
            assert!(((c - exact) / exact).abs() < 1e-9, "n={n}: {c} vs {exact}");
        }
    }

    #[test]
    fn stiffness_is_spd_and_compliance_monotone() {
        let h = Vector::from_fn(8, |i, _| 0.05 + 0.01 * i as f64);
        let k = stiffness(&h);
        assert!((&k - k.transpose()).amax() == 0.0);
        assert!(Cholesky::new(k).is_some());
        let c = compliance(&h);
        let g = compliance_gradient(&h);
        for i in 0..8 {
            let mut hp = h.clone();
            hp[i] += 1e-3;
            assert!(compliance(&hp) < c);
            assert!(g[i] < 0.0);
        }
    }

    #[test]
    fn non_positive_thickness_gives_nan() {
        assert!(compliance(&Vector::zeros(3)).is_nan());
    }
}
