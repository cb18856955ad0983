//! Planar landing of a rigid spacecraft by direct transcription with
//! forward-Euler defects.

use std::f64::consts::FRAC_PI_2;

use crate::problem::ProblemSpec;
use crate::{Error, Matrix, Result, Vector};

pub const MASS: f64 = 1e5;
pub const LENGTH: f64 = 50.0;
pub const GRAVITY: f64 = 9.807;
pub const INERTIA: f64 = MASS * LENGTH * LENGTH / 12.0;
pub const T_MAX: f64 = 2.21e6;
pub const HORIZON: f64 = 16.0;
pub const BETA_MAX: f64 = 20.0 * std::f64::consts::PI / 180.0;
/// `(x, xdot, y, ydot, theta, thetadot)` at the first node.
pub const X_START: [f64; 6] = [0.0, 0.0, 1000.0, -80.0, FRAC_PI_2, 0.0];
pub const X_FINAL: [f64; 6] = [0.0; 6];

/// Objective weights on `sum T^2`, `sum beta^2` and `sum thetadot^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Weights {
    pub thrust: f64,
    pub gimbal: f64,
    pub spin: f64,
}

impl Default for Weights {
    fn default() -> Self {
        Self {
            thrust: 1.0,
            gimbal: 1.0,
            spin: 1.0,
        }
    }
}

/// State derivative for state `s` and controls `(T, beta)`.
pub fn dynamics(s: &[f64], t: f64, beta: f64) -> [f64; 6] {
    let a = beta + s[4];
    [
        s[1],
        -t / MASS * a.sin(),
        s[3],
        t / MASS * a.cos() - GRAVITY,
        s[5],
        -t * LENGTH / (2.0 * INERTIA) * beta.sin(),
    ]
}

/// Partial derivatives of [`dynamics`]: `(d f / d s, d f / d (T, beta))`.
fn dynamics_jacobian(s: &[f64], t: f64, beta: f64) -> ([[f64; 6]; 6], [[f64; 2]; 6]) {
    let a = beta + s[4];
    let (sa, ca) = a.sin_cos();
    let mut ds = [[0.0; 6]; 6];
    ds[0][1] = 1.0;
    ds[1][4] = -t / MASS * ca;
    ds[2][3] = 1.0;
    ds[3][4] = -t / MASS * sa;
    ds[4][5] = 1.0;
    let k = LENGTH / (2.0 * INERTIA);
    let du = [
        [0.0, 0.0],
        [-sa / MASS, -t / MASS * ca],
        [0.0, 0.0],
        [ca / MASS, -t / MASS * sa],
        [0.0, 0.0],
        [-k * beta.sin(), -t * k * beta.cos()],
    ];
    (ds, du)
}

/// Variable layout: `X` (`n_t x 6`, row-major) followed by `U`
/// (`n_t x 2`, row-major).
#[derive(Debug, Clone, Copy)]
pub struct Layout {
    pub n_t: usize,
}

impl Layout {
    pub fn n(&self) -> usize {
        8 * self.n_t
    }

    pub fn m(&self) -> usize {
        6 * (self.n_t + 1)
    }

    pub fn state(&self, i: usize, k: usize) -> usize {
        6 * i + k
    }

    pub fn control(&self, i: usize, k: usize) -> usize {
        6 * self.n_t + 2 * i + k
    }

    pub fn dt(&self) -> f64 {
        HORIZON / self.n_t as f64
    }
}

/// `[X_1 - x0; X_nt - xf; X_{i+1} - X_i - f(X_i, U_i) dt]`.
pub fn constraints(lay: Layout, z: &Vector) -> Vector {
    let (nt, dt) = (lay.n_t, lay.dt());
    let mut c = Vector::zeros(lay.m());
    for k in 0..6 {
        c[k] = z[lay.state(0, k)] - X_START[k];
        c[6 + k] = z[lay.state(nt - 1, k)] - X_FINAL[k];
    }
    for i in 0..nt - 1 {
        let s = &z.as_slice()[6 * i..6 * i + 6];
        let f = dynamics(s, z[lay.control(i, 0)], z[lay.control(i, 1)]);
        for k in 0..6 {
            c[12 + 6 * i + k] = z[lay.state(i + 1, k)] - s[k] - f[k] * dt;
        }
    }
    c
}

pub fn constraint_jacobian(lay: Layout, z: &Vector) -> Matrix {
    let (nt, dt) = (lay.n_t, lay.dt());
    let mut j = Matrix::zeros(lay.m(), lay.n());
    for k in 0..6 {
        j[(k, lay.state(0, k))] = 1.0;
        j[(6 + k, lay.state(nt - 1, k))] = 1.0;
    }
    for i in 0..nt - 1 {
        let s = &z.as_slice()[6 * i..6 * i + 6];
        let (ds, du) = dynamics_jacobian(s, z[lay.control(i, 0)], z[lay.control(i, 1)]);
        for k in 0..6 {
            let row = 12 + 6 * i + k;
            j[(row, lay.state(i + 1, k))] = 1.0;
            for q in 0..6 {
                j[(row, lay.state(i, q))] -= ds[k][q] * dt;
            }
            j[(row, lay.state(i, k))] -= 1.0;
            for q in 0..2 {
                j[(row, lay.control(i, q))] = -du[k][q] * dt;
            }
        }
    }
    j
}

/// Initial guess: states interpolated linearly from `x0` to `xf`, hover
/// thrust `m g` and zero gimbal.
pub fn initial_guess(lay: Layout) -> Vector {
    let nt = lay.n_t;
    let mut z = Vector::zeros(lay.n());
    for i in 0..nt {
        let s = i as f64 / (nt - 1) as f64;
        for k in 0..6 {
            z[lay.state(i, k)] = X_START[k] + s * (X_FINAL[k] - X_START[k]);
        }
        z[lay.control(i, 0)] = MASS * GRAVITY;
    }
    z
}

pub fn spacecraft(n_t: usize) -> Result<ProblemSpec> {
    spacecraft_weighted(n_t, Weights::default())
}

/// The landing problem with explicit objective weights. Variables are
/// scaled so positions, velocities, angles and controls are of order one.
pub fn spacecraft_weighted(n_t: usize, w: Weights) -> Result<ProblemSpec> {
    if n_t < 3 {
        return Err(Error::InvalidProblem(format!("spacecraft needs n_t >= 3, got {n_t}")));
    }
    let lay = Layout { n_t };
    let n = lay.n();
    let mut lower = Vector::from_element(n, f64::NEG_INFINITY);
    let mut upper = Vector::from_element(n, f64::INFINITY);
    let mut xs = Vector::zeros(n);
    let state_scale = [1e-2, 1e-1, 1e-3, 1e-1, 1.0, 1.0];
    for i in 0..n_t {
        for k in 0..6 {
            xs[lay.state(i, k)] = state_scale[k];
        }
        lower[lay.control(i, 0)] = 0.4 * T_MAX;
        upper[lay.control(i, 0)] = T_MAX;
        lower[lay.control(i, 1)] = -BETA_MAX;
        upper[lay.control(i, 1)] = BETA_MAX;
        xs[lay.control(i, 0)] = 1.0 / T_MAX;
        xs[lay.control(i, 1)] = 1.0;
    }
    let mut cs = Vector::zeros(lay.m());
    for (r, v) in cs.iter_mut().enumerate() {
        *v = state_scale[r % 6];
    }
    let objective = move |z: &Vector| {
        (0..n_t)
            .map(|i| {
                w.thrust * z[lay.control(i, 0)].powi(2)
                    + w.gimbal * z[lay.control(i, 1)].powi(2)
                    + w.spin * z[lay.state(i, 5)].powi(2)
            })
            .sum()
    };
    let gradient = move |z: &Vector| {
        let mut g = Vector::zeros(z.len());
        for i in 0..n_t {
            g[lay.control(i, 0)] = 2.0 * w.thrust * z[lay.control(i, 0)];
            g[lay.control(i, 1)] = 2.0 * w.gimbal * z[lay.control(i, 1)];
            g[lay.state(i, 5)] = 2.0 * w.spin * z[lay.state(i, 5)];
        }
        g
    };
    let zero = Vector::zeros(lay.m());
    ProblemSpec::builder("spacecraft", initial_guess(lay))
        .variable_bounds(lower, upper)
        .objective(objective)
        .gradient(gradient)
        .constraints(move |z| constraints(lay, z), zero.clone(), zero)
        .jacobian(move |z| constraint_jacobian(lay, z))
        .x_scaler(xs)
        .f_scaler(1.0 / (n_t as f64 * T_MAX * T_MAX))
        .c_scaler(cs)
        .build()
}
