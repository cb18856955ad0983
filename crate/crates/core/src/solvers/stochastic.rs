//! Population and annealing heuristics driven by a seeded ChaCha RNG.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::common::{common_decls, require_unconstrained, Outcome};
use super::options::{OptionDecl, SolverOptions};
use crate::problem::{Bounds, ScaledView};
use crate::runtime::{OutputKind, OutputValue, OutputsDecl};
use crate::{Error, Result, Vector};

pub(crate) fn pso_outputs(n: usize) -> OutputsDecl {
    OutputsDecl::new()
        .with("itr", OutputKind::Int)
        .with("obj", OutputKind::Real)
        .with("opt", OutputKind::Real)
        .with("x", OutputKind::Vector(n))
}

pub(crate) fn sa_outputs(n: usize) -> OutputsDecl {
    OutputsDecl::new()
        .with("itr", OutputKind::Int)
        .with("obj", OutputKind::Real)
        .with("opt", OutputKind::Real)
        .with("temp", OutputKind::Real)
        .with("x", OutputKind::Vector(n))
}

fn box_decl() -> OptionDecl {
    OptionDecl::new(
        "sampling_box",
        0.0,
        "half-width around x0 replacing infinite variable bounds when sampling (0: require finite bounds)",
    )
    .non_negative()
}

pub(crate) fn pso_options() -> SolverOptions {
    let mut d = common_decls(500, false);
    d.extend([
        OptionDecl::new("n_particles", 20, "swarm size").positive(),
        OptionDecl::new("w", 0.7, "inertia weight").non_negative(),
        OptionDecl::new("c_p", 1.5, "cognitive coefficient").non_negative(),
        OptionDecl::new("c_g", 1.5, "social coefficient").non_negative(),
        box_decl(),
        OptionDecl::new("stall_iters", 50, "stop when the best value stalls this many iterations").positive(),
        OptionDecl::new("stall_tol", 1e-12, "improvement that counts as progress").non_negative(),
    ]);
    SolverOptions::new("pso", d)
}

pub(crate) fn sa_options() -> SolverOptions {
    let mut d = common_decls(5000, false);
    d.extend([
        OptionDecl::new("T0", 10.0, "initial temperature").positive(),
        OptionDecl::new("k_max", 5000, "cooling horizon of T_k = T0 (1 - k/k_max)").positive(),
        OptionDecl::new("step_scale", 0.1, "proposal step relative to the box width").positive(),
        box_decl(),
        OptionDecl::new("stall_iters", 1000, "stop when the best value stalls this many iterations").positive(),
        OptionDecl::new("stall_tol", 1e-12, "improvement that counts as progress").non_negative(),
    ]);
    SolverOptions::new("simulated_annealing", d)
}

/// Sampling box: the variable bounds, with each infinite side replaced by
/// `x0_i -/+ half_width` when `half_width > 0`.
fn sampling_box(bounds: &Bounds, x0: &Vector, half_width: f64, solver: &str) -> Result<(Vector, Vector)> {
    let finite = bounds.lower.iter().chain(bounds.upper.iter()).all(|v| v.is_finite());
    if !finite && half_width <= 0.0 {
        return Err(Error::Unsupported(format!(
            "{solver} needs finite variable bounds or a positive sampling_box option"
        )));
    }
    let lo = Vector::from_fn(x0.len(), |i, _| {
        let l = bounds.lower[i];
        if l.is_finite() { l } else { x0[i] - half_width }
    });
    let hi = Vector::from_fn(x0.len(), |i, _| {
        let u = bounds.upper[i];
        if u.is_finite() { u } else { x0[i] + half_width }
    });
    Ok((lo, hi))
}

/// Best-value history with a trailing improvement window.
struct Stall {
    history: Vec<f64>,
    window: usize,
}

impl Stall {
    fn push(&mut self, best: f64) {
        self.history.push(best);
    }

    /// Improvement of the best value over the last `window` iterations (over
    /// the whole history while it is shorter).
    fn improvement(&self) -> f64 {
        let k = self.history.len() - 1;
        self.history[k.saturating_sub(self.window)] - self.history[k]
    }

    fn stalled(&self, tol: f64) -> bool {
        self.history.len() > self.window && self.improvement() <= tol
    }
}

/// Particle state for the swarm update.
pub(crate) struct Swarm {
    pub x: Vec<Vector>,
    pub v: Vec<Vector>,
    pub p_best: Vec<Vector>,
    pub p_val: Vec<f64>,
    pub g_best: Vector,
    pub g_val: f64,
}

impl Swarm {
    /// `v <- w v + c_p r_p (p_best - x) + c_g r_g (g_best - x)`,
    /// `x <- clip(x + v)`, with `r_p, r_g ~ U[0, 1]` drawn per particle.
    pub(crate) fn step(&mut self, rng: &mut ChaCha8Rng, w: f64, c_p: f64, c_g: f64, bounds: &Bounds) {
        for i in 0..self.x.len() {
            let (r_p, r_g): (f64, f64) = (rng.random(), rng.random());
            let v = &self.v[i] * w
                + (&self.p_best[i] - &self.x[i]) * (c_p * r_p)
                + (&self.g_best - &self.x[i]) * (c_g * r_g);
            self.x[i] = bounds.clip(&(&self.x[i] + &v));
            self.v[i] = v;
        }
    }

    /// Updates personal and swarm bests from the values at the current
    /// positions. Ties keep the earlier point.
    pub(crate) fn absorb(&mut self, values: &[f64]) {
        for (i, &fi) in values.iter().enumerate() {
            if fi < self.p_val[i] {
                self.p_val[i] = fi;
                self.p_best[i] = self.x[i].clone();
            }
            if fi < self.g_val {
                self.g_val = fi;
                self.g_best = self.x[i].clone();
            }
        }
    }
}

fn uniform(rng: &mut ChaCha8Rng, lo: &Vector, hi: &Vector) -> Vector {
    Vector::from_fn(lo.len(), |i, _| lo[i] + (hi[i] - lo[i]) * rng.random::<f64>())
}

/// Particle swarm on the box; stops at `maxiter` or when the swarm best
/// improves by at most `stall_tol` over `stall_iters` iterations, which
/// counts as convergence. Optimality is that trailing improvement.
pub(crate) fn pso(view: &mut ScaledView<'_>, opts: &SolverOptions) -> Result<Outcome> {
    require_unconstrained(view, "pso")?;
    let bounds = view.var_bounds().clone();
    let x0 = view.x0().clone();
    let (lo, hi) = sampling_box(&bounds, &x0, opts.real("sampling_box"), "pso")?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.int("seed") as u64);
    let np = opts.count("n_particles");
    let (w, c_p, c_g) = (opts.real("w"), opts.real("c_p"), opts.real("c_g"));
    let width = &hi - &lo;

    let mut x = Vec::with_capacity(np);
    let mut v = Vec::with_capacity(np);
    for _ in 0..np {
        x.push(bounds.clip(&uniform(&mut rng, &lo, &hi)));
        v.push(uniform(&mut rng, &(-&width), &width));
    }
    let mut values = Vec::with_capacity(np);
    for xi in &x {
        values.push(view.objective(xi)?);
    }
    let mut swarm = Swarm {
        p_best: x.clone(),
        p_val: vec![f64::INFINITY; np],
        g_best: x[0].clone(),
        g_val: f64::INFINITY,
        x,
        v,
    };
    swarm.absorb(&values);

    let mut stall = Stall {
        history: Vec::new(),
        window: opts.count("stall_iters"),
    };
    let stall_tol = opts.real("stall_tol");
    let maxiter = opts.count("maxiter");
    let mut itr = 0;
    loop {
        stall.push(swarm.g_val);
        let opt = stall.improvement();
        view.update_outputs(&[
            ("itr", OutputValue::from(itr)),
            ("obj", swarm.g_val.into()),
            ("opt", opt.into()),
            ("x", (&swarm.g_best).into()),
        ])?;
        let stalled = stall.stalled(stall_tol);
        if stalled || itr >= maxiter {
            return Ok(Outcome {
                x: swarm.g_best,
                f: swarm.g_val,
                optimality: opt,
                feasibility: 0.0,
                niter: itr,
                converged: stalled,
                message: if stalled {
                    format!("swarm best stalled for {} iterations", stall.window)
                } else {
                    "iteration limit reached".into()
                },
                multipliers: None,
            });
        }
        itr += 1;
        swarm.step(&mut rng, w, c_p, c_g, &bounds);
        for (i, xi) in swarm.x.iter().enumerate() {
            values[i] = view.objective(xi)?;
        }
        swarm.absorb(&values);
    }
}

/// Metropolis acceptance probability `exp(-(f_new - f) / T)`, 1 for
/// non-increasing moves.
pub fn acceptance_probability(f_new: f64, f: f64, temperature: f64) -> f64 {
    if f_new <= f {
        1.0
    } else {
        (-(f_new - f) / temperature).exp()
    }
}

/// `T_k = T0 (1 - k / k_max)`, floored at 1e-12.
pub fn temperature(t0: f64, k: usize, k_max: usize) -> f64 {
    (t0 * (1.0 - k as f64 / k_max as f64)).max(1e-12)
}

/// Simulated annealing with uniform box-scaled proposals and linear
/// cooling; returns the best point ever visited.
pub(crate) fn simulated_annealing(view: &mut ScaledView<'_>, opts: &SolverOptions) -> Result<Outcome> {
    require_unconstrained(view, "simulated_annealing")?;
    let bounds = view.var_bounds().clone();
    let x0 = view.x0().clone();
    let (lo, hi) = sampling_box(&bounds, &x0, opts.real("sampling_box"), "simulated_annealing")?;
    let step = (&hi - &lo) * opts.real("step_scale");
    let mut rng = ChaCha8Rng::seed_from_u64(opts.int("seed") as u64);
    let (t0, k_max) = (opts.real("T0"), opts.count("k_max"));
    let maxiter = opts.count("maxiter");
    let stall_tol = opts.real("stall_tol");

    let mut x = bounds.clip(&x0);
    let mut f = view.objective(&x)?;
    let (mut best_x, mut best_f) = (x.clone(), f);
    let mut stall = Stall {
        history: Vec::new(),
        window: opts.count("stall_iters"),
    };
    let mut accepted = 0;
    let mut k = 0;
    loop {
        let t = temperature(t0, k, k_max);
        stall.push(best_f);
        let opt = stall.improvement();
        view.update_outputs(&[
            ("itr", OutputValue::from(k)),
            ("obj", best_f.into()),
            ("opt", opt.into()),
            ("temp", t.into()),
            ("x", (&best_x).into()),
        ])?;
        let stalled = stall.stalled(stall_tol);
        if stalled || k >= maxiter || k >= k_max {
            let converged = stalled || opt <= opts.real("opt_tol");
            let message = if stalled {
                format!("best value stalled for {} iterations", stall.window)
            } else {
                format!("cooling schedule finished ({accepted} moves accepted)")
            };
            return Ok(Outcome {
                x: best_x,
                f: best_f,
                optimality: opt,
                feasibility: 0.0,
                niter: k,
                converged,
                message,
                multipliers: None,
            });
        }
        k += 1;
        let u = Vector::from_fn(x.len(), |i, _| step[i] * rng.random_range(-1.0..=1.0));
        let x_new = bounds.clip(&(&x + u));
        let f_new = view.objective(&x_new)?;
        let t = temperature(t0, k, k_max);
        let draw: f64 = rng.random();
        if draw < acceptance_probability(f_new, f, t) {
            x = x_new;
            f = f_new;
            accepted += 1;
            if f < best_f {
                best_f = f;
                best_x = x.clone();
            }
        }
    }
}
