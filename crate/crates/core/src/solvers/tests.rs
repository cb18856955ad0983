use nalgebra::{dmatrix, dvector, DMatrix};
use proptest::prelude::*;

use super::*;
use super::options::OptionValue;
use crate::problem::ProblemSpec;
use crate::Vector;

fn sphere_half(x0: Vector) -> ProblemSpec {
    ProblemSpec::builder("sphere", x0)
        .objective(|x| 0.5 * x.norm_squared())
        .gradient(|x| x.clone())
        .objective_hessian(|x| DMatrix::identity(x.len(), x.len()))
        .build()
        .unwrap()
}

fn quartic() -> ProblemSpec {
    ProblemSpec::builder("quartic", dvector![1.0, 1.0])
        .objective(|x| x.iter().map(|v| v.powi(4)).sum())
        .gradient(|x| x.map(|v| 4.0 * v.powi(3)))
        .objective_hessian(|x| DMatrix::from_diagonal(&x.map(|v| 12.0 * v * v)))
        .build()
        .unwrap()
}

fn rosenbrock() -> ProblemSpec {
    ProblemSpec::builder("rosenbrock", dvector![-1.2, 1.0])
        .objective(|x| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2))
        .gradient(|x| {
            dvector![
                -2.0 * (1.0 - x[0]) - 400.0 * x[0] * (x[1] - x[0] * x[0]),
                200.0 * (x[1] - x[0] * x[0])
            ]
        })
        .build()
        .unwrap()
}

fn bean() -> ProblemSpec {
    ProblemSpec::builder("bean", dvector![0.0, 0.0])
        .objective(|x| (1.0 - x[0]).powi(2) + (1.0 - x[1]).powi(2) + 0.5 * (2.0 * x[1] - x[0] * x[0]).powi(2))
        .gradient(|x| {
            let t = 2.0 * x[1] - x[0] * x[0];
            dvector![-2.0 * (1.0 - x[0]) - 2.0 * x[0] * t, -2.0 * (1.0 - x[1]) + 2.0 * t]
        })
        .build()
        .unwrap()
}

/// `min x1^2 + x2^2` with `x1 >= 0`, `x1 + x2 = 1`, `x1 - x2 >= 1`.
fn constrained_quadratic() -> ProblemSpec {
    ProblemSpec::builder("quadratic", dvector![500.0, 5.0])
        .variable_bounds(dvector![0.0, f64::NEG_INFINITY], dvector![f64::INFINITY, f64::INFINITY])
        .objective(|x| x.norm_squared())
        .gradient(|x| 2.0 * x)
        .constraints(
            |x| dvector![x[0] + x[1], x[0] - x[1]],
            dvector![1.0, 1.0],
            dvector![1.0, f64::INFINITY],
        )
        .jacobian(|_| dmatrix![1.0, 1.0; 1.0, -1.0])
        .build()
        .unwrap()
}

/// `min 1/2 |x|^2` s.t. `x1 + x2 = 1`.
fn half_sphere_on_line() -> ProblemSpec {
    ProblemSpec::builder("line", dvector![0.0, 0.0])
        .objective(|x| 0.5 * x.norm_squared())
        .gradient(|x| x.clone())
        .constraints(|x| dvector![x[0] + x[1]], dvector![1.0], dvector![1.0])
        .jacobian(|_| dmatrix![1.0, 1.0])
        .lagrangian_hessian(|_, _| DMatrix::identity(2, 2))
        .build()
        .unwrap()
}

fn run(kind: SolverKind, spec: &ProblemSpec, set: &[(&str, OptionValue)]) -> SolverReport {
    let mut opts = kind.default_options();
    for (k, v) in set {
        opts.set(k, v.clone()).unwrap();
    }
    let mut view = ScaledView::new(spec);
    let r = solve(kind, &mut view, &opts).unwrap();
    assert_eq!(r.counters, view.counters());
    r
}

fn recorded(kind: SolverKind, spec: &ProblemSpec, set: &[(&str, OptionValue)]) -> (SolverReport, Vec<Vec<f64>>) {
    let mut opts = kind.default_options();
    for (k, v) in set {
        opts.set(k, v.clone()).unwrap();
    }
    let mut view = ScaledView::new(spec);
    view.enable_recording();
    let r = solve(kind, &mut view, &opts).unwrap();
    let rec = view.take_record().unwrap();
    let xs = rec
        .iterations()
        .map(|it| it.get("x").unwrap().as_slice().unwrap().to_vec())
        .collect();
    (r, xs)
}

#[test]
fn names_round_trip() {
    for k in SolverKind::ALL {
        assert_eq!(k.name().parse::<SolverKind>().unwrap(), k);
        assert_eq!(k.default_options().solver(), k.name());
    }
    assert!("bogus".parse::<SolverKind>().is_err());
}

#[test]
fn mismatched_options_are_rejected() {
    let spec = sphere_half(dvector![1.0]);
    let mut view = ScaledView::new(&spec);
    let opts = SolverKind::Newton.default_options();
    assert!(solve(SolverKind::QuasiNewton, &mut view, &opts).is_err());
}

#[test]
fn unconstrained_solvers_reject_constraints() {
    let spec = constrained_quadratic();
    let mut view = ScaledView::new(&spec);
    let opts = SolverKind::SteepestDescent.default_options();
    assert!(matches!(
        solve(SolverKind::SteepestDescent, &mut view, &opts),
        Err(Error::Unsupported(_))
    ));
}

#[test]
fn steepest_descent_unit_step_on_sphere() {
    let r = run(
        SolverKind::SteepestDescent,
        &sphere_half(dvector![3.0, 4.0]),
        &[("use_line_search", false.into())],
    );
    assert_eq!(r.niter, 1);
    assert!(r.converged);
    assert_eq!(r.x_star, dvector![0.0, 0.0]);
}

#[test]
fn steepest_descent_stalls_on_quartic() {
    let r = run(SolverKind::SteepestDescent, &quartic(), &[]);
    assert_eq!(r.niter, 500);
    assert!(!r.converged);
    assert!(r.optimality > 1e-5, "optimality {}", r.optimality);
}

#[test]
fn stationary_start_returns_immediately() {
    for kind in [SolverKind::SteepestDescent, SolverKind::Newton, SolverKind::QuasiNewton] {
        let r = run(kind, &sphere_half(dvector![0.0, 0.0]), &[]);
        assert_eq!(r.niter, 0);
        assert!(r.converged);
    }
}

#[test]
fn newton_on_quartic_contracts_by_two_thirds() {
    for ls in [false, true] {
        let (r, xs) = recorded(SolverKind::Newton, &quartic(), &[("use_line_search", ls.into())]);
        assert_eq!(r.niter, 13);
        assert!(r.converged);
        for w in xs.windows(2) {
            for i in 0..2 {
                assert!((w[1][i] - 2.0 / 3.0 * w[0][i]).abs() <= 1e-15 * w[0][i].abs());
            }
        }
    }
}

#[test]
fn newton_is_exact_on_spd_quadratic() {
    let a = dmatrix![4.0, 1.0, 0.0; 1.0, 3.0, 0.5; 0.0, 0.5, 2.0];
    let b = dvector![1.0, -2.0, 0.5];
    let (a1, a2, b1) = (a.clone(), a.clone(), b.clone());
    let spec = ProblemSpec::builder("spd", dvector![7.0, -3.0, 2.0])
        .objective(move |x| 0.5 * x.dot(&(&a1 * x)) - b1.dot(x))
        .gradient(move |x| &a2 * x - &b)
        .objective_hessian(move |_| a.clone())
        .build()
        .unwrap();
    let r = run(SolverKind::Newton, &spec, &[]);
    assert_eq!(r.niter, 1);
    assert!(r.converged);
}

#[test]
fn quasi_newton_first_step_is_exact_on_sphere() {
    let (r, xs) = recorded(SolverKind::QuasiNewton, &sphere_half(dvector![1.0, 1.0]), &[]);
    assert!(r.niter <= 2);
    assert!(r.converged);
    // first direction is -g = -x, and the unit step is accepted
    assert_eq!(xs[1], vec![0.0, 0.0]);
}

#[test]
fn quasi_newton_solves_rosenbrock() {
    let r = run(SolverKind::QuasiNewton, &rosenbrock(), &[]);
    assert!(r.converged, "{}", r.message);
    assert!(r.niter <= 100, "niter {}", r.niter);
    assert!((&r.x_star - dvector![1.0, 1.0]).amax() < 1e-4);
}

#[test]
fn quasi_newton_variants_solve_bean() {
    for variant in ["bfgs", "sr1", "dfp", "broyden"] {
        let r = run(SolverKind::QuasiNewton, &bean(), &[("variant", variant.into())]);
        assert!(r.converged, "{variant}: {}", r.message);
        assert!((r.f_star - 0.09194).abs() < 1e-4, "{variant}: f* {}", r.f_star);
        // published location, and the minimizer to more digits
        assert!((&r.x_star - dvector![1.21314, 0.82414]).amax() < 1e-3, "{variant}: {:?}", r.x_star);
        assert!((&r.x_star - dvector![1.2134117, 0.8241226]).amax() < 1e-5, "{variant}: {:?}", r.x_star);
    }
}

#[test]
fn newton_lagrange_one_step_on_line() {
    let r = run(SolverKind::NewtonLagrange, &half_sphere_on_line(), &[]);
    assert_eq!(r.niter, 1);
    assert!(r.converged);
    assert!((&r.x_star - dvector![0.5, 0.5]).amax() < 1e-14);
    assert!((r.multipliers.unwrap()[0] - 0.5).abs() < 1e-14);
}

#[test]
fn newton_lagrange_on_equality_part_of_quadratic() {
    let spec = ProblemSpec::builder("quadratic_eq", dvector![500.0, 5.0])
        .objective(|x| x.norm_squared())
        .gradient(|x| 2.0 * x)
        .constraints(|x| dvector![x[0] + x[1]], dvector![1.0], dvector![1.0])
        .jacobian(|_| dmatrix![1.0, 1.0])
        .build()
        .unwrap();
    for ls in [false, true] {
        let r = run(SolverKind::NewtonLagrange, &spec, &[("use_line_search", ls.into())]);
        assert!(r.converged);
        assert!((&r.x_star - dvector![0.5, 0.5]).amax() < 1e-6);
    }
}

#[test]
fn newton_lagrange_feasible_stationary_start() {
    let spec = ProblemSpec::builder("origin", dvector![0.0, 0.0])
        .objective(|x| 0.5 * x.norm_squared())
        .gradient(|x| x.clone())
        .constraints(|x| dvector![x[0] - x[1]], dvector![0.0], dvector![0.0])
        .jacobian(|_| dmatrix![1.0, -1.0])
        .build()
        .unwrap();
    let r = run(SolverKind::NewtonLagrange, &spec, &[]);
    assert_eq!(r.niter, 0);
    assert!(r.converged);
}

#[test]
fn newton_lagrange_rejects_inequalities() {
    let spec = constrained_quadratic();
    let mut view = ScaledView::new(&spec);
    let opts = SolverKind::NewtonLagrange.default_options();
    assert!(solve(SolverKind::NewtonLagrange, &mut view, &opts).is_err());
}

#[test]
fn quadratic_penalty_sequence() {
    let spec = ProblemSpec::builder("x2_eq", dvector![0.0])
        .objective(|x| x[0] * x[0])
        .gradient(|x| dvector![2.0 * x[0]])
        .constraints(|x| dvector![x[0]], dvector![1.0], dvector![1.0])
        .jacobian(|_| dmatrix![1.0])
        .build()
        .unwrap();
    let (r, xs) = recorded(SolverKind::QuadraticPenalty, &spec, &[]);
    assert!(r.converged, "{}", r.message);
    for (k, rho) in [1.0, 10.0, 100.0].into_iter().enumerate() {
        let expected = rho / (2.0 + rho);
        assert!((xs[k][0] - expected).abs() < 1e-3, "rho {rho}: {}", xs[k][0]);
    }
    assert!((r.x_star[0] - 1.0).abs() < 1e-5);
}

#[test]
fn quadratic_penalty_without_constraints_is_one_subproblem() {
    let r = run(SolverKind::QuadraticPenalty, &rosenbrock(), &[("sub_tol0", 1e-6.into())]);
    assert!(r.converged);
    assert_eq!(r.niter, 1);
    assert_eq!(r.counters.n_con, 0);
}

#[test]
fn quadratic_penalty_on_constrained_quadratic() {
    let r = run(SolverKind::QuadraticPenalty, &constrained_quadratic(), &[]);
    assert!(r.converged, "{}", r.message);
    assert!((&r.x_star - dvector![1.0, 0.0]).amax() < 1e-3);
    assert!((r.f_star - 1.0).abs() < 1e-3);
}

#[test]
fn exact_penalty_kink() {
    let spec = ProblemSpec::builder("x2_ge", dvector![3.0])
        .objective(|x| x[0] * x[0])
        .constraints(|x| dvector![x[0]], dvector![1.0], dvector![f64::INFINITY])
        .build()
        .unwrap();
    let r = run(SolverKind::ExactPenalty, &spec, &[]);
    assert!((r.x_star[0] - 1.0).abs() < 1e-4, "x* {}", r.x_star[0]);
    assert_eq!(r.counters.n_grad, 0);
}

#[test]
fn exact_penalty_rho_zero_is_unconstrained() {
    let spec = ProblemSpec::builder("x2_ge", dvector![3.0])
        .objective(|x| (x[0] + 2.0).powi(2))
        .constraints(|x| dvector![x[0]], dvector![1.0], dvector![f64::INFINITY])
        .build()
        .unwrap();
    let r = run(SolverKind::ExactPenalty, &spec, &[("rho", 0.0.into())]);
    assert!((r.x_star[0] + 2.0).abs() < 1e-3);
    assert!(!r.converged, "infeasible result must not count as converged");
}

#[test]
fn exact_penalty_on_constrained_quadratic() {
    for penalty in ["l1", "linf"] {
        let r = run(SolverKind::ExactPenalty, &constrained_quadratic(), &[("penalty", penalty.into())]);
        assert!((&r.x_star - dvector![1.0, 0.0]).amax() < 1e-2, "{penalty}: {:?}", r.x_star);
    }
}

/// Independent KKT check from the callbacks: stationarity,
/// complementarity and multiplier signs.
fn kkt_residual(spec: &ProblemSpec, x: &Vector, lam: &Vector) -> (f64, f64, f64) {
    let cb = spec.callbacks();
    let g = (cb.gradient.as_ref().unwrap())(x);
    let c = (cb.constraints.as_ref().unwrap())(x);
    let j = (cb.jacobian.as_ref().unwrap())(x);
    let mut r = g - j.transpose() * lam;
    let vb = spec.var_bounds();
    // bound multipliers recovered from the residual on active bounds
    for i in 0..x.len() {
        if (x[i] - vb.lower[i]).abs() < 1e-8 && r[i] > 0.0 {
            r[i] = 0.0;
        }
    }
    let cbnd = spec.con_bounds();
    let mut comp: f64 = 0.0;
    let mut sign: f64 = 0.0;
    for k in 0..c.len() {
        if cbnd.is_equality(k) {
            continue;
        }
        comp = comp.max((lam[k] * (c[k] - cbnd.lower[k])).abs());
        sign = sign.max(-lam[k]);
    }
    (r.amax(), comp, sign)
}

#[test]
fn sqp_on_constrained_quadratic() {
    let spec = constrained_quadratic();
    let r = run(SolverKind::Sqp, &spec, &[]);
    assert!(r.converged, "{}", r.message);
    assert!((&r.x_star - dvector![1.0, 0.0]).amax() < 1e-6);
    assert!((r.f_star - 1.0).abs() < 1e-6);
    let lam = r.multipliers.clone().unwrap();
    // both constraints active with positive multipliers
    assert!(lam[0] > 0.1 && lam[1] > 0.1, "{lam:?}");
    let (stat, comp, sign) = kkt_residual(&spec, &r.x_star, &lam);
    assert!(stat <= 1e-5 && comp <= 1e-5 && sign <= 1e-6, "{stat} {comp} {sign}");
}

#[test]
fn sqp_exact_on_qp() {
    let r = run(SolverKind::Sqp, &half_sphere_on_line(), &[]);
    assert!(r.converged);
    assert!(r.niter <= 2);
    assert!((&r.x_star - dvector![0.5, 0.5]).amax() < 1e-10);
}

#[test]
fn sqp_unconstrained_behaves_like_quasi_newton() {
    let r = run(SolverKind::Sqp, &rosenbrock(), &[]);
    assert!(r.converged, "{}", r.message);
    assert!((&r.x_star - dvector![1.0, 1.0]).amax() < 1e-4);
    assert!(r.multipliers.is_none());
}

#[test]
fn sqp_restoration_recovers_feasibility() {
    // x = 0 and x + x^2 = 0 linearize to inconsistent rows at every x != 0
    let spec = ProblemSpec::builder("pair", dvector![1.0])
        .objective(|x| x[0])
        .gradient(|_| dvector![1.0])
        .constraints(|x| dvector![x[0], x[0] + x[0] * x[0]], dvector![0.0, 0.0], dvector![0.0, 0.0])
        .jacobian(|x| dmatrix![1.0; 1.0 + 2.0 * x[0]])
        .build()
        .unwrap();
    let r = run(SolverKind::Sqp, &spec, &[]);
    assert!(r.converged, "{}", r.message);
    assert!(r.x_star[0].abs() < 1e-8);
    assert!(r.message.contains("restoration steps"));
}

#[test]
fn sqp_gives_up_after_repeated_restorations() {
    // e^x = 0 and e^x + 1 = 0: parallel rows with inconsistent right-hand
    // sides, and a violation that keeps decreasing as x -> -inf
    let spec = ProblemSpec::builder("exp_pair", dvector![0.0])
        .objective(|x| x[0] * x[0])
        .gradient(|x| 2.0 * x)
        .constraints(|x| dvector![x[0].exp(), x[0].exp() + 1.0], dvector![0.0, 0.0], dvector![0.0, 0.0])
        .jacobian(|x| dmatrix![x[0].exp(); x[0].exp()])
        .build()
        .unwrap();
    let mut view = ScaledView::new(&spec);
    let opts = SolverKind::Sqp.default_options();
    let err = solve(SolverKind::Sqp, &mut view, &opts).unwrap_err();
    assert!(err.to_string().contains("5 restoration steps"), "{err}");
}

#[test]
fn nelder_mead_examples() {
    let spec = ProblemSpec::builder("sphere", dvector![1.0, 1.0])
        .objective(|x| x.norm_squared())
        .build()
        .unwrap();
    let (r, xs) = recorded(SolverKind::NelderMead, &spec, &[("maxiter", 200.into()), ("opt_tol", 1e-10.into())]);
    assert!(r.f_star <= 1e-8);
    assert!(xs.len() <= 201);

    let r = run(SolverKind::NelderMead, &bean(), &[("maxiter", 150.into())]);
    assert!((r.f_star - 0.09194).abs() < 1e-3, "f* {}", r.f_star);

    let line = ProblemSpec::builder("x2", dvector![2.0]).objective(|x| x[0] * x[0]).build().unwrap();
    let r = run(SolverKind::NelderMead, &line, &[]);
    assert!(r.converged);
    assert!(r.x_star[0].abs() < 1e-3);
    assert_eq!(r.counters.n_grad, 0);
}

fn boxed_sphere() -> ProblemSpec {
    ProblemSpec::builder("boxed_sphere", dvector![3.0, -4.0])
        .variable_bounds(dvector![-5.0, -5.0], dvector![5.0, 5.0])
        .objective(|x| x.norm_squared())
        .build()
        .unwrap()
}

#[test]
fn pso_finds_sphere_minimum() {
    let r = run(SolverKind::Pso, &boxed_sphere(), &[("maxiter", 300.into()), ("seed", 7.into())]);
    assert!(r.f_star <= 1e-4, "f* {}", r.f_star);
    assert!(r.niter <= 300);
}

#[test]
fn pso_needs_a_box() {
    let spec = ProblemSpec::builder("free", dvector![1.0]).objective(|x| x[0] * x[0]).build().unwrap();
    let mut view = ScaledView::new(&spec);
    let opts = SolverKind::Pso.default_options();
    assert!(matches!(solve(SolverKind::Pso, &mut view, &opts), Err(Error::Unsupported(_))));
    let r = run(SolverKind::Pso, &spec, &[("sampling_box", 2.0.into())]);
    assert!(r.f_star < 1e-4);
}

#[test]
fn stochastic_solvers_are_deterministic() {
    for kind in [SolverKind::Pso, SolverKind::SimulatedAnnealing] {
        let a = recorded(kind, &boxed_sphere(), &[("seed", 11.into()), ("maxiter", 200.into())]);
        let b = recorded(kind, &boxed_sphere(), &[("seed", 11.into()), ("maxiter", 200.into())]);
        let c = recorded(kind, &boxed_sphere(), &[("seed", 12.into()), ("maxiter", 200.into())]);
        let bits = |xs: &Vec<Vec<f64>>| xs.iter().flatten().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a.1), bits(&b.1));
        assert_ne!(bits(&a.1), bits(&c.1));
    }
}

#[test]
fn simulated_annealing_on_sphere() {
    let r = run(SolverKind::SimulatedAnnealing, &boxed_sphere(), &[("seed", 3.into())]);
    assert!(r.f_star <= 1e-2, "f* {}", r.f_star);
}

#[test]
fn metropolis_limits() {
    assert_eq!(acceptance_probability(2.0, 2.0, 1.0), 1.0);
    assert_eq!(acceptance_probability(2.0, 2.0, 1e-12), 1.0);
    assert_eq!(acceptance_probability(2.0 + 1e-6, 2.0, temperature(10.0, 5000, 5000)), 0.0);
    assert_eq!(temperature(10.0, 0, 100), 10.0);
    assert_eq!(temperature(10.0, 50, 100), 5.0);
}

mod swarm {
    use super::super::stochastic::Swarm;
    use crate::problem::Bounds;
    use nalgebra::dvector;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn pure_inertia_keeps_velocities() {
        let mut s = Swarm {
            x: vec![dvector![0.0, 0.0], dvector![1.0, -1.0]],
            v: vec![dvector![0.5, 0.25], dvector![-0.1, 0.3]],
            p_best: vec![dvector![2.0, 2.0], dvector![3.0, 3.0]],
            p_val: vec![0.0, 0.0],
            g_best: dvector![-4.0, 4.0],
            g_val: 0.0,
        };
        let v0 = s.v.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let b = Bounds::unbounded(2);
        for _ in 0..10 {
            s.step(&mut rng, 1.0, 0.0, 0.0, &b);
            assert_eq!(s.v, v0);
        }
        assert_eq!(s.x[0], dvector![5.0, 2.5]);
    }

    #[test]
    fn particle_at_optimum_stays() {
        let mut s = Swarm {
            x: vec![dvector![0.0, 0.0]],
            v: vec![dvector![0.0, 0.0]],
            p_best: vec![dvector![0.0, 0.0]],
            p_val: vec![0.0],
            g_best: dvector![0.0, 0.0],
            g_val: 0.0,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            s.step(&mut rng, 0.7, 1.5, 1.5, &Bounds::unbounded(2));
            s.absorb(&[s.x[0].norm_squared()]);
        }
        assert_eq!(s.g_best, dvector![0.0, 0.0]);
    }
}

#[test]
fn quasi_newton_finite_termination_on_quadratics() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    for n in [2usize, 5, 10] {
        let m = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        let a = &m * m.transpose() + DMatrix::identity(n, n);
        let x0 = Vector::from_fn(n, |_, _| rng.random_range(-3.0..3.0));
        let (a1, a2) = (a.clone(), a.clone());
        let spec = ProblemSpec::builder("spd", x0)
            .objective(move |x| 0.5 * x.dot(&(&a1 * x)))
            .gradient(move |x| &a2 * x)
            .build()
            .unwrap();
        let r = run(
            SolverKind::QuasiNewton,
            &spec,
            &[("opt_tol", 1e-8.into()), ("c2", 1e-3.into())],
        );
        assert!(r.converged && r.niter <= n + 2, "n={n}: niter {}", r.niter);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn line_search_descent_is_monotone(
        x0 in proptest::collection::vec(-2.0f64..2.0, 2),
        kind in prop_oneof![Just(SolverKind::SteepestDescent), Just(SolverKind::QuasiNewton)],
    ) {
        let spec = rosenbrock().with_x0(Vector::from_vec(x0)).unwrap();
        let mut opts = kind.default_options();
        opts.set("maxiter", 60).unwrap();
        let mut view = ScaledView::new(&spec);
        view.enable_recording();
        solve(kind, &mut view, &opts).unwrap();
        let rec = view.take_record().unwrap();
        let f: Vec<f64> = rec.iterations().map(|it| it.get("obj").unwrap().as_real().unwrap()).collect();
        for w in f.windows(2) {
            prop_assert!(w[1] <= w[0]);
        }
    }
}
