//! Named test problems with their default sizes and known solutions.

use nalgebra::dvector;

use super::problems::{analytic, cantilever, spacecraft};
use crate::problem::ProblemSpec;
use crate::{Error, Result, Vector};

/// Size parameter of a parameterized problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SizeParam {
    /// Flag-style name: `n`, `n_el` or `n_t`.
    pub name: &'static str,
    pub default: usize,
}

/// A published minimizer and value.
#[derive(Debug, Clone, PartialEq)]
pub struct KnownSolution {
    pub x: Vector,
    pub f: f64,
}

type Factory = fn(usize) -> Result<ProblemSpec>;
type Known = fn(usize) -> KnownSolution;

pub struct TestProblem {
    pub name: &'static str,
    pub summary: &'static str,
    pub size: Option<SizeParam>,
    /// Whether the problem supplies analytic first derivatives.
    pub analytic: bool,
    factory: Factory,
    known: Option<Known>,
}

impl TestProblem {
    /// Builds the problem; `size` must be `None` for fixed-size problems and
    /// defaults to [`SizeParam::default`] otherwise.
    pub fn build(&self, size: Option<usize>) -> Result<ProblemSpec> {
        (self.factory)(self.resolve(size)?)
    }

    /// Solution where one is published; for validation only.
    pub fn known_solution(&self, size: Option<usize>) -> Option<KnownSolution> {
        let s = self.resolve(size).ok()?;
        self.known.map(|k| k(s))
    }

    pub fn default_x0(&self, size: Option<usize>) -> Result<Vector> {
        Ok(self.build(size)?.x0().clone())
    }

    fn resolve(&self, size: Option<usize>) -> Result<usize> {
        match (self.size, size) {
            (None, None) => Ok(0),
            (None, Some(s)) => Err(Error::InvalidProblem(format!(
                "`{}` has a fixed size; got size parameter {s}",
                self.name
            ))),
            (Some(p), s) => Ok(s.unwrap_or(p.default)),
        }
    }
}

fn ones(n: usize) -> KnownSolution {
    KnownSolution {
        x: Vector::from_element(n, 1.0),
        f: 0.0,
    }
}

static REGISTRY: [TestProblem; 10] = [
    TestProblem {
        name: "quartic",
        summary: "x1^4 + x2^4 from (1, 1)",
        size: None,
        analytic: true,
        factory: |_| analytic::quartic(),
        known: Some(|_| KnownSolution { x: dvector![0.0, 0.0], f: 0.0 }),
    },
    TestProblem {
        name: "rosenbrock2",
        summary: "two-dimensional Rosenbrock from (-1.2, 1)",
        size: None,
        analytic: true,
        factory: |_| analytic::rosenbrock2(),
        known: Some(|_| ones(2)),
    },
    TestProblem {
        name: "bean",
        summary: "bean function from (0, 0)",
        size: None,
        analytic: true,
        factory: |_| analytic::bean(),
        known: Some(|_| KnownSolution { x: dvector![1.21314, 0.82414], f: 0.09194 }),
    },
    TestProblem {
        name: "bean_fd",
        summary: "bean function without derivative callbacks",
        size: None,
        analytic: false,
        factory: |_| analytic::bean_fd(),
        known: Some(|_| KnownSolution { x: dvector![1.21314, 0.82414], f: 0.09194 }),
    },
    TestProblem {
        name: "quadratic_example",
        summary: "x1^2 + x2^2 with x1 >= 0, x1 + x2 = 1, x1 - x2 >= 1, from (500, 5)",
        size: None,
        analytic: true,
        factory: |_| analytic::quadratic_example(),
        known: Some(|_| KnownSolution { x: dvector![1.0, 0.0], f: 1.0 }),
    },
    TestProblem {
        name: "rosen_uncoupled",
        summary: "sum of n/2 independent Rosenbrock pairs (n even)",
        size: Some(SizeParam { name: "n", default: 4 }),
        analytic: true,
        factory: analytic::rosen_uncoupled,
        known: Some(ones),
    },
    TestProblem {
        name: "rosen_coupled",
        summary: "chained Rosenbrock over adjacent pairs",
        size: Some(SizeParam { name: "n", default: 8 }),
        analytic: true,
        factory: analytic::rosen_coupled,
        known: Some(ones),
    },
    TestProblem {
        name: "cantilever",
        summary: "cantilever thickness for minimum compliance at fixed volume",
        size: Some(SizeParam { name: "n_el", default: 20 }),
        analytic: true,
        factory: cantilever::cantilever,
        known: None,
    },
    TestProblem {
        name: "spacecraft",
        summary: "planar spacecraft landing by direct transcription",
        size: Some(SizeParam { name: "n_t", default: 10 }),
        analytic: true,
        factory: spacecraft::spacecraft,
        known: None,
    },
    TestProblem {
        name: "sphere_box",
        summary: "|x|^2 on [-5, 5]^n from (3, -4, 3, ...), for sampling-based solvers",
        size: Some(SizeParam { name: "n", default: 2 }),
        analytic: true,
        factory: sphere_box,
        known: Some(|n| KnownSolution { x: Vector::zeros(n), f: 0.0 }),
    },
];

fn sphere_box(n: usize) -> Result<ProblemSpec> {
    if n == 0 {
        return Err(Error::InvalidProblem("sphere_box needs n >= 1".into()));
    }
    let x0 = Vector::from_fn(n, |i, _| if i % 2 == 0 { 3.0 } else { -4.0 });
    ProblemSpec::builder("sphere_box", x0)
        .variable_bounds(Vector::from_element(n, -5.0), Vector::from_element(n, 5.0))
        .objective(|x| x.norm_squared())
        .gradient(|x| 2.0 * x)
        .build()
}

pub fn registry() -> &'static [TestProblem] {
    &REGISTRY
}

pub fn problem_names() -> Vec<&'static str> {
    REGISTRY.iter().map(|p| p.name).collect()
}

pub fn find(name: &str) -> Result<&'static TestProblem> {
    REGISTRY.iter().find(|p| p.name == name).ok_or_else(|| Error::UnknownName {
        what: "problem",
        name: name.to_string(),
        valid: problem_names().join(", "),
    })
}

/// Builds a registry problem by name, with an optional size parameter.
pub fn make_problem(name: &str, size: Option<usize>) -> Result<ProblemSpec> {
    find(name)?.build(size)
}
