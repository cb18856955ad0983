//! Problem definition and the uniform evaluation interface.
//!
//! A [`ProblemSpec`] holds the constants of a bounded nonlinear program
//!
//! ```text
//! minimize f(x)  subject to  xl <= x <= xu,  cl <= c(x) <= cu
//! ```
//!
//! together with the user callbacks. Equality constraints are rows with
//! `cl[j] == cu[j]`. Solvers never see a `ProblemSpec` directly: they go
//! through a [`ScaledView`], which works entirely in scaled space.

mod check;
mod fd;
mod view;

use std::fmt;
use std::sync::Arc;

use crate::{Error, Matrix, Result, Vector};

pub use check::{check_first_derivatives, DerivativeCheck, EntryCheck, FLAG_THRESHOLD};
pub use fd::fd_step;
pub use view::{EvalCounters, EvalValue, ScaledView};

/// Objective callback.
pub type ScalarFn = Arc<dyn Fn(&Vector) -> f64 + Send + Sync>;
/// Gradient or constraint callback.
pub type VectorFn = Arc<dyn Fn(&Vector) -> Vector + Send + Sync>;
/// Jacobian or objective Hessian callback.
pub type MatrixFn = Arc<dyn Fn(&Vector) -> Matrix + Send + Sync>;
/// Lagrangian Hessian callback `(x, lambda) -> H(x, lambda)` for
/// `L = f - lambda^T c`.
pub type LagHessFn = Arc<dyn Fn(&Vector, &Vector) -> Matrix + Send + Sync>;

/// The kinds of evaluation a solver can request.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EvalKind {
    Obj,
    Grad,
    Con,
    Jac,
    ObjHess,
    LagHess,
}

impl EvalKind {
    pub const ALL: [EvalKind; 6] = [
        EvalKind::Obj,
        EvalKind::Grad,
        EvalKind::Con,
        EvalKind::Jac,
        EvalKind::ObjHess,
        EvalKind::LagHess,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EvalKind::Obj => "obj",
            EvalKind::Grad => "grad",
            EvalKind::Con => "con",
            EvalKind::Jac => "jac",
            EvalKind::ObjHess => "obj_hess",
            EvalKind::LagHess => "lag_hess",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.as_str() == s)
    }
}

impl fmt::Display for EvalKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Element-wise lower and upper bounds. Infinite entries mean "unbounded".
#[derive(Debug, Clone, PartialEq)]
pub struct Bounds {
    pub lower: Vector,
    pub upper: Vector,
}

impl Bounds {
    pub fn new(lower: Vector, upper: Vector) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::Dimension {
                what: "upper bound",
                expected: lower.len(),
                got: upper.len(),
            });
        }
        for (i, (l, u)) in lower.iter().zip(upper.iter()).enumerate() {
            if l.is_nan() || u.is_nan() {
                return Err(Error::InvalidProblem(format!("bound {i} is NaN")));
            }
            if l > u {
                return Err(Error::InvalidProblem(format!(
                    "lower bound {l} exceeds upper bound {u} at index {i}"
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    pub fn unbounded(len: usize) -> Self {
        Self {
            lower: Vector::from_element(len, f64::NEG_INFINITY),
            upper: Vector::from_element(len, f64::INFINITY),
        }
    }

    /// All entries fixed at `value` (equality rows).
    pub fn equal(value: Vector) -> Self {
        Self {
            lower: value.clone(),
            upper: value,
        }
    }

    pub fn len(&self) -> usize {
        self.lower.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lower.is_empty()
    }

    pub fn is_equality(&self, i: usize) -> bool {
        self.lower[i] == self.upper[i]
    }

    pub fn is_bounded(&self) -> bool {
        self.lower.iter().all(|v| v.is_finite()) && self.upper.iter().all(|v| v.is_finite())
    }

    /// Projects `x` onto the box.
    pub fn clip(&self, x: &Vector) -> Vector {
        Vector::from_iterator(
            x.len(),
            x.iter()
                .zip(self.lower.iter().zip(self.upper.iter()))
                .map(|(&v, (&l, &u))| v.max(l).min(u)),
        )
    }

    /// Two-sided violation `max(l - c, 0) + max(c - u, 0)` per entry.
    pub fn violation(&self, c: &Vector) -> Vector {
        Vector::from_iterator(
            c.len(),
            c.iter()
                .zip(self.lower.iter().zip(self.upper.iter()))
                .map(|(&v, (&l, &u))| (l - v).max(0.0) + (v - u).max(0.0)),
        )
    }

    /// Signed violation `c - clip(c)`: negative below the lower bound,
    /// positive above the upper bound, zero inside.
    pub fn signed_violation(&self, c: &Vector) -> Vector {
        c - self.clip(c)
    }

    fn scaled(&self, scaler: &Vector) -> Self {
        Self {
            lower: self.lower.component_mul(scaler),
            upper: self.upper.component_mul(scaler),
        }
    }
}

/// Callbacks that define the model. Only the objective is mandatory; any
/// missing derivative falls back to forward differences.
#[derive(Clone, Default)]
pub struct EvalCallbacks {
    pub objective: Option<ScalarFn>,
    pub gradient: Option<VectorFn>,
    pub constraints: Option<VectorFn>,
    pub jacobian: Option<MatrixFn>,
    pub obj_hessian: Option<MatrixFn>,
    pub lag_hessian: Option<LagHessFn>,
}

impl EvalCallbacks {
    pub fn has(&self, kind: EvalKind) -> bool {
        match kind {
            EvalKind::Obj => self.objective.is_some(),
            EvalKind::Grad => self.gradient.is_some(),
            EvalKind::Con => self.constraints.is_some(),
            EvalKind::Jac => self.jacobian.is_some(),
            EvalKind::ObjHess => self.obj_hessian.is_some(),
            EvalKind::LagHess => self.lag_hessian.is_some(),
        }
    }
}

impl fmt::Debug for EvalCallbacks {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let present: Vec<&str> = EvalKind::ALL
            .into_iter()
            .filter(|k| self.has(*k))
            .map(EvalKind::as_str)
            .collect();
        f.debug_struct("EvalCallbacks")
            .field("present", &present)
            .finish()
    }
}

/// Scaling factors; `None` fields default to one.
#[derive(Debug, Clone, Default)]
pub struct ScalerSpec {
    pub x: Option<Vector>,
    pub f: Option<f64>,
    pub c: Option<Vector>,
}

/// Resolved, validated scaling factors.
#[derive(Debug, Clone, PartialEq)]
pub struct Scalers {
    pub x: Vector,
    pub f: f64,
    pub c: Vector,
}

impl Scalers {
    pub fn unit(n: usize, m: usize) -> Self {
        Self {
            x: Vector::from_element(n, 1.0),
            f: 1.0,
            c: Vector::from_element(m, 1.0),
        }
    }
}

/// A validated, immutable problem definition in unscaled units.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    name: String,
    x0: Vector,
    var_bounds: Bounds,
    con_bounds: Bounds,
    scalers: Scalers,
    callbacks: EvalCallbacks,
}

/// Validates the pieces of a problem and assembles a [`ProblemSpec`].
///
/// Missing bounds default to `±inf` and missing scalers to one. The
/// constraint count `m` is taken from `con_bounds`.
pub fn build_problem(
    name: impl Into<String>,
    x0: Vector,
    var_bounds: Option<Bounds>,
    con_bounds: Option<Bounds>,
    scalers: ScalerSpec,
    callbacks: EvalCallbacks,
) -> Result<ProblemSpec> {
    let n = x0.len();
    if n == 0 {
        return Err(Error::InvalidProblem("problem has no variables".into()));
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidProblem("x0 contains non-finite entries".into()));
    }
    let var_bounds = var_bounds.unwrap_or_else(|| Bounds::unbounded(n));
    let var_bounds = Bounds::new(var_bounds.lower, var_bounds.upper)?;
    if var_bounds.len() != n {
        return Err(Error::Dimension {
            what: "variable bounds",
            expected: n,
            got: var_bounds.len(),
        });
    }
    let con_bounds = con_bounds.unwrap_or_else(|| Bounds::unbounded(0));
    let con_bounds = Bounds::new(con_bounds.lower, con_bounds.upper)?;
    let m = con_bounds.len();

    if callbacks.objective.is_none() {
        return Err(Error::InvalidProblem("objective callback is required".into()));
    }
    if m > 0 && callbacks.constraints.is_none() {
        return Err(Error::InvalidProblem(format!(
            "{m} constraint bounds given but no constraint callback"
        )));
    }
    if m == 0 && (callbacks.constraints.is_some() || callbacks.jacobian.is_some()) {
        return Err(Error::InvalidProblem(
            "constraint callbacks given without constraint bounds".into(),
        ));
    }

    let x = scalers.x.unwrap_or_else(|| Vector::from_element(n, 1.0));
    let f = scalers.f.unwrap_or(1.0);
    let c = scalers.c.unwrap_or_else(|| Vector::from_element(m, 1.0));
    if x.len() != n {
        return Err(Error::Dimension {
            what: "x scaler",
            expected: n,
            got: x.len(),
        });
    }
    if c.len() != m {
        return Err(Error::Dimension {
            what: "constraint scaler",
            expected: m,
            got: c.len(),
        });
    }
    let positive = |v: f64| v.is_finite() && v > 0.0;
    if !x.iter().copied().all(positive) || !positive(f) || !c.iter().copied().all(positive) {
        return Err(Error::InvalidProblem(
            "scalers must be strictly positive and finite".into(),
        ));
    }

    Ok(ProblemSpec {
        name: name.into(),
        x0,
        var_bounds,
        con_bounds,
        scalers: Scalers { x, f, c },
        callbacks,
    })
}

impl ProblemSpec {
    pub fn builder(name: impl Into<String>, x0: Vector) -> ProblemBuilder {
        ProblemBuilder {
            name: name.into(),
            x0,
            var_bounds: None,
            con_bounds: None,
            scalers: ScalerSpec::default(),
            callbacks: EvalCallbacks::default(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n(&self) -> usize {
        self.x0.len()
    }

    pub fn m(&self) -> usize {
        self.con_bounds.len()
    }

    pub fn x0(&self) -> &Vector {
        &self.x0
    }

    pub fn var_bounds(&self) -> &Bounds {
        &self.var_bounds
    }

    pub fn con_bounds(&self) -> &Bounds {
        &self.con_bounds
    }

    pub fn scalers(&self) -> &Scalers {
        &self.scalers
    }

    pub fn callbacks(&self) -> &EvalCallbacks {
        &self.callbacks
    }

    /// True when every constraint row is an equality.
    pub fn equality_only(&self) -> bool {
        (0..self.m()).all(|j| self.con_bounds.is_equality(j))
    }

    /// Same problem with different scaling.
    pub fn with_scalers(&self, scalers: ScalerSpec) -> Result<ProblemSpec> {
        build_problem(
            self.name.clone(),
            self.x0.clone(),
            Some(self.var_bounds.clone()),
            Some(self.con_bounds.clone()),
            scalers,
            self.callbacks.clone(),
        )
    }

    /// Same problem started from a different initial guess.
    pub fn with_x0(&self, x0: Vector) -> Result<ProblemSpec> {
        if x0.len() != self.n() {
            return Err(Error::Dimension {
                what: "x0",
                expected: self.n(),
                got: x0.len(),
            });
        }
        let mut out = self.clone();
        out.x0 = x0;
        Ok(out)
    }

    /// Same problem with the named analytic derivative callbacks removed,
    /// so that they are served by finite differences.
    pub fn without(&self, kinds: &[EvalKind]) -> ProblemSpec {
        let mut out = self.clone();
        for kind in kinds {
            match kind {
                EvalKind::Grad => out.callbacks.gradient = None,
                EvalKind::Jac => out.callbacks.jacobian = None,
                EvalKind::ObjHess => out.callbacks.obj_hessian = None,
                EvalKind::LagHess => out.callbacks.lag_hessian = None,
                EvalKind::Obj | EvalKind::Con => {}
            }
        }
        out
    }
}

/// Fluent front end to [`build_problem`].
pub struct ProblemBuilder {
    name: String,
    x0: Vector,
    var_bounds: Option<Bounds>,
    con_bounds: Option<Bounds>,
    scalers: ScalerSpec,
    callbacks: EvalCallbacks,
}

impl ProblemBuilder {
    pub fn variable_bounds(mut self, lower: Vector, upper: Vector) -> Self {
        self.var_bounds = Some(Bounds { lower, upper });
        self
    }

    pub fn objective(mut self, f: impl Fn(&Vector) -> f64 + Send + Sync + 'static) -> Self {
        self.callbacks.objective = Some(Arc::new(f));
        self
    }

    pub fn gradient(mut self, g: impl Fn(&Vector) -> Vector + Send + Sync + 'static) -> Self {
        self.callbacks.gradient = Some(Arc::new(g));
        self
    }

    /// Constraint function with its two-sided bounds.
    pub fn constraints(
        mut self,
        c: impl Fn(&Vector) -> Vector + Send + Sync + 'static,
        lower: Vector,
        upper: Vector,
    ) -> Self {
        self.callbacks.constraints = Some(Arc::new(c));
        self.con_bounds = Some(Bounds { lower, upper });
        self
    }

    pub fn jacobian(mut self, j: impl Fn(&Vector) -> Matrix + Send + Sync + 'static) -> Self {
        self.callbacks.jacobian = Some(Arc::new(j));
        self
    }

    pub fn objective_hessian(
        mut self,
        h: impl Fn(&Vector) -> Matrix + Send + Sync + 'static,
    ) -> Self {
        self.callbacks.obj_hessian = Some(Arc::new(h));
        self
    }

    pub fn lagrangian_hessian(
        mut self,
        h: impl Fn(&Vector, &Vector) -> Matrix + Send + Sync + 'static,
    ) -> Self {
        self.callbacks.lag_hessian = Some(Arc::new(h));
        self
    }

    pub fn x_scaler(mut self, s: Vector) -> Self {
        self.scalers.x = Some(s);
        self
    }

    pub fn f_scaler(mut self, s: f64) -> Self {
        self.scalers.f = Some(s);
        self
    }

    pub fn c_scaler(mut self, s: Vector) -> Self {
        self.scalers.c = Some(s);
        self
    }

    pub fn build(self) -> Result<ProblemSpec> {
        build_problem(
            self.name,
            self.x0,
            self.var_bounds,
            self.con_bounds,
            self.scalers,
            self.callbacks,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{dmatrix, dvector};

    fn quadratic_builder() -> ProblemBuilder {
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
    }

    #[test]
    fn quadratic_example_is_valid() {
        let spec = quadratic_builder().build().unwrap();
        assert_eq!(spec.n(), 2);
        assert_eq!(spec.m(), 2);
        assert!(spec.con_bounds().is_equality(0));
        assert!(!spec.con_bounds().is_equality(1));
        assert!(!spec.equality_only());
        assert_eq!(spec.scalers().f, 1.0);
    }

    #[test]
    fn unconstrained_defaults() {
        let spec = ProblemSpec::builder("sphere", dvector![1.0, 2.0])
            .objective(|x| x.norm_squared())
            .build()
            .unwrap();
        assert_eq!(spec.m(), 0);
        assert!(spec.var_bounds().lower.iter().all(|v| *v == f64::NEG_INFINITY));
        assert_eq!(spec.scalers().x, dvector![1.0, 1.0]);
    }

    #[test]
    fn zero_scaler_rejected() {
        let err = quadratic_builder().x_scaler(dvector![1.0, 0.0]).build();
        assert!(matches!(err, Err(Error::InvalidProblem(_))));
    }

    #[test]
    fn inverted_bounds_rejected() {
        let err = ProblemSpec::builder("bad", dvector![0.0])
            .variable_bounds(dvector![1.0], dvector![0.0])
            .objective(|x| x[0])
            .build();
        assert!(matches!(err, Err(Error::InvalidProblem(_))));
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let err = ProblemSpec::builder("bad", dvector![0.0, 0.0])
            .variable_bounds(dvector![0.0], dvector![1.0])
            .objective(|x| x[0])
            .build();
        assert!(matches!(err, Err(Error::Dimension { .. })));
    }

    #[test]
    fn missing_constraint_callback_rejected() {
        let err = build_problem(
            "bad",
            dvector![0.0],
            None,
            Some(Bounds::equal(dvector![1.0])),
            ScalerSpec::default(),
            EvalCallbacks {
                objective: Some(Arc::new(|x: &Vector| x[0])),
                ..Default::default()
            },
        );
        assert!(matches!(err, Err(Error::InvalidProblem(_))));
    }

    #[test]
    fn violation_is_two_sided() {
        let b = Bounds::new(dvector![0.0, 1.0, 2.0], dvector![1.0, 1.0, f64::INFINITY]).unwrap();
        let c = dvector![-0.5, 3.0, 5.0];
        assert_eq!(b.violation(&c), dvector![0.5, 2.0, 0.0]);
        assert_eq!(b.signed_violation(&c), dvector![-0.5, 2.0, 0.0]);
    }
}
