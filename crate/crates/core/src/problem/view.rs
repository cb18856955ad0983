use std::time::Instant;

use super::{Bounds, EvalKind, ProblemSpec, Scalers};
use crate::runtime::{
    record::{timestamp_now, EvalEvent, Event, RecordHeader, RunRecord},
    HotStartCache, OutputValue, OutputsDecl,
};
use crate::{Error, Matrix, Result, Vector};

/// Number of underlying callback invocations per kind. Objective and
/// Lagrangian Hessians share `n_hess`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EvalCounters {
    pub n_obj: usize,
    pub n_grad: usize,
    pub n_con: usize,
    pub n_jac: usize,
    pub n_hess: usize,
}

impl EvalCounters {
    pub(crate) fn bump(&mut self, kind: EvalKind) {
        match kind {
            EvalKind::Obj => self.n_obj += 1,
            EvalKind::Grad => self.n_grad += 1,
            EvalKind::Con => self.n_con += 1,
            EvalKind::Jac => self.n_jac += 1,
            EvalKind::ObjHess | EvalKind::LagHess => self.n_hess += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.n_obj + self.n_grad + self.n_con + self.n_jac + self.n_hess
    }
}

impl std::ops::Sub for EvalCounters {
    type Output = EvalCounters;

    fn sub(self, rhs: Self) -> Self {
        EvalCounters {
            n_obj: self.n_obj - rhs.n_obj,
            n_grad: self.n_grad - rhs.n_grad,
            n_con: self.n_con - rhs.n_con,
            n_jac: self.n_jac - rhs.n_jac,
            n_hess: self.n_hess - rhs.n_hess,
        }
    }
}

/// Result of an evaluation.
#[derive(Debug, Clone, PartialEq)]
pub enum EvalValue {
    Scalar(f64),
    Vector(Vector),
    Matrix(Matrix),
}

impl EvalValue {
    pub fn into_scalar(self) -> f64 {
        match self {
            EvalValue::Scalar(v) => v,
            other => panic!("expected a scalar evaluation, got {other:?}"),
        }
    }

    pub fn into_vector(self) -> Vector {
        match self {
            EvalValue::Vector(v) => v,
            other => panic!("expected a vector evaluation, got {other:?}"),
        }
    }

    pub fn into_matrix(self) -> Matrix {
        match self {
            EvalValue::Matrix(m) => m,
            other => panic!("expected a matrix evaluation, got {other:?}"),
        }
    }
}

/// Scaled, counted and optionally recorded access to a [`ProblemSpec`].
///
/// Scaled quantities are `x~ = sx * x`, `f~ = sf * f` and `c~ = sc * c`
/// (element-wise); bounds are scaled by the same factors and derivatives
/// follow by the chain rule. Everything a solver sees lives in scaled space.
///
/// One view serves one solver run on one thread.
pub struct ScaledView<'a> {
    spec: &'a ProblemSpec,
    x0: Vector,
    var_bounds: Bounds,
    con_bounds: Bounds,
    counters: EvalCounters,
    replayed: EvalCounters,
    fd_enabled: bool,
    recording: bool,
    record: Option<RunRecord>,
    hot_start: Option<HotStartCache>,
    outputs: OutputsDecl,
    deadline: Option<(Instant, f64)>,
    // last fresh objective/constraint values, reused as the base point of a
    // forward difference taken at the same x
    obj_memo: Option<(Vector, f64)>,
    con_memo: Option<(Vector, Vector)>,
}

impl<'a> ScaledView<'a> {
    pub fn new(spec: &'a ProblemSpec) -> Self {
        let s = spec.scalers();
        Self {
            spec,
            x0: spec.x0().component_mul(&s.x),
            var_bounds: spec.var_bounds().scaled(&s.x),
            con_bounds: spec.con_bounds().scaled(&s.c),
            counters: EvalCounters::default(),
            replayed: EvalCounters::default(),
            fd_enabled: true,
            recording: false,
            record: None,
            hot_start: None,
            outputs: OutputsDecl::new(),
            deadline: None,
            obj_memo: None,
            con_memo: None,
        }
    }

    /// Enables or disables finite-difference fallbacks for missing
    /// derivative callbacks.
    pub fn set_finite_differences(&mut self, enabled: bool) {
        self.fd_enabled = enabled;
    }

    /// Records every evaluation and iteration of the next run.
    pub fn enable_recording(&mut self) {
        self.recording = true;
    }

    /// Replays evaluations from `source` before evaluating fresh.
    pub fn hot_start_from(&mut self, source: &RunRecord) -> Result<()> {
        self.hot_start = Some(HotStartCache::new(source, self.spec)?);
        Ok(())
    }

    /// Fails every evaluation requested after `seconds` of wall time.
    pub fn set_time_budget(&mut self, seconds: f64) {
        self.deadline = Some((Instant::now(), seconds));
    }

    pub fn spec(&self) -> &ProblemSpec {
        self.spec
    }

    pub fn n(&self) -> usize {
        self.spec.n()
    }

    pub fn m(&self) -> usize {
        self.spec.m()
    }

    /// Scaled initial guess.
    pub fn x0(&self) -> &Vector {
        &self.x0
    }

    /// Scaled variable bounds.
    pub fn var_bounds(&self) -> &Bounds {
        &self.var_bounds
    }

    /// Scaled constraint bounds.
    pub fn con_bounds(&self) -> &Bounds {
        &self.con_bounds
    }

    pub fn counters(&self) -> EvalCounters {
        self.counters
    }

    /// Evaluations served from the hot-start record.
    pub fn replayed(&self) -> EvalCounters {
        self.replayed
    }

    pub fn hot_start(&self) -> Option<&HotStartCache> {
        self.hot_start.as_ref()
    }

    pub fn record(&self) -> Option<&RunRecord> {
        self.record.as_ref()
    }

    pub fn take_record(&mut self) -> Option<RunRecord> {
        self.record.take()
    }

    pub fn outputs(&self) -> &OutputsDecl {
        &self.outputs
    }

    pub fn unscale_x(&self, x: &Vector) -> Vector {
        x.component_div(&self.spec.scalers().x)
    }

    pub fn scale_x(&self, x: &Vector) -> Vector {
        x.component_mul(&self.spec.scalers().x)
    }

    pub fn unscale_objective(&self, f: f64) -> f64 {
        f / self.spec.scalers().f
    }

    /// Converts scaled constraint multipliers to the unscaled problem, so that
    /// `grad f = J^T lambda` holds in original units.
    pub fn unscale_multipliers(&self, lam: &Vector) -> Vector {
        let s = self.spec.scalers();
        lam.component_mul(&s.c) / s.f
    }

    /// Starts a solver run: installs the output declaration and, when
    /// recording is enabled, opens a fresh record.
    pub fn begin_run(&mut self, solver: &str, options: Vec<(String, String)>, outputs: OutputsDecl) {
        self.outputs = outputs;
        if self.recording {
            let s = self.spec.scalers().clone();
            self.record = Some(RunRecord::new(RecordHeader {
                problem: self.spec.name().to_string(),
                solver: solver.to_string(),
                n: self.n(),
                m: self.m(),
                x0: self.spec.x0().as_slice().to_vec(),
                scalers: s,
                options,
                timestamp: timestamp_now(),
            }));
        }
    }

    /// Validates one iteration's outputs and appends them to the record.
    pub fn update_outputs(&mut self, values: &[(&str, OutputValue)]) -> Result<()> {
        let event = self.outputs.validate(values)?;
        if let Some(rec) = self.record.as_mut() {
            rec.events.push(Event::Iter(event));
        }
        Ok(())
    }

    /// Evaluates `kind` at the scaled point `x`; `lam` (scaled multipliers)
    /// is required for, and only for, `LagHess`.
    pub fn evaluate(&mut self, kind: EvalKind, x: &Vector, lam: Option<&Vector>) -> Result<EvalValue> {
        if x.len() != self.n() {
            return Err(Error::Dimension {
                what: "evaluation point",
                expected: self.n(),
                got: x.len(),
            });
        }
        match (kind, lam) {
            (EvalKind::LagHess, Some(l)) if l.len() != self.m() => {
                return Err(Error::Dimension {
                    what: "multipliers",
                    expected: self.m(),
                    got: l.len(),
                })
            }
            (EvalKind::LagHess, None) => {
                return Err(Error::Unsupported("lag_hess requires multipliers".into()))
            }
            (EvalKind::LagHess, Some(_)) => {}
            (_, Some(_)) => {
                return Err(Error::Unsupported(format!("{kind} does not take multipliers")))
            }
            (_, None) => {}
        }
        if matches!(kind, EvalKind::Con | EvalKind::Jac) && self.m() == 0 {
            return Err(Error::Unsupported("problem has no constraints".into()));
        }
        if let Some((start, budget)) = self.deadline {
            if start.elapsed().as_secs_f64() > budget {
                return Err(Error::BudgetExceeded(budget));
            }
        }

        let replay = self.hot_start.as_mut().and_then(|c| c.lookup(kind, x, lam));
        let value = match replay {
            Some(v) => {
                self.replayed.bump(kind);
                let xu = self.unscale_x(x);
                let s = self.spec.scalers();
                match (&v, kind) {
                    (EvalValue::Scalar(f), EvalKind::Obj) => self.obj_memo = Some((xu, f / s.f)),
                    (EvalValue::Vector(c), EvalKind::Con) => {
                        self.con_memo = Some((xu, c.component_div(&s.c)))
                    }
                    _ => {}
                }
                v
            }
            None => self.fresh(kind, x, lam)?,
        };
        if let Some(rec) = self.record.as_mut() {
            rec.events.push(Event::Eval(EvalEvent {
                kind,
                x: x.as_slice().to_vec(),
                lam: lam.map(|l| l.as_slice().to_vec()),
                result: value.clone(),
            }));
        }
        Ok(value)
    }

    pub fn objective(&mut self, x: &Vector) -> Result<f64> {
        Ok(self.evaluate(EvalKind::Obj, x, None)?.into_scalar())
    }

    pub fn gradient(&mut self, x: &Vector) -> Result<Vector> {
        Ok(self.evaluate(EvalKind::Grad, x, None)?.into_vector())
    }

    pub fn constraints(&mut self, x: &Vector) -> Result<Vector> {
        Ok(self.evaluate(EvalKind::Con, x, None)?.into_vector())
    }

    pub fn jacobian(&mut self, x: &Vector) -> Result<Matrix> {
        Ok(self.evaluate(EvalKind::Jac, x, None)?.into_matrix())
    }

    pub fn objective_hessian(&mut self, x: &Vector) -> Result<Matrix> {
        Ok(self.evaluate(EvalKind::ObjHess, x, None)?.into_matrix())
    }

    pub fn lagrangian_hessian(&mut self, x: &Vector, lam: &Vector) -> Result<Matrix> {
        Ok(self.evaluate(EvalKind::LagHess, x, Some(lam))?.into_matrix())
    }

    /// Forward-difference derivative at the scaled point `x`, ignoring any
    /// analytic callback. Counted but not recorded.
    pub fn fd_derivative(&mut self, kind: EvalKind, x: &Vector, lam: Option<&Vector>) -> Result<EvalValue> {
        let xu = self.unscale_x(x);
        let s = self.spec.scalers().clone();
        match kind {
            EvalKind::Grad => Ok(EvalValue::Vector(scale_gradient(&s, self.fd_gradient(&xu)?))),
            EvalKind::Jac => Ok(EvalValue::Matrix(scale_jacobian(&s, self.fd_jacobian(&xu)?))),
            EvalKind::ObjHess => Ok(EvalValue::Matrix(scale_hessian(&s, self.fd_hessian(&xu, None)?))),
            EvalKind::LagHess => {
                let lam = lam.ok_or_else(|| Error::Unsupported("lag_hess requires multipliers".into()))?;
                let lu = lam.component_mul(&s.c) / s.f;
                Ok(EvalValue::Matrix(scale_hessian(&s, self.fd_hessian(&xu, Some(&lu))?)))
            }
            EvalKind::Obj | EvalKind::Con => {
                Err(Error::Unsupported(format!("{kind} is not a derivative")))
            }
        }
    }

    fn fresh(&mut self, kind: EvalKind, x: &Vector, lam: Option<&Vector>) -> Result<EvalValue> {
        let xu = self.unscale_x(x);
        let s = self.spec.scalers().clone();
        Ok(match kind {
            EvalKind::Obj => EvalValue::Scalar(s.f * self.raw_objective(&xu)?),
            EvalKind::Grad => EvalValue::Vector(scale_gradient(&s, self.raw_gradient(&xu)?)),
            EvalKind::Con => EvalValue::Vector(self.raw_constraints(&xu)?.component_mul(&s.c)),
            EvalKind::Jac => EvalValue::Matrix(scale_jacobian(&s, self.raw_jacobian(&xu)?)),
            EvalKind::ObjHess => {
                let h = match self.spec.callbacks().obj_hessian.clone() {
                    Some(cb) => {
                        self.counters.bump(EvalKind::ObjHess);
                        let h = cb(&xu);
                        self.check_matrix(EvalKind::ObjHess, &xu, &h, self.n())?;
                        h
                    }
                    None if self.fd_enabled => self.fd_hessian(&xu, None)?,
                    None => return Err(Error::MissingCallback(EvalKind::ObjHess)),
                };
                EvalValue::Matrix(scale_hessian(&s, h))
            }
            EvalKind::LagHess => {
                let lu = lam.expect("checked by evaluate").component_mul(&s.c) / s.f;
                let cbs = self.spec.callbacks();
                let h = if let Some(cb) = cbs.lag_hessian.clone() {
                    self.counters.bump(EvalKind::LagHess);
                    let h = cb(&xu, &lu);
                    self.check_matrix(EvalKind::LagHess, &xu, &h, self.n())?;
                    h
                } else if self.m() == 0 && cbs.obj_hessian.is_some() {
                    let cb = cbs.obj_hessian.clone().unwrap();
                    self.counters.bump(EvalKind::LagHess);
                    let h = cb(&xu);
                    self.check_matrix(EvalKind::LagHess, &xu, &h, self.n())?;
                    h
                } else if self.fd_enabled {
                    self.fd_hessian(&xu, Some(&lu))?
                } else {
                    return Err(Error::MissingCallback(EvalKind::LagHess));
                };
                EvalValue::Matrix(scale_hessian(&s, h))
            }
        })
    }

    // Unscaled, counted callback access. Missing derivatives fall back to
    // finite differences (see fd.rs).

    pub(super) fn raw_objective(&mut self, x: &Vector) -> Result<f64> {
        let cb = self.spec.callbacks().objective.clone().expect("validated at build");
        self.counters.bump(EvalKind::Obj);
        let f = cb(x);
        if !f.is_finite() {
            return Err(self.non_finite(EvalKind::Obj, x));
        }
        self.obj_memo = Some((x.clone(), f));
        Ok(f)
    }

    pub(super) fn raw_constraints(&mut self, x: &Vector) -> Result<Vector> {
        let cb = self
            .spec
            .callbacks()
            .constraints
            .clone()
            .ok_or(Error::MissingCallback(EvalKind::Con))?;
        self.counters.bump(EvalKind::Con);
        let c = cb(x);
        self.check_vector(EvalKind::Con, x, &c, self.m())?;
        self.con_memo = Some((x.clone(), c.clone()));
        Ok(c)
    }

    pub(super) fn raw_gradient(&mut self, x: &Vector) -> Result<Vector> {
        match self.spec.callbacks().gradient.clone() {
            Some(cb) => {
                self.counters.bump(EvalKind::Grad);
                let g = cb(x);
                self.check_vector(EvalKind::Grad, x, &g, self.n())?;
                Ok(g)
            }
            None if self.fd_enabled => self.fd_gradient(x),
            None => Err(Error::MissingCallback(EvalKind::Grad)),
        }
    }

    pub(super) fn raw_jacobian(&mut self, x: &Vector) -> Result<Matrix> {
        match self.spec.callbacks().jacobian.clone() {
            Some(cb) => {
                self.counters.bump(EvalKind::Jac);
                let j = cb(x);
                if j.nrows() != self.m() || j.ncols() != self.n() {
                    return Err(Error::Dimension {
                        what: "jacobian rows x cols",
                        expected: self.m() * self.n(),
                        got: j.nrows() * j.ncols(),
                    });
                }
                if j.iter().any(|v| !v.is_finite()) {
                    return Err(self.non_finite(EvalKind::Jac, x));
                }
                Ok(j)
            }
            None if self.fd_enabled => self.fd_jacobian(x),
            None => Err(Error::MissingCallback(EvalKind::Jac)),
        }
    }

    pub(super) fn memo_objective(&self, x: &Vector) -> Option<f64> {
        self.obj_memo
            .as_ref()
            .filter(|(mx, _)| bit_equal(mx, x))
            .map(|(_, f)| *f)
    }

    pub(super) fn memo_constraints(&self, x: &Vector) -> Option<Vector> {
        self.con_memo
            .as_ref()
            .filter(|(mx, _)| bit_equal(mx, x))
            .map(|(_, c)| c.clone())
    }

    fn check_vector(&self, kind: EvalKind, x: &Vector, v: &Vector, len: usize) -> Result<()> {
        if v.len() != len {
            return Err(Error::Dimension {
                what: "callback output",
                expected: len,
                got: v.len(),
            });
        }
        if v.iter().any(|e| !e.is_finite()) {
            return Err(self.non_finite(kind, x));
        }
        Ok(())
    }

    fn check_matrix(&self, kind: EvalKind, x: &Vector, h: &Matrix, n: usize) -> Result<()> {
        if h.nrows() != n || h.ncols() != n {
            return Err(Error::Dimension {
                what: "hessian rows x cols",
                expected: n * n,
                got: h.nrows() * h.ncols(),
            });
        }
        if h.iter().any(|e| !e.is_finite()) {
            return Err(self.non_finite(kind, x));
        }
        Ok(())
    }

    pub(super) fn non_finite(&self, kind: EvalKind, x: &Vector) -> Error {
        Error::NonFinite {
            kind,
            iterate: x.as_slice().to_vec(),
        }
    }
}

fn scale_gradient(s: &Scalers, g: Vector) -> Vector {
    g.component_div(&s.x) * s.f
}

fn scale_jacobian(s: &Scalers, mut j: Matrix) -> Matrix {
    for c in 0..j.ncols() {
        for r in 0..j.nrows() {
            j[(r, c)] *= s.c[r] / s.x[c];
        }
    }
    j
}

fn scale_hessian(s: &Scalers, mut h: Matrix) -> Matrix {
    let n = s.x.len();
    for c in 0..n {
        for r in 0..n {
            h[(r, c)] *= s.f / (s.x[r] * s.x[c]);
        }
    }
    h
}

fn bit_equal(a: &Vector, b: &Vector) -> bool {
    a.len() == b.len() && a.iter().zip(b.iter()).all(|(p, q)| p.to_bits() == q.to_bits())
}
