//! Merit functions combining an objective value with constraint violation.

use std::fmt;
use std::str::FromStr;

use crate::problem::Bounds;
use crate::{Error, Matrix, Result, Vector};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeritKind {
    /// `f + rho |v|_1`
    L1,
    /// `f + rho/2 |v|_2^2`
    L2sq,
    /// `f + rho |v|_inf`
    Linf,
    /// Same value as `L2sq`.
    QuadraticPenalty,
    /// `f - lambda^T (c - target)`
    Lagrangian,
    /// Lagrangian plus `rho/2 |v|_2^2`.
    AugmentedLagrangian,
}

impl MeritKind {
    pub const ALL: [MeritKind; 6] = [
        MeritKind::L1,
        MeritKind::L2sq,
        MeritKind::Linf,
        MeritKind::QuadraticPenalty,
        MeritKind::Lagrangian,
        MeritKind::AugmentedLagrangian,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MeritKind::L1 => "l1",
            MeritKind::L2sq => "l2sq",
            MeritKind::Linf => "linf",
            MeritKind::QuadraticPenalty => "quadratic_penalty",
            MeritKind::Lagrangian => "lagrangian",
            MeritKind::AugmentedLagrangian => "augmented_lagrangian",
        }
    }

    /// Whether the merit is differentiable wherever `f` and `c` are.
    pub fn is_smooth(self) -> bool {
        !matches!(self, MeritKind::L1 | MeritKind::Linf)
    }
}

impl fmt::Display for MeritKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MeritKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::UnknownName {
                what: "merit function",
                name: s.to_string(),
                valid: Self::ALL.map(|k| k.as_str()).join(", "),
            })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeritSpec {
    pub kind: MeritKind,
    pub rho: f64,
    /// Multipliers for the Lagrangian kinds; treated as zero when absent.
    pub lambda: Option<Vector>,
}

impl MeritSpec {
    pub fn new(kind: MeritKind, rho: f64) -> Self {
        assert!(rho.is_finite() && rho >= 0.0, "penalty parameter must be finite and nonnegative");
        Self { kind, rho, lambda: None }
    }

    pub fn with_lambda(mut self, lambda: Vector) -> Self {
        self.lambda = Some(lambda);
        self
    }
}

/// Merit value for objective `f` and constraint values `c` with two-sided
/// `bounds`. The violation is `v_j = max(l_j - c_j, 0) + max(c_j - u_j, 0)`
/// and the Lagrangian target of each constraint is its nearest bound, so
/// satisfied inequalities contribute nothing.
pub fn merit_value(spec: &MeritSpec, f: f64, c: &Vector, bounds: &Bounds) -> f64 {
    let v = bounds.violation(c);
    let rho = spec.rho;
    let lagr = |f: f64| match &spec.lambda {
        Some(l) => f - l.dot(&bounds.signed_violation(c)),
        None => f,
    };
    match spec.kind {
        MeritKind::L1 => f + rho * v.sum(),
        MeritKind::Linf => f + rho * v.amax(),
        MeritKind::L2sq | MeritKind::QuadraticPenalty => f + 0.5 * rho * v.norm_squared(),
        MeritKind::Lagrangian => lagr(f),
        MeritKind::AugmentedLagrangian => lagr(f) + 0.5 * rho * v.norm_squared(),
    }
}

/// Gradient of a smooth merit given the objective gradient `g` and the
/// constraint Jacobian `jac`. Returns `None` for the nonsmooth kinds.
pub fn merit_gradient(spec: &MeritSpec, g: &Vector, c: &Vector, jac: &Matrix, bounds: &Bounds) -> Option<Vector> {
    if !spec.kind.is_smooth() {
        return None;
    }
    let s = bounds.signed_violation(c);
    // d/dc of -lambda^T s: only violated (or equality) rows depend on c
    let lag = |g: Vector| match &spec.lambda {
        Some(l) => {
            let mut w = l.clone();
            for j in 0..w.len() {
                if s[j] == 0.0 && !bounds.is_equality(j) {
                    w[j] = 0.0;
                }
            }
            g - jac.transpose() * w
        }
        None => g,
    };
    let pen = |g: Vector| g + jac.transpose() * (&s * spec.rho);
    Some(match spec.kind {
        MeritKind::L2sq | MeritKind::QuadraticPenalty => pen(g.clone()),
        MeritKind::Lagrangian => lag(g.clone()),
        MeritKind::AugmentedLagrangian => pen(lag(g.clone())),
        MeritKind::L1 | MeritKind::Linf => unreachable!(),
    })
}
