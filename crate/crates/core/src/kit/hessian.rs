//! Quasi-Newton Hessian approximations.

use std::fmt;
use std::str::FromStr;

use crate::{Error, Matrix, Result, Vector};

/// Update formula used by a [`HessianApprox`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpdateKind {
    /// `B + (w - Bd) d^T / (d^T d)`; not symmetric in general.
    Broyden,
    /// Symmetric rank one.
    Sr1,
    Bfgs,
    /// Davidon-Fletcher-Powell, the dual of BFGS.
    Dfp,
}

impl UpdateKind {
    pub const ALL: [UpdateKind; 4] = [UpdateKind::Broyden, UpdateKind::Sr1, UpdateKind::Bfgs, UpdateKind::Dfp];

    pub fn as_str(self) -> &'static str {
        match self {
            UpdateKind::Broyden => "broyden",
            UpdateKind::Sr1 => "sr1",
            UpdateKind::Bfgs => "bfgs",
            UpdateKind::Dfp => "dfp",
        }
    }

    /// Relative threshold below which an update is skipped.
    pub fn default_skip_tol(self) -> f64 {
        match self {
            UpdateKind::Sr1 => 1e-8,
            UpdateKind::Bfgs | UpdateKind::Dfp => 1e-10,
            UpdateKind::Broyden => 0.0,
        }
    }
}

impl fmt::Display for UpdateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for UpdateKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::UnknownName {
                what: "hessian update",
                name: s.to_string(),
                valid: Self::ALL.map(|k| k.as_str()).join(", "),
            })
    }
}

/// Dense approximation `B` of a Hessian, updated from step/gradient-change
/// pairs so that `B_new d = w`.
///
/// Guards turn unsafe updates into skips instead of errors:
/// * SR1 skips when `|(w - Bd)^T d| <= tol * |d| * |w - Bd|`;
/// * BFGS and DFP skip when `w^T d <= tol * |w| * |d|`, and BFGS also when
///   `d^T B d <= 0`;
/// * Broyden skips only when `d = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct HessianApprox {
    b: Matrix,
    kind: UpdateKind,
    skip_tol: f64,
    n_updates: usize,
    n_skipped: usize,
}

impl HessianApprox {
    /// Identity approximation of size `n`.
    pub fn new(n: usize, kind: UpdateKind) -> Self {
        Self::from_matrix(Matrix::identity(n, n), kind)
    }

    pub fn from_matrix(b: Matrix, kind: UpdateKind) -> Self {
        Self {
            b,
            kind,
            skip_tol: kind.default_skip_tol(),
            n_updates: 0,
            n_skipped: 0,
        }
    }

    pub fn with_skip_tol(mut self, tol: f64) -> Self {
        self.skip_tol = tol;
        self
    }

    pub fn matrix(&self) -> &Matrix {
        &self.b
    }

    pub fn kind(&self) -> UpdateKind {
        self.kind
    }

    pub fn n_updates(&self) -> usize {
        self.n_updates
    }

    pub fn n_skipped(&self) -> usize {
        self.n_skipped
    }

    /// Resets `B` to the identity.
    pub fn reset(&mut self) {
        let n = self.b.nrows();
        self.b = Matrix::identity(n, n);
    }

    /// Applies the update for step `d` and gradient change `w`. Returns
    /// `false` when a guard skipped it, leaving `B` unchanged.
    pub fn update(&mut self, d: &Vector, w: &Vector) -> bool {
        let next = match self.kind {
            UpdateKind::Broyden => self.broyden(d, w),
            UpdateKind::Sr1 => self.sr1(d, w),
            UpdateKind::Bfgs => self.bfgs(d, w),
            UpdateKind::Dfp => self.dfp(d, w),
        };
        match next {
            Some(mut b) => {
                if self.kind != UpdateKind::Broyden {
                    b = (&b + b.transpose()) * 0.5;
                }
                self.b = b;
                self.n_updates += 1;
                true
            }
            None => {
                self.n_skipped += 1;
                false
            }
        }
    }

    fn broyden(&self, d: &Vector, w: &Vector) -> Option<Matrix> {
        let dd = d.dot(d);
        if dd == 0.0 {
            return None;
        }
        let r = w - &self.b * d;
        Some(&self.b + r * d.transpose() / dd)
    }

    fn sr1(&self, d: &Vector, w: &Vector) -> Option<Matrix> {
        let r = w - &self.b * d;
        let den = r.dot(d);
        if den.abs() <= self.skip_tol * d.norm() * r.norm() {
            return None;
        }
        Some(&self.b + &r * r.transpose() / den)
    }

    fn bfgs(&self, d: &Vector, w: &Vector) -> Option<Matrix> {
        let wd = w.dot(d);
        if wd <= self.skip_tol * w.norm() * d.norm() {
            return None;
        }
        let bd = &self.b * d;
        let dbd = d.dot(&bd);
        if dbd <= 0.0 {
            return None;
        }
        Some(&self.b - &bd * bd.transpose() / dbd + w * w.transpose() / wd)
    }

    fn dfp(&self, d: &Vector, w: &Vector) -> Option<Matrix> {
        let wd = w.dot(d);
        if wd <= self.skip_tol * w.norm() * d.norm() {
            return None;
        }
        let n = d.len();
        let left = Matrix::identity(n, n) - w * d.transpose() / wd;
        Some(&left * &self.b * left.transpose() + w * w.transpose() / wd)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{dmatrix, dvector};
    use proptest::prelude::*;

    #[test]
    fn bfgs_identity_with_satisfied_secant() {
        let mut h = HessianApprox::new(2, UpdateKind::Bfgs);
        assert!(h.update(&dvector![1.0, 0.0], &dvector![1.0, 0.0]));
        assert_eq!(h.matrix(), &Matrix::identity(2, 2));
    }

    #[test]
    fn sr1_hand_example() {
        let mut h = HessianApprox::new(2, UpdateKind::Sr1);
        assert!(h.update(&dvector![1.0, 0.0], &dvector![2.0, 0.0]));
        assert_eq!(h.matrix(), &dmatrix![2.0, 0.0; 0.0, 1.0]);
    }

    #[test]
    fn sr1_skips_when_secant_holds() {
        let mut h = HessianApprox::new(2, UpdateKind::Sr1);
        assert!(!h.update(&dvector![0.3, -0.2], &dvector![0.3, -0.2]));
        assert_eq!(h.n_skipped(), 1);
        assert_eq!(h.matrix(), &Matrix::identity(2, 2));
    }

    #[test]
    fn bfgs_and_dfp_skip_negative_curvature() {
        for kind in [UpdateKind::Bfgs, UpdateKind::Dfp] {
            let mut h = HessianApprox::new(2, kind);
            assert!(!h.update(&dvector![1.0, 0.0], &dvector![-1.0, 0.0]));
            assert_eq!(h.matrix(), &Matrix::identity(2, 2));
        }
    }

    #[test]
    fn broyden_skips_zero_step() {
        let mut h = HessianApprox::new(2, UpdateKind::Broyden);
        assert!(!h.update(&dvector![0.0, 0.0], &dvector![1.0, 0.0]));
    }

    #[test]
    fn parse_names() {
        assert_eq!("dfp".parse::<UpdateKind>().unwrap(), UpdateKind::Dfp);
        assert!("psb".parse::<UpdateKind>().is_err());
    }

    fn pair(n: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (
            proptest::collection::vec(-10.0..10.0f64, n),
            proptest::collection::vec(-10.0..10.0f64, n),
        )
    }

    proptest! {
        #[test]
        fn dfp_secant_and_symmetry((d, w) in pair(5)) {
            let d = Vector::from_vec(d);
            let mut w = Vector::from_vec(w);
            if w.dot(&d) <= 0.0 {
                w = -w;
            }
            let mut h = HessianApprox::new(5, UpdateKind::Dfp);
            if h.update(&d, &w) {
                let b = h.matrix();
                prop_assert!((b * &d - &w).norm() <= 1e-9 * (b.norm() * d.norm() + w.norm()));
                prop_assert!((b - b.transpose()).amax() <= 1e-12 * b.amax());
            }
        }
    }
}
