//! Verification of analytic first derivatives against forward differences.

use std::fmt;

use super::{EvalKind, ScaledView};
use crate::{Matrix, Result, Vector};

/// Entries whose relative error exceeds this are flagged.
pub const FLAG_THRESHOLD: f64 = 1e-4;

/// Comparison of one analytic derivative with its finite-difference estimate.
#[derive(Debug, Clone)]
pub struct EntryCheck {
    pub analytic: Matrix,
    pub fd: Matrix,
    /// `|analytic - fd| / max(1, |analytic|)` per entry.
    pub rel_error: Matrix,
    pub max_rel_error: f64,
    /// `(row, col)` of entries above [`FLAG_THRESHOLD`].
    pub flagged: Vec<(usize, usize)>,
}

impl EntryCheck {
    fn compare(analytic: Matrix, fd: Matrix) -> Self {
        let rel_error = analytic.zip_map(&fd, |a, f| (a - f).abs() / a.abs().max(1.0));
        let max_rel_error = rel_error.iter().copied().fold(0.0, f64::max);
        let mut flagged = Vec::new();
        for c in 0..rel_error.ncols() {
            for r in 0..rel_error.nrows() {
                if rel_error[(r, c)] > FLAG_THRESHOLD {
                    flagged.push((r, c));
                }
            }
        }
        flagged.sort_unstable();
        Self {
            analytic,
            fd,
            rel_error,
            max_rel_error,
            flagged,
        }
    }
}

/// Result of [`check_first_derivatives`]. A section is `None` when the
/// problem has no analytic callback for it (or no constraints).
#[derive(Debug, Clone)]
pub struct DerivativeCheck {
    pub gradient: Option<EntryCheck>,
    pub jacobian: Option<EntryCheck>,
}

impl DerivativeCheck {
    pub fn max_rel_error(&self) -> f64 {
        [&self.gradient, &self.jacobian]
            .into_iter()
            .flatten()
            .map(|c| c.max_rel_error)
            .fold(0.0, f64::max)
    }

    pub fn passed(&self) -> bool {
        [&self.gradient, &self.jacobian]
            .into_iter()
            .flatten()
            .all(|c| c.flagged.is_empty())
    }
}

impl fmt::Display for DerivativeCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sections = [("gradient", &self.gradient), ("jacobian", &self.jacobian)];
        for (name, section) in sections {
            match section {
                None => writeln!(f, "{name}: not checked")?,
                Some(c) => {
                    writeln!(
                        f,
                        "{name}: max relative error {:.3e}, {} flagged",
                        c.max_rel_error,
                        c.flagged.len()
                    )?;
                    for &(r, col) in c.flagged.iter().take(20) {
                        writeln!(
                            f,
                            "  [{r},{col}] analytic {:.10e} fd {:.10e} rel {:.3e}",
                            c.analytic[(r, col)],
                            c.fd[(r, col)],
                            c.rel_error[(r, col)]
                        )?;
                    }
                }
            }
        }
        write!(f, "result: {}", if self.passed() { "pass" } else { "FAIL" })
    }
}

/// Compares the analytic gradient and Jacobian at the scaled point `x` with
/// forward differences.
pub fn check_first_derivatives(view: &mut ScaledView<'_>, x: &Vector) -> Result<DerivativeCheck> {
    let callbacks = view.spec().callbacks().clone();
    let has = |k| callbacks.has(k);
    let gradient = if has(EvalKind::Grad) {
        let a = view.gradient(x)?;
        let fd = view.fd_derivative(EvalKind::Grad, x, None)?.into_vector();
        Some(EntryCheck::compare(
            Matrix::from_column_slice(a.len(), 1, a.as_slice()),
            Matrix::from_column_slice(fd.len(), 1, fd.as_slice()),
        ))
    } else {
        None
    };
    let jacobian = if view.m() > 0 && has(EvalKind::Jac) {
        let a = view.jacobian(x)?;
        let fd = view.fd_derivative(EvalKind::Jac, x, None)?.into_matrix();
        Some(EntryCheck::compare(a, fd))
    } else {
        None
    };
    Ok(DerivativeCheck { gradient, jacobian })
}
