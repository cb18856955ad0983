//! Backtracking (Armijo) and strong-Wolfe line searches on a scalar
//! function `phi(alpha) = f(x + alpha p)`.

use std::fmt;
use std::str::FromStr;

use crate::{Error, Result, Vector};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LineSearchKind {
    Armijo,
    Wolfe,
}

impl LineSearchKind {
    pub fn as_str(self) -> &'static str {
        match self {
            LineSearchKind::Armijo => "armijo",
            LineSearchKind::Wolfe => "wolfe",
        }
    }
}

impl fmt::Display for LineSearchKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LineSearchKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "armijo" => Ok(LineSearchKind::Armijo),
            "wolfe" => Ok(LineSearchKind::Wolfe),
            _ => Err(Error::UnknownName {
                what: "line search",
                name: s.to_string(),
                valid: "armijo, wolfe".into(),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineSearchParams {
    /// Sufficient-decrease constant.
    pub c1: f64,
    /// Curvature constant (Wolfe only).
    pub c2: f64,
    /// Backtracking factor.
    pub tau: f64,
    /// Maximum number of trial steps.
    pub max_iters: usize,
    /// First trial step.
    pub alpha0: f64,
    /// Backtrack to the minimizer of the quadratic interpolating `phi(0)`,
    /// `phi'(0)` and the rejected trial, kept within `[0.1, 0.5]` times the
    /// rejected step, instead of multiplying by `tau`.
    pub interpolate: bool,
}

impl Default for LineSearchParams {
    fn default() -> Self {
        Self {
            c1: 1e-4,
            c2: 0.9,
            tau: 0.5,
            max_iters: 30,
            alpha0: 1.0,
            interpolate: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineSearchResult {
    pub alpha: f64,
    pub f_new: f64,
    /// Gradient at the accepted point, when the search computed it.
    pub g_new: Option<Vector>,
    pub n_f_evals: usize,
    pub n_g_evals: usize,
    pub converged: bool,
}

/// Runs the requested search. For `Armijo` only the function value returned
/// by `phi` is used and the gradient payload is discarded.
pub fn line_search(
    kind: LineSearchKind,
    mut phi: impl FnMut(f64) -> Result<(f64, f64, Vector)>,
    f0: f64,
    slope0: f64,
    params: &LineSearchParams,
) -> Result<LineSearchResult> {
    match kind {
        LineSearchKind::Armijo => armijo(|a| phi(a).map(|t| t.0), f0, slope0, params),
        LineSearchKind::Wolfe => wolfe(phi, f0, slope0, params),
    }
}

/// Backtracking over `alpha0, alpha0 tau, alpha0 tau^2, ...` until
/// `phi(alpha) <= f0 + c1 alpha slope0`. With `params.interpolate` the
/// trials come from safeguarded quadratic interpolation instead.
///
/// When no trial passes within `max_iters`, the trial with the lowest value
/// is returned with `converged = false`.
pub fn armijo(
    mut phi: impl FnMut(f64) -> Result<f64>,
    f0: f64,
    slope0: f64,
    params: &LineSearchParams,
) -> Result<LineSearchResult> {
    if slope0.is_nan() || slope0 >= 0.0 {
        return Err(Error::NotDescent(slope0));
    }
    let mut alpha = params.alpha0;
    let mut best = (alpha, f64::INFINITY);
    for k in 0..params.max_iters {
        let f = phi(alpha)?;
        if f <= f0 + params.c1 * alpha * slope0 {
            return Ok(LineSearchResult {
                alpha,
                f_new: f,
                g_new: None,
                n_f_evals: k + 1,
                n_g_evals: 0,
                converged: true,
            });
        }
        if f < best.1 {
            best = (alpha, f);
        }
        alpha = if params.interpolate {
            let den = 2.0 * (f - f0 - slope0 * alpha);
            let a = -slope0 * alpha * alpha / den;
            if a.is_finite() && den > 0.0 {
                a.clamp(0.1 * alpha, 0.5 * alpha)
            } else {
                0.5 * alpha
            }
        } else {
            alpha * params.tau
        };
    }
    Ok(LineSearchResult {
        alpha: best.0,
        f_new: best.1,
        g_new: None,
        n_f_evals: params.max_iters,
        n_g_evals: 0,
        converged: false,
    })
}

/// Bracket-and-zoom search for a step satisfying the strong Wolfe
/// conditions
///
/// ```text
/// phi(alpha) <= f0 + c1 alpha slope0,    |phi'(alpha)| <= c2 |slope0|.
/// ```
///
/// `phi` returns the value, the slope and the gradient at `alpha`; the
/// gradient of the accepted point is passed back in `g_new`. When the trial
/// budget runs out, the best trial satisfying sufficient decrease (or else
/// the lowest trial) is returned with `converged = false`.
pub fn wolfe(
    mut phi: impl FnMut(f64) -> Result<(f64, f64, Vector)>,
    f0: f64,
    slope0: f64,
    params: &LineSearchParams,
) -> Result<LineSearchResult> {
    if slope0.is_nan() || slope0 >= 0.0 {
        return Err(Error::NotDescent(slope0));
    }
    let (c1, c2) = (params.c1, params.c2);
    let mut evals = 0;
    // best Armijo-satisfying trial so far, and the lowest trial overall
    let mut fallback: Option<Trial> = None;
    let mut lowest: Option<Trial> = None;
    let note = |t: &Trial, fallback: &mut Option<Trial>, lowest: &mut Option<Trial>| {
        if t.f <= f0 + c1 * t.alpha * slope0 && fallback.as_ref().is_none_or(|b| t.f < b.f) {
            *fallback = Some(t.clone());
        }
        if lowest.as_ref().is_none_or(|b| t.f < b.f) {
            *lowest = Some(t.clone());
        }
    };

    let mut prev = Trial {
        alpha: 0.0,
        f: f0,
        slope: slope0,
        g: None,
    };
    let mut alpha = params.alpha0;
    let mut bracket = None;
    while evals < params.max_iters {
        let t = Trial::eval(&mut phi, alpha)?;
        evals += 1;
        note(&t, &mut fallback, &mut lowest);
        if t.f > f0 + c1 * alpha * slope0 || (evals > 1 && t.f >= prev.f) {
            bracket = Some((prev, t));
            break;
        }
        if t.slope.abs() <= -c2 * slope0 {
            return Ok(t.accept(evals, true));
        }
        if t.slope >= 0.0 {
            bracket = Some((t, prev));
            break;
        }
        prev = t;
        alpha *= 2.0;
    }

    if let Some((mut lo, mut hi)) = bracket {
        while evals < params.max_iters {
            let alpha = interpolate(&lo, &hi);
            let t = Trial::eval(&mut phi, alpha)?;
            evals += 1;
            note(&t, &mut fallback, &mut lowest);
            if t.f > f0 + c1 * alpha * slope0 || t.f >= lo.f {
                hi = t;
            } else {
                if t.slope.abs() <= -c2 * slope0 {
                    return Ok(t.accept(evals, true));
                }
                if t.slope * (hi.alpha - lo.alpha) >= 0.0 {
                    hi = lo;
                }
                lo = t;
            }
            if (hi.alpha - lo.alpha).abs() <= f64::EPSILON * lo.alpha.abs().max(1.0) {
                break;
            }
        }
    }

    let t = fallback.or(lowest).expect("max_iters is at least one");
    Ok(t.accept(evals, false))
}

#[derive(Debug, Clone)]
struct Trial {
    alpha: f64,
    f: f64,
    slope: f64,
    g: Option<Vector>,
}

impl Trial {
    fn eval(phi: &mut impl FnMut(f64) -> Result<(f64, f64, Vector)>, alpha: f64) -> Result<Self> {
        let (f, slope, g) = phi(alpha)?;
        Ok(Self {
            alpha,
            f,
            slope,
            g: Some(g),
        })
    }

    fn accept(self, evals: usize, converged: bool) -> LineSearchResult {
        LineSearchResult {
            alpha: self.alpha,
            f_new: self.f,
            g_new: self.g,
            n_f_evals: evals,
            n_g_evals: evals,
            converged,
        }
    }
}

/// Minimizer of the quadratic through `lo` (value and slope) and `hi`
/// (value), kept at least a tenth of the interval away from either end.
fn interpolate(lo: &Trial, hi: &Trial) -> f64 {
    let d = hi.alpha - lo.alpha;
    let den = 2.0 * (hi.f - lo.f - lo.slope * d);
    let mid = lo.alpha + 0.5 * d;
    let a = if den.abs() > 0.0 && den.is_finite() {
        lo.alpha - lo.slope * d * d / den
    } else {
        mid
    };
    let (left, right) = if d > 0.0 { (lo.alpha, hi.alpha) } else { (hi.alpha, lo.alpha) };
    let margin = 0.1 * d.abs();
    if !a.is_finite() || a < left + margin || a > right - margin {
        mid
    } else {
        a
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;
    use proptest::prelude::*;

    #[test]
    fn armijo_accepts_unit_step() {
        // f(x) = x^2 at x = 1 along p = -1
        let r = armijo(|a| Ok((1.0 - a).powi(2)), 1.0, -2.0, &LineSearchParams::default()).unwrap();
        assert_eq!(r.alpha, 1.0);
        assert_eq!(r.n_f_evals, 1);
        assert!(r.converged);
    }

    #[test]
    fn armijo_backtracks_to_quarter() {
        // f(x) = x^2 at x = 1 along p = -4, slope -8
        let params = LineSearchParams {
            c1: 0.5,
            ..Default::default()
        };
        let mut trials = Vec::new();
        let r = armijo(
            |a| {
                trials.push(a);
                Ok((1.0 - 4.0 * a).powi(2))
            },
            1.0,
            -8.0,
            &params,
        )
        .unwrap();
        assert_eq!(trials, vec![1.0, 0.5, 0.25]);
        assert_eq!(r.alpha, 0.25);
        assert_eq!(r.f_new, 0.0);
    }

    #[test]
    fn ascent_direction_rejected() {
        let p = LineSearchParams::default();
        assert!(matches!(armijo(|a| Ok(a), 0.0, 1.0, &p), Err(Error::NotDescent(_))));
        assert!(wolfe(|a| Ok((a, 1.0, dvector![])), 0.0, 1.0, &p).is_err());
    }

    #[test]
    fn interpolating_backtrack() {
        // same data as above: the interpolant of 1, -8 and phi(1) = 9 has its
        // minimum at 0.25, inside [0.1, 0.5]
        let params = LineSearchParams {
            c1: 0.5,
            interpolate: true,
            ..Default::default()
        };
        let mut trials = Vec::new();
        let r = armijo(
            |a| {
                trials.push(a);
                Ok((1.0 - 4.0 * a).powi(2))
            },
            1.0,
            -8.0,
            &params,
        )
        .unwrap();
        assert_eq!(trials, vec![1.0, 0.25]);
        assert!(r.converged);
    }

    #[test]
    fn armijo_failure_returns_best() {
        let params = LineSearchParams {
            max_iters: 3,
            ..Default::default()
        };
        let r = armijo(|a| Ok(1.0 + a), 1.0, -1.0, &params).unwrap();
        assert!(!r.converged);
        assert_eq!(r.alpha, 0.25);
    }

    #[test]
    fn wolfe_on_shifted_parabola() {
        let phi = |a: f64| Ok(((a - 1.0).powi(2), 2.0 * (a - 1.0), dvector![2.0 * (a - 1.0)]));
        let r = wolfe(phi, 1.0, -2.0, &LineSearchParams::default()).unwrap();
        assert!(r.converged);
        assert!((2.0 * (r.alpha - 1.0)).abs() <= 0.9 * 2.0);
        assert_eq!(r.g_new.unwrap()[0], 2.0 * (r.alpha - 1.0));
    }

    #[test]
    fn wolfe_expands_short_initial_step() {
        // minimum at alpha = 100; the first trial alpha = 1 has slope -198
        let phi = |a: f64| Ok(((a - 100.0).powi(2), 2.0 * (a - 100.0), dvector![]));
        let r = wolfe(phi, 1e4, -200.0, &LineSearchParams::default()).unwrap();
        assert!(r.converged);
        assert!(r.alpha > 1.0);
        assert!((2.0 * (r.alpha - 100.0)).abs() <= 0.9 * 200.0);
    }

    proptest! {
        #[test]
        fn wolfe_conditions_hold_on_quadratics(scale in 0.01..100.0f64, shift in 0.01..50.0f64) {
            // phi(a) = scale (a - shift)^2
            let phi = |a: f64| Ok((scale * (a - shift).powi(2), 2.0 * scale * (a - shift), dvector![]));
            let f0 = scale * shift * shift;
            let s0 = -2.0 * scale * shift;
            let p = LineSearchParams::default();
            let r = wolfe(phi, f0, s0, &p).unwrap();
            prop_assert!(r.converged);
            prop_assert!(r.f_new <= f0 + p.c1 * r.alpha * s0);
            prop_assert!((2.0 * scale * (r.alpha - shift)).abs() <= p.c2 * s0.abs());
        }
    }
}
