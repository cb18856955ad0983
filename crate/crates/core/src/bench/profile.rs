//! Performance and data profiles over a solver-by-problem cost table.

use std::io::Write;
use std::path::Path;

use crate::{Error, Result};

/// Costs of each solver on each problem; unsolved entries cost `+inf`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileTable {
    pub solvers: Vec<String>,
    pub problems: Vec<String>,
    /// `cost[s][p]`.
    pub cost: Vec<Vec<f64>>,
    /// `solved[s][p]`.
    pub solved: Vec<Vec<bool>>,
}

impl ProfileTable {
    /// Builds a table, forcing the cost of every unsolved entry to `+inf`.
    /// Solved entries must have finite, non-negative cost.
    pub fn new(solvers: Vec<String>, problems: Vec<String>, mut cost: Vec<Vec<f64>>, solved: Vec<Vec<bool>>) -> Result<Self> {
        let shape_ok = cost.len() == solvers.len()
            && solved.len() == solvers.len()
            && cost.iter().all(|r| r.len() == problems.len())
            && solved.iter().all(|r| r.len() == problems.len());
        if !shape_ok {
            return Err(Error::Dimension {
                what: "profile table",
                expected: solvers.len() * problems.len(),
                got: cost.iter().map(Vec::len).sum(),
            });
        }
        for (row, ok) in cost.iter_mut().zip(&solved) {
            for (c, &s) in row.iter_mut().zip(ok) {
                if !s {
                    *c = f64::INFINITY;
                } else if !(c.is_finite() && *c >= 0.0) {
                    return Err(Error::InvalidProblem(format!("solved entry has invalid cost {c}")));
                }
            }
        }
        Ok(Self {
            solvers,
            problems,
            cost,
            solved,
        })
    }

    /// Per-problem minimum over solvers that solved it (`+inf` if none did).
    fn best(&self) -> Vec<f64> {
        (0..self.problems.len())
            .map(|p| self.cost.iter().map(|row| row[p]).fold(f64::INFINITY, f64::min))
            .collect()
    }
}

/// Right-continuous step function `x -> fraction`, stored as sorted
/// breakpoints where the fraction increases.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    pub solver: String,
    pub breakpoints: Vec<(f64, f64)>,
}

impl Profile {
    fn from_ratios(solver: &str, ratios: &[f64]) -> Self {
        let total = ratios.len() as f64;
        let mut finite: Vec<f64> = ratios.iter().copied().filter(|r| r.is_finite()).collect();
        finite.sort_by(f64::total_cmp);
        let mut breakpoints: Vec<(f64, f64)> = Vec::new();
        for (k, &r) in finite.iter().enumerate() {
            let frac = (k + 1) as f64 / total;
            match breakpoints.last_mut() {
                Some(last) if last.0 == r => last.1 = frac,
                _ => breakpoints.push((r, frac)),
            }
        }
        Self {
            solver: solver.to_string(),
            breakpoints,
        }
    }

    /// Fraction of problems with ratio at most `x`.
    pub fn at(&self, x: f64) -> f64 {
        self.breakpoints
            .iter()
            .take_while(|(b, _)| *b <= x)
            .last()
            .map_or(0.0, |(_, f)| *f)
    }
}

/// `rho_s(tau) = |{p : cost_sp / min_s cost_sp <= tau}| / |P|`.
pub fn performance_profile(table: &ProfileTable) -> Vec<Profile> {
    let best = table.best();
    table
        .solvers
        .iter()
        .zip(&table.cost)
        .map(|(s, row)| {
            let ratios: Vec<f64> = row
                .iter()
                .zip(&best)
                .map(|(&c, &b)| {
                    if !c.is_finite() {
                        f64::INFINITY
                    } else if b > 0.0 {
                        c / b
                    } else if c == 0.0 {
                        1.0
                    } else {
                        // solved, but infinitely worse than a zero-cost best
                        f64::MAX
                    }
                })
                .collect();
            Profile::from_ratios(s, &ratios)
        })
        .collect()
}

/// `d_s(kappa)`: fraction of problems solved within `kappa (n_p + 1)`
/// evaluations, where `dims[p] = n_p`.
pub fn data_profile(table: &ProfileTable, dims: &[usize]) -> Result<Vec<Profile>> {
    if dims.len() != table.problems.len() {
        return Err(Error::Dimension {
            what: "problem dimensions",
            expected: table.problems.len(),
            got: dims.len(),
        });
    }
    Ok(table
        .solvers
        .iter()
        .zip(&table.cost)
        .map(|(s, row)| {
            let ratios: Vec<f64> = row.iter().zip(dims).map(|(&c, &n)| c / (n as f64 + 1.0)).collect();
            Profile::from_ratios(s, &ratios)
        })
        .collect())
}

/// Writes `solver,breakpoint,fraction` rows.
pub fn write_profile_csv(profiles: &[Profile], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["solver", "breakpoint", "fraction"])?;
    for p in profiles {
        for (b, f) in &p.breakpoints {
            w.write_record([p.solver.as_str(), &b.to_string(), &f.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Plain-text table of the fraction each solver reaches at the given
/// abscissae.
pub fn format_profiles(profiles: &[Profile], at: &[f64]) -> String {
    let mut out = Vec::new();
    let _ = write!(out, "{:<22}", "solver");
    for x in at {
        let _ = write!(out, "{:>9}", format!("{x}"));
    }
    let _ = writeln!(out);
    for p in profiles {
        let _ = write!(out, "{:<22}", p.solver);
        for &x in at {
            let _ = write!(out, "{:>9.3}", p.at(x));
        }
        let _ = writeln!(out);
    }
    String::from_utf8(out).expect("ascii")
}
