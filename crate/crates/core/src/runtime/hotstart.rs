//! Sequential replay of recorded evaluations.

use super::record::{EvalEvent, RunRecord};
use crate::problem::{EvalKind, EvalValue, ProblemSpec};
use crate::{Error, Result, Vector};

/// Replays the evaluations of an earlier run in order.
///
/// Each request is compared bit-for-bit with the event under the cursor. The
/// first mismatch (or running past the end of the record) switches the cache
/// to live mode for good, after which every request is evaluated fresh.
#[derive(Debug, Clone)]
pub struct HotStartCache {
    events: Vec<EvalEvent>,
    cursor: usize,
    live: bool,
}

impl HotStartCache {
    /// Builds a cache for `spec` from `source`, rejecting records written for
    /// a different problem, dimension or scaling.
    pub fn new(source: &RunRecord, spec: &ProblemSpec) -> Result<Self> {
        let h = &source.header;
        if h.problem != spec.name() {
            return Err(Error::IncompatibleRecord(format!(
                "record is for problem `{}`, not `{}`",
                h.problem,
                spec.name()
            )));
        }
        if h.n != spec.n() || h.m != spec.m() {
            return Err(Error::IncompatibleRecord(format!(
                "record has n={}, m={}; problem has n={}, m={}",
                h.n,
                h.m,
                spec.n(),
                spec.m()
            )));
        }
        let same = |a: &Vector, b: &Vector| {
            a.len() == b.len() && a.iter().zip(b.iter()).all(|(p, q)| p.to_bits() == q.to_bits())
        };
        let s = spec.scalers();
        if !same(&h.scalers.x, &s.x) || h.scalers.f.to_bits() != s.f.to_bits() || !same(&h.scalers.c, &s.c) {
            return Err(Error::IncompatibleRecord("scalers differ".into()));
        }
        Ok(Self {
            events: source.evals().cloned().collect(),
            cursor: 0,
            live: false,
        })
    }

    pub fn is_live(&self) -> bool {
        self.live
    }

    pub fn cursor(&self) -> usize {
        self.cursor
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Returns the recorded result when the next event matches the request;
    /// otherwise switches to live mode and returns `None`.
    pub fn lookup(&mut self, kind: EvalKind, x: &Vector, lam: Option<&Vector>) -> Option<EvalValue> {
        if self.live {
            return None;
        }
        match self.events.get(self.cursor) {
            Some(ev) if ev.matches(kind, x, lam) => {
                self.cursor += 1;
                Some(ev.result.clone())
            }
            _ => {
                self.live = true;
                None
            }
        }
    }
}
