use thiserror::Error;

use crate::problem::EvalKind;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid problem definition: {0}")]
    InvalidProblem(String),

    #[error("dimension mismatch for {what}: expected {expected}, got {got}")]
    Dimension {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("{kind} evaluation returned a non-finite value at x = {iterate:?}")]
    NonFinite { kind: EvalKind, iterate: Vec<f64> },

    #[error("no {0} callback and finite differencing is disabled")]
    MissingCallback(EvalKind),

    #[error("{0}")]
    Unsupported(String),

    #[error("singular linear system: {0}")]
    Singular(String),

    #[error("search direction is not a descent direction (slope {0:e})")]
    NotDescent(f64),

    #[error("QP subproblem is infeasible")]
    QpInfeasible,

    #[error("QP active-set iteration exceeded {0} working-set changes")]
    QpCycle(usize),

    #[error("solver failed: {0}")]
    SolverFailure(String),

    #[error("unknown option `{name}`; valid options: {valid}")]
    UnknownOption { name: String, valid: String },

    #[error("option `{name}` expects a value of type {expected}, got `{got}`")]
    OptionType {
        name: String,
        expected: &'static str,
        got: String,
    },

    #[error("output `{0}` was not declared")]
    UndeclaredOutput(String),

    #[error("output `{name}` has the wrong shape: {detail}")]
    OutputShape { name: String, detail: String },

    #[error("record I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("record line {line}: {message}")]
    RecordParse { line: usize, message: String },

    #[error("unsupported record format version {0}")]
    RecordVersion(i64),

    #[error("record is incompatible with this problem: {0}")]
    IncompatibleRecord(String),

    #[error("wall-clock budget of {0:.3} s exceeded")]
    BudgetExceeded(f64),

    #[error("unknown {what} `{name}`; valid names: {valid}")]
    UnknownName {
        what: &'static str,
        name: String,
        valid: String,
    },

    #[error("CSV export failed: {0}")]
    Csv(#[from] csv::Error),
}
