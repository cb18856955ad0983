//! Built-in test problems, suite runs and performance/data profiles.

pub mod problems;
pub mod profile;
pub mod registry;
pub mod suite;

pub use profile::{data_profile, performance_profile, write_profile_csv, Profile, ProfileTable};
pub use registry::{make_problem, KnownSolution, TestProblem};
pub use suite::{run_suite, run_suite_with, CostKind, RunSummary, SuiteConfig, SuiteProblem, SuiteResult};
