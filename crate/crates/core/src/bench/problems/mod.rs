//! Problem definitions used by the registry.

pub mod analytic;
pub mod cantilever;
pub mod spacecraft;
