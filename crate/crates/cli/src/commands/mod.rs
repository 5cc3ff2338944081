pub mod demo;
pub mod latency;
pub mod plan;
pub mod selftest;
pub mod simulate;

/// A command-line usage problem: exits with status 2, like a parse error.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct UsageError(pub String);
