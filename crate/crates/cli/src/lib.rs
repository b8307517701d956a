//! Batch audits over `edia-core`, and the library side of the `edia`
//! binary.

pub mod audit;
pub mod commands;
pub mod config;
pub mod error;
pub mod manifest;

pub use audit::{run_audit, AuditOutcome};
pub use error::CliError;
