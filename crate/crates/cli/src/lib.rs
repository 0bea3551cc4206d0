//! Batch runs and the HTTP service behind the `crosscheck` binary.

pub mod commands;
pub mod service;

pub use commands::{explain_command, load_plan, run_command, ExplainArgs, InputError, RunArgs, RunOutcome};
pub use service::{router, Store};
