//! Command implementations and report rendering for the `ghz-comm` binary.

pub mod commands;
pub mod report;
