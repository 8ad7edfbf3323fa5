//! Command-line front end for the `qsync` library: config parsing, dataset
//! and metadata writers, and the subcommand/figure implementations. Kept in
//! a library target so the integration tests drive the same code paths as
//! the `qsync` binary.

pub mod commands;
pub mod config;
pub mod figures;
pub mod output;
