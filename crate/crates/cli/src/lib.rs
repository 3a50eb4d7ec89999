//! Driver layer for the wave-map solver: configuration files, initial-data
//! synthesis, convergence studies, self-check diagnostics and on-disk formats.
//!
//! The numerics live in `wavemaps-core`; this crate owns everything that
//! touches files, threads or the process environment.

pub mod commands;
pub mod config;
pub mod data;
pub mod diagnostics;
pub mod format;
pub mod report;
pub mod study;
