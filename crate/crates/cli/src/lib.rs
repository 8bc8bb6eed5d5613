//! Configuration loading, trace output, builtin experiments and diagnostic
//! suites for the `scg` command.

pub mod builtins;
pub mod config;
pub mod report;
pub mod runner;
pub mod verify;
