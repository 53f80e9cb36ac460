//! Declarative scenario runner for the qle toolkit.
//!
//! Scenarios live in a line-oriented config file and map one-to-one onto
//! toolkit operations; see [`scenario`] for the format and the runner.

pub mod scenario;
