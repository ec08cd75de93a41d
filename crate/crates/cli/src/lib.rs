//! Text format and command-line driver for pargraph.

pub mod app;
pub mod syntax;
