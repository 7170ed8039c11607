//! Command-line front end for `qsl-core`: configuration, complex spectral
//! parameters on the command line, the subcommands, and the self-test suite.

pub mod checks;
pub mod commands;
pub mod config;
pub mod lambda;

pub use config::RunConfig;
pub use lambda::parse_lambda;
