//! Command-line pipeline and HTTP service around `drugshap-core`.

pub mod commands;
pub mod error;
pub mod server;

pub use commands::Context;
pub use error::CliError;
