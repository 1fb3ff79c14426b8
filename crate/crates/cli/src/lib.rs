//! The `ship` command-line tool.

pub mod args;
pub mod commands;
pub mod error;
pub mod explain;
pub mod manifest;

pub use args::{Cli, Command, GlobalArgs};
pub use commands::{run, MetricsReport};
pub use error::{CliError, CliResult};
pub use explain::{emit_plot_data, ExplainReport};
pub use manifest::RunManifest;
