//! Command-line layer: instance files, commands and the reproduction corpus.

pub mod commands;
pub mod corpus;
pub mod error;
pub mod instance;
pub mod output;
pub mod text;

pub use error::{CliError, CliResult};
pub use instance::{parse_instance, parse_instance_str, serialize_instance, InstanceFile};
