//! Configuration, dispatch, result tables and reproduction recipes behind the `tfim` binary.

pub mod config;
pub mod error;
pub mod fit;
pub mod reproduce;
pub mod run;
pub mod table;

pub use config::{BackendKind, Format, QmcControls, RunConfig};
pub use error::{CliError, Result};
pub use table::{Cell, Table};
