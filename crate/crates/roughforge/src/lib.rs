//! JSON/CSV formats, verification suites and the `roughforge` command line
//! over [`roughforge_core`].

pub mod cli;
pub mod error;
pub mod format;
pub mod verify;

pub use error::CliError;
