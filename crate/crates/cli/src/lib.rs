//! Scenario runner and figure regeneration on top of `specshare`.

pub mod error;
pub mod figures;
pub mod run;
pub mod scenario;
pub mod verify;

pub use error::CliError;
