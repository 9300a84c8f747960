//! Batch front end: configuration files, convergence studies and the exact
//! algebra suite.

pub mod config;
pub mod error;
pub mod study;
pub mod verify;

pub use config::{Mode, Reference, StudyConfig};
pub use error::{CliError, Result};
pub use study::{emit_plotdata, run_study, StudyTable};
pub use verify::verify_algebra;
