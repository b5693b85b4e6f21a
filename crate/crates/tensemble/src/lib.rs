//! File formats, ensemble manifests and the pipeline commands around
//! [`tensemble_core`].

pub mod commands;
pub mod error;
pub mod manifest;
pub mod obj;
pub mod vtk;

pub use commands::{run, Command, LinesMode, Summary};
pub use error::CliError;
pub use manifest::{GeneratorKind, Manifest};
