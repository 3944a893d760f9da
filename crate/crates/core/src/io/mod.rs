//! Datasets, trajectory files and run configuration.

mod config;
mod sequence;
mod trajectory;

pub use config::RunConfig;
pub use sequence::*;
pub use trajectory::*;
