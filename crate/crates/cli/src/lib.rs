//! Command line front end for the temporal graph engine: dataset manifests
//! and the tab-separated interchange format, an expression and pipeline DSL,
//! a pipeline runner over the physical representations, use-case pipelines,
//! and a cold-start benchmark harness.

pub mod benchrun;
pub mod dsl;
pub mod exprs;
pub mod loader;
pub mod manifest;
pub mod runner;
pub mod usecases;

pub use dsl::{parse_pipeline, Pipeline, PipelineError, Statement};
pub use loader::{load, load_path, save, LoadError};
pub use manifest::{DatasetManifest, ManifestFile, TimeMapper};
pub use runner::{run_pipeline, RunOptions, RunReport};
