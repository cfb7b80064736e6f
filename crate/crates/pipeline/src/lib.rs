//! Drivers behind the `holoembed` command line.

// negated comparisons reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod artifacts;
pub mod basin;
pub mod config;
pub mod error;
pub mod jordan;
pub mod svg;
pub mod torus;
pub mod wp;

pub use artifacts::{RunArtifacts, RunReport};
pub use config::{BasinConfig, Overrides, TorusConfig};
pub use error::{PipelineError, Result};
pub use basin::pipeline_basin_demo;
pub use jordan::pipeline_jordan;
pub use torus::pipeline_torus2;
