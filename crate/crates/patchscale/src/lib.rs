//! File formats, the staged pipeline and the command line around
//! `patchscale-core`.
//!
//! Stages communicate only through files in the output directory, so each
//! can be re-run on its own: `synth` writes a tape, `ingest` filters firms,
//! `segment` exports segmentations and patches, `analyze` fits tails,
//! allometry and lognormality per stock and pooled, and `report` assembles
//! `report.json` with CSV tables and plot data.

pub mod cli;
pub mod config;
pub mod csvio;
pub mod error;
pub mod pipeline;
pub mod plot;
pub mod report;

pub use error::{AppError, Result};
pub use patchscale_core;
