//! Detection of hidden-order patches in signed trade flow and the scaling
//! statistics built on them.
//!
//! The crate is `no_std` (with `alloc`); file formats, the pipeline driver
//! and the command line live in the `patchscale` crate.

#![no_std]

extern crate alloc;

pub mod allometry;
pub mod error;
pub mod lognorm;
pub mod market;
mod math;
pub mod patch;
pub mod rng;
pub mod segment;
pub mod special;
pub mod synth;
pub mod tail;

pub use error::{Error, Result};
