//! Top-down table structure recovery.
//!
//! A table is described by a small latent *genotype* (origin, row heights,
//! column widths). This crate renders genotypes into scan and skeleton
//! images, estimates a genotype from a skeleton by axis projection, refines
//! it with a genetic algorithm against an image-distance objective, and
//! scores estimates against ground truth.

pub mod cli;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod ga;
pub mod io;
pub mod model;
pub mod objectives;
pub mod raster;
pub mod rng;
pub mod skeleton;
pub mod xyinit;

pub use error::{Error, Result};
pub use model::{PageSpec, TableConfig, TableGenotype};
pub use raster::{RasterImage, RenderStyle};
