//! Break-and-Make brick assembly simulator: file formats, assembly model,
//! rendering, the two-phase environment, comparison metrics, dataset
//! generation and an expert planner.

pub mod api;
pub mod assembly;
pub mod brickfile;
pub mod datagen;
pub mod env;
pub mod math;
pub mod metrics;
pub mod planner;
pub mod raster;
