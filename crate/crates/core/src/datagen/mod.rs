//! Data pipeline: random constructions, greedy slicing of larger models,
//! dataset manifests, frequency statistics and the symmetry sidecar.

mod dataset;
mod generator;
mod slice;
mod stats;

pub use dataset::{
    make_dataset, DatasetConfig, DatasetError, DatasetManifest, Failure, ManifestEntry, SourceFile, SourceSpec, Split,
    MANIFEST_FILE,
};
pub use generator::{random_assembly, GenerateError, GeneratorConfig};
pub use slice::slice_assembly;
pub use stats::{frequency_stats, FrequencyReport};

use std::path::Path;

use crate::assembly::{compute_symmetries, SymmetryConfig, SymmetryError, SymmetryTable};
use crate::brickfile::ShapeLibrary;

#[derive(Debug, thiserror::Error)]
pub enum SymtableError {
    #[error(transparent)]
    Render(#[from] SymmetryError),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

/// Compute the symmetry table for every library shape and, if `out` is
/// given, write it as a `sym` sidecar.
pub fn build_symmetry_table(library: &ShapeLibrary, out: Option<&Path>) -> Result<SymmetryTable, SymtableError> {
    let cfg = SymmetryConfig::default();
    let mut table = SymmetryTable::default();
    for shape in library.shapes() {
        table.insert(shape.shape_id, compute_symmetries(shape, &cfg)?);
    }
    if let Some(path) = out {
        std::fs::write(path, table.to_text())
            .map_err(|e| SymtableError::Io { path: path.display().to_string(), message: e.to_string() })?;
    }
    Ok(table)
}
