//! LDraw-dialect assembly files and the brick shape library.

pub mod color;
pub mod ldraw;
pub mod library;
pub mod shape;

pub use color::{resolve_color, ColorEntry, ColorTable, ResolvedColor};
pub use ldraw::{
    flatten, flatten_with_report, parse_ldraw, parse_ldraw_bytes, write_ldraw, FlattenError,
    FlattenReport, LdrawDocument, LdrawLine, ParseError, ParseErrorKind, Reference, SubModel,
};
pub use library::{load_shape_library, normalize_name, LibraryConfig, LibraryError, ShapeLibrary};
pub use shape::{Aabb, BrickShape, ConnectionPoint, CoreKind, CoreShape, Polarity, Triangle};

use std::path::Path;

use crate::assembly::Assembly;

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Flatten(#[from] FlattenError),
}

/// Read, parse and flatten an assembly file.
pub fn read_assembly(path: &Path, library: &ShapeLibrary) -> Result<Assembly, LoadError> {
    let bytes = std::fs::read(path)
        .map_err(|e| LoadError::Io { path: path.display().to_string(), message: e.to_string() })?;
    let doc = parse_ldraw_bytes(&bytes)?;
    Ok(flatten(&doc, library)?)
}

/// Write an assembly file.
pub fn write_assembly(path: &Path, assembly: &Assembly, library: &ShapeLibrary) -> std::io::Result<()> {
    std::fs::write(path, write_ldraw(assembly, library))
}
