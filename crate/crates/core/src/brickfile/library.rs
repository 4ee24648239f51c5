//! The shape library: procedural core shapes, optional external meshes with
//! a connection-metadata sidecar, aliases and colours.

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::assembly::symmetry::{compute_symmetries, SymmetryConfig, SymmetryTable};
use crate::brickfile::color::ColorTable;
use crate::brickfile::ldraw::{parse_ldraw_bytes, LdrawLine};
use crate::brickfile::shape::{Aabb, BrickShape, ConnectionPoint, CoreShape, Polarity, Triangle};
use crate::math::Vec3;

pub const DEFAULT_ALIASES: &str = include_str!("../../data/aliases.txt");

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LibraryError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("external meshes were given without a connection sidecar")]
    MissingSidecar,
    #[error("sidecar line {line}: {message}")]
    Sidecar { line: usize, message: String },
    #[error("color table line {line}: {message}")]
    ColorTable { line: usize, message: String },
    #[error("alias table line {line}: {message}")]
    AliasTable { line: usize, message: String },
    #[error("symmetry table line {line}: {message}")]
    SymmetryTable { line: usize, message: String },
    #[error("mesh {path}: {message}")]
    Mesh { path: String, message: String },
    #[error("duplicate shape {0}")]
    DuplicateShape(String),
}

/// What to load. The default is the six procedural core shapes, the bundled
/// colour table and the bundled alias table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LibraryConfig {
    pub core_shapes: Vec<CoreShape>,
    #[serde(default)]
    pub mesh_files: Vec<PathBuf>,
    #[serde(default)]
    pub sidecar: Option<PathBuf>,
    #[serde(default)]
    pub color_table: Option<PathBuf>,
    #[serde(default)]
    pub alias_table: Option<PathBuf>,
    /// Precomputed `sym` table; computed from depth maps when absent.
    #[serde(default)]
    pub symmetry_table: Option<PathBuf>,
}

impl Default for LibraryConfig {
    fn default() -> Self {
        LibraryConfig {
            core_shapes: CoreShape::default_set(),
            mesh_files: Vec::new(),
            sidecar: None,
            color_table: None,
            alias_table: None,
            symmetry_table: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ShapeLibrary {
    shapes: BTreeMap<u32, BrickShape>,
    by_name: HashMap<String, u32>,
    aliases: BTreeMap<String, String>,
    pub colors: ColorTable,
    symmetry: OnceLock<SymmetryTable>,
}

/// Case-folded, slash-normalised part name without a leading `parts/`.
pub fn normalize_name(name: &str) -> String {
    let lowered = name.trim().to_ascii_lowercase().replace('\\', "/");
    lowered.strip_prefix("parts/").map(str::to_string).unwrap_or(lowered)
}

fn read(path: &Path) -> Result<Vec<u8>, LibraryError> {
    std::fs::read(path)
        .map_err(|e| LibraryError::Io { path: path.display().to_string(), message: e.to_string() })
}

fn read_text(path: &Path) -> Result<String, LibraryError> {
    String::from_utf8(read(path)?)
        .map_err(|_| LibraryError::Io { path: path.display().to_string(), message: "not UTF-8".into() })
}

fn parse_aliases(text: &str) -> Result<BTreeMap<String, String>, LibraryError> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks[..] {
            [] => {}
            [first, ..] if first.starts_with('#') => {}
            ["alias", variant, canonical] => {
                out.insert(normalize_name(variant), normalize_name(canonical));
            }
            _ => {
                return Err(LibraryError::AliasTable {
                    line: i + 1,
                    message: "expected: alias <variant> <canonical>".into(),
                })
            }
        }
    }
    Ok(out)
}

#[derive(Default)]
struct SidecarRecords {
    points: BTreeMap<String, Vec<(String, Polarity, Vec3, Vec3)>>,
    boxes: BTreeMap<String, Vec<Aabb>>,
}

fn parse_sidecar(text: &str) -> Result<SidecarRecords, LibraryError> {
    let mut out = SidecarRecords::default();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let bad = |m: &str| LibraryError::Sidecar { line: line_no, message: m.to_string() };
        let toks: Vec<&str> = line.split_whitespace().collect();
        let nums = |from: &[&str]| -> Result<Vec<f64>, LibraryError> {
            from.iter()
                .map(|t| t.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| bad("bad number")))
                .collect()
        };
        match toks.first().copied() {
            None => {}
            Some(t) if t.starts_with('#') => {}
            Some("snap") => {
                if toks.len() != 10 {
                    return Err(bad("expected: snap <shape> <kind> <+|-> px py pz ax ay az"));
                }
                let polarity = Polarity::from_symbol(toks[3]).ok_or_else(|| bad("polarity must be + or -"))?;
                let v = nums(&toks[4..10])?;
                let axis = Vec3::new(v[3], v[4], v[5]);
                let len = axis.norm();
                if len < 1e-9 {
                    return Err(bad("zero axis"));
                }
                out.points.entry(normalize_name(toks[1])).or_default().push((
                    toks[2].to_string(),
                    polarity,
                    Vec3::new(v[0], v[1], v[2]),
                    axis / len,
                ));
            }
            Some("box") => {
                if toks.len() != 8 {
                    return Err(bad("expected: box <shape> x0 y0 z0 x1 y1 z1"));
                }
                let v = nums(&toks[2..8])?;
                let b = Aabb::new(Vec3::new(v[0], v[1], v[2]), Vec3::new(v[3], v[4], v[5]));
                if b.is_empty() {
                    return Err(bad("box min exceeds max"));
                }
                out.boxes.entry(normalize_name(toks[1])).or_default().push(b);
            }
            Some(_) => return Err(bad("unknown record")),
        }
    }
    Ok(out)
}

fn parse_mesh_vertices(toks: &[&str], count: usize) -> Option<Vec<Vec3>> {
    // "<type> <color> x y z ..."
    if toks.len() != 2 + 3 * count {
        return None;
    }
    let vals: Option<Vec<f64>> =
        toks[2..].iter().map(|t| t.parse::<f64>().ok().filter(|v| v.is_finite())).collect();
    let vals = vals?;
    Some(vals.chunks(3).map(|c| Vec3::new(c[0], c[1], c[2])).collect())
}

fn load_mesh(path: &Path) -> Result<Vec<Triangle>, LibraryError> {
    let bytes = read(path)?;
    let mesh_err = |m: String| LibraryError::Mesh { path: path.display().to_string(), message: m };
    let doc = parse_ldraw_bytes(&bytes).map_err(|e| mesh_err(e.to_string()))?;
    let mut tris = Vec::new();
    for model in &doc.models {
        for line in &model.lines {
            let LdrawLine::Geometry { line, text } = line else { continue };
            let toks: Vec<&str> = text.split_whitespace().collect();
            let verts = match toks[0] {
                "3" => parse_mesh_vertices(&toks, 3),
                "4" => parse_mesh_vertices(&toks, 4),
                _ => continue,
            }
            .ok_or_else(|| mesh_err(format!("line {line}: malformed polygon")))?;
            let mut polys = vec![[verts[0], verts[1], verts[2]]];
            if verts.len() == 4 {
                polys.push([verts[0], verts[2], verts[3]]);
            }
            // Winding in community files is unreliable, so both sides are emitted.
            for [a, b, c] in polys {
                if let Some(t) = Triangle::from_winding(a, b, c) {
                    tris.push(Triangle::from_winding(a, c, b).unwrap());
                    tris.push(t);
                }
            }
        }
    }
    if tris.is_empty() {
        return Err(mesh_err("no triangles".into()));
    }
    Ok(tris)
}

fn shape_id_for(name: &str, taken: &BTreeMap<u32, BrickShape>, fallback: u32) -> u32 {
    let digits: String = name.chars().take_while(char::is_ascii_digit).collect();
    match digits.parse::<u32>() {
        Ok(id) if !taken.contains_key(&id) => id,
        _ => fallback,
    }
}

/// Load (or procedurally generate) every shape named by `config`.
pub fn load_shape_library(config: &LibraryConfig) -> Result<ShapeLibrary, LibraryError> {
    let colors = match &config.color_table {
        Some(p) => ColorTable::parse(&read_text(p)?)?,
        None => ColorTable::bundled(),
    };
    let alias_text = match &config.alias_table {
        Some(p) => read_text(p)?,
        None => DEFAULT_ALIASES.to_string(),
    };
    let aliases = parse_aliases(&alias_text)?;

    let mut shapes = BTreeMap::new();
    for core in &config.core_shapes {
        let shape = core.build();
        if shapes.insert(shape.shape_id, shape).is_some() {
            return Err(LibraryError::DuplicateShape(core.name.clone()));
        }
    }

    if !config.mesh_files.is_empty() {
        let sidecar_path = config.sidecar.as_ref().ok_or(LibraryError::MissingSidecar)?;
        let mut sidecar = parse_sidecar(&read_text(sidecar_path)?)?;
        for (i, path) in config.mesh_files.iter().enumerate() {
            let name = path
                .file_name()
                .map(|n| n.to_string_lossy().to_string())
                .unwrap_or_else(|| format!("mesh{i}.dat"));
            let key = normalize_name(&name);
            let mesh = load_mesh(path)?;
            let mut bounding_box = Aabb::empty();
            for t in &mesh {
                for v in &t.v {
                    bounding_box.grow(v);
                }
            }
            let connection_points = sidecar
                .points
                .remove(&key)
                .unwrap_or_default()
                .into_iter()
                .enumerate()
                .map(|(idx, (kind, polarity, local_position, local_axis))| ConnectionPoint {
                    index: idx as u32,
                    polarity,
                    kind,
                    local_position,
                    local_axis,
                })
                .collect();
            let collision_boxes = sidecar.boxes.remove(&key).unwrap_or_else(|| vec![bounding_box]);
            let id = shape_id_for(&key, &shapes, 1_000_000 + i as u32);
            if shapes.values().any(|s: &BrickShape| normalize_name(&s.canonical_name) == key) {
                return Err(LibraryError::DuplicateShape(name));
            }
            shapes.insert(
                id,
                BrickShape {
                    shape_id: id,
                    canonical_name: name.clone(),
                    description: name,
                    mesh,
                    connection_points,
                    collision_boxes,
                    bounding_box,
                },
            );
        }
        if let Some(name) = sidecar.points.keys().chain(sidecar.boxes.keys()).next() {
            return Err(LibraryError::Sidecar {
                line: 0,
                message: format!("records for unknown mesh {name:?}"),
            });
        }
    }

    let by_name: HashMap<String, u32> =
        shapes.values().map(|s| (normalize_name(&s.canonical_name), s.shape_id)).collect();
    for (variant, canonical) in &aliases {
        if !by_name.contains_key(canonical) {
            return Err(LibraryError::AliasTable {
                line: 0,
                message: format!("alias {variant:?} points at unknown shape {canonical:?}"),
            });
        }
    }

    let library = ShapeLibrary { shapes, by_name, aliases, colors, symmetry: OnceLock::new() };
    if let Some(path) = &config.symmetry_table {
        let table = SymmetryTable::parse(&read_text(path)?)?;
        let _ = library.symmetry.set(table);
    }
    Ok(library)
}

impl ShapeLibrary {
    pub fn shape(&self, id: u32) -> Option<&BrickShape> {
        self.shapes.get(&id)
    }

    pub fn shapes(&self) -> impl Iterator<Item = &BrickShape> {
        self.shapes.values()
    }

    pub fn shape_ids(&self) -> Vec<u32> {
        self.shapes.keys().copied().collect()
    }

    pub fn len(&self) -> usize {
        self.shapes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shapes.is_empty()
    }

    /// Default colour pool: every id in the colour table.
    pub fn palette(&self) -> Vec<u32> {
        self.colors.ids().collect()
    }

    pub fn aliases(&self) -> &BTreeMap<String, String> {
        &self.aliases
    }

    /// Resolve a part name through the alias table to a shape id.
    pub fn resolve_name(&self, name: &str) -> Option<u32> {
        let key = normalize_name(name);
        let canonical = self.aliases.get(&key).unwrap_or(&key);
        self.by_name.get(canonical).copied()
    }

    /// Canonical name for any known name (idempotent on canonical names).
    pub fn canonical_name(&self, name: &str) -> Option<&str> {
        self.resolve_name(name).and_then(|id| self.shape(id)).map(|s| s.canonical_name.as_str())
    }

    /// Rotational self-symmetries of every shape, computed on first use.
    pub fn symmetries(&self) -> &SymmetryTable {
        self.symmetry.get_or_init(|| {
            let cfg = SymmetryConfig::default();
            let mut table = SymmetryTable::default();
            for shape in self.shapes.values() {
                let ops = compute_symmetries(shape, &cfg).unwrap_or_default();
                table.insert(shape.shape_id, ops);
            }
            table
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_library_has_six_shapes_and_colors() {
        let lib = load_shape_library(&LibraryConfig::default()).unwrap();
        assert_eq!(lib.len(), 6);
        assert_eq!(lib.palette().len(), 6);
        assert_eq!(lib.shape_ids(), vec![3001, 3003, 3004, 3005, 3020, 3022]);
    }

    #[test]
    fn alias_resolution_is_idempotent() {
        let lib = load_shape_library(&LibraryConfig::default()).unwrap();
        assert_eq!(lib.resolve_name("brick_2x4.dat"), Some(3001));
        assert_eq!(lib.resolve_name("PARTS\\3001.DAT"), Some(3001));
        for s in lib.shapes() {
            assert_eq!(lib.canonical_name(&s.canonical_name), Some(s.canonical_name.as_str()));
        }
        assert_eq!(lib.canonical_name("brick_1x1.dat"), Some("3005.dat"));
    }

    #[test]
    fn external_mesh_needs_sidecar() {
        let dir = tempfile::tempdir().unwrap();
        let mesh = dir.path().join("9000.dat");
        std::fs::write(&mesh, "3 16 0 0 0 10 0 0 0 0 10\n").unwrap();
        let cfg = LibraryConfig { mesh_files: vec![mesh.clone()], ..LibraryConfig::default() };
        assert_eq!(load_shape_library(&cfg).unwrap_err(), LibraryError::MissingSidecar);

        let side = dir.path().join("snaps.txt");
        std::fs::write(&side, "snap 9000.dat stud + 0 0 0 0 -2 0\nbox 9000.dat 0 0 0 10 1 10\n").unwrap();
        let cfg = LibraryConfig { sidecar: Some(side.clone()), ..cfg };
        let lib = load_shape_library(&cfg).unwrap();
        let s = lib.shape(9000).unwrap();
        assert_eq!(s.connection_points.len(), 1);
        assert_eq!(s.connection_points[0].local_axis, Vec3::new(0.0, -1.0, 0.0));
        assert_eq!(s.collision_boxes.len(), 1);
        assert_eq!(s.mesh.len(), 2);

        std::fs::write(&side, "snap 9000.dat stud x 0 0 0 0 1 0\n").unwrap();
        assert!(matches!(load_shape_library(&cfg), Err(LibraryError::Sidecar { line: 1, .. })));
    }
}
