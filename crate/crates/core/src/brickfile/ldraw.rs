//! LDraw / MPD documents: line types 0 and 1, with 2–5 carried verbatim.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use thiserror::Error;

use crate::assembly::{Assembly, BrickInstance};
use crate::brickfile::library::{normalize_name, ShapeLibrary};
use crate::math::{orthonormality_error, polar_project, Mat3, Vec3};

#[derive(Debug, Clone, PartialEq)]
pub struct LdrawDocument {
    pub models: Vec<SubModel>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubModel {
    /// `None` for the implicit model of a file without `0 FILE` lines.
    pub name: Option<String>,
    pub lines: Vec<LdrawLine>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LdrawLine {
    Comment(String),
    Reference(Reference),
    /// Line types 2–5, kept as the original text.
    Geometry { line: usize, text: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reference {
    /// 1-based source line.
    pub line: usize,
    pub color: u32,
    pub rotation: Mat3,
    pub translation: Vec3,
    pub target: String,
}

#[derive(Debug, Error, PartialEq)]
#[error("line {line}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Error, PartialEq)]
pub enum ParseErrorKind {
    #[error("line type 1 needs 15 fields, found {0}")]
    FieldCount(usize),
    #[error("unreadable number {0:?}")]
    BadNumber(String),
    #[error("unknown line type {0:?}")]
    UnknownLineType(String),
    #[error("duplicate sub-model name {0:?}")]
    DuplicateModel(String),
    #[error("reference cycle through sub-model {0:?}")]
    ReferenceCycle(String),
    #[error("line is not valid UTF-8")]
    InvalidUtf8,
}

#[derive(Debug, Error, PartialEq)]
pub enum FlattenError {
    #[error("line {line}: cannot resolve reference {name:?}")]
    Unresolved { line: usize, name: String },
    #[error("line {line}: transform is not invertible")]
    Singular { line: usize },
    #[error("line {line}: transform mirrors the part")]
    Mirrored { line: usize },
    #[error("document has no models")]
    Empty,
}

/// Diagnostics collected while flattening.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FlattenReport {
    pub warnings: Vec<String>,
    /// Instances whose rotation needed a polar correction above 1e-3.
    pub renormalized: Vec<u32>,
}

fn parse_f64(tok: &str) -> Result<f64, ParseErrorKind> {
    match tok.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(ParseErrorKind::BadNumber(tok.to_string())),
    }
}

fn parse_reference(line: usize, rest: &str) -> Result<Reference, ParseErrorKind> {
    // `rest` starts after the leading "1".
    let mut fields = Vec::with_capacity(13);
    let mut tail = rest;
    for _ in 0..13 {
        let trimmed = tail.trim_start();
        if trimmed.is_empty() {
            return Err(ParseErrorKind::FieldCount(fields.len() + 1));
        }
        let end = trimmed.find(char::is_whitespace).unwrap_or(trimmed.len());
        fields.push(&trimmed[..end]);
        tail = &trimmed[end..];
    }
    let target = tail.trim();
    if target.is_empty() {
        return Err(ParseErrorKind::FieldCount(14));
    }
    let color = fields[0]
        .parse::<u32>()
        .map_err(|_| ParseErrorKind::BadNumber(fields[0].to_string()))?;
    let mut nums = [0.0; 12];
    for (slot, tok) in nums.iter_mut().zip(&fields[1..]) {
        *slot = parse_f64(tok)?;
    }
    let translation = Vec3::new(nums[0], nums[1], nums[2]);
    let rotation = Mat3::new(
        nums[3], nums[4], nums[5], nums[6], nums[7], nums[8], nums[9], nums[10], nums[11],
    );
    Ok(Reference { line, color, rotation, translation, target: target.to_string() })
}

/// Parse a document from text.
pub fn parse_ldraw(text: &str) -> Result<LdrawDocument, ParseError> {
    parse_ldraw_bytes(text.as_bytes())
}

/// Parse a document from raw bytes; invalid UTF-8 is reported per line.
pub fn parse_ldraw_bytes(bytes: &[u8]) -> Result<LdrawDocument, ParseError> {
    let mut models: Vec<SubModel> = Vec::new();
    let mut current = SubModel { name: None, lines: Vec::new() };
    let mut seen_file = false;
    let mut names: HashMap<String, usize> = HashMap::new();

    for (idx, raw) in bytes.split(|&b| b == b'\n').enumerate() {
        let line = idx + 1;
        let err = |kind| ParseError { line, kind };
        let text = std::str::from_utf8(raw).map_err(|_| err(ParseErrorKind::InvalidUtf8))?;
        let text = text.trim();
        if text.is_empty() {
            continue;
        }
        let (kind, rest) = match text.find(char::is_whitespace) {
            Some(pos) => (&text[..pos], &text[pos..]),
            None => (text, ""),
        };
        match kind {
            "0" => {
                let body = rest.trim();
                if let Some(name) = body.strip_prefix("FILE ").map(str::trim) {
                    if seen_file || !current.lines.is_empty() {
                        models.push(std::mem::replace(
                            &mut current,
                            SubModel { name: None, lines: Vec::new() },
                        ));
                    }
                    seen_file = true;
                    let key = normalize_name(name);
                    if names.insert(key, line).is_some() {
                        return Err(err(ParseErrorKind::DuplicateModel(name.to_string())));
                    }
                    current.name = Some(name.to_string());
                } else if body == "NOFILE" {
                    // Lines after NOFILE and before the next FILE are dropped.
                    models.push(std::mem::replace(
                        &mut current,
                        SubModel { name: None, lines: Vec::new() },
                    ));
                } else {
                    current.lines.push(LdrawLine::Comment(body.to_string()));
                }
            }
            "1" => {
                let r = parse_reference(line, rest).map_err(err)?;
                current.lines.push(LdrawLine::Reference(r));
            }
            "2" | "3" | "4" | "5" => {
                current.lines.push(LdrawLine::Geometry { line, text: text.to_string() });
            }
            other => return Err(err(ParseErrorKind::UnknownLineType(other.to_string()))),
        }
    }
    if !current.lines.is_empty() || current.name.is_some() || models.is_empty() {
        models.push(current);
    }
    // Drop anonymous comment-only preambles in front of real sub-models.
    if models.len() > 1 {
        models.retain(|m| {
            m.name.is_some() || m.lines.iter().any(|l| !matches!(l, LdrawLine::Comment(_)))
        });
    }
    let doc = LdrawDocument { models };
    doc.check_cycles()?;
    Ok(doc)
}

impl LdrawDocument {
    fn model_index(&self) -> HashMap<String, usize> {
        self.models
            .iter()
            .enumerate()
            .filter_map(|(i, m)| m.name.as_ref().map(|n| (normalize_name(n), i)))
            .collect()
    }

    fn check_cycles(&self) -> Result<(), ParseError> {
        let index = self.model_index();
        // 0 = unvisited, 1 = on stack, 2 = done
        let mut state = vec![0u8; self.models.len()];
        fn visit(
            doc: &LdrawDocument,
            index: &HashMap<String, usize>,
            state: &mut [u8],
            m: usize,
        ) -> Result<(), ParseError> {
            state[m] = 1;
            for line in &doc.models[m].lines {
                let LdrawLine::Reference(r) = line else { continue };
                let Some(&child) = index.get(&normalize_name(&r.target)) else { continue };
                match state[child] {
                    1 => {
                        return Err(ParseError {
                            line: r.line,
                            kind: ParseErrorKind::ReferenceCycle(r.target.clone()),
                        })
                    }
                    0 => visit(doc, index, state, child)?,
                    _ => {}
                }
            }
            state[m] = 2;
            Ok(())
        }
        for m in 0..self.models.len() {
            if state[m] == 0 {
                visit(self, &index, &mut state, m)?;
            }
        }
        Ok(())
    }
}

/// Expand the first model depth-first into brick instances.
pub fn flatten(doc: &LdrawDocument, library: &ShapeLibrary) -> Result<Assembly, FlattenError> {
    flatten_with_report(doc, library).map(|(a, _)| a)
}

pub fn flatten_with_report(
    doc: &LdrawDocument,
    library: &ShapeLibrary,
) -> Result<(Assembly, FlattenReport), FlattenError> {
    let root = doc.models.first().ok_or(FlattenError::Empty)?;
    let index = doc.model_index();
    let mut assembly = Assembly::new();
    let mut report = FlattenReport::default();
    expand(doc, &index, library, root, None, &mut assembly, &mut report)?;
    Ok((assembly, report))
}

fn expand(
    doc: &LdrawDocument,
    index: &HashMap<String, usize>,
    library: &ShapeLibrary,
    model: &SubModel,
    parent: Option<(&Mat3, &Vec3)>,
    out: &mut Assembly,
    report: &mut FlattenReport,
) -> Result<(), FlattenError> {
    for line in &model.lines {
        match line {
            LdrawLine::Comment(_) => {}
            LdrawLine::Geometry { line, .. } => {
                report.warnings.push(format!("line {line}: geometry line ignored in assembly"));
            }
            LdrawLine::Reference(r) => {
                // Root-level transforms are taken verbatim: written poses must
                // round-trip bit for bit.
                let (rot, trans) = match parent {
                    None => (r.rotation, r.translation),
                    Some((pr, pt)) => (pr * r.rotation, pr * r.translation + pt),
                };
                let det = rot.determinant();
                if !det.is_finite() || det.abs() < 1e-9 {
                    return Err(FlattenError::Singular { line: r.line });
                }
                if let Some(&child) = index.get(&normalize_name(&r.target)) {
                    expand(doc, index, library, &doc.models[child], Some((&rot, &trans)), out, report)?;
                    continue;
                }
                let shape_id = library
                    .resolve_name(&r.target)
                    .ok_or_else(|| FlattenError::Unresolved { line: r.line, name: r.target.clone() })?;
                if det < 0.0 {
                    return Err(FlattenError::Mirrored { line: r.line });
                }
                let mut rotation = rot;
                let mut flagged = false;
                if orthonormality_error(&rot) > 1e-12 || (det - 1.0).abs() > 1e-12 {
                    rotation = polar_project(&rot);
                    flagged = (rotation - rot).norm() > 1e-3;
                }
                let id = out.insert(BrickInstance::new(0, shape_id, r.color, rotation, trans));
                if flagged {
                    report.renormalized.push(id);
                    report.warnings.push(format!("line {}: rotation re-orthonormalized", r.line));
                }
            }
        }
    }
    Ok(())
}

/// Serialize an assembly as a single-model LDraw file.
pub fn write_ldraw(assembly: &Assembly, library: &ShapeLibrary) -> String {
    let mut out = String::from("0 brickmake assembly\n");
    for inst in assembly.instances() {
        let name = library
            .shape(inst.shape_id)
            .map(|s| s.canonical_name.as_str())
            .unwrap_or("unknown.dat");
        let t = &inst.translation;
        let r = &inst.rotation;
        let _ = write!(out, "1 {} {} {} {}", inst.color_id, t.x, t.y, t.z);
        for row in 0..3 {
            for col in 0..3 {
                let _ = write!(out, " {}", r[(row, col)]);
            }
        }
        let _ = writeln!(out, " {name}");
    }
    out
}

/// Names of the sub-models in document order, for diagnostics.
pub fn model_names(doc: &LdrawDocument) -> BTreeMap<usize, String> {
    doc.models
        .iter()
        .enumerate()
        .map(|(i, m)| (i, m.name.clone().unwrap_or_default()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::brickfile::library::{load_shape_library, LibraryConfig};
    use crate::math::{axis_rotation, Axis};

    fn lib() -> ShapeLibrary {
        load_shape_library(&LibraryConfig::default()).unwrap()
    }

    #[test]
    fn single_reference_line() {
        let doc = parse_ldraw("1 4 0 0 0 1 0 0 0 1 0 0 0 1 3001.dat").unwrap();
        assert_eq!(doc.models.len(), 1);
        let LdrawLine::Reference(r) = &doc.models[0].lines[0] else { panic!() };
        assert_eq!(r.color, 4);
        assert_eq!(r.rotation, Mat3::identity());
        assert_eq!(r.translation, Vec3::zeros());
        assert_eq!(r.target, "3001.dat");

        let a = flatten(&doc, &lib()).unwrap();
        assert_eq!(a.len(), 1);
        let b = a.get(1).unwrap();
        assert_eq!((b.shape_id, b.color_id), (3001, 4));
    }

    #[test]
    fn empty_stream_is_one_empty_model() {
        let doc = parse_ldraw("").unwrap();
        assert_eq!(doc.models.len(), 1);
        assert!(doc.models[0].name.is_none());
        assert!(doc.models[0].lines.is_empty());
        assert!(flatten(&doc, &lib()).unwrap().is_empty());
    }

    #[test]
    fn two_level_document_composes_transforms() {
        // main places sub rotated a quarter turn about Y and shifted; sub places
        // a 1x1 brick at (20, -24, 0) in its own frame.
        let text = "0 FILE main.ldr\n\
                    1 16 100 0 50 0 0 1 0 1 0 -1 0 0 sub.ldr\n\
                    0 FILE sub.ldr\n\
                    1 4 20 -24 0 1 0 0 0 1 0 0 0 1 3005.dat\n";
        let doc = parse_ldraw(text).unwrap();
        assert_eq!(doc.models.len(), 2);
        let a = flatten(&doc, &lib()).unwrap();
        assert_eq!(a.len(), 1);
        let b = a.get(1).unwrap();
        // parent R maps (x, y, z) -> (z, y, -x): child t = (20, -24, 0) -> (0, -24, -20)
        assert_eq!(b.translation, Vec3::new(100.0, -24.0, 30.0));
        assert_eq!(b.rotation, axis_rotation(Axis::Y, 1));
        assert_eq!(b.shape_id, 3005);
    }

    #[test]
    fn unknown_reference_fails() {
        let doc = parse_ldraw("1 4 0 0 0 1 0 0 0 1 0 0 0 1 9999.dat").unwrap();
        assert_eq!(
            flatten(&doc, &lib()),
            Err(FlattenError::Unresolved { line: 1, name: "9999.dat".into() })
        );
    }

    #[test]
    fn errors_name_lines() {
        let e = parse_ldraw("0 hi\n1 4 0 0 0 1 0 0").unwrap_err();
        assert_eq!(e.line, 2);
        assert!(matches!(e.kind, ParseErrorKind::FieldCount(_)));
        let e = parse_ldraw("1 4 0 0 zz 1 0 0 0 1 0 0 0 1 a.dat").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::BadNumber("zz".into()));
        let e = parse_ldraw("1 4 0 0 nan 1 0 0 0 1 0 0 0 1 a.dat").unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::BadNumber(_)));
        let e = parse_ldraw("9 foo").unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::UnknownLineType(_)));
    }

    #[test]
    fn duplicate_and_cyclic_models_rejected() {
        let e = parse_ldraw("0 FILE a.ldr\n0 FILE A.ldr\n").unwrap_err();
        assert_eq!(e.line, 2);
        assert!(matches!(e.kind, ParseErrorKind::DuplicateModel(_)));

        let text = "0 FILE a.ldr\n1 4 0 0 0 1 0 0 0 1 0 0 0 1 b.ldr\n\
                    0 FILE b.ldr\n1 4 0 0 0 1 0 0 0 1 0 0 0 1 a.ldr\n";
        let e = parse_ldraw(text).unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::ReferenceCycle(_)));
    }

    #[test]
    fn names_with_spaces_and_exponents() {
        let doc = parse_ldraw("1 4 1e1 -2.5E0 0 1 0 0 0 1 0 0 0 1 my part.dat").unwrap();
        let LdrawLine::Reference(r) = &doc.models[0].lines[0] else { panic!() };
        assert_eq!(r.translation, Vec3::new(10.0, -2.5, 0.0));
        assert_eq!(r.target, "my part.dat");
    }

    #[test]
    fn geometry_lines_are_kept_and_warned() {
        let text = "3 4 0 0 0 1 0 0 0 1 0\n1 4 0 0 0 1 0 0 0 1 0 0 0 1 3001.dat\n";
        let doc = parse_ldraw(text).unwrap();
        assert!(matches!(doc.models[0].lines[0], LdrawLine::Geometry { line: 1, .. }));
        let (a, report) = flatten_with_report(&doc, &lib()).unwrap();
        assert_eq!(a.len(), 1);
        assert_eq!(report.warnings.len(), 1);
    }

    #[test]
    fn skewed_rotation_is_projected_and_flagged() {
        let doc = parse_ldraw("1 4 0 0 0 1 0.01 0 0 1 0 0 0 1 3001.dat").unwrap();
        let (a, report) = flatten_with_report(&doc, &lib()).unwrap();
        assert!(crate::math::is_rotation(&a.get(1).unwrap().rotation, 1e-9));
        assert_eq!(report.renormalized, vec![1]);
        let doc = parse_ldraw("1 4 0 0 0 0 0 0 0 0 0 0 0 0 3001.dat").unwrap();
        assert_eq!(flatten(&doc, &lib()), Err(FlattenError::Singular { line: 1 }));
    }

    #[test]
    fn write_empty_and_quarter_turn() {
        let library = lib();
        let empty = write_ldraw(&Assembly::new(), &library);
        assert_eq!(empty.lines().count(), 1);
        assert!(empty.starts_with("0 "));

        let mut a = Assembly::new();
        a.insert(BrickInstance::new(0, 3001, 4, axis_rotation(Axis::Y, 1), Vec3::new(10.0, -24.0, 0.0)));
        let text = write_ldraw(&a, &library);
        let fields: Vec<&str> = text.lines().nth(1).unwrap().split_whitespace().collect();
        for entry in &fields[5..14] {
            assert!(["0", "1", "-1"].contains(entry), "entry {entry}");
        }
        let back = flatten(&parse_ldraw(&text).unwrap(), &library).unwrap();
        assert_eq!(back, a);
    }
}
