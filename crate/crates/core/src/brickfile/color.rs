use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::brickfile::library::LibraryError;

pub const DEFAULT_COLOR_TABLE: &str = include_str!("../../data/colors.txt");

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColorEntry {
    pub name: String,
    pub rgb: [u8; 3],
    pub edge_rgb: [u8; 3],
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColorTable {
    pub entries: BTreeMap<u32, ColorEntry>,
    pub fallback: ColorEntry,
}

/// Result of a colour lookup; `warning` is set when the fallback was used.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ResolvedColor {
    pub rgb: [u8; 3],
    pub warning: bool,
}

fn parse_hex_rgb(tok: &str) -> Option<[u8; 3]> {
    let tok = tok.trim_start_matches('#');
    if tok.len() != 6 {
        return None;
    }
    let mut out = [0u8; 3];
    for (i, slot) in out.iter_mut().enumerate() {
        *slot = u8::from_str_radix(&tok[2 * i..2 * i + 2], 16).ok()?;
    }
    Some(out)
}

impl ColorTable {
    pub fn parse(text: &str) -> Result<ColorTable, LibraryError> {
        let mut entries = BTreeMap::new();
        let mut fallback = ColorEntry {
            name: "Unknown".into(),
            rgb: [0xFF, 0x00, 0xFF],
            edge_rgb: [0x33, 0x33, 0x33],
        };
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let bad = |msg: &str| LibraryError::ColorTable { line: line_no, message: msg.to_string() };
            let toks: Vec<&str> = line.split_whitespace().collect();
            match toks.first().copied() {
                None => continue,
                Some(t) if t.starts_with('#') => continue,
                Some("color") => {
                    let [_, id, name, rgb, edge] = toks[..] else {
                        return Err(bad("expected: color <id> <name> <rrggbb> <edge_rrggbb>"));
                    };
                    let id: u32 = id.parse().map_err(|_| bad("bad color id"))?;
                    let rgb = parse_hex_rgb(rgb).ok_or_else(|| bad("bad rgb"))?;
                    let edge_rgb = parse_hex_rgb(edge).ok_or_else(|| bad("bad edge rgb"))?;
                    let entry = ColorEntry { name: name.to_string(), rgb, edge_rgb };
                    if entries.insert(id, entry).is_some() {
                        return Err(bad("duplicate color id"));
                    }
                }
                Some("fallback") => {
                    let [_, name, rgb, edge] = toks[..] else {
                        return Err(bad("expected: fallback <name> <rrggbb> <edge_rrggbb>"));
                    };
                    fallback = ColorEntry {
                        name: name.to_string(),
                        rgb: parse_hex_rgb(rgb).ok_or_else(|| bad("bad rgb"))?,
                        edge_rgb: parse_hex_rgb(edge).ok_or_else(|| bad("bad edge rgb"))?,
                    };
                }
                Some(_) => return Err(bad("unknown record")),
            }
        }
        Ok(ColorTable { entries, fallback })
    }

    pub fn bundled() -> ColorTable {
        ColorTable::parse(DEFAULT_COLOR_TABLE).expect("bundled color table parses")
    }

    pub fn get(&self, id: u32) -> Option<&ColorEntry> {
        self.entries.get(&id)
    }

    pub fn ids(&self) -> impl Iterator<Item = u32> + '_ {
        self.entries.keys().copied()
    }
}

/// Total lookup with fallback.
pub fn resolve_color(table: &ColorTable, id: u32) -> ResolvedColor {
    match table.entries.get(&id) {
        Some(e) => ResolvedColor { rgb: e.rgb, warning: false },
        None => ResolvedColor { rgb: table.fallback.rgb, warning: true },
    }
}
