use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::assembly::Assembly;
use crate::brickfile::ShapeLibrary;

/// Unigram shape and colour counts, most frequent first (ties by id).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FrequencyReport {
    pub scenes: usize,
    pub bricks: usize,
    pub shapes: Vec<(u32, usize)>,
    pub colors: Vec<(u32, usize)>,
}

fn sorted(counts: BTreeMap<u32, usize>) -> Vec<(u32, usize)> {
    let mut v: Vec<_> = counts.into_iter().collect();
    v.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    v
}

pub fn frequency_stats<'a>(scenes: impl IntoIterator<Item = &'a Assembly>) -> FrequencyReport {
    let (mut shapes, mut colors) = (BTreeMap::new(), BTreeMap::new());
    let mut report = FrequencyReport::default();
    for scene in scenes {
        report.scenes += 1;
        for inst in scene.instances() {
            report.bricks += 1;
            *shapes.entry(inst.shape_id).or_insert(0) += 1;
            *colors.entry(inst.color_id).or_insert(0) += 1;
        }
    }
    report.shapes = sorted(shapes);
    report.colors = sorted(colors);
    report
}

impl FrequencyReport {
    /// `shape <id> <name> <count>` and `color <id> <name> <count>` records.
    pub fn to_records(&self, library: &ShapeLibrary) -> String {
        let mut out = format!("scenes {}\nbricks {}\n", self.scenes, self.bricks);
        for (id, n) in &self.shapes {
            let name = library.shape(*id).map_or("unknown", |s| s.canonical_name.as_str());
            let _ = writeln!(out, "shape {id} {name} {n}");
        }
        for (id, n) in &self.colors {
            let name = library.colors.get(*id).map_or("unknown", |c| c.name.as_str());
            let _ = writeln!(out, "color {id} {name} {n}");
        }
        out
    }
}
