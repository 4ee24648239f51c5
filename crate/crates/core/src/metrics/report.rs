use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::assembly::{Assembly, SymmetryTable};
use crate::brickfile::ShapeLibrary;
use crate::metrics::aed::{aed, AlignmentResult};
use crate::metrics::align::align_once;
use crate::metrics::f1::{f1_bricks, f1_edges};
use crate::metrics::{Counts, MetricConfig};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub f1_b: f64,
    pub f1_e: f64,
    pub f1_a: f64,
    pub aed: f64,
    pub bricks: Counts,
    pub edges: Counts,
    pub assembly: Counts,
    pub alignment: AlignmentResult,
}

/// Pose-aware F1 from a single best alignment.
pub fn f1_assembly(predicted: &Assembly, target: &Assembly, sym: &SymmetryTable, cfg: &MetricConfig) -> Counts {
    let tp = align_once(predicted, target, sym, cfg).pairs.len();
    Counts { tp, fp: predicted.len() - tp, fn_: target.len() - tp }
}

/// All four metrics.
pub fn score_all(predicted: &Assembly, target: &Assembly, library: &ShapeLibrary, cfg: &MetricConfig) -> ScoreReport {
    let sym = library.symmetries();
    let bricks = f1_bricks(predicted, target);
    let (distance, alignment) = aed(predicted, target, sym, cfg);
    // The first AED round is the single best alignment.
    let tp_a = alignment.rounds.first().map_or(0, |r| r.pairs.len());
    let assembly = Counts { tp: tp_a, fp: predicted.len() - tp_a, fn_: target.len() - tp_a };
    let edges = f1_edges(predicted, target, library, &alignment.matching).expect("matching comes from these assemblies");
    ScoreReport {
        f1_b: bricks.f1(),
        f1_e: edges.f1(),
        f1_a: assembly.f1(),
        aed: distance,
        bricks,
        edges,
        assembly,
        alignment,
    }
}

impl ScoreReport {
    /// One record per metric followed by the alignment rounds.
    pub fn to_records(&self) -> String {
        let mut out = String::new();
        for (name, value, c) in [
            ("f1_b", self.f1_b, self.bricks),
            ("f1_e", self.f1_e, self.edges),
            ("f1_a", self.f1_a, self.assembly),
        ] {
            let _ = writeln!(out, "metric {name} {value} tp {} fp {} fn {}", c.tp, c.fp, c.fn_);
        }
        let _ = writeln!(out, "metric aed {}", self.aed);
        for (k, r) in self.alignment.rounds.iter().enumerate() {
            let rot: Vec<String> = (0..3).flat_map(|i| (0..3).map(move |j| (i, j))).map(|(i, j)| r.r0[(i, j)].to_string()).collect();
            let _ = writeln!(out, "round {k} t0 {} {} {} r0 {}", r.t0.x, r.t0.y, r.t0.z, rot.join(" "));
            for (p, t) in &r.pairs {
                let _ = writeln!(out, "pair {k} {p} {t}");
            }
        }
        let ids = |v: &[u32]| v.iter().map(u32::to_string).collect::<Vec<_>>().join(" ");
        let _ = writeln!(out, "leftover predicted {}", ids(&self.alignment.leftover_predicted));
        let _ = writeln!(out, "leftover target {}", ids(&self.alignment.leftover_target));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::BrickInstance;
    use crate::math::{Mat3, Vec3};

    #[test]
    fn perfect_and_empty() {
        let lib = crate::brickfile::load_shape_library(&Default::default()).unwrap();
        let t = Assembly::from_instances([
            BrickInstance::new(1, 3001, 4, Mat3::identity(), Vec3::zeros()),
            BrickInstance::new(2, 3003, 1, Mat3::identity(), Vec3::new(20.0, -24.0, 0.0)),
        ]);
        let r = score_all(&t, &t, &lib, &MetricConfig::default());
        assert_eq!((r.f1_b, r.f1_e, r.f1_a, r.aed), (1.0, 1.0, 1.0, 0.0));
        let r = score_all(&Assembly::new(), &t, &lib, &MetricConfig::default());
        assert_eq!((r.f1_b, r.f1_e, r.f1_a, r.aed), (0.0, 0.0, 0.0, 4.0));
        assert!(r.to_records().starts_with("metric f1_b 0 tp 0 fp 0 fn 2\n"));
    }
}
