//! Assembly comparison metrics: brick F1, pose-aware assembly F1, assembly
//! edit distance and connection-edge F1.

pub mod aed;
pub mod align;
pub mod f1;
pub mod report;

use serde::{Deserialize, Serialize};

pub use aed::{aed, AlignmentResult};
pub use align::{align_once, candidates, match_under, AlignRound, Candidate};
pub use f1::{f1_bricks, f1_edges, EdgeError};
pub use report::{f1_assembly, score_all, ScoreReport};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricConfig {
    /// Orientation threshold, radians.
    pub theta: f64,
    /// Position threshold, LDU.
    pub distance: f64,
}

impl Default for MetricConfig {
    fn default() -> Self {
        MetricConfig { theta: 30f64.to_radians(), distance: 20.0 }
    }
}

/// True/false positive and false negative counts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl Counts {
    /// `2TP / (2TP + FP + FN)`, and 1 when all three are zero.
    pub fn f1(&self) -> f64 {
        let denom = 2 * self.tp + self.fp + self.fn_;
        if denom == 0 {
            1.0
        } else {
            (2 * self.tp) as f64 / denom as f64
        }
    }
}
