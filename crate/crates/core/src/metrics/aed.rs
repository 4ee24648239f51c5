use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::assembly::{Assembly, SymmetryTable};
use crate::metrics::align::{align_once, AlignRound};
use crate::metrics::MetricConfig;

/// All alignment rounds of the edit-distance computation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlignmentResult {
    pub rounds: Vec<AlignRound>,
    pub leftover_predicted: Vec<u32>,
    pub leftover_target: Vec<u32>,
    /// Predicted id to target id, over all rounds.
    pub matching: BTreeMap<u32, u32>,
}

impl AlignmentResult {
    pub fn edit_distance(&self) -> f64 {
        let extra_rounds = self.rounds.len().saturating_sub(1);
        (extra_rounds + self.leftover_predicted.len() + 2 * self.leftover_target.len()) as f64
    }
}

/// Assembly edit distance: peel off aligned groups one rigid transform at a time.
pub fn aed(predicted: &Assembly, target: &Assembly, sym: &SymmetryTable, cfg: &MetricConfig) -> (f64, AlignmentResult) {
    let mut pred = predicted.clone();
    let mut targ = target.clone();
    let mut rounds = Vec::new();
    let mut matching = BTreeMap::new();
    while !pred.is_empty() && !targ.is_empty() {
        let round = align_once(&pred, &targ, sym, cfg);
        if round.pairs.is_empty() {
            break;
        }
        for &(p, t) in &round.pairs {
            pred.remove(p);
            targ.remove(t);
            matching.insert(p, t);
        }
        rounds.push(round);
    }
    let result = AlignmentResult { rounds, leftover_predicted: pred.ids(), leftover_target: targ.ids(), matching };
    (result.edit_distance(), result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::BrickInstance;
    use crate::math::{Mat3, Vec3};

    fn stack(top_offset: f64) -> Assembly {
        Assembly::from_instances([
            BrickInstance::new(1, 3001, 4, Mat3::identity(), Vec3::zeros()),
            BrickInstance::new(2, 3001, 1, Mat3::identity(), Vec3::new(top_offset, -24.0, 0.0)),
        ])
    }

    #[test]
    fn perfect_is_zero() {
        let (d, r) = aed(&stack(0.0), &stack(0.0), &SymmetryTable::default(), &MetricConfig::default());
        assert_eq!(d, 0.0);
        assert_eq!(r.rounds.len(), 1);
    }

    #[test]
    fn one_misplaced_costs_one_round() {
        let (d, r) = aed(&stack(40.0), &stack(0.0), &SymmetryTable::default(), &MetricConfig::default());
        assert_eq!(d, 1.0);
        assert_eq!(r.rounds.len(), 2);
        assert_eq!(r.matching.len(), 2);
    }

    #[test]
    fn empty_prediction_costs_two_per_brick() {
        let (d, _) = aed(&Assembly::new(), &stack(0.0), &SymmetryTable::default(), &MetricConfig::default());
        assert_eq!(d, 4.0);
        let (d, _) = aed(&stack(0.0), &Assembly::new(), &SymmetryTable::default(), &MetricConfig::default());
        assert_eq!(d, 2.0);
    }
}
