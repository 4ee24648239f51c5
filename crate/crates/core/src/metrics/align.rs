//! Pair-induced rigid alignment of a predicted assembly onto a target.

use pathfinding::kuhn_munkres::kuhn_munkres_min;
use pathfinding::matrix::Matrix;
use serde::{Deserialize, Serialize};

use crate::assembly::rotation::min_symmetric_distance;
use crate::assembly::{Assembly, BrickInstance, SymmetryTable};
use crate::math::{Mat3, Vec3};
use crate::metrics::MetricConfig;

/// Cost of an unaligned pair; exceeds any sum of real costs.
const UNALIGNED: i64 = 1 << 40;
/// Residuals are compared in micro-LDU.
const COST_SCALE: f64 = 1.0e6;
/// Distances this close to the threshold count as outside it.
const DISTANCE_MARGIN: f64 = 1.0e-6;

/// One enumerated transform `x ↦ R0·x + t0` taking target into prediction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Candidate {
    pub target_id: u32,
    pub predicted_id: u32,
    pub symmetry_index: usize,
    pub r0: Mat3,
    pub t0: Vec3,
}

/// Result of one alignment round.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlignRound {
    pub r0: Mat3,
    pub t0: Vec3,
    /// `(predicted id, target id)`, ascending.
    pub pairs: Vec<(u32, u32)>,
    /// Summed position residual of the pairs, micro-LDU.
    pub residual: i64,
}

/// Every pair-induced transform, ordered by (target id, predicted id, symmetry index).
pub fn candidates(predicted: &Assembly, target: &Assembly, sym: &SymmetryTable) -> Vec<Candidate> {
    let mut out = Vec::new();
    for ti in target.instances() {
        for pj in predicted.instances() {
            if ti.shape_id != pj.shape_id || ti.color_id != pj.color_id {
                continue;
            }
            for (k, s) in sym.rotations(ti.shape_id).iter().enumerate() {
                let r0 = pj.rotation * s * ti.rotation.transpose();
                let t0 = pj.translation - r0 * ti.translation;
                out.push(Candidate {
                    target_id: ti.instance_id,
                    predicted_id: pj.instance_id,
                    symmetry_index: k,
                    r0,
                    t0,
                });
            }
        }
    }
    out
}

/// Position residual if target brick `t` mapped by `(r0, t0)` is aligned
/// with predicted brick `p`.
pub fn aligned_residual(
    t: &BrickInstance,
    p: &BrickInstance,
    r0: &Mat3,
    t0: &Vec3,
    sym: &SymmetryTable,
    cfg: &MetricConfig,
) -> Option<f64> {
    if t.shape_id != p.shape_id || t.color_id != p.color_id {
        return None;
    }
    let d = (r0 * t.translation + t0 - p.translation).norm();
    if d >= cfg.distance - DISTANCE_MARGIN {
        return None;
    }
    let angle = min_symmetric_distance(t.shape_id, &(r0 * t.rotation), &p.rotation, sym);
    (angle < cfg.theta).then_some(d)
}

/// Maximum-cardinality, minimum-residual one-to-one matching under a fixed transform.
pub fn match_under(
    predicted: &Assembly,
    target: &Assembly,
    r0: &Mat3,
    t0: &Vec3,
    sym: &SymmetryTable,
    cfg: &MetricConfig,
) -> AlignRound {
    let preds: Vec<&BrickInstance> = predicted.instances().collect();
    let targs: Vec<&BrickInstance> = target.instances().collect();
    let empty = AlignRound { r0: *r0, t0: *t0, pairs: Vec::new(), residual: 0 };
    if preds.is_empty() || targs.is_empty() {
        return empty;
    }
    let mut cost = vec![vec![UNALIGNED; preds.len()]; targs.len()];
    let mut any = false;
    for (a, t) in targs.iter().enumerate() {
        for (b, p) in preds.iter().enumerate() {
            if let Some(d) = aligned_residual(t, p, r0, t0, sym, cfg) {
                cost[a][b] = (d * COST_SCALE).round() as i64;
                any = true;
            }
        }
    }
    if !any {
        return empty;
    }
    // The solver wants no more rows than columns.
    let transpose = targs.len() > preds.len();
    let (rows, cols) = if transpose { (preds.len(), targs.len()) } else { (targs.len(), preds.len()) };
    let matrix = Matrix::from_fn(rows, cols, |(r, c)| if transpose { cost[c][r] } else { cost[r][c] });
    let (_, assignment) = kuhn_munkres_min(&matrix);
    let mut pairs = Vec::new();
    let mut residual = 0;
    for (r, &c) in assignment.iter().enumerate() {
        let (a, b) = if transpose { (c, r) } else { (r, c) };
        if cost[a][b] < UNALIGNED {
            pairs.push((preds[b].instance_id, targs[a].instance_id));
            residual += cost[a][b];
        }
    }
    pairs.sort_unstable();
    AlignRound { r0: *r0, t0: *t0, pairs, residual }
}

/// The best pair-induced alignment: most matched pairs, then least total
/// residual, then lexicographically smallest pair list, then enumeration order.
pub fn align_once(predicted: &Assembly, target: &Assembly, sym: &SymmetryTable, cfg: &MetricConfig) -> AlignRound {
    let mut best: Option<AlignRound> = None;
    for c in candidates(predicted, target, sym) {
        let round = match_under(predicted, target, &c.r0, &c.t0, sym, cfg);
        let better = match &best {
            None => true,
            Some(b) => {
                (round.pairs.len(), -round.residual, std::cmp::Reverse(&round.pairs))
                    > (b.pairs.len(), -b.residual, std::cmp::Reverse(&b.pairs))
            }
        };
        if better {
            best = Some(round);
        }
    }
    best.unwrap_or(AlignRound { r0: Mat3::identity(), t0: Vec3::zeros(), pairs: Vec::new(), residual: 0 })
}
