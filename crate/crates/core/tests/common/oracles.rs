//! Independent reference computations for the metric and symmetry checks.

use std::collections::BTreeSet;

use brickmake_core::assembly::{Assembly, BrickInstance, SymmetryOp};
use brickmake_core::brickfile::shape::BrickShape;
use brickmake_core::math::{Mat3, Vec3};
use brickmake_core::metrics::{candidates, MetricConfig, ScoreReport};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{lib, perturb, rigid, scene};

/// Brute-force best alignment: every candidate transform, every injective
/// partial assignment. Returns (pairs, summed residual in micro-LDU).
pub fn exhaustive_best(p: &Assembly, t: &Assembly) -> (usize, i64) {
    let cfg = MetricConfig::default();
    let sym = lib().symmetries().clone();
    let geodesic = |a: &Mat3, b: &Mat3| (((a.transpose() * b).trace() - 1.0) / 2.0).clamp(-1.0, 1.0).acos();
    let preds: Vec<&BrickInstance> = p.instances().collect();
    let targs: Vec<&BrickInstance> = t.instances().collect();
    let mut best = (0usize, 0i64);
    for c in candidates(p, t, &sym) {
        let cost = |ti: &BrickInstance, pj: &BrickInstance| -> Option<i64> {
            if ti.shape_id != pj.shape_id || ti.color_id != pj.color_id {
                return None;
            }
            let d = (c.r0 * ti.translation + c.t0 - pj.translation).norm();
            let r = c.r0 * ti.rotation;
            let ang = sym.rotations(ti.shape_id).iter().map(|s| geodesic(&(r * s), &pj.rotation)).fold(f64::INFINITY, f64::min);
            (d < cfg.distance - 1e-6 && ang < cfg.theta).then(|| (d * 1e6).round() as i64)
        };
        // Assign each target to a distinct prediction or to nothing.
        fn go(
            k: usize,
            used: &mut Vec<bool>,
            acc: (usize, i64),
            targs: &[&BrickInstance],
            preds: &[&BrickInstance],
            cost: &dyn Fn(&BrickInstance, &BrickInstance) -> Option<i64>,
            best: &mut (usize, i64),
        ) {
            if k == targs.len() {
                if acc.0 > best.0 || (acc.0 == best.0 && acc.1 < best.1) {
                    *best = acc;
                }
                return;
            }
            go(k + 1, used, acc, targs, preds, cost, best);
            for j in 0..preds.len() {
                if !used[j] {
                    if let Some(c) = cost(targs[k], preds[j]) {
                        used[j] = true;
                        go(k + 1, used, (acc.0 + 1, acc.1 + c), targs, preds, cost, best);
                        used[j] = false;
                    }
                }
            }
        }
        let mut local = (0usize, 0i64);
        go(0, &mut vec![false; preds.len()], (0, 0), &targs, &preds, &cost, &mut local);
        if local.0 > best.0 || (local.0 == best.0 && local.0 > 0 && local.1 < best.1) {
            best = local;
        }
    }
    best
}

pub fn small_case(seed: u64) -> (Assembly, Assembly) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t = scene(rng.random_range(1..=3), seed);
    let mut p = perturb(&t, &mut rng);
    while p.len() > 3 {
        let last = *p.ids().last().unwrap();
        p.remove(last);
    }
    let (r, x) = rigid(&mut rng);
    (p.transformed(&r, &x), t)
}

pub fn metric_case(seed: u64) -> (Assembly, Assembly, ChaCha8Rng) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t = scene(rng.random_range(1..=5), seed);
    let p = perturb(&t, &mut rng);
    (p, t, rng)
}

pub fn same_metrics(a: &ScoreReport, b: &ScoreReport) -> bool {
    (a.f1_b - b.f1_b).abs() < 1e-9
        && (a.f1_e - b.f1_e).abs() < 1e-9
        && (a.f1_a - b.f1_a).abs() < 1e-9
        && (a.aed - b.aed).abs() < 1e-9
}

/// Symmetries read straight off the shape data: rotations that map the
/// bounding box and the set of (polarity, position, axis) connection points
/// onto themselves.
pub fn analytic_symmetries(shape: &BrickShape) -> BTreeSet<SymmetryOp> {
    let key = |v: &Vec3| (v.x.round() as i64, v.y.round() as i64, v.z.round() as i64);
    let points: BTreeSet<_> =
        shape.connection_points.iter().map(|p| (p.polarity, key(&p.local_position), key(&p.local_axis))).collect();
    let bb = shape.bounding_box;
    SymmetryOp::candidates()
        .into_iter()
        .filter(|op| {
            let r = op.matrix();
            let moved: BTreeSet<_> = shape
                .connection_points
                .iter()
                .map(|p| (p.polarity, key(&(r * p.local_position)), key(&(r * p.local_axis))))
                .collect();
            let rb = bb.transformed(&r, &Vec3::zeros());
            moved == points && key(&rb.min) == key(&bb.min) && key(&rb.max) == key(&bb.max)
        })
        .collect()
}
