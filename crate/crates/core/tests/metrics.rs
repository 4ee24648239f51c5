mod common;

use std::collections::BTreeMap;

use brickmake_core::assembly::{detect_connections, Assembly, BrickInstance};
use brickmake_core::math::{axis_rotation, Axis, Mat3, Vec3};
use brickmake_core::metrics::{align_once, score_all, MetricConfig, ScoreReport};
use common::oracles::{exhaustive_best, metric_case, same_metrics, small_case};
use common::{brick, lib, rigid, scene};
use proptest::prelude::*;
use rand::Rng;

fn f1(tp: usize, fp: usize, fn_: usize) -> f64 {
    if tp + fp + fn_ == 0 {
        1.0
    } else {
        2.0 * tp as f64 / (2 * tp + fp + fn_) as f64
    }
}

fn score(p: &Assembly, t: &Assembly) -> ScoreReport {
    score_all(p, t, &lib(), &MetricConfig::default())
}

fn two_brick_target() -> Assembly {
    Assembly::from_instances([brick(1, 3001, 4, [0.0, 0.0, 0.0]), brick(2, 3003, 1, [-20.0, -24.0, 0.0])])
}

#[test]
fn perfect_reconstruction_scores_perfectly_under_rigid_motion() {
    let t = two_brick_target();
    let p = t.transformed(&axis_rotation(Axis::Y, 3), &Vec3::new(400.0, -48.0, 60.0));
    let r = score(&p, &t);
    assert_eq!((r.f1_b, r.f1_e, r.f1_a, r.aed), (1.0, 1.0, 1.0, 0.0));
}

#[test]
fn one_misplaced_brick_costs_half_the_assembly_f1_and_one_edit() {
    let t = two_brick_target();
    let mut p = t.clone();
    // Half a brick towards -z. (A shift to +x would be a half turn of the
    // whole model, which is no mistake at all.)
    p.set_pose(2, Mat3::identity(), Vec3::new(-20.0, -24.0, -20.0)).unwrap();
    assert_eq!(detect_connections(&p, &lib()).len(), 2, "still attached by two studs");
    let r = score(&p, &t);
    // One brick aligns, the other needs its own transform.
    assert_eq!(r.assembly.tp, 1);
    assert!((r.f1_a - f1(1, 1, 1)).abs() < 1e-12);
    assert_eq!(r.aed, 1.0);
    assert_eq!((r.f1_b, r.f1_e), (1.0, 1.0));
}

#[test]
fn empty_prediction_against_eight_bricks() {
    let t = scene(8, 3);
    let r = score(&Assembly::new(), &t);
    assert_eq!(r.aed, 16.0);
    assert_eq!((r.f1_b, r.f1_e, r.f1_a), (0.0, 0.0, 0.0));
}

#[test]
fn wrong_colour_is_not_aligned() {
    let t = two_brick_target();
    let mut p = Assembly::new();
    for inst in t.instances() {
        p.insert_with_id(BrickInstance::new(inst.instance_id, inst.shape_id, 2, inst.rotation, inst.translation));
    }
    let r = score(&p, &t);
    assert_eq!((r.f1_b, r.f1_a, r.aed), (0.0, 0.0, 2.0 + 4.0));
}

#[test]
fn symmetric_turn_is_free_but_quarter_turn_is_not() {
    let t = Assembly::from_instances([brick(1, 3001, 4, [0.0, 0.0, 0.0])]);
    let half = Assembly::from_instances([BrickInstance::new(1, 3001, 4, axis_rotation(Axis::Y, 2), Vec3::zeros())]);
    assert_eq!(score(&half, &t).f1_a, 1.0);
    // A lone brick can always be aligned by the rigid transform itself.
    let quarter = Assembly::from_instances([BrickInstance::new(1, 3001, 4, axis_rotation(Axis::Y, 1), Vec3::zeros())]);
    assert_eq!(score(&quarter, &t).f1_a, 1.0);
    let two = two_brick_target();
    let mut turned = two.clone();
    turned.set_pose(1, axis_rotation(Axis::Y, 1), Vec3::zeros()).unwrap();
    assert_eq!(score(&turned, &two).assembly.tp, 1);
}

#[test]
fn exhaustive_matches_on_fixed_seeds() {
    for seed in 0..50 {
        let (p, t) = small_case(seed);
        let got = align_once(&p, &t, lib().symmetries(), &MetricConfig::default());
        assert_eq!((got.pairs.len(), got.residual), exhaustive_best(&p, &t), "seed {seed}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn rigid_motion_of_prediction_changes_nothing(seed in any::<u64>()) {
        let (p, t, mut rng) = metric_case(seed);
        let (r, x) = rigid(&mut rng);
        prop_assert!(same_metrics(&score(&p, &t), &score(&p.transformed(&r, &x), &t)));
    }

    #[test]
    fn symmetric_brick_turns_change_nothing(seed in any::<u64>()) {
        let (p, t, mut rng) = metric_case(seed);
        let sym = lib().symmetries().clone();
        let mut q = Assembly::new();
        for inst in p.instances() {
            let ops = sym.rotations(inst.shape_id);
            let s = ops[rng.random_range(0..ops.len())];
            q.insert_with_id(inst.with_pose(inst.rotation * s, inst.translation));
        }
        prop_assert!(same_metrics(&score(&p, &t), &score(&q, &t)));
    }

    #[test]
    fn counts_and_bounds(seed in any::<u64>()) {
        let (p, t, _) = metric_case(seed);
        let r = score(&p, &t);
        prop_assert!(r.assembly.tp <= r.bricks.tp);
        prop_assert!(r.aed >= 0.0);
        prop_assert!(r.aed <= (p.len() + 2 * t.len()) as f64);
        let matched: BTreeMap<u32, u32> = r.alignment.matching.clone();
        prop_assert_eq!(matched.len() + r.alignment.leftover_predicted.len(), p.len());
        prop_assert_eq!(matched.len() + r.alignment.leftover_target.len(), t.len());
    }

    #[test]
    fn align_once_matches_exhaustive_search(seed in any::<u64>()) {
        let (p, t) = small_case(seed);
        let got = align_once(&p, &t, lib().symmetries(), &MetricConfig::default());
        prop_assert_eq!((got.pairs.len(), got.residual), exhaustive_best(&p, &t));
    }
}
