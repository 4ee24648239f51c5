use std::collections::BTreeMap;

use crate::assembly::connections::{detect_connections, instance_edges};
use crate::assembly::Assembly;
use crate::brickfile::ShapeLibrary;
use crate::metrics::Counts;

/// Multiset F1 over (shape, colour).
pub fn f1_bricks(predicted: &Assembly, target: &Assembly) -> Counts {
    let p = predicted.brick_counts();
    let t = target.brick_counts();
    let tp: usize = p.iter().map(|(k, n)| (*n).min(t.get(k).copied().unwrap_or(0))).sum();
    Counts { tp, fp: predicted.len() - tp, fn_: target.len() - tp }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum EdgeError {
    #[error("matching refers to predicted instance {0}, which is not in the prediction")]
    UnknownPredicted(u32),
    #[error("matching refers to target instance {0}, which is not in the target")]
    UnknownTarget(u32),
}

/// Edge F1 under a predicted-to-target matching.
pub fn f1_edges(
    predicted: &Assembly,
    target: &Assembly,
    library: &ShapeLibrary,
    matching: &BTreeMap<u32, u32>,
) -> Result<Counts, EdgeError> {
    for (&p, &t) in matching {
        if !predicted.contains(p) {
            return Err(EdgeError::UnknownPredicted(p));
        }
        if !target.contains(t) {
            return Err(EdgeError::UnknownTarget(t));
        }
    }
    let pred_edges = instance_edges(&detect_connections(predicted, library));
    let targ_edges = instance_edges(&detect_connections(target, library));
    let mut hit = std::collections::BTreeSet::new();
    let mut tp = 0;
    for &(i, j) in &pred_edges {
        let mapped = matching.get(&i).zip(matching.get(&j)).map(|(&a, &b)| (a.min(b), a.max(b)));
        match mapped {
            Some(e) if targ_edges.contains(&e) => {
                tp += 1;
                hit.insert(e);
            }
            _ => {}
        }
    }
    Ok(Counts { tp, fp: pred_edges.len() - tp, fn_: targ_edges.len() - hit.len() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::BrickInstance;
    use crate::math::{Mat3, Vec3};

    fn bricks(spec: &[(u32, u32)]) -> Assembly {
        Assembly::from_instances(spec.iter().enumerate().map(|(i, &(s, c))| {
            BrickInstance::new(i as u32 + 1, s, c, Mat3::identity(), Vec3::new(100.0 * i as f64, 0.0, 0.0))
        }))
    }

    #[test]
    fn multiset_arithmetic() {
        let c = f1_bricks(&bricks(&[(1, 1), (1, 1), (2, 1)]), &bricks(&[(1, 1), (2, 1), (2, 1)]));
        assert_eq!(c, Counts { tp: 2, fp: 1, fn_: 1 });
        assert!((c.f1() - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(f1_bricks(&Assembly::new(), &Assembly::new()).f1(), 1.0);
        assert_eq!(f1_bricks(&Assembly::new(), &bricks(&[(1, 1)])).f1(), 0.0);
    }

    #[test]
    fn disconnected_prediction_misses_the_edge() {
        let lib = crate::brickfile::load_shape_library(&Default::default()).unwrap();
        let target = Assembly::from_instances([
            BrickInstance::new(1, 3001, 4, Mat3::identity(), Vec3::zeros()),
            BrickInstance::new(2, 3001, 4, Mat3::identity(), Vec3::new(0.0, -24.0, 0.0)),
        ]);
        let pred = Assembly::from_instances([
            BrickInstance::new(1, 3001, 4, Mat3::identity(), Vec3::zeros()),
            BrickInstance::new(2, 3001, 4, Mat3::identity(), Vec3::new(0.0, -24.0, 300.0)),
        ]);
        let m: BTreeMap<u32, u32> = [(1, 1), (2, 2)].into();
        let c = f1_edges(&pred, &target, &lib, &m).unwrap();
        assert_eq!(c, Counts { tp: 0, fp: 0, fn_: 1 });
        assert_eq!(c.f1(), 0.0);
        let bad: BTreeMap<u32, u32> = [(9, 1)].into();
        assert_eq!(f1_edges(&pred, &target, &lib, &bad), Err(EdgeError::UnknownPredicted(9)));
    }
}
