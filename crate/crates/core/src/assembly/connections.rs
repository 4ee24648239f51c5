use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::assembly::{Assembly, BrickInstance};
use crate::brickfile::shape::Polarity;
use crate::brickfile::ShapeLibrary;
use crate::math::Vec3;

pub const POSITION_TOLERANCE: f64 = 1.0;
pub const AXIS_TOLERANCE_DEG: f64 = 2.0;
const BUCKET: f64 = 2.0;

/// A connection point on a specific instance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PointRef {
    pub instance_id: u32,
    pub point: u32,
}

/// A mated pair; `a` is the positive-polarity endpoint.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Connection {
    pub a: PointRef,
    pub b: PointRef,
}

#[derive(Clone, Debug)]
pub(crate) struct WorldPoint<'a> {
    pub at: PointRef,
    pub polarity: Polarity,
    pub kind: &'a str,
    pub position: Vec3,
    pub axis: Vec3,
}

pub(crate) fn world_points<'a>(inst: &BrickInstance, library: &'a ShapeLibrary) -> Vec<WorldPoint<'a>> {
    let Some(shape) = library.shape(inst.shape_id) else { return Vec::new() };
    shape
        .connection_points
        .iter()
        .map(|p| WorldPoint {
            at: PointRef { instance_id: inst.instance_id, point: p.index },
            polarity: p.polarity,
            kind: p.kind.as_str(),
            position: inst.to_world(&p.local_position),
            axis: inst.axis_to_world(&p.local_axis),
        })
        .collect()
}

fn bucket(p: &Vec3) -> (i64, i64, i64) {
    ((p.x / BUCKET).floor() as i64, (p.y / BUCKET).floor() as i64, (p.z / BUCKET).floor() as i64)
}

pub(crate) fn mates(p: &WorldPoint, q: &WorldPoint) -> bool {
    let cos_tol = AXIS_TOLERANCE_DEG.to_radians().cos();
    p.at.instance_id != q.at.instance_id
        && p.polarity != q.polarity
        && p.kind == q.kind
        && (p.position - q.position).norm() <= POSITION_TOLERANCE
        && p.axis.dot(&q.axis) <= -cos_tol
}

fn oriented(p: &WorldPoint, q: &WorldPoint) -> Connection {
    if p.polarity == Polarity::Positive {
        Connection { a: p.at, b: q.at }
    } else {
        Connection { a: q.at, b: p.at }
    }
}

struct PointIndex<'a> {
    points: Vec<WorldPoint<'a>>,
    grid: HashMap<(i64, i64, i64), Vec<usize>>,
}

impl<'a> PointIndex<'a> {
    fn build(points: Vec<WorldPoint<'a>>) -> Self {
        let mut grid: HashMap<_, Vec<usize>> = HashMap::new();
        for (i, p) in points.iter().enumerate() {
            grid.entry(bucket(&p.position)).or_default().push(i);
        }
        PointIndex { points, grid }
    }

    fn near(&self, p: &Vec3) -> impl Iterator<Item = &WorldPoint<'a>> + '_ {
        let (bx, by, bz) = bucket(p);
        let mut hits = Vec::new();
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    if let Some(v) = self.grid.get(&(bx + dx, by + dy, bz + dz)) {
                        hits.extend(v.iter().copied());
                    }
                }
            }
        }
        hits.into_iter().map(move |i| &self.points[i])
    }
}

/// Every mated point pair in the assembly.
pub fn detect_connections(assembly: &Assembly, library: &ShapeLibrary) -> BTreeSet<Connection> {
    let points: Vec<WorldPoint> = assembly.instances().flat_map(|i| world_points(i, library)).collect();
    let index = PointIndex::build(points);
    let mut out = BTreeSet::new();
    for p in index.points.iter().filter(|p| p.polarity == Polarity::Positive) {
        for q in index.near(&p.position) {
            if mates(p, q) {
                out.insert(oriented(p, q));
            }
        }
    }
    out
}

/// Connections a candidate instance would form with the assembly, skipping
/// instances in `ignore` (and any instance sharing the candidate's id).
pub fn connections_of(
    assembly: &Assembly,
    candidate: &BrickInstance,
    library: &ShapeLibrary,
    ignore: &[u32],
) -> BTreeSet<Connection> {
    let points: Vec<WorldPoint> = assembly
        .instances()
        .filter(|i| i.instance_id != candidate.instance_id && !ignore.contains(&i.instance_id))
        .flat_map(|i| world_points(i, library))
        .collect();
    let index = PointIndex::build(points);
    let mut out = BTreeSet::new();
    for p in world_points(candidate, library) {
        for q in index.near(&p.position) {
            if mates(&p, q) {
                out.insert(oriented(&p, q));
            }
        }
    }
    out
}

/// Unordered instance pairs `(low, high)` joined by at least one connection.
pub fn instance_edges(connections: &BTreeSet<Connection>) -> BTreeSet<(u32, u32)> {
    connections
        .iter()
        .map(|c| {
            let (x, y) = (c.a.instance_id, c.b.instance_id);
            (x.min(y), x.max(y))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::brickfile::{load_shape_library, LibraryConfig};
    use crate::math::Mat3;

    fn lib() -> ShapeLibrary {
        load_shape_library(&LibraryConfig::default()).unwrap()
    }

    fn two(shape: u32, top: Vec3) -> Assembly {
        let mut a = Assembly::new();
        a.insert(BrickInstance::new(0, shape, 4, Mat3::identity(), Vec3::zeros()));
        a.insert(BrickInstance::new(0, shape, 1, Mat3::identity(), top));
        a
    }

    #[test]
    fn stacked_two_by_four_has_eight() {
        let c = detect_connections(&two(3001, Vec3::new(0.0, -24.0, 0.0)), &lib());
        assert_eq!(c.len(), 8);
        for conn in &c {
            assert_eq!(conn.a.instance_id, 1);
            assert_eq!(conn.b.instance_id, 2);
        }
    }

    #[test]
    fn shifted_one_stud_has_six() {
        let c = detect_connections(&two(3001, Vec3::new(20.0, -24.0, 0.0)), &lib());
        assert_eq!(c.len(), 6);
    }

    #[test]
    fn far_apart_has_none() {
        assert!(detect_connections(&two(3001, Vec3::new(1000.0, 0.0, 0.0)), &lib()).is_empty());
    }

    #[test]
    fn candidate_connections_match_full_detection() {
        let library = lib();
        let a = two(3003, Vec3::new(20.0, -24.0, 20.0));
        let full = detect_connections(&a, &library);
        let top = a.get(2).unwrap();
        let only = a.subset(&[1]);
        assert_eq!(connections_of(&only, top, &library, &[]), full);
        assert_eq!(full.len(), 1);
    }
}
