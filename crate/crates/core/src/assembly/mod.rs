//! Assembly state: brick instances, derived connections, collision and
//! removability queries, connected components, rotation helpers and shape
//! symmetries.

pub mod collision;
pub mod components;
pub mod connections;
pub mod rotation;
pub mod symmetry;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::brickfile::shape::Aabb;
use crate::brickfile::ShapeLibrary;
use crate::math::{Mat3, Vec3};

pub use collision::{collides, removable, sweep_direction, world_boxes};
pub use components::connected_components;
pub use connections::{connections_of, detect_connections, Connection, PointRef};
pub use rotation::{geodesic_distance, min_symmetric_distance, oriented_aligned};
pub use symmetry::{compute_symmetries, SymmetryConfig, SymmetryError, SymmetryOp, SymmetryTable};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AssemblyError {
    #[error("unknown instance {0}")]
    UnknownInstance(u32),
    #[error("unknown shape {0}")]
    UnknownShape(u32),
    #[error("instance {instance} has no connection point {point}")]
    UnknownPoint { instance: u32, point: u32 },
}

fn canonical_zero(v: f64) -> f64 {
    if v == 0.0 {
        0.0
    } else {
        v
    }
}

/// One placed brick: shape, colour and rigid pose.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BrickInstance {
    pub instance_id: u32,
    pub shape_id: u32,
    pub color_id: u32,
    pub rotation: Mat3,
    pub translation: Vec3,
}

impl BrickInstance {
    /// Negative zeros are folded into positive zeros so that written files
    /// and state hashes do not depend on how a pose was computed.
    pub fn new(instance_id: u32, shape_id: u32, color_id: u32, rotation: Mat3, translation: Vec3) -> Self {
        BrickInstance {
            instance_id,
            shape_id,
            color_id,
            rotation: rotation.map(canonical_zero),
            translation: translation.map(canonical_zero),
        }
    }

    pub fn with_pose(&self, rotation: Mat3, translation: Vec3) -> Self {
        BrickInstance::new(self.instance_id, self.shape_id, self.color_id, rotation, translation)
    }

    pub fn to_world(&self, local: &Vec3) -> Vec3 {
        self.rotation * local + self.translation
    }

    pub fn axis_to_world(&self, local: &Vec3) -> Vec3 {
        self.rotation * local
    }

    /// Apply a global rigid transform `x ↦ R·x + t`.
    pub fn transformed(&self, r: &Mat3, t: &Vec3) -> Self {
        self.with_pose(r * self.rotation, r * self.translation + t)
    }
}

/// A set of brick instances keyed by id.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Assembly {
    instances: BTreeMap<u32, BrickInstance>,
    next_id: u32,
}

impl Assembly {
    pub fn new() -> Self {
        Assembly { instances: BTreeMap::new(), next_id: 1 }
    }

    /// Build from instances keeping their ids (ids must be positive and distinct).
    pub fn from_instances(instances: impl IntoIterator<Item = BrickInstance>) -> Self {
        let mut a = Assembly::new();
        for inst in instances {
            a.insert_with_id(inst);
        }
        a
    }

    /// Insert under a fresh id; returns the id.
    pub fn insert(&mut self, inst: BrickInstance) -> u32 {
        let id = self.next_id.max(1);
        let mut inst = BrickInstance::new(id, inst.shape_id, inst.color_id, inst.rotation, inst.translation);
        inst.instance_id = id;
        self.instances.insert(id, inst);
        self.next_id = id + 1;
        id
    }

    /// Insert keeping `inst.instance_id`, replacing any instance with that id.
    pub fn insert_with_id(&mut self, inst: BrickInstance) {
        assert!(inst.instance_id > 0, "instance ids are positive");
        let id = inst.instance_id;
        let inst = BrickInstance::new(id, inst.shape_id, inst.color_id, inst.rotation, inst.translation);
        self.instances.insert(id, inst);
        self.next_id = self.next_id.max(id + 1);
    }

    pub fn remove(&mut self, id: u32) -> Option<BrickInstance> {
        self.instances.remove(&id)
    }

    pub fn get(&self, id: u32) -> Option<&BrickInstance> {
        self.instances.get(&id)
    }

    pub fn contains(&self, id: u32) -> bool {
        self.instances.contains_key(&id)
    }

    /// Replace the pose of an existing instance.
    pub fn set_pose(&mut self, id: u32, rotation: Mat3, translation: Vec3) -> Result<(), AssemblyError> {
        let inst = self.instances.get_mut(&id).ok_or(AssemblyError::UnknownInstance(id))?;
        *inst = inst.with_pose(rotation, translation);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn next_id(&self) -> u32 {
        self.next_id
    }

    /// Instances in ascending id order.
    pub fn instances(&self) -> impl Iterator<Item = &BrickInstance> + '_ {
        self.instances.values()
    }

    pub fn ids(&self) -> Vec<u32> {
        self.instances.keys().copied().collect()
    }

    pub fn clear(&mut self) {
        self.instances.clear();
    }

    /// Sub-assembly of the given ids (unknown ids are skipped), ids preserved.
    pub fn subset(&self, ids: &[u32]) -> Assembly {
        Assembly::from_instances(ids.iter().filter_map(|id| self.get(*id).cloned()))
    }

    /// Copy renumbered densely from 1 in id order.
    pub fn renumbered(&self) -> Assembly {
        let mut a = Assembly::new();
        for inst in self.instances() {
            a.insert(inst.clone());
        }
        a
    }

    /// Apply one global rigid transform to every instance.
    pub fn transformed(&self, r: &Mat3, t: &Vec3) -> Assembly {
        Assembly {
            instances: self.instances.iter().map(|(k, v)| (*k, v.transformed(r, t))).collect(),
            next_id: self.next_id,
        }
    }

    /// Centroid of instance translations.
    pub fn centroid(&self) -> Option<Vec3> {
        if self.is_empty() {
            return None;
        }
        let sum = self.instances().fold(Vec3::zeros(), |acc, i| acc + i.translation);
        Some(sum / self.len() as f64)
    }

    /// World AABB over the bounding boxes of all instances.
    pub fn world_bounds(&self, library: &ShapeLibrary) -> Aabb {
        let mut out = Aabb::empty();
        for inst in self.instances() {
            if let Some(shape) = library.shape(inst.shape_id) {
                out = out.union(&shape.bounding_box.transformed(&inst.rotation, &inst.translation));
            }
        }
        out
    }

    /// Multiset of (shape, colour) pairs.
    pub fn brick_counts(&self) -> BTreeMap<(u32, u32), usize> {
        let mut out = BTreeMap::new();
        for inst in self.instances() {
            *out.entry((inst.shape_id, inst.color_id)).or_insert(0) += 1;
        }
        out
    }

    /// Check that every instance refers to a library shape.
    pub fn check_shapes(&self, library: &ShapeLibrary) -> Result<(), AssemblyError> {
        match self.instances().find(|i| library.shape(i.shape_id).is_none()) {
            Some(i) => Err(AssemblyError::UnknownShape(i.shape_id)),
            None => Ok(()),
        }
    }
}
