use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::assembly::connections::world_points;
use crate::assembly::{collides, Assembly, BrickInstance};
use crate::brickfile::ShapeLibrary;
use crate::env::mating_rotation;
use crate::math::{quarter_rotation_about, snap_entries, Mat3, Vec3};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub brick_count: usize,
    pub shapes: Vec<u32>,
    pub colors: Vec<u32>,
    pub seed: u64,
    pub max_retries: usize,
}

impl GeneratorConfig {
    /// Every library shape and palette colour.
    pub fn for_library(library: &ShapeLibrary, brick_count: usize, seed: u64) -> Self {
        GeneratorConfig { brick_count, shapes: library.shape_ids(), colors: library.palette(), seed, max_retries: 100 }
    }
}

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum GenerateError {
    #[error("brick count must be at least 1")]
    NoBricks,
    #[error("shape and colour pools must be non-empty")]
    EmptyPool,
    #[error("shape {0} is not in the library")]
    UnknownShape(u32),
    #[error("gave up on brick {brick} after {retries} retries")]
    RetriesExhausted { brick: usize, retries: usize },
}

/// Grow a connected assembly by repeatedly mating a random new brick onto a
/// random compatible free point. Deterministic per seed.
pub fn random_assembly(cfg: &GeneratorConfig, library: &ShapeLibrary) -> Result<Assembly, GenerateError> {
    if cfg.brick_count == 0 {
        return Err(GenerateError::NoBricks);
    }
    if cfg.shapes.is_empty() || cfg.colors.is_empty() {
        return Err(GenerateError::EmptyPool);
    }
    if let Some(&s) = cfg.shapes.iter().find(|s| library.shape(**s).is_none()) {
        return Err(GenerateError::UnknownShape(s));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut scene = Assembly::new();
    let shape = cfg.shapes[rng.random_range(0..cfg.shapes.len())];
    let color = cfg.colors[rng.random_range(0..cfg.colors.len())];
    scene.insert(BrickInstance::new(0, shape, color, Mat3::identity(), Vec3::zeros()));

    for brick in 1..cfg.brick_count {
        let scene_points: Vec<_> = scene.instances().flat_map(|i| world_points(i, library)).collect();
        let mut placed = false;
        for _ in 0..cfg.max_retries {
            let shape_id = cfg.shapes[rng.random_range(0..cfg.shapes.len())];
            let color_id = cfg.colors[rng.random_range(0..cfg.colors.len())];
            let shape = library.shape(shape_id).expect("checked above");
            let p = &shape.connection_points[rng.random_range(0..shape.connection_points.len())];
            let compatible: Vec<_> =
                scene_points.iter().filter(|q| q.polarity != p.polarity && q.kind == p.kind).collect();
            if compatible.is_empty() {
                continue;
            }
            let q = compatible[rng.random_range(0..compatible.len())];
            let yaw = rng.random_range(0..4);
            let base = mating_rotation(&p.local_axis, &-q.axis, &Mat3::identity());
            let rotation = snap_entries(&(quarter_rotation_about(&q.axis, yaw) * base));
            let translation = q.position - rotation * p.local_position;
            let cand = BrickInstance::new(0, shape_id, color_id, rotation, translation);
            if !collides(&scene, &cand, library, &[]) {
                scene.insert(cand);
                placed = true;
                break;
            }
        }
        if !placed {
            return Err(GenerateError::RetriesExhausted { brick, retries: cfg.max_retries });
        }
    }
    Ok(scene)
}
