#![allow(dead_code)]

pub mod oracles;

use std::sync::{Arc, OnceLock};

use brickmake_core::assembly::{Assembly, BrickInstance};
use brickmake_core::brickfile::{load_shape_library, LibraryConfig, ShapeLibrary};
use brickmake_core::datagen::{random_assembly, GeneratorConfig};
use brickmake_core::math::{axis_rotation, cube_rotations, rotation_about, Axis, Mat3, Vec3};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn lib() -> Arc<ShapeLibrary> {
    static LIB: OnceLock<Arc<ShapeLibrary>> = OnceLock::new();
    Arc::clone(LIB.get_or_init(|| Arc::new(load_shape_library(&LibraryConfig::default()).unwrap())))
}

pub fn scene(size: usize, seed: u64) -> Assembly {
    random_assembly(&GeneratorConfig::for_library(&lib(), size, seed), &lib()).unwrap()
}

pub fn brick(id: u32, shape: u32, color: u32, t: [f64; 3]) -> BrickInstance {
    BrickInstance::new(id, shape, color, Mat3::identity(), Vec3::new(t[0], t[1], t[2]))
}

/// A prediction derived from `target`: bricks dropped, shifted, recoloured,
/// turned, plus the odd stray brick.
pub fn perturb(target: &Assembly, rng: &mut ChaCha8Rng) -> Assembly {
    let mut out = Assembly::new();
    for inst in target.instances() {
        let mut b = inst.clone();
        match rng.random_range(0..8) {
            0 => continue,
            1 => b.translation.x += 20.0 * f64::from(rng.random_range(-3..=3)),
            2 => b.translation.z += 20.0 * f64::from(rng.random_range(-3..=3)),
            3 => b.color_id = [1, 4, 14, 15][rng.random_range(0..4)],
            4 => b.rotation = axis_rotation(Axis::Y, rng.random_range(1..4)) * b.rotation,
            _ => {}
        }
        out.insert_with_id(BrickInstance::new(b.instance_id + 100, b.shape_id, b.color_id, b.rotation, b.translation));
    }
    if rng.random_bool(0.3) {
        let shapes = lib().shape_ids();
        let s = shapes[rng.random_range(0..shapes.len())];
        let t = [20.0 * f64::from(rng.random_range(-4..=4)), -24.0 * f64::from(rng.random_range(0..3)), 0.0];
        out.insert(brick(0, s, 4, t));
    }
    out
}

/// A random rigid motion: any rotation, any translation.
pub fn rigid(rng: &mut ChaCha8Rng) -> (Mat3, Vec3) {
    let r = if rng.random_bool(0.5) {
        cube_rotations()[rng.random_range(0..24)]
    } else {
        let axis = Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let axis = if axis.norm() < 1e-3 { Vec3::y() } else { axis.normalize() };
        rotation_about(&axis, rng.random_range(0.0..std::f64::consts::TAU))
    };
    let t = Vec3::new(rng.random_range(-500.0..500.0), rng.random_range(-500.0..500.0), rng.random_range(-500.0..500.0));
    (r, t)
}

/// One LDraw-flavoured line: plausible records, truncated records, garbage
/// tokens and the occasional invalid UTF-8 byte.
pub fn fuzz_line(rng: &mut ChaCha8Rng) -> Vec<u8> {
    const TOKENS: [&str; 24] = [
        "0", "1", "2", "3", "4", "5", "6", "FILE", "NOFILE", "3001.dat", "3003.DAT", "parts\\3022.dat", "sub.ldr",
        "-1", "1e308", "-0", "nan", "inf", "0.5", "x", "", "\t", "99999999999", "\u{00e9}",
    ];
    let mut out: Vec<u8> = Vec::new();
    match rng.random_range(0..4) {
        0 => {
            let n = rng.random_range(0..18);
            for _ in 0..n {
                out.extend_from_slice(TOKENS[rng.random_range(0..TOKENS.len())].as_bytes());
                out.push(b' ');
            }
        }
        1 => {
            out.extend_from_slice(b"1 ");
            for _ in 0..rng.random_range(10..15) {
                out.extend_from_slice(format!("{} ", rng.random_range(-3.0..3.0f64)).as_bytes());
            }
            out.extend_from_slice(TOKENS[rng.random_range(9..13)].as_bytes());
        }
        2 => {
            let name = ["a.ldr", "b.ldr", "sub.ldr"][rng.random_range(0..3)];
            out.extend_from_slice(format!("0 FILE {name}").as_bytes());
        }
        _ => {
            for _ in 0..rng.random_range(0..40) {
                out.push(rng.random());
            }
            out.retain(|b| *b != b'\n');
        }
    }
    out
}
