mod common;

use std::collections::BTreeSet;

use brickmake_core::assembly::Assembly;
use brickmake_core::brickfile::shape::Polarity;
use brickmake_core::raster::{frame_scene, render, CameraState, BACKGROUND};
use common::{brick, lib, scene};

fn stack2() -> Assembly {
    Assembly::from_instances([brick(1, 3001, 4, [0.0, 0.0, 0.0]), brick(2, 3001, 1, [0.0, -24.0, 0.0])])
}

fn instances_in(grid: &brickmake_core::raster::SnapGrid) -> BTreeSet<u32> {
    grid.cells.iter().flatten().map(|r| r.instance_id).collect()
}

#[test]
fn look_at_center_hits_the_top_face() {
    let a = Assembly::from_instances([brick(1, 3001, 4, [0.0, 0.0, 0.0])]);
    let f = render(&a, &lib(), &CameraState::default(), 256, 256);
    // Eye at (0, -100, 100·√3), looking at the origin, 30° down. Pixel
    // (128, 128) samples half a pixel below and right of the axis; its ray
    // meets the top face (y = 0) where -100 + z·(1/2 + b·√3/2) = 0 with
    // b = 0.5 / (128·√3).
    let i = 128 * 256 + 128;
    assert_eq!(f.instance_id[i], 1);
    let b = 0.5 / (128.0 * 3f64.sqrt());
    let z = 100.0 / (0.5 + b * 3f64.sqrt() / 2.0);
    // Vertices snap to 1/16 pixel; depth shifts about 1.6 LDU per pixel here.
    assert!((f64::from(f.depth[i]) - z).abs() < 0.1, "{} vs {z}", f.depth[i]);
    assert_eq!(f.color[0], BACKGROUND);
    assert_ne!(f.color[i], BACKGROUND);
}

#[test]
fn covered_studs_and_receptacles_are_hidden() {
    let lib = lib();
    let a = stack2();
    let above = frame_scene(&a, &lib, &CameraState::default());
    let f = render(&a, &lib, &above, 256, 256);
    assert_eq!(instances_in(&f.snap_pos), BTreeSet::from([2]));
    assert!(f.snap_neg.occupied() == 0);
    let below = above.with_elevation(-1);
    let f = render(&a, &lib, &below, 256, 256);
    assert_eq!(instances_in(&f.snap_neg), BTreeSet::from([1]));
    assert!(f.snap_pos.occupied() == 0);
}

#[test]
fn every_exposed_stud_gets_a_cell() {
    let lib = lib();
    let a = stack2();
    let cam = frame_scene(&a, &lib, &CameraState::default());
    let f = render(&a, &lib, &cam, 256, 256);
    let refs: BTreeSet<_> = f.snap_pos.cells.iter().flatten().copied().collect();
    assert_eq!(refs.len(), 8);
    for r in refs {
        assert!(!f.snap_pos.cells_of(r).is_empty());
    }
}

#[test]
fn rendering_is_deterministic() {
    let lib = lib();
    let a = scene(8, 5);
    let cam = frame_scene(&a, &lib, &CameraState::default()).orbit(3);
    let x = render(&a, &lib, &cam, 256, 256);
    let y = render(&a, &lib, &cam, 256, 256);
    assert_eq!(x.digest(), y.digest());
    assert_eq!(x.to_png(), y.to_png());
    assert_eq!(x.raw_dump(), y.raw_dump());
}

#[test]
fn png_decodes_to_the_colour_buffer() {
    let lib = lib();
    let a = scene(3, 2);
    let f = render(&a, &lib, &frame_scene(&a, &lib, &CameraState::default()), 96, 96);
    let png = f.to_png();
    let mut dec = png::Decoder::new(std::io::Cursor::new(png)).read_info().unwrap();
    let mut buf = vec![0; dec.output_buffer_size().unwrap()];
    let info = dec.next_frame(&mut buf).unwrap();
    assert_eq!((info.width, info.height), (96, 96));
    assert_eq!(&buf[..info.buffer_size()], f.color.as_flattened());
}

#[test]
fn ids_track_finite_depth_everywhere() {
    let lib = lib();
    let a = scene(6, 9);
    for az in 0..8 {
        let cam = frame_scene(&a, &lib, &CameraState::default()).orbit(az);
        let f = render(&a, &lib, &cam, 128, 128);
        for (id, d) in f.instance_id.iter().zip(&f.depth) {
            assert_eq!(*id != 0, d.is_finite());
        }
        for r in f.snap_pos.cells.iter().chain(&f.snap_neg.cells).flatten() {
            let inst = a.get(r.instance_id).unwrap();
            let p = lib.shape(inst.shape_id).unwrap().point(r.point).unwrap();
            let layer = if f.snap_pos.cells_of(*r).is_empty() { Polarity::Negative } else { Polarity::Positive };
            assert_eq!(p.polarity, layer);
        }
    }
}
