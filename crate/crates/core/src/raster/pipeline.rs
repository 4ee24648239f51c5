//! Fixed-point triangle rasterization with a z-buffer.
//!
//! Vertices are snapped to a 1/16-pixel grid and coverage is decided with
//! exact integer edge functions and a top-left fill rule, so the output is
//! independent of evaluation order and platform.

use crate::brickfile::shape::Triangle;
use crate::math::{Mat3, Vec3};
use crate::raster::camera::{Projection, ViewTransform};

const SUBPIXEL_BITS: u32 = 4;
const ONE: i64 = 1 << SUBPIXEL_BITS;
const HALF: i64 = ONE / 2;
/// Screen coordinates are clamped well inside the i64 edge-function range.
const COORD_LIMIT: f64 = 1.0e7;

pub const AMBIENT: f64 = 0.4;
pub const DIFFUSE: f64 = 0.6;

/// Unit vector towards the light.
pub fn light_direction() -> Vec3 {
    Vec3::new(-1.0, -2.0, -1.0).normalize()
}

pub fn shade(rgb: [u8; 3], normal: &Vec3) -> [u8; 3] {
    let k = AMBIENT + DIFFUSE * normal.dot(&light_direction()).max(0.0);
    rgb.map(|c| (f64::from(c) * k).round().clamp(0.0, 255.0) as u8)
}

/// Colour, depth and instance-id buffers, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Buffers {
    pub width: usize,
    pub height: usize,
    pub color: Vec<[u8; 3]>,
    pub depth: Vec<f32>,
    pub ids: Vec<u32>,
}

impl Buffers {
    pub fn new(width: usize, height: usize, background: [u8; 3]) -> Self {
        let n = width * height;
        Buffers { width, height, color: vec![background; n], depth: vec![f32::INFINITY; n], ids: vec![0; n] }
    }
}

#[derive(Clone, Copy)]
struct ScreenVertex {
    x: i64,
    y: i64,
    z: f64,
}

pub struct Rasterizer<'a> {
    pub buffers: &'a mut Buffers,
    view: ViewTransform,
    projection: Projection,
}

fn edge(a: &ScreenVertex, b: &ScreenVertex, px: i64, py: i64) -> i64 {
    (b.x - a.x) * (py - a.y) - (b.y - a.y) * (px - a.x)
}

fn is_top_left(a: &ScreenVertex, b: &ScreenVertex) -> bool {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    (dy == 0 && dx > 0) || dy < 0
}

fn clip_near(poly: &[Vec3], near: f64) -> Vec<Vec3> {
    let mut out = Vec::with_capacity(poly.len() + 1);
    for i in 0..poly.len() {
        let (a, b) = (poly[i], poly[(i + 1) % poly.len()]);
        let (ina, inb) = (a.z >= near, b.z >= near);
        if ina {
            out.push(a);
        }
        if ina != inb {
            let t = (near - a.z) / (b.z - a.z);
            let mut p = a + (b - a) * t;
            p.z = near;
            out.push(p);
        }
    }
    out
}

impl<'a> Rasterizer<'a> {
    pub fn new(buffers: &'a mut Buffers, view: ViewTransform, projection: Projection) -> Self {
        Rasterizer { buffers, view, projection }
    }

    fn to_screen(&self, v: &Vec3) -> ScreenVertex {
        let (sx, sy) = self.projection.to_screen(v, self.buffers.width, self.buffers.height);
        let fx = (sx * ONE as f64).round().clamp(-COORD_LIMIT, COORD_LIMIT) as i64;
        let fy = (sy * ONE as f64).round().clamp(-COORD_LIMIT, COORD_LIMIT) as i64;
        ScreenVertex { x: fx, y: fy, z: v.z }
    }

    /// Draw a world-space triangle with its outward normal; back faces are culled.
    pub fn draw(&mut self, v: &[Vec3; 3], normal: &Vec3, rgb: [u8; 3], id: u32) {
        let p = v.map(|x| self.view.to_view(&x));
        let n = self.view.dir_to_view(normal);
        let facing = match self.projection {
            Projection::Perspective { .. } => n.dot(&p[0]) < 0.0,
            Projection::Orthographic { .. } => n.z < 0.0,
        };
        if !facing {
            return;
        }
        let color = shade(rgb, normal);
        match self.projection {
            Projection::Perspective { near, far, .. } => {
                if p.iter().all(|q| q.z > far) {
                    return;
                }
                let poly = clip_near(&p, near);
                if poly.len() < 3 {
                    return;
                }
                let sv: Vec<ScreenVertex> = poly.iter().map(|q| self.to_screen(q)).collect();
                for k in 1..sv.len() - 1 {
                    self.fill(sv[0], sv[k], sv[k + 1], color, id, Some(far));
                }
            }
            Projection::Orthographic { .. } => {
                let sv = p.map(|q| self.to_screen(&q));
                self.fill(sv[0], sv[1], sv[2], color, id, None);
            }
        }
    }

    fn fill(&mut self, v0: ScreenVertex, mut v1: ScreenVertex, mut v2: ScreenVertex, color: [u8; 3], id: u32, far: Option<f64>) {
        let mut area = edge(&v0, &v1, v2.x, v2.y);
        if area == 0 {
            return;
        }
        if area < 0 {
            std::mem::swap(&mut v1, &mut v2);
            area = -area;
        }
        let (w, h) = (self.buffers.width as i64, self.buffers.height as i64);
        let min_x = (v0.x.min(v1.x).min(v2.x) >> SUBPIXEL_BITS).max(0);
        let max_x = (v0.x.max(v1.x).max(v2.x) >> SUBPIXEL_BITS).min(w - 1);
        let min_y = (v0.y.min(v1.y).min(v2.y) >> SUBPIXEL_BITS).max(0);
        let max_y = (v0.y.max(v1.y).max(v2.y) >> SUBPIXEL_BITS).min(h - 1);
        if min_x > max_x || min_y > max_y {
            return;
        }
        let bias = [
            if is_top_left(&v1, &v2) { 0 } else { -1 },
            if is_top_left(&v2, &v0) { 0 } else { -1 },
            if is_top_left(&v0, &v1) { 0 } else { -1 },
        ];
        let perspective = far.is_some();
        let inv_area = 1.0 / area as f64;
        let (iz0, iz1, iz2) = (1.0 / v0.z, 1.0 / v1.z, 1.0 / v2.z);
        let px0 = min_x * ONE + HALF;
        let py0 = min_y * ONE + HALF;
        let mut row = [edge(&v1, &v2, px0, py0), edge(&v2, &v0, px0, py0), edge(&v0, &v1, px0, py0)];
        let step_x = [-(v2.y - v1.y) * ONE, -(v0.y - v2.y) * ONE, -(v1.y - v0.y) * ONE];
        let step_y = [(v2.x - v1.x) * ONE, (v0.x - v2.x) * ONE, (v1.x - v0.x) * ONE];
        for py in min_y..=max_y {
            let mut e = row;
            let base = py as usize * self.buffers.width;
            for px in min_x..=max_x {
                if e[0] + bias[0] >= 0 && e[1] + bias[1] >= 0 && e[2] + bias[2] >= 0 {
                    let (b0, b1, b2) = (e[0] as f64 * inv_area, e[1] as f64 * inv_area, e[2] as f64 * inv_area);
                    let z = if perspective { 1.0 / (b0 * iz0 + b1 * iz1 + b2 * iz2) } else { b0 * v0.z + b1 * v1.z + b2 * v2.z };
                    let visible = far.is_none_or(|f| z <= f);
                    let idx = base + px as usize;
                    let zf = z as f32;
                    if visible && zf < self.buffers.depth[idx] {
                        self.buffers.depth[idx] = zf;
                        self.buffers.color[idx] = color;
                        self.buffers.ids[idx] = id;
                    }
                }
                for k in 0..3 {
                    e[k] += step_x[k];
                }
            }
            for k in 0..3 {
                row[k] += step_y[k];
            }
        }
    }
}

/// Depth map of a mesh under a rotation about its local origin.
pub fn render_mesh_depth(
    mesh: &[Triangle],
    rotation: &Mat3,
    view: &ViewTransform,
    projection: &Projection,
    width: usize,
    height: usize,
) -> Vec<f32> {
    let mut buffers = Buffers::new(width, height, [0, 0, 0]);
    let mut r = Rasterizer::new(&mut buffers, *view, *projection);
    for t in mesh {
        r.draw(&t.v.map(|v| rotation * v), &(rotation * t.normal), [255, 255, 255], 1);
    }
    buffers.depth
}
