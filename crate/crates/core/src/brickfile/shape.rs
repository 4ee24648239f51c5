//! Brick shapes: geometry, connection points and collision boxes.

use serde::{Deserialize, Serialize};

use crate::math::{Mat3, Vec3};

pub const STUD_PITCH: f64 = 20.0;
pub const BRICK_HEIGHT: f64 = 24.0;
pub const PLATE_HEIGHT: f64 = 8.0;
pub const STUD_HEIGHT: f64 = 4.0;
pub const STUD_RADIUS: f64 = 6.0;
const TOP_THICKNESS: f64 = 4.0;
const WALL_THICKNESS: f64 = 1.5;
const STUD_SEGMENTS: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Polarity {
    #[serde(rename = "+")]
    Positive,
    #[serde(rename = "-")]
    Negative,
}

impl Polarity {
    pub fn opposite(self) -> Polarity {
        match self {
            Polarity::Positive => Polarity::Negative,
            Polarity::Negative => Polarity::Positive,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Polarity::Positive => '+',
            Polarity::Negative => '-',
        }
    }

    pub fn from_symbol(s: &str) -> Option<Polarity> {
        match s {
            "+" => Some(Polarity::Positive),
            "-" => Some(Polarity::Negative),
            _ => None,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Polarity::Positive => 0,
            Polarity::Negative => 1,
        }
    }

    pub const BOTH: [Polarity; 2] = [Polarity::Positive, Polarity::Negative];
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConnectionPoint {
    pub index: u32,
    pub polarity: Polarity,
    pub kind: String,
    pub local_position: Vec3,
    /// Unit vector pointing out of the part.
    pub local_axis: Vec3,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub fn new(min: Vec3, max: Vec3) -> Aabb {
        Aabb { min, max }
    }

    pub fn empty() -> Aabb {
        Aabb { min: Vec3::repeat(f64::INFINITY), max: Vec3::repeat(f64::NEG_INFINITY) }
    }

    pub fn is_empty(&self) -> bool {
        (0..3).any(|i| self.min[i] > self.max[i])
    }

    pub fn grow(&mut self, p: &Vec3) {
        self.min = self.min.inf(p);
        self.max = self.max.sup(p);
    }

    pub fn union(&self, other: &Aabb) -> Aabb {
        Aabb { min: self.min.inf(&other.min), max: self.max.sup(&other.max) }
    }

    pub fn size(&self) -> Vec3 {
        self.max - self.min
    }

    pub fn center(&self) -> Vec3 {
        (self.min + self.max) * 0.5
    }

    pub fn corners(&self) -> [Vec3; 8] {
        let (a, b) = (self.min, self.max);
        [
            Vec3::new(a.x, a.y, a.z),
            Vec3::new(b.x, a.y, a.z),
            Vec3::new(a.x, b.y, a.z),
            Vec3::new(b.x, b.y, a.z),
            Vec3::new(a.x, a.y, b.z),
            Vec3::new(b.x, a.y, b.z),
            Vec3::new(a.x, b.y, b.z),
            Vec3::new(b.x, b.y, b.z),
        ]
    }

    /// Axis-aligned bounds of this box after a rigid transform.
    pub fn transformed(&self, rotation: &Mat3, translation: &Vec3) -> Aabb {
        let mut out = Aabb::empty();
        for c in self.corners() {
            out.grow(&(rotation * c + translation));
        }
        out
    }

    pub fn inflated(&self, by: f64) -> Aabb {
        Aabb { min: self.min.add_scalar(-by), max: self.max.add_scalar(by) }
    }

    pub fn contains(&self, p: &Vec3) -> bool {
        (0..3).all(|i| p[i] >= self.min[i] && p[i] <= self.max[i])
    }

    /// Per-axis overlap lengths (negative when separated).
    pub fn overlap(&self, other: &Aabb) -> Vec3 {
        self.max.inf(&other.max) - self.min.sup(&other.min)
    }
}

/// A flat-shaded triangle with an outward unit normal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Triangle {
    pub v: [Vec3; 3],
    pub normal: Vec3,
}

impl Triangle {
    /// Triangle whose normal follows the winding `(b - a) × (c - a)`.
    pub fn from_winding(a: Vec3, b: Vec3, c: Vec3) -> Option<Triangle> {
        let n = (b - a).cross(&(c - a));
        let len = n.norm();
        (len > 1e-12).then(|| Triangle { v: [a, b, c], normal: n / len })
    }

    /// Triangle oriented so its normal points along `outward`.
    pub fn facing(a: Vec3, b: Vec3, c: Vec3, outward: Vec3) -> Triangle {
        let n = (b - a).cross(&(c - a));
        if n.dot(&outward) >= 0.0 {
            Triangle { v: [a, b, c], normal: outward }
        } else {
            Triangle { v: [a, c, b], normal: outward }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BrickShape {
    pub shape_id: u32,
    pub canonical_name: String,
    pub description: String,
    pub mesh: Vec<Triangle>,
    pub connection_points: Vec<ConnectionPoint>,
    pub collision_boxes: Vec<Aabb>,
    pub bounding_box: Aabb,
}

impl BrickShape {
    pub fn point(&self, index: u32) -> Option<&ConnectionPoint> {
        self.connection_points.get(index as usize)
    }

    pub fn points_with(&self, polarity: Polarity) -> impl Iterator<Item = &ConnectionPoint> {
        self.connection_points.iter().filter(move |p| p.polarity == polarity)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CoreKind {
    Brick,
    Plate,
}

/// Parameters of a procedurally generated rectangular brick or plate.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoreShape {
    pub shape_id: u32,
    pub name: String,
    /// Studs along the local X axis.
    pub studs_x: u32,
    /// Studs along the local Z axis.
    pub studs_z: u32,
    pub kind: CoreKind,
}

impl CoreShape {
    pub fn new(shape_id: u32, studs_x: u32, studs_z: u32, kind: CoreKind) -> CoreShape {
        CoreShape { shape_id, name: format!("{shape_id}.dat"), studs_x, studs_z, kind }
    }

    /// 2×4 brick, 2×2 brick, 1×2 brick, 1×1 brick, 2×4 plate, 2×2 plate.
    pub fn default_set() -> Vec<CoreShape> {
        vec![
            CoreShape::new(3001, 4, 2, CoreKind::Brick),
            CoreShape::new(3003, 2, 2, CoreKind::Brick),
            CoreShape::new(3004, 2, 1, CoreKind::Brick),
            CoreShape::new(3005, 1, 1, CoreKind::Brick),
            CoreShape::new(3020, 4, 2, CoreKind::Plate),
            CoreShape::new(3022, 2, 2, CoreKind::Plate),
        ]
    }

    pub fn height(&self) -> f64 {
        match self.kind {
            CoreKind::Brick => BRICK_HEIGHT,
            CoreKind::Plate => PLATE_HEIGHT,
        }
    }

    fn description(&self) -> String {
        let kind = match self.kind {
            CoreKind::Brick => "Brick",
            CoreKind::Plate => "Plate",
        };
        format!("{kind} {} x {}", self.studs_z.min(self.studs_x), self.studs_z.max(self.studs_x))
    }

    /// Build the shape. The local origin sits at the centre of the top face,
    /// `-Y` is up, the body spans `y ∈ [0, height]`.
    pub fn build(&self) -> BrickShape {
        let hx = f64::from(self.studs_x) * STUD_PITCH / 2.0;
        let hz = f64::from(self.studs_z) * STUD_PITCH / 2.0;
        let h = self.height();
        let body = Aabb::new(Vec3::new(-hx, 0.0, -hz), Vec3::new(hx, h, hz));

        let cells: Vec<(f64, f64)> = (0..self.studs_z)
            .flat_map(|iz| {
                (0..self.studs_x).map(move |ix| {
                    (
                        -hx + STUD_PITCH * (f64::from(ix) + 0.5),
                        -hz + STUD_PITCH * (f64::from(iz) + 0.5),
                    )
                })
            })
            .collect();

        let mut points = Vec::with_capacity(cells.len() * 2);
        for (polarity, y, axis) in [
            (Polarity::Positive, -STUD_HEIGHT, Vec3::new(0.0, -1.0, 0.0)),
            (Polarity::Negative, h - STUD_HEIGHT, Vec3::new(0.0, 1.0, 0.0)),
        ] {
            for &(x, z) in &cells {
                points.push(ConnectionPoint {
                    index: points.len() as u32,
                    polarity,
                    kind: "stud".into(),
                    local_position: Vec3::new(x, y, z),
                    local_axis: axis,
                });
            }
        }

        let mut mesh = shell_mesh(hx, hz, h);
        for &(x, z) in &cells {
            stud_mesh(x, z, &mut mesh);
        }

        BrickShape {
            shape_id: self.shape_id,
            canonical_name: self.name.clone(),
            description: self.description(),
            mesh,
            connection_points: points,
            collision_boxes: vec![body],
            bounding_box: body,
        }
    }
}

fn quad(mesh: &mut Vec<Triangle>, a: Vec3, b: Vec3, c: Vec3, d: Vec3, outward: Vec3) {
    mesh.push(Triangle::facing(a, b, c, outward));
    mesh.push(Triangle::facing(a, c, d, outward));
}

/// Box with a solid top slab and an open bottom.
fn shell_mesh(hx: f64, hz: f64, h: f64) -> Vec<Triangle> {
    let mut m = Vec::new();
    let (ix, iz, it) = (hx - WALL_THICKNESS, hz - WALL_THICKNESS, TOP_THICKNESS);
    let v = Vec3::new;
    // top
    quad(&mut m, v(-hx, 0.0, -hz), v(hx, 0.0, -hz), v(hx, 0.0, hz), v(-hx, 0.0, hz), v(0.0, -1.0, 0.0));
    // outer walls
    quad(&mut m, v(hx, 0.0, -hz), v(hx, h, -hz), v(hx, h, hz), v(hx, 0.0, hz), v(1.0, 0.0, 0.0));
    quad(&mut m, v(-hx, 0.0, -hz), v(-hx, 0.0, hz), v(-hx, h, hz), v(-hx, h, -hz), v(-1.0, 0.0, 0.0));
    quad(&mut m, v(-hx, 0.0, hz), v(hx, 0.0, hz), v(hx, h, hz), v(-hx, h, hz), v(0.0, 0.0, 1.0));
    quad(&mut m, v(-hx, 0.0, -hz), v(-hx, h, -hz), v(hx, h, -hz), v(hx, 0.0, -hz), v(0.0, 0.0, -1.0));
    // bottom rim
    let down = v(0.0, 1.0, 0.0);
    quad(&mut m, v(-hx, h, -hz), v(hx, h, -hz), v(ix, h, -iz), v(-ix, h, -iz), down);
    quad(&mut m, v(hx, h, -hz), v(hx, h, hz), v(ix, h, iz), v(ix, h, -iz), down);
    quad(&mut m, v(hx, h, hz), v(-hx, h, hz), v(-ix, h, iz), v(ix, h, iz), down);
    quad(&mut m, v(-hx, h, hz), v(-hx, h, -hz), v(-ix, h, -iz), v(-ix, h, iz), down);
    // inner walls face the cavity
    quad(&mut m, v(ix, it, -iz), v(ix, h, -iz), v(ix, h, iz), v(ix, it, iz), v(-1.0, 0.0, 0.0));
    quad(&mut m, v(-ix, it, -iz), v(-ix, it, iz), v(-ix, h, iz), v(-ix, h, -iz), v(1.0, 0.0, 0.0));
    quad(&mut m, v(-ix, it, iz), v(ix, it, iz), v(ix, h, iz), v(-ix, h, iz), v(0.0, 0.0, -1.0));
    quad(&mut m, v(-ix, it, -iz), v(-ix, h, -iz), v(ix, h, -iz), v(ix, it, -iz), v(0.0, 0.0, 1.0));
    // cavity ceiling
    quad(&mut m, v(-ix, it, -iz), v(ix, it, -iz), v(ix, it, iz), v(-ix, it, iz), down);
    m
}

/// `(cos, sin)` of `k * 30°` from exact constants.
fn thirty_degree_cos_sin(k: usize) -> (f64, f64) {
    let r3 = 3.0f64.sqrt() / 2.0;
    let base = [(1.0, 0.0), (r3, 0.5), (0.5, r3)];
    let (c, s) = base[k % 3];
    // rotate by (k / 3) quarter turns
    match (k / 3) % 4 {
        0 => (c, s),
        1 => (-s, c),
        2 => (-c, -s),
        _ => (s, -c),
    }
}

fn stud_mesh(x: f64, z: f64, mesh: &mut Vec<Triangle>) {
    let top = -STUD_HEIGHT;
    let ring: Vec<(f64, f64)> = (0..STUD_SEGMENTS)
        .map(|k| {
            let (c, s) = thirty_degree_cos_sin(k);
            (x + STUD_RADIUS * c, z + STUD_RADIUS * s)
        })
        .collect();
    let centre = Vec3::new(x, top, z);
    for k in 0..STUD_SEGMENTS {
        let (x0, z0) = ring[k];
        let (x1, z1) = ring[(k + 1) % STUD_SEGMENTS];
        let (cm, sm) = {
            let (c0, s0) = thirty_degree_cos_sin(k);
            let (c1, s1) = thirty_degree_cos_sin(k + 1);
            let (mx, mz) = (c0 + c1, s0 + s1);
            let len = (mx * mx + mz * mz).sqrt();
            (mx / len, mz / len)
        };
        quad(
            mesh,
            Vec3::new(x0, top, z0),
            Vec3::new(x1, top, z1),
            Vec3::new(x1, 0.0, z1),
            Vec3::new(x0, 0.0, z0),
            Vec3::new(cm, 0.0, sm),
        );
        mesh.push(Triangle::facing(
            centre,
            Vec3::new(x0, top, z0),
            Vec3::new(x1, top, z1),
            Vec3::new(0.0, -1.0, 0.0),
        ));
    }
}
