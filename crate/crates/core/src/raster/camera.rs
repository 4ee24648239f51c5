use serde::{Deserialize, Serialize};

use crate::assembly::Assembly;
use crate::brickfile::ShapeLibrary;
use crate::math::{up, Mat3, Vec3};

pub const AZIMUTH_STEPS: u8 = 8;
pub const DEFAULT_DISTANCE: f64 = 200.0;
pub const NEAR: f64 = 1.0;
pub const FAR: f64 = 10_000.0;
/// `1 / tan(30°)`, the focal scale of a 60° vertical field of view.
pub const FOCAL_SCALE: f64 = 1.732_050_807_568_877_2;
const TAN_30: f64 = 1.0 / FOCAL_SCALE;

/// Orbit camera: 45° azimuth steps, ±30° elevation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CameraState {
    pub azimuth_index: u8,
    /// `+1` looks down from above, `-1` looks up from below.
    pub elevation_sign: i8,
    pub center: Vec3,
    pub distance: f64,
}

impl Default for CameraState {
    fn default() -> Self {
        CameraState { azimuth_index: 0, elevation_sign: 1, center: Vec3::zeros(), distance: DEFAULT_DISTANCE }
    }
}

/// `(sin, cos)` of `index · 45°` from exact constants.
fn azimuth_sin_cos(index: u8) -> (f64, f64) {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    match index % AZIMUTH_STEPS {
        0 => (0.0, 1.0),
        1 => (h, h),
        2 => (1.0, 0.0),
        3 => (h, -h),
        4 => (0.0, -1.0),
        5 => (-h, -h),
        6 => (-1.0, 0.0),
        _ => (-h, h),
    }
}

impl CameraState {
    pub fn orbit(mut self, steps: i32) -> Self {
        self.azimuth_index = (i32::from(self.azimuth_index) + steps).rem_euclid(i32::from(AZIMUTH_STEPS)) as u8;
        self
    }

    pub fn with_elevation(mut self, sign: i8) -> Self {
        self.elevation_sign = if sign >= 0 { 1 } else { -1 };
        self
    }

    /// Unit vector from the center towards the eye.
    pub fn eye_direction(&self) -> Vec3 {
        let (s, c) = azimuth_sin_cos(self.azimuth_index);
        let ce = 3f64.sqrt() / 2.0;
        let se = 0.5 * f64::from(self.elevation_sign.signum());
        Vec3::new(ce * s, -se, ce * c)
    }

    pub fn eye(&self) -> Vec3 {
        self.center + self.eye_direction() * self.distance
    }
}

/// World-to-view transform. View axes: x right, y down, z forward.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ViewTransform {
    pub rows: Mat3,
    pub eye: Vec3,
}

impl ViewTransform {
    /// Camera at `eye` looking along the unit `forward`, rolled so that
    /// `up_hint` points up in the image.
    pub fn look_along(eye: Vec3, forward: Vec3, up_hint: Vec3) -> Self {
        let f = forward.normalize();
        let r = f.cross(&up_hint).normalize();
        let d = f.cross(&r);
        ViewTransform { rows: Mat3::from_rows(&[r.transpose(), d.transpose(), f.transpose()]), eye }
    }

    pub fn to_view(&self, p: &Vec3) -> Vec3 {
        self.rows * (p - self.eye)
    }

    pub fn dir_to_view(&self, d: &Vec3) -> Vec3 {
        self.rows * d
    }

    pub fn forward(&self) -> Vec3 {
        self.rows.row(2).transpose()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Projection {
    /// Vertical field of view `2·atan(1/focal_scale)`.
    Perspective { focal_scale: f64, near: f64, far: f64 },
    /// Half of the visible height in LDU.
    Orthographic { half_height: f64 },
}

impl Projection {
    pub fn standard() -> Self {
        Projection::Perspective { focal_scale: FOCAL_SCALE, near: NEAR, far: FAR }
    }

    /// Screen position (pixels, y down) of a view-space point.
    pub fn to_screen(&self, v: &Vec3, width: usize, height: usize) -> (f64, f64) {
        let (hw, hh) = (width as f64 / 2.0, height as f64 / 2.0);
        match *self {
            Projection::Perspective { focal_scale, .. } => {
                let s = hh * focal_scale / v.z;
                (hw + v.x * s, hh + v.y * s)
            }
            Projection::Orthographic { half_height } => {
                let s = hh / half_height;
                (hw + v.x * s, hh + v.y * s)
            }
        }
    }

    pub fn is_perspective(&self) -> bool {
        matches!(self, Projection::Perspective { .. })
    }
}

/// Look-at transform of an orbit camera.
pub fn camera_pose(state: &CameraState) -> ViewTransform {
    ViewTransform::look_along(state.eye(), -state.eye_direction(), up())
}

/// Re-center on the assembly and back off far enough to see all of it.
pub fn frame_scene(assembly: &Assembly, library: &ShapeLibrary, camera: &CameraState) -> CameraState {
    let Some(center) = assembly.centroid() else { return *camera };
    let mut radius: f64 = 0.0;
    for inst in assembly.instances() {
        if let Some(shape) = library.shape(inst.shape_id) {
            for c in shape.bounding_box.transformed(&inst.rotation, &inst.translation).corners() {
                radius = radius.max((c - center).norm());
            }
        }
    }
    CameraState { center, distance: DEFAULT_DISTANCE.max(1.5 * radius / TAN_30), ..*camera }
}
