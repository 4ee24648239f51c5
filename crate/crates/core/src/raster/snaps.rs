use serde::{Deserialize, Serialize};

use crate::assembly::{Assembly, PointRef};
use crate::brickfile::shape::Polarity;
use crate::brickfile::ShapeLibrary;
use crate::raster::camera::{Projection, ViewTransform};

pub const SPLAT_RADIUS: f64 = 3.0;
pub const DEPTH_BIAS: f64 = 2.0;
/// Full-resolution pixels per snap cell along each axis.
pub const CELL: usize = 4;

/// Downsampled grid of connection-point references, row-major.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SnapGrid {
    pub width: usize,
    pub height: usize,
    pub cells: Vec<Option<PointRef>>,
}

impl SnapGrid {
    pub fn empty(width: usize, height: usize) -> Self {
        SnapGrid { width, height, cells: vec![None; width * height] }
    }

    pub fn get(&self, row: usize, col: usize) -> Option<PointRef> {
        if row < self.height && col < self.width {
            self.cells[row * self.width + col]
        } else {
            None
        }
    }

    /// Cells holding `r`, as `(row, col)` in row-major order.
    pub fn cells_of(&self, r: PointRef) -> Vec<(usize, usize)> {
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, c)| **c == Some(r))
            .map(|(i, _)| (i / self.width, i % self.width))
            .collect()
    }

    pub fn occupied(&self) -> usize {
        self.cells.iter().filter(|c| c.is_some()).count()
    }

    /// `grid <width> <height>` followed by `cell <row> <col> <instance> <point>`
    /// for each occupied cell in row-major order.
    pub fn to_records(&self) -> String {
        let mut out = format!("grid {} {}\n", self.width, self.height);
        for (i, c) in self.cells.iter().enumerate() {
            if let Some(r) = c {
                out.push_str(&format!("cell {} {} {} {}\n", i / self.width, i % self.width, r.instance_id, r.point));
            }
        }
        out
    }

    pub fn parse_records(text: &str) -> Option<SnapGrid> {
        let mut lines = text.lines();
        let head: Vec<usize> = lines.next()?.strip_prefix("grid ")?.split(' ').map(|t| t.parse().ok()).collect::<Option<_>>()?;
        let [width, height] = head[..] else { return None };
        let mut grid = SnapGrid::empty(width, height);
        for line in lines {
            let v: Vec<u32> = line.strip_prefix("cell ")?.split(' ').map(|t| t.parse().ok()).collect::<Option<_>>()?;
            let [row, col, instance_id, point] = v[..] else { return None };
            let (row, col) = (row as usize, col as usize);
            if row >= height || col >= width {
                return None;
            }
            grid.cells[row * width + col] = Some(PointRef { instance_id, point });
        }
        Some(grid)
    }
}

/// A visible connection point and where it projects.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProjectedPoint {
    pub at: PointRef,
    pub sx: f64,
    pub sy: f64,
}

/// Scene depth of a finished render, row-major.
#[derive(Clone, Copy, Debug)]
pub struct DepthMap<'a> {
    pub depth: &'a [f32],
    pub width: usize,
    pub height: usize,
}

/// Connection points of one polarity that pass the depth test, in
/// instance-then-point order.
pub fn visible_points(
    assembly: &Assembly,
    library: &ShapeLibrary,
    view: &ViewTransform,
    projection: &Projection,
    scene: DepthMap<'_>,
    polarity: Polarity,
) -> Vec<ProjectedPoint> {
    let DepthMap { depth: scene_depth, width, height } = scene;
    let near = match projection {
        Projection::Perspective { near, .. } => *near,
        Projection::Orthographic { .. } => f64::NEG_INFINITY,
    };
    let mut out = Vec::new();
    for inst in assembly.instances() {
        let Some(shape) = library.shape(inst.shape_id) else { continue };
        for p in shape.points_with(polarity) {
            let v = view.to_view(&inst.to_world(&p.local_position));
            if v.z < near {
                continue;
            }
            let (sx, sy) = projection.to_screen(&v, width, height);
            if !(sx >= 0.0 && sy >= 0.0 && sx < width as f64 && sy < height as f64) {
                continue;
            }
            let idx = sy.floor() as usize * width + sx.floor() as usize;
            if v.z <= f64::from(scene_depth[idx]) + DEPTH_BIAS {
                out.push(ProjectedPoint { at: PointRef { instance_id: inst.instance_id, point: p.index }, sx, sy });
            }
        }
    }
    out
}

/// Splat visible points into a `width/4 × height/4` grid; each cell keeps the
/// covering point whose projection is nearest the cell center.
pub fn splat(points: &[ProjectedPoint], width: usize, height: usize) -> SnapGrid {
    let (gw, gh) = (width / CELL, height / CELL);
    let mut grid = SnapGrid::empty(gw, gh);
    let mut best: Vec<Option<(f64, PointRef)>> = vec![None; gw * gh];
    let r2 = SPLAT_RADIUS * SPLAT_RADIUS;
    for p in points {
        let x0 = (p.sx - SPLAT_RADIUS).floor().max(0.0) as usize;
        let y0 = (p.sy - SPLAT_RADIUS).floor().max(0.0) as usize;
        let x1 = ((p.sx + SPLAT_RADIUS).ceil() as usize).min(width - 1);
        let y1 = ((p.sy + SPLAT_RADIUS).ceil() as usize).min(height - 1);
        for py in y0..=y1 {
            for px in x0..=x1 {
                let (dx, dy) = (px as f64 + 0.5 - p.sx, py as f64 + 0.5 - p.sy);
                if dx * dx + dy * dy > r2 {
                    continue;
                }
                let (row, col) = (py / CELL, px / CELL);
                let (cx, cy) = ((col * CELL) as f64 + CELL as f64 / 2.0, (row * CELL) as f64 + CELL as f64 / 2.0);
                let d = (p.sx - cx).powi(2) + (p.sy - cy).powi(2);
                let slot = &mut best[row * gw + col];
                let better = match slot {
                    None => true,
                    Some((bd, br)) => d < *bd || (d == *bd && p.at < *br),
                };
                if better {
                    *slot = Some((d, p.at));
                }
            }
        }
    }
    for (cell, b) in grid.cells.iter_mut().zip(best) {
        *cell = b.map(|(_, r)| r);
    }
    grid
}

/// Snap grid for one polarity given the scene depth from a matching render.
pub fn render_snaps(
    assembly: &Assembly,
    library: &ShapeLibrary,
    view: &ViewTransform,
    projection: &Projection,
    scene: DepthMap<'_>,
    polarity: Polarity,
) -> SnapGrid {
    let pts = visible_points(assembly, library, view, projection, scene, polarity);
    splat(&pts, scene.width, scene.height)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nearest_center_wins() {
        let a = PointRef { instance_id: 1, point: 0 };
        let b = PointRef { instance_id: 2, point: 0 };
        let pts = [ProjectedPoint { at: a, sx: 6.0, sy: 6.0 }, ProjectedPoint { at: b, sx: 9.0, sy: 6.0 }];
        let g = splat(&pts, 16, 16);
        assert_eq!(g.get(1, 1), Some(a));
        assert_eq!(g.get(1, 2), Some(b));
        assert_eq!(g.get(3, 3), None);
    }

    #[test]
    fn records_round_trip() {
        let mut g = SnapGrid::empty(4, 3);
        g.cells[6] = Some(PointRef { instance_id: 5, point: 2 });
        let text = g.to_records();
        assert_eq!(text, "grid 4 3\ncell 1 2 5 2\n");
        assert_eq!(SnapGrid::parse_records(&text), Some(g));
        assert_eq!(SnapGrid::parse_records("grid 2 2\ncell 2 0 1 1\n"), None);
    }
}
