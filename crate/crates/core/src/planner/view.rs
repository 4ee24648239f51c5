use std::iter::repeat_n;

use crate::assembly::{Assembly, PointRef};
use crate::brickfile::shape::Polarity;
use crate::brickfile::ShapeLibrary;
use crate::env::{Action, CameraMove, Cursor, Workspace};
use crate::raster::{frame_scene, CameraState, Frame};

/// A camera state and the moves that reach it from the current one.
#[derive(Clone, Debug, PartialEq)]
pub struct CameraOption {
    pub moves: Vec<CameraMove>,
    pub camera: CameraState,
}

impl CameraOption {
    pub fn actions(&self, workspace: Workspace) -> impl Iterator<Item = Action> + '_ {
        self.moves.iter().map(move |&direction| Action::RotateCamera { workspace, direction })
    }
}

const ORBITS: [i32; 8] = [0, 1, -1, 2, -2, 3, -3, 4];

/// Distinct camera states reachable by an optional Frame, an orbit and an
/// optional elevation flip, cheapest first. At most `limit` options; the
/// current camera comes first.
pub fn camera_options(current: &CameraState, scene: &Assembly, library: &ShapeLibrary, limit: usize) -> Vec<CameraOption> {
    let framed = frame_scene(scene, library, current);
    let mut all = Vec::new();
    for frame in [false, true] {
        if frame && framed == *current {
            continue;
        }
        let base = if frame { framed } else { *current };
        for flip in [false, true] {
            for k in ORBITS {
                let mut moves = Vec::new();
                if frame {
                    moves.push(CameraMove::Frame);
                }
                let dir = if k > 0 { CameraMove::Right } else { CameraMove::Left };
                moves.extend(repeat_n(dir, k.unsigned_abs() as usize));
                let mut camera = base.orbit(k);
                if flip {
                    let sign = -camera.elevation_sign;
                    moves.push(if sign > 0 { CameraMove::Up } else { CameraMove::Down });
                    camera = camera.with_elevation(sign);
                }
                all.push(CameraOption { moves, camera });
            }
        }
    }
    all.sort_by_key(|o| o.moves.len());
    let mut out: Vec<CameraOption> = Vec::new();
    for o in all {
        if out.len() < limit && !out.iter().any(|x| x.camera == o.camera) {
            out.push(o);
        }
    }
    out
}

/// First cell holding `r`, if it holds at least `min_cells` cells.
pub(crate) fn visible_cell(frame: &Frame, r: PointRef, polarity: Polarity, min_cells: usize) -> Option<Cursor> {
    let cells = frame.snaps(polarity).cells_of(r);
    (cells.len() >= min_cells.max(1)).then(|| Cursor { row: cells[0].0 as u32, col: cells[0].1 as u32, polarity })
}
