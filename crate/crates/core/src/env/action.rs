//! Actions and their fixed integer encoding.
//!
//! Layout (offsets in order):
//!
//! | code range | action |
//! |---|---|
//! | 0 | End |
//! | 1 | SwitchPhase |
//! | 2 .. 12 | RotateCamera: workspace × {left, right, up, down, frame} |
//! | next `S·C` | Pick: library shape index × palette colour index |
//! | next `2·T` | Disassemble: polarity × table cell |
//! | next `3·2·T` | RotateBrick: angle × polarity × table cell |
//! | next `2·H` | AssembleHandOnly: polarity × hand cell |
//! | next `2·H · 2·T` | Assemble: hand cursor × table cursor |
//!
//! `T` and `H` are the table and hand snap-grid cell counts; a cursor index
//! is `polarity · cells + row · width + col` with positive polarity first.

use serde::{Deserialize, Serialize};

use crate::brickfile::shape::Polarity;
use crate::brickfile::ShapeLibrary;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Workspace {
    Table,
    Hand,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CameraMove {
    Left,
    Right,
    Up,
    Down,
    Frame,
}

impl CameraMove {
    pub const ALL: [CameraMove; 5] = [CameraMove::Left, CameraMove::Right, CameraMove::Up, CameraMove::Down, CameraMove::Frame];
}

/// A snap-grid cell and the polarity layer to read.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Cursor {
    pub row: u32,
    pub col: u32,
    pub polarity: Polarity,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Action {
    Disassemble { cursor: Cursor },
    Assemble { hand: Cursor, table: Cursor },
    AssembleHandOnly { hand: Cursor },
    Pick { shape_id: u32, color_id: u32 },
    RotateBrick { cursor: Cursor, angle: u32 },
    RotateCamera { workspace: Workspace, direction: CameraMove },
    SwitchPhase,
    End,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum EncodeError {
    #[error("code {0} is outside the action space")]
    OutOfRange(u64),
    #[error("action is not representable in this action space: {0}")]
    Unrepresentable(String),
}

/// Sizes that fix the encoding.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionSpace {
    pub table_width: u32,
    pub table_height: u32,
    pub hand_width: u32,
    pub hand_height: u32,
    pub shapes: Vec<u32>,
    pub colors: Vec<u32>,
}

/// Named sub-range of the encoding.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub name: String,
    pub start: u64,
    pub len: u64,
}

const ANGLES: [u32; 3] = [90, 180, 270];

impl ActionSpace {
    pub fn new(table_grid: (u32, u32), hand_grid: (u32, u32), library: &ShapeLibrary) -> Self {
        ActionSpace {
            table_width: table_grid.0,
            table_height: table_grid.1,
            hand_width: hand_grid.0,
            hand_height: hand_grid.1,
            shapes: library.shape_ids(),
            colors: library.palette(),
        }
    }

    pub fn table_cells(&self) -> u64 {
        u64::from(self.table_width) * u64::from(self.table_height)
    }

    pub fn hand_cells(&self) -> u64 {
        u64::from(self.hand_width) * u64::from(self.hand_height)
    }

    pub fn segments(&self) -> Vec<Segment> {
        let (t, h) = (2 * self.table_cells(), 2 * self.hand_cells());
        let sizes = [
            ("end", 1),
            ("switch_phase", 1),
            ("rotate_camera", 10),
            ("pick", (self.shapes.len() * self.colors.len()) as u64),
            ("disassemble", t),
            ("rotate_brick", 3 * t),
            ("assemble_hand_only", h),
            ("assemble", h * t),
        ];
        let mut start = 0;
        sizes
            .iter()
            .map(|&(name, len)| {
                let s = Segment { name: name.to_string(), start, len };
                start += len;
                s
            })
            .collect()
    }

    pub fn size(&self) -> u64 {
        self.segments().iter().map(|s| s.len).sum()
    }

    fn cursor_index(c: &Cursor, w: u32, h: u32) -> Option<u64> {
        (c.row < h && c.col < w).then(|| {
            c.polarity.index() as u64 * u64::from(w) * u64::from(h) + u64::from(c.row) * u64::from(w) + u64::from(c.col)
        })
    }

    fn cursor_at(i: u64, w: u32, h: u32) -> Cursor {
        let cells = u64::from(w) * u64::from(h);
        let polarity = if i / cells == 0 { Polarity::Positive } else { Polarity::Negative };
        let r = i % cells;
        Cursor { row: (r / u64::from(w)) as u32, col: (r % u64::from(w)) as u32, polarity }
    }

    pub fn encode(&self, action: &Action) -> Result<u64, EncodeError> {
        let seg = self.segments();
        let bad = || EncodeError::Unrepresentable(format!("{action:?}"));
        let table = |c: &Cursor| Self::cursor_index(c, self.table_width, self.table_height).ok_or_else(bad);
        let hand = |c: &Cursor| Self::cursor_index(c, self.hand_width, self.hand_height).ok_or_else(bad);
        Ok(match action {
            Action::End => 0,
            Action::SwitchPhase => 1,
            Action::RotateCamera { workspace, direction } => {
                let w = match workspace {
                    Workspace::Table => 0,
                    Workspace::Hand => 1,
                };
                let d = CameraMove::ALL.iter().position(|m| m == direction).unwrap() as u64;
                seg[2].start + w * 5 + d
            }
            Action::Pick { shape_id, color_id } => {
                let s = self.shapes.iter().position(|x| x == shape_id).ok_or_else(bad)?;
                let c = self.colors.iter().position(|x| x == color_id).ok_or_else(bad)?;
                seg[3].start + (s * self.colors.len() + c) as u64
            }
            Action::Disassemble { cursor } => seg[4].start + table(cursor)?,
            Action::RotateBrick { cursor, angle } => {
                let a = ANGLES.iter().position(|x| x == angle).ok_or_else(bad)? as u64;
                seg[5].start + a * 2 * self.table_cells() + table(cursor)?
            }
            Action::AssembleHandOnly { hand: h } => seg[6].start + hand(h)?,
            Action::Assemble { hand: h, table: t } => seg[7].start + hand(h)? * 2 * self.table_cells() + table(t)?,
        })
    }

    pub fn decode(&self, code: u64) -> Result<Action, EncodeError> {
        let seg = self.segments();
        let k = seg.iter().position(|s| code >= s.start && code < s.start + s.len).ok_or(EncodeError::OutOfRange(code))?;
        let i = code - seg[k].start;
        let (tw, th, hw, hh) = (self.table_width, self.table_height, self.hand_width, self.hand_height);
        let t2 = 2 * self.table_cells();
        Ok(match k {
            0 => Action::End,
            1 => Action::SwitchPhase,
            2 => Action::RotateCamera {
                workspace: if i < 5 { Workspace::Table } else { Workspace::Hand },
                direction: CameraMove::ALL[(i % 5) as usize],
            },
            3 => {
                let n = self.colors.len() as u64;
                Action::Pick { shape_id: self.shapes[(i / n) as usize], color_id: self.colors[(i % n) as usize] }
            }
            4 => Action::Disassemble { cursor: Self::cursor_at(i, tw, th) },
            5 => Action::RotateBrick { cursor: Self::cursor_at(i % t2, tw, th), angle: ANGLES[(i / t2) as usize] },
            6 => Action::AssembleHandOnly { hand: Self::cursor_at(i, hw, hh) },
            _ => Action::Assemble { hand: Self::cursor_at(i / t2, hw, hh), table: Self::cursor_at(i % t2, tw, th) },
        })
    }
}
