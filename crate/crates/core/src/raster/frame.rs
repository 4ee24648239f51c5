use sha2::{Digest, Sha256};

use crate::brickfile::shape::Polarity;
use crate::raster::snaps::SnapGrid;

/// One rendered workspace view.
#[derive(Clone, Debug, PartialEq)]
pub struct Frame {
    pub width: usize,
    pub height: usize,
    pub color: Vec<[u8; 3]>,
    /// View-space depth in LDU, `+∞` on background.
    pub depth: Vec<f32>,
    /// `0` on background.
    pub instance_id: Vec<u32>,
    pub snap_pos: SnapGrid,
    pub snap_neg: SnapGrid,
}

impl Frame {
    pub fn snaps(&self, polarity: Polarity) -> &SnapGrid {
        match polarity {
            Polarity::Positive => &self.snap_pos,
            Polarity::Negative => &self.snap_neg,
        }
    }

    pub fn to_png(&self) -> Vec<u8> {
        let mut out = Vec::new();
        {
            let mut enc = png::Encoder::new(&mut out, self.width as u32, self.height as u32);
            enc.set_color(png::ColorType::Rgb);
            enc.set_depth(png::BitDepth::Eight);
            let mut w = enc.write_header().expect("in-memory png header");
            w.write_image_data(self.color.as_flattened()).expect("in-memory png data");
        }
        out
    }

    /// Text header followed by little-endian instance ids and both snap grids
    /// (each cell as instance id, point index; `0, 0` when empty).
    pub fn raw_dump(&self) -> Vec<u8> {
        let header = format!(
            "brickmake-grid 1\nwidth {}\nheight {}\ninstance_id u32le {}\nsnap_pos u32le-pairs {} {}\nsnap_neg u32le-pairs {} {}\nend\n",
            self.width,
            self.height,
            self.width * self.height,
            self.snap_pos.width,
            self.snap_pos.height,
            self.snap_neg.width,
            self.snap_neg.height,
        );
        let mut out = header.into_bytes();
        for id in &self.instance_id {
            out.extend_from_slice(&id.to_le_bytes());
        }
        for grid in [&self.snap_pos, &self.snap_neg] {
            for c in &grid.cells {
                let (i, p) = c.map(|r| (r.instance_id, r.point)).unwrap_or((0, 0));
                out.extend_from_slice(&i.to_le_bytes());
                out.extend_from_slice(&p.to_le_bytes());
            }
        }
        out
    }

    /// SHA-256 over every buffer, hex encoded.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        h.update((self.width as u64).to_le_bytes());
        h.update((self.height as u64).to_le_bytes());
        h.update(self.color.as_flattened());
        for d in &self.depth {
            h.update(d.to_bits().to_le_bytes());
        }
        for i in &self.instance_id {
            h.update(i.to_le_bytes());
        }
        for grid in [&self.snap_pos, &self.snap_neg] {
            for c in &grid.cells {
                match c {
                    Some(r) => {
                        h.update([1]);
                        h.update(r.instance_id.to_le_bytes());
                        h.update(r.point.to_le_bytes());
                    }
                    None => h.update([0]),
                }
            }
        }
        hex::encode(h.finalize())
    }
}
