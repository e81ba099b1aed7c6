//! Zhang-Suen two-subiteration thinning.

use crate::error::{Error, Result};
use crate::raster::RasterGrid;

/// Neighbors P2..P9, clockwise from north.
const RING: [(isize, isize); 8] = [
    (-1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
    (1, 0),
    (1, -1),
    (0, -1),
    (-1, -1),
];

fn neighborhood(px: &[bool], h: usize, w: usize, r: usize, c: usize) -> [bool; 8] {
    let mut out = [false; 8];
    for (k, (dr, dc)) in RING.iter().enumerate() {
        let rr = r as isize + dr;
        let cc = c as isize + dc;
        if rr >= 0 && cc >= 0 && (rr as usize) < h && (cc as usize) < w {
            out[k] = px[rr as usize * w + cc as usize];
        }
    }
    out
}

/// Reduces a binary mask to a one-pixel-wide skeleton.
pub fn thin(mask: &RasterGrid) -> Result<RasterGrid> {
    if mask.channels() != 1 {
        return Err(Error::Shape(format!("thin expects 1 channel, got {}", mask.channels())));
    }
    if !mask.is_binary() {
        return Err(Error::InvalidInput("thin expects a binary {0,1} mask".into()));
    }
    let (h, w) = (mask.height(), mask.width());
    let mut px: Vec<bool> = mask.data().iter().map(|&v| v != 0.0).collect();
    let mut doomed = Vec::new();
    loop {
        let mut changed = false;
        for step in 0..2 {
            doomed.clear();
            for r in 0..h {
                for c in 0..w {
                    if !px[r * w + c] {
                        continue;
                    }
                    let n = neighborhood(&px, h, w, r, c);
                    let b = n.iter().filter(|&&v| v).count();
                    if !(2..=6).contains(&b) {
                        continue;
                    }
                    let a = (0..8).filter(|&k| !n[k] && n[(k + 1) % 8]).count();
                    if a != 1 {
                        continue;
                    }
                    let [p2, _, p4, _, p6, _, p8, _] = n;
                    let keep = if step == 0 {
                        (p2 && p4 && p6) || (p4 && p6 && p8)
                    } else {
                        (p2 && p4 && p8) || (p2 && p6 && p8)
                    };
                    if !keep {
                        doomed.push(r * w + c);
                    }
                }
            }
            if !doomed.is_empty() {
                changed = true;
                for &i in &doomed {
                    px[i] = false;
                }
            }
        }
        if !changed {
            break;
        }
    }
    RasterGrid::from_vec(h, w, 1, px.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect())
}
