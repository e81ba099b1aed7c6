//! Marching-squares iso-contours of a scalar grid sampled at pixel centers.

use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::raster::RasterGrid;
use std::collections::HashMap;

/// A polyline contour. Closed contours do not repeat their first point.
/// Contours are oriented with values above the level on the left, so a
/// closed contour around a high region has positive signed area.
#[derive(Debug, Clone, PartialEq)]
pub struct Contour {
    pub points: Vec<Vec2>,
    pub closed: bool,
}

struct Lattice<'a> {
    v: &'a [f64],
    h: usize,
    w: usize,
    level: f64,
}

impl Lattice<'_> {
    fn val(&self, r: usize, c: usize) -> f64 {
        self.v[r * self.w + c]
    }

    fn high(&self, r: usize, c: usize) -> bool {
        self.val(r, c) > self.level
    }

    fn h_edge(&self, r: usize, c: usize) -> usize {
        r * (self.w - 1) + c
    }

    fn v_edge(&self, r: usize, c: usize) -> usize {
        self.h * (self.w - 1) + r * self.w + c
    }

    /// Crossing point on the lattice edge between (r0,c0) and (r1,c1), with
    /// (r0,c0) the lower-index endpoint.
    fn crossing(&self, (r0, c0): (usize, usize), (r1, c1): (usize, usize)) -> Vec2 {
        let (a, b) = (self.val(r0, c0), self.val(r1, c1));
        let t = (self.level - a) / (b - a);
        let pa = Vec2::from_row_col(r0 as f64 + 0.5, c0 as f64 + 0.5);
        let pb = Vec2::from_row_col(r1 as f64 + 0.5, c1 as f64 + 0.5);
        pa + (pb - pa) * t
    }
}

/// Extracts the `level` iso-contours of channel 0 of `prob`. A sample is
/// inside when its value is strictly above `level`. Ambiguous saddle cells
/// are resolved with the mean of the four corners.
pub fn marching_squares(prob: &RasterGrid, level: f64) -> Result<Vec<Contour>> {
    if prob.channels() != 1 {
        return Err(Error::Shape(format!(
            "marching_squares expects 1 channel, got {}",
            prob.channels()
        )));
    }
    if !level.is_finite() || prob.data().iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("marching_squares needs finite values".into()));
    }
    let (h, w) = (prob.height(), prob.width());
    if h < 2 || w < 2 {
        return Ok(Vec::new());
    }
    let lat = Lattice { v: prob.data(), h, w, level };

    let mut points: HashMap<usize, Vec2> = HashMap::new();
    let mut next: HashMap<usize, usize> = HashMap::new();
    let mut has_incoming: HashMap<usize, bool> = HashMap::new();

    for r in 0..h - 1 {
        for c in 0..w - 1 {
            let corners = [(r, c), (r, c + 1), (r + 1, c + 1), (r + 1, c)];
            let hi: Vec<bool> = corners.iter().map(|&(rr, cc)| lat.high(rr, cc)).collect();
            let n_high = hi.iter().filter(|&&b| b).count();
            if n_high == 0 || n_high == 4 {
                continue;
            }
            // cell edges: top, right, bottom, left; each with its endpoints
            // in lower-index-first order
            let edges = [
                (lat.h_edge(r, c), corners[0], corners[1]),
                (lat.v_edge(r, c + 1), corners[1], corners[2]),
                (lat.h_edge(r + 1, c), corners[3], corners[2]),
                (lat.v_edge(r, c), corners[0], corners[3]),
            ];
            let edge_point = |k: usize| {
                let (id, a, b) = edges[k];
                (id, lat.crossing(a, b))
            };
            let corner_pos =
                |k: usize| Vec2::from_row_col(corners[k].0 as f64 + 0.5, corners[k].1 as f64 + 0.5);
            // edges adjacent to each corner
            const ADJ: [(usize, usize); 4] = [(0, 3), (0, 1), (1, 2), (2, 3)];

            let mut segments: Vec<(usize, usize, Vec2)> = Vec::with_capacity(2);
            let saddle = n_high == 2 && hi[0] == hi[2];
            if saddle {
                let mean = corners.iter().map(|&(rr, cc)| lat.val(rr, cc)).sum::<f64>() / 4.0;
                let isolate_high = mean <= level;
                for k in 0..4 {
                    if hi[k] == isolate_high {
                        let (e1, e2) = ADJ[k];
                        let reference = if hi[k] {
                            corner_pos(k)
                        } else {
                            // the high side is away from a low corner
                            let center = Vec2::from_row_col(r as f64 + 1.0, c as f64 + 1.0);
                            center * 2.0 - corner_pos(k)
                        };
                        segments.push((e1, e2, reference));
                    }
                }
            } else {
                let crossed: Vec<usize> =
                    (0..4).filter(|&k| hi[k] != hi[(k + 1) % 4]).collect();
                debug_assert_eq!(crossed.len(), 2);
                let mut reference = Vec2::ZERO;
                for k in 0..4 {
                    if hi[k] {
                        reference = reference + corner_pos(k);
                    }
                }
                reference = reference / n_high as f64;
                // edge k joins corner k and corner k+1
                segments.push((crossed[0], crossed[1], reference));
            }

            for (e1, e2, reference) in segments {
                let (id1, p1) = edge_point(e1);
                let (id2, p2) = edge_point(e2);
                let (from, to) = if (p2 - p1).cross(reference - p1) > 0.0 {
                    ((id1, p1), (id2, p2))
                } else {
                    ((id2, p2), (id1, p1))
                };
                points.insert(from.0, from.1);
                points.insert(to.0, to.1);
                next.insert(from.0, to.0);
                has_incoming.insert(to.0, true);
            }
        }
    }

    let mut starts: Vec<usize> = next.keys().copied().collect();
    starts.sort_unstable();
    let mut visited: HashMap<usize, bool> = HashMap::new();
    let mut contours = Vec::new();

    let chain = |start: usize, visited: &mut HashMap<usize, bool>| -> (Vec<Vec2>, bool) {
        let mut ids = vec![start];
        visited.insert(start, true);
        let mut cur = start;
        let mut closed = false;
        while let Some(&n) = next.get(&cur) {
            if n == start {
                closed = true;
                break;
            }
            if visited.contains_key(&n) {
                break;
            }
            visited.insert(n, true);
            ids.push(n);
            cur = n;
        }
        let mut pts: Vec<Vec2> = Vec::with_capacity(ids.len());
        for id in ids {
            let p = points[&id];
            if pts.last() != Some(&p) {
                pts.push(p);
            }
        }
        if closed && pts.len() > 1 && pts.first() == pts.last() {
            pts.pop();
        }
        (pts, closed)
    };

    for &s in &starts {
        if !has_incoming.contains_key(&s) && !visited.contains_key(&s) {
            let (pts, closed) = chain(s, &mut visited);
            contours.push(Contour { points: pts, closed });
        }
    }
    for &s in &starts {
        if !visited.contains_key(&s) {
            let (pts, closed) = chain(s, &mut visited);
            contours.push(Contour { points: pts, closed });
        }
    }
    Ok(contours)
}
