//! Dense grids, polygon rasterization, bilinear sampling and finite differences.
//!
//! Pixel `(row, col)` covers `[col, col+1) × [row, row+1)` and has its center at
//! `(col + 0.5, row + 0.5)` in continuous coordinates.

use crate::error::{Error, Result};
use crate::geom::{self, Vec2};
use crate::scene::Scene;
use std::io::{Read, Write};
use std::path::Path;

/// Edge mask thickness used when none is given.
pub const DEFAULT_EDGE_WIDTH: f64 = 2.0;

const FFPR_MAGIC: &[u8; 4] = b"FFPR";

/// Row-major, channel-last grid of samples.
///
/// Values are held as `f64` in memory; the on-disk FFPR container stores `f32`.
#[derive(Debug, Clone, PartialEq)]
pub struct RasterGrid {
    height: usize,
    width: usize,
    channels: usize,
    data: Vec<f64>,
}

impl RasterGrid {
    pub fn zeros(height: usize, width: usize, channels: usize) -> Self {
        RasterGrid {
            height,
            width,
            channels,
            data: vec![0.0; height * width * channels],
        }
    }

    pub fn filled(height: usize, width: usize, channels: usize, value: f64) -> Self {
        RasterGrid {
            height,
            width,
            channels,
            data: vec![value; height * width * channels],
        }
    }

    pub fn from_vec(height: usize, width: usize, channels: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != height * width * channels {
            return Err(Error::Shape(format!(
                "expected {}×{}×{} = {} values, got {}",
                height,
                width,
                channels,
                height * width * channels,
                data.len()
            )));
        }
        Ok(RasterGrid {
            height,
            width,
            channels,
            data,
        })
    }

    /// Builds a single-channel grid from a per-pixel function.
    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(height * width);
        for r in 0..height {
            for c in 0..width {
                data.push(f(r, c));
            }
        }
        RasterGrid {
            height,
            width,
            channels: 1,
            data,
        }
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn channels(&self) -> usize {
        self.channels
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn pixel_count(&self) -> usize {
        self.height * self.width
    }

    #[inline]
    fn offset(&self, row: usize, col: usize, ch: usize) -> usize {
        (row * self.width + col) * self.channels + ch
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize, ch: usize) -> f64 {
        self.data[self.offset(row, col, ch)]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, ch: usize, value: f64) {
        let o = self.offset(row, col, ch);
        self.data[o] = value;
    }

    pub fn same_shape(&self, other: &RasterGrid) -> bool {
        self.height == other.height && self.width == other.width && self.channels == other.channels
    }

    pub fn same_extent(&self, other: &RasterGrid) -> bool {
        self.height == other.height && self.width == other.width
    }

    pub fn ensure_same_shape(&self, other: &RasterGrid, what: &str) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(Error::Shape(format!(
                "{what}: {}×{}×{} vs {}×{}×{}",
                self.height, self.width, self.channels, other.height, other.width, other.channels
            )))
        }
    }

    /// Copies one channel out into a single-channel grid.
    pub fn channel(&self, ch: usize) -> RasterGrid {
        let data = self.data.iter().skip(ch).step_by(self.channels).copied().collect();
        RasterGrid {
            height: self.height,
            width: self.width,
            channels: 1,
            data,
        }
    }

    /// Interleaves single-channel grids of equal extent.
    pub fn stack(parts: &[&RasterGrid]) -> Result<RasterGrid> {
        let first = parts
            .first()
            .ok_or_else(|| Error::InvalidInput("cannot stack zero grids".into()))?;
        let (h, w) = (first.height, first.width);
        let channels: usize = parts.iter().map(|p| p.channels).sum();
        let mut data = Vec::with_capacity(h * w * channels);
        for p in parts {
            if p.height != h || p.width != w {
                return Err(Error::Shape("stacked grids differ in extent".into()));
            }
        }
        for i in 0..h * w {
            for p in parts {
                data.extend_from_slice(&p.data[i * p.channels..(i + 1) * p.channels]);
            }
        }
        RasterGrid::from_vec(h, w, channels, data)
    }

    pub fn is_binary(&self) -> bool {
        self.data.iter().all(|&v| v == 0.0 || v == 1.0)
    }

    /// `1` where the value exceeds `level`, else `0`.
    pub fn threshold(&self, level: f64) -> RasterGrid {
        RasterGrid {
            height: self.height,
            width: self.width,
            channels: self.channels,
            data: self.data.iter().map(|&v| if v > level { 1.0 } else { 0.0 }).collect(),
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> RasterGrid {
        RasterGrid {
            height: self.height,
            width: self.width,
            channels: self.channels,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn write_ffpr<W: Write>(&self, mut w: W) -> Result<()> {
        let dim = |n: usize| {
            u32::try_from(n).map_err(|_| Error::Format(format!("dimension {n} exceeds u32")))
        };
        w.write_all(FFPR_MAGIC)?;
        w.write_all(&dim(self.height)?.to_le_bytes())?;
        w.write_all(&dim(self.width)?.to_le_bytes())?;
        w.write_all(&dim(self.channels)?.to_le_bytes())?;
        let mut buf = Vec::with_capacity(self.data.len() * 4);
        for &v in &self.data {
            buf.extend_from_slice(&(v as f32).to_le_bytes());
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn read_ffpr<R: Read>(mut r: R) -> Result<RasterGrid> {
        let mut header = [0u8; 16];
        r.read_exact(&mut header)
            .map_err(|_| Error::Format("truncated FFPR header".into()))?;
        if &header[0..4] != FFPR_MAGIC {
            return Err(Error::Format("bad FFPR magic".into()));
        }
        let word = |i: usize| u32::from_le_bytes(header[i..i + 4].try_into().unwrap()) as usize;
        let (h, w, c) = (word(4), word(8), word(12));
        let n = h
            .checked_mul(w)
            .and_then(|x| x.checked_mul(c))
            .ok_or_else(|| Error::Format("FFPR dimensions overflow".into()))?;
        let mut payload = Vec::new();
        r.read_to_end(&mut payload)?;
        if payload.len() != n * 4 {
            return Err(Error::Format(format!(
                "FFPR payload has {} bytes, header implies {}",
                payload.len(),
                n * 4
            )));
        }
        let data = payload
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64)
            .collect();
        RasterGrid::from_vec(h, w, c, data)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let f = std::fs::File::create(path)?;
        let mut w = std::io::BufWriter::new(f);
        self.write_ffpr(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<RasterGrid> {
        let f = std::fs::File::open(path)?;
        RasterGrid::read_ffpr(std::io::BufReader::new(f))
    }
}

/// Per-pixel unsigned tangent angle of the nearest polygon edge.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentField {
    /// Radians in `[0, π)`.
    pub theta: RasterGrid,
    /// `1` where exactly one edge direction covers the pixel.
    pub valid: RasterGrid,
}

impl TangentField {
    pub fn height(&self) -> usize {
        self.theta.height()
    }

    pub fn width(&self) -> usize {
        self.theta.width()
    }

    /// Two-channel grid `(theta, valid)` for FFPR storage.
    pub fn to_grid(&self) -> RasterGrid {
        RasterGrid::stack(&[&self.theta, &self.valid]).expect("theta and valid share extent")
    }

    pub fn from_grid(grid: &RasterGrid) -> Result<TangentField> {
        if grid.channels() != 2 {
            return Err(Error::Format(format!(
                "tangent grid needs 2 channels (theta, valid), got {}",
                grid.channels()
            )));
        }
        Ok(TangentField {
            theta: grid.channel(0),
            valid: grid.channel(1),
        })
    }
}

/// Folds an angle into `[0, π)`.
pub fn fold_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(std::f64::consts::PI);
    if t >= std::f64::consts::PI {
        0.0
    } else {
        t
    }
}

#[inline]
fn pixel_center(row: usize, col: usize) -> Vec2 {
    Vec2::new(col as f64 + 0.5, row as f64 + 0.5)
}

/// Pixel indices `row * width + col` whose centers lie inside the polygon
/// (outer ring minus holes, even-odd rule), in ascending order.
pub fn polygon_pixels(rings: &[&[Vec2]], height: usize, width: usize) -> Vec<usize> {
    let all: Vec<Vec2> = rings.iter().flat_map(|r| r.iter().copied()).collect();
    let Some((lo, hi)) = geom::bbox(&all) else {
        return Vec::new();
    };
    let r0 = (lo.y - 0.5).floor().max(0.0) as usize;
    let r1 = ((hi.y - 0.5).ceil().max(-1.0) + 1.0).min(height as f64) as usize;
    let c0 = (lo.x - 0.5).floor().max(0.0) as usize;
    let c1 = ((hi.x - 0.5).ceil().max(-1.0) + 1.0).min(width as f64) as usize;
    let mut out = Vec::new();
    let mut xs = Vec::new();
    for row in r0..r1 {
        let y = row as f64 + 0.5;
        xs.clear();
        for ring in rings {
            let n = ring.len();
            if n < 2 {
                continue;
            }
            for i in 0..n {
                let a = ring[if i == 0 { n - 1 } else { i - 1 }];
                let b = ring[i];
                if (a.y <= y) != (b.y <= y) {
                    xs.push(a.x + (y - a.y) / (b.y - a.y) * (b.x - a.x));
                }
            }
        }
        if xs.is_empty() {
            continue;
        }
        xs.sort_by(f64::total_cmp);
        for col in c0..c1 {
            let x = col as f64 + 0.5;
            // crossings strictly to the right of the center
            let right = xs.len() - xs.partition_point(|&cx| cx <= x);
            if right % 2 == 1 {
                out.push(row * width + col);
            }
        }
    }
    out
}

pub fn rasterize_interior(scene: &Scene) -> RasterGrid {
    let mut grid = RasterGrid::zeros(scene.height, scene.width, 1);
    for b in &scene.buildings {
        let rings: Vec<&[Vec2]> = b.rings().map(|r| r.as_slice()).collect();
        for idx in polygon_pixels(&rings, scene.height, scene.width) {
            grid.data[idx] = 1.0;
        }
    }
    grid
}

/// Calls `visit(row, col, distance)` for every pixel whose center is strictly
/// closer than `half_width` to segment `[a, b]`.
fn for_each_covered(
    a: Vec2,
    b: Vec2,
    half_width: f64,
    height: usize,
    width: usize,
    mut visit: impl FnMut(usize, usize, f64),
) {
    let lo_x = a.x.min(b.x) - half_width;
    let hi_x = a.x.max(b.x) + half_width;
    let lo_y = a.y.min(b.y) - half_width;
    let hi_y = a.y.max(b.y) + half_width;
    let c0 = (lo_x - 0.5).floor().max(0.0) as usize;
    let c1 = ((hi_x - 0.5).ceil() + 1.0).clamp(0.0, width as f64) as usize;
    let r0 = (lo_y - 0.5).floor().max(0.0) as usize;
    let r1 = ((hi_y - 0.5).ceil() + 1.0).clamp(0.0, height as f64) as usize;
    for row in r0..r1 {
        for col in c0..c1 {
            let d = geom::point_segment_distance(pixel_center(row, col), a, b);
            if d < half_width {
                visit(row, col, d);
            }
        }
    }
}

pub fn rasterize_edges(scene: &Scene, width_px: f64) -> Result<RasterGrid> {
    if !(width_px > 0.0) {
        return Err(Error::InvalidInput(format!("edge width must be > 0, got {width_px}")));
    }
    let mut grid = RasterGrid::zeros(scene.height, scene.width, 1);
    let w = scene.width;
    for (a, b) in scene.segments() {
        for_each_covered(a, b, 0.5 * width_px, scene.height, scene.width, |r, c, _| {
            grid.data[r * w + c] = 1.0;
        });
    }
    Ok(grid)
}

/// Two unit directions are parallel (or anti-parallel) up to this sine.
const PARALLEL_EPS: f64 = 1e-6;

pub fn rasterize_tangent_angle(scene: &Scene, width_px: f64) -> Result<TangentField> {
    if !(width_px > 0.0) {
        return Err(Error::InvalidInput(format!("edge width must be > 0, got {width_px}")));
    }
    let (h, w) = (scene.height, scene.width);
    let mut best = vec![f64::INFINITY; h * w];
    let mut theta = RasterGrid::zeros(h, w, 1);
    let mut dir: Vec<Option<Vec2>> = vec![None; h * w];
    let mut conflict = vec![false; h * w];
    for (a, b) in scene.segments() {
        let len = a.dist(b);
        if len == 0.0 {
            continue;
        }
        let d = (b - a) / len;
        let angle = fold_angle(d.y.atan2(d.x));
        for_each_covered(a, b, 0.5 * width_px, h, w, |r, c, dist| {
            let i = r * w + c;
            match dir[i] {
                None => dir[i] = Some(d),
                Some(prev) => {
                    if prev.cross(d).abs() > PARALLEL_EPS {
                        conflict[i] = true;
                    }
                }
            }
            if dist < best[i] {
                best[i] = dist;
                theta.data[i] = angle;
            }
        });
    }
    let valid = RasterGrid::from_vec(
        h,
        w,
        1,
        (0..h * w)
            .map(|i| if dir[i].is_some() && !conflict[i] { 1.0 } else { 0.0 })
            .collect(),
    )?;
    Ok(TangentField { theta, valid })
}

/// Bilinear cell lookup along one axis: lower index, blend weight, and whether
/// the coordinate moved freely (false when clamped, so the derivative is zero).
#[inline]
fn axis_cell(coord: f64, n: usize) -> (usize, usize, f64, bool) {
    let f = coord - 0.5;
    if n <= 1 {
        return (0, 0, 0.0, false);
    }
    let max = (n - 1) as f64;
    if f <= 0.0 {
        return (0, 1, 0.0, f == 0.0);
    }
    if f >= max {
        return (n - 2, n - 1, 1.0, f == max);
    }
    let i0 = (f.floor() as usize).min(n - 2);
    (i0, i0 + 1, f - i0 as f64, true)
}

/// Bilinear sample of every channel at `p`, plus `d(sample)/dp` per channel.
/// Points outside the grid are clamped to the border pixel centers.
pub fn sample_into(grid: &RasterGrid, p: Vec2, values: &mut [f64], grads: &mut [Vec2]) {
    let (c0, c1, tx, free_x) = axis_cell(p.x, grid.width);
    let (r0, r1, ty, free_y) = axis_cell(p.y, grid.height);
    let ch = grid.channels;
    for k in 0..ch {
        let v00 = grid.get(r0, c0, k);
        let v01 = grid.get(r0, c1, k);
        let v10 = grid.get(r1, c0, k);
        let v11 = grid.get(r1, c1, k);
        let top = v00 + tx * (v01 - v00);
        let bottom = v10 + tx * (v11 - v10);
        values[k] = top + ty * (bottom - top);
        let dx = if free_x {
            (1.0 - ty) * (v01 - v00) + ty * (v11 - v10)
        } else {
            0.0
        };
        let dy = if free_y { bottom - top } else { 0.0 };
        grads[k] = Vec2::new(dx, dy);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub values: Vec<f64>,
    pub grads: Vec<Vec2>,
}

pub fn bilinear_sample(grid: &RasterGrid, p: Vec2) -> Sample {
    let mut values = vec![0.0; grid.channels];
    let mut grads = vec![Vec2::ZERO; grid.channels];
    sample_into(grid, p, &mut values, &mut grads);
    Sample { values, grads }
}

/// Value and gradient of channel 0 at `p`.
#[inline]
pub fn sample_scalar(grid: &RasterGrid, p: Vec2) -> (f64, Vec2) {
    let (c0, c1, tx, free_x) = axis_cell(p.x, grid.width);
    let (r0, r1, ty, free_y) = axis_cell(p.y, grid.height);
    let v00 = grid.get(r0, c0, 0);
    let v01 = grid.get(r0, c1, 0);
    let v10 = grid.get(r1, c0, 0);
    let v11 = grid.get(r1, c1, 0);
    let top = v00 + tx * (v01 - v00);
    let bottom = v10 + tx * (v11 - v10);
    let dx = if free_x {
        (1.0 - ty) * (v01 - v00) + ty * (v11 - v10)
    } else {
        0.0
    };
    let dy = if free_y { bottom - top } else { 0.0 };
    (top + ty * (bottom - top), Vec2::new(dx, dy))
}

/// Nearest-pixel lookup of every channel at `p` (clamped to the grid).
pub fn nearest_sample(grid: &RasterGrid, p: Vec2) -> Vec<f64> {
    let col = (p.x.floor().max(0.0) as usize).min(grid.width.saturating_sub(1));
    let row = (p.y.floor().max(0.0) as usize).min(grid.height.saturating_sub(1));
    (0..grid.channels).map(|k| grid.get(row, col, k)).collect()
}

/// Stencil of the 1-D difference operator at index `i` of an axis of length
/// `n`: central in the interior, one-sided at the two borders.
#[inline]
pub(crate) fn diff_stencil(i: usize, n: usize) -> Option<[(usize, f64); 2]> {
    if n < 2 {
        None
    } else if i == 0 {
        Some([(1, 1.0), (0, -1.0)])
    } else if i == n - 1 {
        Some([(n - 1, 1.0), (n - 2, -1.0)])
    } else {
        Some([(i + 1, 0.5), (i - 1, -0.5)])
    }
}

/// Row/column derivatives of a single-channel grid: channel 0 is `d/drow`,
/// channel 1 is `d/dcol`.
pub fn spatial_gradient(grid: &RasterGrid) -> Result<RasterGrid> {
    if grid.channels != 1 {
        return Err(Error::Shape(format!(
            "spatial_gradient expects 1 channel, got {}",
            grid.channels
        )));
    }
    let (h, w) = (grid.height, grid.width);
    let mut out = RasterGrid::zeros(h, w, 2);
    for r in 0..h {
        for c in 0..w {
            let dr = diff_stencil(r, h)
                .map(|s| s.iter().map(|&(k, wt)| wt * grid.data[k * w + c]).sum())
                .unwrap_or(0.0);
            let dc = diff_stencil(c, w)
                .map(|s| s.iter().map(|&(k, wt)| wt * grid.data[r * w + k]).sum())
                .unwrap_or(0.0);
            out.data[(r * w + c) * 2] = dr;
            out.data[(r * w + c) * 2 + 1] = dc;
        }
    }
    Ok(out)
}

/// Transpose of [`spatial_gradient`]: maps per-pixel upstream derivatives
/// with respect to `(d/drow, d/dcol)` back onto the input pixels.
pub fn spatial_gradient_adjoint(h: usize, w: usize, d_drow: &[f64], d_dcol: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; h * w];
    for r in 0..h {
        for c in 0..w {
            let i = r * w + c;
            if let Some(s) = diff_stencil(r, h) {
                for (k, wt) in s {
                    out[k * w + c] += wt * d_drow[i];
                }
            }
            if let Some(s) = diff_stencil(c, w) {
                for (k, wt) in s {
                    out[r * w + k] += wt * d_dcol[i];
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::Building;
    use std::f64::consts::{FRAC_PI_4, PI};

    fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Vec<Vec2> {
        vec![
            Vec2::new(x0, y0),
            Vec2::new(x1, y0),
            Vec2::new(x1, y1),
            Vec2::new(x0, y1),
        ]
    }

    fn scene_with(h: usize, w: usize, buildings: Vec<Building>) -> Scene {
        Scene {
            height: h,
            width: w,
            buildings,
        }
    }

    /// Independent oracle: even-odd test of every pixel center.
    fn brute_interior(scene: &Scene) -> Vec<f64> {
        let mut out = vec![0.0; scene.height * scene.width];
        for r in 0..scene.height {
            for c in 0..scene.width {
                let p = pixel_center(r, c);
                for b in &scene.buildings {
                    let inside = b.rings().filter(|ring| geom::point_in_ring(p, ring)).count() % 2 == 1;
                    if inside {
                        out[r * scene.width + c] = 1.0;
                    }
                }
            }
        }
        out
    }

    #[test]
    fn interior_empty_and_square() {
        let empty = scene_with(5, 7, vec![]);
        assert!(rasterize_interior(&empty).data().iter().all(|&v| v == 0.0));

        let sq = scene_with(12, 12, vec![Building::new(rect(2.0, 2.0, 8.0, 8.0), vec![])]);
        let g = rasterize_interior(&sq);
        assert_eq!(g.data().iter().sum::<f64>(), 36.0);
        assert_eq!(g.data(), brute_interior(&sq).as_slice());
    }

    #[test]
    fn interior_with_hole() {
        let outer = rect(2.0, 2.0, 14.0, 14.0);
        let hole = rect(6.0, 6.0, 10.0, 10.0);
        let s = scene_with(16, 16, vec![Building::new(outer, vec![hole])]);
        let g = rasterize_interior(&s);
        assert_eq!(g.data().iter().sum::<f64>(), 144.0 - 16.0);
        assert_eq!(g.data(), brute_interior(&s).as_slice());
    }

    #[test]
    fn interior_rotated_matches_oracle() {
        let c = Vec2::new(10.3, 9.7);
        let ring: Vec<Vec2> = (0..4)
            .map(|k| {
                let a = 0.4 + k as f64 * PI / 2.0;
                c + Vec2::new(a.cos(), a.sin()) * 6.5
            })
            .collect();
        let s = scene_with(20, 21, vec![Building::new(ring, vec![])]);
        assert_eq!(rasterize_interior(&s).data(), brute_interior(&s).as_slice());
    }

    #[test]
    fn edges_distance_oracle() {
        // a degenerate "building" is not needed: build the segment through a thin ring
        let s = scene_with(
            10,
            11,
            vec![Building {
                outer: vec![
                    Vec2::new(1.0, 5.2),
                    Vec2::new(9.0, 5.2),
                    Vec2::new(1.0, 5.2),
                ],
                holes: vec![],
            }],
        );
        let g = rasterize_edges(&s, 1.0).unwrap();
        for r in 0..10 {
            for c in 0..11 {
                let d = geom::point_segment_distance(
                    pixel_center(r, c),
                    Vec2::new(1.0, 5.2),
                    Vec2::new(9.0, 5.2),
                );
                assert_eq!(g.get(r, c, 0), if d < 0.5 { 1.0 } else { 0.0 });
            }
        }
        assert!(g.data().iter().any(|&v| v == 1.0));
        assert!(rasterize_edges(&s, 0.0).is_err());
    }

    #[test]
    fn shared_wall_rasterized_once() {
        let a = Building::new(rect(2.0, 2.0, 8.0, 8.0), vec![]);
        let b = Building::new(rect(8.0, 2.0, 14.0, 8.0), vec![]);
        let both = scene_with(12, 16, vec![a.clone(), b]);
        let g = rasterize_edges(&both, 2.0).unwrap();
        assert!(g.is_binary());
        let t = rasterize_tangent_angle(&both, 2.0).unwrap();
        // pixel straddling the shared wall, away from corners: parallel coincident edges
        assert_eq!(t.valid.get(5, 7, 0), 1.0);
        assert!((t.theta.get(5, 7, 0) - PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn tangent_angles() {
        let s = scene_with(20, 20, vec![Building::new(rect(4.0, 4.0, 16.0, 16.0), vec![])]);
        let t = rasterize_tangent_angle(&s, 2.0).unwrap();
        // top wall, middle
        assert_eq!(t.valid.get(4, 10, 0), 1.0);
        assert_eq!(t.theta.get(4, 10, 0), 0.0);
        // corner pixel covered by both incident edges
        assert_eq!(t.valid.get(4, 4, 0), 0.0);
        assert_eq!(t.valid.get(3, 3, 0), 0.0);
        // far from edges
        assert_eq!(t.valid.get(10, 10, 0), 0.0);

        let diamond = vec![
            Vec2::new(10.0, 2.0),
            Vec2::new(18.0, 10.0),
            Vec2::new(10.0, 18.0),
            Vec2::new(2.0, 10.0),
        ];
        let s = scene_with(20, 20, vec![Building::new(diamond, vec![])]);
        let t = rasterize_tangent_angle(&s, 2.0).unwrap();
        // pixel (5, 13) lies on the edge from (10,2) to (18,10)
        assert_eq!(t.valid.get(5, 13, 0), 1.0);
        assert!((t.theta.get(5, 13, 0) - FRAC_PI_4).abs() < 1e-12);
    }

    #[test]
    fn bilinear_examples() {
        let g = RasterGrid::from_fn(4, 4, |r, c| (r * 4 + c) as f64 * 0.1);
        let s = bilinear_sample(&g, pixel_center(1, 2));
        assert!((s.values[0] - g.get(1, 2, 0)).abs() < 1e-15);
        assert!((s.grads[0].x - (g.get(1, 3, 0) - g.get(1, 2, 0))).abs() < 1e-12);
        assert!((s.grads[0].y - (g.get(2, 2, 0) - g.get(1, 2, 0))).abs() < 1e-12);

        let two = RasterGrid::from_vec(1, 2, 1, vec![0.0, 1.0]).unwrap();
        assert_eq!(bilinear_sample(&two, Vec2::new(1.0, 0.5)).values[0], 0.5);
    }

    #[test]
    fn bilinear_exact_on_bilinear_functions() {
        let f = |x: f64, y: f64| 0.3 + 1.7 * x - 0.4 * y + 0.25 * x * y;
        let g = RasterGrid::from_fn(6, 7, |r, c| f(c as f64 + 0.5, r as f64 + 0.5));
        for &(x, y) in &[(1.2, 3.3), (0.5, 0.5), (6.5, 5.5), (3.9, 2.01)] {
            let s = bilinear_sample(&g, Vec2::new(x, y));
            assert!((s.values[0] - f(x, y)).abs() < 1e-12, "at ({x},{y})");
        }
    }

    #[test]
    fn bilinear_gradient_finite_difference() {
        let mut state = 7u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        let g = RasterGrid::from_fn(8, 8, |_, _| next());
        let h = 1e-6;
        for _ in 0..200 {
            let p = Vec2::new(0.6 + next() * 6.8, 0.6 + next() * 6.8);
            // stay away from cell boundaries where the derivative jumps
            let fx = (p.x - 0.5).fract();
            let fy = (p.y - 0.5).fract();
            if fx < 0.01 || fx > 0.99 || fy < 0.01 || fy > 0.99 {
                continue;
            }
            let (_, grad) = sample_scalar(&g, p);
            let dx = (sample_scalar(&g, p + Vec2::new(h, 0.0)).0
                - sample_scalar(&g, p - Vec2::new(h, 0.0)).0)
                / (2.0 * h);
            let dy = (sample_scalar(&g, p + Vec2::new(0.0, h)).0
                - sample_scalar(&g, p - Vec2::new(0.0, h)).0)
                / (2.0 * h);
            assert!((dx - grad.x).abs() < 1e-5 && (dy - grad.y).abs() < 1e-5);
        }
    }

    #[test]
    fn gradient_examples() {
        let constant = RasterGrid::filled(5, 5, 1, 0.7);
        assert!(spatial_gradient(&constant).unwrap().data().iter().all(|&v| v == 0.0));

        let cols = RasterGrid::from_fn(4, 5, |_, c| c as f64);
        let g = spatial_gradient(&cols).unwrap();
        for r in 0..4 {
            for c in 0..5 {
                assert_eq!(g.get(r, c, 0), 0.0);
                assert_eq!(g.get(r, c, 1), 1.0);
            }
        }

        let step = RasterGrid::from_fn(3, 8, |_, c| if c >= 4 { 1.0 } else { 0.0 });
        let g = spatial_gradient(&step).unwrap();
        let row: Vec<f64> = (0..8).map(|c| g.get(1, c, 1)).collect();
        assert_eq!(row, vec![0.0, 0.0, 0.0, 0.5, 0.5, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn gradient_zero_away_from_boundary() {
        let s = scene_with(20, 20, vec![Building::new(rect(5.0, 5.0, 15.0, 15.0), vec![])]);
        let interior = rasterize_interior(&s);
        let g = spatial_gradient(&interior).unwrap();
        for r in 0..20 {
            for c in 0..20 {
                let center = pixel_center(r, c);
                let d = geom::point_segment_distance(center, Vec2::new(5.0, 5.0), Vec2::new(15.0, 5.0))
                    .min(geom::point_segment_distance(center, Vec2::new(15.0, 5.0), Vec2::new(15.0, 15.0)))
                    .min(geom::point_segment_distance(center, Vec2::new(15.0, 15.0), Vec2::new(5.0, 15.0)))
                    .min(geom::point_segment_distance(center, Vec2::new(5.0, 15.0), Vec2::new(5.0, 5.0)));
                if d > 1.5 {
                    assert_eq!(g.get(r, c, 0), 0.0);
                    assert_eq!(g.get(r, c, 1), 0.0);
                }
            }
        }
    }

    #[test]
    fn gradient_adjoint_identity() {
        // <D x, y> == <x, Dᵀ y>
        let x = RasterGrid::from_fn(5, 6, |r, c| ((r * 7 + c * 3) % 5) as f64 - 1.3);
        let dx = spatial_gradient(&x).unwrap();
        let yr: Vec<f64> = (0..30).map(|i| ((i * 11) % 7) as f64 * 0.1).collect();
        let yc: Vec<f64> = (0..30).map(|i| ((i * 5) % 9) as f64 * -0.2).collect();
        let lhs: f64 = (0..30).map(|i| dx.data()[2 * i] * yr[i] + dx.data()[2 * i + 1] * yc[i]).sum();
        let adj = spatial_gradient_adjoint(5, 6, &yr, &yc);
        let rhs: f64 = x.data().iter().zip(&adj).map(|(a, b)| a * b).sum();
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn ffpr_roundtrip_and_errors() {
        let g = RasterGrid::from_vec(2, 3, 2, (0..12).map(|i| i as f64 * 0.25).collect()).unwrap();
        let mut buf = Vec::new();
        g.write_ffpr(&mut buf).unwrap();
        assert_eq!(&buf[..4], b"FFPR");
        assert_eq!(&buf[4..8], &2u32.to_le_bytes());
        assert_eq!(&buf[8..12], &3u32.to_le_bytes());
        assert_eq!(&buf[12..16], &2u32.to_le_bytes());
        assert_eq!(buf.len(), 16 + 12 * 4);
        assert_eq!(RasterGrid::read_ffpr(buf.as_slice()).unwrap(), g);

        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(matches!(RasterGrid::read_ffpr(bad.as_slice()), Err(Error::Format(_))));
        assert!(matches!(
            RasterGrid::read_ffpr(&buf[..buf.len() - 1]),
            Err(Error::Format(_))
        ));
    }
}
