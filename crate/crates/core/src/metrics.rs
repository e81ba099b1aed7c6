//! IoU, precision/recall at IoU thresholds and the max tangent angle error.

use crate::error::{Error, Result};
use crate::geom::{closest_point_on_segment, open_ring, Vec2};
use crate::polygonize::BuildingSet;
use crate::raster::{polygon_pixels, rasterize_interior, RasterGrid};
use crate::scene::{Building, Scene};
use rayon::prelude::*;
use serde::Serialize;

/// Sampling step along predicted contours, in pixels.
pub const SAMPLE_STEP: f64 = 0.1;
/// Predicted contours are compared only if this fraction of their mask lies
/// on ground-truth buildings.
pub const MATCH_OVERLAP: f64 = 0.5;
/// Samples whose projection is stretched beyond this factor are ignored.
pub const MAX_STRETCH: f64 = 2.0;

/// `|a ∧ b| / |a ∨ b|` on binary masks; 1 when both are empty.
pub fn iou(a: &RasterGrid, b: &RasterGrid) -> Result<f64> {
    a.ensure_same_shape(b, "iou")?;
    if !a.is_binary() || !b.is_binary() {
        return Err(Error::InvalidInput("iou expects binary masks".into()));
    }
    let (mut inter, mut union) = (0usize, 0usize);
    for (&x, &y) in a.data().iter().zip(b.data()) {
        let (x, y) = (x > 0.5, y > 0.5);
        inter += (x && y) as usize;
        union += (x || y) as usize;
    }
    Ok(if union == 0 {
        1.0
    } else {
        inter as f64 / union as f64
    })
}

/// Sorted pixel indices covered by a polygon.
pub fn building_pixels(b: &Building, height: usize, width: usize) -> Vec<usize> {
    let rings: Vec<&[Vec2]> = b.rings().map(|r| r.as_slice()).collect();
    polygon_pixels(&rings, height, width)
}

pub fn rasterize_buildings(set: &BuildingSet, height: usize, width: usize) -> RasterGrid {
    let mut g = RasterGrid::zeros(height, width, 1);
    for b in set.polygons() {
        for k in building_pixels(b, height, width) {
            g.data_mut()[k] = 1.0;
        }
    }
    g
}

fn sorted_intersection(a: &[usize], b: &[usize]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

fn pixel_iou(a: &[usize], b: &[usize]) -> f64 {
    let inter = sorted_intersection(a, b);
    let union = a.len() + b.len() - inter;
    if union == 0 {
        1.0
    } else {
        inter as f64 / union as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AngleErrorReport {
    /// Max tangent angle error of every matched contour, in degrees.
    pub per_contour: Vec<f64>,
    /// Mean of `per_contour`; `None` when nothing was matched.
    pub mean: Option<f64>,
    pub matched: usize,
}

/// Closest point on the ground-truth segments; the first segment wins ties.
fn project(p: Vec2, segments: &[(Vec2, Vec2)]) -> Vec2 {
    let mut best = (f64::INFINITY, p);
    for &(a, b) in segments {
        let (q, _) = closest_point_on_segment(p, a, b);
        let d = p.dist(q);
        if d < best.0 {
            best = (d, q);
        }
    }
    best.1
}

/// Samples along a closed ring, at most `SAMPLE_STEP` apart, grouped by
/// ring segment. Each segment is split into equal parts sampled at their
/// midpoints, so no sample falls on a vertex and the sample set does not
/// depend on the ring's start or direction.
fn sample_ring(ring: &[Vec2]) -> Vec<Vec<Vec2>> {
    let r = open_ring(ring);
    let n = r.len();
    (0..n)
        .filter_map(|i| {
            let (a, b) = (r[i], r[(i + 1) % n]);
            if a == b {
                return None;
            }
            let k = (a.dist(b) / SAMPLE_STEP).ceil().max(1.0) as usize;
            Some((0..k).map(|j| a + (b - a) * ((j as f64 + 0.5) / k as f64)).collect())
        })
        .collect()
}

/// Angle between two lines, in degrees within `[0, 90]`.
fn line_angle(a: Vec2, b: Vec2) -> f64 {
    (a.x * b.y - a.y * b.x).abs().atan2(a.dot(b).abs()).to_degrees()
}

/// Largest angle between sample steps `P_i -> P_i+1` of the predicted
/// contour and their projections `Q_i -> Q_i+1` onto the ground truth.
/// Only steps inside one predicted segment are used (a step across a vertex
/// is a chord, not a tangent), and steps whose projection is stretched or
/// squashed by more than `MAX_STRETCH` are skipped.
fn contour_max_error(ring: &[Vec2], segments: &[(Vec2, Vec2)]) -> Option<f64> {
    let mut worst: Option<f64> = None;
    for seg in sample_ring(ring) {
        let q: Vec<Vec2> = seg.iter().map(|&x| project(x, segments)).collect();
        for i in 1..seg.len() {
            let (dp, dq) = (seg[i] - seg[i - 1], q[i] - q[i - 1]);
            let ratio = dq.norm() / dp.norm();
            if !(ratio > 1.0 / MAX_STRETCH && ratio < MAX_STRETCH) {
                continue;
            }
            let deg = line_angle(dp, dq);
            worst = Some(worst.map_or(deg, |w: f64| w.max(deg)));
        }
    }
    worst
}

/// Per-contour max tangent angle error over predicted contours that overlap
/// ground truth by at least half of their area, and its mean. Each predicted
/// polygon is compared with the rings of the ground-truth building it
/// overlaps most (lowest index on ties).
pub fn max_tangent_angle_error(pred: &BuildingSet, gt: &Scene) -> AngleErrorReport {
    let (h, w) = (gt.height, gt.width);
    let mut label: Vec<Option<usize>> = vec![None; h * w];
    for (i, b) in gt.buildings.iter().enumerate() {
        for k in building_pixels(b, h, w) {
            label[k].get_or_insert(i);
        }
    }
    let matched: Vec<(&Building, usize)> = pred
        .polygons()
        .filter_map(|b| {
            let px = building_pixels(b, h, w);
            let mut counts = vec![0usize; gt.buildings.len()];
            for &k in &px {
                if let Some(i) = label[k] {
                    counts[i] += 1;
                }
            }
            let covered: usize = counts.iter().sum();
            if px.is_empty() || (covered as f64) < MATCH_OVERLAP * px.len() as f64 {
                return None;
            }
            let best = (0..counts.len()).max_by_key(|&i| (counts[i], std::cmp::Reverse(i)))?;
            Some((b, best))
        })
        .collect();
    let jobs: Vec<(&Vec<Vec2>, usize)> = matched
        .iter()
        .flat_map(|&(b, g)| b.rings().map(move |r| (r, g)))
        .collect();
    let per_contour: Vec<f64> = jobs
        .par_iter()
        .map(|&(r, g)| {
            let segments: Vec<(Vec2, Vec2)> = gt.buildings[g]
                .rings()
                .flat_map(|r| r.windows(2).map(|w| (w[0], w[1])))
                .collect();
            contour_max_error(r, &segments)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();
    let mean = (!per_contour.is_empty())
        .then(|| per_contour.iter().sum::<f64>() / per_contour.len() as f64);
    AngleErrorReport {
        matched: per_contour.len(),
        per_contour,
        mean,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrPoint {
    pub threshold: f64,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    /// `None` when there are no predictions.
    pub precision: Option<f64>,
    /// `None` when there is no ground truth.
    pub recall: Option<f64>,
}

/// Greedy one-to-one matching per threshold: predictions in descending score
/// order each take the unmatched ground-truth polygon of highest IoU, if that
/// IoU reaches the threshold.
pub fn pr_at_iou(pred: &BuildingSet, gt: &Scene, thresholds: &[f64]) -> Result<Vec<PrPoint>> {
    if thresholds.iter().any(|&t| !(t > 0.0 && t < 1.0)) {
        return Err(Error::InvalidInput("IoU thresholds must lie in (0, 1)".into()));
    }
    let (h, w) = (gt.height, gt.width);
    let gt_px: Vec<Vec<usize>> = gt.buildings.iter().map(|b| building_pixels(b, h, w)).collect();
    let mut order: Vec<usize> = (0..pred.len()).collect();
    order.sort_by(|&a, &b| pred.buildings[b].score.total_cmp(&pred.buildings[a].score));
    let ious: Vec<Vec<f64>> = order
        .iter()
        .map(|&i| {
            let px = building_pixels(&pred.buildings[i].polygon, h, w);
            gt_px.iter().map(|g| pixel_iou(&px, g)).collect()
        })
        .collect();
    Ok(thresholds
        .iter()
        .map(|&t| {
            let mut taken = vec![false; gt_px.len()];
            let mut tp = 0;
            for row in &ious {
                let best = (0..gt_px.len())
                    .filter(|&g| !taken[g] && row[g] >= t)
                    .max_by(|&a, &b| row[a].total_cmp(&row[b]).then(b.cmp(&a)));
                if let Some(g) = best {
                    taken[g] = true;
                    tp += 1;
                }
            }
            let fp = pred.len() - tp;
            let fn_ = gt_px.len() - tp;
            PrPoint {
                threshold: t,
                tp,
                fp,
                fn_,
                precision: (!pred.is_empty()).then(|| tp as f64 / pred.len() as f64),
                recall: (!gt_px.is_empty()).then(|| tp as f64 / gt_px.len() as f64),
            }
        })
        .collect())
}

/// All metrics for one prediction against one ground-truth scene.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub mean_max_tangent_angle_deg: Option<f64>,
    pub per_contour: Vec<f64>,
    pub matched_contours: usize,
    pub iou: f64,
    pub pr: Vec<PrPoint>,
}

pub const DEFAULT_IOU_THRESHOLDS: [f64; 3] = [0.5, 0.75, 0.9];

pub fn evaluate(pred: &BuildingSet, gt: &Scene, thresholds: &[f64]) -> Result<MetricsReport> {
    let angle = max_tangent_angle_error(pred, gt);
    let iou = iou(
        &rasterize_buildings(pred, gt.height, gt.width),
        &rasterize_interior(gt),
    )?;
    Ok(MetricsReport {
        mean_max_tangent_angle_deg: angle.mean,
        per_contour: angle.per_contour,
        matched_contours: angle.matched,
        iou,
        pr: pr_at_iou(pred, gt, thresholds)?,
    })
}
