use super::config::{LossConfig, PerLoss};
use super::losses::{coupling_losses, loss_align, loss_align90, loss_smooth, seg_loss};
use super::{FrameFieldGrid, FIELD_CLAMP};
use crate::error::{Error, Result};
use crate::field_algebra::{coeffs_from_frame, Frame, FrameCoeffs};
use crate::raster::{
    rasterize_edges, rasterize_interior, rasterize_tangent_angle, RasterGrid, TangentField,
    DEFAULT_EDGE_WIDTH,
};
use crate::rng::SplitMix64;
use crate::scene::Scene;
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

/// Ground-truth rasters derived from a scene.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneRasters {
    pub y_int: RasterGrid,
    pub y_edge: RasterGrid,
    pub tangent: TangentField,
}

impl SceneRasters {
    pub fn from_scene(scene: &Scene, edge_width: f64) -> Result<Self> {
        Ok(SceneRasters {
            y_int: rasterize_interior(scene),
            y_edge: rasterize_edges(scene, edge_width)?,
            tangent: rasterize_tangent_angle(scene, edge_width)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthesisConfig {
    pub iterations: usize,
    pub step: f64,
    pub edge_width: f64,
}

impl Default for SynthesisConfig {
    fn default() -> Self {
        SynthesisConfig {
            iterations: 200,
            step: 0.05,
            edge_width: DEFAULT_EDGE_WIDTH,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SynthesisResult {
    pub field: FrameFieldGrid,
    /// Objective before the first step and after each step.
    pub objective: Vec<f64>,
}

/// All eight losses for predictions `(yhat_int, yhat_edge, field)` against
/// ground truth `gt`.
pub fn all_losses(
    gt: &SceneRasters,
    yhat_int: &RasterGrid,
    yhat_edge: &RasterGrid,
    field: &FrameFieldGrid,
    alpha: f64,
) -> Result<PerLoss> {
    let int = seg_loss(&gt.y_int, yhat_int, alpha)?;
    let edge = seg_loss(&gt.y_edge, yhat_edge, alpha)?;
    let align = loss_align(field, &gt.tangent, &gt.y_edge)?;
    let align90 = loss_align90(field, &gt.tangent, &gt.y_edge)?;
    let smooth = loss_smooth(field);
    let coupling = coupling_losses(field, yhat_int, yhat_edge)?;
    Ok(PerLoss {
        int: int.value,
        edge: edge.value,
        align: align.value,
        align90: align90.value,
        smooth: smooth.value,
        int_align: coupling.int_align.value,
        edge_align: coupling.edge_align.value,
        int_edge: coupling.int_edge.value,
    })
}

fn scene_fingerprint(scene: &Scene) -> u64 {
    // FNV-1a over dimensions and vertex bits
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let mut eat = |v: u64| {
        for b in v.to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
    };
    eat(scene.height as u64);
    eat(scene.width as u64);
    for b in &scene.buildings {
        for ring in b.rings() {
            eat(ring.len() as u64);
            for p in ring {
                eat(p.x.to_bits());
                eat(p.y.to_bits());
            }
        }
    }
    h
}

fn perturb(y: &RasterGrid, rng: &mut SplitMix64) -> RasterGrid {
    let data = y
        .data()
        .iter()
        .map(|&t| {
            let n = rng.uniform(0.0, 0.5);
            t * (1.0 - n) + (1.0 - t) * n
        })
        .collect();
    RasterGrid::from_vec(y.height(), y.width(), y.channels(), data).expect("same shape")
}

/// Fills `cfg.norms` with the mean of each loss over the sample, evaluated
/// with a random field (uniform in `[-1, 1]`) and noisy copies of the
/// ground-truth masks. Each scene draws from its own stream keyed by the seed
/// and the scene content, so duplicated scenes contribute identical values.
pub fn normalize_losses(
    sample: &[Scene],
    cfg: &LossConfig,
    seed: u64,
    edge_width: f64,
) -> Result<LossConfig> {
    if sample.is_empty() {
        return Err(Error::InvalidInput("normalize_losses needs at least one scene".into()));
    }
    let mut sums = [0.0; 8];
    for scene in sample {
        let gt = SceneRasters::from_scene(scene, edge_width)?;
        let mut rng = SplitMix64::new(seed ^ scene_fingerprint(scene));
        let (h, w) = (scene.height, scene.width);
        let field_data = (0..h * w * 4).map(|_| rng.uniform(-1.0, 1.0)).collect();
        let field = FrameFieldGrid::new(RasterGrid::from_vec(h, w, 4, field_data)?)?;
        let yhat_int = perturb(&gt.y_int, &mut rng);
        let yhat_edge = perturb(&gt.y_edge, &mut rng);
        let l = all_losses(&gt, &yhat_int, &yhat_edge, &field, cfg.alpha)?;
        for (s, v) in sums.iter_mut().zip(l.to_array()) {
            *s += v;
        }
    }
    let n = sample.len() as f64;
    let mut out = cfg.clone();
    out.norms = PerLoss::from_array(sums.map(|s| (s / n).max(1e-8)));
    Ok(out)
}

/// Closed-form initial field: where the tangent is valid the frame is
/// `{±e^{iθ}, ±i·e^{iθ}}`; every other pixel copies the frame of its nearest
/// valid pixel (breadth-first, 4-connected). Without any valid pixel the
/// field is the axis-aligned cross.
pub fn initial_field(tangent: &TangentField) -> FrameFieldGrid {
    let (h, w) = (tangent.height(), tangent.width());
    let mut field = FrameFieldGrid::uniform(h, w, FrameCoeffs::axis_aligned());
    let mut seen = vec![false; h * w];
    let mut queue = VecDeque::new();
    for i in 0..h * w {
        if tangent.valid.data()[i] != 0.0 {
            let c = coeffs_from_frame(&Frame::orthogonal(tangent.theta.data()[i]));
            field.set(i, c);
            seen[i] = true;
            queue.push_back(i);
        }
    }
    while let Some(i) = queue.pop_front() {
        let (r, c) = (i / w, i % w);
        let src = field.at(i);
        let mut visit = |j: usize| {
            if !seen[j] {
                seen[j] = true;
                field.set(j, src);
                queue.push_back(j);
            }
        };
        if r > 0 {
            visit(i - w);
        }
        if r + 1 < h {
            visit(i + w);
        }
        if c > 0 {
            visit(i - 1);
        }
        if c + 1 < w {
            visit(i + 1);
        }
    }
    field
}

fn field_objective(
    field: &FrameFieldGrid,
    gt: &SceneRasters,
    cfg: &LossConfig,
) -> Result<(f64, Vec<f64>)> {
    let a = loss_align(field, &gt.tangent, &gt.y_edge)?;
    let a90 = loss_align90(field, &gt.tangent, &gt.y_edge)?;
    let s = loss_smooth(field);
    let wa = cfg.lambdas.align / cfg.norms.align;
    let wa90 = cfg.lambdas.align90 / cfg.norms.align90;
    let ws = cfg.lambdas.smooth / cfg.norms.smooth;
    let value = wa * a.value + wa90 * a90.value + ws * s.value;
    let grad = a
        .grad
        .iter()
        .zip(&a90.grad)
        .zip(&s.grad)
        .map(|((x, y), z)| wa * x + wa90 * y + ws * z)
        .collect();
    Ok((value, grad))
}

/// Gradient descent on the frame-field losses (align, align90, smooth) with
/// the rasters held fixed.
pub fn synthesize_with_history(
    scene: &Scene,
    synth: &SynthesisConfig,
    cfg: &LossConfig,
) -> Result<SynthesisResult> {
    cfg.validate()?;
    let gt = SceneRasters::from_scene(scene, synth.edge_width)?;
    synthesize_from_rasters(&gt, synth, cfg)
}

/// Same as [`synthesize_with_history`] for rasters that are already computed.
pub fn synthesize_from_rasters(
    gt: &SceneRasters,
    synth: &SynthesisConfig,
    cfg: &LossConfig,
) -> Result<SynthesisResult> {
    let mut field = initial_field(&gt.tangent);
    let mut history = Vec::with_capacity(synth.iterations + 1);
    let (mut value, mut grad) = field_objective(&field, gt, cfg)?;
    history.push(value);
    for it in 0..synth.iterations {
        if !value.is_finite() {
            return Err(Error::Numerical(format!("objective is {value} at iteration {it}")));
        }
        for (c, g) in field.data_mut().iter_mut().zip(&grad) {
            *c = (*c - synth.step * g).clamp(-FIELD_CLAMP, FIELD_CLAMP);
        }
        (value, grad) = field_objective(&field, gt, cfg)?;
        history.push(value);
    }
    if !value.is_finite() {
        return Err(Error::Numerical(format!("objective is {value} after synthesis")));
    }
    Ok(SynthesisResult {
        field,
        objective: history,
    })
}

pub fn synthesize_frame_field(
    scene: &Scene,
    synth: &SynthesisConfig,
    cfg: &LossConfig,
) -> Result<FrameFieldGrid> {
    synthesize_with_history(scene, synth, cfg).map(|r| r.field)
}
