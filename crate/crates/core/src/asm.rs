//! Active Skeleton Model: energies over a skeleton graph, their analytic
//! gradients, and the RMSprop descent loop that moves the nodes.

use crate::error::{Error, Result};
use crate::field_algebra::{eval_poly, eval_poly_derivative, FrameCoeffs};
use crate::field_synthesis::FrameFieldGrid;
use crate::geom::Vec2;
use crate::raster::{sample_into, sample_scalar, RasterGrid};
use crate::skeleton::SkeletonGraph;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;

pub const RMS_EPS: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnergyConfig {
    pub level: f64,
    pub lambda_probability: f64,
    pub lambda_frame_align: f64,
    pub lambda_length: f64,
    pub iterations: usize,
    pub init_lr: f64,
    pub rms_gamma: f64,
    pub lr_decay: f64,
}

impl Default for EnergyConfig {
    fn default() -> Self {
        EnergyConfig {
            level: 0.5,
            lambda_probability: 1.0,
            lambda_frame_align: 1.0,
            lambda_length: 0.1,
            iterations: 300,
            init_lr: 0.1,
            rms_gamma: 0.9,
            lr_decay: 0.99,
        }
    }
}

impl EnergyConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidInput(format!("energy config: {m}")));
        if !(self.level > 0.0 && self.level < 1.0) {
            return bad("level must be in (0, 1)");
        }
        for (name, w) in [
            ("lambda_probability", self.lambda_probability),
            ("lambda_frame_align", self.lambda_frame_align),
            ("lambda_length", self.lambda_length),
        ] {
            if !(w >= 0.0 && w.is_finite()) {
                return bad(&format!("{name} must be a finite non-negative weight"));
            }
        }
        if !(self.rms_gamma > 0.0 && self.rms_gamma < 1.0) {
            return bad("rms_gamma must be in (0, 1)");
        }
        if !(self.lr_decay > 0.0 && self.lr_decay <= 1.0) {
            return bad("lr_decay must be in (0, 1]");
        }
        if !(self.init_lr >= 0.0 && self.init_lr.is_finite()) {
            return bad("init_lr must be finite and non-negative");
        }
        Ok(())
    }
}

/// An energy value with its gradient with respect to every node position.
#[derive(Debug, Clone, PartialEq)]
pub struct Energy {
    pub value: f64,
    pub grad: Vec<Vec2>,
    /// Edges that contributed nothing because their endpoints coincide.
    pub skipped_edges: usize,
}

fn edge_list(graph: &SkeletonGraph) -> Vec<(usize, usize)> {
    graph.edges().collect()
}

/// `Σ_nodes (y(p) − level)²` with bilinear sampling of channel 0.
pub fn e_probability(graph: &SkeletonGraph, y_int: &RasterGrid, level: f64) -> Energy {
    let terms: Vec<(f64, Vec2)> = graph
        .pos
        .par_iter()
        .map(|&p| {
            let (y, dy) = sample_scalar(y_int, p);
            let r = y - level;
            (r * r, dy * (2.0 * r))
        })
        .collect();
    let mut value = 0.0;
    let mut grad = Vec::with_capacity(terms.len());
    for (v, g) in terms {
        value += v;
        grad.push(g);
    }
    Energy {
        value,
        grad,
        skipped_edges: 0,
    }
}

/// Value of `|f(d; c(m))|²` for one edge and its gradients with respect to
/// both endpoints. `None` for a zero-length edge.
fn align_term(field: &FrameFieldGrid, a: Vec2, b: Vec2) -> Option<(f64, Vec2, Vec2)> {
    let e = b - a;
    let n = e.norm();
    if n == 0.0 {
        return None;
    }
    let d = e / n;
    let z = d.to_complex();
    let m = (a + b) * 0.5;
    let mut vals = [0.0; 4];
    let mut grads = [Vec2::ZERO; 4];
    sample_into(field.grid(), m, &mut vals, &mut grads);
    let c = FrameCoeffs::new(Complex64::new(vals[0], vals[1]), Complex64::new(vals[2], vals[3]));
    let f = eval_poly(z, &c);
    let value = f.norm_sqr();

    // d|f|²/dz as a 2-vector is 2 f conj(f'(z)); then through d = e/|e|
    let gz = Vec2::from_complex(2.0 * f * eval_poly_derivative(z, &c).conj());
    let ge = (gz - d * d.dot(gz)) / n;

    // gradients w.r.t. (Re c0, Im c0) and (Re c2, Im c2)
    let g_c0 = 2.0 * f;
    let g_c2 = 2.0 * f * (z * z).conj();
    let gm = grads[0] * g_c0.re + grads[1] * g_c0.im + grads[2] * g_c2.re + grads[3] * g_c2.im;
    Some((value, gm * 0.5 - ge, gm * 0.5 + ge))
}

/// `Σ_edges |f(e/|e|; c(e_center))|²` with the field sampled bilinearly at
/// each edge midpoint. Only edges inside a path count.
pub fn e_frame_align(graph: &SkeletonGraph, field: &FrameFieldGrid) -> Energy {
    let edges = edge_list(graph);
    let terms: Vec<Option<(f64, Vec2, Vec2)>> = edges
        .par_iter()
        .map(|&(i, j)| align_term(field, graph.pos[i], graph.pos[j]))
        .collect();
    let mut value = 0.0;
    let mut grad = vec![Vec2::ZERO; graph.num_nodes()];
    let mut skipped_edges = 0;
    for (&(i, j), t) in edges.iter().zip(terms) {
        match t {
            Some((v, ga, gb)) => {
                value += v;
                grad[i] = grad[i] + ga;
                grad[j] = grad[j] + gb;
            }
            None => skipped_edges += 1,
        }
    }
    Energy {
        value,
        grad,
        skipped_edges,
    }
}

/// `Σ_edges |e|²`.
pub fn e_length(graph: &SkeletonGraph) -> Energy {
    let mut value = 0.0;
    let mut grad = vec![Vec2::ZERO; graph.num_nodes()];
    for (i, j) in graph.edges() {
        let e = graph.pos[j] - graph.pos[i];
        value += e.norm_sq();
        grad[i] = grad[i] - e * 2.0;
        grad[j] = grad[j] + e * 2.0;
    }
    Energy {
        value,
        grad,
        skipped_edges: 0,
    }
}

/// Unweighted energies of one evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub e_prob: f64,
    pub e_align: f64,
    pub e_length: f64,
    pub total: f64,
}

pub fn write_trace_csv<W: Write>(rows: &[TraceRow], mut w: W) -> Result<()> {
    writeln!(w, "iteration,e_prob,e_align,e_length,total")?;
    for r in rows {
        writeln!(
            w,
            "{},{:.12e},{:.12e},{:.12e},{:.12e}",
            r.iteration, r.e_prob, r.e_align, r.e_length, r.total
        )?;
    }
    Ok(())
}

/// Weighted total energy and its gradient.
pub fn total_energy(
    graph: &SkeletonGraph,
    y_int: &RasterGrid,
    field: &FrameFieldGrid,
    cfg: &EnergyConfig,
) -> (TraceRow, Vec<Vec2>) {
    let p = e_probability(graph, y_int, cfg.level);
    let a = e_frame_align(graph, field);
    let l = e_length(graph);
    let total = cfg.lambda_probability * p.value
        + cfg.lambda_frame_align * a.value
        + cfg.lambda_length * l.value;
    let grad = (0..graph.num_nodes())
        .map(|i| {
            p.grad[i] * cfg.lambda_probability
                + a.grad[i] * cfg.lambda_frame_align
                + l.grad[i] * cfg.lambda_length
        })
        .collect();
    let row = TraceRow {
        iteration: 0,
        e_prob: p.value,
        e_align: a.value,
        e_length: l.value,
        total,
    };
    (row, grad)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AsmResult {
    pub graph: SkeletonGraph,
    /// One row per iteration before its step, plus a final row.
    pub trace: Vec<TraceRow>,
}

/// Runs RMSprop on the node positions. Junction nodes are stored once, so
/// the gradients of every path through them are summed into that row.
pub fn optimize(
    graph: &SkeletonGraph,
    y_int: &RasterGrid,
    field: &FrameFieldGrid,
    cfg: &EnergyConfig,
) -> Result<AsmResult> {
    cfg.validate()?;
    if y_int.channels() != 1 {
        return Err(Error::Shape(format!(
            "probability map needs 1 channel, got {}",
            y_int.channels()
        )));
    }
    if !y_int.same_extent(field.grid()) {
        return Err(Error::Shape(format!(
            "probability map is {}x{} but frame field is {}x{}",
            y_int.height(),
            y_int.width(),
            field.height(),
            field.width()
        )));
    }
    let (w, h) = (y_int.width() as f64, y_int.height() as f64);
    let mut g = graph.clone();
    for p in g.pos.iter_mut() {
        *p = clamp(*p, w, h);
    }
    let mut s = vec![Vec2::ZERO; g.num_nodes()];
    let mut lr = cfg.init_lr;
    let mut trace = Vec::with_capacity(cfg.iterations + 1);
    for it in 0..=cfg.iterations {
        let (mut row, grad) = total_energy(&g, y_int, field, cfg);
        row.iteration = it;
        if !row.total.is_finite() {
            return Err(Error::Numerical(format!("ASM energy is not finite at iteration {it}")));
        }
        trace.push(row);
        if it == cfg.iterations {
            break;
        }
        for ((p, si), gi) in g.pos.iter_mut().zip(s.iter_mut()).zip(&grad) {
            si.x = cfg.rms_gamma * si.x + (1.0 - cfg.rms_gamma) * gi.x * gi.x;
            si.y = cfg.rms_gamma * si.y + (1.0 - cfg.rms_gamma) * gi.y * gi.y;
            let step = Vec2::new(gi.x / (si.x + RMS_EPS).sqrt(), gi.y / (si.y + RMS_EPS).sqrt());
            *p = clamp(*p - step * lr, w, h);
        }
        lr *= cfg.lr_decay;
    }
    Ok(AsmResult { graph: g, trace })
}

fn clamp(p: Vec2, w: f64, h: f64) -> Vec2 {
    Vec2::new(p.x.clamp(0.0, w), p.y.clamp(0.0, h))
}
