//! Loss kernels with analytic gradients.
//!
//! Complex-valued parameters receive gradients as `(∂/∂Re, ∂/∂Im)` pairs.
//! For a loss `|f|²` where `f` depends holomorphically on a parameter with
//! derivative `w`, that pair is the complex number `2·f·conj(w)`.

use super::FrameFieldGrid;
use crate::error::{Error, Result};
use crate::field_algebra::{eval_poly, eval_poly_derivative};
use crate::raster::{diff_stencil, spatial_gradient, spatial_gradient_adjoint, RasterGrid, TangentField};
use num_complex::Complex64;
use std::f64::consts::FRAC_PI_2;

/// Probabilities are clipped to `[BCE_EPS, 1 - BCE_EPS]` inside the log terms.
pub const BCE_EPS: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq)]
pub struct SegLoss {
    pub value: f64,
    pub bce: f64,
    pub dice: f64,
    /// `d value / d yhat`, one entry per element.
    pub grad: Vec<f64>,
}

/// A loss on the frame field with its gradient (4 entries per pixel).
#[derive(Debug, Clone, PartialEq)]
pub struct FieldLoss {
    pub value: f64,
    pub grad: Vec<f64>,
}

/// Value and gradients of one coupling loss. Gradients that do not apply are
/// all zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingTerm {
    pub value: f64,
    pub d_field: Vec<f64>,
    pub d_int: Vec<f64>,
    pub d_edge: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CouplingLosses {
    pub int_align: CouplingTerm,
    pub edge_align: CouplingTerm,
    pub int_edge: CouplingTerm,
}

/// `α·BCE + (1−α)·Dice` with the +1-smoothed Dice of `y·ŷ` over `y + ŷ`.
pub fn seg_loss(y: &RasterGrid, yhat: &RasterGrid, alpha: f64) -> Result<SegLoss> {
    y.ensure_same_shape(yhat, "seg_loss")?;
    let n = y.data().len();
    if n == 0 {
        return Err(Error::Shape("seg_loss on an empty grid".into()));
    }
    let inv_n = 1.0 / n as f64;
    let mut bce = 0.0;
    let mut inter = 0.0;
    let mut total = 0.0;
    let mut grad = vec![0.0; n];
    for (i, (&t, &p)) in y.data().iter().zip(yhat.data()).enumerate() {
        let pc = p.clamp(BCE_EPS, 1.0 - BCE_EPS);
        bce -= t * pc.ln() + (1.0 - t) * (1.0 - pc).ln();
        if p > BCE_EPS && p < 1.0 - BCE_EPS {
            grad[i] = -alpha * inv_n * (t / pc - (1.0 - t) / (1.0 - pc));
        }
        inter += t * p;
        total += t + p;
    }
    bce *= inv_n;
    let dice = 1.0 - 2.0 * (inter + 1.0) / (total + 1.0);
    let denom = (total + 1.0) * (total + 1.0);
    for (g, &t) in grad.iter_mut().zip(y.data()) {
        *g += (1.0 - alpha) * -2.0 * (t * (total + 1.0) - (inter + 1.0)) / denom;
    }
    Ok(SegLoss {
        value: alpha * bce + (1.0 - alpha) * dice,
        bce,
        dice,
        grad,
    })
}

fn check_field_extent(field: &FrameFieldGrid, g: &RasterGrid, what: &str) -> Result<()> {
    if g.height() != field.height() || g.width() != field.width() || g.channels() != 1 {
        return Err(Error::Shape(format!(
            "{what}: expected {}×{}×1, got {}×{}×{}",
            field.height(),
            field.width(),
            g.height(),
            g.width(),
            g.channels()
        )));
    }
    Ok(())
}

fn align_with_offset(
    field: &FrameFieldGrid,
    tf: &TangentField,
    edge_mask: &RasterGrid,
    offset: f64,
) -> Result<FieldLoss> {
    check_field_extent(field, &tf.theta, "tangent angle")?;
    check_field_extent(field, &tf.valid, "tangent validity")?;
    check_field_extent(field, edge_mask, "edge mask")?;
    let hw = field.height() * field.width();
    let inv = 1.0 / hw as f64;
    let mut value = 0.0;
    let mut grad = vec![0.0; 4 * hw];
    for i in 0..hw {
        let m = edge_mask.data()[i];
        if tf.valid.data()[i] == 0.0 || m == 0.0 {
            continue;
        }
        let z = Complex64::from_polar(1.0, tf.theta.data()[i] + offset);
        let c = field.at(i);
        let f = eval_poly(z, &c);
        value += m * f.norm_sqr();
        let g0 = 2.0 * m * inv * f;
        let g2 = g0 * (z * z).conj();
        grad[4 * i..4 * i + 4].copy_from_slice(&[g0.re, g0.im, g2.re, g2.im]);
    }
    Ok(FieldLoss {
        value: value * inv,
        grad,
    })
}

/// Mean of `mask · |f(e^{iθ}; c0, c2)|²` over valid tangent pixels.
pub fn loss_align(field: &FrameFieldGrid, tf: &TangentField, edge_mask: &RasterGrid) -> Result<FieldLoss> {
    align_with_offset(field, tf, edge_mask, 0.0)
}

/// Same as [`loss_align`] evaluated at the perpendicular direction `θ − π/2`.
pub fn loss_align90(field: &FrameFieldGrid, tf: &TangentField, edge_mask: &RasterGrid) -> Result<FieldLoss> {
    align_with_offset(field, tf, edge_mask, -FRAC_PI_2)
}

/// Dirichlet energy of the four coefficient channels.
pub fn loss_smooth(field: &FrameFieldGrid) -> FieldLoss {
    let (h, w) = (field.height(), field.width());
    let hw = h * w;
    let inv = 1.0 / hw as f64;
    let d = field.data();
    let mut value = 0.0;
    let mut grad = vec![0.0; 4 * hw];
    // (axis length, axis stride, other length, other stride) over the
    // channel-interleaved data: rows first, then columns
    for (n, step, m, other) in [(h, 4 * w, w, 4), (w, 4, h, 4 * w)] {
        for j in 0..m {
            for i in 0..n {
                let Some(st) = diff_stencil(i, n) else { continue };
                let (p, q) = (j * other + st[0].0 * step, j * other + st[1].0 * step);
                for k in 0..4 {
                    let g = st[0].1 * d[p + k] + st[1].1 * d[q + k];
                    value += g * g;
                    grad[p + k] += 2.0 * inv * st[0].1 * g;
                    grad[q + k] += 2.0 * inv * st[1].1 * g;
                }
            }
        }
    }
    FieldLoss {
        value: value * inv,
        grad,
    }
}

/// `(1/HW) Σ |f(∇y; c0, c2)|²` where `∇y` is read as `d/dcol + i·d/drow`.
fn align_on_gradient(field: &FrameFieldGrid, y: &RasterGrid) -> (f64, Vec<f64>, Vec<f64>) {
    let (h, w) = (field.height(), field.width());
    let hw = h * w;
    let inv = 1.0 / hw as f64;
    let g = spatial_gradient(y).expect("single channel");
    let mut value = 0.0;
    let mut d_field = vec![0.0; 4 * hw];
    let (mut d_dr, mut d_dc) = (vec![0.0; hw], vec![0.0; hw]);
    for i in 0..hw {
        let z = Complex64::new(g.data()[2 * i + 1], g.data()[2 * i]);
        let c = field.at(i);
        let f = eval_poly(z, &c);
        value += f.norm_sqr();
        let g0 = 2.0 * inv * f;
        let g2 = g0 * (z * z).conj();
        d_field[4 * i..4 * i + 4].copy_from_slice(&[g0.re, g0.im, g2.re, g2.im]);
        let gz = g0 * eval_poly_derivative(z, &c).conj();
        d_dc[i] = gz.re;
        d_dr[i] = gz.im;
    }
    let d_y = spatial_gradient_adjoint(h, w, &d_dr, &d_dc);
    (value * inv, d_field, d_y)
}

/// The three output-coupling losses tying interior and edge maps to each
/// other and to the frame field.
pub fn coupling_losses(
    field: &FrameFieldGrid,
    yhat_int: &RasterGrid,
    yhat_edge: &RasterGrid,
) -> Result<CouplingLosses> {
    check_field_extent(field, yhat_int, "interior map")?;
    check_field_extent(field, yhat_edge, "edge map")?;
    let (h, w) = (field.height(), field.width());
    let hw = h * w;
    let inv = 1.0 / hw as f64;

    let (ia, ia_field, ia_int) = align_on_gradient(field, yhat_int);
    let (ea, ea_field, ea_edge) = align_on_gradient(field, yhat_edge);

    let grad_int = spatial_gradient(yhat_int)?;
    let mut ie = 0.0;
    let mut d_int_direct = vec![0.0; hw];
    let mut d_edge = vec![0.0; hw];
    let (mut d_dr, mut d_dc) = (vec![0.0; hw], vec![0.0; hw]);
    for i in 0..hw {
        let (gr, gc) = (grad_int.data()[2 * i], grad_int.data()[2 * i + 1]);
        let norm = (gr * gr + gc * gc).sqrt();
        let outside = 1.0 - yhat_int.data()[i];
        let weight = outside.max(norm);
        let r = norm - yhat_edge.data()[i];
        let sign = if r > 0.0 {
            1.0
        } else if r < 0.0 {
            -1.0
        } else {
            0.0
        };
        ie += weight * r.abs();
        d_edge[i] = -inv * weight * sign;
        let mut d_norm = inv * weight * sign;
        if norm > outside {
            d_norm += inv * r.abs();
        } else {
            d_int_direct[i] = -inv * r.abs();
        }
        if norm > 0.0 {
            d_dr[i] = d_norm * gr / norm;
            d_dc[i] = d_norm * gc / norm;
        }
    }
    let back = spatial_gradient_adjoint(h, w, &d_dr, &d_dc);
    let d_int: Vec<f64> = d_int_direct.iter().zip(&back).map(|(a, b)| a + b).collect();

    Ok(CouplingLosses {
        int_align: CouplingTerm {
            value: ia,
            d_field: ia_field,
            d_int: ia_int,
            d_edge: vec![0.0; hw],
        },
        edge_align: CouplingTerm {
            value: ea,
            d_field: ea_field,
            d_int: vec![0.0; hw],
            d_edge: ea_edge,
        },
        int_edge: CouplingTerm {
            value: ie * inv,
            d_field: vec![0.0; 4 * hw],
            d_int,
            d_edge,
        },
    })
}
