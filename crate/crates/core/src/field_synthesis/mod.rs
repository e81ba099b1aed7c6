//! Training losses as numerical kernels, their normalization, and a
//! variational frame-field synthesizer driven by those losses.

mod config;
mod losses;
mod synth;

pub use config::{LossConfig, PerLoss, LOSS_NAMES};
pub use losses::{
    coupling_losses, loss_align, loss_align90, loss_smooth, seg_loss, CouplingLosses, FieldLoss,
    SegLoss, BCE_EPS,
};
pub use synth::{
    all_losses, initial_field, normalize_losses, synthesize_frame_field, synthesize_from_rasters,
    synthesize_with_history,
    SceneRasters, SynthesisConfig, SynthesisResult,
};

use crate::error::{Error, Result};
use crate::field_algebra::FrameCoeffs;
use crate::raster::RasterGrid;
use num_complex::Complex64;

/// Largest magnitude any coefficient channel may take.
pub const FIELD_CLAMP: f64 = 4.0;

/// Per-pixel `(Re c0, Im c0, Re c2, Im c2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameFieldGrid {
    coeffs: RasterGrid,
}

impl FrameFieldGrid {
    pub fn new(coeffs: RasterGrid) -> Result<Self> {
        if coeffs.channels() != 4 {
            return Err(Error::Shape(format!(
                "frame field needs 4 channels, got {}",
                coeffs.channels()
            )));
        }
        Ok(FrameFieldGrid { coeffs })
    }

    /// Every pixel set to the same coefficients.
    pub fn uniform(height: usize, width: usize, c: FrameCoeffs) -> Self {
        let mut g = RasterGrid::zeros(height, width, 4);
        for px in g.data_mut().chunks_exact_mut(4) {
            px.copy_from_slice(&[c.c0.re, c.c0.im, c.c2.re, c.c2.im]);
        }
        FrameFieldGrid { coeffs: g }
    }

    pub fn height(&self) -> usize {
        self.coeffs.height()
    }

    pub fn width(&self) -> usize {
        self.coeffs.width()
    }

    pub fn grid(&self) -> &RasterGrid {
        &self.coeffs
    }

    pub fn into_grid(self) -> RasterGrid {
        self.coeffs
    }

    pub fn data(&self) -> &[f64] {
        self.coeffs.data()
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        self.coeffs.data_mut()
    }

    /// Coefficients at flat pixel index `i`.
    #[inline]
    pub fn at(&self, i: usize) -> FrameCoeffs {
        let d = &self.coeffs.data()[4 * i..4 * i + 4];
        FrameCoeffs::new(Complex64::new(d[0], d[1]), Complex64::new(d[2], d[3]))
    }

    #[inline]
    pub fn set(&mut self, i: usize, c: FrameCoeffs) {
        self.coeffs.data_mut()[4 * i..4 * i + 4].copy_from_slice(&[c.c0.re, c.c0.im, c.c2.re, c.c2.im]);
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.data().iter().all(|v| v.is_finite())
    }
}
