//! Frame representation as the coefficients of `f(z) = z⁴ + c2·z² + c0`.
//!
//! A frame is the unordered, sign-agnostic direction set `{±u, ±v}`. The
//! polynomial `(z² − u²)(z² − v²)` has exactly those four roots, so storing
//! `(c0, c2)` removes both the labeling and the sign ambiguity.

use crate::geom::Vec2;
use num_complex::Complex64;

/// Below this `|c2² − 4·c0|` the two frame directions coincide (line field).
pub const DEGENERACY_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    pub u: Complex64,
    pub v: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FrameCoeffs {
    pub c0: Complex64,
    pub c2: Complex64,
}

impl Frame {
    pub fn new(u: Complex64, v: Complex64) -> Self {
        Frame { u, v }
    }

    /// Frame with `u` at angle `theta` and `v` perpendicular to it.
    pub fn orthogonal(theta: f64) -> Self {
        let u = Complex64::from_polar(1.0, theta);
        Frame { u, v: u * Complex64::i() }
    }
}

impl FrameCoeffs {
    pub fn new(c0: Complex64, c2: Complex64) -> Self {
        FrameCoeffs { c0, c2 }
    }

    /// The axis-aligned cross `{±1, ±i}`.
    pub fn axis_aligned() -> Self {
        FrameCoeffs::new(Complex64::new(-1.0, 0.0), Complex64::new(0.0, 0.0))
    }

    pub fn discriminant(&self) -> Complex64 {
        self.c2 * self.c2 - 4.0 * self.c0
    }

    /// True when `u² = v²`, i.e. the frame has collapsed to a line field.
    pub fn is_degenerate(&self) -> bool {
        self.discriminant().norm() < DEGENERACY_EPS
    }
}

#[inline]
pub fn eval_poly(z: Complex64, c: &FrameCoeffs) -> Complex64 {
    let z2 = z * z;
    z2 * z2 + c.c2 * z2 + c.c0
}

/// `f'(z) = 4z³ + 2·c2·z`.
#[inline]
pub fn eval_poly_derivative(z: Complex64, c: &FrameCoeffs) -> Complex64 {
    let z2 = z * z;
    4.0 * z2 * z + 2.0 * c.c2 * z
}

pub fn coeffs_from_frame(f: &Frame) -> FrameCoeffs {
    let u2 = f.u * f.u;
    let v2 = f.v * f.v;
    FrameCoeffs {
        c0: u2 * v2,
        c2: -(u2 + v2),
    }
}

/// Recovers one `(u, v)` pair using principal complex square roots.
pub fn frame_from_coeffs(c: &FrameCoeffs) -> Frame {
    let disc = c.discriminant().sqrt();
    let u2 = -0.5 * (c.c2 + disc);
    let v2 = -0.5 * (c.c2 - disc);
    Frame {
        u: u2.sqrt(),
        v: v2.sqrt(),
    }
}

/// Which frame direction an edge walks along.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrameAxis {
    U,
    V,
}

/// Assigns an edge to `±u` or `±v` by the larger absolute scalar product
/// after normalization. Ties go to `u`.
pub fn classify_edge(e: Vec2, f: &Frame) -> FrameAxis {
    let n = e.norm();
    let e = if n > 0.0 { e / n } else { e };
    let du = e.dot(Vec2::from_complex(f.u)).abs();
    let dv = e.dot(Vec2::from_complex(f.v)).abs();
    if du < dv {
        FrameAxis::V
    } else {
        FrameAxis::U
    }
}

/// A node is a corner when its incoming and outgoing edges align to
/// different frame directions.
pub fn is_corner(e_prev: Vec2, e_next: Vec2, f: &Frame) -> bool {
    classify_edge(e_prev, f) != classify_edge(e_next, f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() < tol
    }

    #[test]
    fn eval_poly_examples() {
        let axis = FrameCoeffs::axis_aligned();
        assert_eq!(eval_poly(c(1.0, 0.0), &axis), c(0.0, 0.0));
        let z = Complex64::from_polar(1.0, FRAC_PI_4);
        assert!(close(eval_poly(z, &axis), c(-2.0, 0.0), 1e-12));
        let k = FrameCoeffs::new(c(0.3, 0.1), c(5.0, -7.0));
        assert_eq!(eval_poly(c(0.0, 0.0), &k), c(0.3, 0.1));
    }

    #[test]
    fn coeffs_from_frame_examples() {
        let k = coeffs_from_frame(&Frame::new(c(1.0, 0.0), c(0.0, 1.0)));
        assert_eq!(k, FrameCoeffs::new(c(-1.0, 0.0), c(0.0, 0.0)));

        let k = coeffs_from_frame(&Frame::new(
            Complex64::from_polar(1.0, FRAC_PI_4),
            Complex64::from_polar(1.0, 3.0 * FRAC_PI_4),
        ));
        assert!(close(k.c0, c(1.0, 0.0), 1e-12));
        assert!(close(k.c2, c(0.0, 0.0), 1e-12));

        let f = Frame::new(c(2.0, 0.0), c(0.0, 1.0));
        let k = coeffs_from_frame(&f);
        assert_eq!(k, FrameCoeffs::new(c(-4.0, 0.0), c(-3.0, 0.0)));
        // oracle: all four directions are roots
        for z in [f.u, -f.u, f.v, -f.v] {
            assert!(eval_poly(z, &k).norm() < 1e-12);
        }
    }

    #[test]
    fn frame_from_coeffs_examples() {
        let f = frame_from_coeffs(&FrameCoeffs::axis_aligned());
        let mut sq = [(f.u * f.u).re, (f.v * f.v).re];
        sq.sort_by(f64::total_cmp);
        assert_eq!(sq, [-1.0, 1.0]);

        let line = FrameCoeffs::new(c(1.0, 0.0), c(-2.0, 0.0));
        assert!(line.is_degenerate());
        let f = frame_from_coeffs(&line);
        assert!(close(f.u * f.u, c(1.0, 0.0), 1e-12));
        assert!(close(f.v * f.v, c(1.0, 0.0), 1e-12));

        let f = frame_from_coeffs(&FrameCoeffs::new(c(-4.0, 0.0), c(-3.0, 0.0)));
        let mut sq = [(f.u * f.u).re, (f.v * f.v).re];
        sq.sort_by(f64::total_cmp);
        assert!((sq[0] + 1.0).abs() < 1e-12 && (sq[1] - 4.0).abs() < 1e-12);
    }

    #[test]
    fn corner_table() {
        let f = Frame::new(c(1.0, 0.0), c(0.0, 1.0));
        assert!(is_corner(Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0), &f));
        assert!(is_corner(Vec2::new(0.0, 1.0), Vec2::new(1.0, 0.0), &f));
        assert!(!is_corner(Vec2::new(1.0, 0.0), Vec2::new(1.0, 0.0), &f));
        assert!(!is_corner(Vec2::new(0.0, 1.0), Vec2::new(0.0, -1.0), &f));
        assert!(is_corner(Vec2::new(1.0, 0.1), Vec2::new(0.1, 1.0), &f));
    }

    #[test]
    fn corner_tie_goes_to_u() {
        let f = Frame::new(c(1.0, 0.0), c(0.0, 1.0));
        let diag = Vec2::new(1.0, 1.0);
        assert_eq!(classify_edge(diag, &f), FrameAxis::U);
        assert!(!is_corner(diag, Vec2::new(1.0, 0.0), &f));
        assert!(is_corner(diag, Vec2::new(0.0, 1.0), &f));
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let k = FrameCoeffs::new(c(0.3, -0.7), c(-1.1, 0.4));
        let z = c(0.6, 0.8);
        let h = 1e-6;
        let fd = (eval_poly(z + h, &k) - eval_poly(z - h, &k)) / (2.0 * h);
        assert!(close(fd, eval_poly_derivative(z, &k), 1e-8));
    }
}
