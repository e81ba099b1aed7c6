//! Planar geometry helpers shared by every stage.
//!
//! Coordinates are continuous pixel units with `x` along columns and `y`
//! along rows, so pixel `(row, col)` has its center at `(col + 0.5, row + 0.5)`.
//! Signed areas use the usual shoelace sum over `(x, y)`; outer rings are
//! positive, holes negative.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    #[inline]
    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    /// Builds a point from `(row, col)` order.
    #[inline]
    pub const fn from_row_col(row: f64, col: f64) -> Self {
        Vec2 { x: col, y: row }
    }

    #[inline]
    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    #[inline]
    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    #[inline]
    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    #[inline]
    pub fn dist(self, o: Vec2) -> f64 {
        (self - o).norm()
    }

    /// The vector as the complex number `x + i·y`.
    #[inline]
    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.x, self.y)
    }

    #[inline]
    pub fn from_complex(z: Complex64) -> Self {
        Vec2::new(z.re, z.im)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    #[inline]
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    #[inline]
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    #[inline]
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl Div<f64> for Vec2 {
    type Output = Vec2;
    #[inline]
    fn div(self, s: f64) -> Vec2 {
        Vec2::new(self.x / s, self.y / s)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    #[inline]
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Closest point to `p` on segment `[a, b]` and its parameter in `[0, 1]`.
pub fn closest_point_on_segment(p: Vec2, a: Vec2, b: Vec2) -> (Vec2, f64) {
    let ab = b - a;
    let len_sq = ab.norm_sq();
    if len_sq == 0.0 {
        return (a, 0.0);
    }
    let t = ((p - a).dot(ab) / len_sq).clamp(0.0, 1.0);
    (a + ab * t, t)
}

pub fn point_segment_distance(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    p.dist(closest_point_on_segment(p, a, b).0)
}

/// Shoelace signed area. Accepts rings with or without a repeated closing vertex.
pub fn signed_area(ring: &[Vec2]) -> f64 {
    let n = ring.len();
    if n < 3 {
        return 0.0;
    }
    let mut acc = 0.0;
    for i in 0..n {
        let a = ring[i];
        let b = ring[(i + 1) % n];
        acc += a.cross(b);
    }
    0.5 * acc
}

/// Even-odd crossing test. A point exactly on a horizontal crossing row is
/// resolved with the half-open rule `y0 <= y < y1`, so rasterization and
/// this predicate agree bit-for-bit.
pub fn point_in_ring(p: Vec2, ring: &[Vec2]) -> bool {
    let n = ring.len();
    if n < 3 {
        return false;
    }
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let a = ring[j];
        let b = ring[i];
        if (a.y <= p.y) != (b.y <= p.y) {
            let x = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if p.x < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

/// Drops a repeated closing vertex if present.
pub fn open_ring(ring: &[Vec2]) -> &[Vec2] {
    if ring.len() > 1 && ring[0] == ring[ring.len() - 1] {
        &ring[..ring.len() - 1]
    } else {
        ring
    }
}

/// Returns a copy with the first vertex repeated at the end.
pub fn close_ring(ring: &[Vec2]) -> Vec<Vec2> {
    let mut out = open_ring(ring).to_vec();
    if let Some(&first) = out.first() {
        out.push(first);
    }
    out
}

fn orient(a: Vec2, b: Vec2, c: Vec2) -> f64 {
    (b - a).cross(c - a)
}

fn on_segment(a: Vec2, b: Vec2, p: Vec2) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

/// Closed-segment intersection test, collinear overlap included.
pub fn segments_intersect(a: Vec2, b: Vec2, c: Vec2, d: Vec2) -> bool {
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_segment(c, d, a))
        || (d2 == 0.0 && on_segment(c, d, b))
        || (d3 == 0.0 && on_segment(a, b, c))
        || (d4 == 0.0 && on_segment(a, b, d))
}

/// True if a closed ring has two non-adjacent edges that touch.
pub fn ring_self_intersects(ring: &[Vec2]) -> bool {
    let r = open_ring(ring);
    let n = r.len();
    if n < 4 {
        return false;
    }
    for i in 0..n {
        let (a, b) = (r[i], r[(i + 1) % n]);
        for j in (i + 1)..n {
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            let (c, d) = (r[j], r[(j + 1) % n]);
            if segments_intersect(a, b, c, d) {
                return true;
            }
        }
    }
    false
}

/// Axis-aligned bounding box `(min, max)` of a point set.
pub fn bbox(points: &[Vec2]) -> Option<(Vec2, Vec2)> {
    let first = *points.first()?;
    Some(points.iter().fold((first, first), |(lo, hi), p| {
        (
            Vec2::new(lo.x.min(p.x), lo.y.min(p.y)),
            Vec2::new(hi.x.max(p.x), hi.y.max(p.y)),
        )
    }))
}

/// A point strictly inside a simple ring (not necessarily the centroid).
pub fn interior_point(ring: &[Vec2]) -> Option<Vec2> {
    let r = open_ring(ring);
    let (lo, hi) = bbox(r)?;
    // Scan a horizontal line through the middle and take the midpoint of the
    // widest inside span.
    let candidates = [0.5, 0.37, 0.63, 0.21, 0.79, 0.11, 0.89];
    for frac in candidates {
        let y = lo.y + (hi.y - lo.y) * frac;
        let mut xs = Vec::new();
        let n = r.len();
        for i in 0..n {
            let a = r[i];
            let b = r[(i + 1) % n];
            if (a.y <= y) != (b.y <= y) {
                xs.push(a.x + (y - a.y) / (b.y - a.y) * (b.x - a.x));
            }
        }
        xs.sort_by(|a, b| a.total_cmp(b));
        let best = xs
            .chunks_exact(2)
            .map(|w| (w[1] - w[0], 0.5 * (w[0] + w[1])))
            .max_by(|a, b| a.0.total_cmp(&b.0));
        if let Some((width, x)) = best {
            if width > 0.0 {
                return Some(Vec2::new(x, y));
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(x0: f64, y0: f64, s: f64) -> Vec<Vec2> {
        vec![
            Vec2::new(x0, y0),
            Vec2::new(x0 + s, y0),
            Vec2::new(x0 + s, y0 + s),
            Vec2::new(x0, y0 + s),
        ]
    }

    #[test]
    fn area_sign_and_closure() {
        let sq = square(0.0, 0.0, 2.0);
        assert_eq!(signed_area(&sq), 4.0);
        assert_eq!(signed_area(&close_ring(&sq)), 4.0);
        let mut rev = sq.clone();
        rev.reverse();
        assert_eq!(signed_area(&rev), -4.0);
    }

    #[test]
    fn crossing_segments() {
        let (a, b) = (Vec2::new(0.0, 0.0), Vec2::new(2.0, 2.0));
        let (c, d) = (Vec2::new(0.0, 2.0), Vec2::new(2.0, 0.0));
        assert!(segments_intersect(a, b, c, d));
        assert!(!segments_intersect(a, Vec2::new(1.0, 0.0), c, Vec2::new(1.0, 2.0)));
        // touching at an endpoint counts
        assert!(segments_intersect(a, b, b, Vec2::new(3.0, 0.0)));
    }

    #[test]
    fn bowtie_self_intersects() {
        let bow = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(2.0, 2.0),
            Vec2::new(2.0, 0.0),
            Vec2::new(0.0, 2.0),
        ];
        assert!(ring_self_intersects(&bow));
        assert!(!ring_self_intersects(&square(0.0, 0.0, 1.0)));
    }

    #[test]
    fn interior_point_of_l_shape() {
        let l = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(4.0, 0.0),
            Vec2::new(4.0, 1.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(1.0, 4.0),
            Vec2::new(0.0, 4.0),
        ];
        let p = interior_point(&l).unwrap();
        assert!(point_in_ring(p, &l));
    }
}
