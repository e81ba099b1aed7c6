//! Deterministic synthetic scenes of simple building footprints.

use crate::error::{Error, Result};
use crate::geom::{bbox, Vec2};
use crate::rng::SplitMix64;
use crate::scene::{Building, Scene};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemplateKind {
    AxisRect,
    RotatedRect,
    LShape,
    RectWithHole,
    /// Two rectangles sharing one full wall.
    AdjoiningPair,
}

impl TemplateKind {
    pub fn name(self) -> &'static str {
        match self {
            TemplateKind::AxisRect => "axis_rect",
            TemplateKind::RotatedRect => "rotated_rect",
            TemplateKind::LShape => "l_shape",
            TemplateKind::RectWithHole => "rect_with_hole",
            TemplateKind::AdjoiningPair => "adjoining_pair",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TemplateSpec {
    pub kind: TemplateKind,
    #[serde(default = "one")]
    pub count: usize,
    /// Side length range in pixels.
    pub min_size: f64,
    pub max_size: f64,
    /// Rotation in degrees for `rotated_rect`; drawn from `[0, 90)` when absent.
    #[serde(default)]
    pub angle_deg: Option<f64>,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneSpec {
    pub height: usize,
    pub width: usize,
    #[serde(default)]
    pub seed: u64,
    pub templates: Vec<TemplateSpec>,
    /// Minimum distance from any vertex to the image border.
    #[serde(default = "default_margin")]
    pub margin: f64,
    /// Minimum gap between the bounding boxes of separate placements.
    #[serde(default = "default_gap")]
    pub gap: f64,
    #[serde(default = "default_attempts")]
    pub max_attempts: usize,
}

fn default_margin() -> f64 {
    2.0
}

fn default_gap() -> f64 {
    4.0
}

fn default_attempts() -> usize {
    1000
}

impl Default for SceneSpec {
    fn default() -> Self {
        let t = |kind, min_size, max_size| TemplateSpec {
            kind,
            count: 1,
            min_size,
            max_size,
            angle_deg: None,
        };
        SceneSpec {
            height: 128,
            width: 128,
            seed: 0,
            templates: vec![
                t(TemplateKind::AxisRect, 12.0, 24.0),
                t(TemplateKind::RotatedRect, 12.0, 20.0),
                t(TemplateKind::LShape, 16.0, 26.0),
                t(TemplateKind::RectWithHole, 22.0, 30.0),
                t(TemplateKind::AdjoiningPair, 12.0, 20.0),
            ],
            margin: default_margin(),
            gap: default_gap(),
            max_attempts: default_attempts(),
        }
    }
}

impl SceneSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidInput(format!("scene spec: {m}")));
        if self.height == 0 || self.width == 0 {
            return bad("extent must be non-empty".into());
        }
        if !(self.margin >= 2.0) {
            return bad("margin must be at least 2 px".into());
        }
        if !(self.gap >= 0.0) {
            return bad("gap must be non-negative".into());
        }
        for t in &self.templates {
            if !(t.min_size > 0.0 && t.min_size <= t.max_size && t.max_size.is_finite()) {
                return bad(format!("{}: need 0 < min_size <= max_size", t.kind.name()));
            }
            if t.kind == TemplateKind::RectWithHole && t.min_size < 10.0 {
                return bad("rect_with_hole: min_size must be at least 10".into());
            }
            if t.kind == TemplateKind::LShape && t.min_size < 6.0 {
                return bad("l_shape: min_size must be at least 6".into());
            }
        }
        Ok(())
    }
}

/// Integer side length drawn from the template's range.
fn side(rng: &mut SplitMix64, t: &TemplateSpec) -> f64 {
    let lo = t.min_size.ceil() as i64;
    let hi = (t.max_size.floor() as i64).max(lo);
    rng.range_inclusive(lo, hi) as f64
}

fn rect(x: f64, y: f64, w: f64, h: f64) -> Vec<Vec2> {
    vec![Vec2::new(x, y), Vec2::new(x + w, y), Vec2::new(x + w, y + h), Vec2::new(x, y + h)]
}

/// Buildings of one placement with their local origin at (0, 0).
fn shape(rng: &mut SplitMix64, t: &TemplateSpec) -> Vec<Building> {
    match t.kind {
        TemplateKind::AxisRect => {
            let (w, h) = (side(rng, t), side(rng, t));
            vec![Building::new(rect(0.0, 0.0, w, h), vec![])]
        }
        TemplateKind::RotatedRect => {
            let (w, h) = (side(rng, t), side(rng, t));
            let deg = t.angle_deg.unwrap_or_else(|| rng.uniform(0.0, 90.0));
            let (s, c) = deg.to_radians().sin_cos();
            let pts = rect(-w / 2.0, -h / 2.0, w, h)
                .into_iter()
                .map(|p| Vec2::new(c * p.x - s * p.y, s * p.x + c * p.y))
                .collect();
            vec![Building::new(pts, vec![])]
        }
        TemplateKind::LShape => {
            let (w, h) = (side(rng, t), side(rng, t));
            let nw = (w * rng.uniform(0.4, 0.6)).round();
            let nh = (h * rng.uniform(0.4, 0.6)).round();
            // notch removed from the top-right corner, then mirrored
            let mut pts = vec![
                Vec2::new(0.0, 0.0),
                Vec2::new(w - nw, 0.0),
                Vec2::new(w - nw, nh),
                Vec2::new(w, nh),
                Vec2::new(w, h),
                Vec2::new(0.0, h),
            ];
            let flip = rng.range_inclusive(0, 3);
            for p in pts.iter_mut() {
                if flip & 1 == 1 {
                    p.x = w - p.x;
                }
                if flip & 2 == 2 {
                    p.y = h - p.y;
                }
            }
            vec![Building::new(pts, vec![])]
        }
        TemplateKind::RectWithHole => {
            let (w, h) = (side(rng, t), side(rng, t));
            let hw = (w * rng.uniform(0.3, 0.5)).round().max(2.0);
            let hh = (h * rng.uniform(0.3, 0.5)).round().max(2.0);
            let hx = ((w - hw) / 2.0).floor();
            let hy = ((h - hh) / 2.0).floor();
            vec![Building::new(rect(0.0, 0.0, w, h), vec![rect(hx, hy, hw, hh)])]
        }
        TemplateKind::AdjoiningPair => {
            let (w1, w2, h) = (side(rng, t), side(rng, t), side(rng, t));
            let a = rect(0.0, 0.0, w1, h);
            let b = rect(w1, 0.0, w2, h);
            let (a, b) = if rng.range_inclusive(0, 1) == 1 {
                let tr = |r: Vec<Vec2>| r.into_iter().map(|p| Vec2::new(p.y, p.x)).collect();
                (tr(a), tr(b))
            } else {
                (a, b)
            };
            vec![Building::new(a, vec![]), Building::new(b, vec![])]
        }
    }
}

fn overlaps(a: (Vec2, Vec2), b: (Vec2, Vec2), gap: f64) -> bool {
    a.0.x < b.1.x + gap && b.0.x < a.1.x + gap && a.0.y < b.1.y + gap && b.0.y < a.1.y + gap
}

/// Places every requested building without overlap. Integer offsets keep
/// axis-aligned walls on pixel boundaries and shared walls bit-identical.
pub fn generate(spec: &SceneSpec) -> Result<Scene> {
    spec.validate()?;
    let mut rng = SplitMix64::new(spec.seed);
    let mut scene = Scene::new(spec.height, spec.width);
    let mut boxes: Vec<(Vec2, Vec2)> = Vec::new();
    for t in &spec.templates {
        for _ in 0..t.count {
            let mut placed = false;
            for _ in 0..spec.max_attempts {
                let parts = shape(&mut rng, t);
                let pts: Vec<Vec2> = parts.iter().flat_map(|b| b.outer.iter().copied()).collect();
                let (lo, hi) = bbox(&pts).expect("templates have vertices");
                let x_lo = (spec.margin - lo.x).ceil();
                let x_hi = (spec.width as f64 - spec.margin - hi.x).floor();
                let y_lo = (spec.margin - lo.y).ceil();
                let y_hi = (spec.height as f64 - spec.margin - hi.y).floor();
                if x_lo > x_hi || y_lo > y_hi {
                    continue;
                }
                let dx = rng.range_inclusive(x_lo as i64, x_hi as i64) as f64;
                let dy = rng.range_inclusive(y_lo as i64, y_hi as i64) as f64;
                let off = Vec2::new(dx, dy);
                let bb = (lo + off, hi + off);
                if boxes.iter().any(|&b| overlaps(b, bb, spec.gap)) {
                    continue;
                }
                boxes.push(bb);
                for b in parts {
                    let shift = |r: &Vec<Vec2>| r.iter().map(|&p| p + off).collect::<Vec<_>>();
                    scene.buildings.push(Building {
                        outer: shift(&b.outer),
                        holes: b.holes.iter().map(shift).collect(),
                    });
                }
                placed = true;
                break;
            }
            if !placed {
                return Err(Error::Placement {
                    template: t.kind.name().to_string(),
                    attempts: spec.max_attempts,
                });
            }
        }
    }
    scene.validate()?;
    Ok(scene)
}
