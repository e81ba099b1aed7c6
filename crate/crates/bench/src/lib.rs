//! Shared fixtures for the benchmarks.

use ffpoly_core::scenegen::{generate, TemplateKind, TemplateSpec};
use ffpoly_core::{Scene, SceneSpec};

/// A square scene of side `size` with roughly `buildings` mixed buildings.
pub fn mixed_scene(size: usize, buildings: usize, seed: u64) -> Scene {
    let kinds = [
        TemplateKind::AxisRect,
        TemplateKind::RotatedRect,
        TemplateKind::LShape,
        TemplateKind::RectWithHole,
        TemplateKind::AdjoiningPair,
    ];
    let templates = kinds
        .iter()
        .enumerate()
        .map(|(i, &kind)| TemplateSpec {
            kind,
            count: buildings / kinds.len() + usize::from(i < buildings % kinds.len()),
            min_size: 18.0,
            max_size: 34.0,
            angle_deg: None,
        })
        .filter(|t| t.count > 0)
        .collect();
    generate(&SceneSpec {
        height: size,
        width: size,
        seed,
        templates,
        ..SceneSpec::default()
    })
    .expect("benchmark scene fits")
}
