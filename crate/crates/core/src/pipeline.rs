//! End-to-end polygonization: initial skeleton graph, ASM optimization,
//! corner-aware simplification, face detection and filtering.

use crate::asm::{optimize, EnergyConfig, TraceRow};
use crate::error::{Error, Result};
use crate::field_synthesis::{
    synthesize_from_rasters, FrameFieldGrid, LossConfig, SceneRasters, SynthesisConfig,
};
use crate::polygonize::{
    detect_corners, detect_polygons, filter_buildings, merge_short_edges, split_and_simplify, BuildingSet,
    SimplifyConfig,
};
use crate::raster::RasterGrid;
use crate::scene::Scene;
use crate::skeleton::{contours_to_graph, marching_squares, prune_spurs, skeleton_to_graph, thin, SkeletonGraph};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitMode {
    /// Thinned edge mask, traced into a graph with shared junctions.
    #[default]
    Skeleton,
    /// Independent iso-contours of the interior map.
    MarchingSquares,
}

impl std::str::FromStr for InitMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "skeleton" => Ok(InitMode::Skeleton),
            "marching_squares" => Ok(InitMode::MarchingSquares),
            other => Err(Error::InvalidInput(format!(
                "unknown init mode `{other}` (expected skeleton or marching_squares)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub loss: LossConfig,
    pub synthesis: SynthesisConfig,
    pub energy: EnergyConfig,
    pub simplify: SimplifyConfig,
    pub init: InitMode,
    /// Dead-end skeleton paths shorter than this many nodes are removed.
    /// Zero disables pruning.
    pub prune_spurs: usize,
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        self.loss.validate()?;
        self.energy.validate()?;
        self.simplify.validate()?;
        if !(self.synthesis.edge_width > 0.0) {
            return Err(Error::InvalidInput("edge_width must be positive".into()));
        }
        Ok(())
    }
}

/// Every intermediate of one polygonization.
#[derive(Debug, Clone, PartialEq)]
pub struct PolygonizeOutput {
    pub initial: SkeletonGraph,
    pub optimized: SkeletonGraph,
    /// `optimized` after merging near-coincident path nodes; corner indices
    /// refer to this graph.
    pub merged: SkeletonGraph,
    pub corners: BTreeSet<usize>,
    pub simplified: SkeletonGraph,
    pub buildings: BuildingSet,
    pub trace: Vec<TraceRow>,
}

pub fn initial_graph(
    y_int: &RasterGrid,
    y_edge: &RasterGrid,
    cfg: &PipelineConfig,
) -> Result<SkeletonGraph> {
    match cfg.init {
        InitMode::Skeleton => {
            let mask = y_edge.threshold(cfg.energy.level);
            let g = skeleton_to_graph(&thin(&mask)?)?;
            Ok(if cfg.prune_spurs > 0 {
                prune_spurs(&g, cfg.prune_spurs)
            } else {
                g
            })
        }
        InitMode::MarchingSquares => {
            Ok(contours_to_graph(&marching_squares(y_int, cfg.energy.level)?))
        }
    }
}

pub fn polygonize(
    y_int: &RasterGrid,
    y_edge: &RasterGrid,
    field: &FrameFieldGrid,
    cfg: &PipelineConfig,
) -> Result<PolygonizeOutput> {
    cfg.validate()?;
    y_int.ensure_same_shape(y_edge, "interior and edge maps")?;
    if y_int.channels() != 1 {
        return Err(Error::Shape("probability maps must have 1 channel".into()));
    }
    if (field.height(), field.width()) != (y_int.height(), y_int.width()) {
        return Err(Error::Shape(format!(
            "frame field is {}x{} but probability maps are {}x{}",
            field.height(),
            field.width(),
            y_int.height(),
            y_int.width()
        )));
    }
    let initial = initial_graph(y_int, y_edge, cfg)?;
    let asm = optimize(&initial, y_int, field, &cfg.energy)?;
    let merged = merge_short_edges(&asm.graph, cfg.simplify.min_edge_length);
    let corners = detect_corners(&merged, field);
    let simplified = split_and_simplify(&merged, &corners, &cfg.simplify);
    let faces = detect_polygons(&simplified)?;
    let buildings = filter_buildings(&simplified, &faces, y_int, &cfg.simplify);
    Ok(PolygonizeOutput {
        initial,
        optimized: asm.graph,
        merged,
        corners,
        simplified,
        buildings,
        trace: asm.trace,
    })
}

/// Ground-truth rasters and synthesized field of a scene.
pub fn prepare_scene(scene: &Scene, cfg: &PipelineConfig) -> Result<(SceneRasters, FrameFieldGrid)> {
    let rasters = SceneRasters::from_scene(scene, cfg.synthesis.edge_width)?;
    let field = synthesize_from_rasters(&rasters, &cfg.synthesis, &cfg.loss)?.field;
    Ok((rasters, field))
}

/// Scene to polygons, using its own rasters as the probability maps.
pub fn run_pipeline(scene: &Scene, cfg: &PipelineConfig) -> Result<PolygonizeOutput> {
    let (rasters, field) = prepare_scene(scene, cfg)?;
    polygonize(&rasters.y_int, &rasters.y_edge, &field, cfg)
}

/// Runs independent scenes on a pool of `workers` threads. Results keep the
/// input order and do not depend on the worker count.
pub fn run_batch(
    scenes: &[Scene],
    cfg: &PipelineConfig,
    workers: usize,
) -> Result<Vec<Result<PolygonizeOutput>>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidInput(format!("cannot build worker pool: {e}")))?;
    Ok(pool.install(|| scenes.par_iter().map(|s| run_pipeline(s, cfg)).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{open_ring, Vec2};
    use crate::scene::Building;
    use crate::scenegen::{generate, SceneSpec, TemplateKind, TemplateSpec};

    fn one_template(kind: TemplateKind, seed: u64) -> Scene {
        generate(&SceneSpec {
            height: 48,
            width: 48,
            seed,
            templates: vec![TemplateSpec {
                kind,
                count: 1,
                min_size: 14.0,
                max_size: 22.0,
                angle_deg: None,
            }],
            ..Default::default()
        })
        .unwrap()
    }

    fn same_ring_up_to_rotation(a: &[Vec2], b: &[Vec2]) -> bool {
        let (a, b) = (open_ring(a), open_ring(b));
        a.len() == b.len() && (0..a.len()).any(|s| (0..a.len()).all(|k| a[(s + k) % a.len()] == b[k]))
    }

    #[test]
    fn identity_pipeline_reproduces_marching_squares() {
        let scene = one_template(TemplateKind::RectWithHole, 3);
        let cfg = PipelineConfig {
            init: InitMode::MarchingSquares,
            energy: EnergyConfig { iterations: 0, ..Default::default() },
            simplify: SimplifyConfig { tolerance: 0.0, ..Default::default() },
            ..Default::default()
        };
        let (rasters, field) = prepare_scene(&scene, &cfg).unwrap();
        let out = polygonize(&rasters.y_int, &rasters.y_edge, &field, &cfg).unwrap();
        let contours = marching_squares(&rasters.y_int, 0.5).unwrap();
        assert_eq!(out.buildings.len(), 1);
        let b = &out.buildings.buildings[0].polygon;
        assert_eq!(b.holes.len(), 1);
        let mut hole = open_ring(&b.holes[0]).to_vec();
        hole.reverse();
        let matched_outer = contours.iter().any(|c| c.closed && same_ring_up_to_rotation(&c.points, &b.outer));
        let matched_hole = contours.iter().any(|c| {
            let mut r = c.points.clone();
            r.reverse();
            c.closed && (same_ring_up_to_rotation(&c.points, &b.holes[0]) || same_ring_up_to_rotation(&r, &hole))
        });
        assert!(matched_outer && matched_hole);
    }

    #[test]
    fn skeleton_mode_adjoining_pair_shares_wall() {
        for seed in 0..4 {
            let scene = one_template(TemplateKind::AdjoiningPair, seed);
            let out = run_pipeline(&scene, &PipelineConfig::default()).unwrap();
            assert_eq!(out.buildings.len(), 2, "seed {seed}");
            let a = open_ring(&out.buildings.buildings[0].polygon.outer);
            let b = open_ring(&out.buildings.buildings[1].polygon.outer);
            let shared = a.iter().filter(|p| b.contains(p)).count();
            assert!(shared >= 2, "seed {seed}: polygons share {shared} vertices");
        }
    }

    #[test]
    fn single_rectangle_is_recovered() {
        let mut scene = Scene::new(40, 40);
        scene.buildings.push(Building::new(
            vec![Vec2::new(8.0, 10.0), Vec2::new(30.0, 10.0), Vec2::new(30.0, 28.0), Vec2::new(8.0, 28.0)],
            vec![],
        ));
        for init in [InitMode::Skeleton, InitMode::MarchingSquares] {
            let out = run_pipeline(&scene, &PipelineConfig { init, ..Default::default() }).unwrap();
            assert_eq!(out.buildings.len(), 1, "{init:?}");
            let outer = &out.buildings.buildings[0].polygon.outer;
            assert_eq!(outer.len(), 5, "{init:?}: {outer:?}");
            for p in open_ring(outer) {
                let near = scene.buildings[0].outer.iter().any(|q| q.dist(*p) < 1.0);
                assert!(near, "{init:?}: vertex {p:?} not within 1 px of a true corner");
            }
        }
    }

    #[test]
    fn batch_is_worker_independent() {
        let scenes: Vec<Scene> = (0..4).map(|s| one_template(TemplateKind::LShape, s)).collect();
        let cfg = PipelineConfig::default();
        let a = run_batch(&scenes, &cfg, 1).unwrap();
        let b = run_batch(&scenes, &cfg, 3).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.as_ref().unwrap(), y.as_ref().unwrap());
        }
    }

    #[test]
    fn config_json_defaults_and_init_parse() {
        let c: PipelineConfig = serde_json::from_str(r#"{"init":"marching_squares","simplify":{"tolerance":2}}"#).unwrap();
        assert_eq!(c.init, InitMode::MarchingSquares);
        assert_eq!(c.simplify.tolerance, 2.0);
        assert_eq!(c.energy, EnergyConfig::default());
        assert!("bogus".parse::<InitMode>().is_err());
        assert!(serde_json::from_str::<PipelineConfig>(r#"{"nope":1}"#).is_err());
    }
}
