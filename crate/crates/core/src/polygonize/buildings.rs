use super::faces::Face;
use super::SimplifyConfig;
use crate::geom::{interior_point, point_in_ring, Vec2};
use crate::raster::{polygon_pixels, sample_scalar, RasterGrid};
use crate::scene::Building;
use crate::skeleton::SkeletonGraph;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredBuilding {
    pub polygon: Building,
    /// Mean probability over the polygon's own interior (holes excluded).
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct BuildingSet {
    pub buildings: Vec<ScoredBuilding>,
}

impl BuildingSet {
    pub fn len(&self) -> usize {
        self.buildings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buildings.is_empty()
    }

    pub fn polygons(&self) -> impl Iterator<Item = &Building> {
        self.buildings.iter().map(|b| &b.polygon)
    }
}

/// Scores faces by mean probability and keeps those at or above the
/// threshold. Faces are nested only across disconnected components; each
/// face's own region is the face minus its immediate children. A kept face
/// receives as holes those immediate children that were dropped.
pub fn filter_buildings(
    graph: &SkeletonGraph,
    faces: &[Face],
    y_int: &RasterGrid,
    cfg: &SimplifyConfig,
) -> BuildingSet {
    let rings: Vec<Vec<Vec2>> = faces.iter().map(|f| f.ring(graph)).collect();
    let probes: Vec<Option<Vec2>> = rings.iter().map(|r| interior_point(r)).collect();

    // immediate parent = smallest face strictly containing this one
    let parent: Vec<Option<usize>> = (0..faces.len())
        .map(|i| {
            let q = probes[i]?;
            (0..faces.len())
                .filter(|&j| j != i && faces[j].area > faces[i].area && point_in_ring(q, &rings[j]))
                .min_by(|&a, &b| faces[a].area.total_cmp(&faces[b].area).then(a.cmp(&b)))
        })
        .collect();
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); faces.len()];
    for (i, p) in parent.iter().enumerate() {
        if let Some(p) = *p {
            children[p].push(i);
        }
    }

    let (h, w) = (y_int.height(), y_int.width());
    let scores: Vec<f64> = (0..faces.len())
        .map(|i| {
            let mut region: Vec<&[Vec2]> = vec![&rings[i]];
            region.extend(children[i].iter().map(|&c| rings[c].as_slice()));
            let px = polygon_pixels(&region, h, w);
            if px.is_empty() {
                probes[i].map_or(0.0, |q| sample_scalar(y_int, q).0)
            } else {
                px.iter().map(|&k| y_int.data()[k]).sum::<f64>() / px.len() as f64
            }
        })
        .collect();

    let keep = |i: usize| scores[i] >= cfg.probability_threshold;
    let buildings = (0..faces.len())
        .filter(|&i| keep(i))
        .map(|i| {
            let holes: Vec<Vec<Vec2>> = children[i]
                .iter()
                .filter(|&&c| !keep(c))
                .map(|&c| rings[c].clone())
                .collect();
            ScoredBuilding {
                polygon: Building::new(rings[i].clone(), holes),
                score: scores[i].clamp(0.0, 1.0),
            }
        })
        .collect();
    BuildingSet { buildings }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polygonize::detect_polygons;
    use crate::raster::rasterize_interior;
    use crate::scene::Scene;

    fn sq(x: f64, y: f64, s: f64) -> Vec<Vec2> {
        vec![Vec2::new(x, y), Vec2::new(x + s, y), Vec2::new(x + s, y + s), Vec2::new(x, y + s)]
    }

    fn ring_graph(rings: &[Vec<Vec2>]) -> SkeletonGraph {
        let mut pos = Vec::new();
        let mut paths = Vec::new();
        for r in rings {
            let s = pos.len();
            pos.extend_from_slice(r);
            let mut p: Vec<usize> = (s..pos.len()).collect();
            p.push(s);
            paths.push(p);
        }
        SkeletonGraph::from_paths(pos, &paths)
    }

    #[test]
    fn keep_and_drop_by_probability() {
        let y = RasterGrid::from_fn(20, 20, |_, c| if c < 10 { 1.0 } else { 0.0 });
        let g = ring_graph(&[sq(2.0, 2.0, 5.0), sq(12.0, 2.0, 5.0)]);
        let faces = detect_polygons(&g).unwrap();
        let set = filter_buildings(&g, &faces, &y, &SimplifyConfig::default());
        assert_eq!(set.len(), 1);
        assert_eq!(set.buildings[0].score, 1.0);
        assert_eq!(set.buildings[0].polygon.outer[0].x, 2.0);
    }

    #[test]
    fn building_with_hole() {
        let mut scene = Scene::new(30, 30);
        scene.buildings.push(Building::new(sq(3.0, 3.0, 20.0), vec![sq(9.0, 9.0, 6.0)]));
        let y = rasterize_interior(&scene);
        let g = ring_graph(&[sq(3.0, 3.0, 20.0), sq(9.0, 9.0, 6.0)]);
        let faces = detect_polygons(&g).unwrap();
        assert_eq!(faces.len(), 2);
        let set = filter_buildings(&g, &faces, &y, &SimplifyConfig::default());
        assert_eq!(set.len(), 1);
        let b = &set.buildings[0];
        assert_eq!(b.polygon.holes.len(), 1);
        assert_eq!(b.score, 1.0);
        b.polygon.validate().unwrap();
        assert!((b.polygon.area() - (400.0 - 36.0)).abs() < 1e-9);
        // containment oracle: the hole's probe point lies in the outer ring
        let q = interior_point(&b.polygon.holes[0]).unwrap();
        assert!(point_in_ring(q, &b.polygon.outer));
    }

    #[test]
    fn island_inside_hole_is_its_own_building() {
        let mut scene = Scene::new(40, 40);
        scene.buildings.push(Building::new(sq(2.0, 2.0, 34.0), vec![sq(8.0, 8.0, 22.0)]));
        scene.buildings.push(Building::new(sq(14.0, 14.0, 10.0), vec![]));
        let y = rasterize_interior(&scene);
        let g = ring_graph(&[sq(2.0, 2.0, 34.0), sq(8.0, 8.0, 22.0), sq(14.0, 14.0, 10.0)]);
        let faces = detect_polygons(&g).unwrap();
        assert_eq!(faces.len(), 3);
        let set = filter_buildings(&g, &faces, &y, &SimplifyConfig::default());
        assert_eq!(set.len(), 2);
        let holes: usize = set.buildings.iter().map(|b| b.polygon.holes.len()).sum();
        assert_eq!(holes, 1);
    }

    #[test]
    fn threshold_tie_is_kept() {
        let y = RasterGrid::filled(10, 10, 1, 0.5);
        let g = ring_graph(&[sq(2.0, 2.0, 4.0)]);
        let faces = detect_polygons(&g).unwrap();
        assert_eq!(filter_buildings(&g, &faces, &y, &SimplifyConfig::default()).len(), 1);
    }
}
