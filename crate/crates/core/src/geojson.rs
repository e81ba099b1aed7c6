//! GeoJSON FeatureCollections of polygons in pixel coordinates `[x, y]`.
//! Scenes carry their raster size as a top-level `"extent": [height, width]`
//! member; predictions carry a `"score"` property per feature.

use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::polygonize::{BuildingSet, ScoredBuilding};
use crate::scene::{Building, Scene};
use serde_json::{json, Map, Value};
use std::path::Path;

fn polygon_coords(b: &Building) -> Value {
    Value::Array(
        b.rings()
            .map(|r| Value::Array(r.iter().map(|p| json!([p.x, p.y])).collect()))
            .collect(),
    )
}

fn feature(b: &Building, props: Map<String, Value>) -> Value {
    json!({
        "type": "Feature",
        "geometry": { "type": "Polygon", "coordinates": polygon_coords(b) },
        "properties": props,
    })
}

pub fn buildings_to_geojson(set: &BuildingSet) -> Value {
    let features: Vec<Value> = set
        .buildings
        .iter()
        .map(|b| {
            let mut props = Map::new();
            props.insert("score".into(), json!(b.score));
            feature(&b.polygon, props)
        })
        .collect();
    json!({ "type": "FeatureCollection", "features": features })
}

pub fn scene_to_geojson(scene: &Scene) -> Value {
    let features: Vec<Value> = scene.buildings.iter().map(|b| feature(b, Map::new())).collect();
    json!({
        "type": "FeatureCollection",
        "extent": [scene.height, scene.width],
        "features": features,
    })
}

fn format_err(m: impl Into<String>) -> Error {
    Error::Format(format!("geojson: {}", m.into()))
}

fn parse_ring(v: &Value) -> Result<Vec<Vec2>> {
    let pts = v.as_array().ok_or_else(|| format_err("ring is not an array"))?;
    pts.iter()
        .map(|p| {
            let xy = p.as_array().filter(|a| a.len() >= 2);
            match xy.map(|a| (a[0].as_f64(), a[1].as_f64())) {
                Some((Some(x), Some(y))) => Ok(Vec2::new(x, y)),
                _ => Err(format_err("position must be [x, y] numbers")),
            }
        })
        .collect()
}

fn parse_features(v: &Value) -> Result<Vec<(Building, Option<f64>)>> {
    if v.get("type").and_then(Value::as_str) != Some("FeatureCollection") {
        return Err(format_err("expected a FeatureCollection"));
    }
    let features = v
        .get("features")
        .and_then(Value::as_array)
        .ok_or_else(|| format_err("missing features array"))?;
    features
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let geom = f.get("geometry").ok_or_else(|| format_err(format!("feature {i} has no geometry")))?;
            if geom.get("type").and_then(Value::as_str) != Some("Polygon") {
                return Err(format_err(format!("feature {i} is not a Polygon")));
            }
            let rings = geom
                .get("coordinates")
                .and_then(Value::as_array)
                .filter(|r| !r.is_empty())
                .ok_or_else(|| format_err(format!("feature {i} has no rings")))?;
            let mut rings = rings.iter().map(parse_ring).collect::<Result<Vec<_>>>()?;
            let outer = rings.remove(0);
            let b = Building::new(outer, rings);
            b.validate()
                .map_err(|e| format_err(format!("feature {i}: {e}")))?;
            let score = f.get("properties").and_then(|p| p.get("score")).and_then(Value::as_f64);
            Ok((b, score))
        })
        .collect()
}

/// Predictions; a missing score reads as 1.
pub fn buildings_from_geojson(v: &Value) -> Result<BuildingSet> {
    Ok(BuildingSet {
        buildings: parse_features(v)?
            .into_iter()
            .map(|(polygon, score)| ScoredBuilding {
                polygon,
                score: score.unwrap_or(1.0),
            })
            .collect(),
    })
}

/// A ground-truth scene. `extent` overrides the file's `"extent"` member.
pub fn scene_from_geojson(v: &Value, extent: Option<(usize, usize)>) -> Result<Scene> {
    let (height, width) = match extent {
        Some(e) => e,
        None => {
            let e = v
                .get("extent")
                .and_then(Value::as_array)
                .filter(|a| a.len() == 2)
                .ok_or_else(|| format_err("scene needs an \"extent\": [height, width] member"))?;
            match (e[0].as_u64(), e[1].as_u64()) {
                (Some(h), Some(w)) => (h as usize, w as usize),
                _ => return Err(format_err("extent must hold two non-negative integers")),
            }
        }
    };
    let mut scene = Scene::new(height, width);
    scene.buildings = parse_features(v)?.into_iter().map(|(b, _)| b).collect();
    Ok(scene)
}

pub fn read_json(path: impl AsRef<Path>) -> Result<Value> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

pub fn write_json(path: impl AsRef<Path>, v: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(v)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenegen::{generate, SceneSpec};

    #[test]
    fn scene_round_trip_is_exact() {
        let scene = generate(&SceneSpec::default()).unwrap();
        let v = scene_to_geojson(&scene);
        let text = serde_json::to_string(&v).unwrap();
        let back = scene_from_geojson(&serde_json::from_str(&text).unwrap(), None).unwrap();
        assert_eq!(back, scene);
    }

    #[test]
    fn buildings_round_trip_keeps_scores() {
        let scene = generate(&SceneSpec::default()).unwrap();
        let set = BuildingSet {
            buildings: scene
                .buildings
                .iter()
                .enumerate()
                .map(|(i, b)| ScoredBuilding {
                    polygon: b.clone(),
                    score: 0.5 + i as f64 / 100.0,
                })
                .collect(),
        };
        let v = buildings_to_geojson(&set);
        assert_eq!(v["features"][0]["geometry"]["type"], "Polygon");
        assert_eq!(buildings_from_geojson(&v).unwrap(), set);
    }

    #[test]
    fn malformed_inputs_are_format_errors() {
        let cases = [
            json!({"type": "Feature"}),
            json!({"type": "FeatureCollection"}),
            json!({"type": "FeatureCollection", "features": [{"geometry": {"type": "Point", "coordinates": [1, 2]}}]}),
            json!({"type": "FeatureCollection", "features": [{"geometry": {"type": "Polygon", "coordinates": [[[0, 0], [1, "a"]]]}}]}),
            // bow-tie ring
            json!({"type": "FeatureCollection", "features": [{"geometry": {"type": "Polygon", "coordinates": [[[0, 0], [4, 4], [4, 0], [0, 4], [0, 0]]]}}]}),
        ];
        for c in cases {
            assert!(matches!(buildings_from_geojson(&c), Err(Error::Format(_))), "{c}");
        }
        let no_extent = json!({"type": "FeatureCollection", "features": []});
        assert!(scene_from_geojson(&no_extent, None).is_err());
        assert_eq!(scene_from_geojson(&no_extent, Some((5, 6))).unwrap().width, 6);
    }
}
