use super::corners::is_free_cycle;
use super::SimplifyConfig;
use crate::geom::{point_segment_distance, Vec2};
use crate::skeleton::SkeletonGraph;
use std::collections::BTreeSet;

/// Ramer-Douglas-Peucker on a polyline. Returns the kept indices, always
/// including both endpoints. A point is dropped only when its distance to
/// the chord is below `tolerance`, so a zero tolerance keeps every point.
pub fn rdp(points: &[Vec2], tolerance: f64) -> Vec<usize> {
    let n = points.len();
    if n <= 2 {
        return (0..n).collect();
    }
    let mut keep = vec![false; n];
    keep[0] = true;
    keep[n - 1] = true;
    let mut stack = vec![(0usize, n - 1)];
    while let Some((s, e)) = stack.pop() {
        if e <= s + 1 {
            continue;
        }
        let (mut best, mut dmax) = (s + 1, -1.0);
        for i in s + 1..e {
            let d = point_segment_distance(points[i], points[s], points[e]);
            if d > dmax {
                dmax = d;
                best = i;
            }
        }
        if dmax >= tolerance {
            keep[best] = true;
            stack.push((best, e));
            stack.push((s, best));
        }
    }
    (0..n).filter(|&i| keep[i]).collect()
}

/// Splits every path at its corner nodes and simplifies each resulting wall
/// independently. A free-standing cycle with corners is first rotated to
/// start at its first corner so the arbitrary start node does not survive
/// as a vertex. Unreferenced nodes are removed; node order is preserved.
pub fn split_and_simplify(
    graph: &SkeletonGraph,
    corners: &BTreeSet<usize>,
    cfg: &SimplifyConfig,
) -> SkeletonGraph {
    let mut walls: Vec<Vec<usize>> = Vec::new();
    for p in 0..graph.num_paths() {
        let mut path = graph.path(p).to_vec();
        if is_free_cycle(graph, p) {
            let open = &path[..path.len() - 1];
            if let Some(k) = open.iter().position(|n| corners.contains(n)) {
                let mut rotated: Vec<usize> = open[k..].iter().chain(&open[..k]).copied().collect();
                rotated.push(rotated[0]);
                path = rotated;
            }
        }
        let mut cur = vec![path[0]];
        for (k, &node) in path.iter().enumerate().skip(1) {
            cur.push(node);
            if k + 1 < path.len() && corners.contains(&node) {
                walls.push(std::mem::replace(&mut cur, vec![node]));
            }
        }
        walls.push(cur);
    }
    let walls: Vec<Vec<usize>> = walls
        .into_iter()
        .map(|w| {
            let pts: Vec<Vec2> = w.iter().map(|&i| graph.pos[i]).collect();
            rdp(&pts, cfg.tolerance).into_iter().map(|k| w[k]).collect()
        })
        .collect();
    compact(&graph.pos, &walls)
}

/// Drops path nodes that lie closer than `min_len` to the previously kept
/// node of the same path. Path endpoints (junctions, dead ends, the start of
/// a cycle) are never dropped; when the last interior node kept is too close
/// to the path's end node, that interior node is dropped instead. Such
/// micro-edges carry no reliable direction and would otherwise read as
/// corners.
pub fn merge_short_edges(graph: &SkeletonGraph, min_len: f64) -> SkeletonGraph {
    if min_len <= 0.0 {
        return graph.clone();
    }
    let paths: Vec<Vec<usize>> = graph
        .paths()
        .map(|path| {
            let n = path.len();
            if n <= 2 {
                return path.to_vec();
            }
            let mut kept = vec![path[0]];
            for &node in &path[1..n - 1] {
                let anchor = *kept.last().expect("start kept");
                if graph.pos[node].dist(graph.pos[anchor]) >= min_len {
                    kept.push(node);
                }
            }
            let end = path[n - 1];
            if kept.len() > 1 && graph.pos[end].dist(graph.pos[*kept.last().unwrap()]) < min_len {
                kept.pop();
            }
            kept.push(end);
            kept
        })
        .collect();
    compact(&graph.pos, &paths)
}

pub(crate) fn compact(pos: &[Vec2], paths: &[Vec<usize>]) -> SkeletonGraph {
    let mut used = vec![false; pos.len()];
    for p in paths {
        for &i in p {
            used[i] = true;
        }
    }
    let mut remap = vec![usize::MAX; pos.len()];
    let mut new_pos = Vec::new();
    for (i, &u) in used.iter().enumerate() {
        if u {
            remap[i] = new_pos.len();
            new_pos.push(pos[i]);
        }
    }
    let paths: Vec<Vec<usize>> = paths.iter().map(|p| p.iter().map(|&i| remap[i]).collect()).collect();
    SkeletonGraph::from_paths(new_pos, &paths)
}
