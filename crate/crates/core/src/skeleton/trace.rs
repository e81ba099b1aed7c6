//! Tracing a one-pixel-wide skeleton into junction-to-junction paths.
//!
//! Pixels are joined with mixed (m-) adjacency: orthogonal neighbors always,
//! diagonal neighbors only when neither shared orthogonal pixel is set. This
//! keeps the 8-connected topology while removing the redundant diagonal
//! links that would otherwise turn every bend into a spurious junction.

use super::graph::SkeletonGraph;
use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::raster::RasterGrid;
use std::collections::{HashMap, HashSet};

const ORTHO: [(isize, isize); 4] = [(-1, 0), (0, -1), (0, 1), (1, 0)];
const DIAG: [(isize, isize); 4] = [(-1, -1), (-1, 1), (1, -1), (1, 1)];

fn on(px: &[bool], h: usize, w: usize, r: isize, c: isize) -> bool {
    r >= 0 && c >= 0 && (r as usize) < h && (c as usize) < w && px[r as usize * w + c as usize]
}

/// Flat indices of the m-adjacent set neighbors of pixel `i`, ascending.
pub fn skeleton_neighbors(px: &[bool], h: usize, w: usize, i: usize) -> Vec<usize> {
    let (r, c) = ((i / w) as isize, (i % w) as isize);
    let mut out = Vec::with_capacity(4);
    for (dr, dc) in ORTHO {
        if on(px, h, w, r + dr, c + dc) {
            out.push(((r + dr) as usize) * w + (c + dc) as usize);
        }
    }
    for (dr, dc) in DIAG {
        if on(px, h, w, r + dr, c + dc) && !on(px, h, w, r + dr, c) && !on(px, h, w, r, c + dc) {
            out.push(((r + dr) as usize) * w + (c + dc) as usize);
        }
    }
    out.sort_unstable();
    out
}

fn edge_key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

/// Builds the skeleton graph of a thin binary mask. Nodes sit at pixel
/// centers in row-major order; nodes with a number of neighbors other than
/// two are junctions and split paths. Pure cycles become single closed paths.
pub fn skeleton_to_graph(skel: &RasterGrid) -> Result<SkeletonGraph> {
    if skel.channels() != 1 {
        return Err(Error::Shape(format!(
            "skeleton_to_graph expects 1 channel, got {}",
            skel.channels()
        )));
    }
    let (h, w) = (skel.height(), skel.width());
    let px: Vec<bool> = skel.data().iter().map(|&v| v > 0.5).collect();
    let pixels: Vec<usize> = (0..h * w).filter(|&i| px[i]).collect();
    let node_of: HashMap<usize, usize> = pixels.iter().enumerate().map(|(n, &i)| (i, n)).collect();
    let pos: Vec<Vec2> = pixels
        .iter()
        .map(|&i| Vec2::new((i % w) as f64 + 0.5, (i / w) as f64 + 0.5))
        .collect();
    let nbrs: Vec<Vec<usize>> = pixels
        .iter()
        .map(|&i| skeleton_neighbors(&px, h, w, i).iter().map(|j| node_of[j]).collect())
        .collect();

    let mut used: HashSet<(usize, usize)> = HashSet::new();
    let mut paths: Vec<Vec<usize>> = Vec::new();

    let walk = |start: usize, first: usize, used: &mut HashSet<(usize, usize)>| -> Vec<usize> {
        let mut path = vec![start, first];
        used.insert(edge_key(start, first));
        let mut cur = first;
        while nbrs[cur].len() == 2 {
            let next = nbrs[cur].iter().copied().find(|&n| !used.contains(&edge_key(cur, n)));
            match next {
                Some(n) => {
                    used.insert(edge_key(cur, n));
                    path.push(n);
                    cur = n;
                }
                None => break,
            }
        }
        path
    };

    for n in 0..pos.len() {
        let deg = nbrs[n].len();
        if deg == 0 {
            paths.push(vec![n]);
        } else if deg != 2 {
            for &m in &nbrs[n] {
                if !used.contains(&edge_key(n, m)) {
                    paths.push(walk(n, m, &mut used));
                }
            }
        }
    }
    // whatever is left are cycles made only of degree-2 nodes
    for n in 0..pos.len() {
        if nbrs[n].len() != 2 {
            continue;
        }
        if let Some(&m) = nbrs[n].iter().find(|&&m| !used.contains(&edge_key(n, m))) {
            let path = walk(n, m, &mut used);
            paths.push(path);
        }
    }
    Ok(SkeletonGraph::from_paths(pos, &paths))
}

/// Drops dead-end paths (one end of degree 1) with fewer than `min_nodes`
/// nodes. Unreferenced nodes are removed and indices compacted.
pub fn prune_spurs(graph: &SkeletonGraph, min_nodes: usize) -> SkeletonGraph {
    let keep: Vec<Vec<usize>> = graph
        .paths()
        .filter(|p| {
            let first = graph.degrees[p[0]];
            let last = graph.degrees[p[p.len() - 1]];
            let dead_end = p.len() > 1 && (first == 1) != (last == 1);
            !(dead_end && p.len() < min_nodes)
        })
        .map(|p| p.to_vec())
        .collect();
    let mut used = vec![false; graph.num_nodes()];
    for p in &keep {
        for &i in p {
            used[i] = true;
        }
    }
    let mut remap = vec![usize::MAX; graph.num_nodes()];
    let mut pos = Vec::new();
    for (i, &u) in used.iter().enumerate() {
        if u {
            remap[i] = pos.len();
            pos.push(graph.pos[i]);
        }
    }
    let paths: Vec<Vec<usize>> = keep.iter().map(|p| p.iter().map(|&i| remap[i]).collect()).collect();
    SkeletonGraph::from_paths(pos, &paths)
}
