use super::marching::Contour;
use crate::error::{Error, Result};
use crate::geom::Vec2;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

/// Compressed-sparse-row graph of polyline paths over shared nodes.
///
/// `path_index[path_delim[p]..path_delim[p + 1]]` lists the nodes of path
/// `p`. Junction nodes appear once in `pos` and are repeated in every path
/// they terminate. A closed path starts and ends with the same node.
/// Batches of graphs are concatenated; `batch_delim` holds the path range of
/// each item and `node_delim` its node range.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SkeletonGraph {
    pub pos: Vec<Vec2>,
    pub degrees: Vec<u32>,
    pub path_index: Vec<usize>,
    pub path_delim: Vec<usize>,
    pub batch_delim: Vec<usize>,
    pub node_delim: Vec<usize>,
}

impl SkeletonGraph {
    pub fn empty() -> Self {
        SkeletonGraph {
            pos: Vec::new(),
            degrees: Vec::new(),
            path_index: Vec::new(),
            path_delim: vec![0],
            batch_delim: vec![0, 0],
            node_delim: vec![0, 0],
        }
    }

    /// Single-item graph from node positions and per-path node lists.
    /// Degrees are derived from the paths.
    pub fn from_paths(pos: Vec<Vec2>, paths: &[Vec<usize>]) -> Self {
        let mut path_index = Vec::with_capacity(paths.iter().map(Vec::len).sum());
        let mut path_delim = Vec::with_capacity(paths.len() + 1);
        path_delim.push(0);
        for p in paths {
            path_index.extend_from_slice(p);
            path_delim.push(path_index.len());
        }
        let n = pos.len();
        let mut g = SkeletonGraph {
            pos,
            degrees: vec![0; n],
            path_index,
            path_delim,
            batch_delim: vec![0, paths.len()],
            node_delim: vec![0, n],
        };
        g.recompute_degrees();
        g
    }

    pub fn num_nodes(&self) -> usize {
        self.pos.len()
    }

    pub fn num_paths(&self) -> usize {
        self.path_delim.len().saturating_sub(1)
    }

    pub fn num_batches(&self) -> usize {
        self.batch_delim.len().saturating_sub(1)
    }

    pub fn path(&self, p: usize) -> &[usize] {
        &self.path_index[self.path_delim[p]..self.path_delim[p + 1]]
    }

    pub fn paths(&self) -> impl Iterator<Item = &[usize]> + '_ {
        (0..self.num_paths()).map(move |p| self.path(p))
    }

    pub fn is_closed_path(&self, p: usize) -> bool {
        let path = self.path(p);
        path.len() > 1 && path[0] == path[path.len() - 1]
    }

    /// Consecutive node pairs within paths; pairs that would straddle two
    /// paths are never produced.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.paths()
            .flat_map(|p| p.windows(2).map(|w| (w[0], w[1])))
    }

    /// Number of distinct neighbors of every node across all paths.
    pub fn recompute_degrees(&mut self) {
        let mut nbrs: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); self.pos.len()];
        for (a, b) in self.edges() {
            if a != b {
                nbrs[a].insert(b);
                nbrs[b].insert(a);
            }
        }
        self.degrees = nbrs.iter().map(|s| s.len() as u32).collect();
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidInput(format!("skeleton graph: {m}")));
        if self.degrees.len() != self.pos.len() {
            return bad("degrees and pos differ in length");
        }
        if self.path_delim.first() != Some(&0) || self.path_delim.last() != Some(&self.path_index.len()) {
            return bad("path_delim must start at 0 and end at len(path_index)");
        }
        if self.path_delim.windows(2).any(|w| w[0] >= w[1]) {
            return bad("path_delim must be strictly increasing");
        }
        if self.path_index.iter().any(|&i| i >= self.pos.len()) {
            return bad("path_index entry out of range");
        }
        if self.batch_delim.first() != Some(&0) || self.batch_delim.last() != Some(&self.num_paths()) {
            return bad("batch_delim must span all paths");
        }
        if self.node_delim.len() != self.batch_delim.len()
            || self.node_delim.first() != Some(&0)
            || self.node_delim.last() != Some(&self.pos.len())
        {
            return bad("node_delim must span all nodes, one entry per batch boundary");
        }
        let mut check = self.clone();
        check.recompute_degrees();
        if check.degrees != self.degrees {
            return bad("degrees do not match path adjacency");
        }
        Ok(())
    }

    /// Splits a batched graph back into its items.
    pub fn unbatch(&self) -> Vec<SkeletonGraph> {
        (0..self.num_batches())
            .map(|b| {
                let (p0, p1) = (self.batch_delim[b], self.batch_delim[b + 1]);
                let (n0, n1) = (self.node_delim[b], self.node_delim[b + 1]);
                let (i0, i1) = (self.path_delim[p0], self.path_delim[p1]);
                SkeletonGraph {
                    pos: self.pos[n0..n1].to_vec(),
                    degrees: self.degrees[n0..n1].to_vec(),
                    path_index: self.path_index[i0..i1].iter().map(|&i| i - n0).collect(),
                    path_delim: self.path_delim[p0..=p1].iter().map(|&d| d - i0).collect(),
                    batch_delim: vec![0, p1 - p0],
                    node_delim: vec![0, n1 - n0],
                }
            })
            .collect()
    }

    /// Node positions as `[row, col]` for the JSON debug dump.
    pub fn to_dump(&self) -> GraphDump {
        GraphDump {
            pos: self.pos.iter().map(|p| [p.y, p.x]).collect(),
            degrees: self.degrees.clone(),
            path_index: self.path_index.clone(),
            path_delim: self.path_delim.clone(),
            batch_delim: self.batch_delim.clone(),
            node_delim: self.node_delim.clone(),
        }
    }

    pub fn from_dump(d: &GraphDump) -> Result<Self> {
        let g = SkeletonGraph {
            pos: d.pos.iter().map(|&[r, c]| Vec2::from_row_col(r, c)).collect(),
            degrees: d.degrees.clone(),
            path_index: d.path_index.clone(),
            path_delim: d.path_delim.clone(),
            batch_delim: d.batch_delim.clone(),
            node_delim: d.node_delim.clone(),
        };
        g.validate()?;
        Ok(g)
    }
}

/// JSON form of a [`SkeletonGraph`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphDump {
    pub pos: Vec<[f64; 2]>,
    pub degrees: Vec<u32>,
    pub path_index: Vec<usize>,
    pub path_delim: Vec<usize>,
    pub batch_delim: Vec<usize>,
    pub node_delim: Vec<usize>,
}

/// Concatenates graphs into one batch, shifting node indices by the number
/// of nodes before each item and path offsets by the preceding path lengths.
pub fn batch_graphs(graphs: &[SkeletonGraph]) -> SkeletonGraph {
    let mut out = SkeletonGraph {
        pos: Vec::new(),
        degrees: Vec::new(),
        path_index: Vec::new(),
        path_delim: vec![0],
        batch_delim: vec![0],
        node_delim: vec![0],
    };
    for g in graphs {
        let node_offset = out.pos.len();
        let index_offset = out.path_index.len();
        out.pos.extend_from_slice(&g.pos);
        out.degrees.extend_from_slice(&g.degrees);
        out.path_index.extend(g.path_index.iter().map(|&i| i + node_offset));
        out.path_delim.extend(g.path_delim.iter().skip(1).map(|&d| d + index_offset));
        out.batch_delim.push(out.path_delim.len() - 1);
        out.node_delim.push(out.pos.len());
    }
    out
}

/// One isolated path per contour; closed contours repeat their first node.
pub fn contours_to_graph(contours: &[Contour]) -> SkeletonGraph {
    let mut pos = Vec::new();
    let mut paths = Vec::with_capacity(contours.len());
    for c in contours {
        if c.points.is_empty() {
            continue;
        }
        let start = pos.len();
        pos.extend_from_slice(&c.points);
        let mut path: Vec<usize> = (start..pos.len()).collect();
        if c.closed {
            path.push(start);
        }
        paths.push(path);
    }
    SkeletonGraph::from_paths(pos, &paths)
}
