use crate::error::{Error, Result};
use crate::geom::{segments_intersect, signed_area, Vec2};
use crate::skeleton::SkeletonGraph;

/// Faces below this area are treated as degenerate.
const MIN_FACE_AREA: f64 = 1e-9;

/// A bounded face of the planar graph: node indices around its boundary
/// (first node not repeated) and the positive area it encloses.
#[derive(Debug, Clone, PartialEq)]
pub struct Face {
    pub nodes: Vec<usize>,
    pub area: f64,
}

impl Face {
    /// Closed ring of positions.
    pub fn ring(&self, graph: &SkeletonGraph) -> Vec<Vec2> {
        let mut r: Vec<Vec2> = self.nodes.iter().map(|&i| graph.pos[i]).collect();
        r.push(r[0]);
        r
    }
}

/// Distinct non-degenerate edges `(a, b)` of the graph, one per path edge.
/// Parallel edges between the same two nodes are kept.
fn graph_edges(graph: &SkeletonGraph) -> Vec<(usize, usize)> {
    graph
        .edges()
        .filter(|&(a, b)| a != b && graph.pos[a] != graph.pos[b])
        .collect()
}

fn check_planar(graph: &SkeletonGraph, edges: &[(usize, usize)]) -> Result<()> {
    let p = &graph.pos;
    let lo = |e: (usize, usize)| p[e.0].x.min(p[e.1].x);
    let hi = |e: (usize, usize)| p[e.0].x.max(p[e.1].x);
    let mut order: Vec<usize> = (0..edges.len()).collect();
    order.sort_by(|&i, &j| lo(edges[i]).total_cmp(&lo(edges[j])).then(i.cmp(&j)));
    for (k, &i) in order.iter().enumerate() {
        let (a, b) = edges[i];
        let (ya0, ya1) = (p[a].y.min(p[b].y), p[a].y.max(p[b].y));
        for &j in &order[k + 1..] {
            let (c, d) = edges[j];
            if lo(edges[j]) > hi(edges[i]) {
                break;
            }
            if a == c || a == d || b == c || b == d {
                continue;
            }
            if p[c].y.max(p[d].y) < ya0 || p[c].y.min(p[d].y) > ya1 {
                continue;
            }
            if segments_intersect(p[a], p[b], p[c], p[d]) {
                let (x, y) = if i < j { ((a, b), (c, d)) } else { ((c, d), (a, b)) };
                return Err(Error::NonPlanar { a: x, b: y });
            }
        }
    }
    Ok(())
}

/// Marks edges whose removal disconnects the graph. Such edges have the same
/// face on both sides and never bound a region.
fn bridges(n: usize, edges: &[(usize, usize)]) -> Vec<bool> {
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (k, &(a, b)) in edges.iter().enumerate() {
        adj[a].push((b, k));
        adj[b].push((a, k));
    }
    let mut is_bridge = vec![false; edges.len()];
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut timer = 0;
    for root in 0..n {
        if disc[root] != usize::MAX {
            continue;
        }
        // (node, edge used to enter it, next adjacency slot)
        let mut stack: Vec<(usize, usize, usize)> = vec![(root, usize::MAX, 0)];
        disc[root] = timer;
        low[root] = timer;
        timer += 1;
        while let Some(&mut (v, via, ref mut slot)) = stack.last_mut() {
            if *slot < adj[v].len() {
                let (w, k) = adj[v][*slot];
                *slot += 1;
                if k == via {
                    continue;
                }
                if disc[w] == usize::MAX {
                    disc[w] = timer;
                    low[w] = timer;
                    timer += 1;
                    stack.push((w, k, 0));
                } else {
                    low[v] = low[v].min(disc[w]);
                }
            } else {
                stack.pop();
                if let Some(&(u, _, _)) = stack.last() {
                    low[u] = low[u].min(low[v]);
                    if low[v] > disc[u] {
                        is_bridge[via] = true;
                    }
                }
            }
        }
    }
    is_bridge
}

/// Enumerates the bounded faces of a planar graph by half-edge tracing.
/// Around every node the outgoing half-edges are sorted by angle; the face
/// walk continues from `u -> v` along the half-edge that follows `v -> u`
/// clockwise. Faces come out counter-clockwise in the positive-area sense;
/// the unbounded face of each component has negative area and is dropped,
/// as are degenerate faces. Bridges and dangling chains are ignored.
pub fn detect_polygons(graph: &SkeletonGraph) -> Result<Vec<Face>> {
    let all = graph_edges(graph);
    check_planar(graph, &all)?;
    let is_bridge = bridges(graph.num_nodes(), &all);
    let edges: Vec<(usize, usize)> = all
        .iter()
        .zip(&is_bridge)
        .filter(|(_, &b)| !b)
        .map(|(&e, _)| e)
        .collect();

    // half-edge 2k is a -> b, 2k + 1 is b -> a
    let m = edges.len() * 2;
    let origin = |h: usize| if h % 2 == 0 { edges[h / 2].0 } else { edges[h / 2].1 };
    let target = |h: usize| origin(h ^ 1);
    let mut out_edges: Vec<Vec<usize>> = vec![Vec::new(); graph.num_nodes()];
    for h in 0..m {
        out_edges[origin(h)].push(h);
    }
    let angle = |h: usize| {
        let d = graph.pos[target(h)] - graph.pos[origin(h)];
        d.y.atan2(d.x)
    };
    // position of each half-edge in its origin's angular order
    let mut slot = vec![0usize; m];
    for list in out_edges.iter_mut() {
        list.sort_by(|&a, &b| angle(a).total_cmp(&angle(b)).then(a.cmp(&b)));
        for (k, &h) in list.iter().enumerate() {
            slot[h] = k;
        }
    }
    let next = |h: usize| {
        let twin = h ^ 1;
        let list = &out_edges[origin(twin)];
        let k = slot[twin];
        list[(k + list.len() - 1) % list.len()]
    };

    let mut seen = vec![false; m];
    let mut faces = Vec::new();
    for start in 0..m {
        if seen[start] {
            continue;
        }
        let mut nodes = Vec::new();
        let mut h = start;
        loop {
            seen[h] = true;
            nodes.push(origin(h));
            h = next(h);
            if h == start {
                break;
            }
        }
        let ring: Vec<Vec2> = nodes.iter().map(|&i| graph.pos[i]).collect();
        let area = signed_area(&ring);
        if area > MIN_FACE_AREA {
            faces.push(Face { nodes, area });
        }
    }
    Ok(faces)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::ring_self_intersects;
    use proptest::prelude::*;

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
    fn single_square() {
        let g = ring_graph(&[sq(1.0, 1.0, 4.0)]);
        let f = detect_polygons(&g).unwrap();
        assert_eq!(f.len(), 1);
        assert!((f[0].area - 16.0).abs() < 1e-12);
        // reversing the path orientation yields the same face
        let mut r = sq(1.0, 1.0, 4.0);
        r.reverse();
        assert_eq!(detect_polygons(&ring_graph(&[r])).unwrap().len(), 1);
    }

    #[test]
    fn shared_wall() {
        // two rectangles sharing the wall x = 5 from (5,1) to (5,4)
        let pos = vec![
            Vec2::new(5.0, 1.0),
            Vec2::new(5.0, 4.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(1.0, 4.0),
            Vec2::new(9.0, 1.0),
            Vec2::new(9.0, 4.0),
            Vec2::new(5.0, 2.5),
        ];
        let g = SkeletonGraph::from_paths(pos, &[vec![0, 2, 3, 1], vec![0, 6, 1], vec![0, 4, 5, 1]]);
        let faces = detect_polygons(&g).unwrap();
        assert_eq!(faces.len(), 2);
        for f in &faces {
            assert!((f.area - 12.0).abs() < 1e-12);
            let n = f.nodes.len();
            let has = |a: usize, b: usize| (0..n).any(|k| f.nodes[k] == a && f.nodes[(k + 1) % n] == b);
            assert!(has(0, 6) && has(6, 1) || has(1, 6) && has(6, 0));
        }
        // opposite traversal directions of the shared path
        let dir = |f: &Face| {
            let n = f.nodes.len();
            (0..n).any(|k| f.nodes[k] == 0 && f.nodes[(k + 1) % n] == 6)
        };
        assert_ne!(dir(&faces[0]), dir(&faces[1]));
    }

    #[test]
    fn nested_squares() {
        let g = ring_graph(&[sq(1.0, 1.0, 20.0), sq(4.0, 4.0, 14.0), sq(8.0, 8.0, 6.0)]);
        let faces = detect_polygons(&g).unwrap();
        assert_eq!(faces.len(), 3);
        let mut areas: Vec<f64> = faces.iter().map(|f| f.area).collect();
        areas.sort_by(f64::total_cmp);
        assert_eq!(areas, vec![36.0, 196.0, 400.0]);
    }

    #[test]
    fn crossing_segments_rejected() {
        let pos = vec![Vec2::new(0.0, 0.0), Vec2::new(4.0, 4.0), Vec2::new(0.0, 4.0), Vec2::new(4.0, 0.0)];
        let g = SkeletonGraph::from_paths(pos, &[vec![0, 1], vec![2, 3]]);
        match detect_polygons(&g) {
            Err(Error::NonPlanar { a, b }) => assert_eq!((a, b), ((0, 1), (2, 3))),
            other => panic!("expected NonPlanar, got {other:?}"),
        }
    }

    #[test]
    fn dangling_spur_and_bridge_ignored() {
        let mut pos = sq(1.0, 1.0, 6.0);
        pos.push(Vec2::new(3.0, 3.0));
        pos.extend(sq(10.0, 1.0, 3.0));
        let g = SkeletonGraph::from_paths(
            pos,
            &[vec![0, 1, 2, 3, 0], vec![2, 4], vec![1, 5], vec![5, 6, 7, 8, 5]],
        );
        let faces = detect_polygons(&g).unwrap();
        assert_eq!(faces.len(), 2);
        for f in faces {
            assert!(!ring_self_intersects(&f.ring(&g)));
            assert!(f.area == 36.0 || f.area == 9.0);
        }
    }

    #[test]
    fn degenerate_two_cycle_dropped() {
        let pos = vec![Vec2::new(1.0, 1.0), Vec2::new(3.0, 1.0)];
        let g = SkeletonGraph::from_paths(pos, &[vec![0, 1], vec![1, 0]]);
        assert!(detect_polygons(&g).unwrap().is_empty());
    }

    proptest! {
        /// Grid of w x h unit cells: V - E + F = 2 with F counting the outer face.
        #[test]
        fn euler_formula_on_grids(w in 1usize..6, h in 1usize..6) {
            let idx = |r: usize, c: usize| r * (w + 1) + c;
            let pos: Vec<Vec2> = (0..=h)
                .flat_map(|r| (0..=w).map(move |c| Vec2::new(c as f64, r as f64)))
                .collect();
            let mut paths = Vec::new();
            for r in 0..=h {
                for c in 0..w {
                    paths.push(vec![idx(r, c), idx(r, c + 1)]);
                }
            }
            for r in 0..h {
                for c in 0..=w {
                    paths.push(vec![idx(r, c), idx(r + 1, c)]);
                }
            }
            let g = SkeletonGraph::from_paths(pos, &paths);
            let faces = detect_polygons(&g).unwrap();
            let v = g.num_nodes() as i64;
            let e = paths.len() as i64;
            prop_assert_eq!(v - e + faces.len() as i64 + 1, 2);
            for f in &faces {
                prop_assert!((f.area - 1.0).abs() < 1e-12);
            }
        }
    }
}
