use crate::field_algebra::{frame_from_coeffs, is_corner, FrameCoeffs};
use crate::field_synthesis::FrameFieldGrid;
use crate::raster::nearest_sample;
use crate::skeleton::SkeletonGraph;
use num_complex::Complex64;
use std::collections::BTreeSet;

/// Whether a closed path is a free-standing cycle, i.e. its start node is an
/// ordinary path node rather than a junction.
pub(crate) fn is_free_cycle(graph: &SkeletonGraph, p: usize) -> bool {
    let path = graph.path(p);
    graph.is_closed_path(p) && path.len() > 3 && graph.degrees[path[0]] == 2
}

/// Nodes where the incoming and outgoing edges follow different directions
/// of the frame sampled (nearest pixel) at the node. Path endpoints are
/// never corners, except that a free-standing cycle has no endpoint and its
/// start node is tested like any other.
pub fn detect_corners(graph: &SkeletonGraph, field: &FrameFieldGrid) -> BTreeSet<usize> {
    let mut out = BTreeSet::new();
    for p in 0..graph.num_paths() {
        let path = graph.path(p);
        let n = path.len();
        if n < 3 {
            continue;
        }
        let mut test = |prev: usize, node: usize, next: usize| {
            let at = graph.pos[node];
            let e_prev = at - graph.pos[prev];
            let e_next = graph.pos[next] - at;
            if e_prev.norm_sq() == 0.0 || e_next.norm_sq() == 0.0 {
                return;
            }
            let s = nearest_sample(field.grid(), at);
            let c = FrameCoeffs::new(Complex64::new(s[0], s[1]), Complex64::new(s[2], s[3]));
            if is_corner(e_prev, e_next, &frame_from_coeffs(&c)) {
                out.insert(node);
            }
        };
        for k in 1..n - 1 {
            test(path[k - 1], path[k], path[k + 1]);
        }
        if is_free_cycle(graph, p) {
            test(path[n - 2], path[0], path[1]);
        }
    }
    out
}
