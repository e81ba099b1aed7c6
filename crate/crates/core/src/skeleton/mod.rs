//! Skeleton-graph extraction: thinning, pixel-graph tracing, marching-squares
//! contours, and the flat-array graph with batching.

mod graph;
mod marching;
mod thin;
mod trace;

pub use graph::{batch_graphs, contours_to_graph, GraphDump, SkeletonGraph};
pub use marching::{marching_squares, Contour};
pub use thin::thin;
pub use trace::{prune_spurs, skeleton_neighbors, skeleton_to_graph};
