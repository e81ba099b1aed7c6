pub mod asm;
pub mod error;
pub mod field_algebra;
pub mod field_synthesis;
pub mod geojson;
pub mod geom;
pub mod metrics;
pub mod pipeline;
pub mod polygonize;
pub mod raster;
pub mod rng;
pub mod scene;
pub mod scenegen;
pub mod skeleton;

pub use asm::{AsmResult, EnergyConfig, TraceRow};
pub use error::{Error, Result};
pub use field_algebra::{Frame, FrameCoeffs};
pub use field_synthesis::{FrameFieldGrid, LossConfig};
pub use geom::Vec2;
pub use metrics::MetricsReport;
pub use pipeline::{InitMode, PipelineConfig, PolygonizeOutput};
pub use polygonize::{BuildingSet, ScoredBuilding, SimplifyConfig};
pub use raster::{RasterGrid, TangentField};
pub use scene::{Building, Scene};
pub use scenegen::SceneSpec;
pub use skeleton::SkeletonGraph;
