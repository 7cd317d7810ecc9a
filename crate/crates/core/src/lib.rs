//! Compensatory-motion analysis over a 7×7 reaching workspace.
//!
//! Final reaching poses recorded with and without a wrist brace are turned
//! into four per-target metrics (joint location deviation `L`, joint angle
//! difference `A`, separability `J`, clustering accuracy `H`), combined into a
//! Compensation Index `I`, and drawn as heatmaps over the target grid.
//!
//! All numeric code is generic over [`Scalar`] (`f32` or `f64`); the `*F64`
//! aliases below cover the common case.
//!
//! ```
//! use compmotion::{synth, pipeline, Orientation, PipelineConfig};
//!
//! let data: compmotion::DatasetF64 = synth::generate_dataset(&synth::SynthParams::default()).unwrap();
//! let m = pipeline::compute_orientation(&data, Orientation::Horizontal, &PipelineConfig::default()).unwrap();
//! assert_eq!(m.targets.len(), 49);
//! ```

pub mod average;
pub mod dispersion;
pub mod group;
pub mod heatmap;
pub mod index;
pub mod ingest;
pub mod model;
pub mod pipeline;
pub mod preprocess;
mod scalar;
pub mod synth;

pub use model::{
    AngleKey, AxisId, Condition, Dataset, FinalPose, GridNumbering, GridSpec, JointId, NromTable, Orientation,
    ReachInterval, ReachRecord, RecordKey, SubjectInfo, TargetId,
};
pub use pipeline::{OrientationMetrics, PipelineConfig, TargetMetrics};
pub use scalar::{Scalar, Vec3};

pub type DatasetF64 = Dataset<f64>;
pub type DatasetF32 = Dataset<f32>;
pub type FinalPoseF64 = FinalPose<f64>;
pub type RelativePoseF64 = preprocess::RelativePose<f64>;
pub type TargetMetricsF64 = TargetMetrics<f64>;
pub type TargetMetricsF32 = TargetMetrics<f32>;
pub type OrientationMetricsF64 = OrientationMetrics<f64>;
