//! Dimension reduction by flattening a sampled manifold.
//!
//! The points of a discrete manifold sample push each other apart and are
//! held together by springs to their soft neighbours. Iterating this
//! deforming field unrolls the manifold inside its ambient space until it is
//! nearly flat; PCA of the result then gives the intrinsic dimension and the
//! low-dimensional coordinates.
//!
//! ```
//! use flatfield::{datasets::SurfaceSpec, pipeline::{reduce, ReduceConfig}};
//!
//! let cloud = SurfaceSpec::half_cylinder().generate().unwrap();
//! let config = ReduceConfig::default();
//! # let config = ReduceConfig { deform: flatfield::deform::DeformConfig { max_steps: 5, ..Default::default() }, ..config };
//! let reduction = reduce(&cloud, &config).unwrap();
//! assert_eq!(reduction.embedding.coordinates.len(), 120);
//! ```

pub mod datasets;
pub mod deform;
pub mod error;
pub mod exec;
pub mod export;
pub mod geometry;
pub mod neighborhood;
pub mod pipeline;
pub mod spectral;

pub use deform::{DeformConfig, DeformOutcome, DeformState, DeformTrace, Deformer, StepRecord, StopReason};
pub use error::{Error, Result};
pub use geometry::{pairwise_distances, DistanceMatrix, PointCloud};
pub use neighborhood::{NeighborEntry, SoftNeighborhood};
pub use pipeline::{reduce, EmbeddingResult, ReduceConfig, Reduction};
pub use spectral::PcaResult;
