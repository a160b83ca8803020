//! Label-guided manifold alignment of two datasets measured in different
//! feature spaces.
//!
//! Given a source and a target dataset that share class labels but nothing
//! else, the pipeline learns within-domain geometry with adaptive decay
//! kernels and an aggregated diffusion similarity, bridges the domains
//! through per-class label profiles, couples the samples by (entropic)
//! optimal transport on the cosine cross cost, and produces shared
//! representations: a spectral embedding of the joint graph and/or a
//! barycentric projection into the target space. Alignment quality is
//! scored with the fraction-closer-than-the-true-match metric and k-NN
//! label transfer accuracy.
//!
//! ```no_run
//! use mali_core::dataio::generate_helix_pair;
//! use mali_core::pipeline::{align, AlignParams, ProjectionKind};
//!
//! let (x, y, _pairs) = generate_helix_pair(300, 5, 0.05, 42)?;
//! let result = align(&x, &y, &AlignParams::default(), ProjectionKind::Spectral)?;
//! let embedding = result.spectral.unwrap();
//! # Ok::<(), mali_core::Error>(())
//! ```

pub mod bridge;
pub mod dataio;
pub mod diffusion;
pub mod embedding;
pub mod error;
pub mod evaluation;
pub mod graph;
pub mod pipeline;
pub mod transport;

pub use bridge::{CrossCost, LabelProfile};
pub use dataio::{DomainDataset, PairSet};
pub use diffusion::{DptSimilarity, StationaryDistribution};
pub use embedding::{JointAffinity, OffdiagMode, SharedEmbedding};
pub use error::{Error, Result};
pub use evaluation::{EvalSpace, MetricReport};
pub use graph::{AffinityMatrix, DiffusionOperator};
pub use pipeline::{AlignParams, AlignmentResult, ProjectionKind};
pub use transport::{Coupling, MassVectors};
