//! Graph-aligned random partitions.
//!
//! Units are clustered either into vertex-clusters or onto edges between pairs of
//! vertex-clusters. The crate provides the prior probability kernels, forward
//! simulation, a marginal MCMC sampler for Gaussian mixtures with edge components
//! stretched between adjacent vertex means, and posterior point estimates.
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`); the `*F64` aliases
//! below fix the common case.

mod error;
pub mod gaussian;
pub mod linalg;
pub mod mcmc;
pub mod partition;
pub mod priors;
pub mod scalar;
pub mod simulate;
pub mod summary;

pub use error::GarpError;
pub use gaussian::{EdgeGeometry, NiwParams, VertexParams};
pub use linalg::Matrix;
pub use mcmc::{ChainConfig, ChainRun, ChainSample, ChainState, Likelihood, Model, Sampler, WeightMode};
pub use partition::{Assignment, Detach, GraphAlignedState};
pub use priors::{GibbsPrior, ModelHyper};
pub use scalar::Real;
pub use simulate::{LabeledDataset, Scenario};
pub use summary::{PosteriorSummary, SummaryOptions};

pub type PriorF64 = GibbsPrior<f64>;
pub type HyperF64 = ModelHyper<f64>;
pub type MatrixF64 = Matrix<f64>;
pub type NiwF64 = NiwParams<f64>;
pub type VertexParamsF64 = VertexParams<f64>;
pub type EdgeGeometryF64 = EdgeGeometry<f64>;
pub type ModelF64 = Model<f64>;
pub type ChainStateF64 = ChainState<f64>;
pub type ChainSampleF64 = ChainSample<f64>;
pub type DatasetF64 = LabeledDataset<f64>;
pub type SummaryF64 = PosteriorSummary<f64>;

pub type PriorF32 = GibbsPrior<f32>;
pub type HyperF32 = ModelHyper<f32>;
pub type NiwF32 = NiwParams<f32>;
pub type ModelF32 = Model<f32>;
