//! Statistics of multi-domain wireless channels conditioned on side information.
//!
//! The library synthesizes channel realizations from a generic multipath model
//! sampled uniformly in frequency, time and space, and provides the machinery
//! to study their first and second moments given side information:
//!
//! - [`channel`]: steering vectors, channel synthesis and parameter sampling,
//!   including a velocity-labeled temporal scenario.
//! - [`toeplitz`]: orthogonal projection onto (multilevel) Toeplitz matrices
//!   and the structure metrics built on it.
//! - [`bn`]: Bayesian networks, d-separation and the classification of side
//!   information as structure-preserving or direct-inference.
//! - [`moments`]: closed-form conditional moments and their Monte Carlo
//!   verification.
//! - [`clustering`]: zero-mean Toeplitz-constrained Gaussian mixtures, a
//!   k-means baseline and mutual-information scoring.
//! - [`estimation`]: closed-form LMMSE estimators for the zero / sensing /
//!   pilot / joint information structures and the SNR-sweep experiment.
//! - [`dataset`]: the binary dataset format shared with external tooling.

pub mod bn;
pub mod channel;
pub mod clustering;
pub mod dataset;
pub mod error;
pub mod estimation;
pub mod moments;
pub mod rng;
pub mod toeplitz;

pub use error::{Error, Result};

pub use channel::{
    steering_vector, synthesize_channel, ChannelConfig, ChannelVec, Domain, Marginal, PathParams,
    PathPrior, VelocityScenario,
};
pub use toeplitz::{multilevel_toeplitz_project, structure_nmse, zero_mean_mse, DomainDims};
