//! Estimation of network structure in the presence of edge covariates.
//!
//! The model writes each edge probability as a linear covariate term plus an
//! indefinite inner product of latent node positions. This crate provides
//! the iterative profile least squares estimator for that model, spectral
//! embedding with automatic dimension selection, Gaussian mixture clustering
//! of the latent positions, a generalized (weighted) bootstrap for inference
//! on all parameters, simulation generators and clustering metrics.

pub mod bootstrap;
pub mod clustering;
pub mod error;
pub mod estimator;
pub mod io;
pub mod metrics;
pub mod model;
pub mod simulate;
pub mod spectral;

pub use error::{Error, Result};
pub use model::{Adjacency, EdgeCovariates, ModelParams, ResidualBlocks, Signature};
