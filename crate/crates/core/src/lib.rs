//! Bayesian two-step estimation of network influence on item responses.
//!
//! Step 1 fits a latent space model to a binary undirected network and
//! summarizes the respondent positions. Step 2 fits a latent space item
//! response model whose respondent positions are fixed at the Step 1
//! estimate, with a free weight `delta` measuring how much the network
//! geometry explains the responses.
//!
//! The numerical core is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix it to `f64`.

pub mod alignment;
pub mod baseline;
pub mod diagnostics;
pub mod error;
pub mod estimate;
pub mod mcmc;
pub mod model;
pub mod scalar;
pub mod simgen;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub use model::{ItemResponseData, NetworkData};

pub type LatentConfig = model::LatentConfig<f64>;
pub type LsmParams = model::LsmParams<f64>;
pub type AdaptedLsirmParams = model::AdaptedLsirmParams<f64>;
pub type Hyperparams = model::Hyperparams<f64>;
pub type LsmDraws = mcmc::LsmDraws<f64>;
pub type LsirmDraws = mcmc::LsirmDraws<f64>;
pub type ProcrustesTransform = alignment::ProcrustesTransform<f64>;

pub type LatentConfig32 = model::LatentConfig<f32>;
pub type LsmParams32 = model::LsmParams<f32>;
pub type AdaptedLsirmParams32 = model::AdaptedLsirmParams<f32>;
pub type Hyperparams32 = model::Hyperparams<f32>;
