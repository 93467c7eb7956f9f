//! Domain types and the log-likelihood / log-prior kernels shared by both
//! estimation steps. Everything here is a pure function of its inputs.

mod data;
mod latent;
mod likelihood;
mod params;
mod prior;

pub use data::{ItemResponseData, NetworkData};
pub use latent::{distance, LatentConfig, Point};
pub use likelihood::{
    adapted_lsirm_log_likelihood, bernoulli_logit, logistic, lsm_log_likelihood, lsm_log_likelihood_with,
    response_probability, softplus, PairConvention,
};
pub use params::{AdaptedLsirmParams, Hyperparams, LsmParams};
pub use prior::{log_priors_adapted, log_priors_lsm};

pub(crate) use likelihood::check_adapted_dims;
pub(crate) use prior::{inverse_gamma_log_density, normal_log_density, std_bivariate_log_density};
