//! Markov chain Monte Carlo for both estimation steps.

mod config;
mod lsirm;
mod lsm;

pub use config::{
    tune_step_sizes, AcceptanceStats, LsirmConfig, LsirmSteps, LsmConfig, LsmSteps, McmcConfig, SamplerHooks,
    StepSizes, StepTuner,
};
pub use lsirm::{
    fit_statistic, gibbs_sigma2, run_adapted_lsirm_chain, LsirmAcceptance, LsirmDraws, ProbabilityMatrix,
};
pub use lsm::{point_estimate_z, run_lsm_chain, run_lsm_chain_from, LsmAcceptance, LsmDraws};

pub(crate) use lsm::mean_config;
