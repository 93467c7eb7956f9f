//! Two-step estimation: network model chains, alignment to a common frame,
//! the respondent point estimate, item response chains with respondents
//! fixed, diagnostics, the fit statistic and the autocorrelation baseline.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::baseline::{fit_lnam_counts, AutocorrFit};
use crate::diagnostics::{summarize, ParameterSummary, RhatMode};
use crate::error::{Error, Result};
use crate::mcmc::{
    fit_statistic, mean_config, run_adapted_lsirm_chain, run_lsm_chain, LsirmConfig, LsirmDraws, LsmConfig, LsmDraws,
    ProbabilityMatrix,
};
use crate::model::{AdaptedLsirmParams, Hyperparams, ItemResponseData, LatentConfig, NetworkData};

/// Settings for a full two-step fit. Chain `c` of each step runs with a
/// seed derived from the step's base seed and `c`.
#[derive(Debug, Clone)]
pub struct TwoStepConfig {
    pub chains: usize,
    pub step1: LsmConfig,
    pub step2: LsirmConfig,
    pub hyper: Hyperparams<f64>,
    pub hpd_mass: f64,
    pub rhat_mode: RhatMode,
    /// Fit the autocorrelation baseline on the response counts.
    pub baseline: bool,
    pub row_normalize: bool,
}

impl TwoStepConfig {
    pub fn new(step1: LsmConfig, step2: LsirmConfig, chains: usize) -> Self {
        Self {
            chains,
            step1,
            step2,
            hyper: Hyperparams::default(),
            hpd_mass: 0.95,
            rhat_mode: RhatMode::Unsplit,
            baseline: true,
            row_normalize: false,
        }
    }

    /// 60,000 / 10,000 / thin 5 for both steps.
    pub fn real_data_default(seed: u64, chains: usize) -> Self {
        Self::new(LsmConfig::real_data_default(seed), LsirmConfig::real_data_default(seed), chains)
    }

    /// 30,000 / 5,000 / thin 5 for both steps.
    pub fn simulation_default(seed: u64, chains: usize) -> Self {
        Self::new(LsmConfig::simulation_default(seed), LsirmConfig::simulation_default(seed), chains)
    }

    /// Same run lengths for both steps.
    pub fn with_lengths(mut self, total: usize, burn: usize, thin: usize) -> Self {
        for (t, b, th) in [
            (&mut self.step1.total_iters, &mut self.step1.burn_in, &mut self.step1.thin),
            (&mut self.step2.total_iters, &mut self.step2.burn_in, &mut self.step2.thin),
        ] {
            *t = total;
            *b = burn;
            *th = thin;
        }
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.chains == 0 {
            return Err(Error::InvalidConfig("at least one chain is required".into()));
        }
        if !(self.hpd_mass > 0.0 && self.hpd_mass < 1.0) {
            return Err(Error::InvalidConfig(format!("HPD mass {} outside (0, 1)", self.hpd_mass)));
        }
        self.step1.validate()?;
        self.step2.validate()?;
        self.hyper.validate()
    }
}

/// splitmix64 finalizer over (seed, step, chain).
pub fn chain_seed(seed: u64, step: u64, chain: usize) -> u64 {
    let mut z = seed
        .wrapping_add(step.wrapping_mul(0xD1B5_4A32_D192_ED03))
        .wrapping_add((chain as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone)]
pub struct Step1Fit {
    /// One entry per chain, aligned to the common reference.
    pub chains: Vec<LsmDraws<f64>>,
    pub zhat: LatentConfig<f64>,
    pub alpha: ParameterSummary<f64>,
    pub gamma: ParameterSummary<f64>,
}

#[derive(Debug, Clone)]
pub struct Step2Fit {
    /// One entry per chain, aligned jointly with `zhat`.
    pub chains: Vec<LsirmDraws<f64>>,
    /// Pooled posterior means.
    pub point: AdaptedLsirmParams<f64>,
    pub delta: ParameterSummary<f64>,
    pub sigma2: ParameterSummary<f64>,
    pub beta: Vec<ParameterSummary<f64>>,
    pub theta: Vec<ParameterSummary<f64>>,
    pub probabilities: ProbabilityMatrix<f64>,
}

#[derive(Debug, Clone)]
pub struct TwoStepFit {
    pub step1: Step1Fit,
    pub step2: Step2Fit,
    pub baseline: Option<std::result::Result<AutocorrFit, Error>>,
}

impl TwoStepFit {
    /// Scalar summaries keyed by parameter name.
    pub fn scalar_summaries(&self) -> BTreeMap<&'static str, &ParameterSummary<f64>> {
        BTreeMap::from([
            ("alpha", &self.step1.alpha),
            ("gamma", &self.step1.gamma),
            ("delta", &self.step2.delta),
            ("sigma2", &self.step2.sigma2),
        ])
    }
}

fn pick_map<'a, D>(chains: &'a [D], lp: impl Fn(&D) -> &[f64]) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize, f64)> = None;
    for (c, d) in chains.iter().enumerate() {
        for (i, &v) in lp(d).iter().enumerate() {
            if best.map_or(true, |(_, _, b)| v > b) {
                best = Some((c, i, v));
            }
        }
    }
    best.map(|(c, i, _)| (c, i))
}

fn per_chain<F: Fn(&LsirmDraws<f64>) -> Vec<f64>>(chains: &[LsirmDraws<f64>], f: F) -> Vec<Vec<f64>> {
    chains.iter().map(f).collect()
}

/// Step 1 on its own: runs the chains, aligns them to the highest
/// log-posterior draw over all chains and averages into `zhat`.
pub fn fit_step1(net: &NetworkData, cfg: &TwoStepConfig) -> Result<Step1Fit> {
    cfg.validate()?;
    let mut chains = (0..cfg.chains)
        .into_par_iter()
        .map(|c| run_lsm_chain(net, &cfg.hyper, &cfg.step1.clone().with_seed(chain_seed(cfg.step1.seed, 1, c))))
        .collect::<Result<Vec<_>>>()?;
    let (c, i) = pick_map(&chains, |d| &d.log_posterior).ok_or(Error::EmptyDraws)?;
    let reference = chains[c].z[i].clone();
    for d in chains.iter_mut() {
        d.align(Some(&reference))?;
    }
    let pooled: Vec<LatentConfig<f64>> = chains.iter().flat_map(|d| d.z.iter().cloned()).collect();
    let zhat = mean_config(&pooled)?;
    let alpha: Vec<&[f64]> = chains.iter().map(|d| d.alpha.as_slice()).collect();
    let gamma: Vec<&[f64]> = chains.iter().map(|d| d.gamma.as_slice()).collect();
    Ok(Step1Fit {
        alpha: summarize(&alpha, cfg.hpd_mass, cfg.rhat_mode)?,
        gamma: summarize(&gamma, cfg.hpd_mass, cfg.rhat_mode)?,
        chains,
        zhat,
    })
}

/// Step 2 with respondents fixed at `zhat`.
pub fn fit_step2(resp: &ItemResponseData, zhat: &LatentConfig<f64>, cfg: &TwoStepConfig) -> Result<Step2Fit> {
    cfg.validate()?;
    let mut chains = (0..cfg.chains)
        .into_par_iter()
        .map(|c| {
            run_adapted_lsirm_chain(resp, zhat, &cfg.hyper, &cfg.step2.clone().with_seed(chain_seed(cfg.step2.seed, 2, c)))
        })
        .collect::<Result<Vec<_>>>()?;
    let (c, i) = pick_map(&chains, |d| &d.log_posterior).ok_or(Error::EmptyDraws)?;
    // sampled item positions already share the frame of zhat
    let reference = chains[c].w[i].clone();
    for d in chains.iter_mut() {
        d.align(zhat, Some(&reference))?;
    }

    let mass = cfg.hpd_mass;
    let mode = cfg.rhat_mode;
    let delta = summarize(&per_chain(&chains, |d| d.delta.clone()), mass, mode)?;
    let sigma2 = summarize(&per_chain(&chains, |d| d.sigma2.clone()), mass, mode)?;
    let beta = (0..resp.p())
        .map(|i| summarize(&per_chain(&chains, |d| d.beta.iter().map(|b| b[i]).collect()), mass, mode))
        .collect::<Result<Vec<_>>>()?;
    let theta = (0..resp.n())
        .map(|k| summarize(&per_chain(&chains, |d| d.theta.iter().map(|t| t[k]).collect()), mass, mode))
        .collect::<Result<Vec<_>>>()?;
    let pooled_w: Vec<LatentConfig<f64>> = chains.iter().flat_map(|d| d.w.iter().cloned()).collect();
    let point = AdaptedLsirmParams::new(
        beta.iter().map(|s| s.mean).collect(),
        theta.iter().map(|s| s.mean).collect(),
        sigma2.mean,
        delta.mean,
        mean_config(&pooled_w)?,
    )?;
    let probabilities = fit_statistic(resp, zhat, &point)?;
    Ok(Step2Fit { chains, point, delta, sigma2, beta, theta, probabilities })
}

/// The full pipeline on one paired dataset.
pub fn fit_two_step(net: &NetworkData, resp: &ItemResponseData, cfg: &TwoStepConfig) -> Result<TwoStepFit> {
    cfg.validate()?;
    resp.check_paired(net)?;
    let step1 = fit_step1(net, cfg)?;
    let step2 = fit_step2(resp, &step1.zhat, cfg)?;
    let baseline = cfg.baseline.then(|| fit_lnam_counts(net, resp, cfg.row_normalize));
    Ok(TwoStepFit { step1, step2, baseline })
}
