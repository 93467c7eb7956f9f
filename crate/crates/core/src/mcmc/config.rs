use crate::error::{Error, Result};

/// Run-length, thinning, seeding and proposal settings for one chain.
#[derive(Debug, Clone, PartialEq)]
pub struct McmcConfig<S> {
    pub total_iters: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub seed: u64,
    pub step_sizes: S,
    /// Tune proposal scales during burn-in. Frozen afterwards.
    pub adapt: bool,
    #[doc(hidden)]
    pub hooks: SamplerHooks,
}

/// Test hooks that change the target distribution. Not for production runs.
#[doc(hidden)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SamplerHooks {
    /// Replace the likelihood with a constant so the chain targets the prior.
    pub prior_only: bool,
    /// Hold the influence weight at this value instead of sampling it.
    pub fix_delta: Option<f64>,
}

impl<S: StepSizes> McmcConfig<S> {
    pub fn new(total_iters: usize, burn_in: usize, thin: usize, seed: u64) -> Self {
        Self {
            total_iters,
            burn_in,
            thin,
            seed,
            step_sizes: S::default(),
            adapt: true,
            hooks: SamplerHooks::default(),
        }
    }

    /// 60,000 iterations, 10,000 burn-in, thin 5.
    pub fn real_data_default(seed: u64) -> Self {
        Self::new(60_000, 10_000, 5, seed)
    }

    /// 30,000 iterations, 5,000 burn-in, thin 5.
    pub fn simulation_default(seed: u64) -> Self {
        Self::new(30_000, 5_000, 5, seed)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.burn_in >= self.total_iters {
            return Err(Error::InvalidConfig(format!(
                "burn-in ({}) must be smaller than total iterations ({})",
                self.burn_in, self.total_iters
            )));
        }
        if self.thin == 0 {
            return Err(Error::InvalidConfig("thin must be at least 1".into()));
        }
        if self.step_sizes.as_slice().iter().any(|&s| !(s > 0.0) || !s.is_finite()) {
            return Err(Error::InvalidConfig("step sizes must be positive and finite".into()));
        }
        Ok(())
    }

    /// Number of draws the chain will retain.
    pub fn retained(&self) -> usize {
        (self.total_iters - self.burn_in) / self.thin
    }

    #[inline]
    pub(crate) fn keeps(&self, iter: usize) -> bool {
        iter >= self.burn_in && (iter - self.burn_in + 1) % self.thin == 0
    }
}

/// Per-block proposal scales.
pub trait StepSizes: Clone + Default {
    fn as_slice(&self) -> Vec<f64>;
    fn set_from(&mut self, values: &[f64]);
}

/// Proposal SDs for the network model blocks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LsmSteps {
    pub z: f64,
    pub alpha: f64,
    pub log_gamma: f64,
}

impl Default for LsmSteps {
    fn default() -> Self {
        Self { z: 0.3, alpha: 0.1, log_gamma: 0.05 }
    }
}

impl StepSizes for LsmSteps {
    fn as_slice(&self) -> Vec<f64> {
        vec![self.z, self.alpha, self.log_gamma]
    }

    fn set_from(&mut self, v: &[f64]) {
        self.z = v[0];
        self.alpha = v[1];
        self.log_gamma = v[2];
    }
}

/// Proposal SDs for the item response blocks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LsirmSteps {
    pub w: f64,
    pub beta: f64,
    pub theta: f64,
    pub delta: f64,
}

impl Default for LsirmSteps {
    fn default() -> Self {
        Self { w: 0.3, beta: 0.3, theta: 0.5, delta: 0.05 }
    }
}

impl StepSizes for LsirmSteps {
    fn as_slice(&self) -> Vec<f64> {
        vec![self.w, self.beta, self.theta, self.delta]
    }

    fn set_from(&mut self, v: &[f64]) {
        self.w = v[0];
        self.beta = v[1];
        self.theta = v[2];
        self.delta = v[3];
    }
}

pub type LsmConfig = McmcConfig<LsmSteps>;
pub type LsirmConfig = McmcConfig<LsirmSteps>;

/// Accepted / proposed counts for one block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct AcceptanceStats {
    pub accepted: u64,
    pub proposed: u64,
}

impl AcceptanceStats {
    #[inline]
    pub fn record(&mut self, accepted: bool) {
        self.proposed += 1;
        self.accepted += accepted as u64;
    }

    pub fn rate(&self) -> f64 {
        if self.proposed == 0 {
            0.0
        } else {
            self.accepted as f64 / self.proposed as f64
        }
    }
}

/// Batch-wise step tuning during burn-in.
///
/// After every batch the scale of each block is multiplied by `exp(kappa)`
/// when its batch acceptance is above the band and by `exp(-kappa)` when it
/// is below. `kappa = min(kappa_max, 1/sqrt(batch index))` shrinks over time.
#[derive(Debug, Clone)]
pub struct StepTuner {
    pub batch_len: usize,
    pub low: f64,
    pub high: f64,
    pub kappa_max: f64,
    batches_done: usize,
    counts: Vec<AcceptanceStats>,
}

impl StepTuner {
    pub fn new(blocks: usize) -> Self {
        Self {
            batch_len: 50,
            low: 0.2,
            high: 0.5,
            kappa_max: 0.5,
            batches_done: 0,
            counts: vec![AcceptanceStats::default(); blocks],
        }
    }

    #[inline]
    pub fn record(&mut self, block: usize, accepted: bool) {
        self.counts[block].record(accepted);
    }

    pub fn next_kappa(&self) -> f64 {
        let j = (self.batches_done + 1) as f64;
        self.kappa_max.min(1.0 / j.sqrt())
    }

    /// Call once per iteration; retunes `steps` at batch boundaries.
    pub fn end_iteration(&mut self, iter: usize, steps: &mut [f64]) {
        if (iter + 1) % self.batch_len != 0 {
            return;
        }
        let rates: Vec<f64> = self.counts.iter().map(|c| c.rate()).collect();
        let kappa = self.next_kappa();
        tune_step_sizes(steps, &rates, kappa, self.low, self.high);
        self.batches_done += 1;
        self.counts.iter_mut().for_each(|c| *c = AcceptanceStats::default());
    }
}

/// Moves each step toward the acceptance band `[low, high]`.
pub fn tune_step_sizes(steps: &mut [f64], rates: &[f64], kappa: f64, low: f64, high: f64) {
    for (s, &r) in steps.iter_mut().zip(rates) {
        if r > high {
            *s *= kappa.exp();
        } else if r < low {
            *s *= (-kappa).exp();
        }
    }
}
