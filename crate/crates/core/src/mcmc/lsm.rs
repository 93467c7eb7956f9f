//! Step 1: random-walk Metropolis–Hastings for the latent space network
//! model.
//!
//! One iteration updates every respondent position in index order (one
//! accept/reject per respondent), then the intercept, then `log gamma`.
//! Pairwise distances and per-pair log-likelihood terms are cached so a
//! position update costs `O(n)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::alignment::{align_draw_sequence, ReferenceRule};
use crate::error::{Error, Result};
use crate::mcmc::config::{AcceptanceStats, LsmConfig, StepSizes, StepTuner};
use crate::model::{
    bernoulli_logit, distance, normal_log_density, std_bivariate_log_density, Hyperparams, LatentConfig, LsmParams,
    NetworkData, Point,
};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LsmAcceptance {
    pub z: AcceptanceStats,
    pub alpha: AcceptanceStats,
    pub gamma: AcceptanceStats,
}

/// Retained draws of one network-model chain.
#[derive(Debug, Clone)]
pub struct LsmDraws<T> {
    pub alpha: Vec<T>,
    pub gamma: Vec<T>,
    pub z: Vec<LatentConfig<T>>,
    pub log_posterior: Vec<T>,
    /// Counts over the post burn-in iterations.
    pub acceptance: LsmAcceptance,
    /// Proposal scales in force after burn-in.
    pub final_steps: crate::mcmc::LsmSteps,
    aligned: bool,
}

impl<T: Scalar> LsmDraws<T> {
    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }

    pub fn is_aligned(&self) -> bool {
        self.aligned
    }

    /// Procrustes-matches every retained configuration to one reference
    /// (by default the highest log-posterior draw of this chain).
    pub fn align(&mut self, reference: Option<&LatentConfig<T>>) -> Result<()> {
        let aligned = match reference {
            Some(r) => align_draw_sequence(&self.z, &ReferenceRule::Fixed(r))?,
            None => align_draw_sequence(&self.z, &ReferenceRule::MaxLogPosterior(&self.log_posterior))?,
        };
        self.z = aligned;
        self.aligned = true;
        Ok(())
    }

    /// The retained draw with the highest log-posterior.
    pub fn map_draw(&self) -> Option<(usize, T)> {
        let mut best: Option<(usize, T)> = None;
        for (i, &v) in self.log_posterior.iter().enumerate() {
            if best.map_or(true, |(_, b)| v > b) {
                best = Some((i, v));
            }
        }
        best
    }
}

/// Element-wise posterior mean of the respondent positions.
///
/// With `aligned = true` the draws must already have been Procrustes
/// matched; averaging unaligned draws is only meaningful for diagnostics.
pub fn point_estimate_z<T: Scalar>(draws: &LsmDraws<T>, aligned: bool) -> Result<LatentConfig<T>> {
    if draws.z.is_empty() {
        return Err(Error::EmptyDraws);
    }
    if aligned && !draws.aligned {
        return Err(Error::Unaligned);
    }
    mean_config(&draws.z)
}

pub(crate) fn mean_config<T: Scalar>(configs: &[LatentConfig<T>]) -> Result<LatentConfig<T>> {
    let first = configs.first().ok_or(Error::EmptyDraws)?;
    let m = first.len();
    let mut acc = vec![[T::zero(); 2]; m];
    for c in configs {
        c.check_len(m, "latent draw")?;
        for (a, p) in acc.iter_mut().zip(c.points()) {
            a[0] += p[0];
            a[1] += p[1];
        }
    }
    let count = T::from_count(configs.len());
    LatentConfig::new(acc.into_iter().map(|a| [a[0] / count, a[1] / count]).collect())
}

struct LsmState<'a, T> {
    net: &'a NetworkData,
    n: usize,
    z: Vec<Point<T>>,
    alpha: T,
    log_gamma: T,
    dist: Vec<T>,
    pair_ll: Vec<T>,
    loglik: T,
    prior_only: bool,
}

impl<'a, T: Scalar> LsmState<'a, T> {
    fn new(net: &'a NetworkData, z: Vec<Point<T>>, alpha: T, log_gamma: T, prior_only: bool) -> Self {
        let n = net.n();
        let mut s = Self {
            net,
            n,
            z,
            alpha,
            log_gamma,
            dist: vec![T::zero(); n * n],
            pair_ll: vec![T::zero(); n * n],
            loglik: T::zero(),
            prior_only,
        };
        for k in 0..n {
            for l in (k + 1)..n {
                let d = distance(s.z[k], s.z[l]);
                s.dist[k * n + l] = d;
                s.dist[l * n + k] = d;
            }
        }
        s.refresh_pair_ll();
        s
    }

    fn refresh_pair_ll(&mut self) {
        let n = self.n;
        let gamma = self.log_gamma.exp();
        let mut total = T::zero();
        for k in 0..n {
            let row = self.net.row(k);
            for l in (k + 1)..n {
                let v = if self.prior_only {
                    T::zero()
                } else {
                    bernoulli_logit(row[l] == 1, self.alpha - gamma * self.dist[k * n + l])
                };
                self.pair_ll[k * n + l] = v;
                self.pair_ll[l * n + k] = v;
                total += v;
            }
        }
        self.loglik = total;
    }

    /// Log-likelihood with `alpha` and `gamma` replaced, distances fixed.
    /// Per-pair terms land in the upper triangle of `buf`.
    fn loglik_with(&self, alpha: T, gamma: T, buf: &mut [T]) -> T {
        if self.prior_only {
            return T::zero();
        }
        let n = self.n;
        let mut total = T::zero();
        for k in 0..n {
            let row = self.net.row(k);
            let drow = &self.dist[k * n..(k + 1) * n];
            let brow = &mut buf[k * n..(k + 1) * n];
            for l in (k + 1)..n {
                let v = bernoulli_logit(row[l] == 1, alpha - gamma * drow[l]);
                brow[l] = v;
                total += v;
            }
        }
        total
    }

    fn commit_pair_ll(&mut self, buf: &[T], loglik: T) {
        if self.prior_only {
            return;
        }
        let n = self.n;
        for k in 0..n {
            for l in (k + 1)..n {
                let v = buf[k * n + l];
                self.pair_ll[k * n + l] = v;
                self.pair_ll[l * n + k] = v;
            }
        }
        self.loglik = loglik;
    }

    fn log_prior(&self, hp: &Hyperparams<T>) -> T {
        normal_log_density(self.alpha, hp.sigma_alpha)
            + self.z.iter().map(|&p| std_bivariate_log_density(p)).sum::<T>()
            + normal_log_density(self.log_gamma, hp.sigma_gamma)
    }

    fn update_position<R: rand::Rng>(&mut self, k: usize, step: T, rng: &mut R, scratch: &mut [T]) -> bool {
        let n = self.n;
        let cur = self.z[k];
        let prop = [
            cur[0] + step * T::sample_standard_normal(rng),
            cur[1] + step * T::sample_standard_normal(rng),
        ];
        let gamma = self.log_gamma.exp();
        let row = self.net.row(k);
        let mut delta_ll = T::zero();
        for l in 0..n {
            if l == k {
                continue;
            }
            let d = distance(prop, self.z[l]);
            scratch[l] = d;
            if !self.prior_only {
                let v = bernoulli_logit(row[l] == 1, self.alpha - gamma * d);
                delta_ll += v - self.pair_ll[k * n + l];
                scratch[n + l] = v;
            }
        }
        let log_ratio = delta_ll + std_bivariate_log_density(prop) - std_bivariate_log_density(cur);
        let accept = T::sample_unit(rng).ln() < log_ratio;
        if accept {
            self.z[k] = prop;
            for l in 0..n {
                if l == k {
                    continue;
                }
                self.dist[k * n + l] = scratch[l];
                self.dist[l * n + k] = scratch[l];
                if !self.prior_only {
                    self.pair_ll[k * n + l] = scratch[n + l];
                    self.pair_ll[l * n + k] = scratch[n + l];
                }
            }
            self.loglik += delta_ll;
        }
        accept
    }

    fn update_alpha<R: rand::Rng>(&mut self, step: T, hp: &Hyperparams<T>, rng: &mut R, buf: &mut [T]) -> bool {
        let prop = self.alpha + step * T::sample_standard_normal(rng);
        let ll = self.loglik_with(prop, self.log_gamma.exp(), buf);
        let log_ratio = ll - self.loglik + normal_log_density(prop, hp.sigma_alpha)
            - normal_log_density(self.alpha, hp.sigma_alpha);
        let accept = T::sample_unit(rng).ln() < log_ratio;
        if accept {
            self.alpha = prop;
            self.commit_pair_ll(buf, ll);
        }
        accept
    }

    fn update_log_gamma<R: rand::Rng>(&mut self, step: T, hp: &Hyperparams<T>, rng: &mut R, buf: &mut [T]) -> bool {
        let prop = self.log_gamma + step * T::sample_standard_normal(rng);
        let ll = self.loglik_with(self.alpha, prop.exp(), buf);
        let log_ratio = ll - self.loglik + normal_log_density(prop, hp.sigma_gamma)
            - normal_log_density(self.log_gamma, hp.sigma_gamma);
        let accept = T::sample_unit(rng).ln() < log_ratio;
        if accept {
            self.log_gamma = prop;
            self.commit_pair_ll(buf, ll);
        }
        accept
    }
}

/// Runs one chain of the network model. Deterministic for a given seed.
///
/// Initial state: `alpha = 0`, `log gamma = 0`, positions drawn from the
/// standard bivariate normal with the chain's generator.
pub fn run_lsm_chain<T: Scalar>(net: &NetworkData, hp: &Hyperparams<T>, cfg: &LsmConfig) -> Result<LsmDraws<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let z0 = LatentConfig::<T>::standard_normal(net.n(), &mut rng);
    run_chain(net, hp, cfg, LsmParams { alpha: T::zero(), gamma: T::one(), z: z0 }, rng)
}

/// Like [`run_lsm_chain`] but starting from a caller-supplied state.
pub fn run_lsm_chain_from<T: Scalar>(
    net: &NetworkData,
    hp: &Hyperparams<T>,
    cfg: &LsmConfig,
    init: LsmParams<T>,
) -> Result<LsmDraws<T>> {
    run_chain(net, hp, cfg, init, ChaCha8Rng::seed_from_u64(cfg.seed))
}

fn run_chain<T: Scalar>(
    net: &NetworkData,
    hp: &Hyperparams<T>,
    cfg: &LsmConfig,
    init: LsmParams<T>,
    mut rng: ChaCha8Rng,
) -> Result<LsmDraws<T>> {
    cfg.validate()?;
    hp.validate()?;
    let n = net.n();
    init.z.check_len(n, "initial positions")?;
    if !(init.gamma > T::zero()) {
        return Err(Error::InvalidParameter("initial gamma must be positive".into()));
    }

    let mut state = LsmState::new(net, init.z.into_points(), init.alpha, init.gamma.ln(), cfg.hooks.prior_only);
    let lp0 = state.loglik + state.log_prior(hp);
    if !lp0.is_finite() {
        return Err(Error::NonFiniteInit(format!(
            "network model log-posterior is {lp0} (log-likelihood {})",
            state.loglik
        )));
    }

    let mut steps = cfg.step_sizes.as_slice();
    let mut tuner = StepTuner::new(3);
    let mut acceptance = LsmAcceptance::default();
    let kept = cfg.retained();
    let mut draws = LsmDraws {
        alpha: Vec::with_capacity(kept),
        gamma: Vec::with_capacity(kept),
        z: Vec::with_capacity(kept),
        log_posterior: Vec::with_capacity(kept),
        acceptance,
        final_steps: cfg.step_sizes,
        aligned: false,
    };
    let mut scratch = vec![T::zero(); 2 * n];
    let mut pair_buf = vec![T::zero(); n * n];

    for iter in 0..cfg.total_iters {
        let burning = iter < cfg.burn_in;
        let step_z = T::lit(steps[0]);
        for k in 0..n {
            let ok = state.update_position(k, step_z, &mut rng, &mut scratch);
            if burning {
                tuner.record(0, ok);
            } else {
                acceptance.z.record(ok);
            }
        }
        let ok = state.update_alpha(T::lit(steps[1]), hp, &mut rng, &mut pair_buf);
        if burning {
            tuner.record(1, ok);
        } else {
            acceptance.alpha.record(ok);
        }
        let ok = state.update_log_gamma(T::lit(steps[2]), hp, &mut rng, &mut pair_buf);
        if burning {
            tuner.record(2, ok);
        } else {
            acceptance.gamma.record(ok);
        }

        if burning && cfg.adapt {
            tuner.end_iteration(iter, &mut steps);
        }

        if cfg.keeps(iter) {
            draws.alpha.push(state.alpha);
            draws.gamma.push(state.log_gamma.exp());
            draws.z.push(LatentConfig::new(state.z.clone())?);
            draws.log_posterior.push(state.loglik + state.log_prior(hp));
        }
    }

    draws.acceptance = acceptance;
    draws.final_steps.set_from(&steps);
    Ok(draws)
}
