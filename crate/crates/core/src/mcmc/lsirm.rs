//! Step 2: Metropolis-within-Gibbs for the item response model with the
//! respondent positions held at the network estimate.
//!
//! Iteration order: item positions, item easiness, person traits (all
//! single-site random walks in index order), exact inverse-gamma draw for the
//! trait variance, then a random walk on the influence weight.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::alignment::{align_joint_sequence, ProcrustesTransform, ReferenceRule};
use crate::error::{Error, Result};
use crate::mcmc::config::{AcceptanceStats, LsirmConfig, LsirmSteps, StepSizes, StepTuner};
use crate::mcmc::lsm::mean_config;
use crate::model::{
    bernoulli_logit, check_adapted_dims, distance, logistic, normal_log_density, std_bivariate_log_density,
    AdaptedLsirmParams, Hyperparams, ItemResponseData, LatentConfig, Point,
};
use crate::model::inverse_gamma_log_density;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LsirmAcceptance {
    pub w: AcceptanceStats,
    pub beta: AcceptanceStats,
    pub theta: AcceptanceStats,
    pub delta: AcceptanceStats,
}

/// Retained draws of one item-response chain.
#[derive(Debug, Clone)]
pub struct LsirmDraws<T> {
    pub beta: Vec<Vec<T>>,
    pub theta: Vec<Vec<T>>,
    pub sigma2: Vec<T>,
    pub delta: Vec<T>,
    pub w: Vec<LatentConfig<T>>,
    pub log_posterior: Vec<T>,
    pub acceptance: LsirmAcceptance,
    pub final_steps: LsirmSteps,
    motions: Option<Vec<ProcrustesTransform<T>>>,
}

impl<T: Scalar> LsirmDraws<T> {
    pub fn len(&self) -> usize {
        self.delta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.delta.is_empty()
    }

    pub fn is_aligned(&self) -> bool {
        self.motions.is_some()
    }

    /// Per-draw rigid motions applied by [`LsirmDraws::align`].
    pub fn motions(&self) -> Option<&[ProcrustesTransform<T>]> {
        self.motions.as_deref()
    }

    /// Matches the joint (fixed respondents + items) configuration of each
    /// draw to a reference. `reference` is an item configuration in the
    /// frame of `zhat`; by default the highest log-posterior draw is used.
    pub fn align(&mut self, zhat: &LatentConfig<T>, reference: Option<&LatentConfig<T>>) -> Result<()> {
        let (aligned, motions) = match reference {
            Some(r) => align_joint_sequence(zhat, &self.w, &ReferenceRule::Fixed(r))?,
            None => align_joint_sequence(zhat, &self.w, &ReferenceRule::MaxLogPosterior(&self.log_posterior))?,
        };
        self.w = aligned;
        self.motions = Some(motions);
        Ok(())
    }

    /// Posterior means of every parameter. Item positions are averaged in
    /// the aligned frame, so the draws must be aligned first.
    pub fn posterior_mean(&self) -> Result<AdaptedLsirmParams<T>> {
        if self.is_empty() {
            return Err(Error::EmptyDraws);
        }
        if !self.is_aligned() {
            return Err(Error::Unaligned);
        }
        let count = T::from_count(self.len());
        let avg_vec = |rows: &Vec<Vec<T>>| -> Vec<T> {
            let mut acc = vec![T::zero(); rows[0].len()];
            for r in rows {
                for (a, v) in acc.iter_mut().zip(r) {
                    *a += *v;
                }
            }
            acc.into_iter().map(|a| a / count).collect()
        };
        let mean = |v: &[T]| v.iter().copied().sum::<T>() / count;
        AdaptedLsirmParams::new(
            avg_vec(&self.beta),
            avg_vec(&self.theta),
            mean(&self.sigma2),
            mean(&self.delta),
            mean_config(&self.w)?,
        )
    }
}

/// Exact conditional draw of the trait variance:
/// `Inv-Gamma(a + n/2, b + sum(theta^2)/2)`.
pub fn gibbs_sigma2<T: Scalar, R: Rng + ?Sized>(theta: &[T], hp: &Hyperparams<T>, rng: &mut R) -> T {
    let half = T::lit(0.5);
    let shape = hp.a_sigma + half * T::from_count(theta.len());
    let rate = hp.b_sigma + half * theta.iter().map(|&t| t * t).sum::<T>();
    rate / T::sample_gamma(shape, rng)
}

/// Fitted positive-response probabilities, row-major `n x p`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityMatrix<T> {
    pub n: usize,
    pub p: usize,
    pub values: Vec<T>,
}

impl<T: Scalar> ProbabilityMatrix<T> {
    #[inline]
    pub fn get(&self, k: usize, i: usize) -> T {
        self.values[k * self.p + i]
    }
}

/// `sigma(beta_i + theta_k - delta * |zhat_k - w_i|)` for every cell, from
/// point estimates of the parameters.
pub fn fit_statistic<T: Scalar>(
    resp: &ItemResponseData,
    zhat: &LatentConfig<T>,
    point: &AdaptedLsirmParams<T>,
) -> Result<ProbabilityMatrix<T>> {
    check_adapted_dims(resp, zhat, point)?;
    let (n, p) = (resp.n(), resp.p());
    let mut values = Vec::with_capacity(n * p);
    for k in 0..n {
        for i in 0..p {
            values.push(logistic(point.beta[i] + point.theta[k] - point.delta * zhat.dist(k, &point.w, i)));
        }
    }
    Ok(ProbabilityMatrix { n, p, values })
}

struct LsirmState<'a, T> {
    resp: &'a ItemResponseData,
    zhat: &'a [Point<T>],
    n: usize,
    p: usize,
    beta: Vec<T>,
    theta: Vec<T>,
    sigma2: T,
    delta: T,
    w: Vec<Point<T>>,
    dist: Vec<T>,
    cell_ll: Vec<T>,
    loglik: T,
    prior_only: bool,
}

impl<'a, T: Scalar> LsirmState<'a, T> {
    fn new(resp: &'a ItemResponseData, zhat: &'a [Point<T>], params: AdaptedLsirmParams<T>, prior_only: bool) -> Self {
        let (n, p) = (resp.n(), resp.p());
        let mut s = Self {
            resp,
            zhat,
            n,
            p,
            beta: params.beta,
            theta: params.theta,
            sigma2: params.sigma2,
            delta: params.delta,
            w: params.w.into_points(),
            dist: vec![T::zero(); n * p],
            cell_ll: vec![T::zero(); n * p],
            loglik: T::zero(),
            prior_only,
        };
        let mut total = T::zero();
        for k in 0..n {
            for i in 0..p {
                let d = distance(zhat[k], s.w[i]);
                s.dist[k * p + i] = d;
                let v = s.cell(k, i, s.beta[i], s.theta[k], s.delta, d);
                s.cell_ll[k * p + i] = v;
                total += v;
            }
        }
        s.loglik = total;
        s
    }

    #[inline]
    fn cell(&self, k: usize, i: usize, beta: T, theta: T, delta: T, d: T) -> T {
        if self.prior_only {
            T::zero()
        } else {
            bernoulli_logit(self.resp.get(k, i), beta + theta - delta * d)
        }
    }

    fn log_prior(&self, hp: &Hyperparams<T>) -> T {
        let sd_theta = self.sigma2.sqrt();
        self.beta.iter().map(|&b| normal_log_density(b, hp.sigma_beta)).sum::<T>()
            + self.theta.iter().map(|&t| normal_log_density(t, sd_theta)).sum::<T>()
            + inverse_gamma_log_density(self.sigma2, hp.a_sigma, hp.b_sigma)
            + self.w.iter().map(|&q| std_bivariate_log_density(q)).sum::<T>()
            + normal_log_density(self.delta, hp.sigma_delta)
    }

    fn update_item_position<R: Rng>(&mut self, i: usize, step: T, rng: &mut R, scratch: &mut [T]) -> bool {
        let (n, p) = (self.n, self.p);
        let cur = self.w[i];
        let prop = [
            cur[0] + step * T::sample_standard_normal(rng),
            cur[1] + step * T::sample_standard_normal(rng),
        ];
        let mut delta_ll = T::zero();
        for k in 0..n {
            let d = distance(self.zhat[k], prop);
            let v = self.cell(k, i, self.beta[i], self.theta[k], self.delta, d);
            scratch[k] = d;
            scratch[n + k] = v;
            delta_ll += v - self.cell_ll[k * p + i];
        }
        let log_ratio = delta_ll + std_bivariate_log_density(prop) - std_bivariate_log_density(cur);
        let accept = T::sample_unit(rng).ln() < log_ratio;
        if accept {
            self.w[i] = prop;
            for k in 0..n {
                self.dist[k * p + i] = scratch[k];
                self.cell_ll[k * p + i] = scratch[n + k];
            }
            self.loglik += delta_ll;
        }
        accept
    }

    fn update_beta<R: Rng>(&mut self, i: usize, step: T, sd: T, rng: &mut R, scratch: &mut [T]) -> bool {
        let (n, p) = (self.n, self.p);
        let cur = self.beta[i];
        let prop = cur + step * T::sample_standard_normal(rng);
        let mut delta_ll = T::zero();
        for k in 0..n {
            let v = self.cell(k, i, prop, self.theta[k], self.delta, self.dist[k * p + i]);
            scratch[k] = v;
            delta_ll += v - self.cell_ll[k * p + i];
        }
        let log_ratio = delta_ll + normal_log_density(prop, sd) - normal_log_density(cur, sd);
        let accept = T::sample_unit(rng).ln() < log_ratio;
        if accept {
            self.beta[i] = prop;
            for k in 0..n {
                self.cell_ll[k * p + i] = scratch[k];
            }
            self.loglik += delta_ll;
        }
        accept
    }

    fn update_theta<R: Rng>(&mut self, k: usize, step: T, rng: &mut R, scratch: &mut [T]) -> bool {
        let p = self.p;
        let cur = self.theta[k];
        let prop = cur + step * T::sample_standard_normal(rng);
        let mut delta_ll = T::zero();
        for i in 0..p {
            let v = self.cell(k, i, self.beta[i], prop, self.delta, self.dist[k * p + i]);
            scratch[i] = v;
            delta_ll += v - self.cell_ll[k * p + i];
        }
        let sd = self.sigma2.sqrt();
        let log_ratio = delta_ll + normal_log_density(prop, sd) - normal_log_density(cur, sd);
        let accept = T::sample_unit(rng).ln() < log_ratio;
        if accept {
            self.theta[k] = prop;
            self.cell_ll[k * p..(k + 1) * p].copy_from_slice(&scratch[..p]);
            self.loglik += delta_ll;
        }
        accept
    }

    fn update_delta<R: Rng>(&mut self, step: T, sd: T, rng: &mut R, buf: &mut [T]) -> bool {
        let (n, p) = (self.n, self.p);
        let cur = self.delta;
        let prop = cur + step * T::sample_standard_normal(rng);
        let mut ll = T::zero();
        for k in 0..n {
            for i in 0..p {
                let v = self.cell(k, i, self.beta[i], self.theta[k], prop, self.dist[k * p + i]);
                buf[k * p + i] = v;
                ll += v;
            }
        }
        let log_ratio = ll - self.loglik + normal_log_density(prop, sd) - normal_log_density(cur, sd);
        let accept = T::sample_unit(rng).ln() < log_ratio;
        if accept {
            self.delta = prop;
            self.cell_ll.copy_from_slice(buf);
            self.loglik = ll;
        }
        accept
    }
}

/// Runs one chain of the adapted item response model with respondent
/// positions fixed at `zhat`. Deterministic for a given seed.
///
/// Initial state: `beta = 0`, `theta = 0`, `sigma2 = 1`, `delta = 0`, item
/// positions from the standard bivariate normal.
pub fn run_adapted_lsirm_chain<T: Scalar>(
    resp: &ItemResponseData,
    zhat: &LatentConfig<T>,
    hp: &Hyperparams<T>,
    cfg: &LsirmConfig,
) -> Result<LsirmDraws<T>> {
    cfg.validate()?;
    hp.validate()?;
    zhat.check_len(resp.n(), "fixed respondent positions")?;
    zhat.check_finite()?;
    let (n, p) = (resp.n(), resp.p());

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let w0 = LatentConfig::<T>::standard_normal(p, &mut rng);
    let fixed_delta = cfg.hooks.fix_delta.map(T::lit);
    let init = AdaptedLsirmParams::new(
        vec![T::zero(); p],
        vec![T::zero(); n],
        T::one(),
        fixed_delta.unwrap_or_else(T::zero),
        w0,
    )?;

    let mut state = LsirmState::new(resp, zhat.points(), init, cfg.hooks.prior_only);
    let lp0 = state.loglik + state.log_prior(hp);
    if !lp0.is_finite() {
        return Err(Error::NonFiniteInit(format!(
            "item response log-posterior is {lp0} (log-likelihood {})",
            state.loglik
        )));
    }

    let mut steps = cfg.step_sizes.as_slice();
    let mut tuner = StepTuner::new(4);
    let mut acceptance = LsirmAcceptance::default();
    let kept = cfg.retained();
    let mut draws = LsirmDraws {
        beta: Vec::with_capacity(kept),
        theta: Vec::with_capacity(kept),
        sigma2: Vec::with_capacity(kept),
        delta: Vec::with_capacity(kept),
        w: Vec::with_capacity(kept),
        log_posterior: Vec::with_capacity(kept),
        acceptance,
        final_steps: cfg.step_sizes,
        motions: None,
    };
    let mut scratch = vec![T::zero(); 2 * n.max(p)];
    let mut cell_buf = vec![T::zero(); n * p];

    for iter in 0..cfg.total_iters {
        let burning = iter < cfg.burn_in;
        let mut record = |block: usize, ok: bool, stats: &mut AcceptanceStats| {
            if burning {
                tuner.record(block, ok);
            } else {
                stats.record(ok);
            }
        };

        let step = T::lit(steps[0]);
        for i in 0..p {
            let ok = state.update_item_position(i, step, &mut rng, &mut scratch);
            record(0, ok, &mut acceptance.w);
        }
        let step = T::lit(steps[1]);
        for i in 0..p {
            let ok = state.update_beta(i, step, hp.sigma_beta, &mut rng, &mut scratch);
            record(1, ok, &mut acceptance.beta);
        }
        let step = T::lit(steps[2]);
        for k in 0..n {
            let ok = state.update_theta(k, step, &mut rng, &mut scratch);
            record(2, ok, &mut acceptance.theta);
        }
        state.sigma2 = gibbs_sigma2(&state.theta, hp, &mut rng);
        if fixed_delta.is_none() {
            let ok = state.update_delta(T::lit(steps[3]), hp.sigma_delta, &mut rng, &mut cell_buf);
            record(3, ok, &mut acceptance.delta);
        }

        if burning && cfg.adapt {
            tuner.end_iteration(iter, &mut steps);
        }

        if cfg.keeps(iter) {
            draws.beta.push(state.beta.clone());
            draws.theta.push(state.theta.clone());
            draws.sigma2.push(state.sigma2);
            draws.delta.push(state.delta);
            draws.w.push(LatentConfig::new(state.w.clone())?);
            draws.log_posterior.push(state.loglik + state.log_prior(hp));
        }
    }

    draws.acceptance = acceptance;
    draws.final_steps.set_from(&steps);
    Ok(draws)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{adapted_lsirm_log_likelihood, log_priors_adapted};

    fn zhat(n: usize) -> LatentConfig<f64> {
        LatentConfig::new((0..n).map(|k| [(k as f64 * 0.7).sin(), (k as f64 * 1.3).cos()]).collect()).unwrap()
    }

    #[test]
    fn all_zero_responses_push_beta_down() {
        let resp = ItemResponseData::new(20, 4, vec![0; 80]).unwrap();
        let d = run_adapted_lsirm_chain(&resp, &zhat(20), &Hyperparams::default(), &LsirmConfig::new(2_000, 500, 2, 1))
            .unwrap();
        let mean_beta: f64 = d.beta.iter().flatten().sum::<f64>() / (d.len() * 4) as f64;
        assert!(mean_beta < -1.0, "mean beta {mean_beta}");
    }

    #[test]
    fn cached_loglik_matches_kernel() {
        let cells: Vec<u8> = (0..60).map(|i| ((i * 7 + 3) % 5 < 2) as u8).collect();
        let resp = ItemResponseData::new(12, 5, cells).unwrap();
        let z = zhat(12);
        let hp = Hyperparams::default();
        let d = run_adapted_lsirm_chain(&resp, &z, &hp, &LsirmConfig::new(300, 100, 40, 7)).unwrap();
        for t in 0..d.len() {
            let params =
                AdaptedLsirmParams::new(d.beta[t].clone(), d.theta[t].clone(), d.sigma2[t], d.delta[t], d.w[t].clone())
                    .unwrap();
            let lp = adapted_lsirm_log_likelihood(&resp, &z, &params).unwrap() + log_priors_adapted(&params, &hp).unwrap();
            assert!((lp - d.log_posterior[t]).abs() < 1e-8 * lp.abs().max(1.0));
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let resp = ItemResponseData::new(6, 3, vec![1, 0, 1, 0, 0, 1, 1, 1, 0, 0, 1, 0, 1, 0, 0, 1, 1, 1]).unwrap();
        let cfg = LsirmConfig::new(200, 50, 5, 11);
        let a = run_adapted_lsirm_chain(&resp, &zhat(6), &Hyperparams::default(), &cfg).unwrap();
        let b = run_adapted_lsirm_chain(&resp, &zhat(6), &Hyperparams::default(), &cfg).unwrap();
        assert_eq!(a.delta, b.delta);
        assert_eq!(a.w, b.w);
        assert_eq!(a.len(), 30);
        assert!(a.sigma2.iter().all(|&s| s > 0.0));
        assert_eq!(a.acceptance.theta.proposed, 150 * 6);
    }

    #[test]
    fn fixed_delta_hook_holds_value() {
        let resp = ItemResponseData::new(4, 2, vec![1, 0, 0, 1, 1, 1, 0, 0]).unwrap();
        let mut cfg = LsirmConfig::new(100, 20, 1, 3);
        cfg.hooks.fix_delta = Some(0.0);
        let d = run_adapted_lsirm_chain(&resp, &zhat(4), &Hyperparams::default(), &cfg).unwrap();
        assert!(d.delta.iter().all(|&v| v == 0.0));
        assert_eq!(d.acceptance.delta.proposed, 0);
    }

    #[test]
    fn rejects_mismatched_zhat() {
        let resp = ItemResponseData::new(4, 2, vec![0; 8]).unwrap();
        let r = run_adapted_lsirm_chain(&resp, &zhat(3), &Hyperparams::default(), &LsirmConfig::new(10, 1, 1, 1));
        assert!(matches!(r, Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn posterior_mean_needs_alignment() {
        let resp = ItemResponseData::new(4, 2, vec![1, 0, 0, 1, 1, 1, 0, 0]).unwrap();
        let z = zhat(4);
        let mut d = run_adapted_lsirm_chain(&resp, &z, &Hyperparams::default(), &LsirmConfig::new(50, 10, 5, 3)).unwrap();
        assert!(matches!(d.posterior_mean(), Err(Error::Unaligned)));
        d.align(&z, None).unwrap();
        let m = d.posterior_mean().unwrap();
        assert_eq!(m.beta.len(), 2);
        assert_eq!(d.motions().unwrap().len(), d.len());
    }

    #[test]
    fn gibbs_sigma2_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let hp = Hyperparams { a_sigma: 1.5, b_sigma: 1.0, ..Hyperparams::default() };
        let theta = [1.0, 1.0];
        // Inv-Gamma(2.5, 2): mean 2 / 1.5
        let n = 1_000_000;
        let m = (0..n).map(|_| gibbs_sigma2(&theta, &hp, &mut rng)).sum::<f64>() / n as f64;
        assert!((m - 2.0 / 1.5).abs() / (2.0 / 1.5) < 0.01, "mean {m}");
    }

    #[test]
    fn fit_statistic_examples() {
        let resp = ItemResponseData::new(3, 2, vec![0; 6]).unwrap();
        let z = zhat(3);
        let zero = AdaptedLsirmParams::new(vec![0.0; 2], vec![0.0; 3], 1.0, 0.0, LatentConfig::zeros(2)).unwrap();
        let m = fit_statistic(&resp, &z, &zero).unwrap();
        assert!(m.values.iter().all(|&v| v == 0.5));

        let point = AdaptedLsirmParams::new(
            vec![0.4, -0.3],
            vec![0.1, 0.2, -0.5],
            1.0,
            0.8,
            LatentConfig::new(vec![[0.2, 0.1], [-1.0, 0.5]]).unwrap(),
        )
        .unwrap();
        let m = fit_statistic(&resp, &z, &point).unwrap();
        let expected =
            crate::model::response_probability(-0.3, -0.5, 0.8, z.dist(2, &point.w, 1)).unwrap();
        assert_eq!(m.get(2, 1), expected);
    }
}
