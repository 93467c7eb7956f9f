//! Bernoulli-logit log-likelihood kernels for the network model and the
//! adapted item response model.
//!
//! Each term is `y * eta - log(1 + exp(eta))`, with the softplus evaluated on
//! the branch that cannot overflow.

use crate::error::{Error, Result};
use crate::model::{AdaptedLsirmParams, ItemResponseData, LatentConfig, LsmParams, NetworkData};
use crate::scalar::Scalar;

/// `log(1 + exp(x))` without overflow for large `|x|`.
#[inline]
pub fn softplus<T: Scalar>(x: T) -> T {
    if x > T::zero() {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

#[inline]
pub fn logistic<T: Scalar>(x: T) -> T {
    if x >= T::zero() {
        T::one() / (T::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (T::one() + e)
    }
}

/// Log-probability of a single Bernoulli outcome with logit `eta`.
#[inline]
pub fn bernoulli_logit<T: Scalar>(y: bool, eta: T) -> T {
    if y {
        -softplus(-eta)
    } else {
        -softplus(eta)
    }
}

/// How the network likelihood walks over respondent pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PairConvention {
    /// Each unordered pair `k < l` contributes once.
    #[default]
    Unordered,
    /// Every ordered pair `k != l`; each tie counted twice.
    Ordered,
}

pub fn lsm_log_likelihood<T: Scalar>(net: &NetworkData, params: &LsmParams<T>) -> Result<T> {
    lsm_log_likelihood_with(net, params, PairConvention::Unordered)
}

pub fn lsm_log_likelihood_with<T: Scalar>(
    net: &NetworkData,
    params: &LsmParams<T>,
    convention: PairConvention,
) -> Result<T> {
    let n = net.n();
    params.z.check_len(n, "respondent positions")?;
    params.z.check_finite()?;
    if !(params.alpha.is_finite() && params.gamma.is_finite()) {
        return Err(Error::InvalidParameter("alpha and gamma must be finite".into()));
    }
    let z = &params.z;
    let mut total = T::zero();
    for k in 0..n {
        let row = net.row(k);
        for l in (k + 1)..n {
            let eta = params.alpha - params.gamma * z.dist(k, z, l);
            total += bernoulli_logit(row[l] == 1, eta);
        }
    }
    Ok(match convention {
        PairConvention::Unordered => total,
        PairConvention::Ordered => total + total,
    })
}

pub fn adapted_lsirm_log_likelihood<T: Scalar>(
    resp: &ItemResponseData,
    zhat: &LatentConfig<T>,
    params: &AdaptedLsirmParams<T>,
) -> Result<T> {
    check_adapted_dims(resp, zhat, params)?;
    let mut total = T::zero();
    for k in 0..resp.n() {
        let row = resp.row(k);
        for (i, &x) in row.iter().enumerate() {
            let eta = params.beta[i] + params.theta[k] - params.delta * zhat.dist(k, &params.w, i);
            total += bernoulli_logit(x == 1, eta);
        }
    }
    Ok(total)
}

pub(crate) fn check_adapted_dims<T: Scalar>(
    resp: &ItemResponseData,
    zhat: &LatentConfig<T>,
    params: &AdaptedLsirmParams<T>,
) -> Result<()> {
    zhat.check_len(resp.n(), "fixed respondent positions")?;
    params.w.check_len(resp.p(), "item positions")?;
    if params.beta.len() != resp.p() {
        return Err(Error::DimensionMismatch(format!(
            "beta has {} entries, expected {}",
            params.beta.len(),
            resp.p()
        )));
    }
    if params.theta.len() != resp.n() {
        return Err(Error::DimensionMismatch(format!(
            "theta has {} entries, expected {}",
            params.theta.len(),
            resp.n()
        )));
    }
    zhat.check_finite()?;
    params.w.check_finite()
}

/// Probability of a positive response given item easiness, person trait,
/// influence weight and respondent-item distance.
pub fn response_probability<T: Scalar>(beta_i: T, theta_k: T, delta: T, dist: T) -> Result<T> {
    if dist < T::zero() || dist.is_nan() {
        return Err(Error::InvalidParameter(format!("distance must be non-negative, got {dist}")));
    }
    Ok(logistic(beta_i + theta_k - delta * dist))
}
