use crate::error::{Error, Result};
use crate::model::LatentConfig;
use crate::scalar::Scalar;

/// Parameters of the latent space network model.
#[derive(Debug, Clone, PartialEq)]
pub struct LsmParams<T> {
    pub alpha: T,
    /// Distance weight, strictly positive in the model. The likelihood
    /// kernel itself accepts zero so the Erdős–Rényi reduction can be checked.
    pub gamma: T,
    pub z: LatentConfig<T>,
}

impl<T: Scalar> LsmParams<T> {
    pub fn new(alpha: T, gamma: T, z: LatentConfig<T>) -> Result<Self> {
        if !(gamma > T::zero()) || !gamma.is_finite() {
            return Err(Error::InvalidParameter(format!("gamma must be positive, got {gamma}")));
        }
        if !alpha.is_finite() {
            return Err(Error::InvalidParameter("alpha is not finite".into()));
        }
        Ok(Self { alpha, gamma, z })
    }
}

/// Parameters of the item response model with respondent positions held
/// fixed at the network estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptedLsirmParams<T> {
    /// Item easiness, length `p`.
    pub beta: Vec<T>,
    /// Person trait, length `n`.
    pub theta: Vec<T>,
    pub sigma2: T,
    /// Influence weight. Sign-free.
    pub delta: T,
    /// Item positions, `p` rows.
    pub w: LatentConfig<T>,
}

impl<T: Scalar> AdaptedLsirmParams<T> {
    pub fn new(beta: Vec<T>, theta: Vec<T>, sigma2: T, delta: T, w: LatentConfig<T>) -> Result<Self> {
        if !(sigma2 > T::zero()) || !sigma2.is_finite() {
            return Err(Error::InvalidParameter(format!("sigma2 must be positive, got {sigma2}")));
        }
        if beta.len() != w.len() {
            return Err(Error::DimensionMismatch(format!(
                "beta has {} entries but w has {} rows",
                beta.len(),
                w.len()
            )));
        }
        Ok(Self { beta, theta, sigma2, delta, w })
    }

    pub fn n(&self) -> usize {
        self.theta.len()
    }

    pub fn p(&self) -> usize {
        self.beta.len()
    }
}

/// Prior hyperparameters shared by both estimation steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyperparams<T> {
    pub sigma_alpha: T,
    pub sigma_beta: T,
    /// Prior SD of `log gamma`.
    pub sigma_gamma: T,
    pub sigma_delta: T,
    /// Inverse-gamma shape for the person-trait variance.
    pub a_sigma: T,
    /// Inverse-gamma rate for the person-trait variance.
    pub b_sigma: T,
}

impl<T: Scalar> Default for Hyperparams<T> {
    fn default() -> Self {
        Self {
            sigma_alpha: T::lit(2.5),
            sigma_beta: T::lit(2.5),
            sigma_gamma: T::one(),
            sigma_delta: T::one(),
            a_sigma: T::lit(0.001),
            b_sigma: T::lit(0.001),
        }
    }
}

impl<T: Scalar> Hyperparams<T> {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("sigma_alpha", self.sigma_alpha),
            ("sigma_beta", self.sigma_beta),
            ("sigma_gamma", self.sigma_gamma),
            ("sigma_delta", self.sigma_delta),
            ("a_sigma", self.a_sigma),
            ("b_sigma", self.b_sigma),
        ];
        for (name, v) in fields {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}
