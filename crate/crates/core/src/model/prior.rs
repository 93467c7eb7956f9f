use crate::error::{Error, Result};
use crate::model::{AdaptedLsirmParams, Hyperparams, LatentConfig, LsmParams};
use crate::scalar::Scalar;

#[inline]
pub(crate) fn normal_log_density<T: Scalar>(x: T, sd: T) -> T {
    let half = T::lit(0.5);
    -(sd * (T::TAU()).sqrt()).ln() - half * (x / sd) * (x / sd)
}

#[inline]
pub(crate) fn std_bivariate_log_density<T: Scalar>(p: [T; 2]) -> T {
    -T::TAU().ln() - T::lit(0.5) * (p[0] * p[0] + p[1] * p[1])
}

pub(crate) fn inverse_gamma_log_density<T: Scalar>(x: T, shape: T, rate: T) -> T {
    let ln_gamma = T::lit(libm::lgamma(shape.as_f64()));
    shape * rate.ln() - ln_gamma - (shape + T::one()) * x.ln() - rate / x
}

pub(crate) fn latent_prior<T: Scalar>(cfg: &LatentConfig<T>) -> T {
    cfg.points().iter().map(|&p| std_bivariate_log_density(p)).sum()
}

/// Log prior of the network model. The distance weight's prior is a normal
/// on `log gamma`, evaluated in log coordinates (no Jacobian), matching the
/// space the sampler walks in.
pub fn log_priors_lsm<T: Scalar>(params: &LsmParams<T>, hp: &Hyperparams<T>) -> Result<T> {
    if !(params.gamma > T::zero()) {
        return Err(Error::InvalidParameter(format!("gamma must be positive, got {}", params.gamma)));
    }
    Ok(normal_log_density(params.alpha, hp.sigma_alpha)
        + latent_prior(&params.z)
        + normal_log_density(params.gamma.ln(), hp.sigma_gamma))
}

pub fn log_priors_adapted<T: Scalar>(params: &AdaptedLsirmParams<T>, hp: &Hyperparams<T>) -> Result<T> {
    if !(params.sigma2 > T::zero()) {
        return Err(Error::InvalidParameter(format!("sigma2 must be positive, got {}", params.sigma2)));
    }
    let sd_theta = params.sigma2.sqrt();
    let beta: T = params.beta.iter().map(|&b| normal_log_density(b, hp.sigma_beta)).sum();
    let theta: T = params.theta.iter().map(|&t| normal_log_density(t, sd_theta)).sum();
    Ok(beta
        + theta
        + inverse_gamma_log_density(params.sigma2, hp.a_sigma, hp.b_sigma)
        + latent_prior(&params.w)
        + normal_log_density(params.delta, hp.sigma_delta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use statrs::distribution::{Continuous, InverseGamma, Normal};
    use std::f64::consts::PI;

    fn hp() -> Hyperparams<f64> {
        Hyperparams::default()
    }

    #[test]
    fn lsm_prior_at_modes() {
        let p = LsmParams::new(0.0, 1.0, LatentConfig::new(vec![[0.0, 0.0]]).unwrap()).unwrap();
        let expected = -(2.5 * (2.0 * PI).sqrt()).ln() - (2.0 * PI).ln() - (2.0 * PI).sqrt().ln();
        assert_abs_diff_eq!(log_priors_lsm(&p, &hp()).unwrap(), expected, epsilon = 1e-14);
    }

    #[test]
    fn lsm_prior_decreases_off_origin() {
        let at = LsmParams::new(0.0, 1.0, LatentConfig::new(vec![[0.0, 0.0], [0.5, 0.5]]).unwrap()).unwrap();
        let off = LsmParams::new(0.0, 1.0, LatentConfig::new(vec![[0.0, 0.3], [0.5, 0.5]]).unwrap()).unwrap();
        assert!(log_priors_lsm(&off, &hp()).unwrap() < log_priors_lsm(&at, &hp()).unwrap());
    }

    #[test]
    fn lsm_prior_scalar_oracle() {
        // -log(2.5 sqrt(2 pi)) - 0.08 - log(sqrt(2 pi)) - 0.5, evaluated with mpmath
        let p = LsmParams::new(1.0, std::f64::consts::E, LatentConfig::zeros(0)).unwrap();
        assert_abs_diff_eq!(log_priors_lsm(&p, &hp()).unwrap(), -3.334_167_798_283_500_5, epsilon = 1e-13);
    }

    #[test]
    fn lsm_prior_rejects_nonpositive_gamma() {
        let p = LsmParams { alpha: 0.0, gamma: 0.0, z: LatentConfig::zeros(1) };
        assert!(log_priors_lsm(&p, &hp()).is_err());
    }

    #[test]
    fn adapted_prior_at_modes() {
        let p = AdaptedLsirmParams::new(vec![0.0; 2], vec![0.0; 3], 1.0, 0.0, LatentConfig::zeros(2)).unwrap();
        let ln2pi = (2.0 * PI).ln();
        let expected = 2.0 * (-(2.5f64).ln() - 0.5 * ln2pi)
            + 3.0 * (-0.5 * ln2pi)
            + (0.001 * 0.001f64.ln() - libm::lgamma(0.001) - 0.001)
            + 2.0 * (-ln2pi)
            + (-0.5 * ln2pi);
        assert_abs_diff_eq!(log_priors_adapted(&p, &hp()).unwrap(), expected, epsilon = 1e-12);
    }

    #[test]
    fn doubling_delta_scale_at_zero() {
        let p = AdaptedLsirmParams::new(vec![0.1], vec![0.2], 0.7, 0.0, LatentConfig::zeros(1)).unwrap();
        let a = log_priors_adapted(&p, &hp()).unwrap();
        let wide = Hyperparams { sigma_delta: 2.0, ..hp() };
        let b = log_priors_adapted(&p, &wide).unwrap();
        assert_abs_diff_eq!(b - a, -std::f64::consts::LN_2, epsilon = 1e-14);
    }

    #[test]
    fn adapted_prior_density_oracle() {
        let p = AdaptedLsirmParams::new(
            vec![0.3],
            vec![-0.2],
            0.8,
            0.4,
            LatentConfig::new(vec![[0.1, -0.1]]).unwrap(),
        )
        .unwrap();
        let oracle = Normal::new(0.0, 2.5).unwrap().ln_pdf(0.3)
            + Normal::new(0.0, 0.8f64.sqrt()).unwrap().ln_pdf(-0.2)
            + InverseGamma::new(0.001, 0.001).unwrap().ln_pdf(0.8)
            + Normal::new(0.0, 1.0).unwrap().ln_pdf(0.1)
            + Normal::new(0.0, 1.0).unwrap().ln_pdf(-0.1)
            + Normal::new(0.0, 1.0).unwrap().ln_pdf(0.4);
        assert_abs_diff_eq!(log_priors_adapted(&p, &hp()).unwrap(), oracle, epsilon = 1e-10);
    }

    #[test]
    fn adapted_prior_rejects_nonpositive_variance() {
        let mut p = AdaptedLsirmParams::new(vec![0.0], vec![0.0], 1.0, 0.0, LatentConfig::zeros(1)).unwrap();
        p.sigma2 = -1.0;
        assert!(log_priors_adapted(&p, &hp()).is_err());
    }
}
