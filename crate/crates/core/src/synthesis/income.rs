//! Log-normal body + Pareto tail income mixture.
//!
//! Incomes are drawn from a two-branch mixture: with probability
//! `lognormal_share` from a log-normal fitted so its *linear-scale* mean and
//! standard deviation equal the requested values, otherwise from a Pareto
//! tail attached at the log-normal's `lognormal_share` quantile. The tail
//! models the heavy upper incomes a log-normal alone underestimates.

use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, LogNormal, Pareto};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::rng::substream;
use crate::{Error, Result};

fn default_share() -> f64 {
    0.9
}

fn default_alpha() -> f64 {
    2.5
}

/// Parameters of the income mixture, stated on the linear scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IncomeMixtureParams {
    /// Desired mean income (> 0).
    pub mu_actual: f64,
    /// Desired income standard deviation (> 0).
    pub sigma_actual: f64,
    /// Probability mass handled by the log-normal body, in (0, 1].
    /// 1.0 degenerates to a pure log-normal.
    #[serde(default = "default_share")]
    pub lognormal_share: f64,
    /// Pareto tail exponent (> 0); larger means a thinner tail.
    #[serde(default = "default_alpha")]
    pub pareto_alpha: f64,
}

/// Which branch produced a draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IncomeBranch {
    LogNormal,
    Pareto,
}

/// One income draw with its provenance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IncomeDraw {
    pub value: f64,
    pub branch: IncomeBranch,
}

impl IncomeMixtureParams {
    /// Mixture with the default 0.9 body share and 2.5 tail exponent.
    pub fn new(mu_actual: f64, sigma_actual: f64) -> Result<IncomeMixtureParams> {
        IncomeMixtureParams::with_mixture(mu_actual, sigma_actual, default_share(), default_alpha())
    }

    pub fn with_mixture(
        mu_actual: f64,
        sigma_actual: f64,
        lognormal_share: f64,
        pareto_alpha: f64,
    ) -> Result<IncomeMixtureParams> {
        let p = IncomeMixtureParams { mu_actual, sigma_actual, lognormal_share, pareto_alpha };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu_actual.is_finite() && self.mu_actual > 0.0) {
            return Err(Error::Income(format!("mean income must be > 0, got {}", self.mu_actual)));
        }
        if !(self.sigma_actual.is_finite() && self.sigma_actual > 0.0) {
            return Err(Error::Income(format!(
                "income standard deviation must be > 0, got {}",
                self.sigma_actual
            )));
        }
        if !(self.lognormal_share > 0.0 && self.lognormal_share <= 1.0) {
            return Err(Error::Income(format!(
                "log-normal share must be in (0, 1], got {}",
                self.lognormal_share
            )));
        }
        if !(self.pareto_alpha.is_finite() && self.pareto_alpha > 0.0) {
            return Err(Error::Income(format!(
                "pareto alpha must be > 0, got {}",
                self.pareto_alpha
            )));
        }
        Ok(())
    }

    /// Log-scale location: mu = ln(mu_a^2 / sqrt(sigma_a^2 + mu_a^2)),
    /// chosen so the log-normal's linear mean is exactly `mu_actual`.
    pub fn log_mu(&self) -> f64 {
        let (m, s) = (self.mu_actual, self.sigma_actual);
        (m * m / (s * s + m * m).sqrt()).ln()
    }

    /// Log-scale shape: sigma = sqrt(ln(1 + sigma_a^2 / mu_a^2)).
    pub fn log_sigma(&self) -> f64 {
        let (m, s) = (self.mu_actual, self.sigma_actual);
        (1.0 + s * s / (m * m)).ln().sqrt()
    }

    /// Attachment point of the Pareto tail: the `lognormal_share` quantile
    /// of the body. With share = 1.0 the tail is never drawn and this is
    /// +inf by construction.
    pub fn x_min(&self) -> f64 {
        if self.lognormal_share >= 1.0 {
            return f64::INFINITY;
        }
        let z = Normal::standard().inverse_cdf(self.lognormal_share);
        (self.log_mu() + self.log_sigma() * z).exp()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<IncomeMixtureParams> {
        let path = path.as_ref();
        let go = || -> Result<IncomeMixtureParams> {
            let p: IncomeMixtureParams = serde_json::from_str(&std::fs::read_to_string(path)?)?;
            p.validate()?;
            Ok(p)
        };
        go().map_err(|e| e.in_file(path))
    }
}

/// Reusable sampler: distribution objects built once from validated
/// parameters, draws addressed by `(seed, index)`.
pub struct IncomeSampler {
    body: LogNormal<f64>,
    tail: Option<Pareto<f64>>,
    share: f64,
}

impl IncomeSampler {
    pub fn new(params: &IncomeMixtureParams) -> Result<IncomeSampler> {
        params.validate()?;
        let body = LogNormal::new(params.log_mu(), params.log_sigma())
            .map_err(|e| Error::Income(format!("log-normal construction failed: {e}")))?;
        let tail = if params.lognormal_share < 1.0 {
            Some(
                Pareto::new(params.x_min(), params.pareto_alpha)
                    .map_err(|e| Error::Income(format!("pareto construction failed: {e}")))?,
            )
        } else {
            None
        };
        Ok(IncomeSampler { body, tail, share: params.lognormal_share })
    }

    /// The draw at one substream address. Depends only on `(seed, index)`,
    /// so subsets and supersets of a run agree on shared indices.
    pub fn draw_at(&self, seed: u64, index: u64) -> IncomeDraw {
        let mut rng = substream(seed, index);
        let u: f64 = rng.random();
        match &self.tail {
            Some(tail) if u >= self.share => {
                IncomeDraw { value: tail.sample(&mut rng), branch: IncomeBranch::Pareto }
            }
            _ => IncomeDraw { value: self.body.sample(&mut rng), branch: IncomeBranch::LogNormal },
        }
    }
}

/// Draw `n` incomes with branch provenance.
pub fn income_mixture_draws(
    params: &IncomeMixtureParams,
    n: usize,
    seed: u64,
) -> Result<Vec<IncomeDraw>> {
    let sampler = IncomeSampler::new(params)?;
    Ok((0..n).map(|i| sampler.draw_at(seed, i as u64)).collect())
}

/// Values-only convenience over [`income_mixture_draws`].
pub fn income_mixture_sample(params: &IncomeMixtureParams, n: usize, seed: u64) -> Result<Vec<f64>> {
    Ok(income_mixture_draws(params, n, seed)?.into_iter().map(|d| d.value).collect())
}
