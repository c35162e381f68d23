//! Bernoulli observations with a conjugate Beta prior on the success
//! probability.
//!
//! This model has everything in closed form, which makes it the reference
//! case for validating the sampling-based machinery: the weighted posterior
//! is Beta(sum w_i y_i + alpha, sum w_i (1 - y_i) + beta), so posterior means
//! under reweighting or deletion are exact one-liners.

use crate::data::{Dataset, Observation};
use crate::error::{Error, Result};
use crate::models::{AxisTransform, LikEvaluator, Model, SupportTransform};

/// Posterior mean of the success probability given `successes` ones out of
/// `n` Bernoulli trials under a Beta(alpha, beta) prior:
/// `(successes + alpha) / (n + alpha + beta)`.
pub fn beta_bernoulli_posterior_mean(
    n: usize,
    successes: usize,
    alpha: f64,
    beta: f64,
) -> Result<f64> {
    check_hyperparams(alpha, beta)?;
    if successes > n {
        return Err(Error::Domain(format!(
            "{successes} successes out of {n} trials"
        )));
    }
    Ok((successes as f64 + alpha) / (n as f64 + alpha + beta))
}

fn check_hyperparams(alpha: f64, beta: f64) -> Result<()> {
    if !(alpha > 0.0) || !(beta > 0.0) || !alpha.is_finite() || !beta.is_finite() {
        return Err(Error::Config(format!(
            "Beta hyperparameters must be positive and finite, got alpha={alpha}, beta={beta}"
        )));
    }
    Ok(())
}

/// Bernoulli likelihood with a Beta(alpha, beta) prior, sampled on the logit
/// scale.
#[derive(Clone, Copy, Debug)]
pub struct BetaBernoulliModel {
    alpha: f64,
    beta: f64,
}

impl BetaBernoulliModel {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        check_hyperparams(alpha, beta)?;
        Ok(BetaBernoulliModel { alpha, beta })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

impl Model for BetaBernoulliModel {
    fn id(&self) -> &'static str {
        "beta-bernoulli"
    }

    fn dim(&self) -> usize {
        1
    }

    fn param_names(&self) -> Vec<String> {
        vec!["q".into()]
    }

    fn transform(&self) -> SupportTransform {
        SupportTransform::new(vec![AxisTransform::Logit])
    }

    fn log_lik(&self, obs: &Observation, theta: &[f64]) -> Result<f64> {
        let q = theta[0];
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::Domain(format!("q={q} is outside (0, 1)")));
        }
        match obs.response {
            y if y == 1.0 => Ok(q.ln()),
            y if y == 0.0 => Ok((1.0 - q).ln()),
            y => Err(Error::Domain(format!("response must be 0 or 1, got {y}"))),
        }
    }

    fn log_prior(&self, theta: &[f64]) -> f64 {
        let q = theta[0];
        if q > 0.0 && q < 1.0 {
            (self.alpha - 1.0) * q.ln() + (self.beta - 1.0) * (1.0 - q).ln()
        } else {
            f64::NEG_INFINITY
        }
    }

    fn validate_data(&self, data: &Dataset) -> Result<()> {
        if data.covariate_dim().is_some() {
            return Err(Error::DataValidation(
                "this model takes plain 0/1 responses, no covariates".into(),
            ));
        }
        for (i, obs) in data.iter().enumerate() {
            if obs.response != 0.0 && obs.response != 1.0 {
                return Err(Error::DataValidation(format!(
                    "response at row {i} is {}, must be 0 or 1",
                    obs.response
                )));
            }
        }
        Ok(())
    }

    fn initial_point(&self) -> Vec<f64> {
        vec![0.5]
    }

    fn exact_posterior_mean(&self, data: &Dataset, weights: &[f64]) -> Option<Vec<f64>> {
        let mut s1 = 0.0;
        let mut total = 0.0;
        for (obs, w) in data.iter().zip(weights) {
            s1 += w * obs.response;
            total += w;
        }
        Some(vec![(s1 + self.alpha) / (total + self.alpha + self.beta)])
    }

    fn make_evaluator<'a>(
        &'a self,
        data: &'a Dataset,
        weights: &'a [f64],
    ) -> Box<dyn LikEvaluator + 'a> {
        Box::new(CountEvaluator::new(data, weights))
    }
}

/// The weighted Bernoulli log-likelihood depends on the data only through
/// the weighted success and failure counts, so every evaluation is O(1).
struct CountEvaluator {
    ones: f64,
    zeros: f64,
    value: f64,
    pending: f64,
}

impl CountEvaluator {
    fn new(data: &Dataset, weights: &[f64]) -> Self {
        assert_eq!(data.len(), weights.len());
        let mut ones = 0.0;
        let mut zeros = 0.0;
        for (obs, w) in data.iter().zip(weights) {
            if obs.response == 1.0 {
                ones += w;
            } else {
                zeros += w;
            }
        }
        CountEvaluator { ones, zeros, value: f64::NEG_INFINITY, pending: f64::NEG_INFINITY }
    }

    fn at(&self, q: f64) -> f64 {
        if q > 0.0 && q < 1.0 {
            self.ones * q.ln() + self.zeros * (1.0 - q).ln()
        } else {
            f64::NEG_INFINITY
        }
    }
}

impl LikEvaluator for CountEvaluator {
    fn reset(&mut self, theta: &[f64]) -> f64 {
        self.value = self.at(theta[0]);
        self.value
    }

    fn propose(&mut self, coord: usize, value: f64) -> f64 {
        debug_assert_eq!(coord, 0);
        self.pending = self.at(value);
        self.pending
    }

    fn accept(&mut self) {
        self.value = self.pending;
    }
}
