//! Logistic regression with a flat (improper) prior on the coefficients.
//!
//! Responses are 0/1 and each observation carries a covariate vector. The
//! coefficient vector is sampled directly (identity transform). The
//! evaluator caches the linear predictor eta_i = a . x_i per observation, so
//! a single-coordinate proposal costs O(n) instead of O(n K).

use crate::data::{Dataset, Observation};
use crate::error::{Error, Result};
use crate::models::{AxisTransform, LikEvaluator, Model, SupportTransform};
use crate::stats::log1p_exp;

/// Bernoulli log-likelihood under the logit link, as a function of the
/// response `y` in {0, 1} and the linear predictor `eta = a . x`:
/// `y * eta - ln(1 + e^eta)`, evaluated without overflow for large |eta|.
pub fn logistic_log_lik(y: f64, eta: f64) -> Result<f64> {
    if y != 0.0 && y != 1.0 {
        return Err(Error::Domain(format!("response must be 0 or 1, got {y}")));
    }
    if !eta.is_finite() {
        return Err(Error::Domain(format!("linear predictor is {eta}")));
    }
    Ok(y * eta - log1p_exp(eta))
}

/// Logistic regression model with `n_covariates` coefficients and no
/// intercept beyond what the covariates encode.
#[derive(Clone, Copy, Debug)]
pub struct LogisticModel {
    n_covariates: usize,
}

impl LogisticModel {
    pub fn new(n_covariates: usize) -> Result<Self> {
        if n_covariates == 0 {
            return Err(Error::Config(
                "logistic model needs at least one covariate".into(),
            ));
        }
        Ok(LogisticModel { n_covariates })
    }

    fn eta(&self, obs: &Observation, theta: &[f64]) -> Result<f64> {
        let cov = obs.covariates.as_ref().ok_or_else(|| {
            Error::DataValidation("observation has no covariates".into())
        })?;
        if cov.len() != theta.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} covariates but {} coefficients",
                cov.len(),
                theta.len()
            )));
        }
        Ok(cov.iter().zip(theta).map(|(x, a)| x * a).sum())
    }
}

impl Model for LogisticModel {
    fn id(&self) -> &'static str {
        "logistic"
    }

    fn dim(&self) -> usize {
        self.n_covariates
    }

    fn param_names(&self) -> Vec<String> {
        (1..=self.n_covariates).map(|k| format!("a{k}")).collect()
    }

    fn transform(&self) -> SupportTransform {
        SupportTransform::identity(self.n_covariates)
    }

    fn log_lik(&self, obs: &Observation, theta: &[f64]) -> Result<f64> {
        logistic_log_lik(obs.response, self.eta(obs, theta)?)
    }

    fn log_prior(&self, _theta: &[f64]) -> f64 {
        0.0
    }

    fn validate_data(&self, data: &Dataset) -> Result<()> {
        match data.covariate_dim() {
            Some(k) if k == self.n_covariates => {}
            other => {
                return Err(Error::DataValidation(format!(
                    "model expects {} covariates per observation, dataset has {:?}",
                    self.n_covariates, other
                )))
            }
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
        vec![0.0; self.n_covariates]
    }

    fn make_evaluator<'a>(
        &'a self,
        data: &'a Dataset,
        weights: &'a [f64],
    ) -> Box<dyn LikEvaluator + 'a> {
        Box::new(LogisticEvaluator::new(data, weights))
    }
}

/// Caches the per-observation linear predictors. Covariates are kept
/// column-major so the coordinate update `eta_i += d * x_{i,k}` streams
/// through one contiguous column.
struct LogisticEvaluator<'a> {
    responses: Vec<f64>,
    columns: Vec<f64>, // column-major n x K covariate matrix
    weights: &'a [f64],
    n: usize,
    theta: Vec<f64>,
    eta: Vec<f64>,
    pending_eta: Vec<f64>,
    pending: Option<(usize, f64)>,
}

impl<'a> LogisticEvaluator<'a> {
    fn new(data: &Dataset, weights: &'a [f64]) -> Self {
        assert_eq!(data.len(), weights.len());
        let n = data.len();
        let k = data.covariate_dim().expect("logistic data has covariates");
        let mut columns = vec![0.0; n * k];
        let mut responses = Vec::with_capacity(n);
        for (i, obs) in data.iter().enumerate() {
            responses.push(obs.response);
            let cov = obs.covariates.as_ref().expect("validated earlier");
            for (j, x) in cov.iter().enumerate() {
                columns[j * n + i] = *x;
            }
        }
        LogisticEvaluator {
            responses,
            columns,
            weights,
            n,
            theta: vec![0.0; k],
            eta: vec![0.0; n],
            pending_eta: vec![0.0; n],
            pending: None,
        }
    }

    fn weighted_sum(&self, eta: &[f64]) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.n {
            let w = self.weights[i];
            if w == 0.0 {
                continue;
            }
            let e = eta[i];
            if !e.is_finite() {
                return f64::NEG_INFINITY;
            }
            acc += w * (self.responses[i] * e - log1p_exp(e));
        }
        acc
    }
}

impl LikEvaluator for LogisticEvaluator<'_> {
    fn reset(&mut self, theta: &[f64]) -> f64 {
        self.theta.copy_from_slice(theta);
        self.pending = None;
        for i in 0..self.n {
            let mut e = 0.0;
            for (j, a) in theta.iter().enumerate() {
                e += self.columns[j * self.n + i] * a;
            }
            self.eta[i] = e;
        }
        self.weighted_sum(&self.eta.clone())
    }

    fn propose(&mut self, coord: usize, value: f64) -> f64 {
        let d = value - self.theta[coord];
        let col = &self.columns[coord * self.n..(coord + 1) * self.n];
        for i in 0..self.n {
            self.pending_eta[i] = self.eta[i] + d * col[i];
        }
        self.pending = Some((coord, value));
        let mut acc = 0.0;
        for i in 0..self.n {
            let w = self.weights[i];
            if w == 0.0 {
                continue;
            }
            let e = self.pending_eta[i];
            if !e.is_finite() {
                return f64::NEG_INFINITY;
            }
            acc += w * (self.responses[i] * e - log1p_exp(e));
        }
        acc
    }

    fn accept(&mut self) {
        let (coord, value) = self.pending.take().expect("accept without a proposal");
        self.theta[coord] = value;
        std::mem::swap(&mut self.eta, &mut self.pending_eta);
    }
}
