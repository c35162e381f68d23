//! Observation models: log-likelihoods, priors, and support transforms.
//!
//! A [`Model`] couples a per-observation log-likelihood with a prior and a
//! coordinate-wise transform onto unconstrained space, which is where the
//! sampler random-walks. Models also supply a [`LikEvaluator`] so that
//! coordinate proposals can reuse cached per-observation state instead of
//! re-evaluating the full likelihood.

mod beta_bernoulli;
mod logistic;
mod weibull;

pub use beta_bernoulli::{beta_bernoulli_posterior_mean, BetaBernoulliModel};
pub use logistic::{logistic_log_lik, LogisticModel};
pub use weibull::{weibull_log_density, WeibullModel};

use crate::data::{Dataset, Observation};
use crate::error::{Error, Result};
use crate::sampler::{PosteriorSamples, Provenance};

/// A named parameter vector in constrained (model) space.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamVector {
    values: Vec<f64>,
    names: Vec<String>,
}

impl ParamVector {
    pub fn new(values: Vec<f64>, names: Vec<String>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::DimensionMismatch(
                "parameter vector must not be empty".into(),
            ));
        }
        if values.len() != names.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} values but {} names",
                values.len(),
                names.len()
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("non-finite parameter '{}'", names[k])));
        }
        Ok(ParamVector { values, names })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Strictly monotone map from the real line onto one parameter's support.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AxisTransform {
    /// Support is all of R; the identity map.
    Identity,
    /// Support is (0, inf); the map is exp.
    Log,
    /// Support is (0, 1); the map is the logistic sigmoid.
    Logit,
}

impl AxisTransform {
    /// Maps an unconstrained value into the parameter's support.
    pub fn to_constrained(self, z: f64) -> f64 {
        match self {
            AxisTransform::Identity => z,
            AxisTransform::Log => z.exp(),
            AxisTransform::Logit => crate::stats::sigmoid(z),
        }
    }

    /// Maps a value in the support back to the real line.
    pub fn to_unconstrained(self, x: f64) -> Result<f64> {
        let z = match self {
            AxisTransform::Identity => x,
            AxisTransform::Log => {
                if x <= 0.0 {
                    return Err(Error::Domain(format!("{x} is outside (0, inf)")));
                }
                x.ln()
            }
            AxisTransform::Logit => {
                if x <= 0.0 || x >= 1.0 {
                    return Err(Error::Domain(format!("{x} is outside (0, 1)")));
                }
                (x / (1.0 - x)).ln()
            }
        };
        if !z.is_finite() {
            return Err(Error::Domain(format!("transform of {x} is not finite")));
        }
        Ok(z)
    }

    /// log |d constrained / d z|, the change-of-variables correction.
    pub fn log_jacobian(self, z: f64) -> f64 {
        match self {
            AxisTransform::Identity => 0.0,
            AxisTransform::Log => z,
            AxisTransform::Logit => {
                crate::stats::log_sigmoid(z) + crate::stats::log_sigmoid(-z)
            }
        }
    }
}

/// Per-coordinate transform for a whole parameter vector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SupportTransform {
    axes: Vec<AxisTransform>,
}

impl SupportTransform {
    pub fn new(axes: Vec<AxisTransform>) -> Self {
        assert!(!axes.is_empty(), "transform needs at least one axis");
        SupportTransform { axes }
    }

    /// All coordinates unconstrained (the identity on R^k).
    pub fn identity(k: usize) -> Self {
        Self::new(vec![AxisTransform::Identity; k])
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[AxisTransform] {
        &self.axes
    }

    pub fn to_constrained(&self, z: &[f64]) -> Vec<f64> {
        assert_eq!(z.len(), self.axes.len());
        z.iter()
            .zip(&self.axes)
            .map(|(zi, ax)| ax.to_constrained(*zi))
            .collect()
    }

    pub fn to_unconstrained(&self, theta: &[f64]) -> Result<Vec<f64>> {
        if theta.len() != self.axes.len() {
            return Err(Error::DimensionMismatch(format!(
                "point has dimension {}, transform has {}",
                theta.len(),
                self.axes.len()
            )));
        }
        theta
            .iter()
            .zip(&self.axes)
            .map(|(xi, ax)| ax.to_unconstrained(*xi))
            .collect()
    }

    /// Sum of per-axis log-Jacobian terms at the unconstrained point.
    pub fn log_jacobian(&self, z: &[f64]) -> f64 {
        assert_eq!(z.len(), self.axes.len());
        z.iter()
            .zip(&self.axes)
            .map(|(zi, ax)| ax.log_jacobian(*zi))
            .sum()
    }
}

/// Incremental evaluator of the weighted log-likelihood sum
/// `sum_i w_i * l(X_i; theta)` under coordinate-wise updates.
///
/// The sampler calls [`reset`](LikEvaluator::reset) once, then alternates
/// [`propose`](LikEvaluator::propose) (value if one coordinate moved) and
/// [`accept`](LikEvaluator::accept) (commit the pending proposal). Rejected
/// proposals need no call: the next `propose` replaces the pending state.
/// Implementations return `-inf` for out-of-support or non-finite points so
/// the sampler rejects them.
pub trait LikEvaluator {
    /// Recomputes the weighted log-likelihood sum at `theta` from scratch.
    fn reset(&mut self, theta: &[f64]) -> f64;

    /// Weighted log-likelihood sum if coordinate `coord` moved to `value`.
    fn propose(&mut self, coord: usize, value: f64) -> f64;

    /// Commits the most recent proposal.
    fn accept(&mut self);
}

/// Fallback evaluator that re-evaluates every observation per proposal.
/// Fine for cheap likelihoods and small n; models with exploitable structure
/// provide their own evaluator instead.
pub struct RecomputeEvaluator<'a> {
    model: &'a dyn Model,
    data: &'a Dataset,
    weights: &'a [f64],
    theta: Vec<f64>,
    pending: Option<(usize, f64)>,
}

impl<'a> RecomputeEvaluator<'a> {
    pub fn new(model: &'a dyn Model, data: &'a Dataset, weights: &'a [f64]) -> Self {
        assert_eq!(data.len(), weights.len());
        RecomputeEvaluator {
            model,
            data,
            weights,
            theta: vec![0.0; model.dim()],
            pending: None,
        }
    }

    fn weighted_sum(&self, theta: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (obs, w) in self.data.iter().zip(self.weights) {
            if *w == 0.0 {
                continue;
            }
            match self.model.log_lik(obs, theta) {
                Ok(ll) if ll.is_finite() || ll == f64::NEG_INFINITY => acc += w * ll,
                _ => return f64::NEG_INFINITY,
            }
        }
        acc
    }
}

impl LikEvaluator for RecomputeEvaluator<'_> {
    fn reset(&mut self, theta: &[f64]) -> f64 {
        self.theta.copy_from_slice(theta);
        self.pending = None;
        self.weighted_sum(theta)
    }

    fn propose(&mut self, coord: usize, value: f64) -> f64 {
        let mut theta = self.theta.clone();
        theta[coord] = value;
        self.pending = Some((coord, value));
        self.weighted_sum(&theta)
    }

    fn accept(&mut self) {
        let (coord, value) = self.pending.take().expect("accept without a proposal");
        self.theta[coord] = value;
    }
}

/// An observation model with a prior, ready for posterior sampling.
pub trait Model: Send + Sync {
    /// Stable identifier used in provenance records and CLI dispatch.
    fn id(&self) -> &'static str;

    /// Number of parameters.
    fn dim(&self) -> usize;

    /// Human-readable parameter names, in coordinate order.
    fn param_names(&self) -> Vec<String>;

    /// Transform from unconstrained sampling space onto the support.
    fn transform(&self) -> SupportTransform;

    /// Log-likelihood of a single observation at `theta` (constrained).
    fn log_lik(&self, obs: &Observation, theta: &[f64]) -> Result<f64>;

    /// Log prior density at `theta`, possibly improper; `-inf` outside the
    /// support.
    fn log_prior(&self, theta: &[f64]) -> f64;

    /// Checks that a dataset has the shape and value ranges this model needs.
    fn validate_data(&self, data: &Dataset) -> Result<()>;

    /// Fixed, deterministic starting point in constrained space.
    fn initial_point(&self) -> Vec<f64>;

    /// Smallest dataset the posterior remains proper on. Leave-one-out
    /// procedures refuse to shrink a dataset below this.
    fn min_observations(&self) -> usize {
        1
    }

    /// Closed-form posterior mean of the parameter vector under
    /// per-observation weights, where one exists.
    fn exact_posterior_mean(&self, _data: &Dataset, _weights: &[f64]) -> Option<Vec<f64>> {
        None
    }

    /// Evaluator for the weighted log-likelihood sum under coordinate moves.
    fn make_evaluator<'a>(
        &'a self,
        data: &'a Dataset,
        weights: &'a [f64],
    ) -> Box<dyn LikEvaluator + 'a>;
}

/// Per-observation log-likelihood values over a set of posterior draws,
/// stored column-major: column i holds `l(X_i; theta_j)` for j = 1..M.
pub struct LogLikMatrix {
    values: Vec<f64>,
    n_draws: usize,
    n_obs: usize,
    provenance: Provenance,
}

impl LogLikMatrix {
    /// Wraps pre-computed per-observation log-likelihood columns. Columns
    /// must be finite and all the same length.
    pub fn from_columns(columns: Vec<Vec<f64>>, provenance: Provenance) -> Result<Self> {
        if columns.is_empty() {
            return Err(Error::DimensionMismatch("no observation columns".into()));
        }
        let m = columns[0].len();
        if m < 2 {
            return Err(Error::Config("need at least two draws".into()));
        }
        let mut values = Vec::with_capacity(m * columns.len());
        for (i, col) in columns.iter().enumerate() {
            if col.len() != m {
                return Err(Error::DimensionMismatch(format!(
                    "column {i} has {} values, column 0 has {m}",
                    col.len()
                )));
            }
            if let Some(j) = col.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFiniteLogLik { obs: i, draw: j });
            }
            values.extend_from_slice(col);
        }
        Ok(LogLikMatrix {
            n_draws: m,
            n_obs: columns.len(),
            values,
            provenance,
        })
    }

    pub fn n_draws(&self) -> usize {
        self.n_draws
    }

    pub fn n_obs(&self) -> usize {
        self.n_obs
    }

    /// Column i: the log-likelihood of observation i at every draw.
    pub fn col(&self, i: usize) -> &[f64] {
        &self.values[i * self.n_draws..(i + 1) * self.n_draws]
    }

    /// Provenance of the sampler run these values were computed from.
    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }
}

/// Evaluates the log-likelihood of every observation at every posterior draw.
///
/// Columns are independent of each other, so adding or reordering
/// observations never changes the values computed for the rest.
pub fn log_lik_matrix(
    model: &dyn Model,
    data: &Dataset,
    samples: &PosteriorSamples,
) -> Result<LogLikMatrix> {
    use rayon::prelude::*;

    model.validate_data(data)?;
    if samples.provenance().n_obs != data.len() {
        return Err(Error::ProvenanceMismatch(format!(
            "samples were drawn against {} observations, dataset has {}",
            samples.provenance().n_obs,
            data.len()
        )));
    }
    if samples.dim() != model.dim() {
        return Err(Error::DimensionMismatch(format!(
            "samples have dimension {}, model has {}",
            samples.dim(),
            model.dim()
        )));
    }
    let m = samples.n_draws();
    let n = data.len();
    let rows: Vec<Vec<f64>> = (0..m).map(|j| samples.row(j)).collect();

    let columns: Vec<Result<Vec<f64>>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let obs = data.get(i);
            let mut col = Vec::with_capacity(m);
            for (j, theta) in rows.iter().enumerate() {
                let ll = model.log_lik(obs, theta)?;
                if !ll.is_finite() {
                    return Err(Error::NonFiniteLogLik { obs: i, draw: j });
                }
                col.push(ll);
            }
            Ok(col)
        })
        .collect();

    let mut values = Vec::with_capacity(m * n);
    for col in columns {
        values.extend_from_slice(&col?);
    }
    Ok(LogLikMatrix {
        values,
        n_draws: m,
        n_obs: n,
        provenance: samples.provenance().clone(),
    })
}
