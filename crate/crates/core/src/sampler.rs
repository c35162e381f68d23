//! Posterior sampling via coordinate-wise adaptive random-walk Metropolis.
//!
//! The target is a *tilted, weighted* posterior: each observation's
//! log-likelihood enters with a weight w_i, and an optional linear tilt
//! `-lambda . theta` multiplies the prior. Weights default to 1 and the tilt
//! to 0, which recovers the ordinary posterior. Proposals are Gaussian moves
//! on one unconstrained coordinate at a time; per-coordinate step sizes
//! adapt toward a target acceptance rate during burn-in and are frozen
//! afterwards, so the recorded draws come from a fixed transition kernel.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::models::Model;
use crate::output::RunStamp;
use crate::stats;

/// Tuning knobs for one sampling run.
#[derive(Clone, Debug, PartialEq)]
pub struct SamplerConfig {
    /// Number of draws to record after burn-in and thinning.
    pub samples: usize,
    /// Sweeps discarded from the start; step-size adaptation happens here.
    pub burn_in: usize,
    /// Keep every `thin`-th sweep after burn-in.
    pub thin: usize,
    /// Acceptance rate the per-coordinate step sizes adapt toward.
    pub target_accept: f64,
    /// Seed for the run's RNG stream.
    pub seed: u64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            samples: 20_000,
            burn_in: 5_000,
            thin: 1,
            target_accept: 0.3,
            seed: 0,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.samples < 2 {
            return Err(Error::Config("need at least two posterior draws".into()));
        }
        if self.thin == 0 {
            return Err(Error::Config("thin must be at least 1".into()));
        }
        if !(self.target_accept > 0.0 && self.target_accept < 1.0) {
            return Err(Error::Config(format!(
                "target acceptance rate must lie in (0, 1), got {}",
                self.target_accept
            )));
        }
        Ok(())
    }

    /// Copy with a different seed; handy when deriving per-replicate streams.
    pub fn with_seed(&self, seed: u64) -> Self {
        let mut cfg = self.clone();
        cfg.seed = seed;
        cfg
    }
}

/// A posterior distribution with per-observation weights and a linear tilt
/// on the parameters: density proportional to
/// `exp(sum_i w_i l(X_i; theta) - lambda . theta) p(theta)`.
pub struct TiltedPosterior<'a> {
    model: &'a dyn Model,
    data: &'a Dataset,
    weights: Vec<f64>,
    tilt: Vec<f64>,
}

impl<'a> TiltedPosterior<'a> {
    /// Plain posterior: unit weights, zero tilt. Validates the dataset.
    pub fn new(model: &'a dyn Model, data: &'a Dataset) -> Result<Self> {
        model.validate_data(data)?;
        Ok(TiltedPosterior {
            model,
            data,
            weights: vec![1.0; data.len()],
            tilt: vec![0.0; model.dim()],
        })
    }

    /// Replaces the observation weights. Weights must be finite and
    /// non-negative; a zero weight removes the observation's contribution.
    pub fn with_weights(mut self, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != self.data.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} weights for {} observations",
                weights.len(),
                self.data.len()
            )));
        }
        if let Some(i) = weights.iter().position(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::Domain(format!(
                "weight {i} is {}, must be finite and >= 0",
                weights[i]
            )));
        }
        self.weights = weights;
        Ok(self)
    }

    /// Replaces the tilt vector.
    pub fn with_tilt(mut self, tilt: Vec<f64>) -> Result<Self> {
        if tilt.len() != self.model.dim() {
            return Err(Error::DimensionMismatch(format!(
                "tilt has dimension {}, model has {}",
                tilt.len(),
                self.model.dim()
            )));
        }
        if let Some(k) = tilt.iter().position(|l| !l.is_finite()) {
            return Err(Error::Domain(format!("tilt component {k} is not finite")));
        }
        self.tilt = tilt;
        Ok(self)
    }

    pub fn model(&self) -> &dyn Model {
        self.model
    }

    pub fn data(&self) -> &Dataset {
        self.data
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn tilt(&self) -> &[f64] {
        &self.tilt
    }

    /// Log of the unnormalized tilted posterior density at a constrained
    /// point. Returns `-inf` outside the support.
    pub fn log_unnormalized_posterior(&self, theta: &[f64]) -> f64 {
        assert_eq!(theta.len(), self.model.dim());
        let prior = self.model.log_prior(theta);
        if prior == f64::NEG_INFINITY || prior.is_nan() {
            return f64::NEG_INFINITY;
        }
        let mut acc = prior;
        for (k, t) in theta.iter().enumerate() {
            acc -= self.tilt[k] * t;
        }
        for (obs, w) in self.data.iter().zip(&self.weights) {
            if *w == 0.0 {
                continue;
            }
            match self.model.log_lik(obs, theta) {
                Ok(ll) => acc += w * ll,
                Err(_) => return f64::NEG_INFINITY,
            }
        }
        if acc.is_nan() {
            f64::NEG_INFINITY
        } else {
            acc
        }
    }

    /// Same density expressed on unconstrained coordinates, including the
    /// change-of-variables Jacobian.
    pub fn log_unnormalized_unconstrained(&self, z: &[f64]) -> f64 {
        let transform = self.model.transform();
        let theta = transform.to_constrained(z);
        let base = self.log_unnormalized_posterior(&theta);
        if base == f64::NEG_INFINITY {
            return base;
        }
        base + transform.log_jacobian(z)
    }

    /// Prior, tilt, and Jacobian terms; everything in the log target except
    /// the weighted likelihood sum (which the evaluator tracks).
    fn extras(&self, theta: &[f64], z: &[f64]) -> f64 {
        let prior = self.model.log_prior(theta);
        if prior == f64::NEG_INFINITY || prior.is_nan() {
            return f64::NEG_INFINITY;
        }
        let mut acc = prior + self.model.transform().log_jacobian(z);
        for (k, t) in theta.iter().enumerate() {
            acc -= self.tilt[k] * t;
        }
        acc
    }
}

/// Everything needed to recognize (or reproduce) the run a set of draws came
/// from. Estimator inputs are cross-checked against this so draws and
/// log-likelihood values from different runs cannot be mixed silently.
#[derive(Clone, Debug, PartialEq)]
pub struct Provenance {
    pub model_id: String,
    pub n_obs: usize,
    pub weights: Vec<f64>,
    pub tilt: Vec<f64>,
    pub config: SamplerConfig,
}

impl Provenance {
    /// Placeholder provenance for draws constructed directly in memory.
    pub fn synthetic(model_id: &str, n_obs: usize, dim: usize) -> Self {
        Provenance {
            model_id: model_id.to_string(),
            n_obs,
            weights: vec![1.0; n_obs],
            tilt: vec![0.0; dim],
            config: SamplerConfig::default(),
        }
    }
}

/// Non-fatal findings from a sampling run.
#[derive(Clone, Debug, PartialEq)]
pub enum SamplerWarning {
    /// Post-burn-in acceptance rate for one coordinate left [0.1, 0.6].
    AcceptanceOutOfRange { dim: usize, rate: f64 },
    /// A coordinate's chain has (numerically) zero variance.
    DegenerateDimension { dim: usize },
}

impl std::fmt::Display for SamplerWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SamplerWarning::AcceptanceOutOfRange { dim, rate } => write!(
                f,
                "acceptance rate {rate:.3} for coordinate {dim} is outside [0.1, 0.6]"
            ),
            SamplerWarning::DegenerateDimension { dim } => {
                write!(f, "coordinate {dim} has zero variance across draws")
            }
        }
    }
}

/// Per-run diagnostics.
#[derive(Clone, Debug, PartialEq)]
pub struct Diagnostics {
    /// Post-burn-in acceptance rate per coordinate (NaN for synthetic draws).
    pub accept_rates: Vec<f64>,
    /// Effective sample size per coordinate (NaN when too few draws).
    pub ess: Vec<f64>,
    /// True where a coordinate's chain is constant.
    pub degenerate: Vec<bool>,
    pub warnings: Vec<SamplerWarning>,
}

/// Posterior draws in constrained space, stored column-major: coordinate k
/// occupies one contiguous slice of length M.
pub struct PosteriorSamples {
    draws: Vec<f64>,
    n_draws: usize,
    dim: usize,
    names: Vec<String>,
    provenance: Provenance,
    diagnostics: Diagnostics,
}

impl PosteriorSamples {
    /// Wraps pre-computed columns of draws (used by oracles and tests).
    pub fn from_columns(
        columns: Vec<Vec<f64>>,
        names: Vec<String>,
        provenance: Provenance,
    ) -> Result<Self> {
        if columns.is_empty() {
            return Err(Error::DimensionMismatch("no draw columns".into()));
        }
        if columns.len() != names.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} columns but {} names",
                columns.len(),
                names.len()
            )));
        }
        let m = columns[0].len();
        if m < 2 {
            return Err(Error::Config("need at least two draws".into()));
        }
        let mut draws = Vec::with_capacity(m * columns.len());
        for (k, col) in columns.iter().enumerate() {
            if col.len() != m {
                return Err(Error::DimensionMismatch(format!(
                    "column {k} has {} draws, column 0 has {m}",
                    col.len()
                )));
            }
            if let Some(j) = col.iter().position(|v| !v.is_finite()) {
                return Err(Error::Domain(format!(
                    "non-finite draw {j} in column {k}"
                )));
            }
            draws.extend_from_slice(col);
        }
        let dim = columns.len();
        let mut samples = PosteriorSamples {
            draws,
            n_draws: m,
            dim,
            names,
            provenance,
            diagnostics: Diagnostics {
                accept_rates: vec![f64::NAN; dim],
                ess: vec![f64::NAN; dim],
                degenerate: vec![false; dim],
                warnings: Vec::new(),
            },
        };
        if m >= 10 {
            let report = effective_sample_size(&samples)?;
            samples.diagnostics.ess = report.ess;
            samples.diagnostics.degenerate = report.degenerate;
        }
        Ok(samples)
    }

    pub fn n_draws(&self) -> usize {
        self.n_draws
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// All draws of coordinate `k`.
    pub fn col(&self, k: usize) -> &[f64] {
        &self.draws[k * self.n_draws..(k + 1) * self.n_draws]
    }

    /// The parameter vector at draw `j`.
    pub fn row(&self, j: usize) -> Vec<f64> {
        (0..self.dim).map(|k| self.draws[k * self.n_draws + j]).collect()
    }

    /// Posterior mean of every coordinate.
    pub fn mean_vector(&self) -> Vec<f64> {
        (0..self.dim).map(|k| stats::mean(self.col(k))).collect()
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn diagnostics(&self) -> &Diagnostics {
        &self.diagnostics
    }

    /// Dumps the draws as CSV (`draw_index,theta_1..theta_K`).
    pub fn write_csv(&self, path: &std::path::Path, stamp: Option<&RunStamp>) -> Result<()> {
        let mut header = vec!["draw_index".to_string()];
        for k in 1..=self.dim {
            header.push(format!("theta_{k}"));
        }
        let rows = (0..self.n_draws).map(|j| {
            let mut row = Vec::with_capacity(self.dim + 1);
            row.push(j.to_string());
            for k in 0..self.dim {
                row.push(format!("{}", self.draws[k * self.n_draws + j]));
            }
            row
        });
        crate::output::write_csv(path, stamp, &header, rows)
    }

    /// Writes the run's provenance as a key-value sidecar next to a dump.
    pub fn write_provenance(&self, path: &std::path::Path) -> Result<()> {
        use std::fmt::Write as _;
        let p = &self.provenance;
        let mut text = String::new();
        let _ = writeln!(text, "model = {}", p.model_id);
        let _ = writeln!(text, "n_obs = {}", p.n_obs);
        let _ = writeln!(text, "seed = {}", p.config.seed);
        let _ = writeln!(text, "samples = {}", p.config.samples);
        let _ = writeln!(text, "burn_in = {}", p.config.burn_in);
        let _ = writeln!(text, "thin = {}", p.config.thin);
        let _ = writeln!(text, "target_accept = {}", p.config.target_accept);
        let join = |v: &[f64]| {
            v.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(",")
        };
        let _ = writeln!(text, "weights = {}", join(&p.weights));
        let _ = writeln!(text, "tilt = {}", join(&p.tilt));
        std::fs::write(path, text)?;
        Ok(())
    }
}

/// Runs the adaptive coordinate Metropolis sampler against a tilted
/// posterior. Same config and seed always produce bit-identical draws.
pub fn sample_posterior(tp: &TiltedPosterior, cfg: &SamplerConfig) -> Result<PosteriorSamples> {
    cfg.validate()?;
    let model = tp.model();
    let dim = model.dim();
    let transform = model.transform();

    let theta0 = model.initial_point();
    let mut z = transform
        .to_unconstrained(&theta0)
        .map_err(|e| Error::Initialization(format!("initial point: {e}")))?;
    // Round-trip so theta and z stay exactly consistent from the start.
    let mut theta = transform.to_constrained(&z);

    let mut evaluator = model.make_evaluator(tp.data(), tp.weights());
    let mut cur = evaluator.reset(&theta) + tp.extras(&theta, &z);
    if !cur.is_finite() {
        return Err(Error::Initialization(format!(
            "log-posterior at the initial point {theta0:?} is {cur}"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut log_step = vec![0.0_f64; dim];
    let mut accepted = vec![0_usize; dim];
    let mut draws = vec![0.0_f64; cfg.samples * dim];

    let total_sweeps = cfg.burn_in + cfg.samples * cfg.thin;
    let mut kept = 0_usize;
    for sweep in 1..=total_sweeps {
        let adapting = sweep <= cfg.burn_in;
        for k in 0..dim {
            let noise: f64 = rng.sample(StandardNormal);
            let z_new = z[k] + log_step[k].exp() * noise;
            let t_new = transform.axes()[k].to_constrained(z_new);

            let lik_new = evaluator.propose(k, t_new);
            let (z_old, t_old) = (z[k], theta[k]);
            z[k] = z_new;
            theta[k] = t_new;
            let prop = lik_new + tp.extras(&theta, &z);

            let log_alpha = prop - cur;
            let alpha = if log_alpha >= 0.0 { 1.0 } else { log_alpha.exp() };
            let u: f64 = rng.gen();
            if u < alpha {
                evaluator.accept();
                cur = prop;
                if !adapting {
                    accepted[k] += 1;
                }
            } else {
                z[k] = z_old;
                theta[k] = t_old;
            }

            if adapting {
                // Robbins-Monro on the log step size with a diminishing
                // gain, frozen once burn-in ends.
                let gain = (sweep as f64).powf(-0.6);
                let a = if alpha.is_nan() { 0.0 } else { alpha };
                log_step[k] = (log_step[k] + gain * (a - cfg.target_accept))
                    .clamp(-12.0, 8.0);
            }
        }
        if !adapting && (sweep - cfg.burn_in) % cfg.thin == 0 {
            for k in 0..dim {
                draws[k * cfg.samples + kept] = theta[k];
            }
            kept += 1;
        }
    }
    debug_assert_eq!(kept, cfg.samples);

    let proposals = (cfg.samples * cfg.thin) as f64;
    let accept_rates: Vec<f64> =
        accepted.iter().map(|a| *a as f64 / proposals).collect();

    let mut samples = PosteriorSamples {
        draws,
        n_draws: cfg.samples,
        dim,
        names: model.param_names(),
        provenance: Provenance {
            model_id: model.id().to_string(),
            n_obs: tp.data().len(),
            weights: tp.weights().to_vec(),
            tilt: tp.tilt().to_vec(),
            config: cfg.clone(),
        },
        diagnostics: Diagnostics {
            accept_rates: accept_rates.clone(),
            ess: vec![f64::NAN; dim],
            degenerate: vec![false; dim],
            warnings: Vec::new(),
        },
    };

    if cfg.samples >= 10 {
        let report = effective_sample_size(&samples)?;
        samples.diagnostics.ess = report.ess;
        samples.diagnostics.degenerate = report.degenerate;
    }
    let mut warnings = Vec::new();
    for (k, rate) in accept_rates.iter().enumerate() {
        if !(0.1..=0.6).contains(rate) {
            warnings.push(SamplerWarning::AcceptanceOutOfRange { dim: k, rate: *rate });
        }
    }
    for (k, degenerate) in samples.diagnostics.degenerate.iter().enumerate() {
        if *degenerate {
            warnings.push(SamplerWarning::DegenerateDimension { dim: k });
        }
    }
    samples.diagnostics.warnings = warnings;
    Ok(samples)
}

/// Effective sample sizes per coordinate.
#[derive(Clone, Debug)]
pub struct EssReport {
    pub ess: Vec<f64>,
    /// True where the chain was (numerically) constant; those coordinates
    /// report ESS = M.
    pub degenerate: Vec<bool>,
}

/// Estimates the effective sample size of every coordinate by summing
/// autocorrelations in consecutive pairs and truncating at the first
/// non-positive pair sum (which is where sample noise takes over). Values
/// are clamped to (0, M].
pub fn effective_sample_size(samples: &PosteriorSamples) -> Result<EssReport> {
    let m = samples.n_draws();
    if m < 10 {
        return Err(Error::Config(format!(
            "effective sample size needs at least 10 draws, got {m}"
        )));
    }
    let mut ess = Vec::with_capacity(samples.dim());
    let mut degenerate = Vec::with_capacity(samples.dim());
    for k in 0..samples.dim() {
        let chain = samples.col(k);
        let (e, d) = geyer_ess(chain);
        ess.push(e);
        degenerate.push(d);
    }
    Ok(EssReport { ess, degenerate })
}

fn geyer_ess(chain: &[f64]) -> (f64, bool) {
    let m = chain.len();
    let mu = stats::mean(chain);
    let c0 = stats::autocovariance(chain, mu, 0);
    if c0.sqrt() <= 1e-13 * (1.0 + mu.abs()) {
        return (m as f64, true);
    }
    let max_lag = m / 2;
    let rho = |lag: usize| {
        if lag >= m {
            0.0
        } else {
            stats::autocovariance(chain, mu, lag) / c0
        }
    };
    let mut pair_total = 0.0;
    let mut lag = 0;
    while lag < max_lag {
        let head = if lag == 0 { 1.0 } else { rho(lag) };
        let pair = head + rho(lag + 1);
        if pair <= 0.0 {
            break;
        }
        pair_total += pair;
        lag += 2;
    }
    let tau = (2.0 * pair_total - 1.0).max(f64::MIN_POSITIVE);
    ((m as f64 / tau).min(m as f64), false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Dataset;
    use crate::models::{BetaBernoulliModel, WeibullModel};
    use approx::assert_relative_eq;

    fn bb_data() -> Dataset {
        let mut ys = vec![1.0; 5];
        ys.extend(vec![0.0; 5]);
        Dataset::from_responses(ys, "y").unwrap()
    }

    fn small_cfg(seed: u64) -> SamplerConfig {
        SamplerConfig { samples: 4000, burn_in: 1500, thin: 1, target_accept: 0.3, seed }
    }

    #[test]
    fn config_validation() {
        assert!(SamplerConfig { samples: 1, ..Default::default() }.validate().is_err());
        assert!(SamplerConfig { thin: 0, ..Default::default() }.validate().is_err());
        assert!(
            SamplerConfig { target_accept: 1.0, ..Default::default() }.validate().is_err()
        );
        assert!(SamplerConfig::default().validate().is_ok());
    }

    #[test]
    fn tilted_posterior_validates_inputs() {
        let model = BetaBernoulliModel::new(1.0, 2.0).unwrap();
        let data = bb_data();
        let tp = TiltedPosterior::new(&model, &data).unwrap();
        assert_eq!(tp.weights(), &[1.0; 10]);
        assert_eq!(tp.tilt(), &[0.0]);
        assert!(TiltedPosterior::new(&model, &data)
            .unwrap()
            .with_weights(vec![1.0; 3])
            .is_err());
        assert!(TiltedPosterior::new(&model, &data)
            .unwrap()
            .with_weights(vec![-1.0; 10])
            .is_err());
        assert!(TiltedPosterior::new(&model, &data)
            .unwrap()
            .with_tilt(vec![0.0, 0.0])
            .is_err());
    }

    #[test]
    fn log_density_matches_hand_formula() {
        // Five successes, five failures, Beta(1, 2): the unnormalized log
        // posterior at q is 5 ln q + 5 ln(1-q) + ln(1-q).
        let model = BetaBernoulliModel::new(1.0, 2.0).unwrap();
        let data = bb_data();
        let tp = TiltedPosterior::new(&model, &data).unwrap();
        let q: f64 = 0.3;
        assert_relative_eq!(
            tp.log_unnormalized_posterior(&[q]),
            5.0 * q.ln() + 6.0 * (1.0 - q).ln(),
            max_relative = 1e-14
        );
        assert_eq!(tp.log_unnormalized_posterior(&[1.2]), f64::NEG_INFINITY);

        // A tilt of lambda subtracts lambda * q.
        let tilted = TiltedPosterior::new(&model, &data)
            .unwrap()
            .with_tilt(vec![2.0])
            .unwrap();
        assert_relative_eq!(
            tilted.log_unnormalized_posterior(&[q]),
            5.0 * q.ln() + 6.0 * (1.0 - q).ln() - 2.0 * q,
            max_relative = 1e-14
        );
    }

    #[test]
    fn unconstrained_density_adds_jacobian() {
        let model = BetaBernoulliModel::new(1.0, 2.0).unwrap();
        let data = bb_data();
        let tp = TiltedPosterior::new(&model, &data).unwrap();
        let z = 0.4_f64;
        let q = crate::stats::sigmoid(z);
        let jac = crate::stats::log_sigmoid(z) + crate::stats::log_sigmoid(-z);
        assert_relative_eq!(
            tp.log_unnormalized_unconstrained(&[z]),
            tp.log_unnormalized_posterior(&[q]) + jac,
            max_relative = 1e-14
        );
    }

    #[test]
    fn same_seed_reproduces_bit_identical_draws() {
        let model = BetaBernoulliModel::new(1.0, 2.0).unwrap();
        let data = bb_data();
        let cfg = small_cfg(42);
        let a = {
            let tp = TiltedPosterior::new(&model, &data).unwrap();
            sample_posterior(&tp, &cfg).unwrap()
        };
        let b = {
            let tp = TiltedPosterior::new(&model, &data).unwrap();
            sample_posterior(&tp, &cfg).unwrap()
        };
        assert_eq!(a.n_draws(), 4000);
        for k in 0..a.dim() {
            for (x, y) in a.col(k).iter().zip(b.col(k)) {
                assert_eq!(x.to_bits(), y.to_bits());
            }
        }
        let c = {
            let tp = TiltedPosterior::new(&model, &data).unwrap();
            sample_posterior(&tp, &cfg.with_seed(43)).unwrap()
        };
        assert!(a.col(0).iter().zip(c.col(0)).any(|(x, y)| x != y));
    }

    #[test]
    fn beta_bernoulli_recovers_exact_moments() {
        // Posterior is Beta(6, 7): mean 6/13, variance 42 / (169 * 14).
        let model = BetaBernoulliModel::new(1.0, 2.0).unwrap();
        let data = bb_data();
        let tp = TiltedPosterior::new(&model, &data).unwrap();
        let cfg = SamplerConfig { samples: 20_000, burn_in: 4_000, ..Default::default() };
        let samples = sample_posterior(&tp, &cfg).unwrap();
        let mean = stats::mean(samples.col(0));
        let var = stats::variance_around(samples.col(0), mean);
        assert_relative_eq!(mean, 6.0 / 13.0, epsilon = 6e-3);
        assert_relative_eq!(var, 42.0 / (169.0 * 14.0), max_relative = 0.1);
        let rate = samples.diagnostics().accept_rates[0];
        assert!((0.1..=0.6).contains(&rate), "acceptance rate {rate}");
        assert!(samples.diagnostics().warnings.is_empty());
    }

    #[test]
    fn weibull_chain_stays_in_support_and_mixes() {
        let data = Dataset::from_responses(
            vec![0.32, 1.9, 0.8, 0.07, 2.5, 1.1, 0.55, 3.0, 0.21, 0.9],
            "x",
        )
        .unwrap();
        let model = WeibullModel;
        let tp = TiltedPosterior::new(&model, &data).unwrap();
        let samples = sample_posterior(&tp, &small_cfg(7)).unwrap();
        for k in 0..2 {
            assert!(samples.col(k).iter().all(|v| *v > 0.0 && v.is_finite()));
            assert!(samples.diagnostics().ess[k] > 50.0);
        }
    }

    #[test]
    fn zero_weight_matches_deleted_observation() {
        // Weighting an observation to zero must target the same posterior
        // as physically removing it; with a common seed the chains differ,
        // so compare means within Monte Carlo error.
        let model = BetaBernoulliModel::new(1.0, 2.0).unwrap();
        let data = bb_data();
        let mut w = vec![1.0; 10];
        w[2] = 0.0;
        let weighted = {
            let tp = TiltedPosterior::new(&model, &data)
                .unwrap()
                .with_weights(w)
                .unwrap();
            sample_posterior(&tp, &small_cfg(5)).unwrap()
        };
        let reduced_data = data.without(2).unwrap();
        let dropped = {
            let tp = TiltedPosterior::new(&model, &reduced_data).unwrap();
            sample_posterior(&tp, &small_cfg(5)).unwrap()
        };
        let mw = stats::mean(weighted.col(0));
        let md = stats::mean(dropped.col(0));
        // Exact value for both targets is 5/12.
        assert_relative_eq!(mw, 5.0 / 12.0, epsilon = 0.02);
        assert_relative_eq!(md, 5.0 / 12.0, epsilon = 0.02);
    }

    #[test]
    fn ess_white_noise_is_close_to_m() {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = 8000;
        let col: Vec<f64> = (0..m).map(|_| rng.gen::<f64>()).collect();
        let samples = PosteriorSamples::from_columns(
            vec![col],
            vec!["x".into()],
            Provenance::synthetic("test", 1, 1),
        )
        .unwrap();
        let ess = samples.diagnostics().ess[0];
        assert!(ess > 0.8 * m as f64, "white-noise ess = {ess}");
        assert!(ess <= m as f64);
    }

    #[test]
    fn ess_ar1_is_about_a_third_of_m() {
        // AR(1) with coefficient 0.5 has integrated autocorrelation time 3.
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let m = 40_000;
        let mut col = Vec::with_capacity(m);
        let mut x = 0.0_f64;
        for _ in 0..m {
            let e: f64 = rng.sample(StandardNormal);
            x = 0.5 * x + e;
            col.push(x);
        }
        let samples = PosteriorSamples::from_columns(
            vec![col],
            vec!["x".into()],
            Provenance::synthetic("test", 1, 1),
        )
        .unwrap();
        let ess = samples.diagnostics().ess[0];
        let expect = m as f64 / 3.0;
        assert!(
            (ess - expect).abs() < 0.25 * expect,
            "AR(1) ess = {ess}, expected about {expect}"
        );
    }

    #[test]
    fn ess_degenerate_chain_flags_and_reports_m() {
        let samples = PosteriorSamples::from_columns(
            vec![vec![2.5; 500], (0..500).map(|i| (i as f64).sin()).collect()],
            vec!["const".into(), "wave".into()],
            Provenance::synthetic("test", 1, 2),
        )
        .unwrap();
        assert!(samples.diagnostics().degenerate[0]);
        assert_eq!(samples.diagnostics().ess[0], 500.0);
        assert!(!samples.diagnostics().degenerate[1]);
    }

    #[test]
    fn ess_requires_enough_draws() {
        let samples = PosteriorSamples::from_columns(
            vec![vec![1.0, 2.0, 3.0]],
            vec!["x".into()],
            Provenance::synthetic("test", 1, 1),
        )
        .unwrap();
        assert!(effective_sample_size(&samples).is_err());
    }

    #[test]
    fn from_columns_validates() {
        let p = Provenance::synthetic("test", 1, 1);
        assert!(PosteriorSamples::from_columns(vec![], vec![], p.clone()).is_err());
        assert!(PosteriorSamples::from_columns(
            vec![vec![1.0, 2.0], vec![1.0]],
            vec!["a".into(), "b".into()],
            p.clone()
        )
        .is_err());
        assert!(PosteriorSamples::from_columns(
            vec![vec![1.0, f64::NAN]],
            vec!["a".into()],
            p
        )
        .is_err());
    }

    #[test]
    fn row_and_col_agree() {
        let samples = PosteriorSamples::from_columns(
            vec![vec![1.0, 2.0, 3.0], vec![10.0, 20.0, 30.0]],
            vec!["a".into(), "b".into()],
            Provenance::synthetic("test", 1, 2),
        )
        .unwrap();
        assert_eq!(samples.row(1), vec![2.0, 20.0]);
        assert_eq!(samples.col(1), &[10.0, 20.0, 30.0]);
        assert_eq!(samples.mean_vector(), vec![2.0, 20.0]);
    }
}
