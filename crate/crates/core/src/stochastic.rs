//! Capacity machinery for the stochastic setting: discretized model classes
//! as finite channels, alternating-maximization channel capacity with the
//! capacity-achieving prior, Bayes-mixture prediction, and the
//! likelihood-filtered refined subclass with its capacity mixture.
//!
//! The parameter set is discretized to a caller-supplied finite grid
//! throughout, turning the mixture integrals into finite sums with exactly
//! testable closed forms.

use rayon::prelude::*;
use thiserror::Error;

use crate::data::{log_sum_exp, DataError, Dataset, ModelClass, Prediction};
use crate::models::{ModelError, Theta};

/// Default iteration budget for capacity computations that only take a
/// tolerance.
pub const DEFAULT_MAX_ITER: usize = 10_000;

/// Errors raised by the capacity and mixture operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum StochasticError {
    /// The iteration budget ran out before the capacity gap closed; the
    /// best-so-far result is carried along with the recorded gap.
    #[error(
        "not_converged: capacity gap {gap:.3e} above tolerance after {iters} iterations",
        gap = result.gap,
        iters = result.iterations
    )]
    NotConverged { result: Box<CapacityResult> },
    /// Every grid point assigns the training data zero probability.
    #[error("zero_evidence: no grid parameter gives the training positive probability")]
    ZeroEvidence,
    /// No grid point clears the likelihood floor.
    #[error("empty_subclass: no grid parameter reaches the likelihood floor")]
    EmptySubclass,
    /// A channel failed validation.
    #[error("invalid_channel: {0}")]
    InvalidChannel(String),
    /// A prior or floor value failed validation.
    #[error("invalid_input: {0}")]
    InvalidInput(String),
    /// `K^(N+1)` exceeds the enumeration guard.
    #[error("too_large: {labels}^{len} label sequences exceed the 2^20 enumeration guard")]
    TooLarge { labels: usize, len: usize },
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

// ---------------------------------------------------------------------------
// Channels
// ---------------------------------------------------------------------------

/// A discrete memoryless channel from a parameter grid to a finite output
/// alphabet: row m is the output distribution of parameter m.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    params: Vec<Theta>,
    rows: Vec<Vec<f64>>,
}

impl Channel {
    pub fn new(params: Vec<Theta>, rows: Vec<Vec<f64>>) -> Result<Self, StochasticError> {
        if rows.is_empty() || params.len() != rows.len() {
            return Err(StochasticError::InvalidChannel(format!(
                "{} parameters with {} rows",
                params.len(),
                rows.len()
            )));
        }
        let width = rows[0].len();
        if width < 2 {
            return Err(StochasticError::InvalidChannel(format!(
                "output alphabet of size {width}"
            )));
        }
        for (m, row) in rows.iter().enumerate() {
            if row.len() != width {
                return Err(StochasticError::InvalidChannel(format!(
                    "row {m} has {} entries, expected {width}",
                    row.len()
                )));
            }
            // Kahan summation: enumeration-built rows can have ~2^20 entries.
            let mut sum = 0.0;
            let mut comp = 0.0;
            for &p in row {
                if !(0.0..=1.0).contains(&p) {
                    return Err(StochasticError::InvalidChannel(format!(
                        "row {m} has entry {p} outside [0,1]"
                    )));
                }
                let y = p - comp;
                let t = sum + y;
                comp = (t - sum) - y;
                sum = t;
            }
            if (sum - 1.0).abs() > 1e-12 {
                return Err(StochasticError::InvalidChannel(format!(
                    "row {m} sums to {sum}"
                )));
            }
        }
        Ok(Self { params, rows })
    }

    /// Binary symmetric channel with the given crossover probability.
    pub fn binary_symmetric(crossover: f64) -> Result<Self, StochasticError> {
        if !(0.0..=1.0).contains(&crossover) {
            return Err(StochasticError::InvalidInput(format!(
                "crossover {crossover} outside [0,1]"
            )));
        }
        let params = vec![
            Theta::Bernoulli(crate::models::BernoulliTheta::new(crossover)?),
            Theta::Bernoulli(crate::models::BernoulliTheta::new(1.0 - crossover)?),
        ];
        let rows = vec![
            vec![1.0 - crossover, crossover],
            vec![crossover, 1.0 - crossover],
        ];
        Self::new(params, rows)
    }

    pub fn params(&self) -> &[Theta] {
        &self.params
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn input_count(&self) -> usize {
        self.rows.len()
    }

    pub fn output_count(&self) -> usize {
        self.rows[0].len()
    }
}

/// Result of a capacity computation: the lower capacity bound, the prior
/// achieving it, and the final upper-minus-lower gap.
#[derive(Debug, Clone, PartialEq)]
pub struct CapacityResult {
    pub capacity_nats: f64,
    pub prior: Vec<f64>,
    pub iterations: usize,
    pub gap: f64,
}

/// Channel capacity by alternating maximization.
///
/// Each iteration computes the output marginal `q` under the current prior,
/// the per-row divergences `D(row_m || q)`, the classical lower bound
/// `sum_m w_m D_m` and upper bound `max_m D_m`, and reweights
/// `w_m <- w_m exp(D_m)`. The lower bound is nondecreasing across iterations;
/// on exit the true capacity lies within `gap` above the returned value.
pub fn ba_capacity(
    channel: &Channel,
    tol: f64,
    max_iter: usize,
) -> Result<CapacityResult, StochasticError> {
    if !tol.is_finite() || tol <= 0.0 {
        return Err(StochasticError::InvalidInput(format!("tolerance {tol} must be positive")));
    }
    if max_iter == 0 {
        return Err(StochasticError::InvalidInput("max_iter must be at least 1".into()));
    }
    let m = channel.input_count();
    let width = channel.output_count();
    let mut prior = vec![1.0 / m as f64; m];
    let mut divergences = vec![0.0; m];

    let mut lower = 0.0;
    let mut gap = f64::INFINITY;
    for iteration in 1..=max_iter {
        let mut marginal = vec![0.0; width];
        for (w, row) in prior.iter().zip(channel.rows()) {
            for (q, &p) in marginal.iter_mut().zip(row) {
                *q += w * p;
            }
        }
        let mut upper = f64::NEG_INFINITY;
        lower = 0.0;
        for (idx, row) in channel.rows().iter().enumerate() {
            let mut d = 0.0;
            for (&p, &q) in row.iter().zip(&marginal) {
                if p > 0.0 {
                    d += p * (p / q).ln();
                }
            }
            divergences[idx] = d;
            lower += prior[idx] * d;
            upper = upper.max(d);
        }
        gap = upper - lower;
        if gap <= tol {
            return Ok(CapacityResult {
                capacity_nats: lower.max(0.0),
                prior,
                iterations: iteration,
                gap,
            });
        }

        let shift = upper;
        let mut total = 0.0;
        for (w, &d) in prior.iter_mut().zip(&divergences) {
            *w *= (d - shift).exp();
            total += *w;
        }
        for w in prior.iter_mut() {
            *w /= total;
        }
    }

    Err(StochasticError::NotConverged {
        result: Box::new(CapacityResult {
            capacity_nats: lower.max(0.0),
            prior,
            iterations: max_iter,
            gap,
        }),
    })
}

/// Builds the channel from a parameter grid to full label sequences over the
/// given features: row m enumerates `p_theta_m(y^(N+1) | x^(N+1))`.
pub fn build_learning_channel(
    class: &dyn ModelClass,
    grid: &[Theta],
    features: &[f64],
) -> Result<Channel, StochasticError> {
    if grid.is_empty() {
        return Err(StochasticError::InvalidInput("parameter grid is empty".into()));
    }
    if features.is_empty() {
        return Err(StochasticError::InvalidInput("feature sequence is empty".into()));
    }
    let labels = class.label_space().len();
    let len = features.len();
    let total = (labels as u64)
        .checked_pow(len as u32)
        .filter(|&t| t <= crate::sequence::ENUMERATION_GUARD)
        .ok_or(StochasticError::TooLarge { labels, len })? as usize;

    // Rows are independent; the per-row enumeration order is fixed, so the
    // parallel fill is deterministic.
    let rows = grid
        .par_iter()
        .map(|theta| {
            (0..total)
                .map(|code| {
                    let mut log_p = 0.0;
                    let mut rest = code;
                    for t in (0..len).rev() {
                        let y = rest % labels;
                        rest /= labels;
                        log_p += class.label_logprob(theta, features[t], y).value();
                    }
                    log_p.exp()
                })
                .collect()
        })
        .collect();
    Channel::new(grid.to_vec(), rows)
}

// ---------------------------------------------------------------------------
// Mixtures and the refined subclass
// ---------------------------------------------------------------------------

fn validate_prior(grid: &[Theta], prior: &[f64]) -> Result<(), StochasticError> {
    if grid.is_empty() {
        return Err(StochasticError::InvalidInput("parameter grid is empty".into()));
    }
    if prior.len() != grid.len() {
        return Err(StochasticError::InvalidInput(format!(
            "prior of length {} over grid of length {}",
            prior.len(),
            grid.len()
        )));
    }
    if prior.iter().any(|&w| !(0.0..=1.0).contains(&w)) {
        return Err(StochasticError::InvalidInput("prior weight outside [0,1]".into()));
    }
    let sum: f64 = prior.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(StochasticError::InvalidInput(format!("prior sums to {sum}")));
    }
    Ok(())
}

/// Bayes-mixture prediction over a parameter grid: posterior weights from the
/// training likelihoods, predictive as the posterior-weighted conditional.
/// The returned `gamma` is 0; a mixture has no minimax-regret normalizer.
pub fn bayes_mixture_predict(
    class: &dyn ModelClass,
    grid: &[Theta],
    prior: &[f64],
    train: &Dataset,
    x: f64,
) -> Result<Prediction, StochasticError> {
    validate_prior(grid, prior)?;
    let train_w = train.unit_weights();
    let log_posts: Vec<f64> = grid
        .iter()
        .zip(prior)
        .map(|(theta, &w)| w.ln() + class.loglik(theta, &train_w).value())
        .collect();
    let evidence = log_sum_exp(&log_posts);
    if evidence == f64::NEG_INFINITY {
        return Err(StochasticError::ZeroEvidence);
    }

    let labels = class.label_space().len();
    let mut probs = vec![0.0; labels];
    for (theta, &log_post) in grid.iter().zip(&log_posts) {
        let post = (log_post - evidence).exp();
        if post == 0.0 {
            continue;
        }
        for (y, p) in probs.iter_mut().enumerate() {
            *p += post * class.label_logprob(theta, x, y).prob();
        }
    }
    Ok(Prediction::new(probs, 0.0)?)
}

/// Grid parameters whose training likelihood is at least `c`, in grid order.
pub fn refined_subclass(
    class: &dyn ModelClass,
    grid: &[Theta],
    train: &Dataset,
    c: f64,
) -> Result<Vec<Theta>, StochasticError> {
    if !(0.0..=1.0).contains(&c) {
        return Err(StochasticError::InvalidInput(format!("likelihood floor {c} outside [0,1]")));
    }
    if grid.is_empty() {
        return Err(StochasticError::InvalidInput("parameter grid is empty".into()));
    }
    let floor = c.ln();
    let train_w = train.unit_weights();
    let kept: Vec<Theta> = grid
        .iter()
        .filter(|theta| class.loglik(theta, &train_w).value() >= floor)
        .cloned()
        .collect();
    if kept.is_empty() {
        return Err(StochasticError::EmptySubclass);
    }
    Ok(kept)
}

/// The refined-class minimax predictor for a single test point: filters the
/// grid by the likelihood floor, computes the capacity of the parameter-to-
/// test-label channel at `x`, and mixes under the capacity-achieving prior.
/// The returned `gamma` carries the capacity in nats.
pub fn refined_capacity_mixture(
    class: &dyn ModelClass,
    grid: &[Theta],
    train: &Dataset,
    c: f64,
    x: f64,
    tol: f64,
) -> Result<Prediction, StochasticError> {
    let subclass = refined_subclass(class, grid, train, c)?;
    let rows: Vec<Vec<f64>> = subclass
        .iter()
        .map(|theta| class.conditional(theta, x))
        .collect();
    let channel = Channel::new(subclass, rows)?;
    let capacity = ba_capacity(&channel, tol, DEFAULT_MAX_ITER)?;

    let labels = class.label_space().len();
    let mut probs = vec![0.0; labels];
    for (w, row) in capacity.prior.iter().zip(channel.rows()) {
        for (p, &r) in probs.iter_mut().zip(row) {
            *p += w * r;
        }
    }
    Ok(Prediction::new(probs, capacity.capacity_nats)?)
}
