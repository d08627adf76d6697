//! Shared domain types: label spaces, datasets, log-domain probabilities,
//! and the model-class contract every hypothesis family implements.
//!
//! All probability arithmetic is carried in the log domain with an explicit
//! negative-infinity value, so zero-probability events stay exact instead of
//! underflowing. Every type here is immutable after construction and safe to
//! share read-only across threads.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::models::Theta;

/// Errors raised by the shared domain types.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DataError {
    /// A score vector handed to [`normalize_log_scores`] was entirely -inf.
    #[error("all_zero_scores: every score is log(0); nothing to normalize")]
    AllZeroScores,
    /// A label space needs at least two labels.
    #[error("invalid_label_space: need at least 2 labels, got {0}")]
    InvalidLabelSpace(usize),
    /// A sample failed validation.
    #[error("invalid_sample: {0}")]
    InvalidSample(String),
    /// A weight was negative or non-finite.
    #[error("invalid_weight: {0}")]
    InvalidWeight(f64),
    /// A log-probability was positive or NaN.
    #[error("invalid_logprob: {0}")]
    InvalidLogProb(f64),
    /// A probability vector failed validation.
    #[error("invalid_prediction: {0}")]
    InvalidPrediction(String),
}

// ---------------------------------------------------------------------------
// Labels and samples
// ---------------------------------------------------------------------------

/// An ordered finite set of label identifiers `0..size`, size >= 2.
///
/// Labels are plain indices; iteration order is the index order, which makes
/// every downstream probability vector deterministic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelSpace {
    size: usize,
}

impl LabelSpace {
    pub fn new(size: usize) -> Result<Self, DataError> {
        if size < 2 {
            return Err(DataError::InvalidLabelSpace(size));
        }
        Ok(Self { size })
    }

    /// The binary label space `{0, 1}` used by all built-in classes.
    pub fn binary() -> Self {
        Self { size: 2 }
    }

    pub fn len(&self) -> usize {
        self.size
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Iterates the labels in their fixed order.
    pub fn iter(&self) -> impl Iterator<Item = usize> {
        0..self.size
    }

    pub fn contains(&self, y: usize) -> bool {
        y < self.size
    }
}

/// One observation: a 1-d real feature and a label index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub x: f64,
    pub y: usize,
}

impl Sample {
    /// Builds a sample, rejecting non-finite features.
    pub fn new(x: f64, y: usize) -> Result<Self, DataError> {
        if !x.is_finite() {
            return Err(DataError::InvalidSample(format!("feature {x} is not finite")));
        }
        Ok(Self { x, y })
    }
}

/// An ordered sequence of samples sharing one label space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    samples: Vec<Sample>,
    label_space: LabelSpace,
}

impl Dataset {
    pub fn new(samples: Vec<Sample>, label_space: LabelSpace) -> Result<Self, DataError> {
        for s in &samples {
            if !label_space.contains(s.y) {
                return Err(DataError::InvalidSample(format!(
                    "label {} outside label space of size {}",
                    s.y,
                    label_space.len()
                )));
            }
        }
        Ok(Self { samples, label_space })
    }

    /// Convenience constructor for binary-label data given `(x, y)` pairs.
    pub fn binary(pairs: &[(f64, usize)]) -> Result<Self, DataError> {
        let samples = pairs
            .iter()
            .map(|&(x, y)| Sample::new(x, y))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(samples, LabelSpace::binary())
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn label_space(&self) -> LabelSpace {
        self.label_space
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// A copy of this dataset with one extra sample appended.
    pub fn with_sample(&self, sample: Sample) -> Result<Self, DataError> {
        let mut samples = self.samples.clone();
        samples.push(sample);
        Self::new(samples, self.label_space)
    }

    /// A copy with the sample at `index` removed (leave-one-out splits).
    pub fn without_index(&self, index: usize) -> Self {
        let mut samples = self.samples.clone();
        samples.remove(index);
        Self { samples, label_space: self.label_space }
    }

    /// This dataset with every sample at unit weight.
    pub fn unit_weights(&self) -> WeightedDataset {
        self.uniform_weights(1.0).expect("unit weight is valid")
    }

    /// This dataset with every sample at weight `w`.
    pub fn uniform_weights(&self, w: f64) -> Result<WeightedDataset, DataError> {
        WeightedDataset::new(
            self.samples.iter().map(|&s| (s, w)).collect(),
            self.label_space,
        )
    }
}

/// Samples paired with nonnegative weights.
///
/// Weights of exactly zero are allowed and mean "present but not counted":
/// zero-weight entries contribute nothing to any likelihood and are ignored
/// when model fits derive threshold candidates. Fits report
/// [`crate::models::ModelError::EmptyData`] when the total weight is zero.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedDataset {
    entries: Vec<(Sample, f64)>,
    label_space: LabelSpace,
}

impl WeightedDataset {
    pub fn new(entries: Vec<(Sample, f64)>, label_space: LabelSpace) -> Result<Self, DataError> {
        for (s, w) in &entries {
            if !label_space.contains(s.y) {
                return Err(DataError::InvalidSample(format!(
                    "label {} outside label space of size {}",
                    s.y,
                    label_space.len()
                )));
            }
            if !w.is_finite() || *w < 0.0 {
                return Err(DataError::InvalidWeight(*w));
            }
        }
        Ok(Self { entries, label_space })
    }

    pub fn entries(&self) -> &[(Sample, f64)] {
        &self.entries
    }

    pub fn label_space(&self) -> LabelSpace {
        self.label_space
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.entries.iter().map(|(_, w)| w).sum()
    }

    /// A copy with one extra weighted sample appended.
    pub fn with_entry(&self, sample: Sample, weight: f64) -> Result<Self, DataError> {
        let mut entries = self.entries.clone();
        entries.push((sample, weight));
        Self::new(entries, self.label_space)
    }
}

// ---------------------------------------------------------------------------
// Log-domain probability
// ---------------------------------------------------------------------------

/// A log-probability: an extended real in `[-inf, 0]`.
///
/// `-inf` is a first-class value representing an exactly-zero probability.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct LogProb(f64);

impl LogProb {
    pub const ZERO_PROB: LogProb = LogProb(f64::NEG_INFINITY);
    pub const CERTAIN: LogProb = LogProb(0.0);

    pub fn new(value: f64) -> Result<Self, DataError> {
        if value.is_nan() || value > 0.0 {
            return Err(DataError::InvalidLogProb(value));
        }
        Ok(Self(value))
    }

    /// Log of a probability in `[0, 1]`; `ln 0 = -inf` is exact.
    pub fn from_prob(p: f64) -> Result<Self, DataError> {
        if !(0.0..=1.0).contains(&p) {
            return Err(DataError::InvalidLogProb(p));
        }
        Ok(Self(p.ln()))
    }

    pub fn value(&self) -> f64 {
        self.0
    }

    pub fn prob(&self) -> f64 {
        self.0.exp()
    }

    pub fn is_zero_prob(&self) -> bool {
        self.0 == f64::NEG_INFINITY
    }
}

/// A probability assignment over a label space plus its log-normalizer.
///
/// `gamma` is the log of the pre-normalization score mass. For the pNML
/// family it is the pointwise minimax regret; mixture predictors set it to
/// zero and the capacity predictor stores the channel capacity instead.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    probs: Vec<f64>,
    gamma: f64,
}

impl Prediction {
    pub fn new(probs: Vec<f64>, gamma: f64) -> Result<Self, DataError> {
        if probs.len() < 2 {
            return Err(DataError::InvalidPrediction(format!(
                "need at least 2 labels, got {}",
                probs.len()
            )));
        }
        if gamma.is_nan() {
            return Err(DataError::InvalidPrediction("gamma is NaN".into()));
        }
        let mut sum = 0.0;
        for &p in &probs {
            if !(0.0..=1.0 + 1e-12).contains(&p) {
                return Err(DataError::InvalidPrediction(format!("probability {p} out of range")));
            }
            sum += p;
        }
        if (sum - 1.0).abs() > 1e-12 {
            return Err(DataError::InvalidPrediction(format!("probabilities sum to {sum}")));
        }
        Ok(Self { probs, gamma })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, y: usize) -> f64 {
        self.probs[y]
    }

    /// Log-normalizer in nats.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }
}

/// The outcome of a model fit: the chosen parameter and the log-likelihood
/// it achieves, evaluated through the class's own `loglik` path.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub theta: Theta,
    pub achieved_loglik: LogProb,
}

// ---------------------------------------------------------------------------
// Model-class contract
// ---------------------------------------------------------------------------

/// A finite-label conditional model family.
///
/// Implementations must be stateless (or internally read-only), `loglik`
/// must be a pure function of `(theta, data)`, and `weighted_ml_fit` must
/// return a global maximizer over the class's parameter set with a
/// deterministic tie-break; no local search.
pub trait ModelClass: Send + Sync {
    fn label_space(&self) -> LabelSpace;

    /// Weighted log-likelihood of `data` under `theta`. Zero-weight entries
    /// contribute nothing, even when their probability is exactly zero.
    fn loglik(&self, theta: &Theta, data: &WeightedDataset) -> LogProb;

    /// Global maximizer of the weighted log-likelihood.
    fn weighted_ml_fit(&self, data: &WeightedDataset) -> Result<FitResult, crate::models::ModelError>;

    /// `log p_theta(y | x)` for a single point. The default routes through
    /// `loglik` on a singleton dataset; implementations override for speed.
    fn label_logprob(&self, theta: &Theta, x: f64, y: usize) -> LogProb {
        let sample = Sample::new(x, y).expect("finite feature");
        let data = WeightedDataset::new(vec![(sample, 1.0)], self.label_space())
            .expect("singleton dataset is valid");
        self.loglik(theta, &data)
    }

    /// The conditional distribution `p_theta(. | x)` as a dense vector.
    fn conditional(&self, theta: &Theta, x: f64) -> Vec<f64> {
        self.label_space()
            .iter()
            .map(|y| self.label_logprob(theta, x, y).prob())
            .collect()
    }

    /// Whether full-sequence enumeration must reject repeated feature values
    /// (true for classes whose fit partitions data by feature thresholds).
    fn requires_distinct_features(&self) -> bool {
        false
    }
}

// ---------------------------------------------------------------------------
// Log-score normalization
// ---------------------------------------------------------------------------

/// Normalizes a vector of log-scores into a probability assignment.
///
/// `probs[i] = exp(scores[i]) / sum_j exp(scores[j])` computed with
/// log-sum-exp shifting; `gamma` is the log of the pre-normalization mass.
pub fn normalize_log_scores(scores: &[LogProb]) -> Result<Prediction, DataError> {
    if scores.len() < 2 {
        return Err(DataError::InvalidPrediction(format!(
            "need at least 2 scores, got {}",
            scores.len()
        )));
    }
    let max = scores
        .iter()
        .map(|s| s.value())
        .fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return Err(DataError::AllZeroScores);
    }
    let shifted_mass: f64 = scores.iter().map(|s| (s.value() - max).exp()).sum();
    let gamma = max + shifted_mass.ln();
    let probs = scores
        .iter()
        .map(|s| (s.value() - max).exp() / shifted_mass)
        .collect();
    Prediction::new(probs, gamma)
}

/// Log-sum-exp of a slice of raw log values (all -inf yields -inf).
pub(crate) fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}
