//! Full-sequence normalized maximum likelihood by exhaustive label-sequence
//! enumeration, the sequential predictor it induces, and the two computable
//! upper bounds on the leave-one-out minimax regret.
//!
//! Enumeration is exact and guarded at `K^(N+1) <= 2^20` sequences; there is
//! deliberately no sampling fallback, since the bounds are desk-scale
//! artifacts that approximation would silently corrupt. Sequences are indexed
//! big-endian (the first label is the most significant digit) so that all
//! extensions of a prefix form one contiguous index block.

use rayon::prelude::*;
use thiserror::Error;

use crate::data::{log_sum_exp, DataError, Dataset, LogProb, ModelClass, Sample, WeightedDataset};
use crate::models::ModelError;
use crate::pnml::{pnml_predict, PnmlError};

/// Hard cap on the number of enumerated label sequences.
pub const ENUMERATION_GUARD: u64 = 1 << 20;

/// Errors raised by sequence-level operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SequenceError {
    /// `K^(N+1)` exceeds the enumeration guard.
    #[error("too_large: {labels}^{len} label sequences exceed the 2^20 enumeration guard")]
    TooLarge { labels: usize, len: usize },
    /// The class partitions data by feature thresholds, which requires all
    /// features in the sequence to be distinct.
    #[error("duplicate_features: this model class requires all features to be distinct")]
    DuplicateFeatures,
    /// A conditioning prefix has zero marginal probability.
    #[error("zero_prefix_mass: the prefix has zero probability under the sequence NML")]
    ZeroPrefixMass,
    /// The feature sequence is empty or a prefix/label is out of range.
    #[error("invalid_input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Pnml(#[from] PnmlError),
}

/// The NML assignment over entire label sequences for a fixed feature vector.
#[derive(Debug, Clone)]
pub struct SequenceNml {
    features: Vec<f64>,
    labels: usize,
    /// Maximized joint log-likelihood per label sequence, indexed big-endian.
    ml_logliks: Vec<f64>,
    /// Log of the sum of maximized likelihoods over all sequences.
    log_normalizer: f64,
}

impl SequenceNml {
    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn label_count(&self) -> usize {
        self.labels
    }

    /// Log of the sum over all label sequences of their maximized likelihoods.
    pub fn log_normalizer(&self) -> f64 {
        self.log_normalizer
    }

    fn encode(&self, labels: &[usize]) -> Result<usize, SequenceError> {
        if labels.len() > self.len() {
            return Err(SequenceError::InvalidInput(format!(
                "sequence of length {} exceeds feature count {}",
                labels.len(),
                self.len()
            )));
        }
        let mut code = 0usize;
        for &y in labels {
            if y >= self.labels {
                return Err(SequenceError::InvalidInput(format!("label {y} out of range")));
            }
            code = code * self.labels + y;
        }
        Ok(code)
    }

    /// Log-probability the sequence NML assigns to a full label sequence.
    pub fn seq_logprob(&self, labels: &[usize]) -> Result<LogProb, SequenceError> {
        if labels.len() != self.len() {
            return Err(SequenceError::InvalidInput(format!(
                "expected {} labels, got {}",
                self.len(),
                labels.len()
            )));
        }
        let code = self.encode(labels)?;
        Ok(LogProb::new(self.ml_logliks[code] - self.log_normalizer)
            .expect("normalized log-likelihood is nonpositive"))
    }

    /// Log of the marginal NML mass of all sequences extending `prefix`.
    fn prefix_log_mass(&self, prefix: &[usize]) -> Result<f64, SequenceError> {
        let code = self.encode(prefix)?;
        let block = self.labels.pow((self.len() - prefix.len()) as u32);
        let lo = code * block;
        let mass = log_sum_exp(&self.ml_logliks[lo..lo + block]);
        Ok(mass - self.log_normalizer)
    }

    /// The NML-induced sequential predictor: the distribution of the next
    /// label given an observed prefix, by marginal summation over suffixes.
    pub fn sequential_predict(&self, prefix: &[usize]) -> Result<Vec<f64>, SequenceError> {
        if prefix.len() >= self.len() {
            return Err(SequenceError::InvalidInput(format!(
                "prefix of length {} leaves no label to predict (sequence length {})",
                prefix.len(),
                self.len()
            )));
        }
        let denom = self.prefix_log_mass(prefix)?;
        if denom == f64::NEG_INFINITY {
            return Err(SequenceError::ZeroPrefixMass);
        }
        let mut extended = prefix.to_vec();
        extended.push(0);
        (0..self.labels)
            .map(|a| {
                *extended.last_mut().expect("non-empty") = a;
                Ok((self.prefix_log_mass(&extended)? - denom).exp())
            })
            .collect()
    }
}

/// Enumerates every label sequence over `features`, fits the class jointly to
/// each, and normalizes the maximized likelihoods into the sequence NML.
pub fn nml_full(class: &dyn ModelClass, features: &[f64]) -> Result<SequenceNml, SequenceError> {
    if features.is_empty() {
        return Err(SequenceError::InvalidInput("feature sequence is empty".into()));
    }
    let labels = class.label_space().len();
    let len = features.len();
    let total = (labels as u64)
        .checked_pow(len as u32)
        .filter(|&t| t <= ENUMERATION_GUARD)
        .ok_or(SequenceError::TooLarge { labels, len })? as usize;

    if class.requires_distinct_features() {
        let mut sorted = features.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite features"));
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(SequenceError::DuplicateFeatures);
        }
    }

    let samples = features
        .iter()
        .map(|&x| Sample::new(x, 0))
        .collect::<Result<Vec<_>, _>>()?;
    let space = class.label_space();

    // Independent per-sequence fits; the reduction below is sequential so the
    // result does not depend on thread scheduling.
    let ml_logliks = (0..total)
        .into_par_iter()
        .map(|code| {
            let mut entries = Vec::with_capacity(len);
            let mut rest = code;
            for t in (0..len).rev() {
                let mut s = samples[t];
                s.y = rest % labels;
                rest /= labels;
                entries.push((s, 1.0));
            }
            entries.reverse();
            let data = WeightedDataset::new(entries, space)?;
            Ok(class.weighted_ml_fit(&data)?.achieved_loglik.value())
        })
        .collect::<Result<Vec<f64>, SequenceError>>()?;

    let log_normalizer = log_sum_exp(&ml_logliks);
    Ok(SequenceNml { features: features.to_vec(), labels, ml_logliks, log_normalizer })
}

/// Per-symbol NML regret bound on the leave-one-out minimax value: the log
/// Shtarkov normalizer of the whole sequence divided by its length.
pub fn nml_loo_bound(class: &dyn ModelClass, data: &Dataset) -> Result<f64, SequenceError> {
    let features: Vec<f64> = data.samples().iter().map(|s| s.x).collect();
    let seq = nml_full(class, &features)?;
    Ok(seq.log_normalizer() / data.len() as f64)
}

/// Empirical leave-one-out regret of the pNML: the average, over every choice
/// of held-out point, of the pointwise regret with the rest as training.
pub fn pnml_loo_regret(class: &dyn ModelClass, data: &Dataset) -> Result<f64, SequenceError> {
    if data.len() < 2 {
        return Err(SequenceError::InvalidInput(format!(
            "leave-one-out needs at least 2 samples, got {}",
            data.len()
        )));
    }
    let mut total = 0.0;
    for t in 0..data.len() {
        let train = data.without_index(t);
        let x = data.samples()[t].x;
        total += pnml_predict(class, &train, x)?.gamma();
    }
    Ok(total / data.len() as f64)
}
