//! Exactly-solvable hypothesis classes over binary labels and 1-d features:
//! a feature-ignoring Bernoulli class, the single-threshold (barrier) class,
//! and its k-segment generalization.
//!
//! Every fit is a global maximizer found by exhaustive search over threshold
//! candidates with closed-form per-side label fractions; there is no local
//! search and no smoothing anywhere in the ML path. Candidate thresholds are
//! the midpoints of consecutive distinct feature values among positive-weight
//! samples, plus `-inf` and `+inf` sentinels: the likelihood depends on a
//! threshold only through the induced partition, and this set hits every
//! partition exactly once. Ties break toward the smallest candidate index.

use itertools::Itertools;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{FitResult, LabelSpace, LogProb, ModelClass, WeightedDataset};

/// Errors raised by model fits.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    /// Every weight in the dataset is zero; nothing constrains the fit.
    #[error("empty_data: total weight is zero")]
    EmptyData,
    /// Segment fits are exponential in k and capped at 3.
    #[error("k_too_large: segment count {0} exceeds the supported maximum 3")]
    KTooLarge(usize),
    /// A parameter value failed validation.
    #[error("invalid_theta: {0}")]
    InvalidTheta(String),
}

// ---------------------------------------------------------------------------
// Parameters
// ---------------------------------------------------------------------------

/// Parameter of the Bernoulli class: the probability of label 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BernoulliTheta {
    pub p: f64,
}

impl BernoulliTheta {
    pub fn new(p: f64) -> Result<Self, ModelError> {
        if !(0.0..=1.0).contains(&p) {
            return Err(ModelError::InvalidTheta(format!("bernoulli p {p} outside [0,1]")));
        }
        Ok(Self { p })
    }
}

/// Parameter of the threshold class: `P(y=1|x) = p1` when `x <= b`, else `p2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdTheta {
    pub b: f64,
    pub p1: f64,
    pub p2: f64,
}

impl ThresholdTheta {
    pub fn new(b: f64, p1: f64, p2: f64) -> Result<Self, ModelError> {
        if b.is_nan() {
            return Err(ModelError::InvalidTheta("threshold b is NaN".into()));
        }
        for p in [p1, p2] {
            if !(0.0..=1.0).contains(&p) {
                return Err(ModelError::InvalidTheta(format!("threshold prob {p} outside [0,1]")));
            }
        }
        Ok(Self { b, p1, p2 })
    }

    /// Probability of label 1 at feature `x`.
    pub fn prob1(&self, x: f64) -> f64 {
        if x <= self.b {
            self.p1
        } else {
            self.p2
        }
    }
}

/// Parameter of the k-segment class: `boundaries` split the real line into
/// k+1 segments, each with its own probability of label 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentTheta {
    pub boundaries: Vec<f64>,
    pub segment_probs: Vec<f64>,
}

impl SegmentTheta {
    pub fn new(boundaries: Vec<f64>, segment_probs: Vec<f64>) -> Result<Self, ModelError> {
        if segment_probs.len() != boundaries.len() + 1 {
            return Err(ModelError::InvalidTheta(format!(
                "{} boundaries need {} segment probs, got {}",
                boundaries.len(),
                boundaries.len() + 1,
                segment_probs.len()
            )));
        }
        if boundaries.iter().any(|b| b.is_nan()) {
            return Err(ModelError::InvalidTheta("boundary is NaN".into()));
        }
        for pair in boundaries.windows(2) {
            if pair[0] >= pair[1] {
                return Err(ModelError::InvalidTheta(
                    "boundaries must be strictly increasing".into(),
                ));
            }
        }
        for &p in &segment_probs {
            if !(0.0..=1.0).contains(&p) {
                return Err(ModelError::InvalidTheta(format!("segment prob {p} outside [0,1]")));
            }
        }
        Ok(Self { boundaries, segment_probs })
    }

    /// Probability of label 1 at feature `x`. Segment j covers
    /// `boundaries[j-1] < x <= boundaries[j]`.
    pub fn prob1(&self, x: f64) -> f64 {
        let seg = self.boundaries.partition_point(|&b| b < x);
        self.segment_probs[seg]
    }
}

/// A parameter value of one of the built-in classes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum Theta {
    Bernoulli(BernoulliTheta),
    Threshold(ThresholdTheta),
    Segment(SegmentTheta),
}

impl Theta {
    /// Probability of label 1 at `x` for whichever variant this is.
    pub fn prob1(&self, x: f64) -> f64 {
        match self {
            Theta::Bernoulli(t) => t.p,
            Theta::Threshold(t) => t.prob1(x),
            Theta::Segment(t) => t.prob1(x),
        }
    }
}

// ---------------------------------------------------------------------------
// Shared fit machinery
// ---------------------------------------------------------------------------

/// Entries sorted by feature with weight prefix sums, plus the candidate
/// threshold list and each candidate's cut position.
struct ThresholdScan {
    /// cum_w[i] = total weight of the first i sorted entries.
    cum_w: Vec<f64>,
    /// cum_w1[i] = total label-1 weight of the first i sorted entries.
    cum_w1: Vec<f64>,
    /// Candidate thresholds in ascending order: -inf, midpoints, +inf.
    candidates: Vec<f64>,
    /// cuts[c] = number of sorted entries with x <= candidates[c].
    cuts: Vec<usize>,
    /// Largest feature value carrying positive weight.
    max_pos_x: f64,
}

impl ThresholdScan {
    fn build(data: &WeightedDataset) -> Result<Self, ModelError> {
        if data.total_weight() <= 0.0 {
            return Err(ModelError::EmptyData);
        }
        let mut entries: Vec<(f64, usize, f64)> =
            data.entries().iter().map(|&(s, w)| (s.x, s.y, w)).collect();
        entries.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("features are finite"));

        let n = entries.len();
        let mut cum_w = vec![0.0; n + 1];
        let mut cum_w1 = vec![0.0; n + 1];
        for (i, &(_, y, w)) in entries.iter().enumerate() {
            cum_w[i + 1] = cum_w[i] + w;
            cum_w1[i + 1] = cum_w1[i] + if y == 1 { w } else { 0.0 };
        }

        // Distinct feature values among positive-weight entries only:
        // zero-weight samples never shape the candidate set.
        let mut distinct: Vec<f64> = Vec::new();
        for &(x, _, w) in &entries {
            if w > 0.0 && distinct.last() != Some(&x) {
                distinct.push(x);
            }
        }
        let mut candidates = Vec::with_capacity(distinct.len() + 1);
        candidates.push(f64::NEG_INFINITY);
        for pair in distinct.windows(2) {
            candidates.push((pair[0] + pair[1]) / 2.0);
        }
        candidates.push(f64::INFINITY);

        let xs: Vec<f64> = entries.iter().map(|e| e.0).collect();
        let cuts = candidates
            .iter()
            .map(|&b| xs.partition_point(|&x| x <= b))
            .collect();
        let max_pos_x = *distinct.last().expect("positive total weight implies a positive entry");

        Ok(Self { cum_w, cum_w1, candidates, cuts, max_pos_x })
    }

    /// (total weight, label-1 weight) of sorted entries `lo..hi`.
    fn segment_weights(&self, lo: usize, hi: usize) -> (f64, f64) {
        let w = self.cum_w[hi] - self.cum_w[lo];
        let w1 = (self.cum_w1[hi] - self.cum_w1[lo]).clamp(0.0, w.max(0.0));
        (w.max(0.0), w1)
    }

    /// Extends the candidate list so at least `k` boundaries can be chosen,
    /// by inserting values above every positive-weight feature (they induce
    /// empty trailing segments, never new partitions).
    fn padded_candidates(&self, k: usize) -> Vec<f64> {
        let mut cands = self.candidates.clone();
        let mut next = self.max_pos_x + 1.0;
        while cands.len() < k {
            cands.insert(cands.len() - 1, next);
            next += 1.0;
        }
        cands
    }
}

/// ML probability of a segment: the weighted label-1 fraction, or the
/// unconstrained-parameter value 0.5 when the segment carries no weight.
fn segment_prob(w1: f64, w: f64) -> f64 {
    if w > 0.0 {
        (w1 / w).clamp(0.0, 1.0)
    } else {
        0.5
    }
}

/// Maximized weighted log-likelihood of one segment under its ML fraction,
/// with the 0 ln 0 = 0 convention.
fn segment_max_loglik(w1: f64, w: f64) -> f64 {
    if w <= 0.0 {
        return 0.0;
    }
    let w0 = (w - w1).max(0.0);
    let mut total = 0.0;
    if w1 > 0.0 {
        total += w1 * (w1 / w).ln();
    }
    if w0 > 0.0 {
        total += w0 * (w0 / w).ln();
    }
    total
}

/// Exhaustive segment fit: scans all strictly-increasing k-subsets of the
/// candidate thresholds in lexicographic order and keeps the first maximum.
/// Returns boundary values, per-segment probabilities, and cut positions.
fn best_segmentation(
    scan: &ThresholdScan,
    k: usize,
) -> (Vec<f64>, Vec<f64>) {
    let candidates = scan.padded_candidates(k);
    let cuts: Vec<usize> = if candidates.len() == scan.candidates.len() {
        scan.cuts.clone()
    } else {
        // Padded values sit above every feature: they cut at the end.
        let n = scan.cum_w.len() - 1;
        let mut cuts = scan.cuts.clone();
        while cuts.len() < candidates.len() {
            cuts.insert(cuts.len() - 1, n);
        }
        cuts
    };
    let n = scan.cum_w.len() - 1;

    let mut best_score = f64::NEG_INFINITY;
    let mut best: Option<(Vec<f64>, Vec<f64>)> = None;
    for combo in (0..candidates.len()).combinations(k) {
        let mut score = 0.0;
        let mut probs = Vec::with_capacity(k + 1);
        let mut lo = 0;
        for &ci in combo.iter().chain(std::iter::once(&usize::MAX)) {
            let hi = if ci == usize::MAX { n } else { cuts[ci] };
            let (w, w1) = scan.segment_weights(lo, hi);
            score += segment_max_loglik(w1, w);
            probs.push(segment_prob(w1, w));
            lo = hi;
        }
        if score > best_score {
            best_score = score;
            best = Some((combo.iter().map(|&ci| candidates[ci]).collect(), probs));
        }
    }
    best.expect("at least one boundary placement exists")
}

/// Per-sample weighted log-likelihood where `prob1(x)` gives each sample's
/// label-1 probability. Zero-weight entries are skipped entirely.
fn pointwise_loglik(data: &WeightedDataset, prob1: impl Fn(f64) -> f64) -> LogProb {
    let mut total = 0.0;
    for &(s, w) in data.entries() {
        if w == 0.0 {
            continue;
        }
        let p1 = prob1(s.x);
        let p = if s.y == 1 { p1 } else { 1.0 - p1 };
        if p <= 0.0 {
            return LogProb::ZERO_PROB;
        }
        total += w * p.ln();
    }
    LogProb::new(total.min(0.0)).expect("weighted sum of log-probs is nonpositive")
}

// ---------------------------------------------------------------------------
// Bernoulli class
// ---------------------------------------------------------------------------

/// The feature-ignoring coin-flip class over labels `{0, 1}`.
#[derive(Debug, Clone, Copy, Default)]
pub struct BernoulliClass;

impl ModelClass for BernoulliClass {
    fn label_space(&self) -> LabelSpace {
        LabelSpace::binary()
    }

    fn loglik(&self, theta: &Theta, data: &WeightedDataset) -> LogProb {
        let t = match theta {
            Theta::Bernoulli(t) => t,
            other => panic!("BernoulliClass got {other:?}"),
        };
        pointwise_loglik(data, |_| t.p)
    }

    fn weighted_ml_fit(&self, data: &WeightedDataset) -> Result<FitResult, ModelError> {
        let total = data.total_weight();
        if total <= 0.0 {
            return Err(ModelError::EmptyData);
        }
        let w1: f64 = data
            .entries()
            .iter()
            .filter(|(s, _)| s.y == 1)
            .map(|(_, w)| w)
            .sum();
        let theta = Theta::Bernoulli(BernoulliTheta::new((w1 / total).clamp(0.0, 1.0))?);
        let achieved_loglik = self.loglik(&theta, data);
        Ok(FitResult { theta, achieved_loglik })
    }

    fn label_logprob(&self, theta: &Theta, _x: f64, y: usize) -> LogProb {
        let p1 = match theta {
            Theta::Bernoulli(t) => t.p,
            other => panic!("BernoulliClass got {other:?}"),
        };
        let p = if y == 1 { p1 } else { 1.0 - p1 };
        LogProb::from_prob(p).expect("probability in range")
    }
}

// ---------------------------------------------------------------------------
// Threshold class
// ---------------------------------------------------------------------------

/// The 1-d barrier class: one threshold, one label-1 probability per side.
#[derive(Debug, Clone, Copy, Default)]
pub struct ThresholdClass;

impl ModelClass for ThresholdClass {
    fn label_space(&self) -> LabelSpace {
        LabelSpace::binary()
    }

    fn loglik(&self, theta: &Theta, data: &WeightedDataset) -> LogProb {
        let t = match theta {
            Theta::Threshold(t) => t,
            other => panic!("ThresholdClass got {other:?}"),
        };
        pointwise_loglik(data, |x| t.prob1(x))
    }

    fn weighted_ml_fit(&self, data: &WeightedDataset) -> Result<FitResult, ModelError> {
        let scan = ThresholdScan::build(data)?;
        let (bounds, probs) = best_segmentation(&scan, 1);
        let theta = Theta::Threshold(ThresholdTheta::new(bounds[0], probs[0], probs[1])?);
        let achieved_loglik = self.loglik(&theta, data);
        Ok(FitResult { theta, achieved_loglik })
    }

    fn label_logprob(&self, theta: &Theta, x: f64, y: usize) -> LogProb {
        let p1 = match theta {
            Theta::Threshold(t) => t.prob1(x),
            other => panic!("ThresholdClass got {other:?}"),
        };
        let p = if y == 1 { p1 } else { 1.0 - p1 };
        LogProb::from_prob(p).expect("probability in range")
    }

    fn requires_distinct_features(&self) -> bool {
        true
    }
}

// ---------------------------------------------------------------------------
// Segment class
// ---------------------------------------------------------------------------

/// The k-threshold generalization of the barrier class. `k = 0` reduces to
/// [`BernoulliClass`], `k = 1` to [`ThresholdClass`]. Fit cost grows as
/// `O(candidates^k)`, so k is capped at 3.
#[derive(Debug, Clone, Copy)]
pub struct SegmentClass {
    k: usize,
}

impl SegmentClass {
    pub const MAX_K: usize = 3;

    pub fn new(k: usize) -> Result<Self, ModelError> {
        if k > Self::MAX_K {
            return Err(ModelError::KTooLarge(k));
        }
        Ok(Self { k })
    }

    pub fn k(&self) -> usize {
        self.k
    }
}

impl ModelClass for SegmentClass {
    fn label_space(&self) -> LabelSpace {
        LabelSpace::binary()
    }

    fn loglik(&self, theta: &Theta, data: &WeightedDataset) -> LogProb {
        let t = match theta {
            Theta::Segment(t) => t,
            other => panic!("SegmentClass got {other:?}"),
        };
        pointwise_loglik(data, |x| t.prob1(x))
    }

    fn weighted_ml_fit(&self, data: &WeightedDataset) -> Result<FitResult, ModelError> {
        let scan = ThresholdScan::build(data)?;
        let (bounds, probs) = best_segmentation(&scan, self.k);
        let theta = Theta::Segment(SegmentTheta::new(bounds, probs)?);
        let achieved_loglik = self.loglik(&theta, data);
        Ok(FitResult { theta, achieved_loglik })
    }

    fn label_logprob(&self, theta: &Theta, x: f64, y: usize) -> LogProb {
        let p1 = match theta {
            Theta::Segment(t) => t.prob1(x),
            other => panic!("SegmentClass got {other:?}"),
        };
        let p = if y == 1 { p1 } else { 1.0 - p1 };
        LogProb::from_prob(p).expect("probability in range")
    }

    fn requires_distinct_features(&self) -> bool {
        self.k >= 1
    }
}
