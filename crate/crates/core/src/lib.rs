//! Universal learners for finite-label hypothesis classes under log-loss.
//!
//! The central object is the predictive normalized maximum likelihood (pNML)
//! learner: for each candidate test label, refit the model class jointly on
//! the training set plus that label, score the label by its refit likelihood,
//! and normalize. The log-normalizer `gamma` equals the pointwise minimax
//! regret against a hindsight reference and serves as a per-query
//! learnability measure: small when the class pins the test point down,
//! `ln K` when every label is equally defensible.
//!
//! Around that core the crate provides:
//!
//! - [`models`]: exactly-solvable classes (Bernoulli coin, 1-d threshold,
//!   k-segment) with global exhaustive ML fits;
//! - [`pnml`]: the learner, its lambda-weighted spectrum between
//!   training-free and ERM behavior, and a variant wrapping any
//!   deterministic training procedure;
//! - [`sequence`]: full-sequence NML by enumeration and two leave-one-out
//!   regret bounds;
//! - [`twice_universal`]: a normalized-maximum combination over a bank of
//!   classes, with its `log k` overhead diagnostics;
//! - [`stochastic`]: channel capacity by alternating maximization,
//!   Bayes mixtures over parameter grids, and the likelihood-filtered
//!   refined subclass;
//! - [`harness`]: a deterministic Monte-Carlo runner for regret curves,
//!   lambda sweeps, and bound-decay tables with CSV/JSON output.
//!
//! ```
//! use pnml_core::{Dataset, pnml::pnml_predict, models::ThresholdClass};
//!
//! // Two training points that any threshold explains perfectly either way:
//! // the class cannot commit, and the regret is the full ln 2.
//! let train = Dataset::binary(&[(0.1, 1), (0.9, 0)]).unwrap();
//! let p = pnml_predict(&ThresholdClass, &train, 0.5).unwrap();
//! assert!((p.prob(1) - 0.5).abs() < 1e-12);
//! assert!((p.gamma() - 2f64.ln()).abs() < 1e-12);
//! ```

pub mod data;
pub mod harness;
pub mod models;
pub mod pnml;
pub mod sequence;
pub mod stochastic;
pub mod twice_universal;

pub use data::{
    normalize_log_scores, DataError, Dataset, FitResult, LabelSpace, LogProb, ModelClass,
    Prediction, Sample, WeightedDataset,
};
pub use models::{BernoulliClass, ModelError, SegmentClass, Theta, ThresholdClass, ThresholdTheta};
pub use pnml::{genie_fit, glambda_predict, palg_predict, pnml_predict, pnml_regret_at, Lambda};
