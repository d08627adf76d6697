//! The predictive normalized maximum likelihood learner and its relatives.
//!
//! The reference predictor ("genie") refits the model class jointly on the
//! training set plus the test point with each hypothesized label. Normalizing
//! the per-label genie likelihoods yields the minimax-optimal assignment; the
//! log-normalizer `gamma` is the pointwise minimax regret and doubles as a
//! local learnability measure.
//!
//! Two generalizations are provided: a lambda-weighted spectrum that scales
//! the training term of the joint fit (`lambda = 1` recovers the plain
//! learner, `lambda = inf` degenerates to ERM, `lambda = 0` ignores the
//! training), and a wrapper that accepts any deterministic training procedure
//! in place of exact maximum likelihood.

use thiserror::Error;

use crate::data::{
    normalize_log_scores, DataError, Dataset, FitResult, LogProb, ModelClass, Prediction, Sample,
    WeightedDataset,
};
use crate::models::ModelError;

/// Errors raised by the learners in this module.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum PnmlError {
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Model(#[from] ModelError),
    /// A class bank failed validation (empty, or mixed label spaces).
    #[error("invalid_bank: {0}")]
    InvalidBank(String),
}

/// The joint ML refit for each hypothesized test label.
#[derive(Debug, Clone)]
pub struct GenieFit {
    per_label: Vec<FitResult>,
}

impl GenieFit {
    /// One fit per label, indexed by label.
    pub fn per_label(&self) -> &[FitResult] {
        &self.per_label
    }

    pub fn fit_for(&self, y: usize) -> &FitResult {
        &self.per_label[y]
    }
}

/// Weight applied to the training log-likelihood in the generalized
/// objective. Nonnegative; `inf` is a first-class value.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Lambda(f64);

impl Lambda {
    pub const ONE: Lambda = Lambda(1.0);

    pub fn new(value: f64) -> Result<Self, DataError> {
        if value.is_nan() || value < 0.0 {
            return Err(DataError::InvalidWeight(value));
        }
        Ok(Self(value))
    }

    pub fn infinity() -> Self {
        Self(f64::INFINITY)
    }

    pub fn value(&self) -> f64 {
        self.0
    }

    pub fn is_infinite(&self) -> bool {
        self.0.is_infinite()
    }
}

impl std::fmt::Display for Lambda {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_infinite() {
            write!(f, "inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl serde::Serialize for Lambda {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> serde::Deserialize<'de> for Lambda {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        #[derive(serde::Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Lambda::new(v).map_err(D::Error::custom),
            Raw::Text(t) if t == "inf" => Ok(Lambda::infinity()),
            Raw::Text(t) => t
                .parse::<f64>()
                .map_err(D::Error::custom)
                .and_then(|v| Lambda::new(v).map_err(D::Error::custom)),
        }
    }
}

/// Any deterministic procedure that maps a dataset to a parameter in the
/// class. Identical inputs must yield identical parameters.
pub trait TrainingAlg: Send + Sync {
    fn fit(&self, data: &Dataset) -> Result<FitResult, ModelError>;
}

/// Exact weighted maximum likelihood as a training procedure: wrapping it
/// recovers the plain learner.
pub struct MaxLikelihoodAlg<'a> {
    class: &'a dyn ModelClass,
}

impl<'a> MaxLikelihoodAlg<'a> {
    pub fn new(class: &'a dyn ModelClass) -> Self {
        Self { class }
    }
}

impl TrainingAlg for MaxLikelihoodAlg<'_> {
    fn fit(&self, data: &Dataset) -> Result<FitResult, ModelError> {
        self.class.weighted_ml_fit(&data.unit_weights())
    }
}

/// Additive-smoothing Bernoulli trainer: `p = (count_1 + beta) / (n + 2 beta)`.
pub struct AddBetaBernoulliAlg {
    beta: f64,
}

impl AddBetaBernoulliAlg {
    pub fn new(beta: f64) -> Result<Self, ModelError> {
        if !beta.is_finite() || beta < 0.0 {
            return Err(ModelError::InvalidTheta(format!("beta {beta} must be finite and >= 0")));
        }
        Ok(Self { beta })
    }
}

impl TrainingAlg for AddBetaBernoulliAlg {
    fn fit(&self, data: &Dataset) -> Result<FitResult, ModelError> {
        let n = data.len() as f64;
        let ones = data.samples().iter().filter(|s| s.y == 1).count() as f64;
        let denom = n + 2.0 * self.beta;
        if denom <= 0.0 {
            return Err(ModelError::EmptyData);
        }
        let theta = crate::models::Theta::Bernoulli(crate::models::BernoulliTheta::new(
            ((ones + self.beta) / denom).clamp(0.0, 1.0),
        )?);
        let achieved_loglik = crate::models::BernoulliClass.loglik(&theta, &data.unit_weights());
        Ok(FitResult { theta, achieved_loglik })
    }
}

// ---------------------------------------------------------------------------
// Genie and pNML
// ---------------------------------------------------------------------------

fn joint_dataset(
    train: &Dataset,
    x: f64,
    y: usize,
    train_weight: f64,
) -> Result<WeightedDataset, DataError> {
    let test = Sample::new(x, y)?;
    train
        .uniform_weights(train_weight)?
        .with_entry(test, 1.0)
}

/// Joint ML refit of training plus the test point, once per candidate label.
/// The empty training set is allowed: each fit then sees the test point alone.
pub fn genie_fit(class: &dyn ModelClass, train: &Dataset, x: f64) -> Result<GenieFit, PnmlError> {
    let per_label = class
        .label_space()
        .iter()
        .map(|y| Ok(class.weighted_ml_fit(&joint_dataset(train, x, y, 1.0)?)?))
        .collect::<Result<Vec<_>, PnmlError>>()?;
    Ok(GenieFit { per_label })
}

/// The minimax-optimal probability assignment: each label scored by its own
/// genie's conditional likelihood at `x`, normalized. `gamma` is the regret.
pub fn pnml_predict(
    class: &dyn ModelClass,
    train: &Dataset,
    x: f64,
) -> Result<Prediction, PnmlError> {
    let genie = genie_fit(class, train, x)?;
    let scores = genie_scores(class, &genie, x);
    Ok(normalize_log_scores(&scores)?)
}

fn genie_scores(class: &dyn ModelClass, genie: &GenieFit, x: f64) -> Vec<LogProb> {
    genie
        .per_label()
        .iter()
        .enumerate()
        .map(|(y, fit)| class.label_logprob(&fit.theta, x, y))
        .collect()
}

/// Realized regret against the genie for a specific outcome `y`:
/// `log p_genie(y|x) - log q(y|x)`. By the equalizer property this equals
/// the prediction's `gamma` for every `y`.
pub fn pnml_regret_at(
    class: &dyn ModelClass,
    train: &Dataset,
    x: f64,
    y: usize,
) -> Result<f64, PnmlError> {
    let genie = genie_fit(class, train, x)?;
    let scores = genie_scores(class, &genie, x);
    let prediction = normalize_log_scores(&scores)?;
    Ok(scores[y].value() - prediction.prob(y).ln())
}

// ---------------------------------------------------------------------------
// Lambda spectrum
// ---------------------------------------------------------------------------

/// Maximizer of `log p(y|x) + lambda * log p(train)`, realized as a weighted
/// ML fit with the test at weight 1 and each training sample at weight
/// `lambda`. At `lambda = inf` the training-only fit (with the class's own
/// tie-break) is used; at `lambda = 0` the test point alone constrains the fit.
pub fn glambda_fit(
    class: &dyn ModelClass,
    train: &Dataset,
    x: f64,
    y: usize,
    lam: Lambda,
) -> Result<FitResult, PnmlError> {
    if lam.is_infinite() {
        return Ok(class.weighted_ml_fit(&train.unit_weights())?);
    }
    Ok(class.weighted_ml_fit(&joint_dataset(train, x, y, lam.value())?)?)
}

/// The lambda-spectrum assignment: per-label fits scored and normalized.
/// Recovers [`pnml_predict`] at `lambda = 1` and the ERM conditional (with
/// zero regret) at `lambda = inf`.
pub fn glambda_predict(
    class: &dyn ModelClass,
    train: &Dataset,
    x: f64,
    lam: Lambda,
) -> Result<Prediction, PnmlError> {
    let scores: Vec<LogProb> = if lam.is_infinite() {
        let fit = class.weighted_ml_fit(&train.unit_weights())?;
        class
            .label_space()
            .iter()
            .map(|y| class.label_logprob(&fit.theta, x, y))
            .collect()
    } else {
        class
            .label_space()
            .iter()
            .map(|y| {
                let fit = glambda_fit(class, train, x, y, lam)?;
                Ok(class.label_logprob(&fit.theta, x, y))
            })
            .collect::<Result<Vec<_>, PnmlError>>()?
    };
    Ok(normalize_log_scores(&scores)?)
}

// ---------------------------------------------------------------------------
// pALG
// ---------------------------------------------------------------------------

/// The normalized-maximum construction around an arbitrary deterministic
/// trainer: refit on training plus each hypothesized label, score, normalize.
/// `gamma` measures the local stability of the procedure itself.
pub fn palg_predict(
    alg: &dyn TrainingAlg,
    class: &dyn ModelClass,
    train: &Dataset,
    x: f64,
) -> Result<Prediction, PnmlError> {
    let scores = class
        .label_space()
        .iter()
        .map(|y| {
            let augmented = train.with_sample(Sample::new(x, y)?)?;
            let fit = alg.fit(&augmented)?;
            Ok(class.label_logprob(&fit.theta, x, y))
        })
        .collect::<Result<Vec<_>, PnmlError>>()?;
    Ok(normalize_log_scores(&scores)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{BernoulliClass, BernoulliTheta, Theta, ThresholdClass};

    fn bern_train(labels: &[usize]) -> Dataset {
        let pairs: Vec<(f64, usize)> = labels
            .iter()
            .enumerate()
            .map(|(i, &y)| (i as f64 * 0.01, y))
            .collect();
        Dataset::binary(&pairs).unwrap()
    }

    #[test]
    fn genie_fit_bernoulli_closed_form() {
        // train has k=3 ones of n=4; hypothesizing y=1 gives p = (k+1)/(n+1).
        let train = bern_train(&[1, 1, 1, 0]);
        let genie = genie_fit(&BernoulliClass, &train, 0.7).unwrap();
        match &genie.fit_for(1).theta {
            Theta::Bernoulli(t) => assert!((t.p - 4.0 / 5.0).abs() < 1e-12),
            _ => unreachable!(),
        }
    }

    #[test]
    fn genie_fit_empty_train_uses_test_alone() {
        let train = Dataset::binary(&[]).unwrap();
        let genie = genie_fit(&BernoulliClass, &train, 0.0).unwrap();
        match &genie.fit_for(1).theta {
            Theta::Bernoulli(t) => assert_eq!(t.p, 1.0),
            _ => unreachable!(),
        }
    }

    #[test]
    fn genie_fit_threshold_perfect_three_points() {
        let train = Dataset::binary(&[(0.1, 1), (0.9, 0)]).unwrap();
        let genie = genie_fit(&ThresholdClass, &train, 0.5).unwrap();
        assert_eq!(genie.fit_for(0).achieved_loglik.value(), 0.0);
    }

    #[test]
    fn pnml_bernoulli_small_case() {
        // n=4, k=1: q(1) = (k+1)/(n+2) = 1/3 and gamma = ln((n+2)/(n+1)).
        let train = bern_train(&[1, 0, 0, 0]);
        let p = pnml_predict(&BernoulliClass, &train, 0.9).unwrap();
        assert!((p.prob(1) - 1.0 / 3.0).abs() < 1e-12);
        assert!((p.prob(0) - 2.0 / 3.0).abs() < 1e-12);
        assert!((p.gamma() - (6.0f64 / 5.0).ln()).abs() < 1e-12);
    }

    #[test]
    fn pnml_empty_train_is_uniform() {
        let train = Dataset::binary(&[]).unwrap();
        let p = pnml_predict(&BernoulliClass, &train, 0.2).unwrap();
        assert!((p.prob(0) - 0.5).abs() < 1e-12);
        assert!((p.gamma() - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn pnml_threshold_two_sided_uncertainty() {
        let train = Dataset::binary(&[(0.1, 1), (0.9, 0)]).unwrap();
        let p = pnml_predict(&ThresholdClass, &train, 0.5).unwrap();
        assert!((p.prob(0) - 0.5).abs() < 1e-12);
        assert!((p.gamma() - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn regret_equals_gamma_for_both_labels() {
        let train = bern_train(&[1, 0, 0, 0]);
        let p = pnml_predict(&BernoulliClass, &train, 0.9).unwrap();
        for y in 0..2 {
            let r = pnml_regret_at(&BernoulliClass, &train, 0.9, y).unwrap();
            assert!((r - p.gamma()).abs() < 1e-12);
            assert!((r - (6.0f64 / 5.0).ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn regret_on_empty_train_is_ln2() {
        let train = Dataset::binary(&[]).unwrap();
        for y in 0..2 {
            let r = pnml_regret_at(&BernoulliClass, &train, 0.4, y).unwrap();
            assert!((r - 2f64.ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn glambda_one_is_the_genie() {
        let train = bern_train(&[1, 0, 1]);
        let genie = genie_fit(&BernoulliClass, &train, 0.3).unwrap();
        for y in 0..2 {
            let fit = glambda_fit(&BernoulliClass, &train, 0.3, y, Lambda::ONE).unwrap();
            assert_eq!(fit.theta, genie.fit_for(y).theta);
            assert_eq!(fit.achieved_loglik, genie.fit_for(y).achieved_loglik);
        }
    }

    #[test]
    fn glambda_two_weighted_closed_form() {
        // train [1,0,0], y=1, lambda=2: p = (2*1 + 1)/(2*3 + 1) = 3/7.
        let train = bern_train(&[1, 0, 0]);
        let fit = glambda_fit(&BernoulliClass, &train, 0.5, 1, Lambda::new(2.0).unwrap()).unwrap();
        match fit.theta {
            Theta::Bernoulli(t) => assert!((t.p - 3.0 / 7.0).abs() < 1e-12),
            _ => unreachable!(),
        }
    }

    #[test]
    fn glambda_infinity_is_erm() {
        let train = bern_train(&[1, 0, 0]);
        let fit = glambda_fit(&BernoulliClass, &train, 0.5, 1, Lambda::infinity()).unwrap();
        match fit.theta {
            Theta::Bernoulli(t) => assert!((t.p - 1.0 / 3.0).abs() < 1e-12),
            _ => unreachable!(),
        }
        let p = glambda_predict(&BernoulliClass, &train, 0.5, Lambda::infinity()).unwrap();
        assert!((p.prob(1) - 1.0 / 3.0).abs() < 1e-12);
        assert!((p.prob(0) - 2.0 / 3.0).abs() < 1e-12);
        assert!(p.gamma().abs() < 1e-12);
    }

    #[test]
    fn glambda_zero_ignores_training() {
        let train = bern_train(&[1, 0, 0]);
        let p = glambda_predict(&BernoulliClass, &train, 0.5, Lambda::new(0.0).unwrap()).unwrap();
        assert!((p.prob(0) - 0.5).abs() < 1e-12);
        assert!((p.gamma() - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn palg_with_exact_ml_matches_pnml() {
        let train = Dataset::binary(&[(0.1, 1), (0.4, 0), (0.9, 0)]).unwrap();
        for class in [&ThresholdClass as &dyn ModelClass, &BernoulliClass] {
            let alg = MaxLikelihoodAlg::new(class);
            let via_alg = palg_predict(&alg, class, &train, 0.5).unwrap();
            let direct = pnml_predict(class, &train, 0.5).unwrap();
            assert!((via_alg.gamma() - direct.gamma()).abs() < 1e-12);
            for y in 0..2 {
                assert!((via_alg.prob(y) - direct.prob(y)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn palg_with_constant_procedure_has_zero_gamma() {
        struct Constant;
        impl TrainingAlg for Constant {
            fn fit(&self, data: &Dataset) -> Result<FitResult, ModelError> {
                let theta = Theta::Bernoulli(BernoulliTheta::new(0.7).unwrap());
                let achieved_loglik = BernoulliClass.loglik(&theta, &data.unit_weights());
                Ok(FitResult { theta, achieved_loglik })
            }
        }
        let train = bern_train(&[1, 1, 0]);
        let p = palg_predict(&Constant, &BernoulliClass, &train, 0.5).unwrap();
        assert!((p.prob(1) - 0.7).abs() < 1e-12);
        assert!((p.prob(0) - 0.3).abs() < 1e-12);
        assert!(p.gamma().abs() < 1e-12);
    }

    #[test]
    fn palg_add_one_smoothing_worked_example() {
        // train [1,0]; with the test label appended: y=1 gives p = 3/5 = 0.6,
        // y=0 gives p(0) = 1 - 2/5 = 0.6; scores tie, gamma = ln 1.2.
        let train = bern_train(&[1, 0]);
        let alg = AddBetaBernoulliAlg::new(1.0).unwrap();
        let p = palg_predict(&alg, &BernoulliClass, &train, 0.5).unwrap();
        assert!((p.prob(0) - 0.5).abs() < 1e-12);
        assert!((p.prob(1) - 0.5).abs() < 1e-12);
        assert!((p.gamma() - 1.2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn lambda_rejects_negative_and_nan() {
        assert!(Lambda::new(-0.5).is_err());
        assert!(Lambda::new(f64::NAN).is_err());
        assert!(Lambda::new(f64::INFINITY).unwrap().is_infinite());
    }

    #[test]
    fn lambda_serde_round_trip() {
        let finite: Lambda = serde_json::from_str("2.5").unwrap();
        assert_eq!(finite.value(), 2.5);
        let inf: Lambda = serde_json::from_str("\"inf\"").unwrap();
        assert!(inf.is_infinite());
        assert_eq!(serde_json::to_string(&inf).unwrap(), "\"inf\"");
        assert_eq!(serde_json::to_string(&finite).unwrap(), "2.5");
    }
}
