//! A second layer of universality over a finite bank of hypothesis classes:
//! each class contributes its own normalized-maximum-likelihood prediction,
//! and the bank combines them by a normalized per-label maximum. The cost of
//! not knowing the class is the log of the combined mass, at most `log k`.

use std::sync::Arc;

use rayon::prelude::*;

use crate::data::{ModelClass, Prediction};
use crate::pnml::{genie_fit, PnmlError};
use crate::{data::normalize_log_scores, data::Dataset, data::LabelSpace};

/// An ordered, named collection of model classes sharing one label space.
///
/// The order is part of the reproducibility contract: argmax ties across
/// classes break toward the lowest index.
#[derive(Clone)]
pub struct ClassBank {
    classes: Vec<(String, Arc<dyn ModelClass>)>,
    label_space: LabelSpace,
}

impl ClassBank {
    pub fn new(classes: Vec<(String, Arc<dyn ModelClass>)>) -> Result<Self, PnmlError> {
        let first = classes
            .first()
            .ok_or_else(|| PnmlError::InvalidBank("class bank is empty".into()))?
            .1
            .label_space();
        for (name, class) in &classes {
            if class.label_space() != first {
                return Err(PnmlError::InvalidBank(format!(
                    "class {name} has a different label space"
                )));
            }
        }
        Ok(Self { classes, label_space: first })
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.classes.iter().map(|(n, _)| n.as_str())
    }
}

/// The twice-universal prediction plus its per-class and bound diagnostics.
#[derive(Debug, Clone)]
pub struct TuReport {
    /// The combined prediction; its `gamma` equals `overhead`.
    pub prediction: Prediction,
    /// Each class's own prediction, in bank order.
    pub per_class: Vec<(String, Prediction)>,
    /// Log of the combined mass `sum_y max_i q_i(y|x)`: the cost of the
    /// second universality layer, at most `log k` (and only negligibly below
    /// zero, from float rounding of the per-class normalizations).
    pub overhead: f64,
    /// Per hypothesized label: the regret bound `gamma_{j(y)} + overhead`,
    /// where `j(y)` is the class whose genie likes that label best.
    pub rbar: Vec<f64>,
}

/// Runs every class's predictor and combines them by normalized per-label
/// maximum. `rbar` tracks the label-wise regret bound through the class
/// attaining the best genie likelihood for each label.
pub fn tu_predict(bank: &ClassBank, train: &Dataset, x: f64) -> Result<TuReport, PnmlError> {
    let labels = bank.label_space.len();

    // Per-class genie scores and normalized predictions, computed
    // independently per class and combined in bank order.
    let per_class_scored: Vec<(String, Prediction, Vec<crate::data::LogProb>)> = bank
        .classes
        .par_iter()
        .map(|(name, class)| {
            let genie = genie_fit(class.as_ref(), train, x)?;
            let scores: Vec<_> = genie
                .per_label()
                .iter()
                .enumerate()
                .map(|(y, fit)| class.label_logprob(&fit.theta, x, y))
                .collect();
            let prediction = normalize_log_scores(&scores)?;
            Ok((name.clone(), prediction, scores))
        })
        .collect::<Result<_, PnmlError>>()?;
    let mut per_class = Vec::with_capacity(bank.len());
    let mut raw_scores = Vec::with_capacity(bank.len());
    for (name, prediction, scores) in per_class_scored {
        per_class.push((name, prediction));
        raw_scores.push(scores);
    }

    // Combined assignment: per-label maximum of the q_i, renormalized.
    let max_q: Vec<f64> = (0..labels)
        .map(|y| {
            per_class
                .iter()
                .map(|(_, p)| p.prob(y))
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    let mass: f64 = max_q.iter().sum();
    let overhead = mass.ln();
    let prediction = Prediction::new(max_q.iter().map(|&m| m / mass).collect(), overhead)?;

    // j(y): the class with the best genie likelihood for label y
    // (lowest index on ties).
    let rbar = (0..labels)
        .map(|y| {
            let mut best = 0;
            for i in 1..raw_scores.len() {
                if raw_scores[i][y].value() > raw_scores[best][y].value() {
                    best = i;
                }
            }
            per_class[best].1.gamma() + overhead
        })
        .collect();

    Ok(TuReport { prediction, per_class, overhead, rbar })
}

/// The worst-case cost of twice universality over `k` classes: `log k`.
pub fn tu_overhead_bound(k: usize) -> f64 {
    assert!(k >= 1, "need at least one class");
    (k as f64).ln()
}
