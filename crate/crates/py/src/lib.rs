//! Python bindings for the pnml learners.
//!
//! Train/test data crosses the boundary as plain lists of `(x, y)` tuples;
//! predictions come back as `(probs, gamma)` with probabilities ordered by
//! label. Model classes are named the same way as on the command line:
//! `"bernoulli"`, `"threshold"`, `"segment<k>"`.

use std::fmt::Display;
use std::str::FromStr;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use pnml_core::harness::{run_regret_curve, ClassSpec, ExperimentConfig, LearnerSpec};
use pnml_core::models::{BernoulliClass, BernoulliTheta, Theta, ThresholdTheta};
use pnml_core::pnml::{AddBetaBernoulliAlg, Lambda, MaxLikelihoodAlg};
use pnml_core::stochastic::Channel;
use pnml_core::twice_universal::ClassBank;
use pnml_core::{Dataset, ModelClass, Prediction};

fn err(e: impl Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn build_class(name: &str) -> PyResult<std::sync::Arc<dyn ModelClass>> {
    let spec = ClassSpec::from_str(name).map_err(err)?;
    spec.instantiate().map_err(err)
}

fn build_dataset(pairs: Vec<(f64, usize)>) -> PyResult<Dataset> {
    Dataset::binary(&pairs).map_err(err)
}

fn unpack(p: Prediction) -> (Vec<f64>, f64) {
    (p.probs().to_vec(), p.gamma())
}

fn bernoulli_grid(ps: &[f64]) -> PyResult<Vec<Theta>> {
    ps.iter()
        .map(|&p| Ok(Theta::Bernoulli(BernoulliTheta::new(p).map_err(err)?)))
        .collect()
}

/// Minimax-optimal prediction and its regret (the learnability measure).
#[pyfunction]
fn pnml_predict(class: &str, train: Vec<(f64, usize)>, x: f64) -> PyResult<(Vec<f64>, f64)> {
    let class = build_class(class)?;
    let train = build_dataset(train)?;
    Ok(unpack(pnml_core::pnml_predict(class.as_ref(), &train, x).map_err(err)?))
}

/// The lambda-weighted learner: 1 recovers `pnml_predict`, `float("inf")`
/// is ERM, 0 ignores the training.
#[pyfunction]
fn glambda_predict(
    class: &str,
    train: Vec<(f64, usize)>,
    x: f64,
    lam: f64,
) -> PyResult<(Vec<f64>, f64)> {
    let class = build_class(class)?;
    let train = build_dataset(train)?;
    let lam = if lam.is_infinite() && lam > 0.0 {
        Lambda::infinity()
    } else {
        Lambda::new(lam).map_err(err)?
    };
    Ok(unpack(pnml_core::glambda_predict(class.as_ref(), &train, x, lam).map_err(err)?))
}

/// The normalized-maximum wrapper around a named training procedure
/// (`"ml"` or `"add-beta:<beta>"`, the latter Bernoulli-only).
#[pyfunction]
#[pyo3(signature = (class, train, x, alg = "ml"))]
fn palg_predict(
    class: &str,
    train: Vec<(f64, usize)>,
    x: f64,
    alg: &str,
) -> PyResult<(Vec<f64>, f64)> {
    let model = build_class(class)?;
    let train = build_dataset(train)?;
    let prediction = if alg == "ml" {
        let alg = MaxLikelihoodAlg::new(model.as_ref());
        pnml_core::palg_predict(&alg, model.as_ref(), &train, x).map_err(err)?
    } else if let Some(beta) = alg.strip_prefix("add-beta:") {
        let beta: f64 = beta.parse().map_err(|_| err(format!("bad beta in {alg:?}")))?;
        let alg = AddBetaBernoulliAlg::new(beta).map_err(err)?;
        pnml_core::palg_predict(&alg, &BernoulliClass, &train, x).map_err(err)?
    } else {
        return Err(err(format!("unknown algorithm {alg:?}")));
    };
    Ok(unpack(prediction))
}

/// Per-label realized regret against the genie; equals gamma for every label.
#[pyfunction]
fn pnml_regret_at(class: &str, train: Vec<(f64, usize)>, x: f64, y: usize) -> PyResult<f64> {
    let class = build_class(class)?;
    let train = build_dataset(train)?;
    pnml_core::pnml_regret_at(class.as_ref(), &train, x, y).map_err(err)
}

/// Twice-universal prediction over a bank of class names. Returns
/// `(q, overhead, per_class, rbar)` where `per_class` maps each class name
/// to its own `(q, gamma)`.
#[pyfunction]
#[allow(clippy::type_complexity)]
fn tu_predict(
    bank: Vec<String>,
    train: Vec<(f64, usize)>,
    x: f64,
) -> PyResult<(Vec<f64>, f64, Vec<(String, (Vec<f64>, f64))>, Vec<f64>)> {
    let classes = bank
        .iter()
        .map(|name| {
            let spec = ClassSpec::from_str(name).map_err(err)?;
            Ok((spec.name(), spec.instantiate().map_err(err)?))
        })
        .collect::<PyResult<Vec<_>>>()?;
    let bank = ClassBank::new(classes).map_err(err)?;
    let train = build_dataset(train)?;
    let report = pnml_core::twice_universal::tu_predict(&bank, &train, x).map_err(err)?;
    let per_class = report
        .per_class
        .into_iter()
        .map(|(name, p)| (name, unpack(p)))
        .collect();
    Ok((report.prediction.probs().to_vec(), report.overhead, per_class, report.rbar))
}

/// Log of the Shtarkov sum over all label sequences for these features.
#[pyfunction]
fn nml_log_normalizer(class: &str, features: Vec<f64>) -> PyResult<f64> {
    let class = build_class(class)?;
    let seq = pnml_core::sequence::nml_full(class.as_ref(), &features).map_err(err)?;
    Ok(seq.log_normalizer())
}

/// Rows of the Bernoulli-grid-to-label-sequences channel: entry `[m][s]` is
/// the probability parameter `grid[m]` assigns to the label sequence with
/// big-endian code `s`. Feed the result to `ba_capacity`.
#[pyfunction]
fn learning_channel_rows(grid: Vec<f64>, features: Vec<f64>) -> PyResult<Vec<Vec<f64>>> {
    let thetas = bernoulli_grid(&grid)?;
    let channel =
        pnml_core::stochastic::build_learning_channel(&BernoulliClass, &thetas, &features)
            .map_err(err)?;
    Ok(channel.rows().to_vec())
}

/// Per-symbol NML upper bound on the leave-one-out minimax regret.
#[pyfunction]
fn nml_loo_bound(class: &str, data: Vec<(f64, usize)>) -> PyResult<f64> {
    let class = build_class(class)?;
    let data = build_dataset(data)?;
    pnml_core::sequence::nml_loo_bound(class.as_ref(), &data).map_err(err)
}

/// Average per-point regret with each sample held out in turn.
#[pyfunction]
fn pnml_loo_regret(class: &str, data: Vec<(f64, usize)>) -> PyResult<f64> {
    let class = build_class(class)?;
    let data = build_dataset(data)?;
    pnml_core::sequence::pnml_loo_regret(class.as_ref(), &data).map_err(err)
}

/// Channel capacity of a row-stochastic matrix by alternating maximization.
/// Returns `(capacity_nats, prior, iterations, gap)`.
#[pyfunction]
#[pyo3(signature = (rows, tol = 1e-9, max_iter = 10_000))]
fn ba_capacity(
    rows: Vec<Vec<f64>>,
    tol: f64,
    max_iter: usize,
) -> PyResult<(f64, Vec<f64>, usize, f64)> {
    let spread: Vec<f64> = (0..rows.len())
        .map(|i| if rows.len() == 1 { 0.5 } else { i as f64 / (rows.len() - 1) as f64 })
        .collect();
    let params = bernoulli_grid(&spread)?;
    let channel = Channel::new(params, rows).map_err(err)?;
    let result = pnml_core::stochastic::ba_capacity(&channel, tol, max_iter).map_err(err)?;
    Ok((result.capacity_nats, result.prior, result.iterations, result.gap))
}

/// Bayes mixture over a Bernoulli parameter grid (uniform prior when omitted).
#[pyfunction]
#[pyo3(signature = (grid, train, x, prior = None))]
fn bayes_mixture_predict(
    grid: Vec<f64>,
    train: Vec<(f64, usize)>,
    x: f64,
    prior: Option<Vec<f64>>,
) -> PyResult<(Vec<f64>, f64)> {
    let thetas = bernoulli_grid(&grid)?;
    let prior = prior.unwrap_or_else(|| vec![1.0 / thetas.len() as f64; thetas.len()]);
    let train = build_dataset(train)?;
    let p = pnml_core::stochastic::bayes_mixture_predict(&BernoulliClass, &thetas, &prior, &train, x)
        .map_err(err)?;
    Ok(unpack(p))
}

/// Likelihood-filtered capacity mixture over a Bernoulli grid: keeps grid
/// points whose training likelihood reaches `c`, mixes them under the
/// capacity-achieving prior, and reports the capacity as gamma.
#[pyfunction]
#[pyo3(signature = (grid, train, c, x, tol = 1e-9))]
fn refined_capacity_mixture(
    grid: Vec<f64>,
    train: Vec<(f64, usize)>,
    c: f64,
    x: f64,
    tol: f64,
) -> PyResult<(Vec<f64>, f64)> {
    let thetas = bernoulli_grid(&grid)?;
    let train = build_dataset(train)?;
    let p = pnml_core::stochastic::refined_capacity_mixture(
        &BernoulliClass,
        &thetas,
        &train,
        c,
        x,
        tol,
    )
    .map_err(err)?;
    Ok(unpack(p))
}

/// Mean regret curve for data from a threshold generator `(b, p1, p2)`.
/// Returns `(x, mean_gamma, std_gamma)` rows; deterministic in the seed.
#[pyfunction]
#[pyo3(signature = (generator, n_train, runs, seed, x_grid = None, learner = "pnml"))]
fn regret_curve(
    generator: (f64, f64, f64),
    n_train: usize,
    runs: usize,
    seed: u64,
    x_grid: Option<Vec<f64>>,
    learner: &str,
) -> PyResult<Vec<(f64, f64, f64)>> {
    let cfg = ExperimentConfig {
        generator: ThresholdTheta::new(generator.0, generator.1, generator.2).map_err(err)?,
        n_train,
        runs,
        seed,
        x_grid: x_grid.unwrap_or_else(ExperimentConfig::default_grid),
        learner: LearnerSpec::from_str(learner).map_err(err)?,
    };
    let rows = run_regret_curve(&cfg).map_err(err)?;
    Ok(rows.into_iter().map(|r| (r.x, r.mean_gamma, r.std_gamma)).collect())
}

#[pymodule]
fn pnml_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(pnml_predict, m)?)?;
    m.add_function(wrap_pyfunction!(glambda_predict, m)?)?;
    m.add_function(wrap_pyfunction!(palg_predict, m)?)?;
    m.add_function(wrap_pyfunction!(pnml_regret_at, m)?)?;
    m.add_function(wrap_pyfunction!(tu_predict, m)?)?;
    m.add_function(wrap_pyfunction!(nml_log_normalizer, m)?)?;
    m.add_function(wrap_pyfunction!(learning_channel_rows, m)?)?;
    m.add_function(wrap_pyfunction!(nml_loo_bound, m)?)?;
    m.add_function(wrap_pyfunction!(pnml_loo_regret, m)?)?;
    m.add_function(wrap_pyfunction!(ba_capacity, m)?)?;
    m.add_function(wrap_pyfunction!(bayes_mixture_predict, m)?)?;
    m.add_function(wrap_pyfunction!(refined_capacity_mixture, m)?)?;
    m.add_function(wrap_pyfunction!(regret_curve, m)?)?;
    Ok(())
}
