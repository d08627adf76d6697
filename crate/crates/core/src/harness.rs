//! Deterministic Monte-Carlo experiment runner: regret-versus-feature curves
//! for data generated by a threshold model, lambda-spectrum sweeps with
//! common random numbers, and leave-one-out bound decay tables.
//!
//! Reproducibility contract: runs draw from independent ChaCha streams keyed
//! by `(seed, run_index)` with a fixed per-run draw order, runs execute
//! concurrently but aggregate in run order, and all emitted text renders
//! floats at 12 significant digits, so identical configs produce identical
//! bytes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::str::FromStr;
use std::sync::Arc;
use thiserror::Error;

use crate::data::{DataError, Dataset, ModelClass, Sample};
use crate::models::{
    BernoulliClass, BernoulliTheta, ModelError, SegmentClass, Theta, ThresholdClass, ThresholdTheta,
};
use crate::pnml::{
    glambda_predict, palg_predict, pnml_predict, AddBetaBernoulliAlg, Lambda, MaxLikelihoodAlg,
    PnmlError,
};
use crate::sequence::{nml_loo_bound, pnml_loo_regret, SequenceError};
use crate::stochastic::{bayes_mixture_predict, StochasticError};
use crate::twice_universal::{tu_predict, ClassBank};

/// Errors raised by experiment configuration and execution.
#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid_config: {0}")]
    InvalidConfig(String),
    #[error("gamma_out_of_range: mean gamma {0} outside [0, ln K]")]
    GammaOutOfRange(f64),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Pnml(#[from] PnmlError),
    #[error(transparent)]
    Sequence(#[from] SequenceError),
    #[error(transparent)]
    Stochastic(#[from] StochasticError),
}

// ---------------------------------------------------------------------------
// Specs
// ---------------------------------------------------------------------------

/// Names a built-in model class in configs and on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassSpec {
    Bernoulli,
    Threshold,
    Segment(usize),
}

impl ClassSpec {
    pub fn instantiate(&self) -> Result<Arc<dyn ModelClass>, ModelError> {
        Ok(match self {
            ClassSpec::Bernoulli => Arc::new(BernoulliClass),
            ClassSpec::Threshold => Arc::new(ThresholdClass),
            ClassSpec::Segment(k) => Arc::new(SegmentClass::new(*k)?),
        })
    }

    pub fn name(&self) -> String {
        match self {
            ClassSpec::Bernoulli => "bernoulli".into(),
            ClassSpec::Threshold => "threshold".into(),
            ClassSpec::Segment(k) => format!("segment{k}"),
        }
    }
}

impl FromStr for ClassSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bernoulli" => Ok(ClassSpec::Bernoulli),
            "threshold" => Ok(ClassSpec::Threshold),
            _ => match s.strip_prefix("segment") {
                Some(k) => k
                    .parse::<usize>()
                    .map(ClassSpec::Segment)
                    .map_err(|_| format!("bad segment count in {s:?}")),
                None => Err(format!(
                    "unknown class {s:?} (expected bernoulli, threshold, or segment<k>)"
                )),
            },
        }
    }
}

/// Names a training procedure for the pALG learner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlgSpec {
    /// Exact weighted maximum likelihood (reproduces the plain learner).
    Ml,
    /// Additive-smoothing Bernoulli trainer with the given beta.
    AddBeta(f64),
}

impl FromStr for AlgSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "ml" {
            return Ok(AlgSpec::Ml);
        }
        match s.strip_prefix("add-beta:") {
            Some(beta) => beta
                .parse::<f64>()
                .map(AlgSpec::AddBeta)
                .map_err(|_| format!("bad beta in {s:?}")),
            None => Err(format!("unknown algorithm {s:?} (expected ml or add-beta:<beta>)")),
        }
    }
}

/// Which learner a curve evaluates at each grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LearnerSpec {
    Pnml { class: ClassSpec },
    Glambda { class: ClassSpec, lambda: Lambda },
    Palg { class: ClassSpec, alg: AlgSpec },
    Tu { bank: Vec<ClassSpec> },
    /// Bayes mixture over a Bernoulli parameter grid. `grid` defaults to 201
    /// equispaced points in [0,1]; `prior` defaults to uniform.
    Mixture { grid: Option<Vec<f64>>, prior: Option<Vec<f64>> },
}

impl FromStr for LearnerSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.splitn(2, ':').collect();
        match parts[0] {
            "pnml" => {
                let class = parts.get(1).map_or(Ok(ClassSpec::Threshold), |c| c.parse())?;
                Ok(LearnerSpec::Pnml { class })
            }
            "glambda" => {
                let rest = parts
                    .get(1)
                    .ok_or_else(|| "glambda needs a lambda, e.g. glambda:1".to_string())?;
                let (lam_str, class) = match rest.split_once(':') {
                    Some((l, c)) => (l, c.parse()?),
                    None => (*rest, ClassSpec::Threshold),
                };
                let lambda = if lam_str == "inf" {
                    Lambda::infinity()
                } else {
                    lam_str
                        .parse::<f64>()
                        .map_err(|_| format!("bad lambda {lam_str:?}"))
                        .and_then(|v| Lambda::new(v).map_err(|e| e.to_string()))?
                };
                Ok(LearnerSpec::Glambda { class, lambda })
            }
            "palg" => {
                let rest = parts
                    .get(1)
                    .ok_or_else(|| "palg needs an algorithm, e.g. palg:ml".to_string())?;
                let alg: AlgSpec = rest.parse()?;
                let class = match alg {
                    AlgSpec::Ml => ClassSpec::Threshold,
                    AlgSpec::AddBeta(_) => ClassSpec::Bernoulli,
                };
                Ok(LearnerSpec::Palg { class, alg })
            }
            "tu" => {
                let rest = parts
                    .get(1)
                    .ok_or_else(|| "tu needs a bank, e.g. tu:bernoulli,threshold".to_string())?;
                let bank = rest
                    .split(',')
                    .map(|c| c.parse())
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(LearnerSpec::Tu { bank })
            }
            "mixture" => Ok(LearnerSpec::Mixture { grid: None, prior: None }),
            other => Err(format!("unknown learner {other:?}")),
        }
    }
}

/// Everything a regret-curve experiment needs, and nothing else: identical
/// configs yield byte-identical outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Data generator: label 1 with probability p1 left of b, p2 right of it.
    pub generator: ThresholdTheta,
    pub n_train: usize,
    pub runs: usize,
    pub seed: u64,
    pub x_grid: Vec<f64>,
    pub learner: LearnerSpec,
}

impl ExperimentConfig {
    /// 101 equispaced evaluation points covering [0, 1].
    pub fn default_grid() -> Vec<f64> {
        (0..=100).map(|i| i as f64 / 100.0).collect()
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.runs == 0 {
            return Err(HarnessError::InvalidConfig("runs must be >= 1".into()));
        }
        if self.n_train == 0 {
            return Err(HarnessError::InvalidConfig("n_train must be >= 1".into()));
        }
        if self.x_grid.is_empty() {
            return Err(HarnessError::InvalidConfig("x_grid is empty".into()));
        }
        if self.x_grid.iter().any(|x| !(0.0..=1.0).contains(x)) {
            return Err(HarnessError::InvalidConfig("x_grid points must lie in [0,1]".into()));
        }
        if self.x_grid.windows(2).any(|w| w[0] > w[1]) {
            return Err(HarnessError::InvalidConfig("x_grid is not sorted".into()));
        }
        if let LearnerSpec::Palg { class, alg: AlgSpec::AddBeta(beta) } = &self.learner {
            if *class != ClassSpec::Bernoulli {
                return Err(HarnessError::InvalidConfig(
                    "add-beta training is only defined for the bernoulli class".into(),
                ));
            }
            if !beta.is_finite() || *beta < 0.0 {
                return Err(HarnessError::InvalidConfig(format!("bad beta {beta}")));
            }
        }
        if let LearnerSpec::Mixture { grid: Some(grid), prior } = &self.learner {
            if grid.is_empty() || grid.iter().any(|p| !(0.0..=1.0).contains(p)) {
                return Err(HarnessError::InvalidConfig("mixture grid must lie in [0,1]".into()));
            }
            if let Some(prior) = prior {
                if prior.len() != grid.len() {
                    return Err(HarnessError::InvalidConfig(
                        "mixture prior length differs from grid length".into(),
                    ));
                }
            }
        }
        if let LearnerSpec::Tu { bank } = &self.learner {
            if bank.len() < 2 {
                return Err(HarnessError::InvalidConfig("tu bank needs at least 2 classes".into()));
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Result rows
// ---------------------------------------------------------------------------

/// One point of a regret curve: mean and population standard deviation of
/// gamma over the runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurveRow {
    pub x: f64,
    pub mean_gamma: f64,
    pub std_gamma: f64,
    pub runs: usize,
}

/// One point of a lambda sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub lambda: Lambda,
    pub x: f64,
    pub mean_gamma: f64,
}

/// One row of a leave-one-out decay table; `n` is the sequence length N+1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayRow {
    pub n: usize,
    pub nml_bound: f64,
    pub pnml_loo: f64,
}

// ---------------------------------------------------------------------------
// Learner engine
// ---------------------------------------------------------------------------

enum LearnerEngine {
    Pnml(Arc<dyn ModelClass>),
    Glambda(Arc<dyn ModelClass>, Lambda),
    PalgMl(Arc<dyn ModelClass>),
    PalgAddBeta(f64),
    Tu(ClassBank),
    Mixture(Vec<Theta>, Vec<f64>),
}

impl LearnerEngine {
    fn build(spec: &LearnerSpec) -> Result<Self, HarnessError> {
        Ok(match spec {
            LearnerSpec::Pnml { class } => LearnerEngine::Pnml(class.instantiate()?),
            LearnerSpec::Glambda { class, lambda } => {
                LearnerEngine::Glambda(class.instantiate()?, *lambda)
            }
            LearnerSpec::Palg { class, alg: AlgSpec::Ml } => {
                LearnerEngine::PalgMl(class.instantiate()?)
            }
            LearnerSpec::Palg { alg: AlgSpec::AddBeta(beta), .. } => {
                LearnerEngine::PalgAddBeta(*beta)
            }
            LearnerSpec::Tu { bank } => {
                let classes = bank
                    .iter()
                    .map(|spec| Ok((spec.name(), spec.instantiate()?)))
                    .collect::<Result<Vec<_>, HarnessError>>()?;
                LearnerEngine::Tu(ClassBank::new(classes)?)
            }
            LearnerSpec::Mixture { grid, prior } => {
                let ps = grid
                    .clone()
                    .unwrap_or_else(|| (0..=200).map(|i| i as f64 / 200.0).collect());
                let thetas = ps
                    .iter()
                    .map(|&p| Ok(Theta::Bernoulli(BernoulliTheta::new(p)?)))
                    .collect::<Result<Vec<_>, ModelError>>()?;
                let prior = prior
                    .clone()
                    .unwrap_or_else(|| vec![1.0 / thetas.len() as f64; thetas.len()]);
                LearnerEngine::Mixture(thetas, prior)
            }
        })
    }

    fn gamma(&self, train: &Dataset, x: f64) -> Result<f64, HarnessError> {
        Ok(match self {
            LearnerEngine::Pnml(class) => pnml_predict(class.as_ref(), train, x)?.gamma(),
            LearnerEngine::Glambda(class, lam) => {
                glambda_predict(class.as_ref(), train, x, *lam)?.gamma()
            }
            LearnerEngine::PalgMl(class) => {
                let alg = MaxLikelihoodAlg::new(class.as_ref());
                palg_predict(&alg, class.as_ref(), train, x)?.gamma()
            }
            LearnerEngine::PalgAddBeta(beta) => {
                let alg = AddBetaBernoulliAlg::new(*beta)?;
                palg_predict(&alg, &BernoulliClass, train, x)?.gamma()
            }
            LearnerEngine::Tu(bank) => tu_predict(bank, train, x)?.prediction.gamma(),
            LearnerEngine::Mixture(grid, prior) => {
                bayes_mixture_predict(&BernoulliClass, grid, prior, train, x)?.gamma()
            }
        })
    }

    fn label_count(&self) -> usize {
        2
    }
}

// ---------------------------------------------------------------------------
// Experiment runners
// ---------------------------------------------------------------------------

/// Independent ChaCha stream for one run of one experiment.
fn run_stream(seed: u64, run: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(run);
    rng
}

/// Draws a training set from the threshold generator: per sample, the feature
/// is uniform on (0,1), then the label is Bernoulli at the generator's
/// side probability. Draw order is fixed (x then y, sample by sample).
fn draw_training(
    generator: &ThresholdTheta,
    n: usize,
    seed: u64,
    run: u64,
) -> Result<Dataset, DataError> {
    let mut rng = run_stream(seed, run);
    let mut samples = Vec::with_capacity(n);
    for _ in 0..n {
        let x: f64 = rng.gen();
        let u: f64 = rng.gen();
        let y = usize::from(u < generator.prob1(x));
        samples.push(Sample::new(x, y)?);
    }
    Dataset::new(samples, crate::data::LabelSpace::binary())
}

/// Runs the configured learner over every `(run, x)` pair and aggregates
/// per-x mean and population standard deviation of gamma. Runs execute
/// concurrently; output is a pure function of the config.
pub fn run_regret_curve(cfg: &ExperimentConfig) -> Result<Vec<CurveRow>, HarnessError> {
    cfg.validate()?;
    let engine = LearnerEngine::build(&cfg.learner)?;

    let per_run: Vec<Vec<f64>> = (0..cfg.runs)
        .into_par_iter()
        .map(|run| {
            let train = draw_training(&cfg.generator, cfg.n_train, cfg.seed, run as u64)?;
            cfg.x_grid
                .iter()
                .map(|&x| engine.gamma(&train, x))
                .collect::<Result<Vec<f64>, HarnessError>>()
        })
        .collect::<Result<Vec<_>, HarnessError>>()?;

    let runs = cfg.runs as f64;
    let max_gamma = (engine.label_count() as f64).ln();
    cfg.x_grid
        .iter()
        .enumerate()
        .map(|(j, &x)| {
            let mean = per_run.iter().map(|row| row[j]).sum::<f64>() / runs;
            let var = per_run
                .iter()
                .map(|row| (row[j] - mean).powi(2))
                .sum::<f64>()
                / runs;
            if !(-1e-12..=max_gamma + 1e-12).contains(&mean) {
                return Err(HarnessError::GammaOutOfRange(mean));
            }
            Ok(CurveRow { x, mean_gamma: mean, std_gamma: var.sqrt(), runs: cfg.runs })
        })
        .collect()
}

/// Runs one regret curve per lambda with common random numbers: every lambda
/// column sees exactly the same training realizations.
pub fn run_lambda_sweep(
    cfg: &ExperimentConfig,
    lambdas: &[Lambda],
) -> Result<Vec<SweepRow>, HarnessError> {
    if lambdas.is_empty() {
        return Err(HarnessError::InvalidConfig("no lambda values given".into()));
    }
    let class = match &cfg.learner {
        LearnerSpec::Pnml { class } => *class,
        LearnerSpec::Glambda { class, .. } => *class,
        other => {
            return Err(HarnessError::InvalidConfig(format!(
                "lambda sweep needs a pnml or glambda learner, got {other:?}"
            )))
        }
    };
    let mut rows = Vec::with_capacity(lambdas.len() * cfg.x_grid.len());
    for &lambda in lambdas {
        let column_cfg = ExperimentConfig {
            learner: LearnerSpec::Glambda { class, lambda },
            ..cfg.clone()
        };
        for row in run_regret_curve(&column_cfg)? {
            rows.push(SweepRow { lambda, x: row.x, mean_gamma: row.mean_gamma });
        }
    }
    Ok(rows)
}

/// Both leave-one-out bounds for one random dataset per sequence length
/// `n = 2..=max_n`. Features are uniform on (0,1); labels are fair coin
/// flips, each length drawn from its own `(seed, n)` stream.
pub fn run_loo_decay(
    class: &ClassSpec,
    max_n: usize,
    seed: u64,
) -> Result<Vec<DecayRow>, HarnessError> {
    if max_n < 2 {
        return Err(HarnessError::InvalidConfig("max_n must be at least 2".into()));
    }
    let model = class.instantiate()?;
    let mut rows = Vec::with_capacity(max_n - 1);
    for n in 2..=max_n {
        let mut rng = run_stream(seed, n as u64);
        let mut samples = Vec::with_capacity(n);
        for _ in 0..n {
            let x: f64 = rng.gen();
            let y = usize::from(rng.gen::<f64>() < 0.5);
            samples.push(Sample::new(x, y)?);
        }
        let data = Dataset::new(samples, crate::data::LabelSpace::binary())?;
        rows.push(DecayRow {
            n,
            nml_bound: nml_loo_bound(model.as_ref(), &data)?,
            pnml_loo: pnml_loo_regret(model.as_ref(), &data)?,
        });
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------
// Output rendering
// ---------------------------------------------------------------------------

/// Renders a float at 12 significant digits; infinities print as `inf`.
pub fn format_value(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:.11e}")
    }
}

pub fn curve_csv(rows: &[CurveRow]) -> String {
    let mut out = String::from("x,mean_gamma,std_gamma,runs\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            format_value(r.x),
            format_value(r.mean_gamma),
            format_value(r.std_gamma),
            r.runs
        ));
    }
    out
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("lambda,x,mean_gamma\n");
    for r in rows {
        let lambda = if r.lambda.is_infinite() {
            "inf".to_string()
        } else {
            format_value(r.lambda.value())
        };
        out.push_str(&format!("{},{},{}\n", lambda, format_value(r.x), format_value(r.mean_gamma)));
    }
    out
}

pub fn decay_csv(rows: &[DecayRow]) -> String {
    let mut out = String::from("n,nml_bound,pnml_loo\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{}\n",
            r.n,
            format_value(r.nml_bound),
            format_value(r.pnml_loo)
        ));
    }
    out
}

/// The JSON sidecar written next to CSV outputs: the full config, the
/// artifact version, the output units, and the aggregation convention for
/// the std column.
pub fn config_sidecar_json(cfg: &ExperimentConfig, units: &str) -> String {
    let doc = serde_json::json!({
        "config": cfg,
        "version": env!("CARGO_PKG_VERSION"),
        "columns": { "std_gamma": "population standard deviation", "units": units },
    });
    let mut text = serde_json::to_string_pretty(&doc).expect("config serializes");
    text.push('\n');
    text
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_cfg(learner: LearnerSpec) -> ExperimentConfig {
        ExperimentConfig {
            generator: ThresholdTheta::new(0.5, 0.2, 0.8).unwrap(),
            n_train: 6,
            runs: 4,
            seed: 11,
            x_grid: vec![0.1, 0.5, 0.9],
            learner,
        }
    }

    #[test]
    fn curve_is_deterministic() {
        let cfg = tiny_cfg(LearnerSpec::Pnml { class: ClassSpec::Threshold });
        let a = curve_csv(&run_regret_curve(&cfg).unwrap());
        let b = curve_csv(&run_regret_curve(&cfg).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn single_point_training_has_full_uncertainty() {
        // One training point: the threshold class fits any extra label
        // perfectly, so gamma = ln 2 at every x.
        let cfg = ExperimentConfig {
            n_train: 1,
            runs: 1,
            x_grid: vec![0.5],
            ..tiny_cfg(LearnerSpec::Pnml { class: ClassSpec::Threshold })
        };
        let rows = run_regret_curve(&cfg).unwrap();
        assert!((rows[0].mean_gamma - 2f64.ln()).abs() < 1e-12);
        assert_eq!(rows[0].std_gamma, 0.0);
    }

    #[test]
    fn gamma_stays_in_range_for_all_learners() {
        let learners = [
            LearnerSpec::Pnml { class: ClassSpec::Threshold },
            LearnerSpec::Glambda { class: ClassSpec::Threshold, lambda: Lambda::new(2.0).unwrap() },
            LearnerSpec::Palg { class: ClassSpec::Threshold, alg: AlgSpec::Ml },
            LearnerSpec::Palg { class: ClassSpec::Bernoulli, alg: AlgSpec::AddBeta(1.0) },
            LearnerSpec::Tu { bank: vec![ClassSpec::Bernoulli, ClassSpec::Threshold] },
            LearnerSpec::Mixture { grid: None, prior: None },
        ];
        for learner in learners {
            let rows = run_regret_curve(&tiny_cfg(learner)).unwrap();
            for r in rows {
                assert!(r.mean_gamma >= -1e-12 && r.mean_gamma <= 2f64.ln() + 1e-12);
            }
        }
    }

    #[test]
    fn sweep_lambda_one_matches_pnml_column() {
        let cfg = tiny_cfg(LearnerSpec::Pnml { class: ClassSpec::Threshold });
        let pnml_rows = run_regret_curve(&cfg).unwrap();
        let sweep = run_lambda_sweep(&cfg, &[Lambda::ONE]).unwrap();
        for (s, p) in sweep.iter().zip(&pnml_rows) {
            assert_eq!(s.mean_gamma, p.mean_gamma);
        }
    }

    #[test]
    fn sweep_endpoint_columns() {
        let cfg = tiny_cfg(LearnerSpec::Pnml { class: ClassSpec::Threshold });
        let lambdas = [Lambda::new(0.0).unwrap(), Lambda::infinity()];
        let sweep = run_lambda_sweep(&cfg, &lambdas).unwrap();
        for row in &sweep {
            if row.lambda.is_infinite() {
                assert!(row.mean_gamma.abs() < 1e-9, "erm column must be zero");
            } else {
                assert!((row.mean_gamma - 2f64.ln()).abs() < 1e-9, "lambda 0 column is ln 2");
            }
        }
    }

    #[test]
    fn decay_closed_form_for_bernoulli() {
        let rows = run_loo_decay(&ClassSpec::Bernoulli, 8, 3).unwrap();
        for row in &rows {
            let n_train = row.n as f64 - 1.0;
            let expected = ((n_train + 2.0) / (n_train + 1.0)).ln();
            assert!((row.pnml_loo - expected).abs() < 1e-12);
        }
        for pair in rows.windows(2) {
            assert!(pair[1].nml_bound < pair[0].nml_bound);
            assert!(pair[1].pnml_loo < pair[0].pnml_loo);
        }
    }

    #[test]
    fn csv_formatting_is_stable() {
        let rows = vec![CurveRow { x: 0.25, mean_gamma: 2f64.ln(), std_gamma: 0.0, runs: 3 }];
        let text = curve_csv(&rows);
        assert_eq!(
            text,
            "x,mean_gamma,std_gamma,runs\n2.50000000000e-1,6.93147180560e-1,0.00000000000e0,3\n"
        );
    }

    #[test]
    fn learner_spec_parsing() {
        assert_eq!(
            "pnml".parse::<LearnerSpec>().unwrap(),
            LearnerSpec::Pnml { class: ClassSpec::Threshold }
        );
        assert_eq!(
            "pnml:bernoulli".parse::<LearnerSpec>().unwrap(),
            LearnerSpec::Pnml { class: ClassSpec::Bernoulli }
        );
        assert!(matches!(
            "glambda:inf".parse::<LearnerSpec>().unwrap(),
            LearnerSpec::Glambda { lambda, .. } if lambda.is_infinite()
        ));
        assert_eq!(
            "tu:bernoulli,threshold,segment2".parse::<LearnerSpec>().unwrap(),
            LearnerSpec::Tu {
                bank: vec![ClassSpec::Bernoulli, ClassSpec::Threshold, ClassSpec::Segment(2)]
            }
        );
        assert_eq!(
            "palg:add-beta:1".parse::<LearnerSpec>().unwrap(),
            LearnerSpec::Palg { class: ClassSpec::Bernoulli, alg: AlgSpec::AddBeta(1.0) }
        );
        assert!("glambda:-1".parse::<LearnerSpec>().is_err());
        assert!("banana".parse::<LearnerSpec>().is_err());
    }

    #[test]
    fn config_sidecar_round_trips() {
        let cfg = tiny_cfg(LearnerSpec::Glambda {
            class: ClassSpec::Threshold,
            lambda: Lambda::infinity(),
        });
        let text = config_sidecar_json(&cfg, "nats");
        let doc: serde_json::Value = serde_json::from_str(&text).unwrap();
        let parsed: ExperimentConfig = serde_json::from_value(doc["config"].clone()).unwrap();
        assert_eq!(parsed, cfg);
    }
}
