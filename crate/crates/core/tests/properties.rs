//! Property tests for the invariants the learners must satisfy on arbitrary
//! inputs: the equalizer identity, regret nonnegativity, genie dominance,
//! fit optimality against brute force, nestedness, and the determinism and
//! consistency contracts of the sequence and capacity machinery.

mod common;

use proptest::prelude::*;

use pnml_core::data::normalize_log_scores;
use pnml_core::models::{BernoulliClass, SegmentClass, ThresholdClass, ThresholdTheta, Theta};
use pnml_core::pnml::{glambda_predict, pnml_predict, pnml_regret_at, Lambda};
use pnml_core::sequence::{nml_full, nml_loo_bound};
use pnml_core::stochastic::{ba_capacity, Channel, StochasticError};
use pnml_core::{Dataset, LogProb, ModelClass};

fn class_by_index(i: usize) -> Box<dyn ModelClass> {
    match i {
        0 => Box::new(BernoulliClass),
        1 => Box::new(ThresholdClass),
        _ => Box::new(SegmentClass::new(2).unwrap()),
    }
}

fn dataset_strategy(max_n: usize) -> impl Strategy<Value = Dataset> {
    prop::collection::vec((0.0f64..1.0, 0usize..2), 0..=max_n).prop_map(|mut pairs| {
        // nudge duplicate features apart so every class accepts the data
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        for i in 1..pairs.len() {
            if pairs[i].0 <= pairs[i - 1].0 {
                pairs[i].0 = pairs[i - 1].0 + 1e-9;
            }
        }
        Dataset::binary(&pairs).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn normalization_is_shift_invariant(
        scores in prop::collection::vec(-30.0f64..0.0, 2..6),
        shift in -20.0f64..0.0,
    ) {
        let base: Vec<LogProb> = scores.iter().map(|&s| LogProb::new(s).unwrap()).collect();
        let shifted: Vec<LogProb> =
            scores.iter().map(|&s| LogProb::new(s + shift).unwrap()).collect();
        let a = normalize_log_scores(&base).unwrap();
        let b = normalize_log_scores(&shifted).unwrap();
        let total: f64 = a.probs().iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        for (pa, pb) in a.probs().iter().zip(b.probs()) {
            prop_assert!((pa - pb).abs() < 1e-12);
        }
        prop_assert!((b.gamma() - (a.gamma() + shift)).abs() < 1e-9);
    }

    #[test]
    fn equalizer_and_nonnegativity(
        class_idx in 0usize..3,
        data in dataset_strategy(10),
        x in 0.0f64..1.0,
    ) {
        let class = class_by_index(class_idx);
        let p = pnml_predict(class.as_ref(), &data, x).unwrap();
        prop_assert!(p.gamma() >= -1e-12);
        for y in 0..2 {
            let r = pnml_regret_at(class.as_ref(), &data, x, y).unwrap();
            prop_assert!((r - p.gamma()).abs() < 1e-9, "label {y}: {r} vs {}", p.gamma());
        }
    }

    #[test]
    fn genie_dominates_training_only_fit(
        class_idx in 0usize..3,
        data in dataset_strategy(10),
        x in 0.0f64..1.0,
    ) {
        prop_assume!(!data.is_empty());
        let class = class_by_index(class_idx);
        let erm = class.weighted_ml_fit(&data.unit_weights()).unwrap();
        let genie = pnml_core::genie_fit(class.as_ref(), &data, x).unwrap();
        for y in 0..2 {
            let genie_score = class.label_logprob(&genie.fit_for(y).theta, x, y).prob();
            let erm_score = class.label_logprob(&erm.theta, x, y).prob();
            prop_assert!(genie_score >= erm_score - 1e-12);
        }
    }

    #[test]
    fn segment_fits_are_nested_in_k(data in dataset_strategy(9)) {
        prop_assume!(!data.is_empty());
        let weighted = data.unit_weights();
        let mut last = f64::NEG_INFINITY;
        for k in 0..=3 {
            let fit = SegmentClass::new(k).unwrap().weighted_ml_fit(&weighted).unwrap();
            prop_assert!(fit.achieved_loglik.value() >= last - 1e-12);
            last = fit.achieved_loglik.value();
        }
    }

    #[test]
    fn threshold_fit_matches_dense_grid_search(data in dataset_strategy(8)) {
        prop_assume!(!data.is_empty());
        let fit = ThresholdClass.weighted_ml_fit(&data.unit_weights()).unwrap();

        // Brute force: every candidate threshold crossed with p1, p2 from a
        // percent grid augmented by the exact side fractions.
        let mut xs: Vec<f64> = data.samples().iter().map(|s| s.x).collect();
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        xs.dedup();
        let mut candidates = vec![f64::NEG_INFINITY];
        for pair in xs.windows(2) {
            candidates.push((pair[0] + pair[1]) / 2.0);
        }
        candidates.push(f64::INFINITY);

        let mut best = f64::NEG_INFINITY;
        for &b in &candidates {
            let side_stats = |left: bool| {
                let mut ones = 0usize;
                let mut count = 0usize;
                for s in data.samples() {
                    if (s.x <= b) == left {
                        count += 1;
                        ones += s.y;
                    }
                }
                (ones, count)
            };
            let (o1, c1) = side_stats(true);
            let (o2, c2) = side_stats(false);
            let mut p1_grid: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
            if c1 > 0 {
                p1_grid.push(o1 as f64 / c1 as f64);
            }
            let mut p2_grid: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
            if c2 > 0 {
                p2_grid.push(o2 as f64 / c2 as f64);
            }
            for &p1 in &p1_grid {
                for &p2 in &p2_grid {
                    let theta = Theta::Threshold(ThresholdTheta::new(b, p1, p2).unwrap());
                    let ll = ThresholdClass.loglik(&theta, &data.unit_weights()).value();
                    if ll > best {
                        best = ll;
                    }
                }
            }
        }
        prop_assert!((fit.achieved_loglik.value() - best).abs() < 1e-9);
    }

    #[test]
    fn bernoulli_gamma_is_nonincreasing_in_lambda(
        data in dataset_strategy(10),
        x in 0.0f64..1.0,
    ) {
        let lambdas = [
            Lambda::new(0.0).unwrap(),
            Lambda::new(0.5).unwrap(),
            Lambda::ONE,
            Lambda::new(2.0).unwrap(),
            Lambda::new(10.0).unwrap(),
        ];
        let mut last = f64::INFINITY;
        for lam in lambdas {
            let g = glambda_predict(&BernoulliClass, &data, x, lam).unwrap().gamma();
            prop_assert!(g <= last + 1e-12);
            last = g;
        }
        if !data.is_empty() {
            let erm = glambda_predict(&BernoulliClass, &data, x, Lambda::infinity())
                .unwrap()
                .gamma();
            prop_assert!(erm <= last + 1e-12);
            prop_assert!(erm.abs() < 1e-12);
        }
    }

    #[test]
    fn loo_bound_is_order_invariant(data in dataset_strategy(6), rot in 0usize..6) {
        prop_assume!(data.len() >= 2);
        let mut rotated: Vec<(f64, usize)> =
            data.samples().iter().map(|s| (s.x, s.y)).collect();
        let shift = rot % rotated.len();
        rotated.rotate_left(shift);
        let shuffled = Dataset::binary(&rotated).unwrap();
        for class in [&BernoulliClass as &dyn ModelClass, &ThresholdClass] {
            let a = nml_loo_bound(class, &data).unwrap();
            let b = nml_loo_bound(class, &shuffled).unwrap();
            prop_assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn sequence_nml_is_normalized_and_chain_consistent(data in dataset_strategy(5)) {
        prop_assume!(!data.is_empty());
        let features: Vec<f64> = data.samples().iter().map(|s| s.x).collect();
        let seq = nml_full(&ThresholdClass, &features).unwrap();

        let n = features.len();
        let mut mass = 0.0;
        for code in 0..(1usize << n) {
            let labels: Vec<usize> = (0..n).map(|t| (code >> (n - 1 - t)) & 1).collect();
            mass += seq.seq_logprob(&labels).unwrap().prob();

            let mut log_prod = 0.0;
            for t in 0..n {
                let q = seq.sequential_predict(&labels[..t]).unwrap();
                log_prod += q[labels[t]].ln();
            }
            prop_assert!((log_prod - seq.seq_logprob(&labels).unwrap().value()).abs() < 1e-9);
        }
        prop_assert!((mass - 1.0).abs() < 1e-9);
    }

    #[test]
    fn capacity_runs_bracket_the_converged_value(
        rows in prop::collection::vec(0.05f64..0.95, 2..5),
    ) {
        // Binary-output channel with one row per parameter.
        let params: Vec<Theta> = rows
            .iter()
            .map(|&p| Theta::Bernoulli(pnml_core::models::BernoulliTheta::new(p).unwrap()))
            .collect();
        let matrix: Vec<Vec<f64>> = rows.iter().map(|&p| vec![1.0 - p, p]).collect();
        let channel = Channel::new(params, matrix).unwrap();
        let unwrap_partial = |r: Result<_, StochasticError>| match r {
            Ok(r) => r,
            Err(StochasticError::NotConverged { result }) => *result,
            Err(other) => panic!("{other}"),
        };
        // Every run brackets the true capacity in [lower, lower + gap], so
        // any two runs' intervals must overlap.
        let tight = unwrap_partial(ba_capacity(&channel, 1e-9, 100_000));
        for iters in [1usize, 2, 5, 20] {
            let loose = unwrap_partial(ba_capacity(&channel, 1e-13, iters));
            prop_assert!(loose.capacity_nats <= tight.capacity_nats + tight.gap + 1e-9);
            prop_assert!(loose.capacity_nats + loose.gap >= tight.capacity_nats - 1e-9);
        }
    }
}

#[test]
fn oracle_agrees_with_itself_on_known_case() {
    // Guards the oracle: the alternating four-point set splits best by
    // isolating one pure point, ln(4/27).
    let (_, p1, p2, ll) = common::oracle_threshold_fit(&[(0.1, 1), (0.2, 0), (0.8, 1), (0.9, 0)]);
    assert!((ll - (4.0f64 / 27.0).ln()).abs() < 1e-12);
    assert_eq!(p1, 1.0);
    assert!((p2 - 1.0 / 3.0).abs() < 1e-12);
}

#[test]
fn production_fit_matches_exact_oracle_on_random_data() {
    let mut rng = common::rng(20240401);
    for _ in 0..300 {
        let n = 1 + (rand::Rng::gen::<u64>(&mut rng) % 8) as usize;
        let data = common::random_dataset(&mut rng, n);
        let pairs: Vec<(f64, usize)> = data.samples().iter().map(|s| (s.x, s.y)).collect();
        let (_, _, _, oracle_ll) = common::oracle_threshold_fit(&pairs);
        let fit = ThresholdClass.weighted_ml_fit(&data.unit_weights()).unwrap();
        assert!(
            (fit.achieved_loglik.value() - oracle_ll).abs() < 1e-9,
            "fit {} vs oracle {oracle_ll} on {pairs:?}",
            fit.achieved_loglik.value()
        );
    }
}
