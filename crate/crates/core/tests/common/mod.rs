//! Shared test oracles, independent of the library's fit implementations.
//!
//! The threshold oracle ranks candidate thresholds by exact integer
//! arithmetic on the rational likelihoods, so its tie-breaks are the
//! mathematical ones (leftmost candidate) with no float ambiguity.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use pnml_core::Dataset;

pub fn rng(seed: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed)
}

/// Random binary dataset with distinct features in (0,1).
pub fn random_dataset(rng: &mut ChaCha12Rng, n: usize) -> Dataset {
    let mut pairs: Vec<(f64, usize)> = Vec::with_capacity(n);
    while pairs.len() < n {
        let x: f64 = rng.gen();
        if pairs.iter().any(|&(px, _)| px == x) {
            continue;
        }
        let y = usize::from(rng.gen::<f64>() < 0.5);
        pairs.push((x, y));
    }
    Dataset::binary(&pairs).unwrap()
}

/// Exact likelihood of one side as a (numerator, denominator) pair:
/// `k^k (m-k)^(m-k) / m^m`, with the empty side contributing 1/1.
fn side_rational(k: u32, m: u32) -> (u128, u128) {
    if m == 0 {
        return (1, 1);
    }
    let pow = |base: u32, exp: u32| -> u128 { (base as u128).pow(exp) };
    let num = pow(k.max(1), k) * pow((m - k).max(1), m - k);
    (num, pow(m, m))
}

/// The oracle's maximum-likelihood threshold fit on unit-weight points:
/// enumerates every candidate (sentinels plus midpoints of distinct sorted
/// features), scores each by exact rational joint likelihood, and keeps the
/// leftmost maximizer. Returns `(b, p1, p2, log-likelihood)`.
pub fn oracle_threshold_fit(points: &[(f64, usize)]) -> (f64, f64, f64, f64) {
    assert!(points.len() <= 16, "oracle uses exact integer arithmetic");
    let mut xs: Vec<f64> = points.iter().map(|&(x, _)| x).collect();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    xs.dedup();
    let mut candidates = vec![f64::NEG_INFINITY];
    for pair in xs.windows(2) {
        candidates.push((pair[0] + pair[1]) / 2.0);
    }
    candidates.push(f64::INFINITY);

    let mut best: Option<(f64, (u128, u128), [u32; 4])> = None;
    for &b in &candidates {
        let mut k1 = 0u32;
        let mut m1 = 0u32;
        let mut k2 = 0u32;
        let mut m2 = 0u32;
        for &(x, y) in points {
            if x <= b {
                m1 += 1;
                k1 += y as u32;
            } else {
                m2 += 1;
                k2 += y as u32;
            }
        }
        let (n1, d1) = side_rational(k1, m1);
        let (n2, d2) = side_rational(k2, m2);
        let lik = (n1 * n2, d1 * d2);
        let better = match &best {
            None => true,
            // strict rational comparison: a/b > c/d  <=>  a d > c b
            Some((_, (cn, cd), _)) => lik.0 * cd > *cn * lik.1,
        };
        if better {
            best = Some((b, lik, [k1, m1, k2, m2]));
        }
    }

    let (b, lik, [k1, m1, k2, m2]) = best.unwrap();
    let frac = |k: u32, m: u32| if m == 0 { 0.5 } else { k as f64 / m as f64 };
    let loglik = (lik.0 as f64).ln() - (lik.1 as f64).ln();
    (b, frac(k1, m1), frac(k2, m2), loglik)
}

/// Oracle prediction for the threshold class: per-label exact genie fit on
/// training plus the hypothesized test point, scored by the fitted side
/// fraction at the test feature, then normalized directly.
pub fn oracle_threshold_pnml(train: &[(f64, usize)], x: f64) -> (Vec<f64>, f64) {
    let mut scores = Vec::with_capacity(2);
    for y in 0..2usize {
        let mut joint = train.to_vec();
        joint.push((x, y));
        let (b, p1, p2, _) = oracle_threshold_fit(&joint);
        let p_one = if x <= b { p1 } else { p2 };
        scores.push(if y == 1 { p_one } else { 1.0 - p_one });
    }
    let mass: f64 = scores.iter().sum();
    (scores.iter().map(|s| s / mass).collect(), mass.ln())
}

/// Brute-force Bernoulli genie maximization over a dense parameter grid.
/// The log tables are precomputed once so sweeping thousands of `(n, k)`
/// pairs stays cheap; per query the grid is augmented with the exact
/// per-label ML fractions so it always contains the true optima.
pub struct BernoulliGridOracle {
    ps: Vec<f64>,
    log_p: Vec<f64>,
    log_q: Vec<f64>,
}

impl BernoulliGridOracle {
    pub fn new(grid_points: usize) -> Self {
        let ps: Vec<f64> = (0..=grid_points)
            .map(|i| i as f64 / grid_points as f64)
            .collect();
        let log_p = ps.iter().map(|p| p.ln()).collect();
        let log_q = ps.iter().map(|p| (1.0 - p).ln()).collect();
        Self { ps, log_p, log_q }
    }

    /// Best grid parameter for a joint sample with `k` ones and `zeros` zeros.
    fn best_p(&self, k: f64, zeros: f64, extra: f64) -> f64 {
        let mut best_joint = if k > 0.0 { k * extra.ln() } else { 0.0 }
            + if zeros > 0.0 { zeros * (1.0 - extra).ln() } else { 0.0 };
        let mut best_p = extra;
        for i in 0..self.ps.len() {
            let joint = if k > 0.0 { k * self.log_p[i] } else { 0.0 }
                + if zeros > 0.0 { zeros * self.log_q[i] } else { 0.0 };
            if joint > best_joint {
                best_joint = joint;
                best_p = self.ps[i];
            }
        }
        best_p
    }

    /// `(q(1), gamma)` for a training set with `ones` ones out of `n`.
    pub fn pnml(&self, n: u32, ones: u32) -> (f64, f64) {
        let score1 = self.best_p(
            (ones + 1) as f64,
            (n - ones) as f64,
            (ones + 1) as f64 / (n + 1) as f64,
        );
        let score0 = 1.0
            - self.best_p(
                ones as f64,
                (n - ones + 1) as f64,
                ones as f64 / (n + 1) as f64,
            );
        let mass = score0 + score1;
        (score1 / mass, mass.ln())
    }
}
