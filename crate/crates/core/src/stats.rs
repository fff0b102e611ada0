//! Spearman rank correlation between two country-keyed series.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::StatsError;

/// Real values keyed by iso3 code.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexedSeries {
    pub name: String,
    pub values: BTreeMap<String, f64>,
}

impl IndexedSeries {
    pub fn new(name: impl Into<String>, values: impl IntoIterator<Item = (String, f64)>) -> Self {
        IndexedSeries { name: name.into(), values: values.into_iter().collect() }
    }

    fn check_finite(&self) -> Result<(), StatsError> {
        match self.values.iter().find(|(_, v)| !v.is_finite()) {
            Some((k, _)) => Err(StatsError::NonFinite { name: self.name.clone(), key: k.clone() }),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PValueMethod {
    /// Student-t with `n - 2` degrees of freedom.
    TApprox,
    /// Seeded permutations of one series.
    Permutation { permutations: usize, seed: u64 },
}

impl PValueMethod {
    pub fn name(&self) -> &'static str {
        match self {
            PValueMethod::TApprox => "t-approximation",
            PValueMethod::Permutation { .. } => "permutation",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationResult {
    pub r: f64,
    pub p: f64,
    pub n: usize,
    pub method: PValueMethod,
}

/// Average (fractional) ranks, 1-based.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // positions start..end share the mean of ranks start+1..=end
        let rank = (start + end + 1) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0)
}

fn has_variance(ranks: &[f64]) -> bool {
    ranks.iter().any(|r| *r != ranks[0])
}

fn t_p_value(r: f64, n: usize) -> f64 {
    if r.abs() >= 1.0 {
        return 0.0;
    }
    let df = (n - 2) as f64;
    let t = r * (df / (1.0 - r * r)).sqrt();
    let dist = StudentsT::new(0.0, 1.0, df).expect("df >= 1");
    (2.0 * (1.0 - dist.cdf(t.abs()))).clamp(0.0, 1.0)
}

fn trial_seed(seed: u64, trial: usize) -> u64 {
    let mut z = seed.wrapping_add((trial as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Two-sided permutation p-value, `(hits + 1) / (permutations + 1)`.
fn permutation_p_value(rx: &[f64], ry: &[f64], r: f64, permutations: usize, seed: u64) -> f64 {
    let threshold = r.abs() - 1e-12;
    let hits: usize = (0..permutations)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(seed, trial));
            let mut shuffled = ry.to_vec();
            shuffled.shuffle(&mut rng);
            usize::from(pearson(rx, &shuffled).abs() >= threshold)
        })
        .sum();
    (hits + 1) as f64 / (permutations + 1) as f64
}

/// Spearman correlation over the keys both series share.
pub fn spearman(a: &IndexedSeries, b: &IndexedSeries, method: PValueMethod) -> Result<CorrelationResult, StatsError> {
    a.check_finite()?;
    b.check_finite()?;
    if let PValueMethod::Permutation { permutations, .. } = method {
        if permutations < 1000 {
            return Err(StatsError::TooFewPermutations(permutations));
        }
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = a
        .values
        .iter()
        .filter_map(|(k, x)| b.values.get(k).map(|y| (*x, *y)))
        .unzip();
    let n = xs.len();
    if n < 3 {
        return Err(StatsError::InsufficientOverlap(n));
    }
    let rx = average_ranks(&xs);
    let ry = average_ranks(&ys);
    if !has_variance(&rx) {
        return Err(StatsError::ZeroVariance(a.name.clone()));
    }
    if !has_variance(&ry) {
        return Err(StatsError::ZeroVariance(b.name.clone()));
    }
    let r = pearson(&rx, &ry);
    let p = match method {
        PValueMethod::TApprox => t_p_value(r, n),
        PValueMethod::Permutation { permutations, seed } => permutation_p_value(&rx, &ry, r, permutations, seed),
    };
    Ok(CorrelationResult { r, p, n, method })
}
