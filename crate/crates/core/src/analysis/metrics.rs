use serde::{Deserialize, Serialize};

use crate::model::{Instance, Ranking, ValueModel};
use crate::solver::FairDistribution;

/// Gini index after min-max normalization to `[0, 1]`.
pub fn gini(values: &[f64]) -> f64 {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    gini_in_range(values, lo, hi)
}

/// Gini index after mapping `[lo, hi]` onto `[0, 1]`. Lets vectors be
/// compared under one normalization.
pub fn gini_in_range(values: &[f64], lo: f64, hi: f64) -> f64 {
    let n = values.len();
    if n == 0 || hi <= lo {
        return 0.0;
    }
    let x: Vec<f64> = values.iter().map(|v| (v - lo) / (hi - lo)).collect();
    let mean = x.iter().sum::<f64>() / n as f64;
    if mean <= 0.0 {
        return 0.0;
    }
    // sum_{i,j} |x_i - x_j| = 2 sum_i (2i - n + 1) x_(i) over the sorted vector
    let mut sorted = x;
    sorted.sort_by(f64::total_cmp);
    let pairwise: f64 = sorted
        .iter()
        .enumerate()
        .map(|(i, v)| (2.0 * i as f64 - n as f64 + 1.0) * v)
        .sum::<f64>()
        * 2.0;
    pairwise / (2.0 * (n * n) as f64 * mean)
}

pub fn spread(values: &[f64]) -> f64 {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if values.is_empty() {
        0.0
    } else {
        hi - lo
    }
}

/// Generalized Lorenz dominance of `a` over `b`: every prefix sum of sorted
/// `a` is at least the matching prefix sum of sorted `b`, up to `tol`.
pub fn lorenz_dominates(a: &[f64], b: &[f64], tol: f64) -> bool {
    assert_eq!(a.len(), b.len(), "vectors must have equal length");
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut sa, mut sb) = (0.0, 0.0);
    a.iter().zip(&b).all(|(x, y)| {
        sa += x;
        sb += y;
        sa >= sb - tol
    })
}

/// `sum_u R(u) / log2(r(u) + 1)` with 1-based positions.
pub fn dcg(instance: &Instance, ranking: &Ranking) -> f64 {
    ranking
        .order()
        .iter()
        .enumerate()
        .map(|(pos, &u)| instance.individual(u).relevance / ((pos + 2) as f64).log2())
        .sum()
}

/// Probability-weighted mean and standard deviation of DCG over the support.
pub fn distribution_dcg(instance: &Instance, distribution: &FairDistribution) -> (f64, f64) {
    let scores: Vec<(f64, f64)> = distribution
        .support
        .iter()
        .map(|a| (a.probability, dcg(instance, &a.ranking)))
        .collect();
    let mean: f64 = scores.iter().map(|(p, d)| p * d).sum();
    let var: f64 = scores.iter().map(|(p, d)| p * (d - mean).powi(2)).sum();
    (mean, var.max(0.0).sqrt())
}

/// Summary statistics of an outcome. `gini` normalizes by the value model's
/// full range so reports on one instance are comparable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub min_value: f64,
    pub spread: f64,
    pub gini: f64,
    pub dcg_mean: f64,
    pub dcg_std: f64,
}

impl MetricsReport {
    pub fn for_distribution(instance: &Instance, model: &ValueModel, distribution: &FairDistribution) -> Self {
        let (dcg_mean, dcg_std) = distribution_dcg(instance, distribution);
        Self::from_values(model, &distribution.expected_satisfaction, dcg_mean, dcg_std)
    }

    pub fn for_ranking(instance: &Instance, model: &ValueModel, ranking: &Ranking) -> Self {
        Self::from_values(model, &model.values(ranking), dcg(instance, ranking), 0.0)
    }

    fn from_values(model: &ValueModel, values: &[f64], dcg_mean: f64, dcg_std: f64) -> Self {
        let (lo, hi) = model.range();
        MetricsReport {
            min_value: values.iter().copied().fold(f64::INFINITY, f64::min),
            spread: spread(values),
            gini: gini_in_range(values, lo, hi),
            dcg_mean,
            dcg_std,
        }
    }
}
