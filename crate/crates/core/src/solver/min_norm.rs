//! Wolfe's minimum-norm-point algorithm over the satisfaction polytope.
//!
//! The linear minimization step `argmin_S <x, V(S, .)>` is one oracle call
//! with weights `max(x) - x`: since `sum_u V(S, u)` is the same for every
//! ranking, adding a constant to all weights does not change the argmax.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::model::{ConstraintSet, Instance, Ranking, ValueModel};
use crate::oracle::{dot, weight_order_key, OracleCache};

use super::SolverConfig;

pub(crate) struct MinNormOutcome {
    pub atoms: Vec<(Ranking, f64)>,
    pub oracle_calls: u64,
    /// Distinct satisfaction levels of the result, ascending.
    pub levels: Vec<f64>,
}

/// Coefficients below this are treated as zero when shrinking the corral.
const COEF_EPS: f64 = 1e-14;

struct Corral {
    rankings: Vec<Ranking>,
    points: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

impl Corral {
    fn point(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.points[0].len()];
        for (p, &w) in self.points.iter().zip(&self.weights) {
            for (xi, pi) in x.iter_mut().zip(p) {
                *xi += w * pi;
            }
        }
        x
    }

    fn remove_zero_weights(&mut self, forced: usize) {
        self.weights[forced] = 0.0;
        let mut i = 0;
        while i < self.weights.len() {
            if self.weights[i] <= COEF_EPS {
                self.weights.remove(i);
                self.points.remove(i);
                self.rankings.remove(i);
            } else {
                i += 1;
            }
        }
        let total: f64 = self.weights.iter().sum();
        for w in self.weights.iter_mut() {
            *w /= total;
        }
    }
}

/// Affine combination of `points` (coefficients summing to one) with the
/// smallest Euclidean norm.
fn affine_minimizer(points: &[Vec<f64>]) -> Vec<f64> {
    let m = points.len();
    if m == 1 {
        return vec![1.0];
    }
    let dim = points[0].len();
    let base = &points[0];
    let d = DMatrix::from_fn(dim, m - 1, |r, c| points[c + 1][r] - base[r]);
    let rhs = DVector::from_fn(dim, |r, _| -base[r]);
    let svd = d.svd(true, true);
    let cutoff = 1e-12 * svd.singular_values.max().max(f64::MIN_POSITIVE);
    let beta = svd
        .solve(&rhs, cutoff)
        .expect("both singular vector sets were computed");
    let mut alpha = Vec::with_capacity(m);
    alpha.push(1.0 - beta.sum());
    alpha.extend(beta.iter().copied());
    alpha
}

pub(crate) fn solve(
    instance: &Instance,
    constraints: &ConstraintSet,
    model: &ValueModel,
    config: &SolverConfig,
) -> Result<MinNormOutcome> {
    let n = instance.len();
    let center = model.total() / n as f64;
    let centered = |values: &[f64]| values.iter().map(|v| v - center).collect::<Vec<_>>();
    // |x_u - x*_u| <= sqrt(gap) for every u
    let tolerance = (config.epsilon / 2.0).powi(2);

    let mut cache = if config.memoize {
        OracleCache::new()
    } else {
        OracleCache::disabled()
    };

    let start = cache.respond(instance, constraints, model, &weight_order_key(instance, &vec![1.0; n]))?;
    let mut corral = Corral {
        rankings: vec![start.ranking.clone()],
        points: vec![centered(&start.values)],
        weights: vec![1.0],
    };
    let mut x = corral.point();
    let mut iterations = 0u64;

    'major: loop {
        iterations += 1;
        if iterations > config.max_iterations_cap {
            return Err(Error::IterationCapExceeded {
                cap: config.max_iterations_cap,
            });
        }
        let xmax = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<f64> = x.iter().map(|xi| xmax - xi).collect();
        let response = cache.respond(instance, constraints, model, &weight_order_key(instance, &weights))?;
        let q = centered(&response.values);
        let gap = dot(&x, &x) - dot(&x, &q);
        if gap <= tolerance || corral.rankings.contains(&response.ranking) {
            break;
        }
        corral.rankings.push(response.ranking.clone());
        corral.points.push(q);
        corral.weights.push(0.0);

        let mut minor = 0;
        loop {
            let alpha = affine_minimizer(&corral.points);
            if alpha.iter().all(|&a| a > COEF_EPS) {
                corral.weights = alpha;
                break;
            }
            let mut theta = f64::INFINITY;
            let mut argmin = 0;
            for (i, (&a, &w)) in alpha.iter().zip(&corral.weights).enumerate() {
                if a <= COEF_EPS {
                    let step = if w - a > 0.0 { w / (w - a) } else { 0.0 };
                    if step < theta {
                        theta = step;
                        argmin = i;
                    }
                }
            }
            if theta <= 0.0 && argmin + 1 == corral.points.len() {
                // the new vertex cannot enter: numerical floor reached
                corral.weights.pop();
                corral.points.pop();
                corral.rankings.pop();
                break 'major;
            }
            for (w, &a) in corral.weights.iter_mut().zip(&alpha) {
                *w = theta * a + (1.0 - theta) * *w;
            }
            corral.remove_zero_weights(argmin);
            minor += 1;
            if minor > n + 2 {
                break 'major;
            }
        }
        x = corral.point();
    }

    let x = corral.point();
    let levels = group_levels(&x, config.epsilon)
        .into_iter()
        .map(|l| l + center)
        .collect();
    Ok(MinNormOutcome {
        atoms: corral.rankings.into_iter().zip(corral.weights).collect(),
        oracle_calls: cache.oracle_calls(),
        levels,
    })
}

/// Sorted values grouped into levels: a new level starts whenever a value
/// exceeds the first value of the current level by more than `tol`.
fn group_levels(values: &[f64], tol: f64) -> Vec<f64> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut levels: Vec<(f64, f64, usize)> = Vec::new();
    for v in sorted {
        match levels.last_mut() {
            Some((first, sum, count)) if v - *first <= tol => {
                *sum += v;
                *count += 1;
            }
            _ => levels.push((v, v, 1)),
        }
    }
    levels.into_iter().map(|(_, s, c)| s / c as f64).collect()
}
