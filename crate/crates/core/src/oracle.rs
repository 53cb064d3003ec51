//! Weighted optimization oracle for ranking under upper-bound group
//! constraints.
//!
//! Given nonnegative weights `w`, the oracle returns a valid ranking that
//! maximizes `sum_u w(u) * V(r, u)`. Because `w(u) * (f(i) - g(u))` is a Monge
//! matrix once rows and columns are sorted, a greedy fill in weight order is
//! optimal, and the answer depends only on the weight *order*.

use std::collections::HashMap;
use std::rc::Rc;

use crate::error::{Error, Result};
use crate::model::{ConstraintSet, Instance, Ranking, ValueModel};

/// Best response to a weight vector.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub ranking: Ranking,
    /// `V(r, u)` indexed by individual.
    pub values: Vec<f64>,
    /// `sum_u w(u) * V(r, u)`.
    pub objective: f64,
}

/// Individuals sorted by descending weight, ties broken by the merit order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OrderKey(Vec<u32>);

impl OrderKey {
    pub fn permutation(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().map(|&u| u as usize)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

pub fn weight_order_key(instance: &Instance, weights: &[f64]) -> OrderKey {
    let mut order: Vec<u32> = (0..weights.len() as u32).collect();
    order.sort_by(|&a, &b| {
        weights[b as usize]
            .total_cmp(&weights[a as usize])
            .then_with(|| {
                instance
                    .merit_rank(a as usize)
                    .cmp(&instance.merit_rank(b as usize))
            })
    });
    OrderKey(order)
}

fn check_weights(instance: &Instance, weights: &[f64]) -> Result<()> {
    if weights.len() != instance.len() {
        return Err(Error::InvalidWeights(format!(
            "{} weights for {} individuals",
            weights.len(),
            instance.len()
        )));
    }
    if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
        return Err(Error::InvalidWeights(format!(
            "weights must be finite and nonnegative, found {w}"
        )));
    }
    Ok(())
}

/// Fills positions top to bottom, each time taking the earliest individual in
/// `priority` whose group still has room under the upper bounds.
///
/// Within a group the earliest unplaced member is always the candidate, so
/// only one head per group needs to be compared.
pub fn greedy_fill(
    instance: &Instance,
    constraints: &ConstraintSet,
    priority: impl IntoIterator<Item = usize>,
) -> Result<Ranking> {
    if constraints.has_lower_bounds() {
        return Err(Error::InvalidConstraints(
            "greedy placement requires upper-bound-only constraints".into(),
        ));
    }
    let n = instance.len();
    let t = instance.num_groups();
    if constraints.len() != n || constraints.num_groups() != t {
        return Err(Error::InvalidConstraints(
            "constraint shape does not match the instance".into(),
        ));
    }
    // queues[k] holds (rank in priority, individual) for group k, in priority order
    let mut queues: Vec<Vec<(usize, usize)>> = vec![Vec::new(); t];
    for (rank, u) in priority.into_iter().enumerate() {
        queues[instance.group_of(u)].push((rank, u));
    }
    let mut heads = vec![0usize; t];
    let mut counts = vec![0usize; t];
    let mut order = Vec::with_capacity(n);
    for i in 0..n {
        let mut pick: Option<(usize, usize, usize)> = None;
        for k in 0..t {
            if counts[k] + 1 > constraints.upper(k)[i] {
                continue;
            }
            if let Some(&(rank, u)) = queues[k].get(heads[k]) {
                if pick.is_none_or(|(best, _, _)| rank < best) {
                    pick = Some((rank, u, k));
                }
            }
        }
        let (_, u, k) = pick.ok_or_else(|| {
            Error::InfeasibleConstraints(format!("no individual can be placed at position {}", i + 1))
        })?;
        heads[k] += 1;
        counts[k] += 1;
        order.push(u);
    }
    Ranking::from_order(order)
}

/// Valid ranking maximizing `sum_u w(u) * V(r, u)` under upper-only
/// constraints. Equal weights are resolved by the merit order.
pub fn best_response(
    instance: &Instance,
    constraints: &ConstraintSet,
    model: &ValueModel,
    weights: &[f64],
) -> Result<OracleResult> {
    check_weights(instance, weights)?;
    let key = weight_order_key(instance, weights);
    let ranking = greedy_fill(instance, constraints, key.permutation())?;
    let values = model.values(&ranking);
    let objective = dot(weights, &values);
    Ok(OracleResult {
        ranking,
        values,
        objective,
    })
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Verifies the quadrangle inequality `W[i][u] + W[j][v] >= W[i][v] + W[j][u]`
/// for `W[i][u] = w(u) * (f(i) - g(u))`, rows sorted by descending `f` and
/// columns by descending weight.
pub fn check_monge(instance: &Instance, model: &ValueModel, weights: &[f64]) -> bool {
    let n = instance.len();
    if weights.len() != n {
        return false;
    }
    let cols: Vec<usize> = weight_order_key(instance, weights).permutation().collect();
    let mut rows: Vec<usize> = (0..n).collect();
    rows.sort_by(|&a, &b| model.f(b).total_cmp(&model.f(a)));
    let w = |i: usize, u: usize| weights[cols[u]] * (model.f(rows[i]) - model.g(cols[u]));
    let mut scale = 1.0f64;
    for i in 0..n {
        for u in 0..n {
            scale = scale.max(w(i, u).abs());
        }
    }
    let tol = 1e-9 * scale;
    for i in 0..n {
        for j in i + 1..n {
            for u in 0..n {
                for v in u + 1..n {
                    let lhs = w(i, u) + w(j, v);
                    let rhs = w(i, v) + w(j, u);
                    if lhs < rhs - tol {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// A best response stored by weight order.
#[derive(Debug, Clone, PartialEq)]
pub struct CachedResponse {
    pub ranking: Ranking,
    pub values: Vec<f64>,
}

/// Memoizes oracle answers by [`OrderKey`]. Confined to one solver thread.
#[derive(Debug, Default)]
pub struct OracleCache {
    entries: HashMap<OrderKey, Rc<CachedResponse>>,
    hits: u64,
    misses: u64,
    enabled: bool,
}

impl OracleCache {
    pub fn new() -> Self {
        OracleCache {
            enabled: true,
            ..Default::default()
        }
    }

    /// A cache that never stores anything; every lookup calls the oracle.
    pub fn disabled() -> Self {
        OracleCache::default()
    }

    pub fn respond(
        &mut self,
        instance: &Instance,
        constraints: &ConstraintSet,
        model: &ValueModel,
        key: &OrderKey,
    ) -> Result<Rc<CachedResponse>> {
        if let Some(hit) = self.entries.get(key) {
            self.hits += 1;
            return Ok(Rc::clone(hit));
        }
        self.misses += 1;
        let ranking = greedy_fill(instance, constraints, key.permutation())?;
        let values = model.values(&ranking);
        let response = Rc::new(CachedResponse { ranking, values });
        if self.enabled {
            self.entries.insert(key.clone(), Rc::clone(&response));
        }
        Ok(response)
    }

    /// Number of actual oracle evaluations.
    pub fn oracle_calls(&self) -> u64 {
        self.misses
    }

    pub fn hits(&self) -> u64 {
        self.hits
    }

    pub fn clear(&mut self) {
        self.entries.clear();
        self.hits = 0;
        self.misses = 0;
    }
}
