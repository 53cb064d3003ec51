use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{natural_cmp, to_upper_only, ConstraintSet, Instance, Ranking, ValueModel};
use crate::oracle::best_response;

/// Largest instance accepted by [`enumerate_valid_rankings`].
pub const ENUMERATION_LIMIT: usize = 10;

/// Every valid ranking, ordered lexicographically by the id sequence.
pub fn enumerate_valid_rankings(instance: &Instance, constraints: &ConstraintSet) -> Result<Vec<Ranking>> {
    let n = instance.len();
    if n > ENUMERATION_LIMIT {
        return Err(Error::InstanceTooLarge {
            n,
            limit: ENUMERATION_LIMIT,
        });
    }
    constraints.check_shape(instance)?;
    let mut candidates: Vec<usize> = (0..n).collect();
    candidates.sort_by(|&a, &b| natural_cmp(&instance.individual(a).id, &instance.individual(b).id));

    let mut out = Vec::new();
    let mut prefix = Vec::with_capacity(n);
    let mut used = vec![false; n];
    let mut counts = vec![0usize; instance.num_groups()];
    extend(instance, constraints, &candidates, &mut prefix, &mut used, &mut counts, &mut out);
    Ok(out)
}

fn extend(
    instance: &Instance,
    constraints: &ConstraintSet,
    candidates: &[usize],
    prefix: &mut Vec<usize>,
    used: &mut [bool],
    counts: &mut [usize],
    out: &mut Vec<Ranking>,
) {
    let n = candidates.len();
    if prefix.len() == n {
        out.push(Ranking::from_order(prefix.clone()).expect("prefix is a permutation"));
        return;
    }
    let i = prefix.len();
    for &u in candidates {
        if used[u] {
            continue;
        }
        let k = instance.group_of(u);
        counts[k] += 1;
        let ok = (0..counts.len())
            .all(|g| counts[g] <= constraints.upper(g)[i] && counts[g] >= constraints.lower(g)[i]);
        if ok {
            used[u] = true;
            prefix.push(u);
            extend(instance, constraints, candidates, prefix, used, counts, out);
            prefix.pop();
            used[u] = false;
        }
        counts[k] -= 1;
    }
}

/// `H(X) = max_r sum_{u in X} V(r, u)` over valid rankings, via the oracle
/// with indicator weights.
pub fn h_value(
    instance: &Instance,
    constraints: &ConstraintSet,
    model: &ValueModel,
    set: &[usize],
) -> Result<f64> {
    let upper_only = to_upper_only(constraints, instance)?;
    h_upper_only(instance, &upper_only, model, set)
}

pub(crate) fn h_upper_only(
    instance: &Instance,
    upper_only: &ConstraintSet,
    model: &ValueModel,
    set: &[usize],
) -> Result<f64> {
    if set.is_empty() {
        return Ok(0.0);
    }
    let mut weights = vec![0.0; instance.len()];
    for &u in set {
        if u >= weights.len() {
            return Err(Error::InvalidWeights(format!("individual {u} out of range")));
        }
        weights[u] = 1.0;
    }
    Ok(best_response(instance, upper_only, model, &weights)?.objective)
}

/// Samples `trials` triples `X ⊆ Y`, `Z` disjoint from `Y`, and checks
/// `H(X ∪ Z) - H(X) >= H(Y ∪ Z) - H(Y)`.
pub fn submodularity_check(
    instance: &Instance,
    constraints: &ConstraintSet,
    model: &ValueModel,
    trials: usize,
    seed: u64,
) -> Result<bool> {
    let upper_only = to_upper_only(constraints, instance)?;
    let n = instance.len();
    let (lo, hi) = model.range();
    let tol = 1e-9 * (hi - lo).abs().max(1.0) * n as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = |s: &[usize]| h_upper_only(instance, &upper_only, model, s);
    for _ in 0..trials {
        // 0: outside, 1: X (and Y), 2: Y only, 3: Z
        let labels: Vec<u8> = (0..n).map(|_| rng.gen_range(0..4)).collect();
        let pick = |accept: &dyn Fn(u8) -> bool| (0..n).filter(|&u| accept(labels[u])).collect::<Vec<_>>();
        let x = pick(&|l| l == 1);
        let y = pick(&|l| l == 1 || l == 2);
        let xz = pick(&|l| l == 1 || l == 3);
        let yz = pick(&|l| l >= 1);
        if h(&xz)? - h(&x)? < h(&yz)? - h(&y)? - tol {
            return Ok(false);
        }
    }
    Ok(true)
}
