//! Brute-force oracles and random case generators shared by the
//! integration tests.
#![allow(dead_code)]

use maxmin_rank::model::{
    build_alpha_constraints, feasibility_check, to_upper_only, AlphaRule, ConstraintSet, Instance,
    Ranking, ValueModel,
};
use maxmin_rank::synthetic::random_instance;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for item in 0..n {
        let mut next = Vec::with_capacity(out.len() * (item + 1));
        for p in &out {
            for i in 0..=p.len() {
                let mut q = p.clone();
                q.insert(i, item);
                next.push(q);
            }
        }
        out = next;
    }
    out
}

/// Prefix-count check written independently of the library.
pub fn satisfies(order: &[usize], instance: &Instance, c: &ConstraintSet) -> bool {
    let mut counts = vec![0usize; instance.num_groups()];
    for (i, &u) in order.iter().enumerate() {
        counts[instance.group_of(u)] += 1;
        for (k, &count) in counts.iter().enumerate() {
            if count > c.upper(k)[i] || count < c.lower(k)[i] {
                return false;
            }
        }
    }
    true
}

pub fn brute_valid(instance: &Instance, c: &ConstraintSet) -> Vec<Ranking> {
    permutations(instance.len())
        .into_iter()
        .filter(|p| satisfies(p, instance, c))
        .map(|p| Ranking::from_order(p).unwrap())
        .collect()
}

pub fn brute_max(valid: &[Ranking], model: &ValueModel, weights: &[f64]) -> f64 {
    valid
        .iter()
        .map(|r| model.values(r).iter().zip(weights).map(|(v, w)| v * w).sum::<f64>())
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Random constraints for `instance`: a ceil-alpha rule, the floor-balanced
/// rule (two groups), or random prefix upper bounds.
pub fn random_constraints(instance: &Instance, rng: &mut ChaCha8Rng) -> ConstraintSet {
    let n = instance.len();
    let t = instance.num_groups();
    match rng.gen_range(0..3) {
        0 => build_alpha_constraints(
            instance,
            &AlphaRule::CeilAlpha {
                alpha: rng.gen_range(0.0..=0.5),
                protected: rng.gen_range(0..t),
                start_k: rng.gen_range(1..=3),
            },
        )
        .unwrap(),
        1 if t == 2 => build_alpha_constraints(instance, &AlphaRule::FloorBalanced { start_k: rng.gen_range(1..=4) }).unwrap(),
        _ => {
            let upper = (0..t)
                .map(|_| {
                    let mut row = Vec::with_capacity(n);
                    let mut cur = rng.gen_range(0..=1usize);
                    for i in 0..n {
                        if i > 0 && rng.gen_bool(0.6) {
                            cur += 1;
                        }
                        row.push(cur.min(i + 1));
                    }
                    row
                })
                .collect();
            ConstraintSet::from_bounds(n, upper, vec![vec![0; n]; t])
                .unwrap_or_else(|_| ConstraintSet::vacuous_for(instance))
        }
    }
}

/// A feasible random instance with `groups` groups and size in `sizes`.
pub fn random_case(seed: u64, sizes: std::ops::RangeInclusive<usize>, groups: usize) -> (Instance, ConstraintSet) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let n = rng.gen_range(sizes.clone()).max(groups);
        let instance = random_instance(n, groups, rng.gen());
        let c = random_constraints(&instance, &mut rng);
        let ok = to_upper_only(&c, &instance)
            .and_then(|u| feasibility_check(&instance, &u))
            .unwrap_or(false);
        if ok {
            return (instance, c);
        }
    }
}

pub fn random_model(instance: &Instance, rng: &mut ChaCha8Rng) -> ValueModel {
    match rng.gen_range(0..3) {
        0 => ValueModel::position_diff(instance),
        1 => ValueModel::log_ratio(instance),
        _ => ValueModel::top_k(instance, rng.gen_range(1..=instance.len())),
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random convex combination of `valid`'s satisfaction vectors.
pub fn random_mixture(valid: &[Ranking], model: &ValueModel, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let atoms = rng.gen_range(1..=valid.len().min(6));
    let picks: Vec<(usize, f64)> = (0..atoms).map(|_| (rng.gen_range(0..valid.len()), rng.gen::<f64>() + 1e-3)).collect();
    let total: f64 = picks.iter().map(|(_, w)| w).sum();
    let mut out = vec![0.0; model.len()];
    for (i, w) in picks {
        for (o, v) in out.iter_mut().zip(model.values(&valid[i])) {
            *o += w / total * v;
        }
    }
    out
}

pub fn sorted(v: &[f64]) -> Vec<f64> {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    s
}
