//! Seeded synthetic instances.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{Individual, Instance};

/// Two groups of `per_group` individuals each. Group `"M"` scores are drawn
/// from `U(0.4, 1.0)` and group `"F"` scores from `U(0.1, 0.7)`, so `"M"`
/// dominates the top of the merit ranking.
pub fn skewed_two_group(per_group: usize, seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut individuals = Vec::with_capacity(2 * per_group);
    for i in 0..per_group {
        individuals.push(Individual::new(format!("m{}", i + 1), 0, rng.gen_range(0.4..1.0)));
        individuals.push(Individual::new(format!("f{}", i + 1), 1, rng.gen_range(0.1..0.7)));
    }
    Instance::new(individuals, vec!["M".into(), "F".into()]).expect("generated instance is valid")
}

/// `n` individuals spread over `groups` groups with scores on a coarse grid,
/// so ties occur. Every group is nonempty when `n >= groups`.
pub fn random_instance(n: usize, groups: usize, seed: u64) -> Instance {
    assert!(groups >= 1 && n >= groups, "need at least one individual per group");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let individuals = (0..n)
        .map(|u| {
            let group = if u < groups { u } else { rng.gen_range(0..groups) };
            let score = f64::from(rng.gen_range(0..=20u32)) / 20.0;
            Individual::new(format!("u{}", u + 1), group, score)
        })
        .collect();
    let labels = (0..groups).map(|k| format!("G{}", k + 1)).collect();
    Instance::new(individuals, labels).expect("generated instance is valid")
}
