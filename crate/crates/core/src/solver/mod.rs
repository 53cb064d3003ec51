//! Maxmin-fair distributions over valid rankings.
//!
//! A distribution is maxmin-fair when its ascending vector of expected
//! satisfactions is lexicographically maximal. Two engines compute one, both
//! driven only by the weighted optimization oracle:
//!
//! * [`Engine::MinNorm`] (default) runs Wolfe's minimum-norm-point algorithm
//!   over the convex hull of the rankings' satisfaction vectors. Under upper
//!   bounds that hull is the base polytope of the submodular function `H`, and
//!   its minimum-norm point is the lexicographically optimal vector. The
//!   duality gap `g` certifies `|D[u] - F[u]| <= sqrt(g)` for every `u`.
//! * [`Engine::Mwu`] freezes individuals phase by phase. Each phase binary
//!   searches the next level and tests every guess with a zero-sum game
//!   solved by multiplicative weights.

mod min_norm;
mod mwu;

pub use mwu::{binary_search_lambda, feasibility_game, GameOutcome, Mixture, PhaseState};

use std::collections::HashMap;

use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{feasibility_check, to_upper_only, ConstraintSet, Instance, Ranking, ValueModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Engine {
    #[default]
    MinNorm,
    Mwu,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Additive error allowed in each expected satisfaction, in units of `V`.
    pub epsilon: f64,
    /// Upper limit on oracle rounds (MWU rounds or min-norm iterations).
    pub max_iterations_cap: u64,
    /// Atoms below this probability are dropped from the output.
    pub prune_threshold: f64,
    pub engine: Engine,
    /// Reuse best responses for repeated weight orders.
    pub memoize: bool,
    /// MWU only: start from a two-phase error budget and double on overflow.
    pub doubling_trick: bool,
    /// MWU only: stop a game early once the primal mixture or the
    /// order-restricted dual bound settles the guess.
    pub early_stop: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            epsilon: 0.01,
            max_iterations_cap: 200_000_000,
            prune_threshold: 1e-9,
            engine: Engine::MinNorm,
            memoize: true,
            doubling_trick: false,
            early_stop: false,
        }
    }
}

impl SolverConfig {
    pub fn with_epsilon(epsilon: f64) -> Self {
        SolverConfig {
            epsilon,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        if !(0.0..1.0).contains(&self.prune_threshold) {
            return Err(Error::InvalidConfig(format!(
                "prune threshold must lie in [0, 1), got {}",
                self.prune_threshold
            )));
        }
        if self.max_iterations_cap == 0 {
            return Err(Error::InvalidConfig("iteration cap must be positive".into()));
        }
        Ok(())
    }
}

/// Positive affine map sending `V` into `[0, 1]`: `(v - shift) * scale`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineMap {
    pub shift: f64,
    pub scale: f64,
}

impl AffineMap {
    pub const IDENTITY: AffineMap = AffineMap {
        shift: 0.0,
        scale: 1.0,
    };

    pub fn apply(&self, v: f64) -> f64 {
        (v - self.shift) * self.scale
    }

    pub fn invert(&self, a: f64) -> f64 {
        a / self.scale + self.shift
    }
}

/// Normalization of satisfactions to `[0, 1]` using the extremes of `V`.
/// A model with a single attainable value maps through the identity.
pub fn normalize_satisfaction(model: &ValueModel) -> AffineMap {
    let (lo, hi) = model.range();
    if hi > lo {
        AffineMap {
            shift: lo,
            scale: 1.0 / (hi - lo),
        }
    } else {
        AffineMap::IDENTITY
    }
}

/// One ranking in the support of a distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub ranking: Ranking,
    pub probability: f64,
    /// `V(ranking, u)` indexed by individual.
    pub values: Vec<f64>,
}

/// A finite distribution over valid rankings.
#[derive(Debug, Clone, PartialEq)]
pub struct FairDistribution {
    pub support: Vec<Atom>,
    /// `sum_S p_S * V(S, u)` indexed by individual.
    pub expected_satisfaction: Vec<f64>,
    pub oracle_calls: u64,
    /// Satisfaction level fixed at each phase, ascending, in units of `V`.
    pub lambda_phases: Vec<f64>,
    pub epsilon: f64,
}

impl FairDistribution {
    /// Builds a distribution from weighted rankings: merges duplicates,
    /// renormalizes and evaluates expected satisfactions.
    pub fn from_weighted(model: &ValueModel, atoms: impl IntoIterator<Item = (Ranking, f64)>) -> Self {
        let atoms = atoms
            .into_iter()
            .map(|(ranking, probability)| {
                let values = model.values(&ranking);
                Atom {
                    ranking,
                    probability,
                    values,
                }
            })
            .collect();
        Self::from_atoms(atoms)
    }

    fn from_atoms(atoms: Vec<Atom>) -> Self {
        let mut index: HashMap<Ranking, usize> = HashMap::new();
        let mut support: Vec<Atom> = Vec::new();
        for atom in atoms {
            if atom.probability <= 0.0 {
                continue;
            }
            match index.get(&atom.ranking) {
                Some(&i) => support[i].probability += atom.probability,
                None => {
                    index.insert(atom.ranking.clone(), support.len());
                    support.push(atom);
                }
            }
        }
        let total: f64 = support.iter().map(|a| a.probability).sum();
        for a in support.iter_mut() {
            a.probability /= total;
        }
        let expected_satisfaction = expectation(&support);
        FairDistribution {
            support,
            expected_satisfaction,
            oracle_calls: 0,
            lambda_phases: Vec::new(),
            epsilon: 0.0,
        }
    }

    pub fn support_size(&self) -> usize {
        self.support.len()
    }

    pub fn min_satisfaction(&self) -> f64 {
        self.expected_satisfaction
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// `E[f(r(u))]` indexed by individual.
    pub fn expected_position_utility(&self, model: &ValueModel) -> Vec<f64> {
        self.expected_satisfaction
            .iter()
            .enumerate()
            .map(|(u, d)| d + model.g(u))
            .collect()
    }
}

fn expectation(support: &[Atom]) -> Vec<f64> {
    let n = support.first().map_or(0, |a| a.values.len());
    let mut out = vec![0.0; n];
    for atom in support {
        for (o, v) in out.iter_mut().zip(&atom.values) {
            *o += atom.probability * v;
        }
    }
    out
}

/// Drops atoms below `threshold`, merges duplicate rankings and renormalizes.
/// If every atom falls below the threshold the most likely one is kept.
pub fn prune(distribution: &FairDistribution, threshold: f64) -> FairDistribution {
    let mut kept: Vec<Atom> = distribution
        .support
        .iter()
        .filter(|a| a.probability >= threshold)
        .cloned()
        .collect();
    if kept.is_empty() {
        if let Some(best) = distribution
            .support
            .iter()
            .max_by(|a, b| a.probability.total_cmp(&b.probability))
        {
            kept.push(best.clone());
        }
    }
    let mut out = FairDistribution::from_atoms(kept);
    out.oracle_calls = distribution.oracle_calls;
    out.lambda_phases = distribution.lambda_phases.clone();
    out.epsilon = distribution.epsilon;
    out
}

/// Index of one draw from `probabilities`, reproducible for a given seed.
pub fn sample_indices(probabilities: &[f64], seed: u64, count: usize) -> Vec<usize> {
    let dist = WeightedIndex::new(probabilities).expect("probabilities must be a valid distribution");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| dist.sample(&mut rng)).collect()
}

/// Draws one ranking of the support with its stated probability.
pub fn sample(distribution: &FairDistribution, seed: u64) -> &Ranking {
    let probs: Vec<f64> = distribution.support.iter().map(|a| a.probability).collect();
    &distribution.support[sample_indices(&probs, seed, 1)[0]].ranking
}

/// Computes a maxmin-fair distribution over the rankings valid under
/// `constraints`. Lower bounds are rewritten as upper bounds first, which
/// requires at most two groups.
pub fn solve_maxmin(
    instance: &Instance,
    constraints: &ConstraintSet,
    model: &ValueModel,
    config: &SolverConfig,
) -> Result<FairDistribution> {
    config.validate()?;
    if model.len() != instance.len() {
        return Err(Error::InvalidValueModel(format!(
            "value model covers {} individuals, instance has {}",
            model.len(),
            instance.len()
        )));
    }
    let upper_only = to_upper_only(constraints, instance)?;
    if !feasibility_check(instance, &upper_only)? {
        return Err(Error::InfeasibleConstraints(
            "no ranking satisfies the constraints".into(),
        ));
    }

    let (weighted, oracle_calls, lambda_phases) = if instance.len() == 1 {
        let r = instance.merit_ranking();
        let v = model.value(&r, 0);
        (vec![(r, 1.0)], 1, vec![v])
    } else {
        match config.engine {
            Engine::MinNorm => {
                let out = min_norm::solve(instance, &upper_only, model, config)?;
                (out.atoms, out.oracle_calls, out.levels)
            }
            Engine::Mwu => {
                let out = mwu::solve(instance, &upper_only, model, config)?;
                (out.atoms, out.oracle_calls, out.lambda_phases)
            }
        }
    };

    let mut dist = FairDistribution::from_weighted(model, weighted);
    dist.oracle_calls = oracle_calls;
    dist.lambda_phases = lambda_phases;
    dist.epsilon = config.epsilon;
    Ok(prune(&dist, config.prune_threshold))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::is_valid;
    use crate::testutil::{balanced_constraints, ranking, eight_people};

    /// The four-ranking distribution listed for the running instance.
    pub(crate) fn listed_mixture(inst: &Instance, model: &ValueModel) -> FairDistribution {
        FairDistribution::from_weighted(
            model,
            [
                (ranking(inst, &["u1", "u4", "u3", "u7", "u2", "u6", "u5", "u8"]), 0.25),
                (ranking(inst, &["u2", "u1", "u3", "u6", "u4", "u8", "u7", "u5"]), 0.5),
                (ranking(inst, &["u2", "u1", "u3", "u7", "u5", "u6", "u4", "u8"]), 1.0 / 16.0),
                (ranking(inst, &["u5", "u1", "u3", "u7", "u2", "u6", "u4", "u8"]), 3.0 / 16.0),
            ],
        )
    }

    #[test]
    fn normalization_maps() {
        let inst = eight_people();
        let map = normalize_satisfaction(&ValueModel::position_diff(&inst));
        assert_eq!(map.shift, -7.0);
        assert_eq!(map.scale, 1.0 / 14.0);
        assert_eq!(map.apply(7.0), 1.0);
        assert_eq!(map.invert(0.5), 0.0);

        let one = Instance::from_rows([("a", "G", 0.4)]).unwrap();
        assert_eq!(normalize_satisfaction(&ValueModel::position_diff(&one)), AffineMap::IDENTITY);

        let top = normalize_satisfaction(&ValueModel::top_k(&inst, 3));
        assert_eq!((top.shift, top.scale), (-1.0, 0.5));
    }

    #[test]
    fn listed_mixture_values() {
        let inst = eight_people();
        let m = ValueModel::position_diff(&inst);
        let c = balanced_constraints(&inst);
        let d = listed_mixture(&inst, &m);
        assert!(d.support.iter().all(|a| is_valid(&a.ranking, &inst, &c)));
        // the listed mixture leaves u5 at -1.25; the other males sit at -0.75
        let expected = [-0.75, -0.75, 0.0, -0.75, -1.25, 1.0, 1.5, 1.0];
        for (id, want) in ["u1", "u2", "u3", "u4", "u5", "u6", "u7", "u8"].iter().zip(expected) {
            let u = inst.index_of(id).unwrap();
            assert!((d.expected_satisfaction[u] - want).abs() < 1e-12, "{id}");
        }
    }

    #[test]
    fn prune_merges_and_drops() {
        let inst = eight_people();
        let m = ValueModel::position_diff(&inst);
        let d = listed_mixture(&inst, &m);

        let same = prune(&d, 0.0);
        assert_eq!(same.support_size(), 4);
        for (a, b) in same.expected_satisfaction.iter().zip(&d.expected_satisfaction) {
            assert!((a - b).abs() < 1e-12);
        }

        let p = prune(&d, 0.1);
        assert_eq!(p.support_size(), 3);
        let total: f64 = p.support.iter().map(|a| a.probability).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!((p.support[0].probability - 0.25 / (15.0 / 16.0)).abs() < 1e-12);

        let r = inst.merit_ranking();
        let dup = FairDistribution::from_weighted(&m, [(r.clone(), 0.5), (r.clone(), 0.5)]);
        assert_eq!(dup.support_size(), 1);
        assert_eq!(dup.support[0].probability, 1.0);
    }

    #[test]
    fn sampling_is_seeded() {
        let inst = eight_people();
        let m = ValueModel::position_diff(&inst);
        let d = listed_mixture(&inst, &m);
        assert_eq!(sample(&d, 42), sample(&d, 42));
        let point = FairDistribution::from_weighted(&m, [(inst.merit_ranking(), 1.0)]);
        for seed in 0..10 {
            assert_eq!(sample(&point, seed), &inst.merit_ranking());
        }
    }

    #[test]
    fn config_validation() {
        let inst = eight_people();
        let c = balanced_constraints(&inst);
        let m = ValueModel::position_diff(&inst);
        for bad in [
            SolverConfig::with_epsilon(0.0),
            SolverConfig::with_epsilon(f64::NAN),
            SolverConfig {
                prune_threshold: 1.0,
                ..Default::default()
            },
        ] {
            assert!(matches!(
                solve_maxmin(&inst, &c, &m, &bad),
                Err(Error::InvalidConfig(_))
            ));
        }
    }

    #[test]
    fn running_instance_min_norm() {
        let inst = eight_people();
        let c = balanced_constraints(&inst);
        let m = ValueModel::position_diff(&inst);
        let d = solve_maxmin(&inst, &c, &m, &SolverConfig::with_epsilon(0.01)).unwrap();
        let min = d.min_satisfaction();
        assert!((-0.76..=-0.74).contains(&min), "min {min}");
        assert!(d.support.iter().all(|a| is_valid(&a.ranking, &inst, &c)));
        let total: f64 = d.support.iter().map(|a| a.probability).sum();
        assert!((total - 1.0).abs() < 1e-12);
        let mean: f64 = d.expected_satisfaction.iter().sum::<f64>() / 8.0;
        assert!(mean.abs() < 1e-9);
    }

    #[test]
    fn vacuous_constraints_give_point_mass_on_merit_ranking() {
        let inst = eight_people();
        let c = ConstraintSet::vacuous_for(&inst);
        let m = ValueModel::position_diff(&inst);
        for engine in [Engine::MinNorm, Engine::Mwu] {
            let cfg = SolverConfig {
                epsilon: 1.0,
                engine,
                prune_threshold: 0.01,
                doubling_trick: engine == Engine::Mwu,
                ..Default::default()
            };
            let d = solve_maxmin(&inst, &c, &m, &cfg).unwrap();
            assert_eq!(d.support_size(), 1, "{engine:?}");
            assert_eq!(d.support[0].ranking, inst.merit_ranking());
        }
    }

    #[test]
    fn single_individual() {
        let inst = Instance::from_rows([("a", "G", 0.4)]).unwrap();
        let c = ConstraintSet::vacuous_for(&inst);
        let m = ValueModel::position_diff(&inst);
        let d = solve_maxmin(&inst, &c, &m, &SolverConfig::default()).unwrap();
        assert_eq!(d.support_size(), 1);
        assert_eq!(d.expected_satisfaction, [0.0]);
    }

    #[test]
    fn infeasible_constraints_are_reported() {
        let inst = Instance::from_rows([("a", "G", 0.9), ("b", "G", 0.5)]).unwrap();
        let c = ConstraintSet::from_bounds(2, vec![vec![1, 1]], vec![vec![0, 0]]).unwrap();
        let m = ValueModel::position_diff(&inst);
        assert!(matches!(
            solve_maxmin(&inst, &c, &m, &SolverConfig::default()),
            Err(Error::InfeasibleConstraints(_))
        ));
    }
}
