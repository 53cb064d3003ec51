//! Phase-by-phase solver: binary search on the next satisfaction level, each
//! guess tested by a zero-sum game between rankings and individuals that is
//! solved with multiplicative weights.
//!
//! All quantities here live in normalized units (`V` mapped into `[0, 1]`).

use std::collections::HashMap;
use std::rc::Rc;

use crate::error::{Error, Result};
use crate::model::{ConstraintSet, Instance, Ranking, ValueModel};
use crate::oracle::{weight_order_key, CachedResponse, OracleCache, OrderKey};

use super::{normalize_satisfaction, AffineMap, SolverConfig};

/// Uniform mixture of the rankings played during a game.
#[derive(Debug, Clone, Default)]
pub struct Mixture {
    entries: Vec<(Rc<CachedResponse>, f64)>,
}

impl Mixture {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Rankings with their probabilities.
    pub fn atoms(&self) -> Vec<(Ranking, f64)> {
        let total: f64 = self.entries.iter().map(|(_, c)| c).sum();
        self.entries
            .iter()
            .map(|(r, c)| (r.ranking.clone(), c / total))
            .collect()
    }

    /// Expected satisfaction per individual, in units of `V`.
    pub fn satisfaction(&self) -> Vec<f64> {
        let total: f64 = self.entries.iter().map(|(_, c)| c).sum();
        let n = self.entries.first().map_or(0, |(r, _)| r.values.len());
        let mut out = vec![0.0; n];
        for (r, c) in &self.entries {
            for (o, v) in out.iter_mut().zip(&r.values) {
                *o += c / total * v;
            }
        }
        out
    }
}

/// Result of one feasibility game.
#[derive(Debug, Clone)]
pub struct GameOutcome {
    /// `min_v (D[v] - b[v])` for the returned mixture; never above the game value.
    pub lower: f64,
    /// Average best-response payoff (or the tighter order-restricted dual
    /// bound); never below the game value.
    pub upper: f64,
    pub estimate: f64,
    pub rounds: u64,
    pub mixture: Mixture,
}

/// Levels frozen so far.
#[derive(Debug, Clone)]
pub struct PhaseState {
    pub frozen: Vec<bool>,
    /// Normalized target of each frozen individual.
    pub alpha: Vec<f64>,
    pub lambda_star: f64,
    /// Mixture certifying the previous phase.
    pub mixture: Option<Mixture>,
}

impl PhaseState {
    pub fn new(n: usize) -> Self {
        PhaseState {
            frozen: vec![false; n],
            alpha: vec![f64::NEG_INFINITY; n],
            lambda_star: f64::NEG_INFINITY,
            mixture: None,
        }
    }

    pub fn is_complete(&self) -> bool {
        self.frozen.iter().all(|&f| f)
    }

    fn max_frozen(&self) -> Option<f64> {
        self.frozen
            .iter()
            .zip(&self.alpha)
            .filter(|(f, _)| **f)
            .map(|(_, a)| *a)
            .reduce(f64::max)
    }

    fn targets(&self, lambda: f64) -> Vec<f64> {
        self.frozen
            .iter()
            .zip(&self.alpha)
            .map(|(&f, &a)| if f { a } else { lambda })
            .collect()
    }
}

/// Rounds needed so that the game estimate is within `delta / 2`.
pub(crate) fn rounds_for(n: usize, delta: f64) -> f64 {
    (16.0 * (n as f64).ln() / (delta * delta)).ceil().max(1.0)
}

struct GameContext<'a> {
    instance: &'a Instance,
    constraints: &'a ConstraintSet,
    model: &'a ValueModel,
    map: AffineMap,
    cache: OracleCache,
    early_stop: bool,
    rounds_used: u64,
    cap: u64,
}

impl<'a> GameContext<'a> {
    fn new(
        instance: &'a Instance,
        constraints: &'a ConstraintSet,
        model: &'a ValueModel,
        cache: OracleCache,
    ) -> Self {
        GameContext {
            instance,
            constraints,
            model,
            map: normalize_satisfaction(model),
            cache,
            early_stop: false,
            rounds_used: 0,
            cap: u64::MAX,
        }
    }

    /// Multiplicative weights over individuals against best-responding
    /// rankings. `margin` enables early termination once the sign of
    /// `value - margin` is settled.
    fn play(&mut self, targets: &[f64], iterations: u64, margin: Option<f64>) -> Result<GameOutcome> {
        let n = self.instance.len();
        let eta = if n > 1 {
            ((n as f64).ln() / iterations as f64).sqrt().min(0.5)
        } else {
            0.5
        };
        let mut log_w = vec![0.0f64; n];
        let mut w = vec![0.0f64; n];
        let mut payoff = vec![0.0f64; n];
        let mut payoff_sum = vec![0.0f64; n];
        let mut upper_sum = 0.0;
        let mut dual_bound = f64::INFINITY;
        let mut counts: HashMap<OrderKey, usize> = HashMap::new();
        let mut entries: Vec<(Rc<CachedResponse>, f64)> = Vec::new();
        let mut rounds = 0u64;

        while rounds < iterations {
            rounds += 1;
            self.rounds_used += 1;
            if self.rounds_used > self.cap {
                return Err(Error::IterationCapExceeded { cap: self.cap });
            }
            let top = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let mut total = 0.0;
            for (wi, lw) in w.iter_mut().zip(&log_w) {
                *wi = (lw - top).exp();
                total += *wi;
            }
            w.iter_mut().for_each(|wi| *wi /= total);

            let key = weight_order_key(self.instance, &w);
            let response = self
                .cache
                .respond(self.instance, self.constraints, self.model, &key)?;
            let mut round_value = 0.0;
            for v in 0..n {
                payoff[v] = self.map.apply(response.values[v]) - targets[v];
                round_value += w[v] * payoff[v];
                payoff_sum[v] += payoff[v];
                log_w[v] -= eta * payoff[v];
            }
            upper_sum += round_value;

            if let Some(&i) = counts.get(&key) {
                entries[i].1 += 1.0;
            } else {
                counts.insert(key.clone(), entries.len());
                entries.push((response, 1.0));
            }

            if let Some(margin) = margin {
                let lower = payoff_sum.iter().copied().fold(f64::INFINITY, f64::min) / rounds as f64;
                if lower >= margin {
                    break;
                }
                // best weight vector compatible with this order puts uniform
                // mass on a prefix of it
                let mut z = 0.0;
                for (j, u) in key.permutation().enumerate() {
                    z += payoff[u];
                    dual_bound = dual_bound.min(z / (j + 1) as f64);
                }
                if dual_bound < margin {
                    break;
                }
            }
        }

        let lower = payoff_sum.iter().copied().fold(f64::INFINITY, f64::min) / rounds as f64;
        let upper = (upper_sum / rounds as f64).min(dual_bound).max(lower);
        Ok(GameOutcome {
            lower,
            upper,
            estimate: 0.5 * (lower + upper),
            rounds,
            mixture: Mixture { entries },
        })
    }

    /// Largest level `lambda` such that the game with targets `alpha` on
    /// frozen individuals and `lambda` elsewhere is accepted.
    fn search(&mut self, state: &PhaseState, delta: f64, iterations: u64) -> Result<(f64, Mixture)> {
        let margin = -delta / 2.0;
        let early = self.early_stop.then_some(margin);
        let mut lo = state.max_frozen().unwrap_or(0.0);
        let mut hi = 1.0f64.max(lo);

        let first = self.play(&state.targets(lo), iterations, early)?;
        let mut best = if first.lower >= margin {
            first.mixture
        } else {
            state.mixture.clone().unwrap_or(first.mixture)
        };
        while hi - lo > delta / 2.0 {
            let mid = 0.5 * (lo + hi);
            let out = self.play(&state.targets(mid), iterations, early)?;
            if out.lower >= margin {
                lo = mid;
                best = out.mixture;
            } else {
                hi = mid;
            }
        }
        Ok((lo, best))
    }
}

fn single_ranking(
    instance: &Instance,
    constraints: &ConstraintSet,
    model: &ValueModel,
    cache: &mut OracleCache,
) -> Result<Mixture> {
    let key = weight_order_key(instance, &vec![1.0; instance.len()]);
    let response = cache.respond(instance, constraints, model, &key)?;
    Ok(Mixture {
        entries: vec![(response, 1.0)],
    })
}

/// Plays the feasibility game for normalized `targets` over `iterations`
/// rounds. The game value is `max_p min_v (D_p[v] - targets[v])`; it is
/// nonnegative iff some distribution meets every target.
pub fn feasibility_game(
    instance: &Instance,
    constraints: &ConstraintSet,
    model: &ValueModel,
    targets: &[f64],
    iterations: u64,
) -> Result<GameOutcome> {
    if targets.len() != instance.len() {
        return Err(Error::InvalidConfig(format!(
            "{} targets for {} individuals",
            targets.len(),
            instance.len()
        )));
    }
    if iterations == 0 {
        return Err(Error::InvalidConfig("a game needs at least one round".into()));
    }
    GameContext::new(instance, constraints, model, OracleCache::new()).play(targets, iterations, None)
}

/// Binary search for the next level given the frozen state, with the round
/// budget `ceil(16 ln n / delta^2)` per guess.
pub fn binary_search_lambda(
    instance: &Instance,
    constraints: &ConstraintSet,
    model: &ValueModel,
    state: &PhaseState,
    delta: f64,
) -> Result<(f64, Mixture)> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidConfig(format!("delta must be positive, got {delta}")));
    }
    let mut ctx = GameContext::new(instance, constraints, model, OracleCache::new());
    if instance.len() == 1 {
        let mixture = single_ranking(instance, constraints, model, &mut ctx.cache)?;
        return Ok((ctx.map.apply(mixture.satisfaction()[0]), mixture));
    }
    let rounds = rounds_for(instance.len(), delta) as u64;
    ctx.search(state, delta, rounds)
}

pub(crate) struct MwuOutcome {
    pub atoms: Vec<(Ranking, f64)>,
    pub oracle_calls: u64,
    pub lambda_phases: Vec<f64>,
}

pub(crate) fn solve(
    instance: &Instance,
    constraints: &ConstraintSet,
    model: &ValueModel,
    config: &SolverConfig,
) -> Result<MwuOutcome> {
    let n = instance.len();
    let cache = if config.memoize {
        OracleCache::new()
    } else {
        OracleCache::disabled()
    };
    let mut ctx = GameContext::new(instance, constraints, model, cache);
    ctx.early_stop = config.early_stop;
    ctx.cap = config.max_iterations_cap;
    let map = ctx.map;
    let eps = config.epsilon * map.scale;

    let mut phase_budget = if config.doubling_trick {
        2.0
    } else {
        n as f64 * (n as f64 / eps).ln().max(1.0)
    };

    loop {
        let delta = eps / (2.0 * phase_budget);
        let rounds = rounds_for(n, delta);
        if rounds > config.max_iterations_cap as f64 {
            return Err(Error::IterationCapExceeded {
                cap: config.max_iterations_cap,
            });
        }
        let rounds = rounds as u64;

        let mut state = PhaseState::new(n);
        let mut phases = Vec::new();
        let mut overflow = false;
        while !state.is_complete() {
            let (lambda, mixture) = ctx.search(&state, delta, rounds)?;
            let reached: Vec<f64> = mixture.satisfaction().iter().map(|&v| map.apply(v)).collect();
            let mut newly: Vec<usize> = (0..n)
                .filter(|&v| !state.frozen[v] && reached[v] <= lambda + delta)
                .collect();
            if newly.is_empty() {
                let argmin = (0..n)
                    .filter(|&v| !state.frozen[v])
                    .min_by(|&a, &b| reached[a].total_cmp(&reached[b]))
                    .expect("an unfrozen individual remains");
                newly.push(argmin);
            }
            for v in newly {
                state.frozen[v] = true;
                state.alpha[v] = lambda;
            }
            state.lambda_star = lambda;
            state.mixture = Some(mixture);
            phases.push(map.invert(lambda));

            if config.doubling_trick && phases.len() as f64 > phase_budget {
                overflow = true;
                break;
            }
        }
        if overflow {
            phase_budget *= 2.0;
            continue;
        }
        let mixture = state.mixture.expect("at least one phase ran");
        return Ok(MwuOutcome {
            atoms: mixture.atoms(),
            oracle_calls: ctx.cache.oracle_calls(),
            lambda_phases: phases,
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::to_upper_only;
    use crate::testutil::{balanced_constraints, eight_people};

    fn setup() -> (Instance, ConstraintSet, ValueModel) {
        let inst = eight_people();
        let c = to_upper_only(&balanced_constraints(&inst), &inst).unwrap();
        let m = ValueModel::position_diff(&inst);
        (inst, c, m)
    }

    #[test]
    fn zero_targets_are_feasible() {
        let (inst, c, m) = setup();
        let out = feasibility_game(&inst, &c, &m, &[0.0; 8], 50).unwrap();
        assert!(out.lower >= 0.0);
        assert!(out.upper >= out.lower);
    }

    #[test]
    fn three_quarters_below_merit_is_reachable() {
        let (inst, c, m) = setup();
        let map = normalize_satisfaction(&m);
        let iterations = 200_000;
        let out = feasibility_game(&inst, &c, &m, &[map.apply(-0.75); 8], iterations).unwrap();
        let tolerance = 2.0 * ((8f64).ln() / iterations as f64).sqrt();
        assert!(out.estimate >= -tolerance, "estimate {}", out.estimate);
        assert!(out.upper >= 0.0);
    }

    #[test]
    fn half_below_merit_is_not_reachable() {
        let (inst, c, m) = setup();
        let map = normalize_satisfaction(&m);
        let out = feasibility_game(&inst, &c, &m, &[map.apply(-0.5); 8], 200_000).unwrap();
        assert!(out.estimate < 0.0);
        assert!(out.lower < 0.0);
    }

    #[test]
    fn first_phase_level() {
        let (inst, c, m) = setup();
        let map = normalize_satisfaction(&m);
        let delta = 0.01;
        let (lambda, mixture) = binary_search_lambda(&inst, &c, &m, &PhaseState::new(8), delta).unwrap();
        assert!((lambda - map.apply(-0.75)).abs() <= delta, "lambda {lambda}");
        assert!(!mixture.is_empty());
    }

    #[test]
    fn vacuous_first_phase_sits_at_merit() {
        let inst = eight_people();
        let c = ConstraintSet::vacuous_for(&inst);
        let m = ValueModel::position_diff(&inst);
        let map = normalize_satisfaction(&m);
        let delta = 0.02;
        let (lambda, mixture) = binary_search_lambda(&inst, &c, &m, &PhaseState::new(8), delta).unwrap();
        assert!((lambda - map.apply(0.0)).abs() <= delta);
        let merit = mixture
            .atoms()
            .into_iter()
            .find(|(r, _)| *r == inst.merit_ranking())
            .map_or(0.0, |(_, p)| p);
        assert!(merit > 0.9, "merit ranking mass {merit}");
    }

    #[test]
    fn single_individual_phase() {
        let inst = Instance::from_rows([("a", "G", 0.3)]).unwrap();
        let c = ConstraintSet::vacuous_for(&inst);
        let m = ValueModel::position_diff(&inst);
        let (lambda, mixture) = binary_search_lambda(&inst, &c, &m, &PhaseState::new(1), 0.1).unwrap();
        assert_eq!(lambda, 0.0);
        assert_eq!(mixture.len(), 1);
    }

    #[test]
    fn iteration_cap_is_enforced() {
        let (inst, c, m) = setup();
        let cfg = SolverConfig {
            epsilon: 0.01,
            engine: super::super::Engine::Mwu,
            max_iterations_cap: 1_000,
            ..Default::default()
        };
        assert!(matches!(
            solve(&inst, &c, &m, &cfg),
            Err(Error::IterationCapExceeded { .. })
        ));
    }

    #[test]
    fn early_stop_agrees_with_full_run() {
        let (inst, c, m) = setup();
        let base = SolverConfig {
            epsilon: 3.0,
            engine: super::super::Engine::Mwu,
            doubling_trick: true,
            ..Default::default()
        };
        let full = solve(&inst, &c, &m, &base).unwrap();
        let fast = solve(&inst, &c, &m, &SolverConfig { early_stop: true, ..base }).unwrap();
        assert!(fast.oracle_calls <= full.oracle_calls);
        let min_full = full.lambda_phases[0];
        let min_fast = fast.lambda_phases[0];
        assert!((min_full - min_fast).abs() <= 3.0, "{min_full} vs {min_fast}");
    }
}
