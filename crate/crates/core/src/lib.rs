//! Maxmin-fair distributions over rankings under prefix group constraints.
//!
//! An [`Instance`] lists individuals with a group and a relevance score. A
//! [`ConstraintSet`] bounds how many members of each group may appear in
//! every top-`k` prefix. [`solve_maxmin`] returns a distribution over valid
//! rankings whose expected satisfaction vector is lexicographically maximal,
//! where satisfaction is `V(r, u) = f(r(u)) - g(u)` for a [`ValueModel`].

pub mod analysis;
pub mod baseline;
pub mod cli;
pub mod error;
pub mod model;
pub mod oracle;
pub mod solver;
pub mod synthetic;

#[cfg(test)]
mod testutil;

pub use baseline::{baseline_min_value, deterministic_baseline};
pub use error::{Error, Result};
pub use model::{
    build_alpha_constraints, feasibility_check, is_valid, merit_ranking, to_upper_only, value,
    AlphaRule, ConstraintSet, Individual, Instance, Ranking, ValueModel, ValuePreset,
};
pub use oracle::{best_response, check_monge, weight_order_key, OracleCache, OracleResult, OrderKey};
pub use solver::{prune, sample, solve_maxmin, Engine, FairDistribution, SolverConfig};
