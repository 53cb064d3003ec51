//! Exact small-instance oracles and fairness metrics.

mod decomposition;
mod enumerate;
mod metrics;

pub use decomposition::{fair_decomposition, min_satisfaction_bound, FairDecomposition, HTable};
pub use enumerate::{enumerate_valid_rankings, h_value, submodularity_check, ENUMERATION_LIMIT};
pub use metrics::{
    dcg, distribution_dcg, gini, gini_in_range, lorenz_dominates, spread, MetricsReport,
};
