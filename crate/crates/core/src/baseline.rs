//! Optimal deterministic ranking for the maxmin objective
//! `max_r min_u V(r, u)`.
//!
//! The greedy fill in merit order is optimal for every value model of the form
//! `f(r(u)) - g(u)` once lower bounds have been rewritten as upper bounds.

use crate::error::Result;
use crate::model::{to_upper_only, ConstraintSet, Instance, Ranking, ValueModel};
use crate::oracle::greedy_fill;

/// Best single ranking for the worst-off individual.
pub fn deterministic_baseline(instance: &Instance, constraints: &ConstraintSet) -> Result<Ranking> {
    let upper_only = to_upper_only(constraints, instance)?;
    greedy_fill(instance, &upper_only, instance.merit_order().iter().copied())
}

/// `min_u V(r', u)` for the baseline ranking `r'`.
pub fn baseline_min_value(
    instance: &Instance,
    constraints: &ConstraintSet,
    model: &ValueModel,
) -> Result<f64> {
    let ranking = deterministic_baseline(instance, constraints)?;
    Ok(model
        .values(&ranking)
        .into_iter()
        .fold(f64::INFINITY, f64::min))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::model::is_valid;
    use crate::testutil::{balanced_constraints, ranking, eight_people};

    #[test]
    fn running_instance() {
        let inst = eight_people();
        let c = balanced_constraints(&inst);
        let r = deterministic_baseline(&inst, &c).unwrap();
        assert_eq!(r, ranking(&inst, &["u1", "u2", "u3", "u6", "u4", "u7", "u5", "u8"]));
        assert!(is_valid(&r, &inst, &c));
        let m = ValueModel::position_diff(&inst);
        assert_eq!(baseline_min_value(&inst, &c, &m).unwrap(), -2.0);
    }

    #[test]
    fn vacuous_constraints_keep_merit_order() {
        let inst = eight_people();
        let c = ConstraintSet::vacuous_for(&inst);
        assert_eq!(deterministic_baseline(&inst, &c).unwrap(), inst.merit_ranking());
        let m = ValueModel::position_diff(&inst);
        assert_eq!(baseline_min_value(&inst, &c, &m).unwrap(), 0.0);
    }

    #[test]
    fn infeasible_constraints_error() {
        let inst = Instance::from_rows([("a", "G", 0.9), ("b", "G", 0.5)]).unwrap();
        let c = ConstraintSet::from_bounds(2, vec![vec![1, 1]], vec![vec![0, 0]]).unwrap();
        assert!(matches!(
            deterministic_baseline(&inst, &c),
            Err(Error::InfeasibleConstraints(_))
        ));
    }
}
