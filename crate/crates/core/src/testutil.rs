use crate::model::{build_alpha_constraints, AlphaRule, ConstraintSet, Instance, Ranking};

/// The eight-person instance used throughout the unit tests.
pub(crate) fn eight_people() -> Instance {
    Instance::from_rows([
        ("u1", "M", 0.97),
        ("u2", "M", 0.93),
        ("u3", "F", 0.89),
        ("u4", "M", 0.81),
        ("u5", "M", 0.73),
        ("u6", "F", 0.72),
        ("u7", "F", 0.64),
        ("u8", "F", 0.62),
    ])
    .unwrap()
}

/// At least `floor(k/2)` of each group in every top-`k` with `k >= 3`.
pub(crate) fn balanced_constraints(instance: &Instance) -> ConstraintSet {
    build_alpha_constraints(instance, &AlphaRule::FloorBalanced { start_k: 3 }).unwrap()
}

pub(crate) fn ranking(instance: &Instance, ids: &[&str]) -> Ranking {
    Ranking::from_ids(instance, ids).unwrap()
}
