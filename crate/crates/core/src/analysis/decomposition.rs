//! Subset scans over `H`: the minimum-ratio bound and the block
//! decomposition of the maxmin-fair satisfaction vector.

use std::cmp::Ordering;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{to_upper_only, ConstraintSet, Instance, ValueModel};

use super::enumerate::h_upper_only;

/// Largest instance accepted by the subset scans.
pub const SCAN_LIMIT: usize = 12;

/// `H` on every subset, indexed by bitmask.
#[derive(Debug, Clone)]
pub struct HTable {
    n: usize,
    values: Vec<f64>,
    exact: bool,
    tol: f64,
}

impl HTable {
    pub fn build(instance: &Instance, constraints: &ConstraintSet, model: &ValueModel) -> Result<Self> {
        let n = instance.len();
        if n > SCAN_LIMIT {
            return Err(Error::InstanceTooLarge { n, limit: SCAN_LIMIT });
        }
        let upper_only = to_upper_only(constraints, instance)?;
        let mut values = vec![0.0; 1 << n];
        let mut members = Vec::with_capacity(n);
        for (mask, slot) in values.iter_mut().enumerate().skip(1) {
            members.clear();
            members.extend((0..n).filter(|u| mask >> u & 1 == 1));
            *slot = h_upper_only(instance, &upper_only, model, &members)?;
        }
        let (lo, hi) = model.range();
        Ok(HTable {
            n,
            values,
            exact: model.is_integral(),
            tol: 1e-9 * (hi - lo).abs().max(1.0),
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, mask: usize) -> f64 {
        self.values[mask]
    }

    /// Compares `a / na` with `b / nb`; exact for integral models.
    fn cmp_ratio(&self, a: f64, na: usize, b: f64, nb: usize) -> Ordering {
        if self.exact {
            let l = a.round() as i128 * nb as i128;
            let r = b.round() as i128 * na as i128;
            l.cmp(&r)
        } else {
            let d = a / na as f64 - b / nb as f64;
            if d.abs() <= self.tol {
                Ordering::Equal
            } else if d < 0.0 {
                Ordering::Less
            } else {
                Ordering::Greater
            }
        }
    }

    /// Minimum of `(H(S ∪ X) - H(S)) / |X|` over nonempty `X` outside `base`,
    /// with the union of all minimizers.
    fn min_marginal_ratio(&self, base: usize) -> (f64, usize) {
        let full = (1usize << self.n) - 1;
        let rest = full & !base;
        let hb = self.values[base];
        let mut best: Option<(f64, usize)> = None;
        let mut union = 0usize;
        let mut sub = rest;
        while sub > 0 {
            let num = self.values[base | sub] - hb;
            let den = sub.count_ones() as usize;
            match best {
                None => {
                    best = Some((num, den));
                    union = sub;
                }
                Some((bn, bd)) => match self.cmp_ratio(num, den, bn, bd) {
                    Ordering::Less => {
                        best = Some((num, den));
                        union = sub;
                    }
                    Ordering::Equal => union |= sub,
                    Ordering::Greater => {}
                },
            }
            sub = (sub - 1) & rest;
        }
        let lambda = (self.values[base | union] - hb) / union.count_ones() as f64;
        (lambda, union)
    }
}

/// Ordered blocks of individuals with strictly increasing satisfaction levels.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FairDecomposition {
    pub blocks: Vec<(Vec<usize>, f64)>,
}

impl FairDecomposition {
    /// Level of each individual's block, indexed by individual.
    pub fn target(&self) -> Vec<f64> {
        let n = self.blocks.iter().map(|(b, _)| b.len()).sum();
        let mut out = vec![0.0; n];
        for (block, lambda) in &self.blocks {
            for &u in block {
                out[u] = *lambda;
            }
        }
        out
    }

    /// Targets sorted ascending.
    pub fn sorted_target(&self) -> Vec<f64> {
        self.blocks
            .iter()
            .flat_map(|(b, l)| std::iter::repeat_n(*l, b.len()))
            .collect()
    }
}

/// `min_{X nonempty} H(X) / |X|`: the smallest expected satisfaction of a
/// maxmin-fair distribution.
pub fn min_satisfaction_bound(
    instance: &Instance,
    constraints: &ConstraintSet,
    model: &ValueModel,
) -> Result<f64> {
    let table = HTable::build(instance, constraints, model)?;
    Ok(table.min_marginal_ratio(0).0)
}

/// Exact maxmin-fair satisfaction levels by repeatedly taking the maximal
/// minimizer of the marginal ratio.
pub fn fair_decomposition(
    instance: &Instance,
    constraints: &ConstraintSet,
    model: &ValueModel,
) -> Result<FairDecomposition> {
    let table = HTable::build(instance, constraints, model)?;
    Ok(decompose(&table))
}

pub(crate) fn decompose(table: &HTable) -> FairDecomposition {
    let full = (1usize << table.n) - 1;
    let mut covered = 0usize;
    let mut blocks = Vec::new();
    while covered != full {
        let (lambda, block) = table.min_marginal_ratio(covered);
        blocks.push(((0..table.n).filter(|u| block >> u & 1 == 1).collect(), lambda));
        covered |= block;
    }
    FairDecomposition { blocks }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{balanced_constraints, eight_people};

    #[test]
    fn running_instance() {
        let inst = eight_people();
        let c = balanced_constraints(&inst);
        let m = ValueModel::position_diff(&inst);
        assert_eq!(min_satisfaction_bound(&inst, &c, &m).unwrap(), -0.75);
        let d = fair_decomposition(&inst, &c, &m).unwrap();
        let (first, lambda) = &d.blocks[0];
        assert_eq!(*lambda, -0.75);
        for id in ["u1", "u2", "u4", "u5"] {
            assert!(first.contains(&inst.index_of(id).unwrap()));
        }
        assert!(d.blocks.windows(2).all(|w| w[0].1 < w[1].1));
        let total: f64 = d.blocks.iter().map(|(b, l)| l * b.len() as f64).sum();
        assert!(total.abs() < 1e-12);
    }

    #[test]
    fn vacuous_single_block() {
        let inst = eight_people();
        let c = ConstraintSet::vacuous_for(&inst);
        let m = ValueModel::position_diff(&inst);
        let d = fair_decomposition(&inst, &c, &m).unwrap();
        assert_eq!(d.blocks, vec![((0..8).collect(), 0.0)]);
        assert_eq!(min_satisfaction_bound(&inst, &c, &m).unwrap(), 0.0);
    }

    #[test]
    fn single_individual() {
        let inst = Instance::from_rows([("a", "G", 0.4)]).unwrap();
        let c = ConstraintSet::vacuous_for(&inst);
        let m = ValueModel::log_ratio(&inst);
        let d = fair_decomposition(&inst, &c, &m).unwrap();
        assert_eq!(d.blocks, vec![(vec![0], 0.0)]);
        assert_eq!(d.target(), [0.0]);
    }

    #[test]
    fn targets_are_feasible() {
        let inst = eight_people();
        let c = balanced_constraints(&inst);
        let m = ValueModel::position_diff(&inst);
        let table = HTable::build(&inst, &c, &m).unwrap();
        let target = decompose(&table).target();
        for mask in 1..256usize {
            let s: f64 = (0..8).filter(|u| mask >> u & 1 == 1).map(|u| target[u]).sum();
            assert!(table.get(mask) - s >= -1e-9);
        }
    }
}
