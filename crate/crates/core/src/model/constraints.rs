use crate::error::{Error, Result};

use super::{Instance, Ranking};

/// Per-prefix, per-group bounds on group membership counts.
///
/// `upper[k][i]` and `lower[k][i]` bound the number of members of group `k`
/// among the first `i + 1` positions. Bounds are normalized on construction:
/// they are clamped to the prefix length and made monotone with steps of at
/// most one, which never changes the set of valid rankings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintSet {
    n: usize,
    upper: Vec<Vec<usize>>,
    lower: Vec<Vec<usize>>,
}

impl ConstraintSet {
    /// Constraints every ranking satisfies.
    pub fn vacuous(n: usize, groups: usize) -> Self {
        ConstraintSet {
            n,
            upper: vec![(1..=n).collect(); groups],
            lower: vec![vec![0; n]; groups],
        }
    }

    pub fn vacuous_for(instance: &Instance) -> Self {
        Self::vacuous(instance.len(), instance.num_groups())
    }

    /// Builds a constraint set from raw bound tables (one row of length `n`
    /// per group). Redundant or non-monotone bounds are tightened; bounds that
    /// no ranking can meet are rejected.
    pub fn from_bounds(n: usize, upper: Vec<Vec<usize>>, lower: Vec<Vec<usize>>) -> Result<Self> {
        if upper.len() != lower.len() {
            return Err(Error::InvalidConstraints(format!(
                "{} upper rows but {} lower rows",
                upper.len(),
                lower.len()
            )));
        }
        for row in upper.iter().chain(lower.iter()) {
            if row.len() != n {
                return Err(Error::InvalidConstraints(format!(
                    "bound row has length {}, expected {n}",
                    row.len()
                )));
            }
        }
        let mut set = ConstraintSet { n, upper, lower };
        set.normalize()?;
        Ok(set)
    }

    fn normalize(&mut self) -> Result<()> {
        let n = self.n;
        for (k, row) in self.upper.iter_mut().enumerate() {
            for (i, u) in row.iter_mut().enumerate() {
                *u = (*u).min(i + 1);
            }
            for i in 1..n {
                row[i] = row[i].min(row[i - 1] + 1);
            }
            for i in (0..n.saturating_sub(1)).rev() {
                row[i] = row[i].min(row[i + 1]);
            }
            debug_assert!(row.iter().enumerate().all(|(i, &u)| u <= i + 1), "group {k}");
        }
        for (k, row) in self.lower.iter_mut().enumerate() {
            for (i, &l) in row.iter().enumerate() {
                if l > i + 1 {
                    return Err(Error::InfeasibleConstraints(format!(
                        "group {k} needs {l} members among the first {} positions",
                        i + 1
                    )));
                }
            }
            for i in 1..n {
                row[i] = row[i].max(row[i - 1]);
            }
            for i in (0..n.saturating_sub(1)).rev() {
                row[i] = row[i].max(row[i + 1].saturating_sub(1));
            }
        }
        for k in 0..self.upper.len() {
            for i in 0..n {
                if self.lower[k][i] > self.upper[k][i] {
                    return Err(Error::InfeasibleConstraints(format!(
                        "group {k} has lower bound {} above upper bound {} in the top {}",
                        self.lower[k][i],
                        self.upper[k][i],
                        i + 1
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn num_groups(&self) -> usize {
        self.upper.len()
    }

    /// Upper bounds of group `k`; entry `i` covers the top `i + 1` positions.
    pub fn upper(&self, k: usize) -> &[usize] {
        &self.upper[k]
    }

    /// Lower bounds of group `k`; entry `i` covers the top `i + 1` positions.
    pub fn lower(&self, k: usize) -> &[usize] {
        &self.lower[k]
    }

    pub fn has_lower_bounds(&self) -> bool {
        self.lower.iter().flatten().any(|&l| l > 0)
    }

    pub(crate) fn check_shape(&self, instance: &Instance) -> Result<()> {
        if self.n != instance.len() || self.num_groups() != instance.num_groups() {
            return Err(Error::InvalidConstraints(format!(
                "constraints cover {} positions and {} groups, instance has {} and {}",
                self.n,
                self.num_groups(),
                instance.len(),
                instance.num_groups()
            )));
        }
        Ok(())
    }
}

/// Rules that derive lower bounds from a single fairness parameter.
#[derive(Debug, Clone, PartialEq)]
pub enum AlphaRule {
    /// At least `ceil(alpha * k - 1)` members of `protected` in every top-`k`
    /// with `k >= start_k`.
    CeilAlpha {
        alpha: f64,
        protected: usize,
        start_k: usize,
    },
    /// At least `floor(k / 2)` members of each of two groups in every top-`k`
    /// with `k >= start_k`.
    FloorBalanced { start_k: usize },
}

/// Builds the lower-bound constraint set described by `rule`.
pub fn build_alpha_constraints(instance: &Instance, rule: &AlphaRule) -> Result<ConstraintSet> {
    let n = instance.len();
    let t = instance.num_groups();
    let upper = vec![(1..=n).collect::<Vec<_>>(); t];
    let mut lower = vec![vec![0usize; n]; t];
    match *rule {
        AlphaRule::CeilAlpha {
            alpha,
            protected,
            start_k,
        } => {
            if !(0.0..=0.5).contains(&alpha) {
                return Err(Error::InvalidAlpha(alpha));
            }
            if protected >= t {
                return Err(Error::InvalidConstraints(format!(
                    "protected group {protected} does not exist"
                )));
            }
            for k in start_k.max(1)..=n {
                // 0.3 * 10 - 1 evaluates to 2.0000000000000004; the slack keeps
                // exact integers from rounding up.
                let bound = (alpha * k as f64 - 1.0 - 1e-9).ceil().max(0.0) as usize;
                lower[protected][k - 1] = bound.min(k);
            }
        }
        AlphaRule::FloorBalanced { start_k } => {
            if t != 2 {
                return Err(Error::InvalidConstraints(format!(
                    "floor-balanced rule needs exactly two groups, found {t}"
                )));
            }
            for k in start_k.max(1)..=n {
                for row in lower.iter_mut() {
                    row[k - 1] = k / 2;
                }
            }
        }
    }
    ConstraintSet::from_bounds(n, upper, lower)
}

/// Rewrites lower bounds as equivalent upper bounds.
///
/// With two groups, "at least `l` of A in the top `i`" is the same as "at
/// most `i - l` of B in the top `i`". With one group lower bounds are always
/// met. With three or more groups the rewrite does not exist.
pub fn to_upper_only(constraints: &ConstraintSet, instance: &Instance) -> Result<ConstraintSet> {
    constraints.check_shape(instance)?;
    if !constraints.has_lower_bounds() {
        return Ok(constraints.clone());
    }
    let n = constraints.n;
    let t = constraints.num_groups();
    let mut upper = constraints.upper.clone();
    match t {
        1 => {}
        2 => {
            for a in 0..2 {
                let b = 1 - a;
                for (i, (ub, la)) in upper[b].iter_mut().zip(&constraints.lower[a]).enumerate() {
                    *ub = (*ub).min(i + 1 - la);
                }
            }
        }
        _ => return Err(Error::UnsupportedLowerBounds(t)),
    }
    ConstraintSet::from_bounds(n, upper, vec![vec![0; n]; t])
}

/// True iff every prefix of `ranking` respects every group's bounds.
pub fn is_valid(ranking: &Ranking, instance: &Instance, constraints: &ConstraintSet) -> bool {
    if ranking.len() != instance.len() || constraints.check_shape(instance).is_err() {
        return false;
    }
    let mut counts = vec![0usize; constraints.num_groups()];
    for (i, &u) in ranking.order().iter().enumerate() {
        counts[instance.group_of(u)] += 1;
        for (k, &c) in counts.iter().enumerate() {
            if c > constraints.upper[k][i] || c < constraints.lower[k][i] {
                return false;
            }
        }
    }
    true
}

/// True iff at least one valid ranking exists.
///
/// Lower bounds are first rewritten as upper bounds. Under upper bounds alone
/// a valid ranking exists iff every prefix can be filled:
/// `sum_k min(upper[k][i], |C_k|) >= i` for all `i`.
pub fn feasibility_check(instance: &Instance, constraints: &ConstraintSet) -> Result<bool> {
    let upper_only = match to_upper_only(constraints, instance) {
        Ok(c) => c,
        Err(Error::InfeasibleConstraints(_)) => return Ok(false),
        Err(e) => return Err(e),
    };
    let sizes = instance.group_sizes();
    Ok((0..upper_only.n).all(|i| {
        let capacity: usize = (0..upper_only.num_groups())
            .map(|k| upper_only.upper[k][i].min(sizes[k]))
            .sum();
        capacity > i
    }))
}
