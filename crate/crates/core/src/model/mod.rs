//! Domain model: individuals, instances, rankings, group constraints and
//! value functions.
//!
//! Individuals are addressed by their index in the instance. Positions are
//! 0-based internally (`0` is the top of the ranking); rendering code adds one
//! where a human-facing position is needed.

mod constraints;
mod value;

pub use constraints::{
    build_alpha_constraints, feasibility_check, is_valid, to_upper_only, AlphaRule,
    ConstraintSet,
};
pub use value::{value, ValueModel, ValuePreset};

use std::cmp::Ordering;
use std::collections::HashMap;

use crate::error::{Error, Result};

/// One individual to be ranked.
#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    pub id: String,
    /// Index of the individual's group in `0..t`.
    pub group: usize,
    pub relevance: f64,
}

impl Individual {
    pub fn new(id: impl Into<String>, group: usize, relevance: f64) -> Self {
        Individual {
            id: id.into(),
            group,
            relevance,
        }
    }
}

/// A set of individuals partitioned into disjoint groups.
///
/// The merit order (descending relevance, ties by ascending id) is computed
/// once at construction and acts as the global tie-break everywhere else.
#[derive(Debug, Clone)]
pub struct Instance {
    individuals: Vec<Individual>,
    group_labels: Vec<String>,
    group_sizes: Vec<usize>,
    merit_order: Vec<usize>,
    merit_rank: Vec<usize>,
    by_id: HashMap<String, usize>,
}

impl Instance {
    pub fn new(individuals: Vec<Individual>, group_labels: Vec<String>) -> Result<Self> {
        if individuals.is_empty() {
            return Err(Error::InvalidInstance("no individuals".into()));
        }
        if group_labels.is_empty() {
            return Err(Error::InvalidInstance("no groups".into()));
        }
        let t = group_labels.len();
        let mut group_sizes = vec![0; t];
        let mut by_id = HashMap::with_capacity(individuals.len());
        for (index, ind) in individuals.iter().enumerate() {
            if ind.group >= t {
                return Err(Error::InvalidInstance(format!(
                    "individual `{}` has group {} but only {} groups exist",
                    ind.id, ind.group, t
                )));
            }
            if !ind.relevance.is_finite() || ind.relevance < 0.0 {
                return Err(Error::InvalidInstance(format!(
                    "individual `{}` has relevance {}; scores must be finite and nonnegative",
                    ind.id, ind.relevance
                )));
            }
            if by_id.insert(ind.id.clone(), index).is_some() {
                return Err(Error::DuplicateId(ind.id.clone()));
            }
            group_sizes[ind.group] += 1;
        }

        let mut merit_order: Vec<usize> = (0..individuals.len()).collect();
        merit_order.sort_by(|&a, &b| merit_cmp(&individuals[a], &individuals[b]));
        let mut merit_rank = vec![0; individuals.len()];
        for (pos, &u) in merit_order.iter().enumerate() {
            merit_rank[u] = pos;
        }

        Ok(Instance {
            individuals,
            group_labels,
            group_sizes,
            merit_order,
            merit_rank,
            by_id,
        })
    }

    /// Builds an instance from `(id, group label, score)` rows. Group labels
    /// are mapped to indices in order of first appearance.
    pub fn from_rows<I, S, L>(rows: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, L, f64)>,
        S: Into<String>,
        L: AsRef<str>,
    {
        let mut labels: Vec<String> = Vec::new();
        let mut individuals = Vec::new();
        for (id, label, score) in rows {
            let label = label.as_ref();
            let group = match labels.iter().position(|l| l == label) {
                Some(g) => g,
                None => {
                    labels.push(label.to_string());
                    labels.len() - 1
                }
            };
            individuals.push(Individual::new(id, group, score));
        }
        Instance::new(individuals, labels)
    }

    pub fn len(&self) -> usize {
        self.individuals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.individuals.is_empty()
    }

    pub fn num_groups(&self) -> usize {
        self.group_labels.len()
    }

    pub fn individuals(&self) -> &[Individual] {
        &self.individuals
    }

    pub fn individual(&self, u: usize) -> &Individual {
        &self.individuals[u]
    }

    pub fn group_of(&self, u: usize) -> usize {
        self.individuals[u].group
    }

    pub fn group_labels(&self) -> &[String] {
        &self.group_labels
    }

    pub fn group_index(&self, label: &str) -> Option<usize> {
        self.group_labels.iter().position(|l| l == label)
    }

    pub fn group_sizes(&self) -> &[usize] {
        &self.group_sizes
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.by_id.get(id).copied()
    }

    /// Individuals sorted by descending relevance, ties by ascending id.
    pub fn merit_order(&self) -> &[usize] {
        &self.merit_order
    }

    /// 0-based position of `u` in the merit order.
    pub fn merit_rank(&self, u: usize) -> usize {
        self.merit_rank[u]
    }

    /// The ranking by decreasing relevance, `r*`.
    pub fn merit_ranking(&self) -> Ranking {
        Ranking::from_order(self.merit_order.clone())
            .expect("merit order is a permutation by construction")
    }
}

/// Descending relevance, then ascending id (natural order).
fn merit_cmp(a: &Individual, b: &Individual) -> Ordering {
    b.relevance
        .total_cmp(&a.relevance)
        .then_with(|| natural_cmp(&a.id, &b.id))
}

/// Compares ids so that embedded numbers order numerically (`u2 < u10`).
pub(crate) fn natural_cmp(a: &str, b: &str) -> Ordering {
    let (mut a, mut b) = (a.as_bytes(), b.as_bytes());
    loop {
        match (a.first(), b.first()) {
            (None, None) => return Ordering::Equal,
            (None, Some(_)) => return Ordering::Less,
            (Some(_), None) => return Ordering::Greater,
            (Some(x), Some(y)) if x.is_ascii_digit() && y.is_ascii_digit() => {
                let la = a.iter().take_while(|c| c.is_ascii_digit()).count();
                let lb = b.iter().take_while(|c| c.is_ascii_digit()).count();
                let (da, db) = (&a[..la], &b[..lb]);
                let ta = trim_zeros(da);
                let tb = trim_zeros(db);
                let ord = ta.len().cmp(&tb.len()).then_with(|| ta.cmp(tb));
                if ord != Ordering::Equal {
                    return ord;
                }
                let ord = la.cmp(&lb);
                if ord != Ordering::Equal {
                    return ord;
                }
                a = &a[la..];
                b = &b[lb..];
            }
            (Some(x), Some(y)) => {
                if x != y {
                    return x.cmp(y);
                }
                a = &a[1..];
                b = &b[1..];
            }
        }
    }
}

fn trim_zeros(digits: &[u8]) -> &[u8] {
    let skip = digits.iter().take_while(|&&c| c == b'0').count();
    &digits[skip..]
}

/// A bijection from individuals to positions.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Ranking {
    order: Vec<usize>,
    position: Vec<usize>,
}

impl Ranking {
    /// `order[i]` is the individual placed at position `i`.
    pub fn from_order(order: Vec<usize>) -> Result<Self> {
        let n = order.len();
        let mut position = vec![usize::MAX; n];
        for (pos, &u) in order.iter().enumerate() {
            if u >= n || position[u] != usize::MAX {
                return Err(Error::InvalidInstance(format!(
                    "ranking order is not a permutation of 0..{n}"
                )));
            }
            position[u] = pos;
        }
        Ok(Ranking { order, position })
    }

    /// Builds a ranking from ids listed top to bottom.
    pub fn from_ids<S: AsRef<str>>(instance: &Instance, ids: &[S]) -> Result<Self> {
        if ids.len() != instance.len() {
            return Err(Error::InvalidInstance(format!(
                "ranking lists {} ids, instance has {}",
                ids.len(),
                instance.len()
            )));
        }
        let order = ids
            .iter()
            .map(|id| {
                instance
                    .index_of(id.as_ref())
                    .ok_or_else(|| Error::InvalidInstance(format!("unknown id `{}`", id.as_ref())))
            })
            .collect::<Result<Vec<_>>>()?;
        Ranking::from_order(order)
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// 0-based position of `u`.
    pub fn position(&self, u: usize) -> usize {
        self.position[u]
    }

    pub fn ids<'a>(&self, instance: &'a Instance) -> Vec<&'a str> {
        self.order
            .iter()
            .map(|&u| instance.individual(u).id.as_str())
            .collect()
    }
}

/// Merit ranking `r*`.
pub fn merit_ranking(instance: &Instance) -> Ranking {
    instance.merit_ranking()
}
