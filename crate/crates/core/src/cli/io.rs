//! Instance CSV, constraint JSON and distribution JSON formats.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::analysis::MetricsReport;
use crate::error::{Error, Result};
use crate::model::{build_alpha_constraints, AlphaRule, ConstraintSet, Instance, Ranking, ValueModel};
use crate::solver::FairDistribution;

/// Reads an instance from CSV with header `id,group,score`. Groups are
/// indexed in order of first appearance.
pub fn parse_instance(text: &str) -> Result<Instance> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| Error::Parse { row: 1, message: e.to_string() })?
        .clone();
    let names: Vec<&str> = header.iter().collect();
    if names != ["id", "group", "score"] {
        return Err(Error::Parse {
            row: 1,
            message: format!("expected header `id,group,score`, found `{}`", names.join(",")),
        });
    }
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 2;
        let record = record.map_err(|e| Error::Parse { row, message: e.to_string() })?;
        let score: f64 = record[2].parse().map_err(|_| Error::Parse {
            row,
            message: format!("score `{}` is not a number", &record[2]),
        })?;
        if record[0].is_empty() || record[1].is_empty() {
            return Err(Error::Parse { row, message: "empty id or group".into() });
        }
        rows.push((record[0].to_string(), record[1].to_string(), score));
    }
    if rows.is_empty() {
        return Err(Error::InvalidInstance("no individuals listed".into()));
    }
    Instance::from_rows(rows)
}

/// Constraint file contents. Either a named rule or explicit prefix bounds
/// keyed by group label.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintSpec {
    pub rule: Option<String>,
    pub alpha: Option<f64>,
    pub protected: Option<String>,
    pub start_k: Option<usize>,
    pub upper: Option<HashMap<String, Vec<usize>>>,
    pub lower: Option<HashMap<String, Vec<usize>>>,
}

pub fn parse_constraints(json: &str, instance: &Instance) -> Result<ConstraintSet> {
    let spec: ConstraintSpec =
        serde_json::from_str(json).map_err(|e| Error::InvalidConstraints(e.to_string()))?;
    build_constraints(&spec, instance)
}

pub fn build_constraints(spec: &ConstraintSpec, instance: &Instance) -> Result<ConstraintSet> {
    let n = instance.len();
    let t = instance.num_groups();
    if let Some(rule) = &spec.rule {
        if spec.upper.is_some() || spec.lower.is_some() {
            return Err(Error::InvalidConstraints("give either a rule or explicit bounds".into()));
        }
        let rule = match rule.as_str() {
            "ceil-alpha" => AlphaRule::CeilAlpha {
                alpha: spec
                    .alpha
                    .ok_or_else(|| Error::InvalidConstraints("ceil-alpha needs `alpha`".into()))?,
                protected: match &spec.protected {
                    Some(label) => group(instance, label)?,
                    None => default_protected(instance),
                },
                start_k: spec.start_k.unwrap_or(1),
            },
            "floor-balanced" => AlphaRule::FloorBalanced {
                start_k: spec.start_k.unwrap_or(1),
            },
            other => return Err(Error::InvalidConstraints(format!("unknown rule `{other}`"))),
        };
        return build_alpha_constraints(instance, &rule);
    }
    let mut upper = vec![(1..=n).collect::<Vec<_>>(); t];
    let mut lower = vec![vec![0; n]; t];
    for (bounds, target) in [(&spec.upper, &mut upper), (&spec.lower, &mut lower)] {
        for (label, values) in bounds.iter().flatten() {
            if values.len() != n {
                return Err(Error::InvalidConstraints(format!(
                    "group `{label}` has {} bounds for {n} positions",
                    values.len()
                )));
            }
            target[group(instance, label)?] = values.clone();
        }
    }
    ConstraintSet::from_bounds(n, upper, lower)
}

fn group(instance: &Instance, label: &str) -> Result<usize> {
    instance
        .group_index(label)
        .ok_or_else(|| Error::InvalidConstraints(format!("unknown group `{label}`")))
}

/// Group with the lowest mean score; ties go to the later group.
pub fn default_protected(instance: &Instance) -> usize {
    let t = instance.num_groups();
    let mut sums = vec![0.0; t];
    for ind in instance.individuals() {
        sums[ind.group] += ind.relevance;
    }
    let sizes = instance.group_sizes();
    (0..t)
        .rev()
        .min_by(|&a, &b| (sums[a] / sizes[a] as f64).total_cmp(&(sums[b] / sizes[b] as f64)))
        .unwrap_or(0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomJson {
    pub probability: f64,
    pub ranking: Vec<String>,
}

/// Serialized form of a [`FairDistribution`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionJson {
    pub support: Vec<AtomJson>,
    pub expected_satisfaction: Map<String, Value>,
    #[serde(default)]
    pub lambda_phases: Vec<f64>,
    #[serde(default)]
    pub oracle_calls: u64,
    #[serde(default)]
    pub epsilon: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metrics: Option<MetricsReport>,
}

/// `x` rounded to 12 significant digits.
pub fn round12(x: f64) -> f64 {
    format!("{x:.11e}").parse().unwrap_or(x)
}

pub fn distribution_to_json(
    instance: &Instance,
    distribution: &FairDistribution,
    metrics: Option<MetricsReport>,
) -> DistributionJson {
    DistributionJson {
        support: distribution
            .support
            .iter()
            .map(|a| AtomJson {
                probability: round12(a.probability),
                ranking: ids(instance, &a.ranking),
            })
            .collect(),
        expected_satisfaction: per_individual(instance, &distribution.expected_satisfaction),
        lambda_phases: distribution.lambda_phases.clone(),
        oracle_calls: distribution.oracle_calls,
        epsilon: distribution.epsilon,
        metrics,
    }
}

/// Rebuilds a distribution on `instance` and re-evaluates it under `model`.
pub fn distribution_from_json(
    instance: &Instance,
    model: &ValueModel,
    json: &DistributionJson,
) -> Result<FairDistribution> {
    if json.support.is_empty() {
        return Err(Error::InvalidConfig("distribution has no atoms".into()));
    }
    let mut atoms = Vec::with_capacity(json.support.len());
    for atom in &json.support {
        if !(atom.probability >= 0.0 && atom.probability.is_finite()) {
            return Err(Error::InvalidConfig(format!("bad probability {}", atom.probability)));
        }
        atoms.push((Ranking::from_ids(instance, &atom.ranking)?, atom.probability));
    }
    let mut dist = FairDistribution::from_weighted(model, atoms);
    dist.lambda_phases = json.lambda_phases.clone();
    dist.oracle_calls = json.oracle_calls;
    dist.epsilon = json.epsilon;
    Ok(dist)
}

pub fn ids(instance: &Instance, ranking: &Ranking) -> Vec<String> {
    ranking.ids(instance).into_iter().map(String::from).collect()
}

pub fn per_individual(instance: &Instance, values: &[f64]) -> Map<String, Value> {
    instance
        .individuals()
        .iter()
        .zip(values)
        .map(|(ind, v)| (ind.id.clone(), Value::from(*v)))
        .collect()
}
