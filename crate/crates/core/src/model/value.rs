use crate::error::{Error, Result};

use super::{Instance, Ranking};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ValuePreset {
    /// `V(r, u) = r*(u) - r(u)`.
    PositionDiff,
    /// `V(r, u) = ln(r*(u) / r(u))`.
    LogRatio,
    /// +1 for entering the top `k`, -1 for leaving it, 0 otherwise.
    TopK(usize),
    Custom,
}

/// Value function of the form `V(r, u) = f(r(u)) - g(u)`.
///
/// `f` is indexed by 0-based position and must be nonincreasing; `g` is
/// indexed by individual and must be nonincreasing along the merit order.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueModel {
    preset: ValuePreset,
    f: Vec<f64>,
    g: Vec<f64>,
}

impl ValueModel {
    /// Builds `f = p` and `g = p ∘ r*` from a position-bias curve `p`.
    fn from_bias(instance: &Instance, preset: ValuePreset, p: impl Fn(usize) -> f64) -> Self {
        let n = instance.len();
        let f: Vec<f64> = (0..n).map(&p).collect();
        let g = (0..n).map(|u| f[instance.merit_rank(u)]).collect();
        ValueModel { preset, f, g }
    }

    pub fn position_diff(instance: &Instance) -> Self {
        let n = instance.len();
        Self::from_bias(instance, ValuePreset::PositionDiff, |i| (n - 1 - i) as f64)
    }

    pub fn log_ratio(instance: &Instance) -> Self {
        let n = instance.len() as f64;
        Self::from_bias(instance, ValuePreset::LogRatio, |i| (n / (i + 1) as f64).ln())
    }

    pub fn top_k(instance: &Instance, k: usize) -> Self {
        Self::from_bias(instance, ValuePreset::TopK(k), |i| if i < k { 1.0 } else { 0.0 })
    }

    /// Arbitrary `f` (per position) and `g` (per individual).
    pub fn custom(instance: &Instance, f: Vec<f64>, g: Vec<f64>) -> Result<Self> {
        let n = instance.len();
        if f.len() != n || g.len() != n {
            return Err(Error::InvalidValueModel(format!(
                "f has {} entries and g has {}, expected {n}",
                f.len(),
                g.len()
            )));
        }
        if f.iter().chain(g.iter()).any(|x| !x.is_finite()) {
            return Err(Error::InvalidValueModel("non-finite entry".into()));
        }
        if f.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidValueModel("f must be nonincreasing".into()));
        }
        let merit = instance.merit_order();
        if merit.windows(2).any(|w| g[w[0]] < g[w[1]]) {
            return Err(Error::InvalidValueModel(
                "g must be nondecreasing in relevance".into(),
            ));
        }
        Ok(ValueModel {
            preset: ValuePreset::Custom,
            f,
            g,
        })
    }

    pub fn preset(&self) -> ValuePreset {
        self.preset
    }

    pub fn len(&self) -> usize {
        self.f.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f.is_empty()
    }

    /// Position utility at 0-based position `pos`.
    pub fn f(&self, pos: usize) -> f64 {
        self.f[pos]
    }

    pub fn g(&self, u: usize) -> f64 {
        self.g[u]
    }

    pub fn value(&self, ranking: &Ranking, u: usize) -> f64 {
        self.f[ranking.position(u)] - self.g[u]
    }

    /// `V(r, u)` for every individual, indexed by individual.
    pub fn values(&self, ranking: &Ranking) -> Vec<f64> {
        (0..self.len()).map(|u| self.value(ranking, u)).collect()
    }

    /// True when every `f` and `g` entry is an integer, so sums and ratio
    /// comparisons can be carried out exactly.
    pub fn is_integral(&self) -> bool {
        self.f
            .iter()
            .chain(self.g.iter())
            .all(|x| x.fract() == 0.0 && x.abs() < 2f64.powi(40))
    }

    /// Smallest and largest value `V` can take: `f(n) - max g` and
    /// `f(1) - min g`.
    pub fn range(&self) -> (f64, f64) {
        let gmax = self.g.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let gmin = self.g.iter().copied().fold(f64::INFINITY, f64::min);
        (self.f[self.len() - 1] - gmax, self.f[0] - gmin)
    }

    /// `sum_u V(r, u)`, which is the same for every ranking.
    pub fn total(&self) -> f64 {
        self.f.iter().sum::<f64>() - self.g.iter().sum::<f64>()
    }
}

/// `V(r, u)` under `model`. The merit ranking is folded into `g`.
pub fn value(model: &ValueModel, ranking: &Ranking, u: usize) -> f64 {
    model.value(ranking, u)
}
