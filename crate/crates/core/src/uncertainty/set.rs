use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

use super::measure::{Atom, DiscreteLevyMeasure, LevyTriple};

/// A finite family of Lévy triples `U`.
///
/// Parametric families are enumerated on a caller-supplied grid when the set
/// is built, so every downstream supremum is a maximum over this list.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UncertaintySet {
    dim: usize,
    triples: Vec<LevyTriple>,
}

impl UncertaintySet {
    /// Builds a set from explicit triples. An empty list is allowed (the
    /// projection of an empty `V` is empty); operations that need a
    /// nonempty set report [`Error::EmptySet`].
    pub fn new(dim: usize, triples: Vec<LevyTriple>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("dimension must be at least 1"));
        }
        if let Some(t) = triples.iter().find(|t| t.dim() != dim) {
            return Err(Error::invalid(format!(
                "triple of dimension {} in a set of dimension {dim}",
                t.dim()
            )));
        }
        Ok(Self { dim, triples })
    }

    pub fn from_triples(triples: Vec<LevyTriple>) -> Result<Self> {
        let dim = triples.first().ok_or(Error::EmptySet)?.dim();
        Self::new(dim, triples)
    }

    /// `V × {0} × {0}`
    pub fn pure_jump(measures: Vec<DiscreteLevyMeasure>) -> Result<Self> {
        Self::from_triples(measures.into_iter().map(LevyTriple::pure_jump).collect())
    }

    pub fn from_family(family: &ParametricFamily) -> Result<Self> {
        Self::from_triples(family.enumerate()?)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn triples(&self) -> &[LevyTriple] {
        &self.triples
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn ensure_nonempty(&self) -> Result<()> {
        if self.triples.is_empty() {
            Err(Error::EmptySet)
        } else {
            Ok(())
        }
    }

    /// The measure projection `V`, one entry per triple (duplicates kept so
    /// indices line up with [`Self::triples`]).
    pub fn measures(&self) -> Vec<DiscreteLevyMeasure> {
        self.triples.iter().map(|t| t.measure.clone()).collect()
    }

    pub fn has_diffusion(&self) -> bool {
        self.triples.iter().any(|t| !t.cov_root.is_zero())
    }

    pub fn max_total_mass(&self) -> f64 {
        self.triples
            .iter()
            .map(|t| t.measure.total_mass())
            .fold(0.0, f64::max)
    }

    /// Largest jump size carried by any measure.
    pub fn max_jump_norm(&self) -> f64 {
        self.triples
            .iter()
            .flat_map(|t| t.measure.atoms().iter().map(|a| crate::linalg::norm(&a.z)))
            .fold(0.0, f64::max)
    }
}

/// Built-in parameter-to-triple rules for one-dimensional families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum FamilyRule {
    /// `λ ↦ (λ·δ_atom, 0, 0)`
    ScaledAtom { atom: f64 },
    /// `x ↦ (weight·δ_x, 0, 0)`
    MovingAtom {
        #[serde(default = "one")]
        weight: f64,
    },
    /// `α ↦ (total·(α δ_a + (1-α) δ_b), 0, 0)`
    TwoPointMixture {
        atoms: [f64; 2],
        #[serde(default = "one")]
        total: f64,
    },
    /// `p ↦ (v, p, q)` with fixed atoms `[[z, w], ...]`.
    DriftInterval {
        #[serde(default)]
        atoms: Vec<[f64; 2]>,
        #[serde(default)]
        cov_root: f64,
    },
    /// `σ ↦ (v, p, σ)` with fixed atoms and drift.
    VolatilityInterval {
        #[serde(default)]
        atoms: Vec<[f64; 2]>,
        #[serde(default)]
        drift: f64,
    },
}

fn one() -> f64 {
    1.0
}

type RuleFn = Arc<dyn Fn(f64) -> Result<LevyTriple> + Send + Sync>;

/// A one-parameter family of triples evaluated on a uniform grid over
/// `[lo, hi]`.
#[derive(Clone)]
pub struct ParametricFamily {
    name: String,
    range: (f64, f64),
    grid: usize,
    rule: RuleFn,
}

impl fmt::Debug for ParametricFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ParametricFamily")
            .field("name", &self.name)
            .field("range", &self.range)
            .field("grid", &self.grid)
            .finish()
    }
}

fn pairs_to_measure(atoms: &[[f64; 2]]) -> Result<DiscreteLevyMeasure> {
    DiscreteLevyMeasure::from_pairs(&atoms.iter().map(|a| (a[0], a[1])).collect::<Vec<_>>())
}

impl ParametricFamily {
    pub fn new(
        name: impl Into<String>,
        range: (f64, f64),
        grid: usize,
        rule: impl Fn(f64) -> Result<LevyTriple> + Send + Sync + 'static,
    ) -> Result<Self> {
        let (lo, hi) = range;
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::invalid(format!("bad parameter range [{lo}, {hi}]")));
        }
        if grid == 0 {
            return Err(Error::invalid("grid count must be positive"));
        }
        Ok(Self {
            name: name.into(),
            range,
            grid,
            rule: Arc::new(rule),
        })
    }

    pub fn builtin(rule: FamilyRule, range: (f64, f64), grid: usize) -> Result<Self> {
        let name = match &rule {
            FamilyRule::ScaledAtom { .. } => "scaled_atom",
            FamilyRule::MovingAtom { .. } => "moving_atom",
            FamilyRule::TwoPointMixture { .. } => "two_point_mixture",
            FamilyRule::DriftInterval { .. } => "drift_interval",
            FamilyRule::VolatilityInterval { .. } => "volatility_interval",
        };
        let f: Box<dyn Fn(f64) -> Result<LevyTriple> + Send + Sync> = match rule {
            FamilyRule::ScaledAtom { atom } => Box::new(move |lambda| {
                let v = if lambda == 0.0 {
                    DiscreteLevyMeasure::zero(1)
                } else {
                    DiscreteLevyMeasure::dirac(atom, lambda)?
                };
                Ok(LevyTriple::pure_jump(v))
            }),
            FamilyRule::MovingAtom { weight } => Box::new(move |x| {
                Ok(LevyTriple::pure_jump(DiscreteLevyMeasure::dirac(x, weight)?))
            }),
            FamilyRule::TwoPointMixture { atoms, total } => Box::new(move |alpha| {
                if !(0.0..=1.0).contains(&alpha) {
                    return Err(Error::invalid(format!("mixture weight {alpha} outside [0, 1]")));
                }
                let parts = [(atoms[0], total * alpha), (atoms[1], total * (1.0 - alpha))];
                let v = DiscreteLevyMeasure::merged(
                    1,
                    parts.iter().map(|&(z, w)| Atom { z: vec![z], w }),
                    0.0,
                )?;
                Ok(LevyTriple::pure_jump(v))
            }),
            FamilyRule::DriftInterval { atoms, cov_root } => {
                let v = pairs_to_measure(&atoms)?;
                Box::new(move |p| LevyTriple::new(v.clone(), vec![p], Matrix::scalar(cov_root)))
            }
            FamilyRule::VolatilityInterval { atoms, drift } => {
                let v = pairs_to_measure(&atoms)?;
                Box::new(move |q| LevyTriple::new(v.clone(), vec![drift], Matrix::scalar(q)))
            }
        };
        Self::new(name, range, grid, f)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn parameters(&self) -> Vec<f64> {
        let (lo, hi) = self.range;
        if self.grid == 1 {
            return vec![lo];
        }
        let n = (self.grid - 1) as f64;
        (0..self.grid)
            .map(|k| {
                if k + 1 == self.grid {
                    hi
                } else {
                    lo + (hi - lo) * k as f64 / n
                }
            })
            .collect()
    }

    pub fn enumerate(&self) -> Result<Vec<LevyTriple>> {
        self.parameters().into_iter().map(|x| (self.rule)(x)).collect()
    }
}
