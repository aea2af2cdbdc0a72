//! Declarative run configuration, read from TOML.
//!
//! One document describes one run: the uncertainty set, numerical
//! settings, and the section for the command being run. Sections for other
//! commands may be present and are ignored by the command at hand.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::analysis::ProcessKind;
use crate::error::{Error, Result};
use crate::fnspace::{FunctionRule, MembershipConfig};
use crate::linalg::Matrix;
use crate::payoff::Payoff;
use crate::pide::Grid1D;
use crate::region::Region;
use crate::uncertainty::{Atom, DiscreteLevyMeasure, FamilyRule, LevyTriple, ParametricFamily, PowerLawTail, UncertaintySet};

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AtomSpec {
    /// `[z, w]` in one dimension.
    Pair([f64; 2]),
    Full { z: VectorSpec, w: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum VectorSpec {
    Scalar(f64),
    Vector(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixSpec {
    Scalar(f64),
    Rows(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TripleSpec {
    #[serde(default)]
    pub atoms: Vec<AtomSpec>,
    #[serde(default)]
    pub drift: Option<VectorSpec>,
    #[serde(default)]
    pub cov_root: Option<MatrixSpec>,
}

impl TripleSpec {
    fn build(&self, dim: usize) -> Result<LevyTriple> {
        let atoms = self
            .atoms
            .iter()
            .map(|a| match a {
                AtomSpec::Pair([z, w]) => Atom { z: vec![*z], w: *w },
                AtomSpec::Full { z, w } => Atom {
                    z: match z {
                        VectorSpec::Scalar(x) => vec![*x],
                        VectorSpec::Vector(v) => v.clone(),
                    },
                    w: *w,
                },
            })
            .collect();
        let drift = match &self.drift {
            None => vec![0.0; dim],
            Some(VectorSpec::Scalar(p)) => vec![*p; dim],
            Some(VectorSpec::Vector(p)) => p.clone(),
        };
        let cov_root = match &self.cov_root {
            None => Matrix::zeros(dim),
            Some(MatrixSpec::Scalar(q)) if dim == 1 => Matrix::scalar(*q),
            Some(MatrixSpec::Scalar(_)) => {
                return Err(Error::invalid("a scalar cov_root needs dim = 1; give rows instead"))
            }
            Some(MatrixSpec::Rows(rows)) => Matrix::from_rows(rows)?,
        };
        LevyTriple::new(DiscreteLevyMeasure::new(dim, atoms)?, drift, cov_root)
    }
}

/// A built-in one-parameter family on a uniform grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    #[serde(flatten)]
    pub rule: FamilyRule,
    pub range: [f64; 2],
    pub grid: usize,
}

/// Union of explicit triples and enumerated families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetSpec {
    #[serde(default = "one")]
    pub dim: usize,
    #[serde(default)]
    pub triples: Vec<TripleSpec>,
    #[serde(default)]
    pub families: Vec<FamilySpec>,
}

impl SetSpec {
    pub fn build(&self) -> Result<UncertaintySet> {
        let mut triples = self
            .triples
            .iter()
            .map(|t| t.build(self.dim))
            .collect::<Result<Vec<_>>>()?;
        for f in &self.families {
            if self.dim != 1 {
                return Err(Error::invalid("built-in families are one-dimensional"));
            }
            triples.extend(ParametricFamily::builtin(f.rule.clone(), (f.range[0], f.range[1]), f.grid)?.enumerate()?);
        }
        UncertaintySet::new(self.dim, triples)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    pub dx: f64,
    /// Overrides the automatic time step.
    pub dt: Option<f64>,
    /// Extra interval the space grid must cover besides the origin.
    pub support: Option<[f64; 2]>,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            dx: 0.02,
            dt: None,
            support: None,
        }
    }
}

impl GridSpec {
    pub fn build(&self, u: &UncertaintySet, horizon: f64, x: f64) -> Result<Grid1D> {
        let s = self.support.unwrap_or([0.0, 0.0]);
        let mut g = Grid1D::auto(u, horizon, self.dx, (s[0].min(x), s[1].max(x)))?;
        if let Some(dt) = self.dt {
            if !(dt > 0.0) {
                return Err(Error::invalid(format!("time step {dt} must be positive")));
            }
            g.dt = dt;
        }
        Ok(g)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McSpec {
    pub n_paths: usize,
    pub dt: f64,
    /// Candidate controls switch between triples on this many equal
    /// subintervals.
    pub segments: usize,
}

impl Default for McSpec {
    fn default() -> Self {
        Self {
            n_paths: 10_000,
            dt: 0.01,
            segments: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Pide,
    Mc,
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidateSpec {
    #[serde(default = "half")]
    pub q: f64,
    #[serde(default = "two")]
    pub p: f64,
}

fn half() -> f64 {
    0.5
}

fn two() -> f64 {
    2.0
}

fn unit() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpectSpec {
    #[serde(default = "unit")]
    pub t: f64,
    #[serde(default)]
    pub x: f64,
    pub payoff: Payoff,
    #[serde(default)]
    pub method: Option<Method>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GPoissonSpec {
    pub lambda: [f64; 2],
    #[serde(default = "unit")]
    pub t: f64,
    pub phi: Payoff,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EventSpec {
    Always,
    /// At least `count` jumps with size in `region` during `(s, t]`
    /// (default the whole horizon).
    PrmAtLeast {
        region: Region,
        #[serde(default = "one")]
        count: usize,
        #[serde(default)]
        window: Option<[f64; 2]>,
    },
    /// Some jump lands on the boundary of `region`.
    JumpOnBoundary { region: Region },
    /// `X_T ≥ level` (first coordinate).
    TerminalAtLeast { level: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapacitySpec {
    #[serde(default = "unit")]
    pub t: f64,
    pub event: EventSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ErlangSpec {
    pub a: Region,
    pub b: Region,
    #[serde(default = "one")]
    pub k: usize,
    /// `[start, end]`; `end` may be `inf`.
    pub window: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathInputSpec {
    /// Path file, `.csv` or `.jsonl`.
    pub input: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MartingaleSpec {
    pub process: ProcessKind,
    #[serde(default)]
    pub s: f64,
    #[serde(default = "unit")]
    pub t: f64,
    #[serde(default)]
    pub dx: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransportSpec {
    #[serde(default)]
    pub base: PowerLawTail,
    #[serde(default = "default_eps")]
    pub eps: Vec<f64>,
}

fn default_eps() -> Vec<f64> {
    vec![0.1, 0.5, 1.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FnspaceSpec {
    pub function: FunctionRule,
    #[serde(default)]
    pub discontinuities: Option<Region>,
    #[serde(default)]
    pub support: Option<Region>,
    #[serde(default = "whole")]
    pub region: Region,
    #[serde(default = "unit")]
    pub p: f64,
    #[serde(default)]
    pub membership: MembershipConfig,
}

fn whole() -> Region {
    Region::Whole
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CounterexampleSpec {
    #[serde(default = "half")]
    pub t: f64,
    #[serde(default = "unit")]
    pub horizon: f64,
    #[serde(default = "default_ns")]
    pub n: Vec<usize>,
}

fn default_ns() -> Vec<usize> {
    vec![10, 100, 1000]
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub set: Option<SetSpec>,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub mc: McSpec,
    #[serde(default)]
    pub validate: Option<ValidateSpec>,
    #[serde(default)]
    pub expect: Option<ExpectSpec>,
    #[serde(default)]
    pub gpoisson: Option<GPoissonSpec>,
    #[serde(default)]
    pub capacity: Option<CapacitySpec>,
    #[serde(default)]
    pub erlang: Option<ErlangSpec>,
    #[serde(default)]
    pub compensate: Option<PathInputSpec>,
    #[serde(default)]
    pub martingale: Option<MartingaleSpec>,
    #[serde(default)]
    pub decompose: Option<PathInputSpec>,
    #[serde(default)]
    pub transport: Option<TransportSpec>,
    #[serde(default)]
    pub fnspace: Option<FnspaceSpec>,
    #[serde(default)]
    pub counterexample: Option<CounterexampleSpec>,
}

impl RunConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Parse(e.to_string()))
    }

    /// The uncertainty set, which must be present.
    pub fn uncertainty_set(&self) -> Result<UncertaintySet> {
        self.set
            .as_ref()
            .ok_or_else(|| Error::Parse("missing [set] section".into()))?
            .build()
    }

}
