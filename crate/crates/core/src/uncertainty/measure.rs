use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::region::Region;

/// A single atom `w·δ_z` of a discrete Lévy measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub z: Vec<f64>,
    pub w: f64,
}

/// A finite-activity Lévy measure with finitely many atoms on `ℝ^d_0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMeasure", into = "RawMeasure")]
pub struct DiscreteLevyMeasure {
    dim: usize,
    atoms: Vec<Atom>,
}

#[derive(Serialize, Deserialize)]
struct RawMeasure {
    dim: usize,
    atoms: Vec<Atom>,
}

impl TryFrom<RawMeasure> for DiscreteLevyMeasure {
    type Error = Error;
    fn try_from(raw: RawMeasure) -> Result<Self> {
        DiscreteLevyMeasure::new(raw.dim, raw.atoms)
    }
}

impl From<DiscreteLevyMeasure> for RawMeasure {
    fn from(m: DiscreteLevyMeasure) -> Self {
        RawMeasure {
            dim: m.dim,
            atoms: m.atoms,
        }
    }
}

impl DiscreteLevyMeasure {
    pub fn new(dim: usize, atoms: Vec<Atom>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("dimension must be at least 1"));
        }
        for (i, a) in atoms.iter().enumerate() {
            if a.z.len() != dim {
                return Err(Error::invalid(format!(
                    "atom {i} has dimension {} (expected {dim})",
                    a.z.len()
                )));
            }
            if a.z.iter().any(|x| !x.is_finite()) {
                return Err(Error::invalid(format!("atom {i} location is not finite")));
            }
            if linalg::is_zero(&a.z) {
                return Err(Error::invalid(format!("atom {i} sits at the origin")));
            }
            if !(a.w.is_finite() && a.w > 0.0) {
                return Err(Error::invalid(format!(
                    "atom {i} weight {} must be positive and finite",
                    a.w
                )));
            }
            if atoms[..i].iter().any(|b| b.z == a.z) {
                return Err(Error::invalid(format!("atom {i} duplicates an earlier location")));
            }
        }
        Ok(Self { dim, atoms })
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            atoms: Vec::new(),
        }
    }

    /// One-dimensional measure from `(z, w)` pairs.
    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        Self::new(
            1,
            pairs
                .iter()
                .map(|&(z, w)| Atom { z: vec![z], w })
                .collect(),
        )
    }

    /// `w·δ_z` in one dimension.
    pub fn dirac(z: f64, w: f64) -> Result<Self> {
        Self::from_pairs(&[(z, w)])
    }

    /// Builds a measure from possibly coincident atoms, summing their weights
    /// and dropping non-positive ones. Locations within `snap` of an existing
    /// atom are merged into it.
    pub fn merged(dim: usize, atoms: impl IntoIterator<Item = Atom>, snap: f64) -> Result<Self> {
        let mut out: Vec<Atom> = Vec::new();
        for a in atoms {
            if linalg::is_zero(&a.z) || a.w <= 0.0 {
                continue;
            }
            match out.iter_mut().find(|b| linalg::dist(&b.z, &a.z) <= snap) {
                Some(b) => b.w += a.w,
                None => out.push(a),
            }
        }
        Self::new(dim, out)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn is_zero(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.w).sum()
    }

    /// `v(A)`
    pub fn mass(&self, region: &Region) -> f64 {
        self.atoms
            .iter()
            .filter(|a| region.contains(&a.z))
            .map(|a| a.w)
            .sum()
    }

    /// `∫_A φ dv`, failing if `φ` is not finite at a charged atom.
    pub fn integrate(&self, phi: impl Fn(&[f64]) -> f64, region: &Region) -> Result<f64> {
        let mut acc = 0.0;
        for a in self.atoms.iter().filter(|a| region.contains(&a.z)) {
            let y = phi(&a.z);
            if !y.is_finite() {
                return Err(Error::Evaluation(format!(
                    "integrand is {y} at atom {:?}",
                    a.z
                )));
            }
            acc += y * a.w;
        }
        Ok(acc)
    }

    /// `∫ |z| v(dz)`
    pub fn abs_first_moment(&self) -> f64 {
        self.atoms.iter().map(|a| linalg::norm(&a.z) * a.w).sum()
    }

    /// `∫ z v(dz)`
    pub fn mean(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.dim];
        for a in &self.atoms {
            for (acc, z) in m.iter_mut().zip(&a.z) {
                *acc += z * a.w;
            }
        }
        m
    }

    /// `v|_A`
    pub fn restrict(&self, region: &Region) -> Self {
        Self {
            dim: self.dim,
            atoms: self
                .atoms
                .iter()
                .filter(|a| region.contains(&a.z))
                .cloned()
                .collect(),
        }
    }

    /// Distinct atom radii, largest first.
    pub fn radii(&self) -> Vec<f64> {
        let mut r: Vec<f64> = self.atoms.iter().map(|a| linalg::norm(&a.z)).collect();
        r.sort_by(|a, b| b.total_cmp(a));
        r.dedup();
        r
    }

    /// Same atoms and weights up to ordering and a relative weight tolerance.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.dim == other.dim
            && self.atoms.len() == other.atoms.len()
            && self.atoms.iter().all(|a| {
                other
                    .atoms
                    .iter()
                    .any(|b| b.z == a.z && (b.w - a.w).abs() <= tol * a.w.max(1.0))
            })
    }
}

/// A Lévy triple `(v, p, Q)`: jump measure, drift and covariance root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevyTriple {
    pub measure: DiscreteLevyMeasure,
    pub drift: Vec<f64>,
    pub cov_root: Matrix,
}

impl LevyTriple {
    pub fn new(measure: DiscreteLevyMeasure, drift: Vec<f64>, cov_root: Matrix) -> Result<Self> {
        let d = measure.dim();
        if drift.len() != d || cov_root.dim() != d {
            return Err(Error::invalid(format!(
                "triple components disagree on dimension (measure {d}, drift {}, cov root {})",
                drift.len(),
                cov_root.dim()
            )));
        }
        if drift.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("drift is not finite"));
        }
        Ok(Self {
            measure,
            drift,
            cov_root,
        })
    }

    /// Pure-jump triple `(v, 0, 0)`.
    pub fn pure_jump(measure: DiscreteLevyMeasure) -> Self {
        let d = measure.dim();
        Self {
            measure,
            drift: vec![0.0; d],
            cov_root: Matrix::zeros(d),
        }
    }

    /// One-dimensional triple.
    pub fn scalar(measure: DiscreteLevyMeasure, drift: f64, q: f64) -> Result<Self> {
        Self::new(measure, vec![drift], Matrix::scalar(q))
    }

    pub fn dim(&self) -> usize {
        self.measure.dim()
    }

    /// `∫|z| v(dz) + |p| + tr(Q Qᵀ)`
    pub fn property_bound(&self) -> f64 {
        self.measure.abs_first_moment() + linalg::norm(&self.drift) + self.cov_root.trace_qqt()
    }
}
