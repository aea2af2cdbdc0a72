//! Compensation of the jump part and related constructions.
//!
//! `X^d` is the pure-jump part; `Y_t = X^d_t − t·sup_v ∫z dv` subtracts the
//! worst-case mean and is a G-martingale; `Z` embeds each measure's own mean
//! as a drift so that both `Z` and `−Z` are G-martingales. The asymmetry of
//! `Y` is visible through [`martingale_check`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::paths::{CadlagPath, Sample};
use crate::payoff::Payoff;
use crate::pide::{self, Grid1D};
use crate::region::Region;
use crate::uncertainty::{Atom, DiscreteLevyMeasure, LevyTriple, UncertaintySet};

/// `Ê[X^d_t] = t·sup_v ∫z v(dz)`.
///
/// For `d > 1` the supremum is returned only when one triple's mean
/// dominates all others in every coordinate.
pub fn mean_of_jump_part(u: &UncertaintySet, t: f64) -> Result<Vec<f64>> {
    u.ensure_nonempty()?;
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidInterval(format!("time {t} must be finite and nonnegative")));
    }
    let means: Vec<Vec<f64>> = u.triples().iter().map(|x| x.measure.mean()).collect();
    let best = means
        .iter()
        .find(|m| means.iter().all(|o| m.iter().zip(o).all(|(a, b)| a >= b)))
        .ok_or_else(|| {
            Error::Unsupported(
                "jump means are not ordered coordinatewise; the vector supremum is undefined".into(),
            )
        })?;
    Ok(linalg::scale(best, t))
}

/// `Y_t = X^d_t − t·sup_v ∫z dv` along a path: the path's jumps plus a
/// linear drift.
pub fn compensate_path(path: &CadlagPath, u: &UncertaintySet) -> Result<CadlagPath> {
    if path.dim() != u.dim() {
        return Err(Error::invalid(format!(
            "path dimension {} differs from set dimension {}",
            path.dim(),
            u.dim()
        )));
    }
    let m = mean_of_jump_part(u, 1.0)?;
    let t = path.horizon();
    let samples = if linalg::is_zero(&m) {
        Vec::new()
    } else {
        vec![
            Sample {
                time: 0.0,
                value: vec![0.0; u.dim()],
            },
            Sample {
                time: t,
                value: linalg::scale(&m, -t),
            },
        ]
    };
    CadlagPath::new(t, path.dim(), samples, path.jumps().to_vec())
}

/// The Z-set `{(v, −∫z dv, 0)}` built from the jump measures of `u`.
pub fn symmetric_compensated_set(u: &UncertaintySet) -> Result<UncertaintySet> {
    let d = u.dim();
    let triples = u
        .triples()
        .iter()
        .map(|t| {
            LevyTriple::new(
                t.measure.clone(),
                linalg::scale(&t.measure.mean(), -1.0),
                Matrix::zeros(d),
            )
        })
        .collect::<Result<_>>()?;
    UncertaintySet::new(d, triples)
}

/// `v ∘ φ⁻¹(· ∩ A)` for each `v`: atoms in `A` are moved to `φ(z)`, zero
/// images dropped and images within `1e-12` of each other merged.
pub fn pushforward_set(
    measures: &[DiscreteLevyMeasure],
    phi: impl Fn(&[f64]) -> Vec<f64>,
    out_dim: usize,
    region: &Region,
) -> Result<Vec<DiscreteLevyMeasure>> {
    measures
        .iter()
        .map(|v| {
            let atoms = v
                .atoms()
                .iter()
                .filter(|a| region.contains(&a.z))
                .map(|a| {
                    let z = phi(&a.z);
                    if z.len() != out_dim || z.iter().any(|x| !x.is_finite()) {
                        return Err(Error::Evaluation(format!(
                            "image of atom {:?} is {z:?}, expected {out_dim} finite values",
                            a.z
                        )));
                    }
                    Ok(Atom { z, w: a.w })
                })
                .collect::<Result<Vec<_>>>()?;
            DiscreteLevyMeasure::merged(out_dim, atoms, 1e-12)
        })
        .collect()
}

/// Lifts `u` to `ℝ^{d(n+1)}`: each atom goes to the block of the first
/// region containing it (block 0 if none), drift and covariance root sit in
/// block 0.
pub fn restricted_product_set(u: &UncertaintySet, regions: &[Region]) -> Result<UncertaintySet> {
    let d = u.dim();
    if let Some(r) = regions.iter().find(|r| r.closure_contains_origin()) {
        return Err(Error::Precondition(format!(
            "region {r:?} must be bounded away from the origin"
        )));
    }
    let probes: Vec<Vec<f64>> = u
        .triples()
        .iter()
        .flat_map(|t| t.measure.atoms().iter().map(|a| a.z.clone()))
        .collect();
    for (i, a) in regions.iter().enumerate() {
        for b in &regions[i + 1..] {
            if !a.is_disjoint(b, &probes) {
                return Err(Error::InvalidRegion(format!("regions {a:?} and {b:?} overlap")));
            }
        }
    }
    let dim = d * (regions.len() + 1);
    let triples = u
        .triples()
        .iter()
        .map(|t| {
            let atoms = t.measure.atoms().iter().map(|a| {
                let block = regions
                    .iter()
                    .position(|r| r.contains(&a.z))
                    .map_or(0, |i| i + 1);
                let mut z = vec![0.0; dim];
                z[block * d..(block + 1) * d].copy_from_slice(&a.z);
                Atom { z, w: a.w }
            });
            let mut drift = vec![0.0; dim];
            drift[..d].copy_from_slice(&t.drift);
            LevyTriple::new(
                DiscreteLevyMeasure::merged(dim, atoms, 0.0)?,
                drift,
                t.cov_root.embed(dim),
            )
        })
        .collect::<Result<_>>()?;
    UncertaintySet::new(dim, triples)
}

/// Splits a path into its continuous part and its jump part.
pub fn decompose(path: &CadlagPath) -> Result<(CadlagPath, CadlagPath)> {
    let continuous = CadlagPath::new(path.horizon(), path.dim(), path.samples().to_vec(), Vec::new())?;
    let jumps = CadlagPath::pure_jump(path.horizon(), path.dim(), path.jumps().to_vec())?;
    Ok((continuous, jumps))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProcessKind {
    /// `X^d`
    RawJumpPart,
    /// `Y = X^d − t·sup_v ∫z dv`
    CompensatedJumpPart,
    /// `Z`, driven by the set `{(v, −∫z dv, 0)}`
    SymmetricCompensated,
    /// `∫_A φ(z) L(t, dz)` for scalar jumps
    PoissonIntegral { phi: Payoff, region: Region },
    /// `X^c`, the drift and Brownian part
    ContinuousPart,
}

/// A Lévy-type process derived from an uncertainty set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProcessSpec {
    pub kind: ProcessKind,
    pub set: UncertaintySet,
}

impl ProcessSpec {
    pub fn new(kind: ProcessKind, set: UncertaintySet) -> Result<Self> {
        if let ProcessKind::PoissonIntegral { phi, region } = &kind {
            phi.validate()?;
            if set.dim() != 1 {
                return Err(Error::Unsupported("Poisson integrals of scalar payoffs need d = 1".into()));
            }
            if region.closure_contains_origin() {
                return Err(Error::Precondition(
                    "Poisson integral region must be bounded away from the origin".into(),
                ));
            }
        }
        Ok(Self { kind, set })
    }

    /// Tags a raw jump part as compensated.
    pub fn compensated(&self) -> Result<Self> {
        match self.kind {
            ProcessKind::RawJumpPart => Ok(Self {
                kind: ProcessKind::CompensatedJumpPart,
                set: self.set.clone(),
            }),
            _ => Err(Error::invalid(format!("only the raw jump part can be compensated, not {:?}", self.kind))),
        }
    }

    /// The uncertainty set driving this process as a G-Lévy process of its
    /// own.
    pub fn law(&self) -> Result<UncertaintySet> {
        let u = &self.set;
        let d = u.dim();
        let jumps_with = |drift: &dyn Fn(&LevyTriple) -> Vec<f64>| {
            let triples = u
                .triples()
                .iter()
                .map(|t| LevyTriple::new(t.measure.clone(), drift(t), Matrix::zeros(d)))
                .collect::<Result<_>>()?;
            UncertaintySet::new(d, triples)
        };
        match &self.kind {
            ProcessKind::RawJumpPart => jumps_with(&|_| vec![0.0; d]),
            ProcessKind::CompensatedJumpPart => {
                let m = mean_of_jump_part(u, 1.0)?;
                jumps_with(&|_| linalg::scale(&m, -1.0))
            }
            ProcessKind::SymmetricCompensated => symmetric_compensated_set(u),
            ProcessKind::PoissonIntegral { phi, region } => {
                let pushed = pushforward_set(&u.measures(), |z| vec![phi.eval(z[0])], 1, region)?;
                UncertaintySet::new(1, pushed.into_iter().map(LevyTriple::pure_jump).collect())
            }
            ProcessKind::ContinuousPart => UncertaintySet::new(
                d,
                u.triples()
                    .iter()
                    .map(|t| LevyTriple::new(DiscreteLevyMeasure::zero(d), t.drift.clone(), t.cov_root.clone()))
                    .collect::<Result<_>>()?,
            ),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MartingaleReport {
    /// `|Ê[M_t − M_s]|`
    pub max_deviation: f64,
    /// `|Ê[−(M_t − M_s)]|`
    pub symmetric_deviation: f64,
    /// Larger of the two refinement error estimates.
    pub scheme_error: f64,
    pub tolerance: f64,
    pub martingale: bool,
    pub symmetric: bool,
}

/// Checks `Ê[M_t − M_s] = 0` (G-martingale) and `Ê[−(M_t − M_s)] = 0`
/// (symmetric) with the PIDE solver, using stationarity of increments.
/// `dx` defaults to `0.05`; the tolerance is `max(2·scheme error, 1e-3)`.
pub fn martingale_check(spec: &ProcessSpec, s: f64, t: f64, dx: Option<f64>) -> Result<MartingaleReport> {
    if !(0.0 <= s && s < t && t.is_finite()) {
        return Err(Error::InvalidInterval(format!("need 0 <= s < t, got s = {s}, t = {t}")));
    }
    let law = spec.law()?;
    law.ensure_nonempty()?;
    if law.dim() != 1 {
        return Err(Error::Unsupported("martingale checks run the one-dimensional solver".into()));
    }
    let grid = Grid1D::auto(&law, t - s, dx.unwrap_or(0.05), (0.0, 0.0))?;
    let up = pide::solve_with_error(|x| x, &law, &grid, 0.0)?;
    let down = pide::solve_with_error(|x| -x, &law, &grid, 0.0)?;
    let scheme_error = up.error_estimate.max(down.error_estimate);
    let tolerance = (2.0 * scheme_error).max(1e-3);
    let max_deviation = up.value.abs();
    let symmetric_deviation = down.value.abs();
    Ok(MartingaleReport {
        max_deviation,
        symmetric_deviation,
        scheme_error,
        tolerance,
        martingale: max_deviation <= tolerance,
        symmetric: max_deviation <= tolerance && symmetric_deviation <= tolerance,
    })
}
