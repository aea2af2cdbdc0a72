//! Uncertainty sets of Lévy triples and the suprema they induce.
//!
//! An uncertainty set `U` is a finite list of triples `(v, p, Q)`. Its
//! measure projection `V` drives the capacity `sup_v v(A)` and the
//! sup-integrals `sup_v ∫_A φ dv`, both evaluated exactly over the list.

mod measure;
mod set;
pub mod transport;

use serde::{Deserialize, Serialize};

pub use measure::{Atom, DiscreteLevyMeasure, LevyTriple};
pub use set::{FamilyRule, ParametricFamily, UncertaintySet};
pub use transport::{
    family_separation_radius, PowerLawTail, TailMeasure, TransportMap, TransportPiece,
};

use crate::error::{Error, Result};
use crate::linalg::norm;
use crate::region::Region;

/// A supremum over an enumerated family together with the index attaining it.
///
/// Ties go to the lowest index. `argmax` is `None` only for an empty family,
/// in which case `value` is zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupResult {
    pub value: f64,
    pub argmax: Option<usize>,
}

impl SupResult {
    fn over(values: impl IntoIterator<Item = f64>) -> Self {
        let mut best = SupResult {
            value: 0.0,
            argmax: None,
        };
        for (i, x) in values.into_iter().enumerate() {
            if best.argmax.is_none() || x > best.value {
                best = SupResult {
                    value: x,
                    argmax: Some(i),
                };
            }
        }
        best
    }
}

/// Finiteness report for the moment conditions on `U`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    /// `sup (∫|z| dv + |p| + tr(QQᵀ))`
    pub property_bound: f64,
    /// `sup_v ∫_{0<|z|<1} |z|^q dv`
    pub small_jump_moment: f64,
    /// `sup_v ∫_{|z|≥1} |z|^p dv`
    pub large_jump_moment: f64,
    pub q: f64,
    pub p: f64,
    pub property_bound_finite: bool,
    pub small_jump_finite: bool,
    pub large_jump_finite: bool,
    /// Indices attaining the three suprema.
    pub argmax: [usize; 3],
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.property_bound_finite && self.small_jump_finite && self.large_jump_finite
    }
}

/// Checks the uniform moment bounds on `U` for moment exponents
/// `q ∈ (0, 1)` (small jumps) and `p > 1` (large jumps).
///
/// Infinite suprema are reported through the flags, not as errors.
pub fn validate(u: &UncertaintySet, q: f64, p: f64) -> Result<ValidationReport> {
    u.ensure_nonempty()?;
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::invalid(format!("small-jump exponent {q} must lie in (0, 1)")));
    }
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::invalid(format!("large-jump exponent {p} must exceed 1")));
    }
    let bound = SupResult::over(u.triples().iter().map(LevyTriple::property_bound));
    let small = SupResult::over(u.triples().iter().map(|t| {
        t.measure
            .atoms()
            .iter()
            .map(|a| (norm(&a.z), a.w))
            .filter(|&(r, _)| r < 1.0)
            .map(|(r, w)| r.powf(q) * w)
            .sum::<f64>()
    }));
    let large = SupResult::over(u.triples().iter().map(|t| {
        t.measure
            .atoms()
            .iter()
            .map(|a| (norm(&a.z), a.w))
            .filter(|&(r, _)| r >= 1.0)
            .map(|(r, w)| r.powf(p) * w)
            .sum::<f64>()
    }));
    Ok(ValidationReport {
        property_bound: bound.value,
        small_jump_moment: small.value,
        large_jump_moment: large.value,
        q,
        p,
        property_bound_finite: bound.value.is_finite(),
        small_jump_finite: small.value.is_finite(),
        large_jump_finite: large.value.is_finite(),
        argmax: [
            bound.argmax.unwrap_or(0),
            small.argmax.unwrap_or(0),
            large.argmax.unwrap_or(0),
        ],
    })
}

/// `c^V(A) = sup_v v(A)`. An empty family gives 0.
pub fn v_capacity(measures: &[DiscreteLevyMeasure], region: &Region) -> SupResult {
    SupResult::over(measures.iter().map(|v| v.mass(region)))
}

/// `sup_v ∫_A φ dv`.
pub fn sup_integral(
    measures: &[DiscreteLevyMeasure],
    phi: impl Fn(&[f64]) -> f64,
    region: &Region,
) -> Result<SupResult> {
    let values = measures
        .iter()
        .map(|v| v.integrate(&phi, region))
        .collect::<Result<Vec<_>>>()?;
    Ok(SupResult::over(values))
}
