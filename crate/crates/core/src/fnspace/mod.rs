//! Diagnostics for the capacity-weighted function spaces `𝕃^p_b(A, V)`:
//! the seminorm `‖f‖_{p,A,V} = (sup_v ∫_A |f|^p dv)^{1/p}`, tightness and
//! uniform-integrability profiles, a membership verdict, and the
//! quasi-continuity criterion `c^V(closure of D) = 0` for a declared
//! discontinuity set `D`.
//!
//! Every quantity is an exact finite sum over the atoms of the enumerated
//! measures.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::payoff::Payoff;
use crate::region::Region;
use crate::uncertainty::{v_capacity, DiscreteLevyMeasure};

type Rule = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// A function on `ℝ^d_0` with caller-declared discontinuity set and
/// support.
#[derive(Clone)]
pub struct TestFunction {
    name: String,
    rule: Rule,
    discontinuities: Option<Region>,
    support: Option<Region>,
}

impl fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TestFunction")
            .field("name", &self.name)
            .field("discontinuities", &self.discontinuities)
            .field("support", &self.support)
            .finish()
    }
}

/// Serializable evaluation rules.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionRule {
    /// `z ↦ z₁`
    Identity,
    /// `z ↦ |z|`
    Norm,
    /// `z ↦ |z|^exponent`
    Power { exponent: f64 },
    Constant { value: f64 },
    /// `1_R(z)`
    Indicator { region: Region },
    /// A scalar payoff applied to `z₁`.
    Payoff { payoff: Payoff },
}

impl FunctionRule {
    fn compile(&self) -> Result<Rule> {
        Ok(match self.clone() {
            FunctionRule::Identity => Arc::new(|z: &[f64]| z[0]),
            FunctionRule::Norm => Arc::new(|z: &[f64]| linalg::norm(z)),
            FunctionRule::Power { exponent } => {
                if !exponent.is_finite() {
                    return Err(Error::invalid("power exponent must be finite"));
                }
                Arc::new(move |z: &[f64]| linalg::norm(z).powf(exponent))
            }
            FunctionRule::Constant { value } => Arc::new(move |_: &[f64]| value),
            FunctionRule::Indicator { region } => {
                Arc::new(move |z: &[f64]| f64::from(u8::from(region.contains(z))))
            }
            FunctionRule::Payoff { payoff } => {
                payoff.validate()?;
                Arc::new(move |z: &[f64]| payoff.eval(z[0]))
            }
        })
    }
}

impl TestFunction {
    pub fn new(name: impl Into<String>, rule: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            name: name.into(),
            rule: Arc::new(rule),
            discontinuities: None,
            support: None,
        }
    }

    pub fn from_rule(rule: &FunctionRule) -> Result<Self> {
        Ok(Self {
            name: format!("{rule:?}"),
            rule: rule.compile()?,
            discontinuities: None,
            support: None,
        })
    }

    /// Declares the discontinuity set; `Region::Empty` declares `f`
    /// continuous.
    pub fn with_discontinuities(mut self, d: Region) -> Self {
        self.discontinuities = Some(d);
        self
    }

    pub fn with_support(mut self, s: Region) -> Self {
        self.support = Some(s);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn discontinuities(&self) -> Option<&Region> {
        self.discontinuities.as_ref()
    }

    pub fn support(&self) -> Option<&Region> {
        self.support.as_ref()
    }

    /// `f(z)`, zero outside a declared support.
    pub fn eval(&self, z: &[f64]) -> Result<f64> {
        if self.support.as_ref().is_some_and(|s| !s.contains(z)) {
            return Ok(0.0);
        }
        let y = (self.rule)(z);
        if y.is_finite() {
            Ok(y)
        } else {
            Err(Error::Evaluation(format!("{} is {y} at {z:?}", self.name)))
        }
    }
}

/// `(|z|, |f(z)|^p, w)` per atom and per measure.
fn weighted_atoms(f: &TestFunction, measures: &[DiscreteLevyMeasure], p: f64) -> Result<Vec<Vec<(f64, f64, f64)>>> {
    measures
        .iter()
        .map(|v| {
            v.atoms()
                .iter()
                .map(|a| Ok((linalg::norm(&a.z), f.eval(&a.z)?.abs().powf(p), a.w)))
                .collect()
        })
        .collect()
}

fn check_p(p: f64) -> Result<()> {
    if p >= 1.0 && p.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("exponent p = {p} must be finite and at least 1")))
    }
}

/// `‖f‖_{p,A,V}`; zero for an empty family.
pub fn v_norm(f: &TestFunction, region: &Region, measures: &[DiscreteLevyMeasure], p: f64) -> Result<f64> {
    check_p(p)?;
    let restricted: Vec<DiscreteLevyMeasure> = measures.iter().map(|v| v.restrict(region)).collect();
    let sup = weighted_atoms(f, &restricted, p)?
        .iter()
        .map(|atoms| atoms.iter().map(|&(_, fp, w)| fp * w).sum::<f64>())
        .fold(0.0, f64::max);
    Ok(sup.powf(1.0 / p))
}

/// A compact set certifying tightness at one level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Compact {
    /// The empty set already leaves less than `ε` outside.
    Empty,
    Annulus { inner: f64, outer: f64 },
    /// No annulus within the allowed radii works.
    NotFound,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TightnessEntry {
    pub eps: f64,
    pub compact: Compact,
    /// `sup_v ∫_{compactᶜ} |f|^p dv` for the reported compact.
    pub outside: f64,
}

fn outside_mass(atoms: &[Vec<(f64, f64, f64)>], keep: Option<(f64, f64)>) -> f64 {
    atoms
        .iter()
        .map(|v| {
            v.iter()
                .filter(|&&(r, _, _)| keep.is_none_or(|(lo, hi)| r < lo || r > hi))
                .map(|&(_, fp, w)| fp * w)
                .sum::<f64>()
        })
        .fold(0.0, f64::max)
}

/// For each `ε`, a closed annulus `[r, R]` with radii from the atoms where
/// `f ≠ 0` and `sup_v ∫_{[r,R]ᶜ} |f|^p dv < ε`. Annuli are nested: the
/// smallest `ε` gets the narrowest admissible annulus, and each larger `ε`
/// the narrowest one inside that.
pub fn tightness_profile(
    f: &TestFunction,
    measures: &[DiscreteLevyMeasure],
    p: f64,
    eps: &[f64],
) -> Result<Vec<TightnessEntry>> {
    tightness_profile_within(f, measures, p, eps, (0.0, f64::INFINITY))
}

/// [`tightness_profile`] with annulus radii restricted to `radii`.
pub fn tightness_profile_within(
    f: &TestFunction,
    measures: &[DiscreteLevyMeasure],
    p: f64,
    eps: &[f64],
    radii: (f64, f64),
) -> Result<Vec<TightnessEntry>> {
    check_p(p)?;
    if let Some(e) = eps.iter().find(|e| !(**e > 0.0)) {
        return Err(Error::invalid(format!("tightness level {e} must be positive")));
    }
    let atoms = weighted_atoms(f, measures, p)?;
    let mut rs: Vec<f64> = atoms
        .iter()
        .flatten()
        .filter(|&&(r, fp, _)| fp > 0.0 && r >= radii.0 && r <= radii.1)
        .map(|&(r, _, _)| r)
        .collect();
    rs.sort_by(f64::total_cmp);
    rs.dedup();

    let mut order: Vec<usize> = (0..eps.len()).collect();
    order.sort_by(|&a, &b| eps[a].total_cmp(&eps[b]));
    let mut out = vec![None; eps.len()];
    let mut bound: Option<(usize, usize)> = None;
    let mut failed = false;
    for i in order {
        let e = eps[i];
        let empty = outside_mass(&atoms, None);
        let entry = if empty < e {
            TightnessEntry {
                eps: e,
                compact: Compact::Empty,
                outside: empty,
            }
        } else if failed {
            TightnessEntry {
                eps: e,
                compact: Compact::NotFound,
                outside: f64::NAN,
            }
        } else {
            let mut best: Option<(usize, usize, f64)> = None;
            for a in 0..rs.len() {
                for b in a..rs.len() {
                    if bound.is_some_and(|(pa, pb)| a < pa || b > pb) {
                        continue;
                    }
                    let m = outside_mass(&atoms, Some((rs[a], rs[b])));
                    let width = rs[b] - rs[a];
                    if m < e && best.is_none_or(|(ba, bb, _)| width < rs[bb] - rs[ba]) {
                        best = Some((a, b, m));
                    }
                }
            }
            match best {
                Some((a, b, m)) => {
                    bound = Some((a, b));
                    TightnessEntry {
                        eps: e,
                        compact: Compact::Annulus {
                            inner: rs[a],
                            outer: rs[b],
                        },
                        outside: m,
                    }
                }
                None => {
                    failed = true;
                    TightnessEntry {
                        eps: e,
                        compact: Compact::NotFound,
                        outside: f64::NAN,
                    }
                }
            }
        };
        out[i] = Some(entry);
    }
    Ok(out.into_iter().map(|e| e.expect("every level visited")).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UiEntry {
    pub level: f64,
    /// `sup_v ∫ |f|^p 1{|f|^p ≥ level} dv`
    pub tail: f64,
}

pub fn uniform_integrability_profile(
    f: &TestFunction,
    measures: &[DiscreteLevyMeasure],
    p: f64,
    levels: &[f64],
) -> Result<Vec<UiEntry>> {
    check_p(p)?;
    let atoms = weighted_atoms(f, measures, p)?;
    Ok(levels
        .iter()
        .map(|&level| UiEntry {
            level,
            tail: atoms
                .iter()
                .map(|v| v.iter().filter(|a| a.1 >= level).map(|&(_, fp, w)| fp * w).sum::<f64>())
                .fold(0.0, f64::max),
        })
        .collect())
}

/// Resolution at which membership is judged. A finite atom family always
/// integrates every finite function, so the verdict asks whether tightness
/// is achieved within `radii` and whether the tail at the top
/// uniform-integrability level is below `ui_threshold`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MembershipConfig {
    pub eps: Vec<f64>,
    pub levels: Vec<f64>,
    pub ui_threshold: f64,
    pub radii: (f64, f64),
}

impl Default for MembershipConfig {
    fn default() -> Self {
        Self {
            eps: vec![1e-1, 1e-2, 1e-3],
            levels: vec![1.0, 1e1, 1e2, 1e3, 1e4],
            ui_threshold: 1e-3,
            radii: (1e-6, 1e4),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Membership {
    pub member: bool,
    pub norm: f64,
    pub tight: bool,
    pub uniformly_integrable: bool,
    pub tightness: Vec<TightnessEntry>,
    pub ui: Vec<UiEntry>,
}

/// Membership of `f` in `𝕃^p_b(A, V)` at the resolution of `cfg`.
pub fn membership_lpb(
    f: &TestFunction,
    region: &Region,
    measures: &[DiscreteLevyMeasure],
    p: f64,
    cfg: &MembershipConfig,
) -> Result<Membership> {
    let restricted: Vec<DiscreteLevyMeasure> = measures.iter().map(|v| v.restrict(region)).collect();
    let norm = v_norm(f, &Region::Whole, &restricted, p)?;
    let tightness = tightness_profile_within(f, &restricted, p, &cfg.eps, cfg.radii)?;
    let ui = uniform_integrability_profile(f, &restricted, p, &cfg.levels)?;
    let tight = tightness.iter().all(|t| t.compact != Compact::NotFound);
    let uniformly_integrable = ui.last().is_none_or(|u| u.tail <= cfg.ui_threshold);
    Ok(Membership {
        member: norm.is_finite() && tight && uniformly_integrable,
        norm,
        tight,
        uniformly_integrable,
        tightness,
        ui,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum QcVerdict {
    QuasiContinuous,
    /// Some measure charges the closure of the discontinuity set.
    NotQuasiContinuous { measure: usize, witness: Vec<f64>, capacity: f64 },
    /// No discontinuity set was declared.
    Inconclusive,
}

/// `f` is V-quasi-continuous when the closure of its declared
/// discontinuity set has zero V-capacity.
pub fn qc_criterion(f: &TestFunction, measures: &[DiscreteLevyMeasure]) -> QcVerdict {
    let Some(d) = f.discontinuities() else {
        return QcVerdict::Inconclusive;
    };
    let closure = d.closure();
    let cap = v_capacity(measures, &closure);
    match cap.argmax {
        Some(k) if cap.value > 0.0 => {
            let witness = measures[k]
                .atoms()
                .iter()
                .find(|a| closure.contains(&a.z))
                .map(|a| a.z.clone())
                .expect("a charged set contains an atom");
            QcVerdict::NotQuasiContinuous {
                measure: k,
                witness,
                capacity: cap.value,
            }
        }
        _ => QcVerdict::QuasiContinuous,
    }
}

#[cfg(test)]
mod tests;
