//! Shell-by-shell transport of a reference Lévy measure onto discrete targets.
//!
//! The reference measure `μ` lives on `(0, ∞)` and is described by its tail
//! function `η ↦ μ(η, ∞)`. Target atoms are grouped into shells of equal
//! radius, processed from the largest radius inward, and each shell receives
//! a band `(η_n, η_{n-1}]` of `μ` with matching mass. Building maps for a
//! whole family at once uses common bands sized by the family-wide maximum
//! shell mass, so jumps of size at least `ε` always come from base marks
//! above one `η > 0` regardless of the chosen measure.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::DiscreteLevyMeasure;

/// A reference measure on `(0, ∞)` with an invertible tail function.
pub trait TailMeasure {
    /// `μ(η, ∞)` for `η > 0`.
    fn tail(&self, eta: f64) -> f64;
    /// The `η` with `μ(η, ∞) = mass`, if one exists.
    fn inverse_tail(&self, mass: f64) -> Option<f64>;
}

/// Density `scale·α·z^{-1-α}` on `(0, ∞)`, tail `scale·η^{-α}`.
///
/// The default `(1, 1)` is the density `z⁻²` with tail `1/η`. Any
/// `α ∈ (0, 2)` gives a Lévy measure of infinite total mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawTail {
    pub scale: f64,
    pub alpha: f64,
}

impl Default for PowerLawTail {
    fn default() -> Self {
        Self {
            scale: 1.0,
            alpha: 1.0,
        }
    }
}

impl PowerLawTail {
    pub fn new(scale: f64, alpha: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::invalid(format!("tail scale {scale} must be positive")));
        }
        if !(alpha > 0.0 && alpha < 2.0) {
            return Err(Error::invalid(format!(
                "tail exponent {alpha} must lie in (0, 2) for a Lévy measure of infinite mass"
            )));
        }
        Ok(Self { scale, alpha })
    }
}

impl TailMeasure for PowerLawTail {
    fn tail(&self, eta: f64) -> f64 {
        if eta == f64::INFINITY {
            0.0
        } else if self.alpha == 1.0 {
            self.scale / eta
        } else {
            self.scale * eta.powf(-self.alpha)
        }
    }

    fn inverse_tail(&self, mass: f64) -> Option<f64> {
        if !(mass >= 0.0 && mass.is_finite()) {
            return None;
        }
        if mass == 0.0 {
            return Some(f64::INFINITY);
        }
        let eta = if self.alpha == 1.0 {
            self.scale / mass
        } else {
            (self.scale / mass).powf(1.0 / self.alpha)
        };
        (eta > 0.0 && eta.is_finite()).then_some(eta)
    }
}

/// Base marks in `(lo, hi]` are sent to `target`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransportPiece {
    pub lo: f64,
    pub hi: f64,
    pub target: f64,
}

/// A piecewise-constant map `g` with `μ ∘ g⁻¹ = v` on `ℝ_0`; zero off the
/// pieces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransportMap<M = PowerLawTail> {
    pub base: M,
    pub pieces: Vec<TransportPiece>,
}

impl<M: TailMeasure + Clone> TransportMap<M> {
    /// Map for a single target measure.
    pub fn build(base: M, v: &DiscreteLevyMeasure) -> Result<Self> {
        let mut maps = Self::family(base, std::slice::from_ref(v))?;
        Ok(maps.remove(0))
    }

    /// Maps for every measure of a family, built on common bands.
    pub fn family(base: M, measures: &[DiscreteLevyMeasure]) -> Result<Vec<Self>> {
        if let Some(v) = measures.iter().find(|v| v.dim() != 1) {
            return Err(Error::Unsupported(format!(
                "transport maps are implemented for d = 1 only (got d = {})",
                v.dim()
            )));
        }
        let mut radii: Vec<f64> = measures.iter().flat_map(|v| v.radii()).collect();
        radii.sort_by(|a, b| b.total_cmp(a));
        radii.dedup();

        let invert = |mass: f64| {
            base.inverse_tail(mass).ok_or_else(|| {
                Error::invalid(format!("reference tail cannot be inverted at mass {mass}"))
            })
        };

        let mut pieces: Vec<Vec<TransportPiece>> = vec![Vec::new(); measures.len()];
        let mut outer_mass = 0.0;
        for &r in &radii {
            let shell_mass = |v: &DiscreteLevyMeasure| -> f64 {
                v.atoms()
                    .iter()
                    .filter(|a| a.z[0].abs() == r)
                    .map(|a| a.w)
                    .sum()
            };
            let band = measures.iter().map(shell_mass).fold(0.0, f64::max);
            for (v, out) in measures.iter().zip(pieces.iter_mut()) {
                // Inside a shell, larger targets take the outer part of the band.
                let mut targets: Vec<(f64, f64)> = v
                    .atoms()
                    .iter()
                    .filter(|a| a.z[0].abs() == r)
                    .map(|a| (a.z[0], a.w))
                    .collect();
                targets.sort_by(|a, b| b.0.total_cmp(&a.0));
                let mut cum = outer_mass;
                let mut hi = invert(cum)?;
                for (z, w) in targets {
                    cum += w;
                    let lo = invert(cum)?;
                    out.push(TransportPiece { lo, hi, target: z });
                    hi = lo;
                }
            }
            outer_mass += band;
        }
        Ok(pieces
            .into_iter()
            .map(|pieces| TransportMap {
                base: base.clone(),
                pieces,
            })
            .collect())
    }

    /// `g(x)`; zero for `x ≤ 0` and outside every piece.
    pub fn apply(&self, x: f64) -> f64 {
        self.pieces
            .iter()
            .find(|p| p.lo < x && x <= p.hi)
            .map_or(0.0, |p| p.target)
    }

    /// `μ(g⁻¹({z}))` from the tail function.
    pub fn preimage_mass(&self, z: f64) -> f64 {
        self.pieces
            .iter()
            .filter(|p| p.target == z)
            .map(|p| self.base.tail(p.lo) - self.base.tail(p.hi))
            .sum()
    }

    /// The pushforward `μ ∘ g⁻¹` restricted to `ℝ_0`.
    pub fn pushforward(&self) -> Result<DiscreteLevyMeasure> {
        DiscreteLevyMeasure::merged(
            1,
            self.pieces.iter().map(|p| super::Atom {
                z: vec![p.target],
                w: self.base.tail(p.lo) - self.base.tail(p.hi),
            }),
            0.0,
        )
    }

    /// An `η` such that `|g(x)| ≥ ε` forces `x > η`. Infinite when no target
    /// reaches `ε`.
    pub fn separation_radius(&self, eps: f64) -> f64 {
        self.pieces
            .iter()
            .filter(|p| p.target.abs() >= eps)
            .map(|p| p.lo)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Separation radius shared by a family of maps.
pub fn family_separation_radius<M: TailMeasure + Clone>(maps: &[TransportMap<M>], eps: f64) -> f64 {
    maps.iter()
        .map(|m| m.separation_radius(eps))
        .fold(f64::INFINITY, f64::min)
}
