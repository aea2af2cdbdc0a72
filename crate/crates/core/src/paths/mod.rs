//! Càdlàg paths with an explicit jump list, and the jump functionals read off
//! them: Poisson random measure counts, Poisson integrals and jump times.
//!
//! A path on `[0, T]` is a continuous part (linear interpolation between
//! samples, or identically zero) plus finitely many jumps at times in
//! `(0, T]`. Jumps are stored exactly, never inferred from samples.

pub mod io;
mod modulus;
mod skorohod;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::region::Region;

pub use modulus::{cadlag_modulus, Modulus};
pub use skorohod::{counterexample_family, discretize_tn, skorohod_distance_upper};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub time: f64,
    pub value: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Jump {
    pub time: f64,
    pub size: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CadlagPath {
    horizon: f64,
    dim: usize,
    samples: Vec<Sample>,
    jumps: Vec<Jump>,
}

/// A stopping time that may be infinite (`inf ∅ = +∞`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JumpTime {
    At(f64),
    Never,
}

impl JumpTime {
    pub fn as_f64(self) -> f64 {
        match self {
            JumpTime::At(t) => t,
            JumpTime::Never => f64::INFINITY,
        }
    }
}

impl CadlagPath {
    /// Builds a path, checking that samples run from `(0, 0)` to `T` with
    /// strictly increasing times and that jumps are nonzero with strictly
    /// increasing times in `(0, T]`.
    pub fn new(horizon: f64, dim: usize, samples: Vec<Sample>, jumps: Vec<Jump>) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::invalid(format!("horizon {horizon} must be positive")));
        }
        if dim == 0 {
            return Err(Error::invalid("dimension must be at least 1"));
        }
        if let Some(first) = samples.first() {
            if first.time != 0.0 || !linalg::is_zero(&first.value) {
                return Err(Error::invalid("continuous part must start at (0, 0)"));
            }
            if samples.last().map(|s| s.time) != Some(horizon) {
                return Err(Error::invalid("continuous part must be sampled up to the horizon"));
            }
        }
        for (i, s) in samples.iter().enumerate() {
            if s.value.len() != dim || s.value.iter().any(|x| !x.is_finite()) {
                return Err(Error::invalid(format!("sample {i} has a bad value")));
            }
            if i > 0 && !(s.time > samples[i - 1].time) {
                return Err(Error::invalid(format!("sample times not increasing at {i}")));
            }
        }
        for (i, j) in jumps.iter().enumerate() {
            if !(j.time > 0.0 && j.time <= horizon) {
                return Err(Error::invalid(format!(
                    "jump time {} outside (0, {horizon}]",
                    j.time
                )));
            }
            if j.size.len() != dim || j.size.iter().any(|x| !x.is_finite()) {
                return Err(Error::invalid(format!("jump {i} has a bad size")));
            }
            if linalg::is_zero(&j.size) {
                return Err(Error::invalid(format!("jump {i} has zero size")));
            }
            if i > 0 && !(j.time > jumps[i - 1].time) {
                return Err(Error::invalid(format!("jump times not increasing at {i}")));
            }
        }
        Ok(Self {
            horizon,
            dim,
            samples,
            jumps,
        })
    }

    pub fn zero(horizon: f64, dim: usize) -> Result<Self> {
        Self::new(horizon, dim, Vec::new(), Vec::new())
    }

    pub fn pure_jump(horizon: f64, dim: usize, jumps: Vec<Jump>) -> Result<Self> {
        Self::new(horizon, dim, Vec::new(), jumps)
    }

    /// One-dimensional pure-jump path from `(time, size)` pairs.
    pub fn from_jumps_1d(horizon: f64, jumps: &[(f64, f64)]) -> Result<Self> {
        Self::pure_jump(
            horizon,
            1,
            jumps
                .iter()
                .map(|&(time, s)| Jump {
                    time,
                    size: vec![s],
                })
                .collect(),
        )
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn jumps(&self) -> &[Jump] {
        &self.jumps
    }

    pub fn has_continuous_part(&self) -> bool {
        self.samples.iter().any(|s| !linalg::is_zero(&s.value))
    }

    /// Continuous part at `t`, linearly interpolated and held constant
    /// outside `[0, T]`.
    pub fn continuous_at(&self, t: f64) -> Vec<f64> {
        let s = &self.samples;
        if s.is_empty() {
            return vec![0.0; self.dim];
        }
        let k = s.partition_point(|p| p.time <= t);
        if k == 0 {
            return s[0].value.clone();
        }
        if k == s.len() {
            return s[k - 1].value.clone();
        }
        let (a, b) = (&s[k - 1], &s[k]);
        let w = (t - a.time) / (b.time - a.time);
        a.value
            .iter()
            .zip(&b.value)
            .map(|(x, y)| x + w * (y - x))
            .collect()
    }

    /// `Σ_{t_j ≤ t} Δ_j`
    pub fn jump_part_at(&self, t: f64) -> Vec<f64> {
        let mut acc = vec![0.0; self.dim];
        for j in self.jumps.iter().take_while(|j| j.time <= t) {
            linalg::add_assign(&mut acc, &j.size);
        }
        acc
    }

    /// `x(t)`
    pub fn value(&self, t: f64) -> Vec<f64> {
        let mut v = self.continuous_at(t);
        linalg::add_assign(&mut v, &self.jump_part_at(t));
        v
    }

    /// `x(t−)`
    pub fn left_limit(&self, t: f64) -> Vec<f64> {
        let mut v = self.continuous_at(t);
        for j in self.jumps.iter().take_while(|j| j.time < t) {
            linalg::add_assign(&mut v, &j.size);
        }
        v
    }

    /// Sorted distinct times at which the path or its slope may change,
    /// including `0` and `T`.
    pub fn event_times(&self) -> Vec<f64> {
        let mut ts: Vec<f64> = std::iter::once(0.0)
            .chain(self.samples.iter().map(|s| s.time))
            .chain(self.jumps.iter().map(|j| j.time))
            .chain(std::iter::once(self.horizon))
            .collect();
        ts.sort_by(f64::total_cmp);
        ts.dedup();
        ts
    }

    /// `L(]s, t], A)`: the number of jumps in `(s, t]` with size in `A`.
    pub fn prm_count(&self, s: f64, t: f64, region: &Region) -> Result<usize> {
        if !(0.0 <= s && s < t && t <= self.horizon) {
            return Err(Error::InvalidInterval(format!(
                "need 0 <= s < t <= {}, got s = {s}, t = {t}",
                self.horizon
            )));
        }
        Ok(self
            .jumps
            .iter()
            .filter(|j| s < j.time && j.time <= t && region.contains(&j.size))
            .count())
    }

    /// `Σ_{0<u≤t} φ(ΔX_u) 1_A(ΔX_u)` for vector-valued `φ`.
    pub fn poisson_integral_vec(
        &self,
        phi: impl Fn(&[f64]) -> Vec<f64>,
        region: &Region,
        t: f64,
    ) -> Result<Vec<f64>> {
        self.check_time(t)?;
        let mut acc: Option<Vec<f64>> = None;
        for j in self
            .jumps
            .iter()
            .take_while(|j| j.time <= t)
            .filter(|j| region.contains(&j.size))
        {
            let y = phi(&j.size);
            if y.iter().any(|x| !x.is_finite()) {
                return Err(Error::Evaluation(format!(
                    "integrand is not finite at jump {:?}",
                    j.size
                )));
            }
            match acc.as_mut() {
                Some(a) if a.len() == y.len() => linalg::add_assign(a, &y),
                Some(_) => return Err(Error::Evaluation("integrand changes output length".into())),
                None => acc = Some(y),
            }
        }
        Ok(acc.unwrap_or_else(|| vec![0.0; self.dim]))
    }

    /// Scalar Poisson integral.
    pub fn poisson_integral(
        &self,
        phi: impl Fn(&[f64]) -> f64,
        region: &Region,
        t: f64,
    ) -> Result<f64> {
        Ok(self.poisson_integral_vec(|z| vec![phi(z)], region, t)?[0])
    }

    /// The `k`-th jump time with size in `A` and the `k`-th with size in the
    /// closure of `A`. Membership in `A` follows the region's own open/closed
    /// declaration.
    pub fn jump_times(&self, region: &Region, k: usize) -> Result<(JumpTime, JumpTime)> {
        if k == 0 {
            return Err(Error::invalid("jump index k starts at 1"));
        }
        if region.closure_contains_origin() {
            return Err(Error::Precondition(
                "jump times need a region bounded away from the origin".into(),
            ));
        }
        let closure = region.closure();
        let kth = |r: &Region| {
            self.jumps
                .iter()
                .filter(|j| r.contains(&j.size))
                .nth(k - 1)
                .map_or(JumpTime::Never, |j| JumpTime::At(j.time))
        };
        Ok((kth(region), kth(&closure)))
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if !(0.0..=self.horizon).contains(&t) {
            return Err(Error::InvalidInterval(format!(
                "time {t} outside [0, {}]",
                self.horizon
            )));
        }
        Ok(())
    }
}
