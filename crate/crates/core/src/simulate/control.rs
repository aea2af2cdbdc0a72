use serde::Serialize;

use super::Simulator;
use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// The control value on one interval: a relabelling of base marks together
/// with drift and diffusion root.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ControlValue {
    /// Index of the triple of the set this value realises.
    pub triple: usize,
    /// Image of each base mark cell; `None` means no jump.
    pub jump_map: Vec<Option<Vec<f64>>>,
    pub drift: Vec<f64>,
    pub cov_root: Matrix,
}

impl ControlValue {
    /// The canonical relabelling for triple `k`. Panics if `k` is out of range.
    pub fn from_triple(sim: &Simulator, k: usize) -> Self {
        let t = &sim.set().triples()[k];
        let atoms = t.measure.atoms();
        Self {
            triple: k,
            jump_map: sim.base().images[k]
                .iter()
                .map(|img| img.map(|j| atoms[j].z.clone()))
                .collect(),
            drift: t.drift.clone(),
            cov_root: t.cov_root.clone(),
        }
    }

    /// A user-supplied relabelling. Accepted only if `(μ∘g⁻¹, p, Q)` is a
    /// triple of the set (jump measure within `1e-12`, drift and root exact).
    pub fn custom(
        sim: &Simulator,
        jump_map: Vec<Option<Vec<f64>>>,
        drift: Vec<f64>,
        cov_root: Matrix,
    ) -> Result<Self> {
        let d = sim.set().dim();
        if jump_map.len() != sim.base().cells.len() {
            return Err(Error::InvalidPolicy(format!(
                "jump map has {} entries, base measure has {} cells",
                jump_map.len(),
                sim.base().cells.len()
            )));
        }
        if jump_map.iter().flatten().any(|z| z.len() != d) || drift.len() != d {
            return Err(Error::InvalidPolicy(format!("control values must have dimension {d}")));
        }
        let push = sim
            .base()
            .pushforward(d, &jump_map)
            .map_err(|e| Error::InvalidPolicy(e.to_string()))?;
        let triple = sim
            .set()
            .triples()
            .iter()
            .position(|t| t.drift == drift && t.cov_root == cov_root && t.measure.approx_eq(&push, 1e-12))
            .ok_or_else(|| {
                Error::InvalidPolicy("control value does not realise a triple of the set".into())
            })?;
        Ok(Self {
            triple,
            jump_map,
            drift,
            cov_root,
        })
    }
}

/// A piecewise-constant control: `values[k]` acts on
/// `(breakpoints[k], breakpoints[k+1]]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ControlPolicy {
    breakpoints: Vec<f64>,
    values: Vec<ControlValue>,
}

impl ControlPolicy {
    pub fn new(breakpoints: Vec<f64>, values: Vec<ControlValue>) -> Result<Self> {
        if values.is_empty() || breakpoints.len() != values.len() + 1 {
            return Err(Error::InvalidPolicy(format!(
                "{} breakpoints for {} values",
                breakpoints.len(),
                values.len()
            )));
        }
        if breakpoints.windows(2).any(|w| !(w[0] < w[1])) || breakpoints.iter().any(|b| !b.is_finite()) {
            return Err(Error::InvalidPolicy("breakpoints must be finite and strictly increasing".into()));
        }
        Ok(Self { breakpoints, values })
    }

    /// Triple `k` on all of `(0, T]`.
    pub fn constant(sim: &Simulator, k: usize) -> Result<Self> {
        Self::switching(sim, &[0.0, sim.horizon()], &[k])
    }

    /// Triple `triples[i]` on `(breakpoints[i], breakpoints[i+1]]`.
    pub fn switching(sim: &Simulator, breakpoints: &[f64], triples: &[usize]) -> Result<Self> {
        if let Some(&k) = triples.iter().find(|&&k| k >= sim.set().len()) {
            return Err(Error::InvalidPolicy(format!(
                "triple index {k} out of range for a set of {}",
                sim.set().len()
            )));
        }
        Self::new(
            breakpoints.to_vec(),
            triples.iter().map(|&k| ControlValue::from_triple(sim, k)).collect(),
        )
    }

    /// One constant control per triple.
    pub fn all_constant(sim: &Simulator) -> Vec<Self> {
        (0..sim.set().len())
            .map(|k| Self::constant(sim, k).expect("valid triple index"))
            .collect()
    }

    /// Every assignment of triples to `segments` equal subintervals of
    /// `(0, T]`, at most 4096 policies.
    pub fn all_piecewise(sim: &Simulator, segments: usize) -> Result<Vec<Self>> {
        let k = sim.set().len();
        let count = (k as f64).powi(segments as i32);
        if segments == 0 || count > 4096.0 {
            return Err(Error::invalid(format!(
                "{k}^{segments} piecewise policies exceeds the limit of 4096"
            )));
        }
        let t = sim.horizon();
        let bps: Vec<f64> = (0..=segments).map(|i| t * i as f64 / segments as f64).collect();
        let mut out = Vec::with_capacity(count as usize);
        let mut digits = vec![0usize; segments];
        loop {
            out.push(Self::switching(sim, &bps, &digits)?);
            let mut i = 0;
            loop {
                if i == segments {
                    return Ok(out);
                }
                digits[i] += 1;
                if digits[i] < k {
                    break;
                }
                digits[i] = 0;
                i += 1;
            }
        }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[ControlValue] {
        &self.values
    }

    /// Triple indices per interval.
    pub fn triples(&self) -> Vec<usize> {
        self.values.iter().map(|v| v.triple).collect()
    }

    pub fn has_continuous_part(&self) -> bool {
        self.values
            .iter()
            .any(|v| v.drift.iter().any(|&p| p != 0.0) || !v.cov_root.is_zero())
    }

    pub fn check_covers(&self, t0: f64, t_end: f64) -> Result<()> {
        if self.breakpoints[0] <= t0 && t_end <= *self.breakpoints.last().expect("nonempty") {
            Ok(())
        } else {
            Err(Error::InvalidPolicy(format!(
                "policy covers ({}, {}], not ({t0}, {t_end}]",
                self.breakpoints[0],
                self.breakpoints.last().expect("nonempty")
            )))
        }
    }

    pub fn value_at(&self, s: f64) -> Result<&ControlValue> {
        // partition_point gives the first breakpoint >= s; s lies in the
        // interval ending there.
        let i = self.breakpoints.partition_point(|&b| b < s);
        if i == 0 || i == self.breakpoints.len() {
            return Err(Error::InvalidPolicy(format!("no control value at time {s}")));
        }
        Ok(&self.values[i - 1])
    }
}
