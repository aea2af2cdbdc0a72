//! Monte Carlo lower bounds for `Ê[ξ] = sup_θ E[ξ(B^θ)]`.
//!
//! All candidate controls are driven by one base probability space: a
//! Brownian motion on a uniform grid and a Poisson random measure whose
//! finite discrete mark measure `μ` dominates every jump measure of the set.
//! A control picks, on each time interval, a triple `(v, p, Q)` and realises
//! `v` by relabelling base marks, so each candidate sees the same scenarios
//! (common random numbers).

mod control;
mod erlang;
mod estimate;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;
use crate::paths::{CadlagPath, Jump, Sample};
use crate::uncertainty::{Atom, DiscreteLevyMeasure, UncertaintySet};

pub use control::{ControlPolicy, ControlValue};
pub use erlang::{erlang_bound_check, erlang_cdf, ErlangCheck, TimeWindow};
pub use estimate::{CandidateStat, Estimate};

/// A discrete mark measure on cells `0..K` with relabelling rules onto each
/// triple's jump measure.
///
/// Each triple's atoms, largest first, occupy consecutive stretches of
/// `[0, sup_v v(ℝ_0)]`; cells are cut at every stretch boundary of every
/// triple, so each cell lies inside one stretch (or beyond a triple's total
/// mass, where it maps to no jump).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BaseMeasure {
    pub cells: Vec<f64>,
    /// `images[k][c]`: atom index of triple `k` receiving cell `c`.
    pub images: Vec<Vec<Option<usize>>>,
}

impl BaseMeasure {
    pub fn for_set(u: &UncertaintySet) -> Self {
        let layouts: Vec<Vec<(f64, usize)>> = u
            .triples()
            .iter()
            .map(|t| {
                let mut order: Vec<usize> = (0..t.measure.atoms().len()).collect();
                let atoms = t.measure.atoms();
                order.sort_by(|&a, &b| {
                    linalg::norm(&atoms[b].z)
                        .total_cmp(&linalg::norm(&atoms[a].z))
                        .then_with(|| {
                            atoms[a]
                                .z
                                .iter()
                                .zip(&atoms[b].z)
                                .map(|(x, y)| x.total_cmp(y))
                                .find(|o| o.is_ne())
                                .unwrap_or(std::cmp::Ordering::Equal)
                        })
                });
                let mut cum = 0.0;
                order
                    .into_iter()
                    .map(|j| {
                        cum += atoms[j].w;
                        (cum, j)
                    })
                    .collect()
            })
            .collect();
        let mut cuts: Vec<f64> = layouts.iter().flatten().map(|&(c, _)| c).collect();
        cuts.push(0.0);
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let cells: Vec<f64> = cuts.windows(2).map(|w| w[1] - w[0]).collect();
        let images = layouts
            .iter()
            .map(|layout| {
                cuts.windows(2)
                    .map(|w| {
                        let mid = 0.5 * (w[0] + w[1]);
                        layout.iter().find(|&&(c, _)| mid < c).map(|&(_, j)| j)
                    })
                    .collect()
            })
            .collect();
        Self { cells, images }
    }

    pub fn total_mass(&self) -> f64 {
        self.cells.iter().sum()
    }

    /// `μ ∘ g⁻¹` for a relabelling given as one optional image per cell.
    pub fn pushforward(&self, dim: usize, map: &[Option<Vec<f64>>]) -> Result<DiscreteLevyMeasure> {
        DiscreteLevyMeasure::merged(
            dim,
            self.cells.iter().zip(map).filter_map(|(&w, z)| {
                z.as_ref().map(|z| Atom {
                    z: z.clone(),
                    w,
                })
            }),
            0.0,
        )
    }
}

/// One draw of the base space: Brownian increments on the grid and the
/// base Poisson random measure on `(0, T]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BaseScenario {
    pub seed: u64,
    pub index: u64,
    pub horizon: f64,
    pub dt: f64,
    /// `brownian[k]` is the increment over `(k·dt, (k+1)·dt]`; empty when no
    /// triple diffuses.
    pub brownian: Vec<Vec<f64>>,
    /// `(time, cell)` with strictly increasing times.
    pub jumps: Vec<(f64, usize)>,
}

/// Simulation settings bound to one uncertainty set.
#[derive(Debug, Clone)]
pub struct Simulator {
    u: UncertaintySet,
    base: BaseMeasure,
    horizon: f64,
    dt: f64,
    steps: usize,
    marks: Option<WeightedIndex<f64>>,
}

fn on_grid(t: f64, dt: f64) -> Option<usize> {
    let k = (t / dt).round();
    ((k * dt - t).abs() <= 1e-9 * dt.max(t)).then_some(k as usize)
}

impl Simulator {
    /// `dt` must divide the horizon.
    pub fn new(u: &UncertaintySet, horizon: f64, dt: f64) -> Result<Self> {
        u.ensure_nonempty()?;
        if !(horizon > 0.0 && horizon.is_finite()) || !(dt > 0.0 && dt <= horizon) {
            return Err(Error::invalid(format!(
                "need 0 < dt <= horizon, got dt = {dt}, horizon = {horizon}"
            )));
        }
        let steps = on_grid(horizon, dt)
            .ok_or_else(|| Error::invalid(format!("step {dt} does not divide horizon {horizon}")))?;
        let base = BaseMeasure::for_set(u);
        let marks = if base.cells.is_empty() {
            None
        } else {
            Some(
                WeightedIndex::new(&base.cells)
                    .map_err(|e| Error::invalid(format!("base mark weights: {e}")))?,
            )
        };
        Ok(Self {
            u: u.clone(),
            base,
            horizon,
            dt,
            steps,
            marks,
        })
    }

    pub fn set(&self) -> &UncertaintySet {
        &self.u
    }

    pub fn base(&self) -> &BaseMeasure {
        &self.base
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Scenario `index` of the stream family rooted at `seed`. Jumps and
    /// Brownian increments use separate streams so pure-jump sets never
    /// draw normals.
    pub fn scenario(&self, seed: u64, index: u64) -> BaseScenario {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(2 * index);
        let mut jumps = Vec::new();
        let total = self.base.total_mass();
        if let (Some(marks), true) = (&self.marks, total > 0.0) {
            let exp = Exp::new(total).expect("positive rate");
            let mut t = 0.0;
            loop {
                t += exp.sample(&mut rng);
                if t > self.horizon {
                    break;
                }
                let cell = marks.sample(&mut rng);
                if jumps.last().is_some_and(|&(s, _)| s >= t) {
                    continue;
                }
                jumps.push((t, cell));
            }
        }
        let mut brownian = Vec::new();
        if self.u.has_diffusion() {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(2 * index + 1);
            let sd = self.dt.sqrt();
            let d = self.u.dim();
            brownian = (0..self.steps)
                .map(|_| {
                    (0..d)
                        .map(|_| sd * Distribution::<f64>::sample(&StandardNormal, &mut rng))
                        .collect::<Vec<f64>>()
                })
                .collect();
        }
        BaseScenario {
            seed,
            index,
            horizon: self.horizon,
            dt: self.dt,
            brownian,
            jumps,
        }
    }

    /// `B^{t₀,θ}` on `[0, T]`: zero up to `t₀`, then Euler increments
    /// `p·dt + Q·ΔW` with the control at each step's midpoint, plus one jump
    /// `θ^d(s, z)` per base jump `(s, z)` in `(t₀, T]` with nonzero image.
    pub fn simulate_path(
        &self,
        scenario: &BaseScenario,
        policy: &ControlPolicy,
        t0: f64,
        t_end: f64,
    ) -> Result<CadlagPath> {
        if !(0.0 <= t0 && t0 < t_end && t_end <= self.horizon) {
            return Err(Error::InvalidInterval(format!(
                "need 0 <= t0 < T <= {}, got t0 = {t0}, T = {t_end}",
                self.horizon
            )));
        }
        policy.check_covers(t0, t_end)?;
        let d = self.u.dim();
        let k0 = on_grid(t0, self.dt)
            .ok_or_else(|| Error::invalid(format!("start time {t0} is off the time grid")))?;
        let k1 = on_grid(t_end, self.dt)
            .ok_or_else(|| Error::invalid(format!("end time {t_end} is off the time grid")))?;

        let continuous = policy.has_continuous_part();
        let mut samples = Vec::new();
        if continuous {
            samples.push(Sample {
                time: 0.0,
                value: vec![0.0; d],
            });
            if k0 > 0 {
                samples.push(Sample {
                    time: k0 as f64 * self.dt,
                    value: vec![0.0; d],
                });
            }
            let mut x = vec![0.0; d];
            for k in k0..k1 {
                let mid = (k as f64 + 0.5) * self.dt;
                let c = policy.value_at(mid)?;
                for (xi, p) in x.iter_mut().zip(&c.drift) {
                    *xi += p * self.dt;
                }
                if !c.cov_root.is_zero() {
                    let dw = scenario.brownian.get(k).ok_or_else(|| {
                        Error::invalid("scenario carries no Brownian increments")
                    })?;
                    linalg::add_assign(&mut x, &c.cov_root.mul_vec(dw));
                }
                let time = if k + 1 == k1 {
                    t_end
                } else {
                    (k + 1) as f64 * self.dt
                };
                samples.push(Sample {
                    time,
                    value: x.clone(),
                });
            }
            if k1 == 0 || samples.last().map(|s| s.time) != Some(t_end) {
                samples.push(Sample {
                    time: t_end,
                    value: x,
                });
            }
        }

        let mut jumps: Vec<Jump> = Vec::new();
        for &(s, cell) in &scenario.jumps {
            if s <= t0 {
                continue;
            }
            if s > t_end {
                break;
            }
            if let Some(z) = &policy.value_at(s)?.jump_map[cell] {
                jumps.push(Jump {
                    time: s,
                    size: z.clone(),
                });
            }
        }
        CadlagPath::new(t_end, d, samples, jumps)
    }
}
