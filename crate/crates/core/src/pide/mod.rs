//! The nonlocal generator `G` and the explicit monotone scheme for
//! `∂_t u = G[u(t, x + ·) − u(t, x)]`, `u(0, ·) = φ`, in one space dimension.
//!
//! Each step takes, node by node, the maximum over the triples of the set of
//! the discrete generator: jump terms by linear interpolation with constant
//! extrapolation off the grid, upwind differences for the drift and central
//! differences for the diffusion. Under the CFL bound every stencil weight is
//! nonnegative, so the scheme is monotone and preserves constants.

mod generator;
mod gpoisson;
mod iterated;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::uncertainty::UncertaintySet;

pub use generator::{apply_g, Derivatives};
pub use gpoisson::{g_poisson, GPoissonValue};
pub use iterated::{conditional_expectation, iterated_expectation, MAX_STAGES};

/// Uniform space-time lattice on `[x_min, x_max] × [0, T]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    pub x_min: f64,
    pub x_max: f64,
    pub nx: usize,
    /// Largest allowed step; the step used divides `T` evenly.
    pub dt: f64,
    pub horizon: f64,
}

impl Grid1D {
    pub fn new(x_min: f64, x_max: f64, nx: usize, dt: f64, horizon: f64) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite() && x_min < x_max) {
            return Err(Error::invalid(format!("bad space range [{x_min}, {x_max}]")));
        }
        if nx < 3 {
            return Err(Error::invalid("need at least 3 space nodes"));
        }
        if !(dt > 0.0 && dt.is_finite()) || !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::invalid("time step and horizon must be positive"));
        }
        Ok(Self {
            x_min,
            x_max,
            nx,
            dt,
            horizon,
        })
    }

    /// A grid centred on the origin (which is a node) with spacing `dx`,
    /// wide enough to hold `support` plus the distance the process can
    /// plausibly travel by `T`, and the largest step allowed by the CFL
    /// bound with a safety factor of one half, capped at `T / 1000`.
    pub fn auto(u: &UncertaintySet, horizon: f64, dx: f64, support: (f64, f64)) -> Result<Self> {
        if !(dx > 0.0 && dx.is_finite()) {
            return Err(Error::invalid(format!("grid spacing {dx} must be positive")));
        }
        let lambda_t = u.max_total_mass() * horizon;
        let max_drift = u
            .triples()
            .iter()
            .map(|t| t.drift[0].abs())
            .fold(0.0, f64::max);
        let max_q = u
            .triples()
            .iter()
            .map(|t| t.cov_root.trace_qqt().sqrt())
            .fold(0.0, f64::max);
        let reach = u.max_jump_norm() * (lambda_t + 6.0 * lambda_t.sqrt() + 6.0)
            + max_drift * horizon
            + 6.0 * max_q * horizon.sqrt();
        let lo = support.0.min(0.0) - reach - 2.0 * dx;
        let hi = support.1.max(0.0) + reach + 2.0 * dx;
        let k_lo = (-lo / dx).ceil();
        let k_hi = (hi / dx).ceil();
        let nx = (k_lo + k_hi) as usize + 1;
        let mut grid = Self::new(-k_lo * dx, k_hi * dx, nx, horizon, horizon)?;
        let rate = grid.cfl_rate(u);
        grid.dt = (horizon / 1000.0).min(if rate > 0.0 { 0.5 / rate } else { horizon });
        Ok(grid)
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.nx - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx()
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.nx).map(|i| self.x(i)).collect()
    }

    pub fn steps(&self) -> usize {
        ((self.horizon / self.dt) * (1.0 - 1e-12)).ceil().max(1.0) as usize
    }

    pub fn dt_eff(&self) -> f64 {
        self.horizon / self.steps() as f64
    }

    pub fn with_horizon(&self, horizon: f64) -> Self {
        Self { horizon, ..*self }
    }

    /// Same domain with half the spacing and half the step (a quarter when
    /// diffusion is present, to keep the CFL number).
    pub fn refined(&self, diffusive: bool) -> Self {
        Self {
            nx: 2 * self.nx - 1,
            dt: self.dt_eff() / if diffusive { 4.0 } else { 2.0 },
            ..*self
        }
    }

    /// `sup_v v(ℝ_0) + sup Q²/Δx² + sup |p|/Δx`
    fn cfl_rate(&self, u: &UncertaintySet) -> f64 {
        let dx = self.dx();
        let mass = u.max_total_mass();
        let q2 = u
            .triples()
            .iter()
            .map(|t| t.cov_root.trace_qqt())
            .fold(0.0, f64::max);
        let p = u
            .triples()
            .iter()
            .map(|t| t.drift[0].abs())
            .fold(0.0, f64::max);
        mass + q2 / (dx * dx) + p / dx
    }

    /// The CFL number with the effective step; the scheme is monotone when
    /// it is at most one.
    pub fn cfl_number(&self, u: &UncertaintySet) -> f64 {
        self.dt_eff() * self.cfl_rate(u)
    }
}

/// `u(t_m, x_i)` on every time layer.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridSolution {
    pub grid: Grid1D,
    pub dt_eff: f64,
    pub cfl: f64,
    /// `values[m][i] = u(m·dt_eff, x_i)`.
    pub values: Vec<Vec<f64>>,
    /// How often each triple attained the per-node maximum.
    pub argmax_histogram: Vec<u64>,
}

/// Metadata written alongside exported solutions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolutionHeader {
    pub grid: Grid1D,
    pub dt_eff: f64,
    pub steps: usize,
    pub cfl: f64,
    pub argmax_histogram: Vec<u64>,
}

impl GridSolution {
    pub fn terminal(&self) -> &[f64] {
        self.values.last().expect("solution has at least one layer")
    }

    /// Linear interpolation of layer `m` at `x`, constant outside the grid.
    pub fn layer_at(&self, m: usize, x: f64) -> f64 {
        interpolate(&self.values[m], self.grid.x_min, self.grid.dx(), x)
    }

    /// `u(T, x)`
    pub fn value_at(&self, x: f64) -> f64 {
        self.layer_at(self.values.len() - 1, x)
    }

    /// `u(t, x)` for `t` on the time lattice.
    pub fn value_at_time(&self, t: f64, x: f64) -> Result<f64> {
        let m = (t / self.dt_eff).round();
        if !(0.0..=(self.values.len() - 1) as f64).contains(&m)
            || (m * self.dt_eff - t).abs() > 1e-9 * self.grid.horizon
        {
            return Err(Error::invalid(format!("time {t} is not on the solution lattice")));
        }
        Ok(self.layer_at(m as usize, x))
    }

    pub fn header(&self) -> SolutionHeader {
        SolutionHeader {
            grid: self.grid,
            dt_eff: self.dt_eff,
            steps: self.values.len() - 1,
            cfl: self.cfl,
            argmax_histogram: self.argmax_histogram.clone(),
        }
    }

    /// Rows are time layers, columns are space nodes; the first column is
    /// the time.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t");
        for x in self.grid.xs() {
            out.push(',');
            out.push_str(&x.to_string());
        }
        out.push('\n');
        for (m, row) in self.values.iter().enumerate() {
            out.push_str(&(m as f64 * self.dt_eff).to_string());
            for v in row {
                out.push(',');
                out.push_str(&v.to_string());
            }
            out.push('\n');
        }
        out
    }
}

pub(crate) fn interpolate(values: &[f64], x_min: f64, dx: f64, x: f64) -> f64 {
    let n = values.len();
    let s = (x - x_min) / dx;
    if !(s > 0.0) {
        return values[0];
    }
    if s >= (n - 1) as f64 {
        return values[n - 1];
    }
    let k = s.floor() as usize;
    let th = s - k as f64;
    if th == 0.0 {
        values[k]
    } else {
        values[k] + th * (values[k + 1] - values[k])
    }
}

/// A triple's discrete generator, with jump offsets precomputed in cells.
struct Stencil {
    /// `(whole cells, fraction, weight)` per atom.
    jumps: Vec<(i64, f64, f64)>,
    drift: f64,
    half_q2: f64,
}

impl Stencil {
    fn new(u: &UncertaintySet, dx: f64) -> Vec<Self> {
        u.triples()
            .iter()
            .map(|t| Stencil {
                jumps: t
                    .measure
                    .atoms()
                    .iter()
                    .map(|a| {
                        let s = a.z[0] / dx;
                        let k = s.floor();
                        (k as i64, s - k, a.w)
                    })
                    .collect(),
                drift: t.drift[0],
                half_q2: 0.5 * t.cov_root.trace_qqt(),
            })
            .collect()
    }

    fn apply(&self, u: &[f64], i: usize, dx: f64) -> f64 {
        let n = u.len() as i64;
        let at = |j: i64| u[j.clamp(0, n - 1) as usize];
        let ui = u[i];
        let ii = i as i64;
        let mut acc = 0.0;
        for &(k, th, w) in &self.jumps {
            let shifted = if th == 0.0 {
                at(ii + k)
            } else {
                let (a, b) = (at(ii + k), at(ii + k + 1));
                a + th * (b - a)
            };
            acc += w * (shifted - ui);
        }
        if self.drift > 0.0 {
            acc += self.drift * (at(ii + 1) - ui) / dx;
        } else if self.drift < 0.0 {
            acc += self.drift * (ui - at(ii - 1)) / dx;
        }
        if self.half_q2 > 0.0 {
            acc += self.half_q2 * (at(ii + 1) - 2.0 * ui + at(ii - 1)) / (dx * dx);
        }
        acc
    }
}

fn check_set(u: &UncertaintySet) -> Result<()> {
    u.ensure_nonempty()?;
    if u.dim() != 1 {
        return Err(Error::Unsupported(format!(
            "the grid solver is one-dimensional (set has d = {})",
            u.dim()
        )));
    }
    Ok(())
}

/// One explicit step; returns the new layer and the maximising triple per
/// node (lowest index on ties).
fn step(stencils: &[Stencil], u: &[f64], dx: f64, dt: f64, parallel: bool) -> (Vec<f64>, Vec<u32>) {
    let node = |i: usize| {
        let mut best = f64::NEG_INFINITY;
        let mut arg = 0u32;
        for (k, s) in stencils.iter().enumerate() {
            let g = s.apply(u, i, dx);
            if g > best {
                best = g;
                arg = k as u32;
            }
        }
        (u[i] + dt * best, arg)
    };
    if parallel {
        (0..u.len()).into_par_iter().map(node).unzip()
    } else {
        (0..u.len()).map(node).unzip()
    }
}

pub(crate) fn solve_from_layer(
    initial: Vec<f64>,
    u: &UncertaintySet,
    grid: &Grid1D,
    keep_layers: bool,
    parallel: bool,
) -> Result<GridSolution> {
    check_set(u)?;
    let cfl = grid.cfl_number(u);
    if cfl > 1.0 + 1e-12 {
        return Err(Error::Cfl { cfl });
    }
    if let Some(i) = initial.iter().position(|v| !v.is_finite()) {
        return Err(Error::Numerical(format!(
            "initial condition is not finite at x = {}",
            grid.x(i)
        )));
    }
    let dx = grid.dx();
    let dt = grid.dt_eff();
    let stencils = Stencil::new(u, dx);
    let mut histogram = vec![0u64; u.len()];
    let mut values = vec![initial];
    for m in 0..grid.steps() {
        let prev = values.last().expect("nonempty");
        let (next, args) = step(&stencils, prev, dx, dt, parallel);
        if let Some(i) = next.iter().position(|v| !v.is_finite()) {
            return Err(Error::Numerical(format!(
                "non-finite value at step {} and x = {}",
                m + 1,
                grid.x(i)
            )));
        }
        for a in args {
            histogram[a as usize] += 1;
        }
        if keep_layers {
            values.push(next);
        } else {
            values[0] = next;
        }
    }
    Ok(GridSolution {
        grid: *grid,
        dt_eff: dt,
        cfl,
        values,
        argmax_histogram: histogram,
    })
}

/// Solves the integro-PDE from `u(0, ·) = φ` and keeps every time layer.
pub fn solve_ipde(phi: impl Fn(f64) -> f64, u: &UncertaintySet, grid: &Grid1D) -> Result<GridSolution> {
    let initial = grid.xs().into_iter().map(&phi).collect();
    solve_from_layer(initial, u, grid, true, true)
}

/// `u(T, x_i)` on every node, without storing intermediate layers.
pub fn solve_terminal(phi: impl Fn(f64) -> f64, u: &UncertaintySet, grid: &Grid1D) -> Result<Vec<f64>> {
    let initial = grid.xs().into_iter().map(&phi).collect();
    let mut sol = solve_from_layer(initial, u, grid, false, true)?;
    Ok(sol.values.pop().expect("one layer"))
}

/// A value together with a refinement-based error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Refined {
    /// `u(T, x)` on the refined grid.
    pub value: f64,
    pub coarse_value: f64,
    /// `|refined − coarse|`, the first-order estimate of the refined
    /// solution's error.
    pub error_estimate: f64,
}

/// `u(T, x)` on `grid` and on its refinement.
pub fn solve_with_error(
    phi: impl Fn(f64) -> f64 + Copy,
    u: &UncertaintySet,
    grid: &Grid1D,
    x: f64,
) -> Result<Refined> {
    let xs = grid.xs();
    let coarse = solve_from_layer(xs.into_iter().map(phi).collect(), u, grid, false, true)?;
    let fine_grid = grid.refined(u.has_diffusion());
    let fine = solve_from_layer(fine_grid.xs().into_iter().map(phi).collect(), u, &fine_grid, false, true)?;
    let coarse_value = coarse.value_at(x);
    let value = fine.value_at(x);
    Ok(Refined {
        value,
        coarse_value,
        error_estimate: (value - coarse_value).abs(),
    })
}
