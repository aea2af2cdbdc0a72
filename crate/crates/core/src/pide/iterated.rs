//! Multi-time expectations by backward recursion over increments.
//!
//! For `ξ = φ(X_{t₁}, X_{t₂} − X_{t₁}, …)` the last increment is integrated
//! out first with the prefix frozen, then the next, and so on. Frozen
//! arguments range over a coarse sub-lattice of the space grid; each stage
//! table is read back by linear interpolation in its last argument only,
//! since earlier arguments stay on the frozen lattice.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::uncertainty::UncertaintySet;

use super::{interpolate, solve_from_layer, Grid1D};

/// Largest number of observation times accepted.
pub const MAX_STAGES: usize = 3;

/// Upper bound on frozen-lattice nodes per argument.
const FROZEN_NODES: usize = 41;

struct Frozen {
    x_min: f64,
    dx: f64,
    nodes: Vec<f64>,
}

impl Frozen {
    fn new(grid: &Grid1D) -> Self {
        let stride = (grid.nx - 1).div_ceil(FROZEN_NODES - 1).max(1);
        let dx = grid.dx() * stride as f64;
        let count = (grid.nx - 1) / stride + 1;
        Self {
            x_min: grid.x_min,
            dx,
            nodes: (0..count).map(|k| grid.x(k * stride)).collect(),
        }
    }

    /// Every prefix of `len` frozen nodes, last coordinate fastest.
    fn prefixes(&self, len: usize) -> Vec<Vec<f64>> {
        let mut out = vec![Vec::new()];
        for _ in 0..len {
            out = out
                .into_iter()
                .flat_map(|p| {
                    self.nodes.iter().map(move |&x| {
                        let mut q = p.clone();
                        q.push(x);
                        q
                    })
                })
                .collect();
        }
        out
    }
}

/// `Ê[ψ(X_h)]` on the grid, with `ψ(0)` when `h = 0`.
fn stage_value(psi: impl Fn(f64) -> f64, u: &UncertaintySet, grid: &Grid1D, h: f64) -> Result<f64> {
    if h == 0.0 {
        return Ok(psi(0.0));
    }
    let g = grid.with_horizon(h);
    let initial = g.xs().into_iter().map(psi).collect();
    Ok(solve_from_layer(initial, u, &g, false, false)?.value_at(0.0))
}

fn check_times(times: &[f64]) -> Result<Vec<f64>> {
    if times.is_empty() {
        return Err(Error::invalid("need at least one observation time"));
    }
    if times.len() > MAX_STAGES {
        return Err(Error::invalid(format!(
            "{} observation times exceed the limit of {MAX_STAGES}",
            times.len()
        )));
    }
    let mut prev = 0.0;
    let mut gaps = Vec::with_capacity(times.len());
    for (k, &t) in times.iter().enumerate() {
        let ok = if k == 0 { t >= 0.0 } else { t > prev };
        if !ok || !t.is_finite() {
            return Err(Error::invalid("observation times must increase from 0"));
        }
        gaps.push(t - prev);
        prev = t;
    }
    Ok(gaps)
}

/// `Ê[φ(X_{t₁}, X_{t₂} − X_{t₁}, …, X_{t_n} − X_{t_{n−1}})]` for `n ≤ 3`.
///
/// The horizon of `grid` is ignored; each stage uses the same space lattice
/// and time step over its own interval.
pub fn iterated_expectation(
    phi: &(dyn Fn(&[f64]) -> f64 + Sync),
    times: &[f64],
    u: &UncertaintySet,
    grid: &Grid1D,
) -> Result<f64> {
    let gaps = check_times(times)?;
    let n = gaps.len();
    if n == 1 {
        return stage_value(|y| phi(&[y]), u, grid, gaps[0]);
    }
    let frozen = Frozen::new(grid);
    let width = frozen.nodes.len();

    // Innermost stage: integrate the last increment out of φ itself.
    let prefixes = frozen.prefixes(n - 1);
    let mut table: Vec<f64> = prefixes
        .par_iter()
        .map(|p| {
            let mut args = p.clone();
            args.push(0.0);
            stage_value(
                |y| {
                    let mut a = args.clone();
                    a[n - 1] = y;
                    phi(&a)
                },
                u,
                grid,
                gaps[n - 1],
            )
        })
        .collect::<Result<_>>()?;

    // Remaining stages read the previous table along its last argument.
    for stage in (0..n - 1).rev() {
        let prev = table;
        let count = width.pow(stage as u32);
        table = (0..count)
            .into_par_iter()
            .map(|idx| {
                let row = &prev[idx * width..(idx + 1) * width];
                stage_value(
                    |y| interpolate(row, frozen.x_min, frozen.dx, y),
                    u,
                    grid,
                    gaps[stage],
                )
            })
            .collect::<Result<_>>()?;
    }
    Ok(table[0])
}

/// `Ê[ξ | F_{t_i}]` evaluated at the realised increments
/// `x₁, …, x_i`, for the same `ξ = φ(increments)` as
/// [`iterated_expectation`].
pub fn conditional_expectation(
    phi: &(dyn Fn(&[f64]) -> f64 + Sync),
    times: &[f64],
    realized: &[f64],
    u: &UncertaintySet,
    grid: &Grid1D,
) -> Result<f64> {
    check_times(times)?;
    let i = realized.len();
    let n = times.len();
    if i > n {
        return Err(Error::invalid(format!(
            "{i} realised increments for {n} observation times"
        )));
    }
    if i == n {
        return Ok(phi(realized));
    }
    let t_i = if i == 0 { 0.0 } else { times[i - 1] };
    let rest: Vec<f64> = times[i..].iter().map(|t| t - t_i).collect();
    let prefix = realized.to_vec();
    let psi = move |y: &[f64]| {
        let mut a = prefix.clone();
        a.extend_from_slice(y);
        phi(&a)
    };
    iterated_expectation(&psi, &rest, u, grid)
}
