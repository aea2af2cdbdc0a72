use serde::{Deserialize, Serialize};

use super::{ControlPolicy, Simulator};
use crate::error::{Error, Result};
use crate::region::Region;
use crate::uncertainty::UncertaintySet;

/// Closed time window `[start, end]`; `end` may be `+∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeWindow {
    pub start: f64,
    pub end: f64,
}

impl TimeWindow {
    pub fn new(start: f64, end: f64) -> Result<Self> {
        if !(start >= 0.0 && start.is_finite() && end >= start) {
            return Err(Error::InvalidInterval(format!("bad time window [{start}, {end}]")));
        }
        Ok(Self { start, end })
    }

    pub fn contains(&self, t: f64) -> bool {
        self.start <= t && t <= self.end
    }
}

/// Distribution function of the sum of `k` independent exponentials with
/// the given rate, at `t`.
pub fn erlang_cdf(k: usize, rate: f64, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t.is_infinite() {
        return 1.0;
    }
    let x = rate * t;
    let mut term = (-x).exp();
    let mut tail = term;
    for j in 1..k {
        term *= x / j as f64;
        tail += term;
    }
    (1.0 - tail).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErlangCheck {
    pub mc_capacity: f64,
    pub std_error: f64,
    pub analytic_bound: f64,
    /// Triple attaining the analytic bound.
    pub bound_argmax: usize,
    /// Constant control attaining the Monte Carlo maximum.
    pub mc_argmax: usize,
    /// Simulation horizon used; for unbounded windows, the point past which
    /// the `k`-th `A`-jump has probability below `1e-9` under every triple.
    pub horizon: f64,
    pub pass: bool,
}

/// Compares the Monte Carlo capacity of
/// `{ΔX at the k-th A-jump lies in B, and that jump time lies in C}` with the
/// lower bound `sup_v v(B∩A)/v(A) · Erlang(k, v(A))(C)` obtained from constant
/// controls.
pub fn erlang_bound_check(
    u: &UncertaintySet,
    a: &Region,
    b: &Region,
    k: usize,
    window: TimeWindow,
    n_paths: usize,
    seed: u64,
) -> Result<ErlangCheck> {
    u.ensure_nonempty()?;
    if k == 0 {
        return Err(Error::invalid("jump index k starts at 1"));
    }
    if a.closure_contains_origin() {
        return Err(Error::Precondition(
            "jump region must be bounded away from the origin".into(),
        ));
    }
    let mut masses = Vec::with_capacity(u.len());
    for (i, t) in u.triples().iter().enumerate() {
        let va = t.measure.mass(a);
        if va <= 0.0 {
            return Err(Error::Precondition(format!("v(A) = 0 for triple {i}")));
        }
        let vba: f64 = t
            .measure
            .atoms()
            .iter()
            .filter(|at| a.contains(&at.z) && b.contains(&at.z))
            .map(|at| at.w)
            .sum();
        masses.push((va, vba));
    }
    let mut bound_argmax = 0;
    let mut analytic_bound = f64::NEG_INFINITY;
    for (i, &(va, vba)) in masses.iter().enumerate() {
        let p = vba / va
            * (erlang_cdf(k, va, window.end) - erlang_cdf(k, va, window.start)).max(0.0);
        if p > analytic_bound {
            analytic_bound = p;
            bound_argmax = i;
        }
    }

    let slowest = masses.iter().map(|m| m.0).fold(f64::INFINITY, f64::min);
    let mut tail_horizon = k as f64 / slowest;
    while 1.0 - erlang_cdf(k, slowest, tail_horizon) >= 1e-9 {
        tail_horizon *= 1.5;
    }
    let horizon = window.end.min(tail_horizon.max(window.start));
    if horizon <= 0.0 {
        // Only t = 0 is allowed, and jumps never happen at time 0.
        return Ok(ErlangCheck {
            mc_capacity: 0.0,
            std_error: 0.0,
            analytic_bound,
            bound_argmax,
            mc_argmax: 0,
            horizon: 0.0,
            pass: true,
        });
    }
    let sim = Simulator::new(u, horizon, horizon / 1000.0)?;
    let candidates = ControlPolicy::all_constant(&sim);
    let event = |p: &crate::paths::CadlagPath| {
        p.jumps()
            .iter()
            .filter(|j| a.contains(&j.size))
            .nth(k - 1)
            .is_some_and(|j| window.contains(j.time) && b.contains(&j.size))
    };
    let est = sim.estimate_capacity(&event, &candidates, n_paths, seed)?;
    Ok(ErlangCheck {
        mc_capacity: est.value,
        std_error: est.std_error,
        analytic_bound,
        bound_argmax,
        mc_argmax: est.argmax,
        horizon,
        pass: est.value >= analytic_bound - 3.0 * est.std_error,
    })
}
