//! Grid discretisation `T^n`, time-change upper bounds on the Skorohod
//! distance, and the single-jump path family `x·1_{[t, T]}`.

use crate::error::{Error, Result};
use crate::linalg::{dist, is_zero, sub};

use super::{CadlagPath, Jump};

/// `T^n(ω)`: the step path equal to `ω(kT/n)` on `[kT/n, (k+1)T/n)` and to
/// `ω(T)` at `T`.
pub fn discretize_tn(path: &CadlagPath, n: usize) -> Result<CadlagPath> {
    if n == 0 {
        return Err(Error::invalid("discretisation level n must be at least 1"));
    }
    let t_max = path.horizon();
    let grid = |k: usize| {
        if k == n {
            t_max
        } else {
            k as f64 * t_max / n as f64
        }
    };
    let mut jumps = Vec::new();
    let mut prev = path.value(0.0);
    for k in 1..=n {
        let t = grid(k);
        let cur = path.value(t);
        let size = sub(&cur, &prev);
        if !is_zero(&size) {
            jumps.push(Jump { time: t, size });
        }
        prev = cur;
    }
    CadlagPath::pure_jump(t_max, path.dim(), jumps)
}

/// Increasing piecewise-linear time change through the given knots.
struct TimeChange {
    knots: Vec<(f64, f64)>,
}

impl TimeChange {
    fn new(t_max: f64, pairs: &[(f64, f64)]) -> Self {
        let mut knots = vec![(0.0, 0.0)];
        knots.extend_from_slice(pairs);
        knots.push((t_max, t_max));
        knots.dedup_by(|a, b| a.0 == b.0 && a.1 == b.1);
        Self { knots }
    }

    fn sup_shift(&self) -> f64 {
        self.knots
            .iter()
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    fn interp(knots: &[(f64, f64)], t: f64, fwd: bool) -> f64 {
        let key = |p: &(f64, f64)| if fwd { p.0 } else { p.1 };
        let val = |p: &(f64, f64)| if fwd { p.1 } else { p.0 };
        let k = knots.partition_point(|p| key(p) <= t);
        if k == 0 {
            return val(&knots[0]);
        }
        if k == knots.len() {
            return val(&knots[k - 1]);
        }
        let (a, b) = (&knots[k - 1], &knots[k]);
        if t == key(a) {
            return val(a);
        }
        let w = (t - key(a)) / (key(b) - key(a));
        val(a) + w * (val(b) - val(a))
    }

    fn apply(&self, t: f64) -> f64 {
        Self::interp(&self.knots, t, true)
    }

    fn inverse(&self, s: f64) -> f64 {
        Self::interp(&self.knots, s, false)
    }
}

/// `max(‖λ − Id‖, ‖a − b∘λ‖)` for the time change `λ`. The difference is
/// piecewise linear between the breakpoints, so its sup is attained at a
/// breakpoint value or left limit.
fn cost(a: &CadlagPath, b: &CadlagPath, lambda: &TimeChange) -> f64 {
    let mut ts = a.event_times();
    ts.extend(b.event_times().into_iter().map(|s| lambda.inverse(s)));
    ts.extend(lambda.knots.iter().map(|k| k.0));
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    let mut sup: f64 = 0.0;
    for &t in &ts {
        let s = lambda.apply(t);
        sup = sup.max(dist(&a.value(t), &b.value(s)));
        if t > 0.0 {
            sup = sup.max(dist(&a.left_limit(t), &b.left_limit(s)));
        }
    }
    lambda.sup_shift().max(sup)
}

/// Monotone matchings of `a`'s jumps to `b`'s, greedily by size mismatch,
/// one matching per cap on the allowed time shift.
fn matchings(a: &CadlagPath, b: &CadlagPath) -> Vec<Vec<(f64, f64)>> {
    let t_max = a.horizon();
    let mut pairs: Vec<(f64, f64, f64, f64)> = Vec::new();
    for ja in a.jumps() {
        for jb in b.jumps() {
            // Jumps at T can only sit on the fixed endpoint λ(T) = T.
            if (ja.time == t_max) != (jb.time == t_max) || ja.time == t_max {
                continue;
            }
            let shift = (ja.time - jb.time).abs();
            pairs.push((dist(&ja.size, &jb.size), shift, ja.time, jb.time));
        }
    }
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)));
    let mut caps: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    caps.sort_by(f64::total_cmp);
    caps.dedup();
    if caps.len() > 64 {
        let step = caps.len() as f64 / 64.0;
        caps = (0..64)
            .map(|i| caps[((i as f64 + 1.0) * step) as usize - 1])
            .collect();
    }
    caps.into_iter()
        .map(|cap| {
            let mut chosen: Vec<(f64, f64)> = Vec::new();
            for &(_, shift, ta, tb) in &pairs {
                if shift > cap {
                    continue;
                }
                let clash = chosen.iter().any(|&(ca, cb)| {
                    ca == ta || cb == tb || ((ca < ta) != (cb < tb))
                });
                if !clash {
                    chosen.push((ta, tb));
                }
            }
            chosen.sort_by(|x, y| x.0.total_cmp(&y.0));
            chosen
        })
        .collect()
}

fn directed(a: &CadlagPath, b: &CadlagPath) -> f64 {
    let t_max = a.horizon();
    let mut best = cost(a, b, &TimeChange::new(t_max, &[]));
    for m in matchings(a, b) {
        best = best.min(cost(a, b, &TimeChange::new(t_max, &m)));
    }
    best
}

/// An upper bound on the Skorohod distance: the best of the identity and a
/// family of jump-aligning piecewise-linear time changes, tried in both
/// directions.
pub fn skorohod_distance_upper(a: &CadlagPath, b: &CadlagPath) -> Result<f64> {
    if a.horizon() != b.horizon() {
        return Err(Error::invalid(format!(
            "paths have different horizons {} and {}",
            a.horizon(),
            b.horizon()
        )));
    }
    if a.dim() != b.dim() {
        return Err(Error::invalid("paths have different dimensions"));
    }
    Ok(directed(a, b).min(directed(b, a)))
}

/// The path `x·1_{[t, T]}` with a single jump of size `x ∈ [1, 2]` at
/// `t ∈ (0, T)`.
pub fn counterexample_family(t: f64, x: f64, horizon: f64) -> Result<CadlagPath> {
    if !(t > 0.0 && t < horizon) {
        return Err(Error::invalid(format!("jump time {t} must lie in (0, {horizon})")));
    }
    if !(1.0..=2.0).contains(&x) {
        return Err(Error::invalid(format!("jump size {x} must lie in [1, 2]")));
    }
    CadlagPath::from_jumps_1d(horizon, &[(t, x)])
}
