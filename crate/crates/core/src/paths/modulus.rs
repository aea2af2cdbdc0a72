//! Càdlàg moduli `w′(δ)` and `w″(δ)`.
//!
//! Both are computed on the event skeleton `0 = s_0 < … < s_m = T` (jump and
//! sample times). Between consecutive events the path is either constant or
//! linear, so each piece `[s_k, s_{k+1})` is summarised by its endpoint
//! values. For pure-jump paths both moduli are exact; with a sampled
//! continuous part they are upper bounds.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::dist;

use super::CadlagPath;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Modulus {
    pub w_prime: f64,
    pub w_double_prime: f64,
    /// False when the path has a continuous part and the values are upper
    /// bounds.
    pub exact: bool,
}

struct Skeleton {
    times: Vec<f64>,
    /// Values taken on each piece `[s_k, s_{k+1})`, followed by `{x(T)}`.
    values: Vec<Vec<Vec<f64>>>,
}

impl Skeleton {
    fn new(path: &CadlagPath) -> Self {
        let times = path.event_times();
        let m = times.len() - 1;
        let continuous = path.has_continuous_part();
        let mut values = Vec::with_capacity(m + 1);
        for k in 0..m {
            let a = path.value(times[k]);
            if continuous {
                values.push(vec![a, path.left_limit(times[k + 1])]);
            } else {
                values.push(vec![a]);
            }
        }
        values.push(vec![path.value(path.horizon())]);
        Self { times, values }
    }

    fn pieces(&self) -> usize {
        self.times.len() - 1
    }

    fn max_dist(&self, i: usize, j: usize) -> f64 {
        let mut d: f64 = 0.0;
        for a in &self.values[i] {
            for b in &self.values[j] {
                d = d.max(dist(a, b));
            }
        }
        d
    }
}

/// Diameters of the value sets of piece ranges `i..=j`, upper triangle.
struct RangeDiameters {
    m: usize,
    data: Vec<f64>,
}

impl RangeDiameters {
    fn new(sk: &Skeleton) -> Self {
        let m = sk.pieces();
        let mut data = vec![0.0; m * m];
        for len in 0..m {
            for i in 0..m - len {
                let j = i + len;
                data[i * m + j] = if len == 0 {
                    sk.max_dist(i, i)
                } else {
                    data[i * m + j - 1]
                        .max(data[(i + 1) * m + j])
                        .max(sk.max_dist(i, j))
                };
            }
        }
        Self { m, data }
    }

    fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.m + j]
    }
}

/// Whether some partition with all gaps `> δ` keeps every interval's
/// oscillation at most `c`.
///
/// Partition points are grouped into classes: exactly at `s_k` or strictly
/// inside `(s_k, s_{k+1})`. Oscillation depends only on the classes of an
/// interval's endpoints, and within a class an earlier point leaves more room
/// for the next one, so it suffices to track the earliest reachable position
/// per class.
fn feasible(sk: &Skeleton, diam: &RangeDiameters, delta: f64, c: f64) -> bool {
    let m = sk.pieces();
    let s = &sk.times;
    // Class 2k: the point s_k. Class 2k+1: the open gap (s_k, s_{k+1}).
    let mut best = vec![f64::INFINITY; 2 * m + 1];
    best[0] = 0.0;
    for class in 0..2 * m {
        let pos = best[class];
        if pos.is_infinite() {
            continue;
        }
        let piece = class / 2;
        let mut last = None;
        for j in piece..m {
            if diam.get(piece, j) <= c {
                last = Some(j);
            } else {
                break;
            }
        }
        let Some(last) = last else { continue };
        let ceiling = s[last + 1];
        let lower = pos + delta;
        for target in class + 1..=2 * (last + 1) {
            let k = target / 2;
            let candidate = if target % 2 == 0 {
                (s[k] > lower && s[k] <= ceiling).then_some(s[k])
            } else {
                let lo = s[k].max(lower);
                (lo < s[k + 1].min(ceiling)).then_some(lo)
            };
            if let Some(p) = candidate {
                if p < best[target] {
                    best[target] = p;
                }
            }
        }
    }
    best[2 * m].is_finite()
}

fn w_prime(sk: &Skeleton, delta: f64) -> f64 {
    let m = sk.pieces();
    let diam = RangeDiameters::new(sk);
    let mut cands: Vec<f64> = diam
        .data
        .iter()
        .enumerate()
        .filter(|(idx, _)| idx % m >= idx / m)
        .map(|(_, &d)| d)
        .collect();
    cands.sort_by(f64::total_cmp);
    cands.dedup();
    // The trivial partition {0, T} is admissible, so the largest candidate
    // always succeeds.
    let (mut lo, mut hi) = (0, cands.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if feasible(sk, &diam, delta, cands[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    cands[lo]
}

fn w_double_prime(sk: &Skeleton, delta: f64) -> f64 {
    let m = sk.pieces();
    let s = &sk.times;
    let n = m + 1;
    // Pieces i < k can host t₁ < t₂ with t₂ − t₁ ≤ δ iff s_k − s_{i+1} < δ,
    // where piece m is the single point T.
    let reach = |i: usize| -> usize {
        let mut k = i;
        while k + 1 < n && s[k + 1] - s[i + 1] < delta {
            k += 1;
        }
        k
    };
    let triple = |i: usize, j: usize, k: usize| -> f64 {
        let mut best: f64 = 0.0;
        for a in &sk.values[i] {
            for b in &sk.values[j] {
                for c in &sk.values[k] {
                    best = best.max(dist(a, b).min(dist(b, c)));
                }
            }
        }
        best
    };
    let mut w: f64 = 0.0;
    for i in 0..n {
        // A single linear piece can also host all three times.
        w = w.max(triple(i, i, i));
        if i == m {
            break;
        }
        let kmax = reach(i);
        for j in i..=kmax {
            for k in j..=kmax {
                w = w.max(triple(i, j, k));
            }
        }
    }
    w
}

/// `(w′(δ), w″(δ))` for `0 < δ < T`.
pub fn cadlag_modulus(path: &CadlagPath, delta: f64) -> Result<Modulus> {
    if !(delta > 0.0 && delta < path.horizon()) {
        return Err(Error::invalid(format!(
            "modulus window {delta} must lie in (0, {})",
            path.horizon()
        )));
    }
    let sk = Skeleton::new(path);
    Ok(Modulus {
        w_prime: w_prime(&sk, delta),
        w_double_prime: w_double_prime(&sk, delta),
        exact: !path.has_continuous_part(),
    })
}
