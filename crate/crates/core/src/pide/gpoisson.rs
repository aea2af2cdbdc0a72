use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Value and lattice diagnostics of a G-Poisson expectation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GPoissonValue {
    pub value: f64,
    /// Highest lattice state kept; states beyond it are absorbed.
    pub max_state: u64,
    /// Euler steps of the finer of the two extrapolated runs.
    pub steps: usize,
}

/// Smallest `N` with `Σ_{k≥N} k·P(k) < tol` for `P = Poisson(mean)`.
fn truncation(mean: f64, tol: f64) -> u64 {
    if mean == 0.0 {
        return 1;
    }
    let kmax = (mean + 40.0 * mean.sqrt() + 60.0).ceil() as usize;
    let mut pmf = Vec::with_capacity(kmax + 1);
    let mut log_p = -mean;
    for k in 0..=kmax {
        if k > 0 {
            log_p += mean.ln() - (k as f64).ln();
        }
        pmf.push(log_p.exp());
    }
    let mut tail = 0.0;
    for k in (0..=kmax).rev() {
        tail += k as f64 * pmf[k];
        if tail >= tol {
            return (k + 1) as u64;
        }
    }
    1
}

fn euler(phi: &[f64], lmin: f64, lmax: f64, t: f64, steps: usize) -> f64 {
    let dt = t / steps as f64;
    let n = phi.len();
    let mut v = phi.to_vec();
    let mut next = v.clone();
    for _ in 0..steps {
        for k in 0..n - 1 {
            let diff = v[k + 1] - v[k];
            let rate = if diff > 0.0 { lmax } else { lmin };
            next[k] = v[k] + dt * rate * diff;
        }
        next[n - 1] = v[n - 1];
        std::mem::swap(&mut v, &mut next);
    }
    v[0]
}

/// `Ê[φ(N_t)]` for a G-Poisson process with intensity uncertainty
/// `[λ_min, λ_max]`.
///
/// Integrates `v′(k) = sup_λ λ (v(k+1) − v(k))` on the lattice `{0, …, N}`
/// with explicit Euler and Richardson extrapolation over two step sizes.
/// `N` is chosen so that `Σ_{k≥N} k·P(k) < 1e−10` under `λ_max`.
pub fn g_poisson(
    lambda_min: f64,
    lambda_max: f64,
    t: f64,
    phi: impl Fn(u64) -> f64,
) -> Result<GPoissonValue> {
    if !(lambda_min >= 0.0 && lambda_min <= lambda_max && lambda_max.is_finite()) {
        return Err(Error::invalid(format!(
            "intensity interval [{lambda_min}, {lambda_max}] must satisfy 0 <= min <= max < inf"
        )));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::invalid(format!("time {t} must be nonnegative")));
    }
    let max_state = truncation(lambda_max * t, 1e-10);
    let values = (0..=max_state)
        .map(|k| {
            let y = phi(k);
            if y.is_finite() {
                Ok(y)
            } else {
                Err(Error::Evaluation(format!("payoff is {y} at state {k}")))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    if lambda_max * t == 0.0 {
        return Ok(GPoissonValue {
            value: values[0],
            max_state,
            steps: 0,
        });
    }
    let coarse = ((lambda_max * t) / 5e-4).ceil() as usize;
    let a = euler(&values, lambda_min, lambda_max, t, coarse);
    let b = euler(&values, lambda_min, lambda_max, t, 2 * coarse);
    Ok(GPoissonValue {
        value: 2.0 * b - a,
        max_state,
        steps: 2 * coarse,
    })
}
