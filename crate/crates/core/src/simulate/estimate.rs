use rayon::prelude::*;
use serde::Serialize;

use super::{ControlPolicy, Simulator};
use crate::error::{Error, Result};
use crate::paths::CadlagPath;

/// Sample mean and standard error for one candidate control.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CandidateStat {
    pub mean: f64,
    pub std_error: f64,
}

/// `max` over candidates of the sample mean of `ξ`. This is a lower bound
/// for the upper expectation up to sampling error.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
    /// Lowest index among tied maximisers.
    pub argmax: usize,
    pub per_candidate: Vec<CandidateStat>,
    pub n_paths: usize,
}

impl Simulator {
    /// Evaluates `ξ` on `n_paths` scenarios for every candidate. Scenario
    /// `i` is the same for all candidates and is independent of thread
    /// count, so results are reproducible from `seed`.
    pub fn estimate_upper_expectation(
        &self,
        xi: &(dyn Fn(&CadlagPath) -> f64 + Sync),
        candidates: &[ControlPolicy],
        n_paths: usize,
        seed: u64,
    ) -> Result<Estimate> {
        if n_paths < 2 {
            return Err(Error::invalid(format!("need at least 2 paths, got {n_paths}")));
        }
        if candidates.is_empty() {
            return Err(Error::InvalidPolicy("no candidate controls".into()));
        }
        for c in candidates {
            c.check_covers(0.0, self.horizon())?;
        }
        let samples: Vec<Vec<f64>> = (0..n_paths as u64)
            .into_par_iter()
            .map(|i| {
                let sc = self.scenario(seed, i);
                candidates
                    .iter()
                    .map(|c| {
                        let path = self.simulate_path(&sc, c, 0.0, self.horizon())?;
                        let y = xi(&path);
                        if y.is_finite() {
                            Ok(y)
                        } else {
                            Err(Error::Evaluation(format!("functional returned {y} on path {i}")))
                        }
                    })
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<_>>()?;
        let n = n_paths as f64;
        let per_candidate: Vec<CandidateStat> = (0..candidates.len())
            .map(|k| {
                let mean = samples.iter().map(|s| s[k]).sum::<f64>() / n;
                let var = samples.iter().map(|s| (s[k] - mean).powi(2)).sum::<f64>() / (n - 1.0);
                CandidateStat {
                    mean,
                    std_error: (var / n).sqrt(),
                }
            })
            .collect();
        let mut argmax = 0;
        for (k, s) in per_candidate.iter().enumerate() {
            if s.mean > per_candidate[argmax].mean {
                argmax = k;
            }
        }
        Ok(Estimate {
            value: per_candidate[argmax].mean,
            std_error: per_candidate[argmax].std_error,
            argmax,
            per_candidate,
            n_paths,
        })
    }

    /// Capacity lower bound `max_θ P(B^θ ∈ event)`.
    pub fn estimate_capacity(
        &self,
        event: &(dyn Fn(&CadlagPath) -> bool + Sync),
        candidates: &[ControlPolicy],
        n_paths: usize,
        seed: u64,
    ) -> Result<Estimate> {
        self.estimate_upper_expectation(&|p| f64::from(u8::from(event(p))), candidates, n_paths, seed)
    }
}
