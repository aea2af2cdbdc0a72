use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::region::Region;
use crate::uncertainty::{SupResult, UncertaintySet};

/// `Df(0)` and `D²f(0)` supplied by the caller.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Derivatives {
    pub gradient: Vec<f64>,
    pub hessian: Matrix,
}

impl Derivatives {
    /// Central differences with step `h`.
    pub fn central(f: &impl Fn(&[f64]) -> f64, dim: usize, h: f64) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::invalid(format!("difference step {h} must be positive")));
        }
        let at = |pairs: &[(usize, f64)]| {
            let mut z = vec![0.0; dim];
            for &(i, s) in pairs {
                z[i] += s;
            }
            f(&z)
        };
        let f0 = at(&[]);
        let mut gradient = vec![0.0; dim];
        let mut rows = vec![vec![0.0; dim]; dim];
        for i in 0..dim {
            let fp = at(&[(i, h)]);
            let fm = at(&[(i, -h)]);
            gradient[i] = (fp - fm) / (2.0 * h);
            rows[i][i] = (fp - 2.0 * f0 + fm) / (h * h);
            for j in 0..i {
                let v = (at(&[(i, h), (j, h)]) - at(&[(i, h), (j, -h)]) - at(&[(i, -h), (j, h)])
                    + at(&[(i, -h), (j, -h)]))
                    / (4.0 * h * h);
                rows[i][j] = v;
                rows[j][i] = v;
            }
        }
        if gradient.iter().chain(rows.iter().flatten()).any(|v| !v.is_finite()) {
            return Err(Error::Evaluation("difference quotients are not finite".into()));
        }
        Ok(Self {
            gradient,
            hessian: Matrix::from_rows(&rows)?,
        })
    }
}

/// `G[f] = sup_{(v,p,Q)} { ∫ f dv + ⟨Df(0), p⟩ + ½ tr(D²f(0) QQᵀ) }` for
/// `f(0) = 0`. Derivatives default to central differences with step `h`.
pub fn apply_g(
    f: impl Fn(&[f64]) -> f64,
    u: &UncertaintySet,
    derivatives: Option<&Derivatives>,
    h: f64,
) -> Result<SupResult> {
    u.ensure_nonempty()?;
    let d = u.dim();
    let f0 = f(&vec![0.0; d]);
    if !(f0.abs() <= 1e-12) {
        return Err(Error::invalid(format!("G needs f(0) = 0, got {f0}")));
    }
    let owned;
    let der = match derivatives {
        Some(der) => der,
        None => {
            owned = Derivatives::central(&f, d, h)?;
            &owned
        }
    };
    if der.gradient.len() != d || der.hessian.dim() != d {
        return Err(Error::invalid("derivative dimensions disagree with the set"));
    }
    let mut best = SupResult {
        value: f64::NEG_INFINITY,
        argmax: None,
    };
    for (k, t) in u.triples().iter().enumerate() {
        let jump = t.measure.integrate(&f, &Region::Whole)?;
        let drift: f64 = der.gradient.iter().zip(&t.drift).map(|(g, p)| g * p).sum();
        let qqt = t.cov_root.qqt();
        let mut tr = 0.0;
        for i in 0..d {
            for j in 0..d {
                tr += der.hessian.get(i, j) * qqt.get(j, i);
            }
        }
        let value = jump + drift + 0.5 * tr;
        if value > best.value {
            best = SupResult {
                value,
                argmax: Some(k),
            };
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::uncertainty::{Atom, DiscreteLevyMeasure, LevyTriple};

    #[test]
    fn generator_examples() {
        let jumps =
            UncertaintySet::pure_jump(vec![DiscreteLevyMeasure::dirac(1.0, 2.0).unwrap()]).unwrap();
        assert!((apply_g(|z| z[0], &jumps, None, 1e-4).unwrap().value - 2.0).abs() < 1e-9);
        assert_eq!(apply_g(|_| 0.0, &jumps, None, 1e-4).unwrap().value, 0.0);
        let diffusive = UncertaintySet::from_triples(vec![LevyTriple::scalar(
            DiscreteLevyMeasure::zero(1),
            0.0,
            1.0,
        )
        .unwrap()])
        .unwrap();
        let g = apply_g(|z| z[0] * z[0], &diffusive, None, 1e-4).unwrap();
        assert!((g.value - 1.0).abs() < 1e-6);
        let exact = Derivatives {
            gradient: vec![0.0],
            hessian: Matrix::scalar(2.0),
        };
        assert_eq!(
            apply_g(|z| z[0] * z[0], &diffusive, Some(&exact), 1e-4).unwrap().value,
            1.0
        );
    }

    #[test]
    fn rejects_nonzero_at_origin() {
        let u = UncertaintySet::pure_jump(vec![DiscreteLevyMeasure::dirac(1.0, 1.0).unwrap()])
            .unwrap();
        assert!(matches!(
            apply_g(|z| z[0] + 1.0, &u, None, 1e-4),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn two_dimensional_hessian() {
        let q = Matrix::from_rows(&[vec![1.0, 0.0], vec![1.0, 1.0]]).unwrap();
        let v = DiscreteLevyMeasure::new(
            2,
            vec![Atom {
                z: vec![1.0, -1.0],
                w: 0.5,
            }],
        )
        .unwrap();
        let u = UncertaintySet::from_triples(vec![LevyTriple::new(v, vec![1.0, 2.0], q).unwrap()])
            .unwrap();
        // f = z₁z₂ + z₂: ∫f dv = 0.5·(−1 − 1), ⟨Df, p⟩ = 2, ½tr(D²f QQᵀ) = (QQᵀ)₁₂ = 1.
        let g = apply_g(|z| z[0] * z[1] + z[1], &u, None, 1e-4).unwrap();
        assert!((g.value - 2.0).abs() < 1e-6);
    }
}
