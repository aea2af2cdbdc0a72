//! Small dense helpers for the low-dimensional vectors and matrices the
//! engine carries around (jump sizes, drifts, covariance roots).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn is_zero(v: &[f64]) -> bool {
    v.iter().all(|&x| x == 0.0)
}

pub fn add_assign(acc: &mut [f64], v: &[f64]) {
    for (a, b) in acc.iter_mut().zip(v) {
        *a += b;
    }
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn scale(v: &[f64], s: f64) -> Vec<f64> {
    v.iter().map(|x| x * s).collect()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Square matrix stored row-major; used for the covariance root `Q`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    dim: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn scalar(q: f64) -> Self {
        Self {
            dim: 1,
            data: vec![q],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::invalid("covariance root must be square"));
            }
            data.extend_from_slice(row);
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("covariance root has non-finite entries"));
        }
        Ok(Self { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.dim.max(1)).map(|r| r.to_vec()).collect()
    }

    pub fn is_zero(&self) -> bool {
        is_zero(&self.data)
    }

    /// `tr(Q Qᵀ)`, the squared Frobenius norm.
    pub fn trace_qqt(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum()
    }

    /// `Q Qᵀ`.
    pub fn qqt(&self) -> Matrix {
        let d = self.dim;
        let mut out = Matrix::zeros(d);
        for i in 0..d {
            for j in 0..d {
                out.data[i * d + j] = (0..d).map(|k| self.get(i, k) * self.get(j, k)).sum();
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|k| self.get(i, k) * v[k]).sum())
            .collect()
    }

    /// Embeds `self` as the leading block of a larger zero matrix.
    pub fn embed(&self, dim: usize) -> Matrix {
        let mut out = Matrix::zeros(dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                out.data[i * dim + j] = self.get(i, j);
            }
        }
        out
    }
}
