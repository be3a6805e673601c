use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::numeric::norm;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DistributionKind {
    /// Independent uniforms on `[lo_i, hi_i]`.
    UniformBox,
    /// Always returns the mean.
    Deterministic,
}

/// The i.i.d. cost-vector sampler with nonnegative bounded support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintDistribution {
    kind: DistributionKind,
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl ConstraintDistribution {
    pub fn uniform_box(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        check_dim(lo.len(), hi.len())?;
        for (i, (l, h)) in lo.iter().zip(&hi).enumerate() {
            if !(l.is_finite() && h.is_finite() && 0.0 <= *l && l <= h) {
                return Err(Error::Input(format!(
                    "cost support coordinate {i} must satisfy 0 ≤ lo ≤ hi, got [{l}, {h}]"
                )));
            }
        }
        Ok(Self {
            kind: DistributionKind::UniformBox,
            lo,
            hi,
        })
    }

    /// Same interval on every coordinate.
    pub fn uniform_cube(n: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::uniform_box(vec![lo; n], vec![hi; n])
    }

    pub fn deterministic(p: Vec<f64>) -> Result<Self> {
        let mut d = Self::uniform_box(p.clone(), p)?;
        d.kind = DistributionKind::Deterministic;
        Ok(d)
    }

    pub fn kind(&self) -> DistributionKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn mean(&self) -> Vec<f64> {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(l, h)| 0.5 * (l + h))
            .collect()
    }

    /// Diagonal of the covariance matrix.
    pub fn variances(&self) -> Vec<f64> {
        match self.kind {
            DistributionKind::Deterministic => vec![0.0; self.dim()],
            DistributionKind::UniformBox => self
                .lo
                .iter()
                .zip(&self.hi)
                .map(|(l, h)| (h - l) * (h - l) / 12.0)
                .collect(),
        }
    }

    pub fn covariance_trace(&self) -> f64 {
        self.variances().iter().sum()
    }

    /// Support radius `β_p = ‖hi‖`.
    pub fn support_bound(&self) -> f64 {
        norm(&self.hi)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        match self.kind {
            DistributionKind::Deterministic => self.mean(),
            DistributionKind::UniformBox => self
                .lo
                .iter()
                .zip(&self.hi)
                .map(|(l, h)| if h > l { rng.random_range(*l..=*h) } else { *l })
                .collect(),
        }
    }
}
