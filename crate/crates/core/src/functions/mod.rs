//! Monotone DR-submodular utility functions.
//!
//! A function is DR-submodular when its gradient is antitone
//! (`x ⪯ y ⇒ ∇f(x) ⪰ ∇f(y)`), which for twice-differentiable functions is an
//! element-wise non-positive Hessian. Three families are provided:
//! [`QuadraticUtility`], [`LogDetUtility`] and [`MultilinearUtility`].

mod checks;
mod logdet;
mod multilinear;
mod quadratic;

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::domain::Domain;
use crate::error::{check_dim, Result};
use crate::numeric::KahanSum;
use crate::rng::StreamRng;

pub use checks::{
    check_dr_monotone, estimate_constants, fd_gradient, gradient_rel_error, DrReport,
    SAMPLED_SAFETY_FACTOR,
};
pub use logdet::{generate_logdet, LogDetUtility, LOGDET_PIVOT_TOL};
pub use multilinear::{generate_coverage, MultilinearUtility, MAX_GROUND_SIZE};
pub use quadratic::{generate_quadratic, QuadraticForm, QuadraticUtility};

/// Lipschitz (`β_f`) and smoothness (`L`) constants of a utility over a domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FunctionConstants {
    pub lipschitz: f64,
    pub smoothness: f64,
}

impl FunctionConstants {
    /// Component-wise maximum, used to build family-wide envelopes.
    pub fn max(self, other: Self) -> Self {
        Self {
            lipschitz: self.lipschitz.max(other.lipschitz),
            smoothness: self.smoothness.max(other.smoothness),
        }
    }
}

/// A differentiable utility `f: ℝⁿ → ℝ`.
///
/// Implementations are immutable and safe to evaluate concurrently.
pub trait Utility: Send + Sync {
    fn dim(&self) -> usize;

    fn value(&self, x: &[f64]) -> Result<f64>;

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>>;

    fn value_grad(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        Ok((self.value(x)?, self.gradient(x)?))
    }

    /// Hessian; defaults to central differences of the gradient.
    fn hessian(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let n = self.dim();
        check_dim(n, x.len())?;
        let h = 1e-6;
        let mut out = DMatrix::zeros(n, n);
        let mut xp = x.to_vec();
        for j in 0..n {
            xp[j] = x[j] + h;
            let gp = self.gradient(&xp)?;
            xp[j] = x[j] - h;
            let gm = self.gradient(&xp)?;
            xp[j] = x[j];
            for i in 0..n {
                out[(i, j)] = (gp[i] - gm[i]) / (2.0 * h);
            }
        }
        Ok(out)
    }

    /// Exact constants when the family admits them.
    fn closed_form_constants(
        &self,
        _domain: &Domain,
        _samples: usize,
        _rng: &mut StreamRng,
    ) -> Option<FunctionConstants> {
        None
    }
}

impl fmt::Debug for dyn Utility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Utility(dim={})", self.dim())
    }
}

type ValueFn = dyn Fn(&[f64]) -> f64 + Send + Sync;
type GradFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;

/// A utility backed by closures, for ad-hoc objectives in tests and
/// custom scenarios. No DR or monotonicity guarantee is implied.
pub struct FnUtility {
    dim: usize,
    value: Box<ValueFn>,
    grad: Box<GradFn>,
}

impl FnUtility {
    pub fn new<V, G>(dim: usize, value: V, grad: G) -> Self
    where
        V: Fn(&[f64]) -> f64 + Send + Sync + 'static,
        G: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        Self {
            dim,
            value: Box::new(value),
            grad: Box::new(grad),
        }
    }
}

impl Utility for FnUtility {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim, x.len())?;
        Ok((self.value)(x))
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim, x.len())?;
        Ok((self.grad)(x))
    }
}

/// Uniform average of several utilities of the same dimension.
pub struct AverageUtility {
    dim: usize,
    parts: Vec<Arc<dyn Utility>>,
}

impl AverageUtility {
    pub fn new(parts: Vec<Arc<dyn Utility>>) -> Result<Self> {
        let Some(first) = parts.first() else {
            return Err(crate::Error::Input("average of zero utilities".into()));
        };
        let dim = first.dim();
        for p in &parts {
            check_dim(dim, p.dim())?;
        }
        Ok(Self { dim, parts })
    }
}

impl Utility for AverageUtility {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        let mut s = KahanSum::new();
        for p in &self.parts {
            s.add(p.value(x)?);
        }
        Ok(s.value() / self.parts.len() as f64)
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut acc = vec![KahanSum::new(); self.dim];
        for p in &self.parts {
            for (a, g) in acc.iter_mut().zip(p.gradient(x)?) {
                a.add(g);
            }
        }
        let k = self.parts.len() as f64;
        Ok(acc.into_iter().map(|a| a.value() / k).collect())
    }
}
