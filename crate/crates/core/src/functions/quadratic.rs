//! Indefinite quadratics `f(x) = ½xᵀHx + hᵀx` with element-wise
//! non-positive `H`.

use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;

use super::{FunctionConstants, Utility};
use crate::domain::{Domain, DomainKind};
use crate::error::{check_dim, Error, Result};
use crate::numeric::{dot, norm};
use crate::rng::{seeded, StreamRng};

/// Largest box dimension for which gradient norms are maximized by
/// enumerating every vertex.
const VERTEX_ENUM_MAX_DIM: usize = 16;
const MONOTONE_TOL: f64 = 1e-12;

/// The quadratic part of a utility, shareable across rounds.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticForm {
    matrix: DMatrix<f64>,
    /// `½(H + Hᵀ)`, stored row-major for the gradient loop.
    sym_rows: Vec<f64>,
    n: usize,
}

impl QuadraticForm {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        let n = matrix.nrows();
        check_dim(n, matrix.ncols())?;
        for ((i, j), v) in matrix.iter().enumerate().map(|(k, v)| ((k % n, k / n), v)) {
            if !v.is_finite() || *v > 0.0 {
                return Err(Error::Input(format!(
                    "H[{i},{j}] = {v} must be finite and ≤ 0"
                )));
            }
        }
        let mut sym_rows = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                sym_rows[i * n + j] = 0.5 * (matrix[(i, j)] + matrix[(j, i)]);
            }
        }
        Ok(Self {
            matrix,
            sym_rows,
            n,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn sym(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.n, self.n, &self.sym_rows)
    }

    fn sym_row(&self, i: usize) -> &[f64] {
        &self.sym_rows[i * self.n..(i + 1) * self.n]
    }

    /// Spectral norm of `½(H + Hᵀ)`.
    pub fn spectral_norm(&self) -> f64 {
        SymmetricEigen::new(self.sym())
            .eigenvalues
            .iter()
            .fold(0.0, |m, v| m.max(v.abs()))
    }
}

#[derive(Debug, Clone)]
pub struct QuadraticUtility {
    form: Arc<QuadraticForm>,
    linear: Vec<f64>,
}

impl QuadraticUtility {
    /// Builds the utility without a monotonicity certificate.
    pub fn new(matrix: DMatrix<f64>, linear: Vec<f64>) -> Result<Self> {
        Self::with_form(Arc::new(QuadraticForm::new(matrix)?), linear)
    }

    /// Builds the utility and certifies `∇f ⪰ 0` over `domain`.
    pub fn new_monotone(matrix: DMatrix<f64>, linear: Vec<f64>, domain: &Domain) -> Result<Self> {
        let q = Self::new(matrix, linear)?;
        q.certify_monotone(domain)?;
        Ok(q)
    }

    pub fn with_form(form: Arc<QuadraticForm>, linear: Vec<f64>) -> Result<Self> {
        check_dim(form.dim(), linear.len())?;
        if linear.iter().any(|v| !v.is_finite()) {
            return Err(Error::Input("linear term must be finite".into()));
        }
        Ok(Self { form, linear })
    }

    pub fn form(&self) -> &Arc<QuadraticForm> {
        &self.form
    }

    pub fn linear(&self) -> &[f64] {
        &self.linear
    }

    /// Smallest value of `∇_i f` over the domain, per coordinate.
    ///
    /// The gradient is affine, so each coordinate's minimum is a linear
    /// program over the domain, solved exactly by the domain's oracle.
    pub fn min_gradient(&self, domain: &Domain) -> Result<Vec<f64>> {
        check_dim(self.form.dim(), domain.dim())?;
        (0..self.form.dim())
            .map(|i| {
                let row = self.form.sym_row(i);
                let neg: Vec<f64> = row.iter().map(|v| -v).collect();
                let worst = domain.lmo(&neg)?;
                Ok(self.linear[i] + dot(row, &worst))
            })
            .collect()
    }

    pub fn certify_monotone(&self, domain: &Domain) -> Result<()> {
        let mins = self.min_gradient(domain)?;
        if let Some((i, v)) = mins.iter().enumerate().find(|(_, v)| **v < -MONOTONE_TOL) {
            return Err(Error::Generation(format!(
                "quadratic is not monotone on the domain: min ∇_{i} f = {v:e}"
            )));
        }
        Ok(())
    }

    fn grad_into(&self, x: &[f64], out: &mut [f64]) {
        for (i, (o, l)) in out.iter_mut().zip(&self.linear).enumerate() {
            *o = dot(self.form.sym_row(i), x) + l;
        }
    }
}

impl Utility for QuadraticUtility {
    fn dim(&self) -> usize {
        self.form.dim()
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        let mut quad = 0.0;
        for i in 0..self.dim() {
            quad += x[i] * dot(self.form.sym_row(i), x);
        }
        Ok(0.5 * quad + dot(&self.linear, x))
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim(), x.len())?;
        let mut g = vec![0.0; self.dim()];
        self.grad_into(x, &mut g);
        Ok(g)
    }

    fn value_grad(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        check_dim(self.dim(), x.len())?;
        let mut g = vec![0.0; self.dim()];
        self.grad_into(x, &mut g);
        // ½xᵀSx + hᵀx = ½⟨x, Sx + h⟩ + ½⟨h, x⟩
        let v = 0.5 * dot(x, &g) + 0.5 * dot(&self.linear, x);
        Ok((v, g))
    }

    fn hessian(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        check_dim(self.dim(), x.len())?;
        Ok(self.form.sym())
    }

    fn closed_form_constants(
        &self,
        domain: &Domain,
        samples: usize,
        rng: &mut StreamRng,
    ) -> Option<FunctionConstants> {
        let n = self.dim();
        if domain.dim() != n {
            return None;
        }
        // ‖∇f‖ is convex in x, so its maximum sits at a vertex.
        let mut best: f64 = 0.0;
        let mut consider = |x: &[f64]| {
            let mut g = vec![0.0; n];
            self.grad_into(x, &mut g);
            best = best.max(norm(&g));
        };
        if domain.kind() == DomainKind::Box && n <= VERTEX_ENUM_MAX_DIM {
            for mask in 0u32..(1 << n) {
                let v: Vec<f64> = (0..n)
                    .map(|i| {
                        if mask >> i & 1 == 1 {
                            domain.upper()[i]
                        } else {
                            domain.lower()[i]
                        }
                    })
                    .collect();
                consider(&v);
            }
        } else {
            consider(domain.lower());
            if let Ok(v) = domain.lmo(&vec![1.0; n]) {
                consider(&v);
            }
            for _ in 0..samples {
                let dir: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
                if let Ok(v) = domain.lmo(&dir) {
                    consider(&v);
                }
            }
        }
        Some(FunctionConstants {
            lipschitz: best,
            smoothness: self.form.spectral_norm(),
        })
    }
}

/// Random quadratic with `H` drawn uniformly from `[lo, hi] ≤ 0` and
/// `h = −Hᵀ1`.
///
/// `H` is drawn symmetric (upper triangle sampled, then mirrored) so that
/// `∇f(x) = H(x − 1) ⪰ 0` on the unit box; an asymmetric draw with
/// `h = −Hᵀ1` is not monotone in general.
pub fn generate_quadratic(
    n: usize,
    seed: u64,
    entry_range: (f64, f64),
) -> Result<QuadraticUtility> {
    let (lo, hi) = entry_range;
    if !(lo <= hi && hi <= 0.0) {
        return Err(Error::Input(format!(
            "entry range [{lo}, {hi}] must satisfy lo ≤ hi ≤ 0"
        )));
    }
    let mut rng = seeded(seed);
    let mut h = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = if hi > lo {
                rng.random_range(lo..=hi)
            } else {
                lo
            };
            h[(i, j)] = v;
            h[(j, i)] = v;
        }
    }
    let linear: Vec<f64> = (0..n).map(|j| -h.column(j).sum()).collect();
    QuadraticUtility::new_monotone(h, linear, &Domain::unit_box(n))
}
