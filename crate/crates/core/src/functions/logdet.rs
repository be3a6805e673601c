//! Log-determinant utility `f(x) = log det(diag(x)(L − I) + I)`.

use nalgebra::{DMatrix, SymmetricEigen, QR};
use rand::Rng;
use rand_distr::StandardNormal;

use super::{check_dr_monotone, Utility};
use crate::domain::Domain;
use crate::error::{check_dim, Error, Result};
use crate::rng::seeded;

/// Pivot tolerance below which a factorization is treated as singular.
pub const LOGDET_PIVOT_TOL: f64 = 1e-12;
const GENERATION_RETRIES: u64 = 10;
const ORTHO_RANK_TOL: f64 = 1e-8;
const GENERATION_CHECK_PAIRS: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct LogDetUtility {
    kernel: DMatrix<f64>,
    shifted: DMatrix<f64>,
}

impl LogDetUtility {
    /// `kernel` must be symmetric positive semidefinite.
    pub fn new(kernel: DMatrix<f64>) -> Result<Self> {
        let n = kernel.nrows();
        check_dim(n, kernel.ncols())?;
        let scale = kernel.amax().max(1.0);
        for i in 0..n {
            for j in 0..i {
                if (kernel[(i, j)] - kernel[(j, i)]).abs() > 1e-9 * scale {
                    return Err(Error::Input(format!("kernel not symmetric at ({i},{j})")));
                }
            }
        }
        let min_eig = SymmetricEigen::new(kernel.clone()).eigenvalues.min();
        if min_eig < -1e-10 * scale {
            return Err(Error::Input(format!(
                "kernel is not positive semidefinite (min eigenvalue {min_eig:e})"
            )));
        }
        let shifted = &kernel - DMatrix::identity(n, n);
        Ok(Self { kernel, shifted })
    }

    pub fn kernel(&self) -> &DMatrix<f64> {
        &self.kernel
    }

    fn system(&self, x: &[f64]) -> DMatrix<f64> {
        let n = x.len();
        let mut a = DMatrix::identity(n, n);
        for i in 0..n {
            for j in 0..n {
                a[(i, j)] += x[i] * self.shifted[(i, j)];
            }
        }
        a
    }

    /// `A(x)⁻¹` via LU, rejecting pivots below tolerance.
    fn inverse(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let lu = self.system(x).lu();
        let u = lu.u();
        let pivot = u
            .diagonal()
            .iter()
            .fold(f64::INFINITY, |m, v| m.min(v.abs()));
        if pivot < LOGDET_PIVOT_TOL {
            return Err(Error::Singular { pivot });
        }
        lu.try_inverse().ok_or(Error::Singular { pivot: 0.0 })
    }

    /// `M = (L − I)A(x)⁻¹`; the gradient is its diagonal.
    fn sensitivity(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        Ok(&self.shifted * self.inverse(x)?)
    }
}

/// Cholesky log-determinant of a symmetric matrix.
fn chol_logdet(mut a: DMatrix<f64>) -> Result<f64> {
    let n = a.nrows();
    let mut logdet = 0.0;
    for j in 0..n {
        let mut d = a[(j, j)];
        for k in 0..j {
            d -= a[(j, k)] * a[(j, k)];
        }
        if d < LOGDET_PIVOT_TOL {
            return Err(Error::Singular { pivot: d });
        }
        let ljj = d.sqrt();
        a[(j, j)] = ljj;
        logdet += 2.0 * ljj.ln();
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= a[(i, k)] * a[(j, k)];
            }
            a[(i, j)] = s / ljj;
        }
    }
    Ok(logdet)
}

impl Utility for LogDetUtility {
    fn dim(&self) -> usize {
        self.kernel.nrows()
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        let n = x.len();
        if x.iter().all(|v| *v >= 0.0) {
            // A(x) is similar to I − D + D^½ L D^½, which is symmetric.
            let s: Vec<f64> = x.iter().map(|v| v.sqrt()).collect();
            let mut m = DMatrix::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    m[(i, j)] = s[i] * self.kernel[(i, j)] * s[j];
                }
                m[(i, i)] += 1.0 - x[i];
            }
            chol_logdet(m)
        } else {
            let det = self.system(x).lu().determinant();
            if det <= LOGDET_PIVOT_TOL {
                return Err(Error::Singular { pivot: det });
            }
            Ok(det.ln())
        }
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim(), x.len())?;
        let m = self.sensitivity(x)?;
        Ok(m.diagonal().iter().copied().collect())
    }

    fn hessian(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        check_dim(self.dim(), x.len())?;
        let m = self.sensitivity(x)?;
        let n = x.len();
        Ok(DMatrix::from_fn(n, n, |i, j| -m[(i, j)] * m[(j, i)]))
    }
}

/// Random kernel `L = Q D Qᵀ` with `Q` orthonormalized from a standard
/// normal matrix and `D` uniform in `eig_range`.
pub fn generate_logdet(n: usize, seed: u64, eig_range: (f64, f64)) -> Result<LogDetUtility> {
    let (lo, hi) = eig_range;
    if !(1.0 <= lo && lo <= hi) {
        return Err(Error::Input(format!(
            "eigenvalue range [{lo}, {hi}] must satisfy 1 ≤ lo ≤ hi"
        )));
    }
    if lo == hi {
        return LogDetUtility::new(DMatrix::identity(n, n) * lo);
    }
    let mut rng = seeded(seed);
    for _ in 0..GENERATION_RETRIES {
        let g = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let qr = QR::new(g);
        let r_min = qr
            .r()
            .diagonal()
            .iter()
            .fold(f64::INFINITY, |m, v| m.min(v.abs()));
        if r_min < ORTHO_RANK_TOL {
            continue;
        }
        let q = qr.q();
        let eig: Vec<f64> = (0..n).map(|_| rng.random_range(lo..=hi)).collect();
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(eig));
        let l = &q * d * q.transpose();
        let l = (&l + l.transpose()) * 0.5;
        let f = LogDetUtility::new(l)?;
        let report =
            check_dr_monotone(&f, &Domain::unit_box(n), GENERATION_CHECK_PAIRS, seed, 1e-9);
        if !report.monotone_ok || !report.dr_ok {
            return Err(Error::Generation(
                "generated log-det kernel failed the DR/monotone spot check".into(),
            ));
        }
        return Ok(f);
    }
    Err(Error::Generation(format!(
        "orthonormalization degenerate after {GENERATION_RETRIES} attempts"
    )))
}
