//! Sampled property checks and constant estimation.

use nalgebra::SymmetricEigen;
use rand::Rng;

use super::{FunctionConstants, Utility};
use crate::domain::Domain;
use crate::numeric::{dist, norm};
use crate::rng::{stream, Purpose};

/// Inflation applied to sampled maxima, which under-estimate suprema.
pub const SAMPLED_SAFETY_FACTOR: f64 = 1.25;

#[derive(Debug, Clone, PartialEq)]
pub struct DrReport {
    pub dr_ok: bool,
    pub monotone_ok: bool,
    /// First pair `x ⪯ y` with `∇f(x) ⋡ ∇f(y)`.
    pub dr_witness: Option<(Vec<f64>, Vec<f64>)>,
    /// First point with a negative gradient coordinate.
    pub monotone_witness: Option<Vec<f64>>,
    /// Points at which evaluation failed.
    pub eval_failures: usize,
}

/// Draws `samples` pairs `x ⪯ y` in `domain` and checks the antitone
/// gradient and nonnegative gradient conditions up to `tol`.
pub fn check_dr_monotone(
    f: &dyn Utility,
    domain: &Domain,
    samples: usize,
    rng_seed: u64,
    tol: f64,
) -> DrReport {
    let mut rng = stream(rng_seed, Purpose::Sampling, 0);
    let mut report = DrReport {
        dr_ok: true,
        monotone_ok: true,
        dr_witness: None,
        monotone_witness: None,
        eval_failures: 0,
    };
    for _ in 0..samples.max(1) {
        let y = domain.sample_point(&mut rng);
        // shrinking toward the lower corner keeps x feasible and x ⪯ y
        let x: Vec<f64> = y
            .iter()
            .zip(domain.lower())
            .map(|(yi, l)| l + (yi - l) * rng.random::<f64>())
            .collect();
        let (gx, gy) = match (f.gradient(&x), f.gradient(&y)) {
            (Ok(a), Ok(b)) => (a, b),
            _ => {
                report.eval_failures += 1;
                continue;
            }
        };
        if report.dr_ok && gx.iter().zip(&gy).any(|(a, b)| *a < b - tol) {
            report.dr_ok = false;
            report.dr_witness = Some((x.clone(), y.clone()));
        }
        if report.monotone_ok {
            for (p, g) in [(&x, &gx), (&y, &gy)] {
                if g.iter().any(|v| *v < -tol) {
                    report.monotone_ok = false;
                    report.monotone_witness = Some(p.clone());
                    break;
                }
            }
        }
    }
    if report.eval_failures > 0 {
        report.dr_ok = false;
        report.monotone_ok = false;
    }
    report
}

/// Lipschitz and smoothness constants over `domain`.
///
/// Families with closed forms report them directly. Otherwise `β_f` and `L`
/// are the largest gradient norm and Hessian spectral norm over sampled
/// points and sampled vertices, inflated by [`SAMPLED_SAFETY_FACTOR`].
pub fn estimate_constants(
    f: &dyn Utility,
    domain: &Domain,
    samples: usize,
    rng_seed: u64,
) -> FunctionConstants {
    let mut rng = stream(rng_seed, Purpose::Sampling, 1);
    if let Some(c) = f.closed_form_constants(domain, samples, &mut rng) {
        return c;
    }
    let n = domain.dim();
    let mut points = vec![domain.lower().to_vec()];
    if let Ok(v) = domain.lmo(&vec![1.0; n]) {
        points.push(v);
    }
    for _ in 0..samples.max(1) {
        points.push(domain.sample_point(&mut rng));
        let dir: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        if let Ok(v) = domain.lmo(&dir) {
            points.push(v);
        }
    }
    let mut lip: f64 = 0.0;
    let mut smooth: f64 = 0.0;
    for p in &points {
        if let Ok(g) = f.gradient(p) {
            lip = lip.max(norm(&g));
        }
        if let Ok(h) = f.hessian(p) {
            let sym = (&h + h.transpose()) * 0.5;
            let s = SymmetricEigen::new(sym)
                .eigenvalues
                .iter()
                .fold(0.0f64, |m, v| m.max(v.abs()));
            smooth = smooth.max(s);
        }
    }
    FunctionConstants {
        lipschitz: SAMPLED_SAFETY_FACTOR * lip,
        smoothness: SAMPLED_SAFETY_FACTOR * smooth,
    }
}

/// Central finite-difference gradient.
pub fn fd_gradient(f: &dyn Utility, x: &[f64], step: f64) -> crate::Result<Vec<f64>> {
    let mut xp = x.to_vec();
    let mut g = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        xp[i] = x[i] + step;
        let fp = f.value(&xp)?;
        xp[i] = x[i] - step;
        let fm = f.value(&xp)?;
        xp[i] = x[i];
        g.push((fp - fm) / (2.0 * step));
    }
    Ok(g)
}

/// `‖∇f(x) − ∇_fd f(x)‖ / max(‖∇f(x)‖, 1e-8)`.
pub fn gradient_rel_error(f: &dyn Utility, x: &[f64], step: f64) -> crate::Result<f64> {
    let g = f.gradient(x)?;
    let fd = fd_gradient(f, x, step)?;
    Ok(dist(&g, &fd) / norm(&g).max(1e-8))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::{FnUtility, LogDetUtility, QuadraticUtility};
    use nalgebra::DMatrix;

    fn sample_quadratic() -> QuadraticUtility {
        QuadraticUtility::new(
            DMatrix::from_row_slice(2, 2, &[0.0, -1.0, -1.0, 0.0]),
            vec![1.0, 1.0],
        )
        .unwrap()
    }

    #[test]
    fn quadratic_passes() {
        let r = check_dr_monotone(&sample_quadratic(), &Domain::unit_box(2), 500, 1, 1e-9);
        assert!(r.dr_ok && r.monotone_ok);
    }

    #[test]
    fn positive_cross_term_fails() {
        let f = FnUtility::new(2, |x| x[0] * x[1], |x| vec![x[1], x[0]]);
        let r = check_dr_monotone(&f, &Domain::unit_box(2), 100, 1, 1e-9);
        assert!(!r.dr_ok);
        let (x, y) = r.dr_witness.unwrap();
        assert!(x.iter().zip(&y).all(|(a, b)| a <= b));
    }

    #[test]
    fn logdet_identity_kernel_passes() {
        let f = LogDetUtility::new(DMatrix::identity(3, 3) * 2.0).unwrap();
        let r = check_dr_monotone(&f, &Domain::unit_box(3), 500, 2, 1e-9);
        assert!(r.dr_ok && r.monotone_ok);
    }

    #[test]
    fn quadratic_constants_closed_form() {
        let c = estimate_constants(&sample_quadratic(), &Domain::unit_box(2), 10, 0);
        assert!((c.lipschitz - 2f64.sqrt()).abs() < 1e-12);
        assert!((c.smoothness - 1.0).abs() < 1e-12);
        let modular = QuadraticUtility::new(DMatrix::zeros(2, 2), vec![1.0, 2.0]).unwrap();
        let c = estimate_constants(&modular, &Domain::unit_box(2), 10, 0);
        assert_eq!(c.smoothness, 0.0);
    }

    #[test]
    fn sampled_constants_cover_observed_gradients() {
        let f = LogDetUtility::new(DMatrix::identity(2, 2) * 3.0).unwrap();
        let c = estimate_constants(&f, &Domain::unit_box(2), 50, 0);
        // ∇f(0) = (2, 2) is the largest gradient; sampled + inflated
        assert!(c.lipschitz >= 8f64.sqrt());
        // |f''| = (L−1)²/(1+(L−1)x)² ≤ 4 at x = 0
        assert!(c.smoothness >= 4.0);
    }
}
