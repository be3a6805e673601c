//! Brute-force oracles for small domains, independent of the library's
//! solvers.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use olfw_core::Domain;

/// All constraints of `domain` as rows `a·x ≤ b`.
pub fn rows(domain: &Domain) -> Vec<(Vec<f64>, f64)> {
    let n = domain.dim();
    let mut out = Vec::new();
    for i in 0..n {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        out.push((e.clone(), domain.upper()[i]));
        e[i] = -1.0;
        out.push((e, -domain.lower()[i]));
    }
    if let Some(m) = domain.cap() {
        out.push((vec![1.0; n], m));
    }
    for h in domain.halfspaces() {
        out.push((h.normal.clone(), h.bound));
    }
    out
}

fn feasible(rows: &[(Vec<f64>, f64)], x: &[f64], tol: f64) -> bool {
    rows.iter()
        .all(|(a, b)| a.iter().zip(x).map(|(u, v)| u * v).sum::<f64>() <= b + tol)
}

fn combinations(m: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if m < k {
        return vec![];
    }
    let mut out = combinations(m - 1, k);
    for mut c in combinations(m - 1, k - 1) {
        c.push(m - 1);
        out.push(c);
    }
    out
}

/// Every vertex of the polytope, by solving each `n`-subset of active rows.
pub fn vertices(domain: &Domain) -> Vec<Vec<f64>> {
    let n = domain.dim();
    let rs = rows(domain);
    let mut out: Vec<Vec<f64>> = Vec::new();
    for c in combinations(rs.len(), n) {
        let a = DMatrix::from_fn(n, n, |i, j| rs[c[i]].0[j]);
        let b = DVector::from_fn(n, |i, _| rs[c[i]].1);
        if let Some(x) = a.lu().solve(&b) {
            let x: Vec<f64> = x.iter().copied().collect();
            if x.iter().all(|v| v.is_finite()) && feasible(&rs, &x, 1e-9) {
                out.push(x);
            }
        }
    }
    out
}

/// Exact LP maximum of `⟨c, x⟩` over the domain by vertex enumeration.
pub fn lp_max(domain: &Domain, c: &[f64]) -> f64 {
    vertices(domain)
        .iter()
        .map(|v| v.iter().zip(c).map(|(a, b)| a * b).sum::<f64>())
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Maximum of `⟨c, x⟩` over a regular grid inside the domain.
pub fn grid_max(domain: &Domain, c: &[f64], step: f64) -> f64 {
    let n = domain.dim();
    let counts: Vec<usize> = (0..n)
        .map(|i| ((domain.upper()[i] - domain.lower()[i]) / step).round() as usize + 1)
        .collect();
    let total: usize = counts.iter().product();
    let mut best = f64::NEG_INFINITY;
    for mut idx in 0..total {
        let mut x = vec![0.0; n];
        for i in 0..n {
            let j = idx % counts[i];
            idx /= counts[i];
            x[i] = (domain.lower()[i] + j as f64 * step).min(domain.upper()[i]);
        }
        if domain.contains(&x, 1e-12) {
            best = best.max(x.iter().zip(c).map(|(a, b)| a * b).sum());
        }
    }
    best
}

/// Euclidean projection onto `{l ⪯ x ⪯ u, Σx ≤ m}` (or the plain box when
/// `cap` is `None`) by enumerating KKT active sets.
pub fn project_capped(lower: &[f64], upper: &[f64], cap: Option<f64>, y: &[f64]) -> Vec<f64> {
    let n = y.len();
    let mut best: Option<(f64, Vec<f64>)> = None;
    let patterns = 3usize.pow(n as u32);
    for cap_active in [false, true] {
        if cap_active && cap.is_none() {
            continue;
        }
        for mut p in 0..patterns {
            let mut x = vec![0.0; n];
            let mut free = Vec::new();
            for i in 0..n {
                match p % 3 {
                    0 => x[i] = lower[i],
                    1 => x[i] = upper[i],
                    _ => free.push(i),
                }
                p /= 3;
            }
            let mut tau = 0.0;
            if cap_active {
                if free.is_empty() {
                    continue;
                }
                let fixed: f64 = (0..n).filter(|i| !free.contains(i)).map(|i| x[i]).sum();
                let free_sum: f64 = free.iter().map(|&i| y[i]).sum();
                tau = (free_sum + fixed - cap.unwrap()) / free.len() as f64;
                if tau < 0.0 {
                    continue;
                }
            }
            for &i in &free {
                x[i] = y[i] - tau;
            }
            let in_box = (0..n).all(|i| x[i] >= lower[i] - 1e-12 && x[i] <= upper[i] + 1e-12);
            let in_cap = cap.is_none_or(|m| x.iter().sum::<f64>() <= m + 1e-12);
            if !(in_box && in_cap) {
                continue;
            }
            let d: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
            if best.as_ref().is_none_or(|(bd, _)| d < *bd) {
                best = Some((d, x));
            }
        }
    }
    best.expect("projection exists").1
}
