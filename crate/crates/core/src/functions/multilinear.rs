//! Multilinear extension of a monotone submodular set function, evaluated
//! by exact enumeration over all subsets.

use std::path::Path;

use nalgebra::DMatrix;
use rand::Rng;

use super::Utility;
use crate::error::{check_dim, Error, Result};
use crate::rng::seeded;

/// Largest ground set handled by exact enumeration.
pub const MAX_GROUND_SIZE: usize = 12;
const SET_FN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct MultilinearUtility {
    n: usize,
    /// `values[mask] = F(S)` where bit `i` of `mask` marks `i ∈ S`.
    values: Vec<f64>,
}

impl MultilinearUtility {
    /// Validates `F(∅) = 0`, monotonicity and submodularity exhaustively.
    pub fn new(n: usize, values: Vec<f64>) -> Result<Self> {
        if n > MAX_GROUND_SIZE {
            return Err(Error::Capacity(format!(
                "ground set of size {n} exceeds the enumeration limit {MAX_GROUND_SIZE}"
            )));
        }
        check_dim(1 << n, values.len())?;
        if values[0] != 0.0 {
            return Err(Error::Input(format!("F(∅) = {} must be 0", values[0])));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Input("set-function values must be finite".into()));
        }
        for mask in 0..values.len() {
            for j in 0..n {
                if mask >> j & 1 == 1 {
                    continue;
                }
                let gain = values[mask | 1 << j] - values[mask];
                if gain < -SET_FN_TOL {
                    return Err(Error::Input(format!(
                        "F is not monotone: adding {j} to set {mask:#b} loses {gain:e}"
                    )));
                }
                // A ⊂ B = A ∪ {k}: single-element steps imply the general case
                for k in 0..n {
                    if k == j || mask >> k & 1 == 1 {
                        continue;
                    }
                    let b = mask | 1 << k;
                    let gain_b = values[b | 1 << j] - values[b];
                    if gain_b > gain + SET_FN_TOL {
                        return Err(Error::Input(format!(
                            "F is not submodular: gain of {j} grows from {mask:#b} to {b:#b}"
                        )));
                    }
                }
            }
        }
        Ok(Self { n, values })
    }

    /// Reads a table of `<bitmask> <value>` lines (blank lines and `#`
    /// comments ignored). Every subset must appear exactly once.
    pub fn from_table_str(text: &str) -> Result<Self> {
        let mut entries: Vec<(usize, f64)> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let lineno = idx + 1;
            let mut parts = line.split_whitespace();
            let (Some(m), Some(v), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(Error::Parse {
                    line: lineno,
                    message: "expected `<bitmask> <value>`".into(),
                });
            };
            let mask = m.parse::<usize>().map_err(|e| Error::Parse {
                line: lineno,
                message: format!("bad bitmask {m:?}: {e}"),
            })?;
            let value = v.parse::<f64>().map_err(|e| Error::Parse {
                line: lineno,
                message: format!("bad value {v:?}: {e}"),
            })?;
            entries.push((mask, value));
        }
        let count = entries.len();
        if count == 0 || !count.is_power_of_two() {
            return Err(Error::Input(format!(
                "table has {count} rows; expected 2^n"
            )));
        }
        let n = count.trailing_zeros() as usize;
        if n > MAX_GROUND_SIZE {
            return Err(Error::Capacity(format!(
                "ground set of size {n} exceeds the enumeration limit {MAX_GROUND_SIZE}"
            )));
        }
        let mut values = vec![f64::NAN; count];
        for (mask, v) in entries {
            if mask >= count {
                return Err(Error::Input(format!(
                    "bitmask {mask} out of range for n = {n}"
                )));
            }
            if !values[mask].is_nan() {
                return Err(Error::Input(format!("bitmask {mask} listed twice")));
            }
            values[mask] = v;
        }
        Self::new(n, values)
    }

    pub fn from_table_file(path: &Path) -> Result<Self> {
        Self::from_table_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_table_string(&self) -> String {
        self.values
            .iter()
            .enumerate()
            .map(|(m, v)| format!("{m} {v:?}\n"))
            .collect()
    }

    pub fn ground_size(&self) -> usize {
        self.n
    }

    pub fn set_value(&self, mask: usize) -> f64 {
        self.values[mask]
    }

    /// `Π_{i∈S} x_i Π_{j∉S, j∉skip} (1 − x_j)`
    fn weight(&self, x: &[f64], mask: usize, skip: usize) -> f64 {
        let mut w = 1.0;
        for (i, xi) in x.iter().enumerate() {
            if skip >> i & 1 == 1 {
                continue;
            }
            w *= if mask >> i & 1 == 1 { *xi } else { 1.0 - xi };
        }
        w
    }
}

impl Utility for MultilinearUtility {
    fn dim(&self) -> usize {
        self.n
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.n, x.len())?;
        Ok((0..self.values.len())
            .map(|m| self.values[m] * self.weight(x, m, 0))
            .sum())
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.n, x.len())?;
        let mut g = vec![0.0; self.n];
        for (i, gi) in g.iter_mut().enumerate() {
            let bit = 1 << i;
            for m in (0..self.values.len()).filter(|m| m & bit == 0) {
                *gi += (self.values[m | bit] - self.values[m]) * self.weight(x, m, bit);
            }
        }
        Ok(g)
    }

    fn hessian(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        check_dim(self.n, x.len())?;
        let mut h = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for j in i + 1..self.n {
                let (bi, bj) = (1 << i, 1 << j);
                let skip = bi | bj;
                let mut s = 0.0;
                for m in (0..self.values.len()).filter(|m| m & skip == 0) {
                    let second = self.values[m | skip] - self.values[m | bi] - self.values[m | bj]
                        + self.values[m];
                    s += second * self.weight(x, m, skip);
                }
                h[(i, j)] = s;
                h[(j, i)] = s;
            }
        }
        Ok(h)
    }
}

/// Random weighted coverage function: item `i` covers each of `universe`
/// elements independently with probability `density`; elements carry
/// uniform `[0, 1]` weights. Coverage functions are monotone submodular.
pub fn generate_coverage(
    n: usize,
    universe: usize,
    density: f64,
    seed: u64,
) -> Result<MultilinearUtility> {
    if n > MAX_GROUND_SIZE {
        return Err(Error::Capacity(format!(
            "ground set of size {n} exceeds the enumeration limit {MAX_GROUND_SIZE}"
        )));
    }
    let mut rng = seeded(seed);
    let weights: Vec<f64> = (0..universe).map(|_| rng.random::<f64>()).collect();
    let covers: Vec<Vec<bool>> = (0..n)
        .map(|_| {
            (0..universe)
                .map(|_| rng.random::<f64>() < density)
                .collect()
        })
        .collect();
    let values = (0..1usize << n)
        .map(|mask| {
            (0..universe)
                .filter(|&e| (0..n).any(|i| mask >> i & 1 == 1 && covers[i][e]))
                .map(|e| weights[e])
                .sum()
        })
        .collect();
    MultilinearUtility::new(n, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coverage_two() -> MultilinearUtility {
        MultilinearUtility::new(2, vec![0.0, 1.0, 1.0, 1.0]).unwrap()
    }

    #[test]
    fn coverage_example() {
        let (v, g) = coverage_two().value_grad(&[0.5, 0.5]).unwrap();
        assert!((v - 0.75).abs() < 1e-15);
        assert_eq!(g, vec![0.5, 0.5]);
    }

    #[test]
    fn modular_example() {
        let f = MultilinearUtility::new(2, vec![0.0, 1.0, 1.0, 2.0]).unwrap();
        let (v, g) = f.value_grad(&[0.3, 0.9]).unwrap();
        assert!((v - 1.2).abs() < 1e-15);
        assert_eq!(g, vec![1.0, 1.0]);
    }

    #[test]
    fn full_set_value() {
        let f = generate_coverage(6, 20, 0.3, 4).unwrap();
        assert_eq!(f.value(&[1.0; 6]).unwrap(), f.set_value(63));
    }

    #[test]
    fn vertices_reproduce_set_values_exactly() {
        let f = generate_coverage(5, 15, 0.3, 8).unwrap();
        for mask in 0..32usize {
            let x: Vec<f64> = (0..5).map(|i| (mask >> i & 1) as f64).collect();
            assert_eq!(f.value(&x).unwrap(), f.set_value(mask));
        }
    }

    #[test]
    fn capacity_and_validation_errors() {
        assert!(matches!(
            MultilinearUtility::new(13, vec![0.0; 1 << 13]),
            Err(Error::Capacity(_))
        ));
        // supermodular: F({0,1}) = 3 > F({0}) + F({1})
        assert!(MultilinearUtility::new(2, vec![0.0, 1.0, 1.0, 3.0]).is_err());
        // not monotone
        assert!(MultilinearUtility::new(2, vec![0.0, 1.0, 1.0, 0.5]).is_err());
        assert!(MultilinearUtility::new(1, vec![0.5, 1.0]).is_err());
    }

    #[test]
    fn table_round_trip_and_parse_errors() {
        let f = generate_coverage(3, 10, 0.4, 2).unwrap();
        let text = f.to_table_string();
        assert_eq!(MultilinearUtility::from_table_str(&text).unwrap(), f);
        let err = MultilinearUtility::from_table_str("0 0\n1 x\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        assert!(MultilinearUtility::from_table_str("0 0\n1 1\n2 1\n").is_err());
    }
}
