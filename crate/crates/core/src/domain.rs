//! Feasible-set geometry.
//!
//! Three shapes cover every scenario: a box `lower ⪯ x ⪯ upper`, a box with
//! a coordinate-sum cap `Σx ≤ M`, and a box cut by at most two halfspaces
//! (the benchmark set `{x ∈ 𝒳 : ⟨p, x⟩ ≤ B/T}`, possibly carrying the cap as
//! a second row).

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::numeric::{dist, dot};

const CAP_BISECTION_TOL: f64 = 1e-10;
const CAP_BISECTION_MAX_ITERS: usize = 200;
const SIMPLEX_EPS: f64 = 1e-12;
const SIMPLEX_MAX_PIVOTS: usize = 100_000;
/// Largest dimension for which the capped-box diameter is found by
/// enumerating vertex pairs.
const DIAMETER_ENUM_MAX_DIM: usize = 10;
const MAX_HALFSPACES: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DomainKind {
    Box,
    BoxCap,
    BoxHalfspaces,
}

/// The constraint `⟨normal, x⟩ ≤ bound`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Halfspace {
    pub normal: Vec<f64>,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    kind: DomainKind,
    lower: Vec<f64>,
    upper: Vec<f64>,
    cap: Option<f64>,
    halfspaces: Vec<Halfspace>,
}

impl Domain {
    pub fn new_box(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        check_dim(lower.len(), upper.len())?;
        if lower.is_empty() {
            return Err(Error::Input("domain must have dimension ≥ 1".into()));
        }
        for (i, (l, u)) in lower.iter().zip(&upper).enumerate() {
            if !l.is_finite() || !u.is_finite() || l > u {
                return Err(Error::Input(format!(
                    "coordinate {i}: need finite lower ≤ upper, got [{l}, {u}]"
                )));
            }
        }
        Ok(Self {
            kind: DomainKind::Box,
            lower,
            upper,
            cap: None,
            halfspaces: Vec::new(),
        })
    }

    /// `[0, 1]^n`
    pub fn unit_box(n: usize) -> Self {
        Self::new_box(vec![0.0; n], vec![1.0; n]).expect("unit box is valid")
    }

    pub fn box_cap(lower: Vec<f64>, upper: Vec<f64>, cap: f64) -> Result<Self> {
        let mut d = Self::new_box(lower, upper)?;
        let floor: f64 = d.lower.iter().sum();
        if !cap.is_finite() || cap < floor {
            return Err(Error::Input(format!(
                "cap {cap} is below the sum of lower bounds {floor}"
            )));
        }
        d.kind = DomainKind::BoxCap;
        d.cap = Some(cap);
        Ok(d)
    }

    /// Intersects with `⟨normal, x⟩ ≤ bound`. A cap, if present, becomes an
    /// all-ones halfspace row.
    pub fn with_halfspace(&self, normal: Vec<f64>, bound: f64) -> Result<Self> {
        check_dim(self.dim(), normal.len())?;
        if normal.iter().any(|a| !a.is_finite()) || bound.is_nan() {
            return Err(Error::Input("halfspace must be finite".into()));
        }
        let mut halfspaces = self.halfspaces.clone();
        if let Some(m) = self.cap {
            halfspaces.push(Halfspace {
                normal: vec![1.0; self.dim()],
                bound: m,
            });
        }
        halfspaces.push(Halfspace { normal, bound });
        if halfspaces.len() > MAX_HALFSPACES {
            return Err(Error::Unsupported(format!(
                "at most {MAX_HALFSPACES} halfspace rows are supported"
            )));
        }
        for h in &halfspaces {
            if dot(&h.normal, &self.lower) > h.bound + 1e-12 {
                return Err(Error::Input(
                    "halfspace excludes the lower corner; domain infeasible".into(),
                ));
            }
        }
        Ok(Self {
            kind: DomainKind::BoxHalfspaces,
            lower: self.lower.clone(),
            upper: self.upper.clone(),
            cap: None,
            halfspaces,
        })
    }

    pub fn kind(&self) -> DomainKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn cap(&self) -> Option<f64> {
        self.cap
    }

    pub fn halfspaces(&self) -> &[Halfspace] {
        &self.halfspaces
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        if x.len() != self.dim() {
            return false;
        }
        let in_box = x
            .iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(xi, (l, u))| *xi >= l - tol && *xi <= u + tol);
        if !in_box {
            return false;
        }
        if let Some(m) = self.cap {
            if x.iter().sum::<f64>() > m + tol {
                return false;
            }
        }
        self.halfspaces
            .iter()
            .all(|h| dot(&h.normal, x) <= h.bound + tol)
    }

    /// Euclidean projection. Not available for halfspace-cut boxes.
    pub fn project(&self, y: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim(), y.len())?;
        match self.kind {
            DomainKind::Box => Ok(self.clamp_shifted(y, 0.0)),
            DomainKind::BoxCap => Ok(self.project_cap(y)),
            DomainKind::BoxHalfspaces => Err(Error::Unsupported(
                "projection onto a box with halfspaces".into(),
            )),
        }
    }

    fn clamp_shifted(&self, y: &[f64], tau: f64) -> Vec<f64> {
        y.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(yi, (l, u))| (yi - tau).clamp(*l, *u))
            .collect()
    }

    fn project_cap(&self, y: &[f64]) -> Vec<f64> {
        let m = self.cap.expect("BoxCap has a cap");
        let clamped = self.clamp_shifted(y, 0.0);
        if clamped.iter().sum::<f64>() <= m {
            return clamped;
        }
        // Σ clamp(y − τ) is nonincreasing in τ; at τ = max(y − lower) every
        // coordinate sits at its lower bound, which satisfies the cap.
        let mut lo = 0.0;
        let mut hi = y
            .iter()
            .zip(&self.lower)
            .map(|(yi, l)| yi - l)
            .fold(0.0, f64::max);
        for _ in 0..CAP_BISECTION_MAX_ITERS {
            if hi - lo <= CAP_BISECTION_TOL {
                break;
            }
            let mid = 0.5 * (lo + hi);
            let s: f64 = self.clamp_shifted(y, mid).iter().sum();
            if s > m {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        self.clamp_shifted(y, hi)
    }

    /// A maximizer of `⟨direction, x⟩` over the domain.
    pub fn lmo(&self, direction: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim(), direction.len())?;
        match self.kind {
            DomainKind::Box => Ok(direction
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .map(|(c, (l, u))| if *c > 0.0 { *u } else { *l })
                .collect()),
            DomainKind::BoxCap => {
                let m = self.cap.expect("BoxCap has a cap");
                let weights = vec![1.0; self.dim()];
                let budget = m - self.lower.iter().sum::<f64>();
                Ok(self.knapsack(direction, &weights, budget))
            }
            DomainKind::BoxHalfspaces => match self.halfspaces.as_slice() {
                [h] => {
                    if h.normal.iter().any(|a| *a < 0.0) {
                        return Err(Error::Unsupported(
                            "halfspace with a negative normal component".into(),
                        ));
                    }
                    let budget = h.bound - dot(&h.normal, &self.lower);
                    Ok(self.knapsack(direction, &h.normal, budget))
                }
                rows => self.simplex_lmo(direction, rows),
            },
        }
    }

    /// Fractional knapsack over the box with a single nonnegative row.
    fn knapsack(&self, direction: &[f64], weights: &[f64], budget: f64) -> Vec<f64> {
        let mut x = self.lower.clone();
        let mut remaining = budget.max(0.0);
        let mut ranked = Vec::new();
        for (i, &c) in direction.iter().enumerate() {
            if c <= 0.0 {
                continue;
            }
            if weights[i] == 0.0 {
                x[i] = self.upper[i];
            } else {
                ranked.push(i);
            }
        }
        // stable sort keeps lower indices first among equal ratios
        ranked.sort_by(|&a, &b| {
            let ra = direction[a] / weights[a];
            let rb = direction[b] / weights[b];
            rb.partial_cmp(&ra).unwrap_or(std::cmp::Ordering::Equal)
        });
        for i in ranked {
            if remaining <= 0.0 {
                break;
            }
            let width = self.upper[i] - self.lower[i];
            let need = weights[i] * width;
            if need <= remaining {
                x[i] = self.upper[i];
                remaining -= need;
            } else {
                x[i] = self.lower[i] + remaining / weights[i];
                remaining = 0.0;
            }
        }
        x
    }

    /// Dense tableau simplex with Bland's rule for the box cut by several
    /// halfspaces. Works in shifted coordinates `y = x − lower`.
    fn simplex_lmo(&self, direction: &[f64], rows: &[Halfspace]) -> Result<Vec<f64>> {
        let vars: Vec<usize> = (0..self.dim())
            .filter(|&i| self.upper[i] > self.lower[i])
            .collect();
        let nv = vars.len();
        let nr = rows.len() + nv;
        let ncols = nv + nr;
        let width = ncols + 1;
        let mut tab = vec![0.0; nr * width];
        for (r, h) in rows.iter().enumerate() {
            for (c, &i) in vars.iter().enumerate() {
                tab[r * width + c] = h.normal[i];
            }
            let rhs = h.bound - dot(&h.normal, &self.lower);
            if rhs < -1e-12 {
                return Err(Error::Input("halfspace domain is infeasible".into()));
            }
            tab[r * width + ncols] = rhs.max(0.0);
        }
        for (c, &i) in vars.iter().enumerate() {
            let r = rows.len() + c;
            tab[r * width + c] = 1.0;
            tab[r * width + ncols] = self.upper[i] - self.lower[i];
        }
        for r in 0..nr {
            tab[r * width + nv + r] = 1.0;
        }
        // reduced costs for maximization
        let mut rc = vec![0.0; ncols];
        for (c, &i) in vars.iter().enumerate() {
            rc[c] = direction[i];
        }
        let mut basis: Vec<usize> = (nv..ncols).collect();

        for _ in 0..SIMPLEX_MAX_PIVOTS {
            let Some(enter) = (0..ncols).find(|&j| rc[j] > SIMPLEX_EPS) else {
                let mut x = self.lower.clone();
                for (r, &b) in basis.iter().enumerate() {
                    if b < nv {
                        let i = vars[b];
                        x[i] = (self.lower[i] + tab[r * width + ncols]).min(self.upper[i]);
                    }
                }
                return Ok(x);
            };
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..nr {
                let a = tab[r * width + enter];
                if a > SIMPLEX_EPS {
                    let ratio = tab[r * width + ncols] / a;
                    leave = match leave {
                        None => Some((r, ratio)),
                        Some((lr, lratio)) => {
                            if ratio < lratio - SIMPLEX_EPS
                                || (ratio <= lratio + SIMPLEX_EPS && basis[r] < basis[lr])
                            {
                                Some((r, ratio))
                            } else {
                                Some((lr, lratio))
                            }
                        }
                    };
                }
            }
            let Some((pr, _)) = leave else {
                return Err(Error::Input("linear program is unbounded".into()));
            };
            let piv = tab[pr * width + enter];
            for c in 0..width {
                tab[pr * width + c] /= piv;
            }
            for r in 0..nr {
                if r == pr {
                    continue;
                }
                let f = tab[r * width + enter];
                if f != 0.0 {
                    for c in 0..width {
                        tab[r * width + c] -= f * tab[pr * width + c];
                    }
                }
            }
            let f = rc[enter];
            for c in 0..ncols {
                rc[c] -= f * tab[pr * width + c];
            }
            basis[pr] = enter;
        }
        Err(Error::Input("simplex pivot limit reached".into()))
    }

    /// Euclidean diameter.
    ///
    /// Exact for boxes, for capped boxes with zero lower bound and a common
    /// upper bound, and for any capped box with at most 10 coordinates. Other
    /// capped boxes and halfspace-cut boxes report a valid upper bound.
    pub fn diameter(&self) -> f64 {
        let box_diam = dist(&self.lower, &self.upper);
        match self.kind {
            DomainKind::Box | DomainKind::BoxHalfspaces => box_diam,
            DomainKind::BoxCap => {
                if let Some(d) = self.uniform_cap_diameter() {
                    return d;
                }
                if self.dim() <= DIAMETER_ENUM_MAX_DIM {
                    let verts = self.cap_vertices();
                    let mut best: f64 = 0.0;
                    for (i, a) in verts.iter().enumerate() {
                        for b in &verts[i + 1..] {
                            best = best.max(dist(a, b));
                        }
                    }
                    return best;
                }
                box_diam.min(std::f64::consts::SQRT_2 * self.norm_bound())
            }
        }
    }

    fn uniform_cap_diameter(&self) -> Option<f64> {
        let m = self.cap?;
        let u = self.upper[0];
        if self.lower.iter().any(|l| *l != 0.0) || self.upper.iter().any(|v| *v != u) {
            return None;
        }
        let n = self.dim() as f64;
        if u == 0.0 {
            return Some(0.0);
        }
        let units = m / u;
        if units >= n {
            return Some(dist(&self.lower, &self.upper));
        }
        let full = units.floor();
        let frac = units - full;
        let used = full + if frac > 0.0 { 1.0 } else { 0.0 };
        // two disjoint supports, each holding `full` saturated coordinates
        // plus one fractional coordinate
        if 2.0 * used <= n {
            Some(u * (2.0 * full + 2.0 * frac * frac).sqrt())
        } else {
            None
        }
    }

    fn cap_vertices(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        let m = self.cap.expect("BoxCap has a cap");
        let mut out = Vec::new();
        for mask in 0u32..(1u32 << n) {
            let x: Vec<f64> = (0..n)
                .map(|i| {
                    if mask >> i & 1 == 1 {
                        self.upper[i]
                    } else {
                        self.lower[i]
                    }
                })
                .collect();
            let s: f64 = x.iter().sum();
            if s <= m + 1e-12 {
                out.push(x.clone());
            }
            for i in 0..n {
                let rest = s - x[i];
                let xi = m - rest;
                if xi > self.lower[i] && xi < self.upper[i] && mask >> i & 1 == 0 {
                    let mut v = x.clone();
                    v[i] = xi;
                    out.push(v);
                }
            }
        }
        out
    }

    /// Upper bound on `max_{x∈d} ‖x‖`; exact for boxes and for unit capped
    /// boxes with an integral cap.
    pub fn norm_bound(&self) -> f64 {
        let corner: Vec<f64> = self
            .lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| l.abs().max(u.abs()))
            .collect();
        let box_sq: f64 = corner.iter().map(|c| c * c).sum();
        match (self.kind, self.cap) {
            (DomainKind::BoxCap, Some(m)) if self.lower.iter().all(|l| *l >= 0.0) => {
                let umax = self.upper.iter().cloned().fold(0.0, f64::max);
                let total: f64 = self.upper.iter().sum();
                box_sq.min(umax * m.min(total)).sqrt()
            }
            _ => box_sq.sqrt(),
        }
    }

    /// A random feasible point: uniform in the box, then shrunk toward the
    /// lower corner until every cap/halfspace row holds.
    pub fn sample_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut x: Vec<f64> = self
            .lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| if u > l { rng.random_range(*l..=*u) } else { *l })
            .collect();
        let mut scale: f64 = 1.0;
        let mut rows: Vec<(Vec<f64>, f64)> = self
            .halfspaces
            .iter()
            .map(|h| (h.normal.clone(), h.bound))
            .collect();
        if let Some(m) = self.cap {
            rows.push((vec![1.0; self.dim()], m));
        }
        let delta: Vec<f64> = x.iter().zip(&self.lower).map(|(a, l)| a - l).collect();
        for (a, b) in &rows {
            let used = dot(a, &delta);
            let room = b - dot(a, &self.lower);
            if used > room {
                scale = scale.min(room / used);
            }
        }
        if scale < 1.0 {
            for (xi, (l, d)) in x.iter_mut().zip(self.lower.iter().zip(&delta)) {
                *xi = l + scale * d;
            }
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    fn assert_vec_close(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() <= tol, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn box_projection_clamps() {
        let d = Domain::unit_box(2);
        assert_eq!(d.project(&[1.5, -0.2]).unwrap(), vec![1.0, 0.0]);
    }

    #[test]
    fn cap_projection_active_and_inactive() {
        let d = Domain::box_cap(vec![0.0; 2], vec![1.0; 2], 1.0).unwrap();
        assert_vec_close(&d.project(&[1.0, 1.0]).unwrap(), &[0.5, 0.5], 1e-9);
        let d3 = Domain::box_cap(vec![0.0; 3], vec![1.0; 3], 2.0).unwrap();
        assert_eq!(d3.project(&[0.1, 0.2, 0.3]).unwrap(), vec![0.1, 0.2, 0.3]);
    }

    #[test]
    fn cap_projection_matches_grid_search() {
        let d = Domain::box_cap(vec![0.0; 2], vec![1.0; 2], 1.0).unwrap();
        let y = [0.9, 0.4];
        let p = d.project(&y).unwrap();
        let mut best = (f64::INFINITY, [0.0, 0.0]);
        let steps = 1000;
        for i in 0..=steps {
            for j in 0..=steps {
                let x = [i as f64 / steps as f64, j as f64 / steps as f64];
                if x[0] + x[1] <= 1.0 + 1e-12 {
                    let dd = dist(&x, &y);
                    if dd < best.0 {
                        best = (dd, x);
                    }
                }
            }
        }
        assert!(dist(&p, &best.1) < 2e-3);
        assert!((dist(&p, &y) - best.0).abs() < 1e-6);
    }

    #[test]
    fn halfspace_projection_unsupported() {
        let d = Domain::unit_box(2)
            .with_halfspace(vec![1.0, 2.0], 1.0)
            .unwrap();
        assert!(matches!(d.project(&[0.0, 0.0]), Err(Error::Unsupported(_))));
    }

    #[test]
    fn lmo_sign_rule_on_box() {
        let d = Domain::unit_box(2);
        assert_eq!(d.lmo(&[2.0, -1.0]).unwrap(), vec![1.0, 0.0]);
    }

    #[test]
    fn lmo_halfspace_knapsack_examples() {
        let d = Domain::unit_box(2)
            .with_halfspace(vec![1.0, 2.0], 1.0)
            .unwrap();
        let v = d.lmo(&[1.0, 3.0]).unwrap();
        assert_vec_close(&v, &[0.0, 0.5], 1e-12);
        assert!((dot(&v, &[1.0, 3.0]) - 1.5).abs() < 1e-12);
        let v = d.lmo(&[1.0, 1.0]).unwrap();
        assert_vec_close(&v, &[1.0, 0.0], 1e-12);
    }

    #[test]
    fn lmo_negative_normal_rejected() {
        let d = Domain::unit_box(2)
            .with_halfspace(vec![1.0, -1.0], 1.0)
            .unwrap();
        assert!(matches!(d.lmo(&[1.0, 1.0]), Err(Error::Unsupported(_))));
    }

    #[test]
    fn lmo_cap_ties_prefer_low_index() {
        let d = Domain::box_cap(vec![0.0; 4], vec![1.0; 4], 2.0).unwrap();
        assert_eq!(
            d.lmo(&[1.0, 1.0, 1.0, 1.0]).unwrap(),
            vec![1.0, 1.0, 0.0, 0.0]
        );
    }

    #[test]
    fn two_halfspace_simplex_matches_vertex_enumeration() {
        let base = Domain::box_cap(vec![0.0; 3], vec![1.0; 3], 2.0).unwrap();
        let d = base.with_halfspace(vec![1.0, 2.0, 0.5], 1.5).unwrap();
        assert_eq!(d.halfspaces().len(), 2);
        let mut rng = seeded(3);
        for _ in 0..200 {
            let c: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
            let v = d.lmo(&c).unwrap();
            assert!(d.contains(&v, 1e-9));
            // grid oracle
            let steps = 40;
            let mut best = f64::NEG_INFINITY;
            for i in 0..=steps {
                for j in 0..=steps {
                    for k in 0..=steps {
                        let x = [
                            i as f64 / steps as f64,
                            j as f64 / steps as f64,
                            k as f64 / steps as f64,
                        ];
                        if d.contains(&x, 1e-12) {
                            best = best.max(dot(&c, &x));
                        }
                    }
                }
            }
            assert!(dot(&c, &v) >= best - 1e-9);
            assert!(dot(&c, &v) <= best + 1e-1);
        }
    }

    #[test]
    fn too_many_halfspaces_rejected() {
        let d = Domain::box_cap(vec![0.0; 2], vec![1.0; 2], 1.0)
            .unwrap()
            .with_halfspace(vec![1.0, 1.0], 1.0)
            .unwrap();
        assert!(d.with_halfspace(vec![1.0, 0.0], 1.0).is_err());
    }

    #[test]
    fn diameters() {
        assert!((Domain::unit_box(2).diameter() - 2f64.sqrt()).abs() < 1e-15);
        let big = Domain::box_cap(vec![0.0; 100], vec![1.0; 100], 15.0).unwrap();
        assert!((big.diameter() - 30f64.sqrt()).abs() < 1e-12);
        let line = Domain::new_box(vec![0.0], vec![3.0]).unwrap();
        assert_eq!(line.diameter(), 3.0);
    }

    #[test]
    fn uniform_cap_diameter_agrees_with_enumeration() {
        for (n, m) in [
            (4usize, 1.0),
            (5, 1.5),
            (6, 2.0),
            (6, 2.5),
            (3, 2.0),
            (4, 1.7),
        ] {
            let d = Domain::box_cap(vec![0.0; n], vec![1.0; n], m).unwrap();
            let verts = d.cap_vertices();
            let mut best: f64 = 0.0;
            for a in &verts {
                for b in &verts {
                    best = best.max(dist(a, b));
                }
            }
            assert!((d.diameter() - best).abs() < 1e-12, "n={n} m={m}");
        }
    }

    #[test]
    fn membership() {
        let d = Domain::unit_box(2);
        assert!(d.contains(&[0.5, 0.5], 0.0));
        let c = Domain::box_cap(vec![0.0; 2], vec![1.0; 2], 1.0).unwrap();
        assert!(!c.contains(&[0.7, 0.7], 1e-9));
    }

    #[test]
    fn sampled_points_are_feasible() {
        let d = Domain::box_cap(vec![0.0; 5], vec![1.0; 5], 2.0)
            .unwrap()
            .with_halfspace(vec![0.5, 1.0, 1.5, 2.0, 2.5], 3.0)
            .unwrap();
        let mut rng = seeded(11);
        for _ in 0..1000 {
            assert!(d.contains(&d.sample_point(&mut rng), 1e-12));
        }
    }
}
