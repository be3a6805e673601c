//! Joke-recommendation scenario on Jester-format ratings.
//!
//! Each round one user arrives; recommending joke `i` with weight `x_i`
//! earns the user's rating plus shared negative pairwise interactions:
//! `f_t(x) = Σ_i R_{u_t,i} x_i + Σ_{i≠j} θ_ij x_i x_j`.

use std::path::Path;
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::{ConstraintDistribution, Scenario, UtilityStream};
use crate::domain::Domain;
use crate::error::{check_dim, Error, Result};
use crate::functions::{FunctionConstants, QuadraticForm, QuadraticUtility, Utility};
use crate::numeric::KahanSum;
use crate::rng::{stream, Purpose};

pub const JESTER_ITEMS: usize = 100;
pub const DEFAULT_SENTINEL: f64 = 99.0;
/// Rescaled value assigned to missing ratings.
pub const MISSING_RATING: f64 = 5.0;
pub const JESTER_SLOTS: usize = 15;
pub const JESTER_COST_RANGE: (f64, f64) = (0.03, 0.35);
pub const JESTER_PER_ROUND_BUDGET: f64 = 1.5;
pub const JESTER_DEFAULT_USERS: usize = 10_000;
const RAW_RANGE: f64 = 10.0;

/// Ratings on the rescaled `[0, 10]` scale, one row per user.
#[derive(Debug, Clone, PartialEq)]
pub struct JesterDataset {
    pub ratings: Vec<Vec<f64>>,
    /// Row order in which users are served.
    pub user_order: Vec<usize>,
    pub missing: usize,
}

impl JesterDataset {
    pub fn users(&self) -> usize {
        self.ratings.len()
    }

    pub fn items(&self) -> usize {
        self.ratings.first().map_or(0, Vec::len)
    }

    /// Seeded permutation of the serving order.
    pub fn shuffled(mut self, seed: u64) -> Self {
        let mut rng = stream(seed, Purpose::UserOrder, 0);
        self.user_order.shuffle(&mut rng);
        self
    }
}

/// `r ↦ (r + 10)/2`, sentinel ↦ 5.
pub fn rescale_rating(raw: f64, sentinel: f64) -> f64 {
    if raw == sentinel {
        MISSING_RATING
    } else {
        (raw + RAW_RANGE) / 2.0
    }
}

pub fn load_jester(path: &Path, sentinel: f64) -> Result<JesterDataset> {
    parse_jester(&std::fs::read_to_string(path)?, sentinel)
}

/// Comma-separated rows of raw ratings in `[−10, 10]` (or the sentinel).
/// A leading ratings-count column is dropped when rows are 101 wide.
pub fn parse_jester(text: &str, sentinel: f64) -> Result<JesterDataset> {
    let mut ratings = Vec::new();
    let mut missing = 0;
    let mut row = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        row += 1;
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        let skip = match cells.len() {
            n if n == JESTER_ITEMS + 1 => 1,
            n if n == JESTER_ITEMS => 0,
            n => {
                return Err(Error::Schema {
                    row,
                    message: format!(
                        "expected {JESTER_ITEMS} or {} columns, found {n}",
                        JESTER_ITEMS + 1
                    ),
                })
            }
        };
        if skip == 1 {
            cells[0].parse::<f64>().map_err(|e| Error::Parse {
                line: idx + 1,
                message: format!("bad count column {:?}: {e}", cells[0]),
            })?;
        }
        let mut r = Vec::with_capacity(JESTER_ITEMS);
        for (col, cell) in cells[skip..].iter().enumerate() {
            let v = cell.parse::<f64>().map_err(|e| Error::Parse {
                line: idx + 1,
                message: format!("column {}: bad rating {cell:?}: {e}", col + skip + 1),
            })?;
            if v == sentinel {
                missing += 1;
            } else if !(-RAW_RANGE..=RAW_RANGE).contains(&v) {
                return Err(Error::Parse {
                    line: idx + 1,
                    message: format!("column {}: rating {v} outside [-10, 10]", col + skip + 1),
                });
            }
            r.push(rescale_rating(v, sentinel));
        }
        ratings.push(r);
    }
    if ratings.is_empty() {
        return Err(Error::Input("dataset has no rows".into()));
    }
    let user_order = (0..ratings.len()).collect();
    Ok(JesterDataset {
        ratings,
        user_order,
        missing,
    })
}

/// Raw Jester-format text (count column plus 100 ratings, sentinel for
/// missing) from a latent-quality model, for use when the real dataset
/// is unavailable.
pub fn synthetic_jester_csv(users: usize, seed: u64) -> String {
    let mut rng = stream(seed, Purpose::Scenario, 0);
    let quality = Normal::new(0.0, 3.0).expect("valid normal");
    let bias = Normal::new(0.0, 2.0).expect("valid normal");
    let noise = Normal::new(0.0, 3.5).expect("valid normal");
    let q: Vec<f64> = (0..JESTER_ITEMS)
        .map(|_| quality.sample(&mut rng))
        .collect();
    let mut out = String::new();
    for _ in 0..users {
        let b = bias.sample(&mut rng);
        let mut cells = Vec::with_capacity(JESTER_ITEMS);
        let mut count = 0;
        for qi in &q {
            if rng.random::<f64>() < 0.25 {
                cells.push("99".to_string());
            } else {
                count += 1;
                let r = (qi + b + noise.sample(&mut rng)).clamp(-9.95, 9.95);
                cells.push(format!("{:.2}", r));
            }
        }
        out.push_str(&count.to_string());
        for c in cells {
            out.push(',');
            out.push_str(&c);
        }
        out.push('\n');
    }
    out
}

/// Serves users in order with a shared interaction matrix.
#[derive(Debug, Clone)]
pub struct JesterStream {
    form: Arc<QuadraticForm>,
    /// Ratings rows in serving order.
    served: Arc<Vec<Vec<f64>>>,
    /// Per-coordinate bound on `|∇_i f|` over every user and the domain.
    grad_bound: Vec<f64>,
}

impl JesterStream {
    pub fn form(&self) -> &Arc<QuadraticForm> {
        &self.form
    }

    pub fn ratings(&self, t: usize) -> &[f64] {
        &self.served[t - 1]
    }
}

impl UtilityStream for JesterStream {
    fn dim(&self) -> usize {
        self.form.dim()
    }

    fn utility(&self, t: usize) -> Result<Arc<dyn Utility>> {
        let row = self.served.get(t.wrapping_sub(1)).ok_or_else(|| {
            Error::Input(format!(
                "round {t} beyond the {} served users",
                self.served.len()
            ))
        })?;
        Ok(Arc::new(QuadraticUtility::with_form(
            self.form.clone(),
            row.clone(),
        )?))
    }

    fn average(&self, horizon: usize) -> Result<Arc<dyn Utility>> {
        if horizon == 0 || horizon > self.served.len() {
            return Err(Error::Input(format!(
                "horizon {horizon} outside 1..={}",
                self.served.len()
            )));
        }
        let n = self.dim();
        let mut acc = vec![KahanSum::new(); n];
        for row in &self.served[..horizon] {
            for (a, v) in acc.iter_mut().zip(row) {
                a.add(*v);
            }
        }
        let mean = acc.iter().map(|a| a.value() / horizon as f64).collect();
        Ok(Arc::new(QuadraticUtility::with_form(
            self.form.clone(),
            mean,
        )?))
    }

    /// `∇_i f = R_i − Σ_j b_ij x_j ∈ [R_i − ηW_i, R_i]`, so coordinate `i`
    /// is bounded by `max(R_i, ηW_i − R_i)` over users.
    fn constants(&self, domain: &Domain) -> Result<FunctionConstants> {
        check_dim(self.dim(), domain.dim())?;
        Ok(FunctionConstants {
            lipschitz: crate::numeric::norm(&self.grad_bound),
            smoothness: self.form.spectral_norm(),
        })
    }

    fn describe(&self) -> String {
        format!("jester n={} users={}", self.dim(), self.served.len())
    }
}

/// How `η` was chosen.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionScale {
    pub eta: f64,
    /// `(user, item)` entries left out of the minimum because their rating
    /// is zero.
    pub excluded: usize,
}

/// Largest `η` keeping every served user's gradient nonnegative over the
/// capped box: `η = min_{u,i} R_ui / W_i`, where `W_i` is the sum of the
/// `slots` largest `u_ij + u_ji`, `j ≠ i`. Zero ratings are left out of
/// the minimum when including them would force `η = 0`.
pub fn interaction_scale(
    served: &[Vec<f64>],
    weights: &DMatrix<f64>,
    slots: usize,
) -> Result<(InteractionScale, Vec<f64>)> {
    let n = weights.nrows();
    let w: Vec<f64> = (0..n)
        .map(|i| {
            let mut b: Vec<f64> = (0..n)
                .filter(|&j| j != i)
                .map(|j| weights[(i, j)] + weights[(j, i)])
                .collect();
            b.sort_by(|a, c| c.total_cmp(a));
            b.iter().take(slots).sum()
        })
        .collect();
    let ratio_min = |skip_zero: bool| {
        let mut m = f64::INFINITY;
        let mut excluded = 0;
        for row in served {
            for (i, r) in row.iter().enumerate() {
                if w[i] <= 0.0 {
                    continue;
                }
                if skip_zero && *r == 0.0 {
                    excluded += 1;
                    continue;
                }
                m = m.min(r / w[i]);
            }
        }
        (m, excluded)
    };
    let (mut eta, mut excluded) = ratio_min(false);
    if eta == 0.0 {
        (eta, excluded) = ratio_min(true);
    }
    if !eta.is_finite() {
        return Err(Error::Generation(
            "interaction scale undefined: no positive ratings".into(),
        ));
    }
    Ok((InteractionScale { eta, excluded }, w))
}

/// Options of the recommendation scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct JesterOptions {
    /// Number of served users (rounds).
    pub horizon: usize,
    pub slots: usize,
    /// Seeded shuffle of the serving order.
    pub shuffle: bool,
}

impl Default for JesterOptions {
    fn default() -> Self {
        Self {
            horizon: JESTER_DEFAULT_USERS,
            slots: JESTER_SLOTS,
            shuffle: false,
        }
    }
}

/// Serving order and interaction weights for the first `opts.horizon`
/// users; the weights are drawn once from the seed.
pub fn jester_stream(
    ds: &JesterDataset,
    seed: u64,
    opts: &JesterOptions,
) -> Result<(JesterStream, InteractionScale)> {
    let n = ds.items();
    if n == 0 {
        return Err(Error::Input("dataset has no items".into()));
    }
    if opts.horizon == 0 || opts.horizon > ds.users() {
        return Err(Error::Input(format!(
            "horizon {} needs that many users; dataset has {}",
            opts.horizon,
            ds.users()
        )));
    }
    if opts.slots == 0 || opts.slots > n {
        return Err(Error::Input(format!("slots must lie in 1..={n}")));
    }
    let order = if opts.shuffle {
        ds.clone().shuffled(seed).user_order
    } else {
        ds.user_order.clone()
    };
    let served: Vec<Vec<f64>> = order[..opts.horizon]
        .iter()
        .map(|&u| ds.ratings[u].clone())
        .collect();

    let mut rng = stream(seed, Purpose::Scenario, 1);
    let u = DMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { rng.random::<f64>() });
    let (scale, w) = interaction_scale(&served, &u, opts.slots)?;
    // H = 2Θ so that ½xᵀHx = Σ_{i≠j} θ_ij x_i x_j
    let form = Arc::new(QuadraticForm::new(u.map(|v| -2.0 * scale.eta * v))?);
    let mut grad_bound = vec![0.0f64; n];
    for row in &served {
        for i in 0..n {
            grad_bound[i] = grad_bound[i].max(row[i]).max(scale.eta * w[i] - row[i]);
        }
    }
    Ok((
        JesterStream {
            form,
            served: Arc::new(served),
            grad_bound,
        },
        scale,
    ))
}

/// Per-joke reading costs: means `p_i ~ U[0.03, 0.35]`, drawn once, and
/// round samples uniform on the widest interval around `p_i` that stays
/// inside `[0.03, 0.35]`.
pub fn jester_costs(n: usize, seed: u64) -> Result<ConstraintDistribution> {
    let (lo, hi) = JESTER_COST_RANGE;
    let mut rng = stream(seed, Purpose::Scenario, 2);
    let means: Vec<f64> = (0..n).map(|_| rng.random_range(lo..=hi)).collect();
    let half: Vec<f64> = means.iter().map(|m| (m - lo).min(hi - m)).collect();
    ConstraintDistribution::uniform_box(
        means.iter().zip(&half).map(|(m, w)| m - w).collect(),
        means.iter().zip(&half).map(|(m, w)| m + w).collect(),
    )
}

/// Capped box `[0,1]¹⁰⁰`, `Σx ≤ 15`, costs from [`jester_costs`],
/// `B = 1.5T`.
pub fn scenario_jester(ds: &JesterDataset, seed: u64, opts: &JesterOptions) -> Result<Scenario> {
    let (js, scale) = jester_stream(ds, seed, opts)?;
    let n = js.dim();
    let domain = Domain::box_cap(vec![0.0; n], vec![1.0; n], opts.slots as f64)?;
    let costs = jester_costs(n, seed)?;
    let budget = JESTER_PER_ROUND_BUDGET * opts.horizon as f64;
    let js = Arc::new(js);
    let mut s = if scale.excluded == 0 {
        Scenario::new("jester", domain, js, costs, opts.horizon, budget)?
    } else {
        Scenario::new_unchecked("jester", domain, js, costs, opts.horizon, budget)?
    };
    s.push_note(format!("eta = {:e}", scale.eta));
    if scale.excluded > 0 {
        s.push_note(format!(
            "{} zero ratings excluded from the interaction scale",
            scale.excluded
        ));
    }
    Ok(s)
}
