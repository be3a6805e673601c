//! Comparison policies for the recommendation experiment.
//!
//! Every policy plays a 0/1 vector with exactly `slots` ones and sees only
//! past feedback. Runs share the cost-sampling stream of [`run_olfw`] so all
//! policies face the same `p_1, p_2, …` for a given seed.
//!
//! [`run_olfw`]: crate::olfw::run_olfw

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{dot, KahanSum};
use crate::olfw::{run_olfw_with, DualMode, EmpiricalMean, OlfwConfig, RunOptions};
use crate::rng::{stream, Purpose};
use crate::scenario::Scenario;
use crate::trace::{RoundRecord, RunTrace};

/// Running-mean value of a never-shown item on the rescaled rating scale.
pub const RATING_PRIOR: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BaselineKind {
    Uniform,
    Greedy,
    MetaFw,
    BudgetCautious,
}

impl BaselineKind {
    pub const ALL: [BaselineKind; 4] = [
        BaselineKind::Uniform,
        BaselineKind::Greedy,
        BaselineKind::MetaFw,
        BaselineKind::BudgetCautious,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BaselineKind::Uniform => "uniform",
            BaselineKind::Greedy => "greedy",
            BaselineKind::MetaFw => "meta_fw",
            BaselineKind::BudgetCautious => "budget_cautious",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|b| b.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaselinePolicy {
    pub kind: BaselineKind,
    pub slots: usize,
    pub explore_prob: f64,
}

impl BaselinePolicy {
    pub fn new(kind: BaselineKind, slots: usize, explore_prob: f64) -> Result<Self> {
        if slots == 0 {
            return Err(Error::Input("slots must be ≥ 1".into()));
        }
        if !(0.0..=1.0).contains(&explore_prob) {
            return Err(Error::Input(format!(
                "explore_prob must lie in [0, 1], got {explore_prob}"
            )));
        }
        Ok(Self {
            kind,
            slots,
            explore_prob,
        })
    }

    pub fn name(&self) -> &'static str {
        self.kind.name()
    }
}

fn check_slots(n: usize, m: usize) -> Result<()> {
    if m == 0 || m > n {
        return Err(Error::Input(format!("slots must lie in 1..={n}, got {m}")));
    }
    Ok(())
}

fn indicator(n: usize, support: impl IntoIterator<Item = usize>) -> Vec<f64> {
    let mut x = vec![0.0; n];
    for i in support {
        x[i] = 1.0;
    }
    x
}

/// `m` coordinates drawn uniformly without replacement.
pub fn uniform_action<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> Result<Vec<f64>> {
    check_slots(n, m)?;
    Ok(indicator(n, sample(rng, n, m)))
}

/// Indices of the `m` largest `scores` (ties to the lower index).
fn top_m(scores: &[f64], m: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    idx.truncate(m);
    idx
}

/// With probability `explore_prob` a uniform action, otherwise the `m`
/// best running-mean ratings.
pub fn greedy_action<R: Rng + ?Sized>(
    observed_mean_ratings: &[f64],
    m: usize,
    explore_prob: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let n = observed_mean_ratings.len();
    check_slots(n, m)?;
    if rng.random::<f64>() < explore_prob {
        return uniform_action(n, m, rng);
    }
    Ok(indicator(n, top_m(observed_mean_ratings, m)))
}

/// The `m` coordinates with the smallest running-mean cost.
pub fn budget_cautious_action(observed_mean_costs: &[f64], m: usize) -> Result<Vec<f64>> {
    let n = observed_mean_costs.len();
    check_slots(n, m)?;
    let neg: Vec<f64> = observed_mean_costs.iter().map(|c| -c).collect();
    Ok(indicator(n, top_m(&neg, m)))
}

/// Per-item running mean over the rounds each item was shown.
#[derive(Debug, Clone)]
struct RatingMeans {
    sums: Vec<KahanSum>,
    counts: Vec<usize>,
}

impl RatingMeans {
    fn new(n: usize) -> Self {
        Self {
            sums: vec![KahanSum::new(); n],
            counts: vec![0; n],
        }
    }

    fn means(&self) -> Vec<f64> {
        self.sums
            .iter()
            .zip(&self.counts)
            .map(|(s, &c)| {
                if c == 0 {
                    RATING_PRIOR
                } else {
                    s.value() / c as f64
                }
            })
            .collect()
    }

    fn observe(&mut self, shown: &[f64], ratings: &[f64]) {
        for i in 0..shown.len() {
            if shown[i] > 0.0 {
                self.sums[i].add(ratings[i]);
                self.counts[i] += 1;
            }
        }
    }
}

/// Unconstrained online Frank-Wolfe: the algorithm with `λ_t ≡ 0`.
pub fn meta_fw_run(scenario: &Scenario, config: &OlfwConfig, seed: u64) -> Result<RunTrace> {
    let opts = RunOptions {
        dual: DualMode::Ignore,
        ..Default::default()
    };
    Ok(run_olfw_with(scenario, config, seed, &opts)?.trace)
}

/// Runs a baseline over `config.horizon` rounds.
pub fn run_baseline(
    scenario: &Scenario,
    policy: &BaselinePolicy,
    config: &OlfwConfig,
    seed: u64,
) -> Result<RunTrace> {
    if policy.kind == BaselineKind::MetaFw {
        return meta_fw_run(scenario, config, seed);
    }
    let n = scenario.dim();
    check_slots(n, policy.slots)?;
    let horizon = config.horizon;
    let b = config.per_round_budget();
    let dist = scenario.constraint();
    let p_mean = dist.mean();
    let beta_p = dist.support_bound();
    let mut cost_rng = stream(seed, Purpose::Constraint, 0);
    let mut coin_rng = stream(seed, Purpose::Baseline, policy.kind as u64);
    let mut p_hat = EmpiricalMean::new(n);
    let mut ratings = RatingMeans::new(n);
    let origin = vec![0.0; n];
    let mut trace = RunTrace::new(policy.name(), horizon, config.budget_total);

    for t in 1..=horizon {
        let mut round = || -> Result<()> {
            let ph = p_hat.mean();
            let x = match policy.kind {
                BaselineKind::Uniform => uniform_action(n, policy.slots, &mut coin_rng)?,
                BaselineKind::Greedy => greedy_action(
                    &ratings.means(),
                    policy.slots,
                    policy.explore_prob,
                    &mut coin_rng,
                )?,
                BaselineKind::BudgetCautious => budget_cautious_action(&ph, policy.slots)?,
                BaselineKind::MetaFw => unreachable!(),
            };
            let f = scenario.utility(t)?;
            let reward = f.value(&x)?;
            let p_t = dist.sample(&mut cost_rng);
            // ratings of shown items are the linear coefficients ∇f(0)
            ratings.observe(&x, &f.gradient(&origin)?);
            trace.records.push(RoundRecord {
                t,
                cost_realized: dot(&p_t, &x),
                cost_mean: dot(&p_mean, &x),
                g_tilde: dot(&ph, &x) - b,
                action: x,
                reward,
                cost_sample: p_t.clone(),
                lambda: 0.0,
                gamma: 0.0,
                p_hat: ph,
            });
            p_hat.update(&p_t, beta_p)?;
            Ok(())
        };
        round().map_err(|e| e.at_round(t))?;
    }
    Ok(trace)
}
