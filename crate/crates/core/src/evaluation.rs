//! Benchmark, metrics and validators.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::functions::Utility;
use crate::numeric::{axpy, dot, ksum, ls_slope, norm, KahanSum};
use crate::olfw::{
    gamma_schedule, run_olfw_with, OlfwConfig, ProblemConstants, ResolvedParams, RunOptions,
    UpdateRule,
};
use crate::rng::{stream, Purpose};
use crate::scenario::{ConstraintDistribution, Scenario};
use crate::trace::{OracleStep, RunTrace};

pub const APPROX_RATIO: f64 = 1.0 - 1.0 / std::f64::consts::E;
pub const DEFAULT_BENCHMARK_ITERS: usize = 100;
/// Relative slack of the master-inequality comparison.
pub const MASTER_REL_TOL: f64 = 1e-6;
const HYPOTHESIS_REL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkResult {
    pub x_star: Vec<f64>,
    /// `Σ_t f_t(x*)`
    pub total_value: f64,
    pub offline_iterations: usize,
    /// Always `"FW-approximate benchmark"`: the offline maximum is
    /// intractable in general.
    pub label: String,
}

/// Offline Frank-Wolfe from the origin:
/// `x^(k+1) = x^(k) + lmo(∇f̄(x^(k)))/K_off`. Returns `x^(K_off+1)` and
/// `horizon · f̄(x*)`.
pub fn solve_benchmark(
    avg_f: &dyn Utility,
    x_star_domain: &Domain,
    k_off: usize,
    horizon: usize,
) -> Result<BenchmarkResult> {
    let x = frank_wolfe_path(avg_f, x_star_domain, k_off)?
        .pop()
        .expect("path has K_off + 1 points");
    Ok(BenchmarkResult {
        total_value: horizon as f64 * avg_f.value(&x)?,
        x_star: x,
        offline_iterations: k_off,
        label: "FW-approximate benchmark".into(),
    })
}

/// Every iterate `x^(1), …, x^(K_off+1)` of the offline Frank-Wolfe run.
pub fn frank_wolfe_path(f: &dyn Utility, domain: &Domain, k_off: usize) -> Result<Vec<Vec<f64>>> {
    if k_off == 0 {
        return Err(Error::Input("K_off must be ≥ 1".into()));
    }
    if domain.halfspaces().iter().any(|h| h.bound < 0.0) {
        return Err(Error::Input(
            "benchmark domain is empty: per-round budget is negative".into(),
        ));
    }
    let mut x = vec![0.0; domain.dim()];
    let mut path = vec![x.clone()];
    let step = 1.0 / k_off as f64;
    for _ in 0..k_off {
        let v = domain.lmo(&f.gradient(&x)?)?;
        axpy(step, &v, &mut x);
        path.push(x.clone());
    }
    Ok(path)
}

/// Benchmark of a scenario: FW over `𝒳*` on the average utility, total
/// as the exact sum over rounds.
pub fn scenario_benchmark(scenario: &Scenario, k_off: usize) -> Result<BenchmarkResult> {
    let avg = scenario.average_utility()?;
    let mut b = solve_benchmark(
        avg.as_ref(),
        &scenario.benchmark_domain()?,
        k_off,
        scenario.horizon(),
    )?;
    b.total_value = values_at(scenario, &b.x_star)?
        .iter()
        .copied()
        .collect::<KahanSum>()
        .value();
    Ok(b)
}

/// `f_t(x)` for every round of the scenario.
pub fn values_at(scenario: &Scenario, x: &[f64]) -> Result<Vec<f64>> {
    (1..=scenario.horizon())
        .map(|t| scenario.utility(t)?.value(x))
        .collect()
}

/// Best value of `f` over a regular grid of step `step` inside `domain`
/// (`n ≤ 3`), for calibrating the benchmark.
pub fn grid_benchmark(f: &dyn Utility, domain: &Domain, step: f64) -> Result<(Vec<f64>, f64)> {
    let n = domain.dim();
    if n > 3 {
        return Err(Error::Capacity(format!("grid search needs n ≤ 3, got {n}")));
    }
    let axes: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let (l, u) = (domain.lower()[i], domain.upper()[i]);
            let m = ((u - l) / step).round() as usize;
            (0..=m).map(|j| (l + j as f64 * step).min(u)).collect()
        })
        .collect();
    let mut best = (vec![0.0; n], f64::NEG_INFINITY);
    let mut idx = vec![0usize; n];
    loop {
        let x: Vec<f64> = idx.iter().enumerate().map(|(i, &j)| axes[i][j]).collect();
        if domain.contains(&x, 1e-12) {
            let v = f.value(&x)?;
            if v > best.1 {
                best = (x, v);
            }
        }
        let mut d = 0;
        loop {
            if d == n {
                return Ok(best);
            }
            idx[d] += 1;
            if idx[d] < axes[d].len() {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
    }
}

/// `R_T = (1 − 1/e)·Σf_t(x*) − Σf_t(x_t)`, unclamped.
pub fn compute_regret(trace: &RunTrace, bench: &BenchmarkResult) -> f64 {
    APPROX_RATIO * bench.total_value - trace.total_utility()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    /// `C_T = Σ⟨p, x_t⟩ − B_T`
    pub total: f64,
    /// `Σ_t [⟨p, x_t⟩ − B_T/T]_+`
    pub positive_part: f64,
}

pub fn compute_violation(trace: &RunTrace, p_mean: &[f64], budget_total: f64) -> Violation {
    let b = budget_total / trace.records.len().max(1) as f64;
    let costs: Vec<f64> = trace
        .records
        .iter()
        .map(|r| dot(p_mean, &r.action))
        .collect();
    Violation {
        total: ksum(costs.iter().copied()) - budget_total,
        positive_part: ksum(costs.iter().map(|c| (c - b).max(0.0))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub regret: f64,
    pub violation: f64,
    pub positive_violation: f64,
    pub cumulative_utility: f64,
    pub benchmark_total: f64,
    pub benchmark_label: String,
}

pub fn metrics(
    trace: &RunTrace,
    bench: &BenchmarkResult,
    p_mean: &[f64],
    budget_total: f64,
) -> MetricsReport {
    let v = compute_violation(trace, p_mean, budget_total);
    MetricsReport {
        regret: compute_regret(trace, bench),
        violation: v.total,
        positive_violation: v.positive_part,
        cumulative_utility: trace.total_utility(),
        benchmark_total: bench.total_value,
        benchmark_label: bench.label.clone(),
    }
}

/// Mean of `‖p̂_t − p‖²` over `replicas` independent draws of
/// `p_1, …, p_{t−1}`.
pub fn monte_carlo_mean_error(
    dist: &ConstraintDistribution,
    t: usize,
    replicas: usize,
    seed: u64,
) -> Result<f64> {
    if t < 2 || replicas == 0 {
        return Err(Error::Input("need t ≥ 2 and replicas ≥ 1".into()));
    }
    let p = dist.mean();
    let errs: Vec<f64> = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream(seed, Purpose::Replica, r as u64);
            let mut acc = vec![KahanSum::new(); p.len()];
            for _ in 1..t {
                for (a, v) in acc.iter_mut().zip(dist.sample(&mut rng)) {
                    a.add(v);
                }
            }
            acc.iter()
                .zip(&p)
                .map(|(a, pi)| {
                    let d = a.value() / (t - 1) as f64 - pi;
                    d * d
                })
                .sum()
        })
        .collect();
    Ok(ksum(errs) / replicas as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub replicas: usize,
    /// Failure frequency of `|⟨p̂_t − p, x⟩| > γ_t` at `t = 2, …, T`.
    pub per_round: Vec<f64>,
    /// Fraction of replicas with a failure at some round.
    pub union_frequency: f64,
    /// `ε/T`
    pub per_round_target: f64,
}

impl CoverageReport {
    /// Largest per-round frequency.
    pub fn max_frequency(&self) -> f64 {
        self.per_round.iter().copied().fold(0.0, f64::max)
    }

    /// Whether every round is within `ε/T` plus `sigmas` standard errors
    /// (binomial, evaluated at the target).
    pub fn within(&self, sigmas: f64) -> bool {
        let q = self.per_round_target;
        let se = (q * (1.0 - q) / self.replicas as f64).sqrt();
        self.per_round.iter().all(|f| *f <= q + sigmas * se)
    }
}

/// Monte Carlo frequency of the confidence-margin failure event for a
/// fixed `x`. `gamma_scale` multiplies `γ_t`.
#[allow(clippy::too_many_arguments)]
pub fn coverage_check(
    dist: &ConstraintDistribution,
    x: &[f64],
    horizon: usize,
    epsilon: f64,
    g_bound: f64,
    replicas: usize,
    seed: u64,
    gamma_scale: f64,
) -> Result<CoverageReport> {
    if horizon < 2 || replicas == 0 {
        return Err(Error::Input("need T ≥ 2 and replicas ≥ 1".into()));
    }
    let g_true = dot(&dist.mean(), x);
    let gammas = (2..=horizon)
        .map(|t| Ok(gamma_scale * gamma_schedule(t, g_bound, horizon, epsilon)?))
        .collect::<Result<Vec<f64>>>()?;
    let fails: Vec<Vec<bool>> = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream(seed, Purpose::Replica, r as u64);
            let mut acc = KahanSum::new();
            let mut out = Vec::with_capacity(horizon - 1);
            for t in 2..=horizon {
                acc.add(dot(&dist.sample(&mut rng), x));
                let g_hat = acc.value() / (t - 1) as f64;
                out.push((g_hat - g_true).abs() > gammas[t - 2]);
            }
            out
        })
        .collect();
    let per_round = (0..horizon - 1)
        .map(|i| fails.iter().filter(|f| f[i]).count() as f64 / replicas as f64)
        .collect();
    let union = fails.iter().filter(|f| f.iter().any(|b| *b)).count() as f64 / replicas as f64;
    Ok(CoverageReport {
        replicas,
        per_round,
        union_frequency: union,
        per_round_target: epsilon / horizon as f64,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Master inequality for a fixed `x`:
/// `Σ[(1−1/e)f_t(x) − f_t(x_t)] ≤ LR²T/(2K) + R²/μ + β²μT + Σλ_t g̃_t(x)`.
pub fn check_master_inequality(
    trace: &RunTrace,
    x_fixed: &[f64],
    c: &ProblemConstants,
    params: &ResolvedParams,
    rule: UpdateRule,
    f_values_at_x: &[f64],
) -> Result<InequalityReport> {
    let beta2 = c.beta * c.beta;
    if (params.delta - beta2).abs() > HYPOTHESIS_REL_TOL * beta2 {
        return Err(Error::Hypothesis(format!(
            "the master inequality needs δ = β² = {beta2}, got δ = {}",
            params.delta
        )));
    }
    let t = trace.records.len();
    if f_values_at_x.len() != t {
        return Err(Error::Dimension {
            expected: t,
            got: f_values_at_x.len(),
        });
    }
    let b = trace.per_round_budget();
    let lhs = ksum(
        trace
            .records
            .iter()
            .zip(f_values_at_x)
            .map(|(r, fx)| APPROX_RATIO * fx - r.reward),
    );
    let penalty = ksum(trace.records.iter().map(|r| {
        let g = match rule {
            UpdateRule::Expectation => dot(&r.p_hat, x_fixed) - b,
            UpdateRule::HighProbability => dot(&r.p_hat, x_fixed) - b - r.gamma,
        };
        r.lambda * g
    }));
    let (l, rr, mu, tt) = (c.smoothness, c.diameter, params.mu, t as f64);
    let rhs = l * rr * rr * tt / (2.0 * params.k as f64) + rr * rr / mu + beta2 * mu * tt + penalty;
    Ok(InequalityReport {
        lhs,
        rhs,
        holds: lhs <= rhs + MASTER_REL_TOL * rhs.abs(),
    })
}

/// Regret bound of each gradient-ascent oracle against a fixed `x`:
/// `Σ_t⟨g_t, x − v_t⟩ ≤ R²/μ + (μ/2)Σ_t‖g_t‖²`. One report per oracle.
pub fn check_oga_bound(
    oracle_log: &[Vec<OracleStep>],
    x_fixed: &[f64],
    diameter: f64,
    mu: f64,
) -> Vec<InequalityReport> {
    let k = oracle_log.first().map_or(0, Vec::len);
    (0..k)
        .map(|j| {
            let mut lhs = KahanSum::new();
            let mut sq = KahanSum::new();
            for round in oracle_log {
                let s = &round[j];
                let gap: f64 = s
                    .grad
                    .iter()
                    .zip(x_fixed.iter().zip(&s.point))
                    .map(|(g, (x, v))| g * (x - v))
                    .sum();
                lhs.add(gap);
                let n = norm(&s.grad);
                sq.add(n * n);
            }
            let rhs = diameter * diameter / mu + 0.5 * mu * sq.value();
            let lhs = lhs.value();
            InequalityReport {
                lhs,
                rhs,
                holds: lhs <= rhs + MASTER_REL_TOL * rhs.abs(),
            }
        })
        .collect()
}

/// Master-inequality and oracle-bound checks of one seeded run at `x = 0`
/// and `x = x*`.
#[derive(Debug, Clone)]
pub struct RunValidation {
    pub benchmark: BenchmarkResult,
    pub master_origin: InequalityReport,
    pub master_benchmark: InequalityReport,
    pub oga_origin: Vec<InequalityReport>,
    pub oga_benchmark: Vec<InequalityReport>,
}

impl RunValidation {
    pub fn all_hold(&self) -> bool {
        self.master_origin.holds
            && self.master_benchmark.holds
            && self
                .oga_origin
                .iter()
                .chain(&self.oga_benchmark)
                .all(|r| r.holds)
    }
}

pub fn validate_run(
    scenario: &Scenario,
    config: &OlfwConfig,
    seed: u64,
    opts: &RunOptions,
    k_off: usize,
) -> Result<RunValidation> {
    let opts = RunOptions {
        record_oracle: true,
        ..opts.clone()
    };
    let run = run_olfw_with(scenario, config, seed, &opts)?;
    let bench = scenario_benchmark(scenario, k_off)?;
    let origin = vec![0.0; scenario.dim()];
    let f0 = values_at(scenario, &origin)?;
    let fb = values_at(scenario, &bench.x_star)?;
    let rule = config.update_rule;
    let log = run.trace.oracle_log.as_deref().unwrap_or(&[]);
    let r = run.constants.diameter;
    Ok(RunValidation {
        master_origin: check_master_inequality(
            &run.trace,
            &origin,
            &run.constants,
            &run.params,
            rule,
            &f0,
        )?,
        master_benchmark: check_master_inequality(
            &run.trace,
            &bench.x_star,
            &run.constants,
            &run.params,
            rule,
            &fb,
        )?,
        oga_origin: check_oga_bound(log, &origin, r, run.params.mu),
        oga_benchmark: check_oga_bound(log, &bench.x_star, r, run.params.mu),
        benchmark: bench,
    })
}

/// Least-squares slope of `log max(metric, 1)` on `log T`, with the number
/// of values raised to 1.
pub fn loglog_slope(ts: &[usize], metric: &[f64]) -> (f64, usize) {
    let clamped = metric.iter().filter(|m| **m < 1.0).count();
    let xs: Vec<f64> = ts.iter().map(|t| (*t as f64).ln()).collect();
    let ys: Vec<f64> = metric.iter().map(|m| m.max(1.0).ln()).collect();
    (ls_slope(&xs, &ys), clamped)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub horizon: usize,
    pub seed: u64,
    pub regret: f64,
    pub violation: f64,
    pub positive_violation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingTable {
    pub rule: UpdateRule,
    pub rows: Vec<ScalingRow>,
    pub horizons: Vec<usize>,
    pub mean_regret: Vec<f64>,
    pub mean_violation: Vec<f64>,
    pub mean_positive_violation: Vec<f64>,
    /// Per-`T` aggregate the slopes are fitted on: the mean for rule I,
    /// the per-seed maximum for rule II.
    pub fit_regret: Vec<f64>,
    pub fit_positive_violation: Vec<f64>,
    pub regret_slope: f64,
    pub violation_slope: f64,
    pub clamped: usize,
}

/// Runs every `(T, seed)` pair with automatic parameters and fits log-log
/// slopes of regret and positive violation.
pub fn scaling_study<F>(
    family: F,
    horizons: &[usize],
    seeds: &[u64],
    rule: UpdateRule,
    epsilon: f64,
    k_off: usize,
) -> Result<ScalingTable>
where
    F: Fn(usize, u64) -> Result<Scenario> + Sync,
{
    if horizons.len() < 2 || horizons.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Input(
            "scaling study needs ≥ 2 strictly increasing horizons".into(),
        ));
    }
    if seeds.is_empty() {
        return Err(Error::Input("scaling study needs ≥ 1 seed".into()));
    }
    let jobs: Vec<(usize, u64)> = horizons
        .iter()
        .flat_map(|&t| seeds.iter().map(move |&s| (t, s)))
        .collect();
    let rows = jobs
        .par_iter()
        .map(|&(t, seed)| {
            let sc = family(t, seed)?;
            let mut cfg = OlfwConfig::for_scenario(&sc, rule);
            cfg.epsilon = epsilon;
            let run = run_olfw_with(&sc, &cfg, seed, &RunOptions::default())?;
            let bench = scenario_benchmark(&sc, k_off)?;
            let m = metrics(
                &run.trace,
                &bench,
                &sc.constraint().mean(),
                sc.budget_total(),
            );
            Ok(ScalingRow {
                horizon: t,
                seed,
                regret: m.regret,
                violation: m.violation,
                positive_violation: m.positive_violation,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let per_t = |f: &dyn Fn(&ScalingRow) -> f64, agg_max: bool| -> Vec<f64> {
        horizons
            .iter()
            .map(|&t| {
                let v: Vec<f64> = rows.iter().filter(|r| r.horizon == t).map(f).collect();
                if agg_max {
                    v.iter().copied().fold(f64::NEG_INFINITY, f64::max)
                } else {
                    ksum(v.iter().copied()) / v.len() as f64
                }
            })
            .collect()
    };
    let use_max = rule == UpdateRule::HighProbability;
    let fit_regret = per_t(&|r| r.regret, use_max);
    let fit_pos = per_t(&|r| r.positive_violation, use_max);
    let (regret_slope, c1) = loglog_slope(horizons, &fit_regret);
    let (violation_slope, c2) = loglog_slope(horizons, &fit_pos);
    Ok(ScalingTable {
        rule,
        horizons: horizons.to_vec(),
        mean_regret: per_t(&|r| r.regret, false),
        mean_violation: per_t(&|r| r.violation, false),
        mean_positive_violation: per_t(&|r| r.positive_violation, false),
        fit_regret,
        fit_positive_violation: fit_pos,
        regret_slope,
        violation_slope,
        clamped: c1 + c2,
        rows,
    })
}
