//! The Online Lagrangian Frank-Wolfe algorithm.
//!
//! Each round plays the average of `K` online-gradient-ascent oracles,
//! built up Frank-Wolfe style from the origin, then feeds every oracle the
//! gradient of the penalized Lagrangian `f_t(x) − λ_t g̃_t(x)` at the
//! intermediate point it contributed to.

use serde::{Deserialize, Serialize};

use crate::domain::Domain;
use crate::error::{check_dim, Error, Result};
use crate::functions::FunctionConstants;
use crate::numeric::{axpy, dot, KahanSum};
use crate::rng::{stream, Purpose};
use crate::scenario::Scenario;
use crate::trace::{OracleStep, RoundRecord, RunTrace};

pub const DEFAULT_EPSILON: f64 = 0.05;
const SUPPORT_TOL: f64 = 1e-9;

/// Surrogate constraint used for the dual update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum UpdateRule {
    /// `g̃_t(x) = ⟨p̂_t, x⟩ − B/T`
    #[serde(rename = "I")]
    Expectation,
    /// `g̃_t(x) = ⟨p̂_t, x⟩ − B/T − γ_t`
    #[serde(rename = "II")]
    HighProbability,
}

impl UpdateRule {
    pub fn label(self) -> &'static str {
        match self {
            UpdateRule::Expectation => "I",
            UpdateRule::HighProbability => "II",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "I" => Some(UpdateRule::Expectation),
            "II" => Some(UpdateRule::HighProbability),
            _ => None,
        }
    }
}

/// Run configuration. Unset `k`, `mu`, `delta` are filled from
/// [`default_params`] when `auto_params` is on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OlfwConfig {
    pub horizon: usize,
    pub k: Option<usize>,
    pub mu: Option<f64>,
    pub delta: Option<f64>,
    pub update_rule: UpdateRule,
    pub epsilon: f64,
    pub budget_total: f64,
    pub auto_params: bool,
}

/// Fully determined step parameters of a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResolvedParams {
    pub k: usize,
    pub mu: f64,
    pub delta: f64,
}

impl OlfwConfig {
    /// Horizon and budget taken from the scenario, everything else automatic.
    pub fn for_scenario(scenario: &Scenario, update_rule: UpdateRule) -> Self {
        Self {
            horizon: scenario.horizon(),
            k: None,
            mu: None,
            delta: None,
            update_rule,
            epsilon: DEFAULT_EPSILON,
            budget_total: scenario.budget_total(),
            auto_params: true,
        }
    }

    pub fn per_round_budget(&self) -> f64 {
        self.budget_total / self.horizon as f64
    }

    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        if self.horizon == 0 {
            errs.push("T: must be ≥ 1".to_string());
        }
        if self.k == Some(0) {
            errs.push("K: must be ≥ 1".to_string());
        }
        if let Some(mu) = self.mu {
            if !(mu.is_finite() && mu > 0.0) {
                errs.push(format!("mu: must be finite and > 0, got {mu}"));
            }
        }
        if let Some(d) = self.delta {
            if !(d.is_finite() && d > 0.0) {
                errs.push(format!("delta: must be finite and > 0, got {d}"));
            }
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            errs.push(format!("epsilon: must lie in (0, 1), got {}", self.epsilon));
        }
        if self.budget_total.is_nan() || self.budget_total <= 0.0 {
            errs.push(format!(
                "budget_total: must be > 0, got {}",
                self.budget_total
            ));
        }
        if !self.auto_params {
            for (name, missing) in [
                ("K", self.k.is_none()),
                ("mu", self.mu.is_none()),
                ("delta", self.delta.is_none()),
            ] {
                if missing {
                    errs.push(format!("{name}: required when auto_params = false"));
                }
            }
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(errs))
        }
    }

    pub fn resolve(&self, c: &ProblemConstants) -> Result<ResolvedParams> {
        self.validate()?;
        let auto = if self.auto_params
            && (self.k.is_none() || self.mu.is_none() || self.delta.is_none())
        {
            Some(default_params(c, self.horizon)?)
        } else {
            None
        };
        let pick = |v: Option<f64>, d: fn(&ResolvedParams) -> f64| {
            v.or_else(|| auto.as_ref().map(d)).expect("validated")
        };
        Ok(ResolvedParams {
            k: self.k.or(auto.map(|a| a.k)).expect("validated"),
            mu: pick(self.mu, |a| a.mu),
            delta: pick(self.delta, |a| a.delta),
        })
    }
}

/// Problem constants entering the step sizes and the bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemConstants {
    pub beta_f: f64,
    pub beta_p: f64,
    /// `max(β_f, β_p)`
    pub beta: f64,
    pub smoothness: f64,
    /// Diameter `R` of the domain.
    pub diameter: f64,
    /// `β_f R`, bounding `|f_t(x) − f_t(y)|`.
    pub f_bound: f64,
    /// `max(β_p max‖x‖ − B/T, B/T)`, bounding `|⟨p′, x⟩ − B/T|`.
    pub g_bound: f64,
    /// `max_{x∈𝒳} ‖x‖`
    pub norm_bound: f64,
}

impl ProblemConstants {
    pub fn new(
        f: FunctionConstants,
        beta_p: f64,
        diameter: f64,
        per_round_budget: f64,
        norm_bound: f64,
    ) -> Self {
        let mut c = Self {
            beta_f: f.lipschitz,
            beta_p,
            beta: f.lipschitz.max(beta_p),
            smoothness: f.smoothness,
            diameter,
            f_bound: f.lipschitz * diameter,
            g_bound: 0.0,
            norm_bound,
        };
        c.g_bound = c.g_bound_for(per_round_budget);
        c
    }

    fn g_bound_for(&self, b: f64) -> f64 {
        (self.beta_p * self.norm_bound - b).max(b)
    }

    /// The same constants under a different per-round budget.
    pub fn with_budget(mut self, per_round_budget: f64) -> Self {
        self.g_bound = self.g_bound_for(per_round_budget);
        self
    }
}

/// `μ = R/(β√T)`, `K = ⌈√T⌉`, `δ = β²`.
pub fn default_params(c: &ProblemConstants, horizon: usize) -> Result<ResolvedParams> {
    if c.beta.is_nan() || c.beta <= 0.0 {
        return Err(Error::Degenerate(
            "β = max(β_f, β_p) is zero; step sizes are undefined".into(),
        ));
    }
    if horizon == 0 {
        return Err(Error::Input("T must be ≥ 1".into()));
    }
    let sqrt_t = (horizon as f64).sqrt();
    Ok(ResolvedParams {
        k: ceil_sqrt(horizon),
        mu: c.diameter / (c.beta * sqrt_t),
        delta: c.beta * c.beta,
    })
}

/// Exact integer `⌈√n⌉`.
fn ceil_sqrt(n: usize) -> usize {
    let mut r = (n as f64).sqrt() as usize;
    while r * r > n {
        r -= 1;
    }
    if r * r < n {
        r += 1;
    }
    r.max(1)
}

/// `γ_t = √(2G² log(2T/ε) / t)` for `t ≥ 2`.
pub fn gamma_schedule(t: usize, g_bound: f64, horizon: usize, epsilon: f64) -> Result<f64> {
    if t < 2 {
        return Err(Error::Input(format!(
            "γ_t is defined for t ≥ 2, got t = {t}"
        )));
    }
    Ok((2.0 * g_bound * g_bound * (2.0 * horizon as f64 / epsilon).ln() / t as f64).sqrt())
}

pub fn g_tilde(
    rule: UpdateRule,
    p_hat: &[f64],
    x: &[f64],
    per_round_budget: f64,
    gamma: f64,
) -> f64 {
    let base = dot(p_hat, x) - per_round_budget;
    match rule {
        UpdateRule::Expectation => base,
        UpdateRule::HighProbability => base - gamma,
    }
}

/// `λ_t = [g̃_t(x_t)]_+ / (δμ)` for `t > 1`, else 0.
pub fn update_dual(gt_at_xt: f64, delta: f64, mu: f64, t: usize) -> f64 {
    if t > 1 {
        gt_at_xt.max(0.0) / (delta * mu)
    } else {
        0.0
    }
}

/// `∇_x 𝓛_t = ∇f_t(x) − λ p̂`
pub fn lagrangian_grad(grad_f: &[f64], lambda: f64, p_hat: &[f64]) -> Vec<f64> {
    let mut g = grad_f.to_vec();
    axpy(-lambda, p_hat, &mut g);
    g
}

/// Running mean of the observed cost vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalMean {
    sums: Vec<KahanSum>,
    count: usize,
}

impl EmpiricalMean {
    pub fn new(n: usize) -> Self {
        Self {
            sums: vec![KahanSum::new(); n],
            count: 0,
        }
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// Zeros before any observation.
    pub fn mean(&self) -> Vec<f64> {
        if self.count == 0 {
            return vec![0.0; self.sums.len()];
        }
        let c = self.count as f64;
        self.sums.iter().map(|s| s.value() / c).collect()
    }

    /// Adds `p`, requiring `p ⪰ 0` and `‖p‖ ≤ support_bound`.
    pub fn update(&mut self, p: &[f64], support_bound: f64) -> Result<()> {
        check_dim(self.sums.len(), p.len())?;
        if let Some((i, v)) = p.iter().enumerate().find(|(_, v)| v.is_nan() || **v < 0.0) {
            return Err(Error::Distribution(format!("p[{i}] = {v} is negative")));
        }
        let nrm = crate::numeric::norm(p);
        if nrm > support_bound + SUPPORT_TOL {
            return Err(Error::Distribution(format!(
                "‖p‖ = {nrm} exceeds the support bound {support_bound}"
            )));
        }
        for (s, v) in self.sums.iter_mut().zip(p) {
            s.add(*v);
        }
        self.count += 1;
        Ok(())
    }
}

/// Mutable algorithm state between rounds.
#[derive(Debug, Clone)]
pub struct OlfwState {
    pub t: usize,
    pub oracle_points: Vec<Vec<f64>>,
    pub p_hat: EmpiricalMean,
    pub lambda: f64,
}

impl OlfwState {
    /// `K` oracles at the origin.
    pub fn new(n: usize, k: usize) -> Self {
        Self {
            t: 1,
            oracle_points: vec![vec![0.0; n]; k],
            p_hat: EmpiricalMean::new(n),
            lambda: 0.0,
        }
    }

    /// `x^(1) = 0`, `x^(k+1) = x^(k) + v^(k)/K`. Returns `x^(K+1)` and the
    /// `K` intermediates `x^(1..K)`.
    pub fn build_action(&self) -> (Vec<f64>, Vec<Vec<f64>>) {
        let k = self.oracle_points.len();
        let n = self.oracle_points.first().map_or(0, Vec::len);
        let step = 1.0 / k as f64;
        let mut x = vec![0.0; n];
        let mut inter = Vec::with_capacity(k);
        for v in &self.oracle_points {
            inter.push(x.clone());
            axpy(step, v, &mut x);
        }
        (x, inter)
    }

    /// `v^(k) ← P_𝒳(v^(k) + μ g_k)`
    pub fn oga_feedback(&mut self, grads: &[Vec<f64>], mu: f64, domain: &Domain) -> Result<()> {
        check_dim(self.oracle_points.len(), grads.len())?;
        for (v, g) in self.oracle_points.iter_mut().zip(grads) {
            check_dim(v.len(), g.len())?;
            axpy(mu, g, v);
            *v = domain.project(v)?;
        }
        Ok(())
    }
}

/// How the dual variable is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DualMode {
    #[default]
    Penalty,
    /// `λ_t ≡ 0`: unconstrained online maximization.
    Ignore,
}

/// Deliberate implementation faults for mutation testing of the validators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Uses `[−g̃]_+` in place of `[g̃]_+` in the dual update.
    FlippedDualClamp,
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub record_oracle: bool,
    pub dual: DualMode,
    pub fault: Option<Fault>,
    pub label: Option<String>,
}

/// A run together with the parameters it actually used.
#[derive(Debug, Clone)]
pub struct OlfwRun {
    pub trace: RunTrace,
    pub params: ResolvedParams,
    pub constants: ProblemConstants,
}

/// Runs the algorithm with default options.
pub fn run_olfw(scenario: &Scenario, config: &OlfwConfig, seed: u64) -> Result<RunTrace> {
    Ok(run_olfw_with(scenario, config, seed, &RunOptions::default())?.trace)
}

pub fn run_olfw_with(
    scenario: &Scenario,
    config: &OlfwConfig,
    seed: u64,
    opts: &RunOptions,
) -> Result<OlfwRun> {
    config.validate()?;
    let b = config.per_round_budget();
    let constants = scenario.problem_constants()?.with_budget(b);
    let params = config.resolve(&constants)?;
    let domain = scenario.domain();
    let n = domain.dim();
    let dist = scenario.constraint();
    let p_mean = dist.mean();
    let beta_p = dist.support_bound();
    let horizon = config.horizon;

    let label = opts.label.clone().unwrap_or_else(|| match opts.dual {
        DualMode::Penalty => "olfw".to_string(),
        DualMode::Ignore => "meta_fw".to_string(),
    });
    let mut trace = RunTrace::new(label, horizon, config.budget_total);
    let mut oracle_log = opts.record_oracle.then(|| Vec::with_capacity(horizon));
    let mut state = OlfwState::new(n, params.k);
    let mut cost_rng = stream(seed, Purpose::Constraint, 0);

    for t in 1..=horizon {
        let mut round = || -> Result<()> {
            let (x, inter) = state.build_action();
            let p_hat = state.p_hat.mean();
            let gamma = match config.update_rule {
                UpdateRule::HighProbability if t >= 2 => {
                    gamma_schedule(t, constants.g_bound, horizon, config.epsilon)?
                }
                _ => 0.0,
            };
            let gt = g_tilde(config.update_rule, &p_hat, &x, b, gamma);
            let lambda = match (opts.dual, opts.fault) {
                (DualMode::Ignore, _) => 0.0,
                (DualMode::Penalty, Some(Fault::FlippedDualClamp)) => {
                    update_dual(-gt, params.delta, params.mu, t)
                }
                (DualMode::Penalty, None) => update_dual(gt, params.delta, params.mu, t),
            };
            state.lambda = lambda;

            let f = scenario.utility(t)?;
            let reward = f.value(&x)?;
            let p_t = dist.sample(&mut cost_rng);

            let mut grads = Vec::with_capacity(params.k);
            for xk in &inter {
                grads.push(lagrangian_grad(&f.gradient(xk)?, lambda, &p_hat));
            }
            if let Some(log) = oracle_log.as_mut() {
                log.push(
                    state
                        .oracle_points
                        .iter()
                        .zip(&grads)
                        .map(|(v, g)| OracleStep {
                            point: v.clone(),
                            grad: g.clone(),
                        })
                        .collect(),
                );
            }
            trace.records.push(RoundRecord {
                t,
                cost_realized: dot(&p_t, &x),
                cost_mean: dot(&p_mean, &x),
                action: x,
                reward,
                cost_sample: p_t.clone(),
                lambda,
                g_tilde: gt,
                gamma,
                p_hat,
            });
            state.oga_feedback(&grads, params.mu, domain)?;
            state.p_hat.update(&p_t, beta_p)?;
            state.t = t + 1;
            Ok(())
        };
        round().map_err(|e| e.at_round(t))?;
    }
    trace.oracle_log = oracle_log;
    Ok(OlfwRun {
        trace,
        params,
        constants,
    })
}
