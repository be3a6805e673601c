//! Experiment scenarios: a domain, a per-round utility stream, a cost
//! distribution, a horizon and a total budget.

pub mod config;
mod distribution;
pub mod jester;

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::domain::Domain;
use crate::error::{check_dim, Error, Result};
use crate::functions::{
    check_dr_monotone, estimate_constants, generate_logdet, generate_quadratic, AverageUtility,
    FunctionConstants, QuadraticUtility, Utility,
};
use crate::numeric::KahanSum;
use crate::olfw::ProblemConstants;
use crate::rng::{derive_seed, Purpose};

pub use distribution::{ConstraintDistribution, DistributionKind};

/// Number of sampled pairs in the construction-time DR/monotone check.
pub const SPOT_CHECK_SAMPLES: usize = 20;
const LOGDET_CONSTANT_INSTANCES: usize = 8;
const CONSTANT_SAMPLES: usize = 64;

/// Default horizons and budgets of the built-in experiments.
pub const QUADRATIC_HORIZON: usize = 1000;
pub const QUADRATIC_PER_ROUND_BUDGET: f64 = 2.0;
pub const LOGDET_HORIZON: usize = 4900;
pub const LOGDET_DIM: usize = 10;

/// Produces `f_t` for every round, deterministically in `t`.
pub trait UtilityStream: Send + Sync {
    fn dim(&self) -> usize;

    /// Utility of round `t` (1-based).
    fn utility(&self, t: usize) -> Result<Arc<dyn Utility>>;

    /// Uniform average of `f_1, …, f_horizon`.
    fn average(&self, horizon: usize) -> Result<Arc<dyn Utility>> {
        let parts = (1..=horizon)
            .map(|t| self.utility(t))
            .collect::<Result<Vec<_>>>()?;
        Ok(Arc::new(AverageUtility::new(parts)?))
    }

    /// Constants valid for every utility the stream can emit over `domain`.
    fn constants(&self, domain: &Domain) -> Result<FunctionConstants>;

    fn describe(&self) -> String;
}

/// Fresh random quadratic each round, `H` uniform in `entry_range`,
/// `h = −Hᵀ1`.
#[derive(Debug, Clone)]
pub struct QuadraticStream {
    pub n: usize,
    pub entry_range: (f64, f64),
    pub seed: u64,
}

impl QuadraticStream {
    fn generate(&self, t: usize) -> Result<QuadraticUtility> {
        generate_quadratic(
            self.n,
            derive_seed(self.seed, Purpose::Utility, t as u64),
            self.entry_range,
        )
    }
}

impl UtilityStream for QuadraticStream {
    fn dim(&self) -> usize {
        self.n
    }

    fn utility(&self, t: usize) -> Result<Arc<dyn Utility>> {
        Ok(Arc::new(self.generate(t)?))
    }

    fn average(&self, horizon: usize) -> Result<Arc<dyn Utility>> {
        let n = self.n;
        let mut h = vec![KahanSum::new(); n * n];
        let mut lin = vec![KahanSum::new(); n];
        for t in 1..=horizon {
            let q = self.generate(t)?;
            for (acc, v) in h.iter_mut().zip(q.form().matrix().iter()) {
                acc.add(*v);
            }
            for (acc, v) in lin.iter_mut().zip(q.linear()) {
                acc.add(*v);
            }
        }
        let k = horizon as f64;
        let hm = DMatrix::from_iterator(n, n, h.iter().map(|a| a.value() / k));
        let lm = lin.iter().map(|a| a.value() / k).collect();
        Ok(Arc::new(QuadraticUtility::new(hm, lm)?))
    }

    /// Envelope over every admissible draw: `∇f(x) = (−H)(1 − x)` has
    /// entries in `[0, n|lo|]` and `‖H‖₂ ≤ n|lo|`.
    fn constants(&self, domain: &Domain) -> Result<FunctionConstants> {
        check_dim(self.n, domain.dim())?;
        let n = self.n as f64;
        let a = self.entry_range.0.abs();
        Ok(FunctionConstants {
            lipschitz: a * n * n.sqrt(),
            smoothness: a * n,
        })
    }

    fn describe(&self) -> String {
        format!(
            "quadratic n={} H∈[{}, {}] seed={}",
            self.n, self.entry_range.0, self.entry_range.1, self.seed
        )
    }
}

/// Fresh log-det kernel each round with eigenvalues in `eig_range`.
#[derive(Debug, Clone)]
pub struct LogDetStream {
    pub n: usize,
    pub eig_range: (f64, f64),
    pub seed: u64,
}

impl UtilityStream for LogDetStream {
    fn dim(&self) -> usize {
        self.n
    }

    fn utility(&self, t: usize) -> Result<Arc<dyn Utility>> {
        Ok(Arc::new(generate_logdet(
            self.n,
            derive_seed(self.seed, Purpose::Utility, t as u64),
            self.eig_range,
        )?))
    }

    /// `β_f` from `0 ⪯ ∇f(x) ⪯ ∇f(0) = diag(L) − 1 ⪯ (hi − 1)·1`; `L` from
    /// sampled Hessians over a handful of instances.
    fn constants(&self, domain: &Domain) -> Result<FunctionConstants> {
        check_dim(self.n, domain.dim())?;
        let lipschitz = (self.n as f64).sqrt() * (self.eig_range.1 - 1.0);
        let mut smoothness: f64 = 0.0;
        for t in 1..=LOGDET_CONSTANT_INSTANCES {
            let f = self.utility(t)?;
            let c = estimate_constants(f.as_ref(), domain, CONSTANT_SAMPLES, t as u64);
            smoothness = smoothness.max(c.smoothness);
        }
        Ok(FunctionConstants {
            lipschitz,
            smoothness,
        })
    }

    fn describe(&self) -> String {
        format!(
            "logdet n={} eig∈[{}, {}] seed={}",
            self.n, self.eig_range.0, self.eig_range.1, self.seed
        )
    }
}

/// The same utility every round.
pub struct FixedStream {
    utility: Arc<dyn Utility>,
    label: String,
}

impl FixedStream {
    pub fn new(utility: Arc<dyn Utility>, label: impl Into<String>) -> Self {
        Self {
            utility,
            label: label.into(),
        }
    }
}

impl UtilityStream for FixedStream {
    fn dim(&self) -> usize {
        self.utility.dim()
    }

    fn utility(&self, _t: usize) -> Result<Arc<dyn Utility>> {
        Ok(self.utility.clone())
    }

    fn average(&self, _horizon: usize) -> Result<Arc<dyn Utility>> {
        Ok(self.utility.clone())
    }

    fn constants(&self, domain: &Domain) -> Result<FunctionConstants> {
        check_dim(self.utility.dim(), domain.dim())?;
        Ok(estimate_constants(
            self.utility.as_ref(),
            domain,
            CONSTANT_SAMPLES,
            0,
        ))
    }

    fn describe(&self) -> String {
        format!("fixed {}", self.label)
    }
}

#[derive(Clone)]
pub struct Scenario {
    name: String,
    domain: Domain,
    stream: Arc<dyn UtilityStream>,
    constraint: ConstraintDistribution,
    horizon: usize,
    budget_total: f64,
    notes: Vec<String>,
}

impl fmt::Debug for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Scenario")
            .field("name", &self.name)
            .field("stream", &self.stream.describe())
            .field("domain", &self.domain)
            .field("constraint", &self.constraint)
            .field("horizon", &self.horizon)
            .field("budget_total", &self.budget_total)
            .finish()
    }
}

impl Scenario {
    /// Validates dimensions and spot-checks `f_1` for DR-submodularity and
    /// monotonicity.
    pub fn new(
        name: impl Into<String>,
        domain: Domain,
        stream: Arc<dyn UtilityStream>,
        constraint: ConstraintDistribution,
        horizon: usize,
        budget_total: f64,
    ) -> Result<Self> {
        let s = Self::new_unchecked(name, domain, stream, constraint, horizon, budget_total)?;
        let f1 = s.stream.utility(1)?;
        let report = check_dr_monotone(f1.as_ref(), &s.domain, SPOT_CHECK_SAMPLES, 0, 1e-9);
        if !report.dr_ok || !report.monotone_ok {
            return Err(Error::Generation(format!(
                "scenario `{}`: round-1 utility failed the DR/monotone spot check",
                s.name
            )));
        }
        Ok(s)
    }

    pub(crate) fn new_unchecked(
        name: impl Into<String>,
        domain: Domain,
        stream: Arc<dyn UtilityStream>,
        constraint: ConstraintDistribution,
        horizon: usize,
        budget_total: f64,
    ) -> Result<Self> {
        check_dim(domain.dim(), stream.dim())?;
        check_dim(domain.dim(), constraint.dim())?;
        if horizon == 0 {
            return Err(Error::Input("horizon must be ≥ 1".into()));
        }
        if budget_total.is_nan() || budget_total <= 0.0 {
            return Err(Error::Input(format!(
                "budget_total must be > 0, got {budget_total}"
            )));
        }
        if !domain.contains(&vec![0.0; domain.dim()], 0.0) {
            return Err(Error::Input("domain must contain the origin".into()));
        }
        Ok(Self {
            name: name.into(),
            domain,
            stream,
            constraint,
            horizon,
            budget_total,
            notes: Vec::new(),
        })
    }

    /// Same utility every round.
    pub fn fixed(
        name: impl Into<String>,
        utility: Arc<dyn Utility>,
        domain: Domain,
        constraint: ConstraintDistribution,
        horizon: usize,
        budget_total: f64,
    ) -> Result<Self> {
        let name = name.into();
        let stream = Arc::new(FixedStream::new(utility, name.clone()));
        Self::new(name, domain, stream, constraint, horizon, budget_total)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn stream(&self) -> &Arc<dyn UtilityStream> {
        &self.stream
    }

    pub fn constraint(&self) -> &ConstraintDistribution {
        &self.constraint
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn budget_total(&self) -> f64 {
        self.budget_total
    }

    pub fn per_round_budget(&self) -> f64 {
        self.budget_total / self.horizon as f64
    }

    pub fn notes(&self) -> &[String] {
        &self.notes
    }

    pub(crate) fn push_note(&mut self, note: String) {
        self.notes.push(note);
    }

    pub fn utility(&self, t: usize) -> Result<Arc<dyn Utility>> {
        self.stream.utility(t)
    }

    /// Changes the horizon keeping `B/T` fixed.
    pub fn with_horizon(mut self, horizon: usize) -> Result<Self> {
        if horizon == 0 {
            return Err(Error::Input("horizon must be ≥ 1".into()));
        }
        let b = self.per_round_budget();
        self.horizon = horizon;
        self.budget_total = b * horizon as f64;
        Ok(self)
    }

    pub fn with_budget_total(mut self, budget_total: f64) -> Result<Self> {
        if budget_total.is_nan() || budget_total <= 0.0 {
            return Err(Error::Input(format!(
                "budget_total must be > 0, got {budget_total}"
            )));
        }
        self.budget_total = budget_total;
        Ok(self)
    }

    /// `𝒳* = {x ∈ 𝒳 : ⟨p, x⟩ ≤ B/T}`
    pub fn benchmark_domain(&self) -> Result<Domain> {
        let b = self.per_round_budget();
        if b < 0.0 {
            return Err(Error::Input("per-round budget is negative".into()));
        }
        self.domain.with_halfspace(self.constraint.mean(), b)
    }

    pub fn average_utility(&self) -> Result<Arc<dyn Utility>> {
        self.stream.average(self.horizon)
    }

    pub fn problem_constants(&self) -> Result<ProblemConstants> {
        let fc = self.stream.constants(&self.domain)?;
        Ok(ProblemConstants::new(
            fc,
            self.constraint.support_bound(),
            self.domain.diameter(),
            self.per_round_budget(),
            self.domain.norm_bound(),
        ))
    }
}

/// Two-dimensional random quadratics on `[0,1]²` with per-coordinate cost
/// intervals `(0.5, 1.5)` and `(1.5, 2.5)` (mean `(1, 2)`) and `B = 2T`.
pub fn scenario_quadratic(seed: u64) -> Result<Scenario> {
    let stream = Arc::new(QuadraticStream {
        n: 2,
        entry_range: (-1.0, 0.0),
        seed,
    });
    let constraint = ConstraintDistribution::uniform_box(vec![0.5, 1.5], vec![1.5, 2.5])?;
    Scenario::new(
        "quadratic",
        Domain::unit_box(2),
        stream,
        constraint,
        QUADRATIC_HORIZON,
        QUADRATIC_PER_ROUND_BUDGET * QUADRATIC_HORIZON as f64,
    )
}

/// Ten-dimensional log-det utilities with kernel eigenvalues in `[2, 3]`
/// and costs uniform on `[0.3, 5.7]`. No default budget exists for this
/// experiment, so the per-round budget is an argument.
pub fn scenario_logdet(seed: u64, per_round_budget: f64) -> Result<Scenario> {
    let stream = Arc::new(LogDetStream {
        n: LOGDET_DIM,
        eig_range: (2.0, 3.0),
        seed,
    });
    let constraint = ConstraintDistribution::uniform_cube(LOGDET_DIM, 0.3, 5.7)?;
    Scenario::new(
        "logdet",
        Domain::unit_box(LOGDET_DIM),
        stream,
        constraint,
        LOGDET_HORIZON,
        per_round_budget * LOGDET_HORIZON as f64,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::FnUtility;

    #[test]
    fn quadratic_scenario_parameters() {
        let s = scenario_quadratic(3).unwrap();
        assert_eq!(s.constraint().mean(), vec![1.0, 2.0]);
        assert_eq!(s.per_round_budget(), 2.0);
        assert_eq!(s.dim(), 2);
        assert_eq!(s.horizon(), 1000);
    }

    #[test]
    fn logdet_scenario_parameters() {
        let s = scenario_logdet(1, 15.0).unwrap();
        assert!(s
            .constraint()
            .mean()
            .iter()
            .all(|m| (m - 3.0).abs() < 1e-15));
        assert_eq!((s.dim(), s.horizon()), (10, 4900));
    }

    #[test]
    fn scenario_is_deterministic_in_seed() {
        let a = scenario_quadratic(9).unwrap();
        let b = scenario_quadratic(9).unwrap();
        for t in [1, 5, 77] {
            let x = [0.3, 0.7];
            assert_eq!(
                a.utility(t).unwrap().value(&x).unwrap(),
                b.utility(t).unwrap().value(&x).unwrap()
            );
        }
    }

    #[test]
    fn quadratic_average_matches_pointwise_mean() {
        let s = scenario_quadratic(4).unwrap().with_horizon(30).unwrap();
        let avg = s.average_utility().unwrap();
        let x = [0.25, 0.6];
        let direct: f64 = (1..=30)
            .map(|t| s.utility(t).unwrap().value(&x).unwrap())
            .sum::<f64>()
            / 30.0;
        assert!((avg.value(&x).unwrap() - direct).abs() < 1e-12);
    }

    #[test]
    fn family_constants_bound_sampled_gradients() {
        let s = scenario_quadratic(5).unwrap();
        let c = s.stream().constants(s.domain()).unwrap();
        for t in 1..200 {
            let g = s.utility(t).unwrap().gradient(&[0.0, 0.0]).unwrap();
            assert!(crate::numeric::norm(&g) <= c.lipschitz + 1e-12);
        }
    }

    #[test]
    fn spot_check_rejects_non_dr_stream() {
        let f = Arc::new(FnUtility::new(2, |x| x[0] * x[1], |x| vec![x[1], x[0]]));
        let c = ConstraintDistribution::uniform_cube(2, 0.0, 1.0).unwrap();
        assert!(Scenario::fixed("bad", f, Domain::unit_box(2), c, 10, 10.0).is_err());
    }

    #[test]
    fn horizon_rescales_budget() {
        let s = scenario_quadratic(1).unwrap().with_horizon(256).unwrap();
        assert_eq!(s.budget_total(), 512.0);
    }
}
