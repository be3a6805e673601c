//! TOML run configuration with `[scenario]`, `[algorithm]` and `[run]`
//! sections.
//!
//! ```toml
//! [scenario]
//! scenario = "quadratic"
//! seed = 1
//! ```
//!
//! is a complete configuration; every omitted key takes its scenario
//! default. Validation collects every offending field before failing.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use toml::{Table, Value};

use super::jester::{
    load_jester, parse_jester, scenario_jester, synthetic_jester_csv, JesterOptions,
    DEFAULT_SENTINEL, JESTER_DEFAULT_USERS, JESTER_PER_ROUND_BUDGET, JESTER_SLOTS,
};
use super::{
    scenario_logdet, scenario_quadratic, ConstraintDistribution, Scenario, LOGDET_HORIZON,
    QUADRATIC_HORIZON, QUADRATIC_PER_ROUND_BUDGET,
};
pub use crate::baselines::BaselineKind;
use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::functions::MultilinearUtility;
use crate::olfw::{OlfwConfig, UpdateRule, DEFAULT_EPSILON};

pub const DEFAULT_CUSTOM_HORIZON: usize = 1000;
pub const DEFAULT_EXPLORE_PROB: f64 = 0.1;
pub const DEFAULT_BENCHMARK_ITERS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioKind {
    Quadratic,
    LogDet,
    Jester,
    Custom,
}

impl ScenarioKind {
    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::Quadratic => "quadratic",
            ScenarioKind::LogDet => "logdet",
            ScenarioKind::Jester => "jester",
            ScenarioKind::Custom => "custom",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "quadratic" => ScenarioKind::Quadratic,
            "logdet" => ScenarioKind::LogDet,
            "jester" => ScenarioKind::Jester,
            "custom" => ScenarioKind::Custom,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    None,
    Delta,
    Mu,
    Horizon,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::None => "none",
            SweepAxis::Delta => "delta",
            SweepAxis::Mu => "mu",
            SweepAxis::Horizon => "T",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub kind: ScenarioKind,
    pub seed: u64,
    pub horizon: usize,
    pub budget_total: f64,
    pub dataset: Option<PathBuf>,
    /// Users generated in place of a dataset file.
    pub synthetic_users: Option<usize>,
    pub sentinel: f64,
    pub shuffle: bool,
    pub utility_table: Option<PathBuf>,
    pub cost_lo: Option<Vec<f64>>,
    pub cost_hi: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlgorithmSpec {
    pub update_rule: UpdateRule,
    pub epsilon: f64,
    pub mu: Option<f64>,
    pub k: Option<usize>,
    pub delta: Option<f64>,
    pub auto_params: bool,
    pub baselines: Vec<BaselineKind>,
    /// Slots filled by the baselines; unset means the domain's cap (or `n`).
    pub slots: Option<usize>,
    pub explore_prob: f64,
    pub benchmark_iters: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub replicates: usize,
    pub sweep: SweepAxis,
    pub delta_values: Vec<f64>,
    pub mu_values: Vec<f64>,
    pub t_values: Vec<usize>,
    pub output_dir: PathBuf,
}

/// A fully defaulted, validated run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunPlan {
    pub scenario: ScenarioSpec,
    pub algorithm: AlgorithmSpec,
    pub run: RunSpec,
}

/// Typed accessors over one section that record every problem.
struct Section<'a> {
    name: &'static str,
    table: Option<&'a Table>,
    errs: &'a mut Vec<String>,
    seen: Vec<&'static str>,
}

impl<'a> Section<'a> {
    fn raw(&mut self, key: &'static str) -> Option<&'a Value> {
        self.seen.push(key);
        self.table.and_then(|t| t.get(key))
    }

    fn err(&mut self, key: &str, msg: impl std::fmt::Display) {
        self.errs.push(format!("{}.{key}: {msg}", self.name));
    }

    fn int(&mut self, key: &'static str) -> Option<i64> {
        match self.raw(key)? {
            Value::Integer(i) => Some(*i),
            other => {
                self.err(key, format!("expected integer, got {}", other.type_str()));
                None
            }
        }
    }

    fn count(&mut self, key: &'static str, min: i64) -> Option<usize> {
        let v = self.int(key)?;
        if v < min {
            self.err(key, format!("must be ≥ {min}, got {v}"));
            return None;
        }
        Some(v as usize)
    }

    fn float(&mut self, key: &'static str) -> Option<f64> {
        match self.raw(key)? {
            Value::Float(f) => Some(*f),
            Value::Integer(i) => Some(*i as f64),
            other => {
                self.err(key, format!("expected number, got {}", other.type_str()));
                None
            }
        }
    }

    fn boolean(&mut self, key: &'static str) -> Option<bool> {
        match self.raw(key)? {
            Value::Boolean(b) => Some(*b),
            other => {
                self.err(key, format!("expected boolean, got {}", other.type_str()));
                None
            }
        }
    }

    fn string(&mut self, key: &'static str) -> Option<&'a str> {
        match self.raw(key)? {
            Value::String(s) => Some(s.as_str()),
            other => {
                self.err(key, format!("expected string, got {}", other.type_str()));
                None
            }
        }
    }

    /// A number, or the string `"auto"` (⇒ `Ok(None)`).
    fn auto_float(&mut self, key: &'static str) -> Option<Option<f64>> {
        match self.raw(key)? {
            Value::String(s) if s == "auto" => Some(None),
            Value::Float(f) => Some(Some(*f)),
            Value::Integer(i) => Some(Some(*i as f64)),
            other => {
                self.err(key, format!("expected number or \"auto\", got {other}"));
                None
            }
        }
    }

    fn auto_count(&mut self, key: &'static str) -> Option<Option<usize>> {
        match self.raw(key)? {
            Value::String(s) if s == "auto" => Some(None),
            Value::Integer(i) if *i >= 1 => Some(Some(*i as usize)),
            other => {
                self.err(
                    key,
                    format!("expected integer ≥ 1 or \"auto\", got {other}"),
                );
                None
            }
        }
    }

    fn float_list(&mut self, key: &'static str) -> Option<Vec<f64>> {
        let Value::Array(items) = self.raw(key)? else {
            self.err(key, "expected array of numbers");
            return None;
        };
        let mut out = Vec::with_capacity(items.len());
        for (i, v) in items.iter().enumerate() {
            match v {
                Value::Float(f) => out.push(*f),
                Value::Integer(n) => out.push(*n as f64),
                other => {
                    self.err(key, format!("element {i}: expected number, got {other}"));
                    return None;
                }
            }
        }
        Some(out)
    }

    fn count_list(&mut self, key: &'static str) -> Option<Vec<usize>> {
        let Value::Array(items) = self.raw(key)? else {
            self.err(key, "expected array of integers");
            return None;
        };
        let mut out = Vec::with_capacity(items.len());
        for (i, v) in items.iter().enumerate() {
            match v {
                Value::Integer(n) if *n >= 1 => out.push(*n as usize),
                other => {
                    self.err(
                        key,
                        format!("element {i}: expected integer ≥ 1, got {other}"),
                    );
                    return None;
                }
            }
        }
        Some(out)
    }

    fn string_list(&mut self, key: &'static str) -> Option<Vec<&'a str>> {
        let Value::Array(items) = self.raw(key)? else {
            self.err(key, "expected array of strings");
            return None;
        };
        let mut out = Vec::with_capacity(items.len());
        for (i, v) in items.iter().enumerate() {
            match v {
                Value::String(s) => out.push(s.as_str()),
                other => {
                    self.err(key, format!("element {i}: expected string, got {other}"));
                    return None;
                }
            }
        }
        Some(out)
    }

    fn finish(self) {
        let Some(t) = self.table else { return };
        let mut unknown: Vec<&String> = t
            .keys()
            .filter(|k| !self.seen.contains(&k.as_str()))
            .collect();
        unknown.sort();
        for k in unknown {
            self.errs.push(format!("{}.{k}: unknown key", self.name));
        }
    }
}

fn section<'a>(root: &'a Table, name: &'static str, errs: &mut Vec<String>) -> Option<&'a Table> {
    match root.get(name) {
        None => None,
        Some(Value::Table(t)) => Some(t),
        Some(_) => {
            errs.push(format!("{name}: expected a table"));
            None
        }
    }
}

pub fn parse_config_file(path: &Path) -> Result<RunPlan> {
    let text = std::fs::read_to_string(path)?;
    let mut plan = parse_config(&text)?;
    // relative data paths resolve against the config file
    if let Some(dir) = path.parent() {
        for p in [&mut plan.scenario.dataset, &mut plan.scenario.utility_table]
            .into_iter()
            .flatten()
        {
            if p.is_relative() {
                *p = dir.join(&p);
            }
        }
    }
    Ok(plan)
}

pub fn parse_config(text: &str) -> Result<RunPlan> {
    let root: Table = text
        .parse()
        .map_err(|e: toml::de::Error| Error::Config(vec![format!("syntax: {}", e.message())]))?;
    let mut errs = Vec::new();
    for k in root.keys() {
        if !["scenario", "algorithm", "run"].contains(&k.as_str()) {
            errs.push(format!("{k}: unknown section"));
        }
    }
    let sc_t = section(&root, "scenario", &mut errs);
    let al_t = section(&root, "algorithm", &mut errs);
    let ru_t = section(&root, "run", &mut errs);

    // [scenario]
    let mut s = Section {
        name: "scenario",
        table: sc_t,
        errs: &mut errs,
        seen: vec![],
    };
    let kind = match s.string("scenario") {
        Some(name) => ScenarioKind::parse(name).or_else(|| {
            s.err("scenario", format!("unknown scenario {name:?}"));
            None
        }),
        None => {
            if sc_t.is_none_or(|t| !t.contains_key("scenario")) {
                s.err("scenario", "required");
            }
            None
        }
    };
    let seed = s.int("seed").and_then(|v| {
        if v < 0 {
            s.err("seed", "must be ≥ 0");
            None
        } else {
            Some(v as u64)
        }
    });
    let horizon = s.count("T", 1);
    let budget_total = s.float("budget_total");
    let dataset = s.string("dataset").map(PathBuf::from);
    let synthetic_users = s.count("synthetic_users", 1);
    let sentinel = s.float("sentinel").unwrap_or(DEFAULT_SENTINEL);
    let shuffle = s.boolean("shuffle").unwrap_or(false);
    let utility_table = s.string("utility_table").map(PathBuf::from);
    let cost_lo = s.float_list("cost_lo");
    let cost_hi = s.float_list("cost_hi");
    if let Some(b) = budget_total {
        if b.is_nan() || b <= 0.0 {
            s.err("budget_total", format!("must be > 0, got {b}"));
        }
    }
    s.finish();

    // [algorithm]
    let mut a = Section {
        name: "algorithm",
        table: al_t,
        errs: &mut errs,
        seen: vec![],
    };
    let update_rule = match a.string("update_rule") {
        Some(r) => UpdateRule::parse(r).unwrap_or_else(|| {
            a.err(
                "update_rule",
                format!("expected \"I\" or \"II\", got {r:?}"),
            );
            UpdateRule::Expectation
        }),
        None => UpdateRule::Expectation,
    };
    let epsilon = a.float("epsilon").unwrap_or(DEFAULT_EPSILON);
    if !(epsilon > 0.0 && epsilon < 1.0) {
        a.err("epsilon", format!("must lie in (0, 1), got {epsilon}"));
    }
    let mu = a.auto_float("mu").flatten();
    let k = a.auto_count("K").flatten();
    let delta = a.auto_float("delta").flatten();
    for (key, v) in [("mu", mu), ("delta", delta)] {
        if let Some(v) = v {
            if !(v.is_finite() && v > 0.0) {
                a.err(key, format!("must be finite and > 0, got {v}"));
            }
        }
    }
    let auto_params = a.boolean("auto_params").unwrap_or(true);
    if !auto_params {
        for (key, missing) in [
            ("mu", mu.is_none()),
            ("K", k.is_none()),
            ("delta", delta.is_none()),
        ] {
            if missing {
                a.err(key, "required when auto_params = false");
            }
        }
    }
    let baselines = match a.string_list("baselines") {
        Some(names) => {
            let mut out = Vec::new();
            for n in names {
                match BaselineKind::parse(n) {
                    Some(b) if !out.contains(&b) => out.push(b),
                    Some(_) => a.err("baselines", format!("{n:?} listed twice")),
                    None => a.err("baselines", format!("unknown baseline {n:?}")),
                }
            }
            out
        }
        None => default_baselines(kind),
    };
    let slots = a.count("slots", 1);
    let explore_prob = a.float("explore_prob").unwrap_or(DEFAULT_EXPLORE_PROB);
    if !(0.0..=1.0).contains(&explore_prob) {
        a.err(
            "explore_prob",
            format!("must lie in [0, 1], got {explore_prob}"),
        );
    }
    let benchmark_iters = a
        .count("benchmark_iters", 1)
        .unwrap_or(DEFAULT_BENCHMARK_ITERS);
    a.finish();

    // [run]
    let mut r = Section {
        name: "run",
        table: ru_t,
        errs: &mut errs,
        seen: vec![],
    };
    let replicates = r.count("replicates", 1).unwrap_or(1);
    let sweep = match r.string("sweep") {
        None | Some("none") => SweepAxis::None,
        Some("delta") => SweepAxis::Delta,
        Some("mu") => SweepAxis::Mu,
        Some("T") => SweepAxis::Horizon,
        Some(other) => {
            r.err(
                "sweep",
                format!("expected none, delta, mu or T, got {other:?}"),
            );
            SweepAxis::None
        }
    };
    let delta_values = r.float_list("delta_values").unwrap_or_default();
    let mu_values = r.float_list("mu_values").unwrap_or_default();
    let t_values = r.count_list("T_values").unwrap_or_default();
    for (key, vals) in [("delta_values", &delta_values), ("mu_values", &mu_values)] {
        if vals.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            r.err(key, "every value must be finite and > 0");
        }
    }
    match sweep {
        SweepAxis::Delta if delta_values.is_empty() => {
            r.err("delta_values", "required for sweep = \"delta\"")
        }
        SweepAxis::Mu if mu_values.is_empty() => r.err("mu_values", "required for sweep = \"mu\""),
        SweepAxis::Horizon if t_values.is_empty() => {
            r.err("T_values", "required for sweep = \"T\"")
        }
        _ => {}
    }
    let output_dir = r
        .string("output_dir")
        .map_or_else(|| PathBuf::from("out"), PathBuf::from);
    r.finish();

    // scenario-dependent defaults and requirements
    let mut sc_err = |key: &str, msg: &str| errs.push(format!("scenario.{key}: {msg}"));
    let (horizon, budget_total) = match kind {
        Some(ScenarioKind::Quadratic) => {
            let t = horizon.unwrap_or(QUADRATIC_HORIZON);
            (
                t,
                budget_total.unwrap_or(QUADRATIC_PER_ROUND_BUDGET * t as f64),
            )
        }
        Some(ScenarioKind::Jester) => {
            if dataset.is_none() && synthetic_users.is_none() {
                sc_err(
                    "dataset",
                    "required for the jester scenario (or set synthetic_users)",
                );
            }
            let t = horizon.unwrap_or_else(|| {
                synthetic_users
                    .unwrap_or(JESTER_DEFAULT_USERS)
                    .min(JESTER_DEFAULT_USERS)
            });
            (
                t,
                budget_total.unwrap_or(JESTER_PER_ROUND_BUDGET * t as f64),
            )
        }
        Some(ScenarioKind::LogDet) => {
            if budget_total.is_none() {
                sc_err(
                    "budget_total",
                    "required for the logdet scenario (no default exists)",
                );
            }
            (
                horizon.unwrap_or(LOGDET_HORIZON),
                budget_total.unwrap_or(f64::NAN),
            )
        }
        Some(ScenarioKind::Custom) => {
            for (key, missing) in [
                ("utility_table", utility_table.is_none()),
                ("cost_lo", cost_lo.is_none()),
                ("cost_hi", cost_hi.is_none()),
                ("budget_total", budget_total.is_none()),
            ] {
                if missing {
                    sc_err(key, "required for the custom scenario");
                }
            }
            (
                horizon.unwrap_or(DEFAULT_CUSTOM_HORIZON),
                budget_total.unwrap_or(f64::NAN),
            )
        }
        None => (0, f64::NAN),
    };
    if let (Some(lo), Some(hi)) = (&cost_lo, &cost_hi) {
        if lo.len() != hi.len() {
            errs.push("scenario.cost_hi: length differs from cost_lo".into());
        }
    }

    if !errs.is_empty() {
        return Err(Error::Config(errs));
    }
    Ok(RunPlan {
        scenario: ScenarioSpec {
            kind: kind.expect("validated"),
            seed: seed.unwrap_or(0),
            horizon,
            budget_total,
            dataset,
            synthetic_users,
            sentinel,
            shuffle,
            utility_table,
            cost_lo,
            cost_hi,
        },
        algorithm: AlgorithmSpec {
            update_rule,
            epsilon,
            mu,
            k,
            delta,
            auto_params,
            baselines,
            slots,
            explore_prob,
            benchmark_iters,
        },
        run: RunSpec {
            replicates,
            sweep,
            delta_values,
            mu_values,
            t_values,
            output_dir,
        },
    })
}

fn default_baselines(kind: Option<ScenarioKind>) -> Vec<BaselineKind> {
    match kind {
        Some(ScenarioKind::Jester) => BaselineKind::ALL.to_vec(),
        _ => Vec::new(),
    }
}

fn fmt_float(v: f64) -> String {
    // TOML floats need a decimal point or exponent
    let s = format!("{v:?}");
    if s.contains(['.', 'e', 'E']) || !v.is_finite() {
        s
    } else {
        format!("{s}.0")
    }
}

fn fmt_list<T, F: Fn(&T) -> String>(v: &[T], f: F) -> String {
    format!("[{}]", v.iter().map(f).collect::<Vec<_>>().join(", "))
}

fn quote(s: &str) -> String {
    Value::String(s.to_string()).to_string()
}

impl RunPlan {
    /// The plan with every field written out; parsing it back yields an
    /// identical plan.
    pub fn to_toml(&self) -> String {
        let s = &self.scenario;
        let a = &self.algorithm;
        let r = &self.run;
        let mut out = String::new();
        let w = &mut out;
        let _ = writeln!(w, "[scenario]");
        let _ = writeln!(w, "scenario = {}", quote(s.kind.name()));
        let _ = writeln!(w, "seed = {}", s.seed);
        let _ = writeln!(w, "T = {}", s.horizon);
        let _ = writeln!(w, "budget_total = {}", fmt_float(s.budget_total));
        if let Some(p) = &s.dataset {
            let _ = writeln!(w, "dataset = {}", quote(&p.to_string_lossy()));
        }
        if let Some(u) = s.synthetic_users {
            let _ = writeln!(w, "synthetic_users = {u}");
        }
        let _ = writeln!(w, "sentinel = {}", fmt_float(s.sentinel));
        let _ = writeln!(w, "shuffle = {}", s.shuffle);
        if let Some(p) = &s.utility_table {
            let _ = writeln!(w, "utility_table = {}", quote(&p.to_string_lossy()));
        }
        if let Some(v) = &s.cost_lo {
            let _ = writeln!(w, "cost_lo = {}", fmt_list(v, |x| fmt_float(*x)));
        }
        if let Some(v) = &s.cost_hi {
            let _ = writeln!(w, "cost_hi = {}", fmt_list(v, |x| fmt_float(*x)));
        }
        let auto = |v: Option<String>| v.unwrap_or_else(|| quote("auto"));
        let _ = writeln!(w, "\n[algorithm]");
        let _ = writeln!(w, "update_rule = {}", quote(a.update_rule.label()));
        let _ = writeln!(w, "epsilon = {}", fmt_float(a.epsilon));
        let _ = writeln!(w, "mu = {}", auto(a.mu.map(fmt_float)));
        let _ = writeln!(w, "K = {}", auto(a.k.map(|k| k.to_string())));
        let _ = writeln!(w, "delta = {}", auto(a.delta.map(fmt_float)));
        let _ = writeln!(w, "auto_params = {}", a.auto_params);
        let _ = writeln!(
            w,
            "baselines = {}",
            fmt_list(&a.baselines, |b| quote(b.name()))
        );
        if let Some(m) = a.slots {
            let _ = writeln!(w, "slots = {m}");
        }
        let _ = writeln!(w, "explore_prob = {}", fmt_float(a.explore_prob));
        let _ = writeln!(w, "benchmark_iters = {}", a.benchmark_iters);
        let _ = writeln!(w, "\n[run]");
        let _ = writeln!(w, "replicates = {}", r.replicates);
        let _ = writeln!(w, "sweep = {}", quote(r.sweep.name()));
        let _ = writeln!(
            w,
            "delta_values = {}",
            fmt_list(&r.delta_values, |x| fmt_float(*x))
        );
        let _ = writeln!(
            w,
            "mu_values = {}",
            fmt_list(&r.mu_values, |x| fmt_float(*x))
        );
        let _ = writeln!(w, "T_values = {}", fmt_list(&r.t_values, |x| x.to_string()));
        let _ = writeln!(w, "output_dir = {}", quote(&r.output_dir.to_string_lossy()));
        out
    }

    /// Seeds of the replicates: `seed, seed + 1, …`.
    pub fn seeds(&self) -> Vec<u64> {
        (0..self.run.replicates as u64)
            .map(|i| self.scenario.seed.wrapping_add(i))
            .collect()
    }

    /// Builds the scenario for one replicate seed with the plan's horizon.
    pub fn build_scenario(&self, seed: u64) -> Result<Scenario> {
        self.build_scenario_with_horizon(seed, self.scenario.horizon)
    }

    /// As [`RunPlan::build_scenario`] with a different horizon; the
    /// per-round budget is kept.
    pub fn build_scenario_with_horizon(&self, seed: u64, horizon: usize) -> Result<Scenario> {
        let s = &self.scenario;
        let per_round = s.budget_total / s.horizon as f64;
        let budget = per_round * horizon as f64;
        let sc = match s.kind {
            ScenarioKind::Quadratic => scenario_quadratic(seed)?,
            ScenarioKind::LogDet => scenario_logdet(seed, per_round)?,
            ScenarioKind::Jester => {
                let ds = match (&s.dataset, s.synthetic_users) {
                    (Some(p), _) => load_jester(p, s.sentinel)?,
                    (None, Some(u)) => {
                        parse_jester(&synthetic_jester_csv(u, seed), DEFAULT_SENTINEL)?
                    }
                    (None, None) => unreachable!("validated"),
                };
                let opts = JesterOptions {
                    horizon,
                    slots: self.algorithm.slots.unwrap_or(JESTER_SLOTS),
                    shuffle: s.shuffle,
                };
                return scenario_jester(&ds, seed, &opts)?.with_budget_total(budget);
            }
            ScenarioKind::Custom => {
                let path = s.utility_table.as_ref().expect("validated");
                let f = Arc::new(MultilinearUtility::from_table_file(path)?);
                let lo = s.cost_lo.clone().expect("validated");
                let hi = s.cost_hi.clone().expect("validated");
                let costs = ConstraintDistribution::uniform_box(lo, hi)?;
                let n = crate::Utility::dim(f.as_ref());
                Scenario::fixed("custom", f, Domain::unit_box(n), costs, horizon, budget)?
            }
        };
        sc.with_horizon(horizon)?.with_budget_total(budget)
    }

    /// Algorithm configuration for a scenario built from this plan.
    pub fn olfw_config(&self, scenario: &Scenario) -> OlfwConfig {
        let a = &self.algorithm;
        OlfwConfig {
            horizon: scenario.horizon(),
            k: a.k,
            mu: a.mu,
            delta: a.delta,
            update_rule: a.update_rule,
            epsilon: a.epsilon,
            budget_total: scenario.budget_total(),
            auto_params: a.auto_params,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "[scenario]\nscenario = \"quadratic\"\nseed = 1\n";

    #[test]
    fn minimal_config_is_fully_defaulted() {
        let p = parse_config(MINIMAL).unwrap();
        assert_eq!(p.scenario.kind, ScenarioKind::Quadratic);
        assert_eq!(p.scenario.seed, 1);
        assert_eq!(p.scenario.horizon, 1000);
        assert_eq!(p.scenario.budget_total, 2000.0);
        assert_eq!(p.algorithm.update_rule, UpdateRule::Expectation);
        assert_eq!(p.algorithm.epsilon, DEFAULT_EPSILON);
        assert!(p.algorithm.auto_params && p.algorithm.mu.is_none());
        assert_eq!(p.run.sweep, SweepAxis::None);
        assert_eq!(p.seeds(), vec![1]);
    }

    #[test]
    fn defaulted_plan_round_trips() {
        let p = parse_config(MINIMAL).unwrap();
        assert_eq!(parse_config(&p.to_toml()).unwrap(), p);
        let text = "[scenario]\nscenario = \"jester\"\nsynthetic_users = 300\nT = 200\n\
                    [algorithm]\nupdate_rule = \"II\"\ndelta = 10.2\nK = 7\n\
                    [run]\nsweep = \"mu\"\nmu_values = [0.01, 1e-3, 2]\nreplicates = 3\n";
        let p = parse_config(text).unwrap();
        assert_eq!(p.algorithm.baselines.len(), 4);
        assert_eq!(parse_config(&p.to_toml()).unwrap(), p);
    }

    #[test]
    fn bad_epsilon_is_named() {
        let text = format!("{MINIMAL}[algorithm]\nepsilon = 1.5\n");
        let Err(Error::Config(errs)) = parse_config(&text) else {
            panic!("expected a config error")
        };
        assert_eq!(errs.len(), 1);
        assert!(errs[0].contains("epsilon"), "{errs:?}");
    }

    #[test]
    fn every_offending_field_is_listed() {
        let text = "[scenario]\nscenario = \"logdet\"\nT = \"many\"\ncolour = 3\n\
                    [algorithm]\nmu = -1\nupdate_rule = \"III\"\n[run]\nsweep = \"delta\"\n[extra]\n";
        let Err(Error::Config(errs)) = parse_config(text) else {
            panic!("expected a config error")
        };
        for needle in [
            "scenario.T",
            "scenario.colour",
            "algorithm.mu",
            "algorithm.update_rule",
            "run.delta_values",
            "extra",
            "scenario.budget_total",
        ] {
            assert!(
                errs.iter().any(|e| e.contains(needle)),
                "{needle} missing from {errs:?}"
            );
        }
    }

    #[test]
    fn missing_scenario_is_reported() {
        let Err(Error::Config(errs)) = parse_config("[run]\nreplicates = 2\n") else {
            panic!()
        };
        assert!(errs.iter().any(|e| e.contains("scenario.scenario")));
    }

    #[test]
    fn builds_scenarios() {
        let p = parse_config("[scenario]\nscenario = \"quadratic\"\nT = 64\n").unwrap();
        let s = p.build_scenario(0).unwrap();
        assert_eq!((s.horizon(), s.budget_total()), (64, 128.0));
        let s = p.build_scenario_with_horizon(0, 256).unwrap();
        assert_eq!(s.budget_total(), 512.0);
        let cfg = p.olfw_config(&s);
        assert_eq!(cfg.horizon, 256);
    }
}
