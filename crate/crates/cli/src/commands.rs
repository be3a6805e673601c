//! The `run`, `sweep`, `jester` and `scaling` commands.

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::anyhow;
use rayon::prelude::*;
use serde_json::{json, Value};

use olfw_core::baselines::{run_baseline, BaselineKind, BaselinePolicy};
use olfw_core::evaluation::{
    metrics, scaling_study, scenario_benchmark, BenchmarkResult, MetricsReport,
};
use olfw_core::numeric::ksum;
use olfw_core::olfw::{run_olfw_with, ProblemConstants, ResolvedParams, RunOptions};
use olfw_core::scenario::config::{parse_config_file, RunPlan, ScenarioKind, SweepAxis};
use olfw_core::{RunTrace, Scenario};

use crate::output::{num, write_json, Table, SUMMARY_COLUMNS};
use crate::plot::{render, Panel, Series};
use crate::{CmdResult, Failure, Flags};

/// Loads the plan and applies the command-line seed override.
pub fn load_plan(path: &Path, flags: &Flags) -> Result<RunPlan, Failure> {
    let mut plan = parse_config_file(path).map_err(Failure::usage)?;
    if let Some(s) = flags.seed {
        plan.scenario.seed = s;
    }
    Ok(plan)
}

fn out_dir(plan: &RunPlan, flags: &Flags) -> PathBuf {
    flags
        .out
        .clone()
        .unwrap_or_else(|| plan.run.output_dir.clone())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Olfw,
    Baseline(BaselineKind),
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Olfw => "olfw",
            Algorithm::Baseline(b) => b.name(),
        }
    }
}

/// A scenario for one seed together with its benchmark.
pub struct Prepared {
    pub seed: u64,
    pub scenario: Scenario,
    pub benchmark: BenchmarkResult,
}

/// Builds scenarios (config-level failures) and their benchmarks
/// (runtime failures) for every `(seed, horizon)` pair.
fn prepare(plan: &RunPlan, keys: &[(u64, usize)]) -> Result<Vec<Prepared>, Failure> {
    let scenarios = keys
        .par_iter()
        .map(|&(seed, t)| {
            let sc = plan.build_scenario_with_horizon(seed, t)?;
            plan.olfw_config(&sc).validate()?;
            Ok(sc)
        })
        .collect::<olfw_core::Result<Vec<_>>>()
        .map_err(Failure::usage)?;
    scenarios
        .into_par_iter()
        .zip(keys.par_iter())
        .map(|(scenario, &(seed, _))| {
            let benchmark = scenario_benchmark(&scenario, plan.algorithm.benchmark_iters)?;
            Ok(Prepared {
                seed,
                scenario,
                benchmark,
            })
        })
        .collect::<olfw_core::Result<Vec<_>>>()
        .map_err(Failure::runtime)
}

/// Knobs a sweep overrides on top of the plan.
#[derive(Debug, Clone, Copy, Default)]
pub struct Override {
    pub delta: Option<f64>,
    pub mu: Option<f64>,
}

pub struct Outcome {
    pub seed: u64,
    pub algorithm: Algorithm,
    pub trace: RunTrace,
    pub metrics: MetricsReport,
    pub params: Option<ResolvedParams>,
    pub constants: Option<ProblemConstants>,
}

impl Outcome {
    fn horizon(&self) -> usize {
        self.trace.horizon
    }

    /// `Σ_t λ_t g̃_t(x_t)`
    fn dual_penalty(&self) -> f64 {
        ksum(self.trace.records.iter().map(|r| r.lambda * r.g_tilde))
    }
}

pub fn execute(
    plan: &RunPlan,
    prep: &Prepared,
    algorithm: Algorithm,
    over: Override,
) -> olfw_core::Result<Outcome> {
    let sc = &prep.scenario;
    let mut cfg = plan.olfw_config(sc);
    if over.delta.is_some() {
        cfg.delta = over.delta;
    }
    if over.mu.is_some() {
        cfg.mu = over.mu;
    }
    let (trace, params, constants) = match algorithm {
        Algorithm::Olfw => {
            let run = run_olfw_with(sc, &cfg, prep.seed, &RunOptions::default())?;
            (run.trace, Some(run.params), Some(run.constants))
        }
        Algorithm::Baseline(kind) => {
            let slots = plan.algorithm.slots.unwrap_or_else(|| {
                sc.domain()
                    .cap()
                    .map_or(sc.dim(), |c| (c.floor() as usize).clamp(1, sc.dim()))
            });
            let policy = BaselinePolicy::new(kind, slots, plan.algorithm.explore_prob)?;
            (run_baseline(sc, &policy, &cfg, prep.seed)?, None, None)
        }
    };
    let metrics = metrics(
        &trace,
        &prep.benchmark,
        &sc.constraint().mean(),
        sc.budget_total(),
    );
    Ok(Outcome {
        seed: prep.seed,
        algorithm,
        trace,
        metrics,
        params,
        constants,
    })
}

fn execute_all(
    plan: &RunPlan,
    jobs: &[(&Prepared, Algorithm, Override)],
) -> Result<Vec<Outcome>, Failure> {
    jobs.par_iter()
        .map(|(p, a, o)| execute(plan, p, *a, *o))
        .collect::<olfw_core::Result<Vec<_>>>()
        .map_err(Failure::runtime)
}

fn summary_table(outcomes: &[Outcome]) -> Table {
    let mut t = Table::new(&SUMMARY_COLUMNS);
    for o in outcomes {
        t.row(&[
            o.horizon().to_string(),
            o.seed.to_string(),
            o.algorithm.name().to_string(),
            num(o.metrics.cumulative_utility),
            num(o.metrics.regret),
            num(o.metrics.violation),
            num(o.metrics.positive_violation),
        ]);
    }
    t
}

fn trace_path(out: &Path, o: &Outcome) -> PathBuf {
    out.join("traces").join(format!(
        "{}_T{}_seed{}.csv",
        o.algorithm.name(),
        o.horizon(),
        o.seed
    ))
}

fn write_traces(out: &Path, outcomes: &[Outcome]) -> CmdResult {
    for o in outcomes {
        crate::output::write_atomic(&trace_path(out, o), o.trace.to_csv_string().as_bytes())
            .map_err(Failure::runtime)?;
    }
    Ok(())
}

fn run_metadata(o: &Outcome, prep: &Prepared) -> Value {
    json!({
        "seed": o.seed,
        "algorithm": o.algorithm.name(),
        "T": o.horizon(),
        "budget_total": o.trace.budget_total,
        "params": o.params,
        "constants": o.constants,
        "benchmark": {
            "label": prep.benchmark.label,
            "offline_iterations": prep.benchmark.offline_iterations,
            "total_value": prep.benchmark.total_value,
            "x_star": prep.benchmark.x_star,
        },
        "scenario_notes": prep.scenario.notes(),
    })
}

fn metadata(command: &str, plan: &RunPlan, start: Instant, extra: Value) -> Value {
    json!({
        "command": command,
        "config": plan.to_toml(),
        "wall_time_seconds": start.elapsed().as_secs_f64(),
        "details": extra,
    })
}

fn say(flags: &Flags, line: impl AsRef<str>) {
    if !flags.quiet {
        println!("{}", line.as_ref());
    }
}

fn report(flags: &Flags, outcomes: &[Outcome]) {
    for o in outcomes {
        say(
            flags,
            format!(
                "{:<16} T={:<6} seed={:<6} utility={:.4} regret={:.4} violation={:.4}",
                o.algorithm.name(),
                o.horizon(),
                o.seed,
                o.metrics.cumulative_utility,
                o.metrics.regret,
                o.metrics.violation
            ),
        );
    }
}

fn configured_algorithms(plan: &RunPlan) -> Vec<Algorithm> {
    std::iter::once(Algorithm::Olfw)
        .chain(
            plan.algorithm
                .baselines
                .iter()
                .map(|b| Algorithm::Baseline(*b)),
        )
        .collect()
}

/// Outcomes sorted into `(prepared index, algorithm)` order with their
/// metadata entries.
fn run_matrix(
    plan: &RunPlan,
    preps: &[Prepared],
    algorithms: &[Algorithm],
) -> Result<(Vec<Outcome>, Vec<Value>), Failure> {
    let jobs: Vec<_> = preps
        .iter()
        .flat_map(|p| algorithms.iter().map(move |a| (p, *a, Override::default())))
        .collect();
    let outcomes = execute_all(plan, &jobs)?;
    let meta = outcomes
        .iter()
        .zip(&jobs)
        .map(|(o, (p, _, _))| run_metadata(o, p))
        .collect();
    Ok((outcomes, meta))
}

pub fn cmd_run(config: &Path, flags: &Flags) -> CmdResult {
    let start = Instant::now();
    let plan = load_plan(config, flags)?;
    let out = out_dir(&plan, flags);
    let keys: Vec<_> = plan
        .seeds()
        .into_iter()
        .map(|s| (s, plan.scenario.horizon))
        .collect();
    let preps = prepare(&plan, &keys)?;
    let (outcomes, meta) = run_matrix(&plan, &preps, &configured_algorithms(&plan))?;
    write_traces(&out, &outcomes)?;
    summary_table(&outcomes)
        .write(&out.join("summary.csv"))
        .map_err(Failure::runtime)?;
    write_json(
        &out.join("metadata.json"),
        &metadata("run", &plan, start, json!({ "runs": meta })),
    )
    .map_err(Failure::runtime)?;
    report(flags, &outcomes);
    say(flags, format!("wrote {}", out.display()));
    Ok(())
}

fn mean(v: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = v.collect();
    ksum(v.iter().copied()) / v.len().max(1) as f64
}

pub fn cmd_sweep(config: &Path, flags: &Flags) -> CmdResult {
    let start = Instant::now();
    let plan = load_plan(config, flags)?;
    let out = out_dir(&plan, flags);
    let r = &plan.run;
    let values: Vec<f64> = match r.sweep {
        SweepAxis::None => {
            return Err(Failure::usage(anyhow!(
                "run.sweep must name an axis (delta, mu or T)"
            )))
        }
        SweepAxis::Delta => r.delta_values.clone(),
        SweepAxis::Mu => r.mu_values.clone(),
        SweepAxis::Horizon => r.t_values.iter().map(|t| *t as f64).collect(),
    };
    if values.is_empty() {
        return Err(Failure::usage(anyhow!(
            "run: no values for sweep axis {}",
            r.sweep.name()
        )));
    }
    let seeds = plan.seeds();
    let horizons: Vec<usize> = match r.sweep {
        SweepAxis::Horizon => r.t_values.clone(),
        _ => vec![plan.scenario.horizon],
    };
    let keys: Vec<(u64, usize)> = horizons
        .iter()
        .flat_map(|&t| seeds.iter().map(move |&s| (s, t)))
        .collect();
    let preps = prepare(&plan, &keys)?;
    let mut jobs = Vec::new();
    for (vi, v) in values.iter().enumerate() {
        for si in 0..seeds.len() {
            let (prep, over) = match r.sweep {
                SweepAxis::Delta => (
                    &preps[si],
                    Override {
                        delta: Some(*v),
                        mu: None,
                    },
                ),
                SweepAxis::Mu => (
                    &preps[si],
                    Override {
                        delta: None,
                        mu: Some(*v),
                    },
                ),
                _ => (&preps[vi * seeds.len() + si], Override::default()),
            };
            jobs.push((prep, Algorithm::Olfw, over));
        }
    }
    let outcomes = execute_all(&plan, &jobs)?;
    let axis = r.sweep.name();
    let fmt_value = |v: f64| match r.sweep {
        SweepAxis::Horizon => format!("{}", v as usize),
        _ => num(v),
    };
    let mut runs = Table::new(&[
        axis,
        "seed",
        "cumulative_utility",
        "remaining_budget",
        "regret",
        "violation",
        "positive_violation",
        "dual_penalty",
    ]);
    let mut agg = Table::new(&[
        axis,
        "mean_utility",
        "mean_remaining_budget",
        "mean_regret",
        "mean_violation",
        "mean_positive_violation",
        "mean_dual_penalty",
        "runs",
    ]);
    let mut curve = Vec::new();
    for (vi, v) in values.iter().enumerate() {
        let group = &outcomes[vi * seeds.len()..(vi + 1) * seeds.len()];
        for o in group {
            runs.row(&[
                fmt_value(*v),
                o.seed.to_string(),
                num(o.metrics.cumulative_utility),
                num(-o.metrics.violation),
                num(o.metrics.regret),
                num(o.metrics.violation),
                num(o.metrics.positive_violation),
                num(o.dual_penalty()),
            ]);
        }
        let mu_util = mean(group.iter().map(|o| o.metrics.cumulative_utility));
        let mu_rem = mean(group.iter().map(|o| -o.metrics.violation));
        agg.row(&[
            fmt_value(*v),
            num(mu_util),
            num(mu_rem),
            num(mean(group.iter().map(|o| o.metrics.regret))),
            num(mean(group.iter().map(|o| o.metrics.violation))),
            num(mean(group.iter().map(|o| o.metrics.positive_violation))),
            num(mean(group.iter().map(|o| o.dual_penalty()))),
            group.len().to_string(),
        ]);
        curve.push((*v, mu_util, mu_rem));
    }
    runs.write(&out.join("sweep_runs.csv"))
        .map_err(Failure::runtime)?;
    agg.write(&out.join("sweep.csv"))
        .map_err(Failure::runtime)?;
    let svg = sweep_plot(r.sweep, &curve);
    crate::output::write_atomic(&out.join("sweep.svg"), svg.as_bytes())
        .map_err(Failure::runtime)?;
    if values.len() == 1 {
        write_traces(&out, &outcomes)?;
        summary_table(&outcomes)
            .write(&out.join("summary.csv"))
            .map_err(Failure::runtime)?;
    }
    let meta: Vec<Value> = outcomes
        .iter()
        .zip(&jobs)
        .map(|(o, (p, _, _))| run_metadata(o, p))
        .collect();
    write_json(
        &out.join("metadata.json"),
        &metadata(
            "sweep",
            &plan,
            start,
            json!({ "axis": axis, "values": values, "runs": meta }),
        ),
    )
    .map_err(Failure::runtime)?;
    for (v, u, rem) in &curve {
        say(
            flags,
            format!(
                "{axis}={:<12} mean_utility={u:.4} mean_remaining_budget={rem:.4}",
                fmt_value(*v)
            ),
        );
    }
    say(flags, format!("wrote {}", out.display()));
    Ok(())
}

fn sweep_plot(axis: SweepAxis, curve: &[(f64, f64, f64)]) -> String {
    let label = axis.name();
    if axis == SweepAxis::Delta {
        let mut p = Panel::new(
            "Utility against remaining budget over delta",
            "remaining budget",
            "cumulative utility",
        );
        p.markers = true;
        let mut pts: Vec<(f64, f64)> = curve.iter().map(|(_, u, r)| (*r, *u)).collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        p.series.push(Series {
            label: "olfw (seed mean)".into(),
            points: pts,
        });
        return render(&[p]);
    }
    let log_x = axis == SweepAxis::Mu;
    let mut a = Panel::new("Cumulative utility", label, "mean utility");
    let mut b = Panel::new("Remaining budget", label, "mean remaining budget");
    for (p, idx) in [(&mut a, 1), (&mut b, 2)] {
        p.log_x = log_x;
        p.markers = true;
        p.series.push(Series {
            label: "olfw".into(),
            points: curve
                .iter()
                .map(|c| (c.0, if idx == 1 { c.1 } else { c.2 }))
                .collect(),
        });
    }
    render(&[a, b])
}

pub fn cmd_jester(config: &Path, flags: &Flags) -> CmdResult {
    let start = Instant::now();
    let plan = load_plan(config, flags)?;
    if plan.scenario.kind != ScenarioKind::Jester {
        return Err(Failure::usage(anyhow!(
            "scenario.scenario: the jester command needs scenario = \"jester\", got {:?}",
            plan.scenario.kind.name()
        )));
    }
    let out = out_dir(&plan, flags);
    let keys: Vec<_> = plan
        .seeds()
        .into_iter()
        .map(|s| (s, plan.scenario.horizon))
        .collect();
    let preps = prepare(&plan, &keys)?;
    let algorithms: Vec<Algorithm> = std::iter::once(Algorithm::Olfw)
        .chain(BaselineKind::ALL.iter().map(|b| Algorithm::Baseline(*b)))
        .collect();
    let (outcomes, meta) = run_matrix(&plan, &preps, &algorithms)?;
    write_traces(&out, &outcomes)?;
    summary_table(&outcomes)
        .write(&out.join("summary.csv"))
        .map_err(Failure::runtime)?;

    let mut cmp = Table::new(&[
        "algorithm",
        "t",
        "cum_utility",
        "cum_cost_mean",
        "cum_violation",
    ]);
    let mut util_panel = Panel::new("Cumulative utility", "round", "utility");
    let mut viol_panel = Panel::new("Cumulative budget violation", "round", "violation");
    let horizon = plan.scenario.horizon;
    for a in &algorithms {
        let runs: Vec<&Outcome> = outcomes.iter().filter(|o| o.algorithm == *a).collect();
        let avg = |f: fn(&RunTrace) -> Vec<f64>| -> Vec<f64> {
            let cols: Vec<Vec<f64>> = runs.iter().map(|o| f(&o.trace)).collect();
            (0..horizon)
                .map(|t| mean(cols.iter().map(|c| c[t])))
                .collect()
        };
        let (u, c, v) = (
            avg(RunTrace::cumulative_utility),
            avg(RunTrace::cumulative_cost_mean),
            avg(RunTrace::cumulative_violation),
        );
        for t in 0..horizon {
            cmp.row(&[
                a.name().into(),
                (t + 1).to_string(),
                num(u[t]),
                num(c[t]),
                num(v[t]),
            ]);
        }
        let stride = (horizon / 500).max(1);
        let pick = |s: &[f64]| -> Vec<(f64, f64)> {
            (0..horizon)
                .filter(|t| t % stride == 0 || *t + 1 == horizon)
                .map(|t| ((t + 1) as f64, s[t]))
                .collect()
        };
        util_panel.series.push(Series {
            label: a.name().into(),
            points: pick(&u),
        });
        viol_panel.series.push(Series {
            label: a.name().into(),
            points: pick(&v),
        });
    }
    cmp.write(&out.join("jester_comparison.csv"))
        .map_err(Failure::runtime)?;
    crate::output::write_atomic(
        &out.join("jester.svg"),
        render(&[util_panel, viol_panel]).as_bytes(),
    )
    .map_err(Failure::runtime)?;
    write_json(
        &out.join("metadata.json"),
        &metadata("jester", &plan, start, json!({ "runs": meta })),
    )
    .map_err(Failure::runtime)?;
    report(flags, &outcomes);
    say(flags, format!("wrote {}", out.display()));
    Ok(())
}

pub fn cmd_scaling(config: &Path, flags: &Flags) -> CmdResult {
    let start = Instant::now();
    let plan = load_plan(config, flags)?;
    let out = out_dir(&plan, flags);
    let ts = plan.run.t_values.clone();
    if ts.len() < 2 || ts.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Failure::usage(anyhow!(
            "run.T_values: scaling needs at least two strictly increasing horizons"
        )));
    }
    let seeds = plan.seeds();
    plan.build_scenario_with_horizon(seeds[0], ts[0])
        .map_err(Failure::usage)?;
    let a = &plan.algorithm;
    let table = scaling_study(
        |t, s| plan.build_scenario_with_horizon(s, t),
        &ts,
        &seeds,
        a.update_rule,
        a.epsilon,
        a.benchmark_iters,
    )
    .map_err(Failure::runtime)?;

    let mut rows = Table::new(&["T", "seed", "regret", "violation", "positive_violation"]);
    for r in &table.rows {
        rows.row(&[
            r.horizon.to_string(),
            r.seed.to_string(),
            num(r.regret),
            num(r.violation),
            num(r.positive_violation),
        ]);
    }
    let mut agg = Table::new(&[
        "T",
        "mean_regret",
        "mean_violation",
        "mean_positive_violation",
        "fit_regret",
        "fit_positive_violation",
    ]);
    for (i, t) in table.horizons.iter().enumerate() {
        agg.row(&[
            t.to_string(),
            num(table.mean_regret[i]),
            num(table.mean_violation[i]),
            num(table.mean_positive_violation[i]),
            num(table.fit_regret[i]),
            num(table.fit_positive_violation[i]),
        ]);
    }
    rows.write(&out.join("scaling_runs.csv"))
        .map_err(Failure::runtime)?;
    agg.write(&out.join("scaling.csv"))
        .map_err(Failure::runtime)?;
    let mut p = Panel::new("Scaling (clamped at 1)", "T", "metric");
    p.log_x = true;
    p.log_y = true;
    p.markers = true;
    for (label, v) in [
        ("regret", &table.fit_regret),
        ("positive violation", &table.fit_positive_violation),
    ] {
        p.series.push(Series {
            label: label.into(),
            points: ts
                .iter()
                .zip(v.iter())
                .map(|(t, m)| (*t as f64, m.max(1.0)))
                .collect(),
        });
    }
    crate::output::write_atomic(&out.join("scaling.svg"), render(&[p]).as_bytes())
        .map_err(Failure::runtime)?;
    write_json(
        &out.join("metadata.json"),
        &metadata(
            "scaling",
            &plan,
            start,
            json!({
                "rule": table.rule.label(),
                "regret_slope": table.regret_slope,
                "violation_slope": table.violation_slope,
                "clamped": table.clamped,
            }),
        ),
    )
    .map_err(Failure::runtime)?;
    say(
        flags,
        format!(
            "rule {}: regret slope {:.4}, positive violation slope {:.4} ({} values clamped to 1)",
            table.rule.label(),
            table.regret_slope,
            table.violation_slope,
            table.clamped
        ),
    );
    say(flags, format!("wrote {}", out.display()));
    Ok(())
}
