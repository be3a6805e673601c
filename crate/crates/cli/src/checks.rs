//! The `check` command: invariant suites with a pass/fail table.

use std::time::Instant;

use anyhow::anyhow;
use rand::Rng;

use olfw_core::evaluation::{
    coverage_check, monte_carlo_mean_error, scaling_study, validate_run, DEFAULT_BENCHMARK_ITERS,
};
use olfw_core::functions::{
    check_dr_monotone, generate_coverage, generate_logdet, generate_quadratic, gradient_rel_error,
    FnUtility,
};
use olfw_core::numeric::{dist, dot};
use olfw_core::olfw::{Fault, RunOptions};
use olfw_core::rng::seeded;
use olfw_core::scenario::scenario_quadratic;
use olfw_core::{ConstraintDistribution, Domain, OlfwConfig, UpdateRule, Utility};

use crate::output::Table;
use crate::{CmdResult, Failure, Flags};

pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

type CheckFn = fn() -> olfw_core::Result<(bool, String)>;

fn fast_suite() -> Vec<(&'static str, CheckFn)> {
    vec![
        ("gradient_quadratic", check_grad_quadratic),
        ("gradient_logdet", check_grad_logdet),
        ("gradient_multilinear", check_grad_multilinear),
        ("dr_generated_instances", check_dr_families),
        ("dr_counterexample_rejected", check_dr_counterexample),
        ("lmo_grid_oracle", check_lmo_grid),
        ("projection_oracle", check_projection),
        ("mean_error_closed_form", check_mean_error),
        ("coverage_rule_ii", check_coverage),
        ("master_inequality", check_master_inequality),
        ("master_inequality_detects_fault", check_fault_detected),
    ]
}

fn full_suite() -> Vec<(&'static str, CheckFn)> {
    let mut s = fast_suite();
    s.push(("scaling_rule_ii", check_scaling));
    s
}

pub fn run_suite(full: bool) -> Vec<CheckOutcome> {
    let suite = if full { full_suite() } else { fast_suite() };
    suite
        .into_iter()
        .map(|(name, f)| {
            let (passed, detail) = match f() {
                Ok(r) => r,
                Err(e) => (false, format!("error: {e}")),
            };
            CheckOutcome {
                name,
                passed,
                detail,
            }
        })
        .collect()
}

pub fn cmd_check(full: bool, flags: &Flags) -> CmdResult {
    let start = Instant::now();
    let results = run_suite(full);
    let mut table = Table::new(&["check", "status", "detail"]);
    for r in &results {
        let status = if r.passed { "PASS" } else { "FAIL" };
        table.row(&[r.name.into(), status.into(), r.detail.replace(',', ";")]);
        if !flags.quiet {
            println!("{status}  {:<34} {}", r.name, r.detail);
        }
    }
    if let Some(out) = &flags.out {
        table
            .write(&out.join("check.csv"))
            .map_err(Failure::runtime)?;
    }
    if !flags.quiet {
        println!("finished in {:.1}s", start.elapsed().as_secs_f64());
    }
    let failed: Vec<&str> = results
        .iter()
        .filter(|r| !r.passed)
        .map(|r| r.name)
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::runtime(anyhow!(
            "failed checks: {}",
            failed.join(", ")
        )))
    }
}

const FD_STEP: f64 = 1e-5;
const FD_TOL: f64 = 1e-5;

fn max_fd_error(f: &dyn Utility, seed: u64) -> olfw_core::Result<(bool, String)> {
    let mut rng = seeded(seed);
    let n = f.dim();
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..0.95)).collect();
        worst = worst.max(gradient_rel_error(f, &x, FD_STEP)?);
    }
    Ok((
        worst <= FD_TOL,
        format!("max relative error {worst:.2e} at 100 points"),
    ))
}

fn check_grad_quadratic() -> olfw_core::Result<(bool, String)> {
    max_fd_error(&generate_quadratic(2, 0, (-1.0, 0.0))?, 1)
}

fn check_grad_logdet() -> olfw_core::Result<(bool, String)> {
    max_fd_error(&generate_logdet(10, 0, (2.0, 3.0))?, 2)
}

fn check_grad_multilinear() -> olfw_core::Result<(bool, String)> {
    max_fd_error(&generate_coverage(8, 30, 0.3, 0)?, 3)
}

fn check_dr_families() -> olfw_core::Result<(bool, String)> {
    let cases: Vec<(&str, Box<dyn Utility>)> = vec![
        (
            "quadratic",
            Box::new(generate_quadratic(2, 0, (-1.0, 0.0))?),
        ),
        ("logdet", Box::new(generate_logdet(10, 0, (2.0, 3.0))?)),
        ("multilinear", Box::new(generate_coverage(8, 30, 0.3, 0)?)),
    ];
    let mut bad = Vec::new();
    for (name, f) in &cases {
        let r = check_dr_monotone(f.as_ref(), &Domain::unit_box(f.dim()), 500, 0, 1e-9);
        if !(r.dr_ok && r.monotone_ok && r.eval_failures == 0) {
            bad.push(*name);
        }
    }
    Ok((bad.is_empty(), format!("500 pairs each; failing: {bad:?}")))
}

fn check_dr_counterexample() -> olfw_core::Result<(bool, String)> {
    let f = FnUtility::new(2, |x| x[0] * x[1], |x| vec![x[1], x[0]]);
    let r = check_dr_monotone(&f, &Domain::unit_box(2), 500, 0, 1e-9);
    Ok((!r.dr_ok, format!("x1*x2 flagged: {}", !r.dr_ok)))
}

fn grid_max(d: &Domain, c: &[f64], step: f64) -> f64 {
    let n = d.dim();
    let counts: Vec<usize> = (0..n)
        .map(|i| ((d.upper()[i] - d.lower()[i]) / step).round() as usize + 1)
        .collect();
    let total: usize = counts.iter().product();
    let mut best = f64::NEG_INFINITY;
    for mut idx in 0..total {
        let x: Vec<f64> = (0..n)
            .map(|i| {
                let j = idx % counts[i];
                idx /= counts[i];
                (d.lower()[i] + j as f64 * step).min(d.upper()[i])
            })
            .collect();
        if d.contains(&x, 1e-12) {
            best = best.max(dot(c, &x));
        }
    }
    best
}

fn check_lmo_grid() -> olfw_core::Result<(bool, String)> {
    let domains = [
        Domain::unit_box(2).with_halfspace(vec![1.0, 2.0], 1.5)?,
        Domain::box_cap(vec![0.0; 3], vec![1.0; 3], 1.5)?,
        Domain::new_box(vec![0.1, 0.0], vec![0.9, 2.0])?,
    ];
    let mut rng = seeded(11);
    let (mut short, mut excess) = (0.0f64, 0.0f64);
    for d in &domains {
        for _ in 0..5 {
            let c: Vec<f64> = (0..d.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let v = d.lmo(&c)?;
            if !d.contains(&v, 1e-9) {
                return Ok((false, "lmo output infeasible".into()));
            }
            let gap = dot(&c, &v) - grid_max(d, &c, 0.01);
            short = short.max(-gap);
            excess = excess.max(gap);
        }
    }
    Ok((
        short <= 1e-9 && excess <= 1e-2,
        format!("grid beats lmo by {short:.1e}; lmo beats grid by {excess:.2e}"),
    ))
}

fn check_projection() -> olfw_core::Result<(bool, String)> {
    let domains = [
        Domain::unit_box(3),
        Domain::box_cap(vec![0.0; 3], vec![1.0; 3], 1.2)?,
    ];
    let mut rng = seeded(12);
    let mut worst_vi = f64::NEG_INFINITY;
    let mut worst_idem: f64 = 0.0;
    for d in &domains {
        for _ in 0..5 {
            let y: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..2.0)).collect();
            let p = d.project(&y)?;
            worst_idem = worst_idem.max(dist(&p, &d.project(&p)?));
            let r: Vec<f64> = y.iter().zip(&p).map(|(a, b)| a - b).collect();
            for _ in 0..10_000 {
                let x = d.sample_point(&mut rng);
                let s: Vec<f64> = x.iter().zip(&p).map(|(a, b)| a - b).collect();
                worst_vi = worst_vi.max(dot(&r, &s));
            }
        }
    }
    Ok((
        worst_vi <= 1e-8 && worst_idem <= 1e-10,
        format!("max variational product {worst_vi:.2e}; idempotence {worst_idem:.2e}"),
    ))
}

fn check_mean_error() -> olfw_core::Result<(bool, String)> {
    let d = ConstraintDistribution::uniform_cube(2, 0.0, 1.0)?;
    let e = monte_carlo_mean_error(&d, 11, 20_000, 0)?;
    let rel = (e - 1.0 / 60.0).abs() * 60.0;
    Ok((
        rel <= 0.03,
        format!("estimate {e:.6} vs 1/60, relative error {rel:.4}"),
    ))
}

fn check_coverage() -> olfw_core::Result<(bool, String)> {
    let s = scenario_quadratic(0)?;
    let g = s.problem_constants()?.g_bound;
    let r = coverage_check(s.constraint(), &[0.3, 0.3], 200, 0.1, g, 1000, 0, 1.0)?;
    Ok((
        r.within(3.0),
        format!(
            "max per-round frequency {:.2e} (target {:.2e})",
            r.max_frequency(),
            r.per_round_target
        ),
    ))
}

fn master_run(opts: &RunOptions) -> olfw_core::Result<olfw_core::evaluation::RunValidation> {
    let s = scenario_quadratic(0)?.with_horizon(500)?;
    let cfg = OlfwConfig::for_scenario(&s, UpdateRule::Expectation);
    validate_run(&s, &cfg, 0, opts, DEFAULT_BENCHMARK_ITERS)
}

fn check_master_inequality() -> olfw_core::Result<(bool, String)> {
    let v = master_run(&RunOptions::default())?;
    let oga_ok = v.oga_origin.iter().chain(&v.oga_benchmark).all(|r| r.holds);
    Ok((
        v.all_hold(),
        format!(
            "x=0: {:.3} <= {:.3}; x*: {:.3} <= {:.3}; oracle bounds hold: {oga_ok}",
            v.master_origin.lhs,
            v.master_origin.rhs,
            v.master_benchmark.lhs,
            v.master_benchmark.rhs
        ),
    ))
}

fn check_fault_detected() -> olfw_core::Result<(bool, String)> {
    let opts = RunOptions {
        fault: Some(Fault::FlippedDualClamp),
        ..Default::default()
    };
    let v = master_run(&opts)?;
    let detected = !(v.master_origin.holds && v.master_benchmark.holds);
    Ok((detected, format!("flipped dual clamp detected: {detected}")))
}

fn check_scaling() -> olfw_core::Result<(bool, String)> {
    let t = scaling_study(
        |t, seed| scenario_quadratic(seed)?.with_horizon(t),
        &[256, 1024, 4096],
        &[0, 1, 2, 3, 4],
        UpdateRule::HighProbability,
        olfw_core::olfw::DEFAULT_EPSILON,
        DEFAULT_BENCHMARK_ITERS,
    )?;
    Ok((
        t.regret_slope < 1.0 && t.violation_slope < 0.9,
        format!(
            "regret slope {:.3}, violation slope {:.3}, clamped {}",
            t.regret_slope, t.violation_slope, t.clamped
        ),
    ))
}
