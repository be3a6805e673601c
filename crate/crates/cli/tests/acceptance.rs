//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Every quantity that has a closed form or a brute-force answer is
//! recomputed here rather than taken from the library.

#[path = "../../core/tests/common/mod.rs"]
mod oracles;

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::Command as Proc;
use std::time::Instant;

use nalgebra::DMatrix;
use rand::Rng;

use olfw_cli::commands::{cmd_jester, cmd_run, cmd_sweep};
use olfw_cli::Flags;
use olfw_core::evaluation::{
    check_master_inequality, coverage_check, monte_carlo_mean_error, scaling_study,
    scenario_benchmark, solve_benchmark, values_at,
};
use olfw_core::functions::{
    check_dr_monotone, generate_coverage, generate_logdet, generate_quadratic, FnUtility,
    QuadraticUtility,
};
use olfw_core::olfw::{gamma_schedule, run_olfw_with, Fault, OlfwRun, RunOptions, DEFAULT_EPSILON};
use olfw_core::rng::{seeded, stream, Purpose};
use olfw_core::scenario::jester::{parse_jester, rescale_rating, JESTER_ITEMS};
use olfw_core::scenario::scenario_quadratic;
use olfw_core::{ConstraintDistribution, Domain, OlfwConfig, Scenario, UpdateRule, Utility};

type Verdict = Result<(bool, String), String>;
type Criterion = (&'static str, fn() -> Verdict, Option<f64>);

fn e<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

const ONE_MINUS_INV_E: f64 = 1.0 - 0.36787944117144233;

// 1. Mean-estimation error equals Tr(Σ)/(t−1).
fn criterion_1() -> Verdict {
    let d = ConstraintDistribution::uniform_cube(2, 0.0, 1.0).map_err(e)?;
    let est = monte_carlo_mean_error(&d, 11, 20_000, 0).map_err(e)?;
    // two coordinates of variance 1/12, averaged over 10 samples
    let expected = 2.0 * (1.0 / 12.0) / 10.0;
    let rel = (est - expected).abs() / expected;
    Ok((
        rel <= 0.03,
        format!("estimate {est:.6}, closed form {expected:.6}, relative error {rel:.4} (≤ 0.03)"),
    ))
}

// 2. Per-round coverage of the confidence margin.
fn criterion_2() -> Verdict {
    let s = scenario_quadratic(0).map_err(e)?;
    let dist = s.constraint();
    let g = s.problem_constants().map_err(e)?.g_bound;
    let (horizon, eps, replicas) = (200usize, 0.1, 1000usize);
    let x = [0.3, 0.3];
    let gamma = |t: usize| (2.0 * g * g * (2.0 * horizon as f64 / eps).ln() / t as f64).sqrt();
    for t in 2..=horizon {
        let lib = gamma_schedule(t, g, horizon, eps).map_err(e)?;
        if (lib - gamma(t)).abs() > 1e-12 * gamma(t) {
            return Ok((false, format!("margin at t={t}: {lib} vs {}", gamma(t))));
        }
    }
    let g_true = dot(&dist.mean(), &x);
    let mut fails = vec![0usize; horizon + 1];
    for r in 0..replicas {
        let mut rng = stream(1, Purpose::Replica, r as u64);
        let mut sum = 0.0;
        for (t, count) in fails.iter_mut().enumerate().skip(2) {
            sum += dot(&dist.sample(&mut rng), &x);
            if (sum / (t - 1) as f64 - g_true).abs() > gamma(t) {
                *count += 1;
            }
        }
    }
    let q = eps / horizon as f64;
    let limit = q + 3.0 * (q * (1.0 - q) / replicas as f64).sqrt();
    let worst = fails.iter().copied().max().unwrap_or(0) as f64 / replicas as f64;
    let lib = coverage_check(dist, &x, horizon, eps, g, replicas, 0, 1.0).map_err(e)?;
    Ok((
        worst <= limit && lib.max_frequency() <= limit,
        format!(
            "max per-round failure frequency {worst:.4} (independent), {:.4} (library); limit {limit:.5}",
            lib.max_frequency()
        ),
    ))
}

fn quadratic_run(
    rule: UpdateRule,
    opts: RunOptions,
) -> Result<(Scenario, OlfwConfig, OlfwRun), String> {
    let s = scenario_quadratic(0)
        .map_err(e)?
        .with_horizon(500)
        .map_err(e)?;
    let cfg = OlfwConfig::for_scenario(&s, rule);
    let opts = RunOptions {
        record_oracle: true,
        ..opts
    };
    let run = run_olfw_with(&s, &cfg, 0, &opts).map_err(e)?;
    Ok((s, cfg, run))
}

/// `(lhs, rhs)` of the master inequality recomputed from the trace.
fn master_sides(
    s: &Scenario,
    run: &OlfwRun,
    rule: UpdateRule,
    x: &[f64],
) -> Result<(f64, f64), String> {
    let c = &run.constants;
    let p = &run.params;
    let t = run.trace.records.len() as f64;
    let b = s.per_round_budget();
    let mut lhs = 0.0;
    let mut penalty = 0.0;
    for r in &run.trace.records {
        let fx = s.utility(r.t).map_err(e)?.value(x).map_err(e)?;
        lhs += ONE_MINUS_INV_E * fx - r.reward;
        let margin = if rule == UpdateRule::HighProbability {
            r.gamma
        } else {
            0.0
        };
        penalty += r.lambda * (dot(&r.p_hat, x) - b - margin);
    }
    let (l, rr, beta) = (c.smoothness, c.diameter, c.beta);
    let rhs =
        l * rr * rr * t / (2.0 * p.k as f64) + rr * rr / p.mu + beta * beta * p.mu * t + penalty;
    Ok((lhs, rhs))
}

// 3. Master inequality at x = 0 and at the benchmark.
fn criterion_3() -> Verdict {
    let mut lines = Vec::new();
    let mut ok = true;
    for rule in [UpdateRule::Expectation, UpdateRule::HighProbability] {
        let (s, _, run) = quadratic_run(rule, RunOptions::default())?;
        let beta2 = run.constants.beta.powi(2);
        if (run.params.delta - beta2).abs() > 1e-12 * beta2 {
            return Ok((
                false,
                format!("delta {} is not beta^2 {beta2}", run.params.delta),
            ));
        }
        let bench = scenario_benchmark(&s, 100).map_err(e)?;
        for (name, x) in [("x=0", vec![0.0; 2]), ("x=x*", bench.x_star.clone())] {
            let (lhs, rhs) = master_sides(&s, &run, rule, &x)?;
            let holds = lhs <= rhs + 1e-6 * rhs.abs();
            let fx = values_at(&s, &x).map_err(e)?;
            let lib =
                check_master_inequality(&run.trace, &x, &run.constants, &run.params, rule, &fx)
                    .map_err(e)?;
            ok &= holds && lib.holds && (lib.lhs - lhs).abs() <= 1e-8 * (1.0 + lhs.abs());
            lines.push(format!(
                "rule {} {name}: {lhs:.2} <= {rhs:.2}",
                rule.label()
            ));
        }
    }
    // the same check must reject a run with a corrupted dual clamp
    let opts = RunOptions {
        fault: Some(Fault::FlippedDualClamp),
        ..Default::default()
    };
    let (s, _, bad) = quadratic_run(UpdateRule::Expectation, opts)?;
    let bench = scenario_benchmark(&s, 100).map_err(e)?;
    let caught = [vec![0.0; 2], bench.x_star]
        .iter()
        .map(|x| master_sides(&s, &bad, UpdateRule::Expectation, x))
        .collect::<Result<Vec<_>, _>>()?
        .iter()
        .any(|(l, r)| *l > r + 1e-6 * r.abs());
    ok &= caught;
    lines.push(format!("flipped clamp caught: {caught}"));
    Ok((ok, lines.join("; ")))
}

// 4. Regret bound of every gradient-ascent oracle.
fn criterion_4() -> Verdict {
    let (s, _, run) = quadratic_run(UpdateRule::Expectation, RunOptions::default())?;
    let log = run.trace.oracle_log.as_ref().ok_or("oracle log missing")?;
    let k = run.params.k;
    let (rr, mu) = (run.constants.diameter, run.params.mu);
    // the logged payoff gradients are recomputed from the utilities
    let mut worst_grad: f64 = 0.0;
    for (rec, steps) in run.trace.records.iter().zip(log) {
        let f = s.utility(rec.t).map_err(e)?;
        let mut xk = vec![0.0; 2];
        for step in steps {
            let g = f.gradient(&xk).map_err(e)?;
            let expect: Vec<f64> = g
                .iter()
                .zip(&rec.p_hat)
                .map(|(gi, pi)| gi - rec.lambda * pi)
                .collect();
            worst_grad = worst_grad.max(norm(
                &expect
                    .iter()
                    .zip(&step.grad)
                    .map(|(a, b)| a - b)
                    .collect::<Vec<_>>(),
            ));
            for (xi, vi) in xk.iter_mut().zip(&step.point) {
                *xi += vi / k as f64;
            }
        }
    }
    let bench = scenario_benchmark(&s, 100).map_err(e)?;
    let mut worst_ratio = f64::NEG_INFINITY;
    let mut ok = worst_grad <= 1e-10;
    for x in [vec![0.0; 2], bench.x_star] {
        for j in 0..k {
            let (mut lhs, mut sq) = (0.0, 0.0);
            for steps in log {
                let st = &steps[j];
                let diff: Vec<f64> = x.iter().zip(&st.point).map(|(a, b)| a - b).collect();
                lhs += dot(&st.grad, &diff);
                sq += dot(&st.grad, &st.grad);
            }
            let rhs = rr * rr / mu + 0.5 * mu * sq;
            ok &= lhs <= rhs + 1e-6 * rhs.abs();
            worst_ratio = worst_ratio.max(lhs / rhs);
        }
    }
    Ok((
        ok,
        format!("{k} oracles x 2 points; max lhs/rhs {worst_ratio:.4}; logged gradient error {worst_grad:.1e}"),
    ))
}

fn ls_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

// 5. Sublinear regret and violation under rule II.
fn criterion_5() -> Verdict {
    let ts = [256usize, 1024, 4096];
    let seeds = [0u64, 1, 2, 3, 4];
    let table = scaling_study(
        |t, seed| scenario_quadratic(seed)?.with_horizon(t),
        &ts,
        &seeds,
        UpdateRule::HighProbability,
        DEFAULT_EPSILON,
        100,
    )
    .map_err(e)?;
    // per-seed maxima, clamped at 1, fitted on log T
    let agg = |f: fn(&olfw_core::evaluation::ScalingRow) -> f64| -> Vec<f64> {
        ts.iter()
            .map(|t| {
                table
                    .rows
                    .iter()
                    .filter(|r| r.horizon == *t)
                    .map(f)
                    .fold(f64::NEG_INFINITY, f64::max)
                    .max(1.0)
                    .ln()
            })
            .collect()
    };
    let lx: Vec<f64> = ts.iter().map(|t| (*t as f64).ln()).collect();
    let rs = ls_slope(&lx, &agg(|r| r.regret));
    let vs = ls_slope(&lx, &agg(|r| r.positive_violation));
    let agree = (rs - table.regret_slope).abs() < 1e-9 && (vs - table.violation_slope).abs() < 1e-9;
    Ok((
        rs < 1.0 && vs < 1.0 && vs < 0.9 && agree,
        format!(
            "regret slope {rs:.3} (< 1), positive-violation slope {vs:.3} (< 0.9), {} values clamped",
            table.clamped
        ),
    ))
}

fn central_difference(f: &dyn Utility, x: &[f64], h: f64) -> Vec<f64> {
    let mut xp = x.to_vec();
    (0..x.len())
        .map(|i| {
            xp[i] = x[i] + h;
            let up = f.value(&xp).unwrap();
            xp[i] = x[i] - h;
            let dn = f.value(&xp).unwrap();
            xp[i] = x[i];
            (up - dn) / (2.0 * h)
        })
        .collect()
}

// 6. Analytic gradients against central differences.
fn criterion_6() -> Verdict {
    let fams: Vec<(&str, Box<dyn Utility>)> = vec![
        (
            "quadratic",
            Box::new(generate_quadratic(2, 0, (-1.0, 0.0)).map_err(e)?),
        ),
        (
            "logdet n=10",
            Box::new(generate_logdet(10, 0, (2.0, 3.0)).map_err(e)?),
        ),
        (
            "multilinear n=8",
            Box::new(generate_coverage(8, 30, 0.3, 0).map_err(e)?),
        ),
    ];
    let mut rng = seeded(99);
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, f) in &fams {
        let mut worst: f64 = 0.0;
        for _ in 0..100 {
            let x: Vec<f64> = (0..f.dim()).map(|_| rng.random_range(0.05..0.95)).collect();
            let g = f.gradient(&x).map_err(e)?;
            let fd = central_difference(f.as_ref(), &x, 1e-5);
            let diff: Vec<f64> = g.iter().zip(&fd).map(|(a, b)| a - b).collect();
            worst = worst.max(norm(&diff) / norm(&fd).max(1e-12));
        }
        ok &= worst <= 1e-5;
        parts.push(format!("{name} {worst:.1e}"));
    }
    Ok((
        ok,
        format!("max relative error (≤ 1e-5): {}", parts.join(", ")),
    ))
}

// 7. DR and monotonicity of generated instances; the counterexample fails.
fn criterion_7() -> Verdict {
    let fams: Vec<(&str, Box<dyn Utility>)> = vec![
        (
            "quadratic",
            Box::new(generate_quadratic(2, 3, (-1.0, 0.0)).map_err(e)?),
        ),
        (
            "logdet",
            Box::new(generate_logdet(10, 3, (2.0, 3.0)).map_err(e)?),
        ),
        (
            "multilinear",
            Box::new(generate_coverage(8, 30, 0.3, 3).map_err(e)?),
        ),
    ];
    let mut ok = true;
    for (_, f) in &fams {
        let r = check_dr_monotone(f.as_ref(), &Domain::unit_box(f.dim()), 500, 5, 1e-9);
        ok &= r.dr_ok && r.monotone_ok && r.eval_failures == 0;
    }
    let bad = FnUtility::new(2, |x| x[0] * x[1], |x| vec![x[1], x[0]]);
    let caught = !check_dr_monotone(&bad, &Domain::unit_box(2), 500, 5, 1e-9).dr_ok;
    let rejected = QuadraticUtility::new(
        DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]),
        vec![0.0; 2],
    )
    .is_err();
    Ok((
        ok && caught && rejected,
        format!("three families pass 500 pairs: {ok}; x1*x2 flagged: {caught}; positive H rejected: {rejected}"),
    ))
}

// 8. Oracles agree with brute force.
fn criterion_8() -> Verdict {
    let mut rng = seeded(8);
    let mut lmo_gap: f64 = 0.0;
    let mut proj_gap: f64 = 0.0;
    let mut bench_gap: f64 = 0.0;
    for trial in 0..12 {
        let n = 1 + trial % 3;
        let lower: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..0.3)).collect();
        let upper: Vec<f64> = lower
            .iter()
            .map(|l| l + rng.random_range(0.3..1.0))
            .collect();
        let span: f64 = upper.iter().zip(&lower).map(|(u, l)| u - l).sum();
        let cap = lower.iter().sum::<f64>() + rng.random_range(0.2..0.8) * span;
        let normal: Vec<f64> = (0..n).map(|_| rng.random_range(0.2..2.0)).collect();
        let bound = dot(&normal, &lower)
            + rng.random_range(0.2..0.8)
                * dot(
                    &normal,
                    &upper
                        .iter()
                        .zip(&lower)
                        .map(|(u, l)| u - l)
                        .collect::<Vec<_>>(),
                );
        let boxed = Domain::new_box(lower.clone(), upper.clone()).map_err(e)?;
        let capped = Domain::box_cap(lower.clone(), upper.clone(), cap).map_err(e)?;
        let cut = boxed.with_halfspace(normal.clone(), bound).map_err(e)?;
        for d in [&boxed, &capped, &cut] {
            let c: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let v = d.lmo(&c).map_err(e)?;
            lmo_gap = lmo_gap.max((oracles::grid_max(d, &c, 0.01) - dot(&c, &v)).abs());
        }
        for (d, cp) in [(&boxed, None), (&capped, Some(cap))] {
            let y: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..2.0)).collect();
            let p = d.project(&y).map_err(e)?;
            let q = oracles::project_capped(&lower, &upper, cp, &y);
            proj_gap = proj_gap.max(norm(
                &p.iter().zip(&q).map(|(a, b)| a - b).collect::<Vec<_>>(),
            ));
        }
        let c: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
        let cc = c.clone();
        let f = FnUtility::new(n, move |x| dot(&cc, x), move |_| c.clone());
        let grad = f.gradient(&vec![0.0; n]).map_err(e)?;
        let b = solve_benchmark(&f, &cut, 100, 1).map_err(e)?;
        bench_gap = bench_gap.max((b.total_value - oracles::lp_max(&cut, &grad)).abs());
    }
    Ok((
        lmo_gap <= 1e-2 && proj_gap <= 1e-6 && bench_gap <= 1e-2,
        format!("lmo vs grid {lmo_gap:.1e} (≤ 1e-2); projection vs KKT {proj_gap:.1e} (≤ 1e-6); benchmark vs LP {bench_gap:.1e} (≤ 1e-2)"),
    ))
}

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn read_table(path: &Path) -> Result<Vec<BTreeMap<String, String>>, String> {
    let text = fs::read_to_string(path).map_err(|err| format!("{}: {err}", path.display()))?;
    let mut lines = text.lines();
    let head: Vec<String> = lines
        .next()
        .ok_or("empty CSV")?
        .split(',')
        .map(String::from)
        .collect();
    Ok(lines
        .map(|l| {
            head.iter()
                .cloned()
                .zip(l.split(',').map(String::from))
                .collect()
        })
        .collect())
}

fn col(row: &BTreeMap<String, String>, k: &str) -> f64 {
    row[k].parse().unwrap()
}

fn quiet(out: &Path) -> Flags {
    Flags {
        seed: None,
        out: Some(out.to_path_buf()),
        quiet: true,
    }
}

// 9. Budget-utility trade-off at the chosen penalty.
fn criterion_9() -> Verdict {
    let dir = tempfile::tempdir().map_err(e)?;
    let deltas: Vec<String> = (0..100)
        .map(|i| format!("{:e}", 10f64.powf(-1.0 + 4.0 * i as f64 / 99.0)))
        .collect();
    let sweep = write(
        dir.path(),
        "sweep.toml",
        &format!(
            "[scenario]\nscenario = \"quadratic\"\nseed = 0\nT = 1000\nbudget_total = 2000\n\
             [run]\nreplicates = 10\nsweep = \"delta\"\ndelta_values = [{}]\n",
            deltas.join(", ")
        ),
    );
    let chosen = write(
        dir.path(),
        "chosen.toml",
        "[scenario]\nscenario = \"quadratic\"\nseed = 0\nT = 1000\nbudget_total = 2000\n\
         [algorithm]\ndelta = 10.2\n[run]\nreplicates = 10\n",
    );
    let (so, co) = (dir.path().join("sweep"), dir.path().join("chosen"));
    cmd_sweep(&sweep, &quiet(&so)).map_err(e)?;
    cmd_run(&chosen, &quiet(&co)).map_err(e)?;
    let best = read_table(&so.join("sweep.csv"))?
        .iter()
        .map(|r| col(r, "mean_utility"))
        .fold(f64::NEG_INFINITY, f64::max);
    // utility and remaining budget recomputed from the trace files, p = (1, 2)
    let (mut util, mut remaining) = (0.0, 0.0);
    for seed in 0..10 {
        let rows = read_table(&co.join(format!("traces/olfw_T1000_seed{seed}.csv")))?;
        let cost: f64 = rows
            .iter()
            .map(|r| {
                let x: Vec<f64> = r["x"].split(';').map(|v| v.parse().unwrap()).collect();
                x[0] + 2.0 * x[1]
            })
            .sum();
        util += rows.iter().map(|r| col(r, "f_xt")).sum::<f64>() / 10.0;
        remaining += (2000.0 - cost) / 10.0;
    }
    Ok((
        remaining >= -0.05 * 2000.0 && util >= 0.85 * best,
        format!(
            "delta=10.2: mean remaining budget {remaining:.2} (≥ -100), mean utility {util:.2} vs 0.85 x sweep max {best:.2} = {:.2}",
            0.85 * best
        ),
    ))
}

// 10. Jester ingestion and the five-series comparison.
fn criterion_10() -> Verdict {
    let mut row = vec!["-10".to_string(), "10".to_string(), "99".to_string()];
    row.extend(std::iter::repeat_n("0".to_string(), JESTER_ITEMS - 3));
    let ds = parse_jester(&row.join(","), 99.0).map_err(e)?;
    let r = &ds.ratings[0];
    let mapped = r[0] == 0.0 && r[1] == 10.0 && r[2] == 5.0;
    let helper = rescale_rating(-10.0, 99.0) == 0.0
        && rescale_rating(10.0, 99.0) == 10.0
        && rescale_rating(99.0, 99.0) == 5.0;

    let dir = tempfile::tempdir().map_err(e)?;
    let cfg = write(
        dir.path(),
        "jester.toml",
        "[scenario]\nscenario = \"jester\"\nsynthetic_users = 3000\nT = 2000\nseed = 0\n[algorithm]\ndelta = 10.2\n",
    );
    let out = dir.path().join("out");
    cmd_jester(&cfg, &quiet(&out)).map_err(e)?;
    let rows = read_table(&out.join("jester_comparison.csv"))?;
    let mut last: BTreeMap<String, (f64, f64)> = BTreeMap::new();
    for r in &rows {
        if r["t"] == "2000" {
            last.insert(
                r["algorithm"].clone(),
                (
                    col(r, "cum_utility"),
                    col(r, "cum_cost_mean") - 1.5 * 2000.0,
                ),
            );
        }
    }
    let top = last
        .iter()
        .max_by(|a, b| a.1 .0.total_cmp(&b.1 .0))
        .map(|(k, _)| k.clone())
        .unwrap_or_default();
    let (olfw, meta) = (last.get("olfw").copied(), last.get("meta_fw").copied());
    let below = matches!((olfw, meta), (Some(o), Some(m)) if o.1 < m.1);
    Ok((
        mapped && helper && last.len() == 5 && top == "meta_fw" && below,
        format!(
            "ratings -10/10/99 -> {}/{}/{}; {} series; highest utility {top}; final violation olfw {:.1} vs meta_fw {:.1}",
            r[0],
            r[1],
            r[2],
            last.len(),
            olfw.map_or(f64::NAN, |o| o.1),
            meta.map_or(f64::NAN, |m| m.1)
        ),
    ))
}

fn csv_files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else if p.extension().is_some_and(|x| x == "csv") {
                out.insert(
                    p.strip_prefix(dir).unwrap().display().to_string(),
                    fs::read(&p).unwrap(),
                );
            }
        }
    }
    out
}

// 11. Reruns are byte-identical, also across worker counts.
fn criterion_11() -> Verdict {
    let dir = tempfile::tempdir().map_err(e)?;
    let configs = [
        ("run", "[scenario]\nscenario = \"quadratic\"\nT = 300\n[run]\nreplicates = 2\n"),
        ("sweep", "[scenario]\nscenario = \"quadratic\"\nT = 200\n[run]\nreplicates = 2\nsweep = \"mu\"\nmu_values = [0.01, 0.1]\n"),
        ("jester", "[scenario]\nscenario = \"jester\"\nsynthetic_users = 300\nT = 200\n"),
        ("scaling", "[scenario]\nscenario = \"quadratic\"\n[run]\nreplicates = 2\nT_values = [64, 128, 256]\n"),
    ];
    let bin = env!("CARGO_BIN_EXE_olfw");
    let mut checked = 0;
    for (cmd, text) in configs {
        let cfg = write(dir.path(), &format!("{cmd}.toml"), text);
        let mut outputs = Vec::new();
        for threads in ["1", "4"] {
            let out = dir.path().join(format!("{cmd}_{threads}"));
            let status = Proc::new(bin)
                .args([
                    cmd,
                    cfg.to_str().unwrap(),
                    "--seed",
                    "3",
                    "--quiet",
                    "--out",
                    out.to_str().unwrap(),
                ])
                .env("OLFW_THREADS", threads)
                .status()
                .map_err(e)?;
            if !status.success() {
                return Ok((false, format!("{cmd} exited with {status}")));
            }
            outputs.push(csv_files(&out));
        }
        if outputs[0].is_empty() || outputs[0] != outputs[1] {
            return Ok((false, format!("{cmd}: CSV outputs differ between reruns")));
        }
        checked += outputs[0].len();
    }
    Ok((
        true,
        format!("{checked} CSV files identical across reruns with 1 and 4 workers"),
    ))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("mean-estimation error closed form", criterion_1, Some(5.0)),
        ("confidence-margin coverage", criterion_2, Some(30.0)),
        ("master inequality", criterion_3, None),
        ("gradient-ascent oracle bound", criterion_4, None),
        ("sublinear regret and violation", criterion_5, Some(300.0)),
        ("gradient correctness", criterion_6, None),
        ("DR and monotonicity", criterion_7, None),
        ("oracle equivalence", criterion_8, None),
        ("penalty trade-off", criterion_9, Some(180.0)),
        ("Jester pipeline", criterion_10, Some(300.0)),
        ("determinism", criterion_11, None),
    ];
    let mut failed = 0;
    for (i, (name, run, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (mut ok, mut detail) = match run() {
            Ok(v) => v,
            Err(msg) => (false, format!("error: {msg}")),
        };
        let secs = start.elapsed().as_secs_f64();
        if let Some(l) = limit {
            if secs >= *l {
                ok = false;
                detail.push_str(&format!(" [runtime {secs:.1}s exceeds {l}s]"));
            }
        }
        println!(
            "{} criterion {:>2} {name}: {detail} ({secs:.1}s)",
            if ok { "PASS" } else { "FAIL" },
            i + 1
        );
        failed += usize::from(!ok);
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
