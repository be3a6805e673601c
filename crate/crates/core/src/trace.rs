//! Per-round run records and their CSV form.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::numeric::{ksum, KahanSum};

/// Column order of the trace CSV.
pub const TRACE_COLUMNS: [&str; 10] = [
    "t",
    "x",
    "f_xt",
    "cost_realized",
    "cost_mean",
    "lambda",
    "g_tilde",
    "gamma",
    "cum_utility",
    "cum_cost_mean",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    /// 1-based round index.
    pub t: usize,
    pub action: Vec<f64>,
    /// `f_t(x_t)`
    pub reward: f64,
    /// The cost vector `p_t` revealed after playing.
    pub cost_sample: Vec<f64>,
    /// `⟨p_t, x_t⟩`
    pub cost_realized: f64,
    /// `⟨p, x_t⟩` against the true mean.
    pub cost_mean: f64,
    pub lambda: f64,
    /// `g̃_t(x_t)`
    pub g_tilde: f64,
    /// Confidence margin (zero under the expectation rule and at `t = 1`).
    pub gamma: f64,
    /// Empirical mean `p̂_t` used this round (zeros at `t = 1`).
    pub p_hat: Vec<f64>,
}

/// What oracle `k` emitted in a round and the Lagrangian gradient it was
/// fed back.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleStep {
    pub point: Vec<f64>,
    pub grad: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub algorithm: String,
    pub horizon: usize,
    pub budget_total: f64,
    pub records: Vec<RoundRecord>,
    /// `oracle_log[t][k]`, present only when requested.
    pub oracle_log: Option<Vec<Vec<OracleStep>>>,
}

impl RunTrace {
    pub fn new(algorithm: impl Into<String>, horizon: usize, budget_total: f64) -> Self {
        Self {
            algorithm: algorithm.into(),
            horizon,
            budget_total,
            records: Vec::with_capacity(horizon),
            oracle_log: None,
        }
    }

    pub fn per_round_budget(&self) -> f64 {
        self.budget_total / self.horizon as f64
    }

    pub fn total_utility(&self) -> f64 {
        ksum(self.records.iter().map(|r| r.reward))
    }

    pub fn total_cost_mean(&self) -> f64 {
        ksum(self.records.iter().map(|r| r.cost_mean))
    }

    /// Running `Σ_{s≤t} f_s(x_s)`.
    pub fn cumulative_utility(&self) -> Vec<f64> {
        running(self.records.iter().map(|r| r.reward))
    }

    /// Running `Σ_{s≤t} ⟨p, x_s⟩`.
    pub fn cumulative_cost_mean(&self) -> Vec<f64> {
        running(self.records.iter().map(|r| r.cost_mean))
    }

    /// Running `Σ_{s≤t} ⟨p, x_s⟩ − t·B/T`.
    pub fn cumulative_violation(&self) -> Vec<f64> {
        let b = self.per_round_budget();
        running(self.records.iter().map(|r| r.cost_mean - b))
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{}", TRACE_COLUMNS.join(","))?;
        let mut cu = KahanSum::new();
        let mut cc = KahanSum::new();
        for r in &self.records {
            cu.add(r.reward);
            cc.add(r.cost_mean);
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{}",
                r.t,
                fmt_vec(&r.action),
                fmt_f64(r.reward),
                fmt_f64(r.cost_realized),
                fmt_f64(r.cost_mean),
                fmt_f64(r.lambda),
                fmt_f64(r.g_tilde),
                fmt_f64(r.gamma),
                fmt_f64(cu.value()),
                fmt_f64(cc.value()),
            )?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)
            .expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("CSV is ASCII")
    }
}

fn running<I: Iterator<Item = f64>>(it: I) -> Vec<f64> {
    let mut s = KahanSum::new();
    it.map(|v| {
        s.add(v);
        s.value()
    })
    .collect()
}

/// 17 significant digits, which round-trips every `f64`.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}

/// Semicolon-joined vector cell.
pub fn fmt_vec(v: &[f64]) -> String {
    v.iter().map(|x| fmt_f64(*x)).collect::<Vec<_>>().join(";")
}
