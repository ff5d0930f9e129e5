//! Score cards and the table-shaped experiment report.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::fs::write_atomic;
use crate::error::Result;

/// Scores of one identified (or true) model. Fractions, not percent.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ScoreCard {
    pub label: String,
    pub nx: usize,
    pub nz: usize,
    /// Scheduling kind (`-`, `ext`, `self`).
    pub sched: String,
    pub bfr_sim_train: Option<f64>,
    pub bfr_sim_test: Option<f64>,
    pub bfr_pred_train: Option<f64>,
    pub bfr_pred_test: Option<f64>,
    pub var_v: Option<f64>,
    pub var_e: Option<f64>,
    /// Wall time in seconds.
    pub time_s: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ReportLayout {
    pub sched: bool,
    pub time: bool,
}

impl Default for ReportLayout {
    fn default() -> Self {
        ReportLayout { sched: true, time: true }
    }
}

pub fn percent(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |v| format!("{:.2}%", 100.0 * v))
}

fn seconds(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |v| format!("{v:.2} s"))
}

/// One `sim` row per card and a `pred` row when the card has a noise model
/// (without one the predictor is the simulator).
pub fn render_report(cards: &[ScoreCard], layout: ReportLayout) -> String {
    let mut head = vec!["", "nx", "nz"];
    if layout.sched {
        head.push("sched");
    }
    head.extend(["BFR train", "BFR test", "type"]);
    if layout.time {
        head.push("time");
    }
    let mut rows: Vec<Vec<String>> = vec![head.iter().map(|s| s.to_string()).collect()];
    for c in cards {
        let mut kinds = vec![("sim", c.bfr_sim_train, c.bfr_sim_test)];
        if c.nz > 0 {
            kinds.push(("pred", c.bfr_pred_train, c.bfr_pred_test));
        }
        for (i, (kind, tr, te)) in kinds.into_iter().enumerate() {
            let mut r = vec![
                if i == 0 { c.label.clone() } else { String::new() },
                c.nx.to_string(),
                c.nz.to_string(),
            ];
            if layout.sched {
                r.push(c.sched.clone());
            }
            r.extend([percent(tr), percent(te), kind.to_string()]);
            if layout.time {
                r.push(if i == 0 { seconds(c.time_s) } else { String::new() });
            }
            rows.push(r);
        }
    }
    let ncol = rows[0].len();
    let widths: Vec<usize> = (0..ncol).map(|j| rows.iter().map(|r| r[j].chars().count()).max().unwrap_or(0)).collect();
    let mut out = String::new();
    for (ri, r) in rows.iter().enumerate() {
        let cells: Vec<String> = r
            .iter()
            .enumerate()
            .map(|(j, s)| if j == 0 { format!("{s:<w$}", w = widths[j]) } else { format!("{s:>w$}", w = widths[j]) })
            .collect();
        out.push_str(cells.join(" | ").trim_end());
        out.push('\n');
        if ri == 0 {
            let rule: Vec<String> = widths.iter().map(|&w| "-".repeat(w)).collect();
            out.push_str(&rule.join("-+-"));
            out.push('\n');
        }
    }
    out
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |v| format!("{v:.16e}"))
}

pub fn scorecards_csv(cards: &[ScoreCard]) -> String {
    let mut out =
        String::from("label,nx,nz,sched,bfr_sim_train,bfr_sim_test,bfr_pred_train,bfr_pred_test,var_v,var_e,time_s\n");
    for c in cards {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            c.label.replace(',', ";"),
            c.nx,
            c.nz,
            c.sched,
            opt(c.bfr_sim_train),
            opt(c.bfr_sim_test),
            opt(c.bfr_pred_train),
            opt(c.bfr_pred_test),
            opt(c.var_v),
            opt(c.var_e),
            opt(c.time_s)
        );
    }
    out
}

pub fn write_scorecards(cards: &[ScoreCard], path: &Path) -> Result<()> {
    write_atomic(path, scorecards_csv(cards).as_bytes())
}
