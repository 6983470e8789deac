//! Plain-text tables and versioned JSON wrappers for CLI output.

use std::fmt::Write as _;

use qverify_core::metrics::{BaselineReport, MetricsReport};
use serde::{Deserialize, Serialize};

pub const OUTPUT_VERSION: u32 = 1;

/// Any JSON output document, tagged with the schema version.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Versioned<T> {
    pub v: u32,
    #[serde(flatten)]
    pub body: T,
}

impl<T> Versioned<T> {
    pub fn new(body: T) -> Self {
        Self { v: OUTPUT_VERSION, body }
    }
}

fn pct(x: f64) -> String {
    format!("{x:.2}%")
}

fn opt(x: Option<f64>, digits: usize) -> String {
    x.map_or_else(|| "n/a".into(), |v| format!("{v:.digits$}"))
}

/// Metric rows by Pass@1 and Pass@k columns.
pub fn metrics_table(r: &MetricsReport) -> String {
    let k = format!("Pass@{}", r.k);
    let rows = [
        ("SCR", pct(r.pass_1.scr), pct(r.pass_k.scr)),
        (
            "SREV",
            pct(r.pass_1.srev),
            pct(r.pass_k.srev),
        ),
        ("RE", opt(r.pass_1.re, 4), opt(r.pass_k.re, 4)),
        ("HQCR", pct(r.pass_1.hqcr), pct(r.pass_k.hqcr)),
    ];
    let mut s = String::new();
    let _ = writeln!(s, "tasks: {}  srev_tol: {}  hqcr_tol: {}", r.n_tasks, r.srev_tol, r.hqcr_tol);
    let _ = writeln!(s, "{:<8}{:>12}{:>12}", "metric", "Pass@1", k);
    for (name, a, b) in rows {
        let _ = writeln!(s, "{name:<8}{a:>12}{b:>12}");
    }
    if let Some(d) = &r.delta_e {
        let _ = writeln!(
            s,
            "|dE| over {} candidates: mean {:.4}  median {:.4}  min {:.4}  max {:.4}",
            d.count, d.mean, d.median, d.min, d.max
        );
    }
    s
}

/// Ground truth against random parameters, one column each.
pub fn baseline_table(r: &BaselineReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "records: {}  samples: {}", r.rows.len(), r.samples);
    let _ = writeln!(s, "{:<24}{:>14}{:>14}", "metric", "ground truth", "random");
    let _ = writeln!(s, "{:<24}{:>14}{:>14}", "mean normalized energy", opt(r.mean_f_gt, 4), opt(r.mean_f_rand, 4));
    let _ = writeln!(s, "{:<24}{:>14}{:>14}", "mean JS distance", opt(r.mean_js_gt, 4), opt(r.mean_js_rand, 4));
    if let Some(w) = r.win_rate() {
        let _ = writeln!(s, "ground truth better on both: {}", pct(100.0 * w));
    }
    s
}
