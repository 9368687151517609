//! CSV and aligned-text renderings of experiment, table and diagnostic reports.
//!
//! Floats are written in shortest round-trip form, so reading a CSV back
//! recovers the reported values bit for bit.

use std::fmt::Write as _;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::harness::{
    ColumnSummary, DiagnosticReport, EstimateMode, ExperimentReport, LevelReport, TableReport,
    TableRow,
};

/// Text shown where the shortfall bound's precondition fails.
pub const ES_BOUND_NOT_APPLICABLE: &str = "not applicable (α ≤ 2)";

#[derive(Debug, Serialize, Deserialize)]
struct LevelCsvRow {
    p: f64,
    one_minus_p: f64,
    anchor: f64,
    mean: f64,
    std_dev: f64,
    avg_time_s: f64,
    mass_deficits: usize,
    /// Per-replication estimates joined by `;`.
    estimates: String,
}

pub fn write_experiment_csv<W: Write>(report: &ExperimentReport, out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for l in &report.levels {
        let estimates = l
            .estimates
            .iter()
            .map(|e| format!("{e:?}"))
            .collect::<Vec<_>>()
            .join(";");
        w.serialize(LevelCsvRow {
            p: l.p,
            one_minus_p: 1.0 - l.p,
            anchor: l.anchor,
            mean: l.mean,
            std_dev: l.std_dev,
            avg_time_s: l.avg_time_s,
            mass_deficits: l.mass_deficits,
            estimates,
        })?;
    }
    w.flush()
}

pub fn read_experiment_csv<R: Read>(input: R) -> std::io::Result<Vec<LevelReport>> {
    let mut out = Vec::new();
    for row in csv::Reader::from_reader(input).into_deserialize::<LevelCsvRow>() {
        let row = row?;
        let estimates = if row.estimates.is_empty() {
            Vec::new()
        } else {
            row.estimates
                .split(';')
                .map(|s| {
                    s.parse::<f64>()
                        .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))
                })
                .collect::<std::io::Result<_>>()?
        };
        out.push(LevelReport {
            p: row.p,
            anchor: row.anchor,
            mean: row.mean,
            std_dev: row.std_dev,
            avg_time_s: row.avg_time_s,
            mass_deficits: row.mass_deficits,
            estimates,
        });
    }
    Ok(out)
}

/// Significant-figure formatting in the style of the printed tables.
fn sig(x: f64, digits: i32) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return format!("{:.*}", (digits - 1) as usize, 0.0);
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (digits - 1 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

fn mode_name(mode: EstimateMode) -> &'static str {
    match mode {
        EstimateMode::Var => "VaR",
        EstimateMode::Es => "ES",
        EstimateMode::TailProb => "P(S_n > anchor)",
    }
}

pub fn experiment_text(report: &ExperimentReport) -> String {
    let c = &report.config;
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{} estimate, {}, alpha = {}, n = {}, N = {}, {} replications, seed {}",
        mode_name(c.mode),
        c.algorithm.short_name(),
        c.alpha,
        c.n,
        c.samples,
        c.reps,
        c.seed
    );
    let _ = writeln!(
        s,
        "{:>10} {:>12} {:>12} {:>12} {:>12} {:>10}",
        "1-p", "anchor", "Avg. est.", "(Std. dev.)", "[time (s)]", "deficits"
    );
    for l in &report.levels {
        let _ = writeln!(
            s,
            "{:>10.0e} {:>12} {:>12} {:>12} {:>12} {:>10}",
            1.0 - l.p,
            sig(l.anchor, 5),
            sig(l.mean, 5),
            format!("({})", sig(l.std_dev, 4)),
            format!("[{}]", sig(l.avg_time_s, 3)),
            l.mass_deficits
        );
    }
    s
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableCsvRow {
    pub n: usize,
    pub one_minus_p: f64,
    pub true_value: f64,
    pub approx: f64,
    pub sm_mean: f64,
    pub sm_std: f64,
    pub dlw_mean: f64,
    pub dlw_std: f64,
    pub mc_mean: f64,
    pub mc_std: f64,
    /// Average seconds per replication over the SM, DLW and MC columns.
    pub avg_time_s: f64,
}

impl From<&TableRow> for TableCsvRow {
    fn from(r: &TableRow) -> Self {
        Self {
            n: r.n,
            one_minus_p: r.one_minus_p,
            true_value: r.true_value,
            approx: r.approx,
            sm_mean: r.sm.mean,
            sm_std: r.sm.std_dev,
            dlw_mean: r.dlw.mean,
            dlw_std: r.dlw.std_dev,
            mc_mean: r.mc.mean,
            mc_std: r.mc.std_dev,
            avg_time_s: (r.sm.avg_time_s + r.dlw.avg_time_s + r.mc.avg_time_s) / 3.0,
        }
    }
}

pub fn write_table_csv<W: Write>(report: &TableReport, out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in &report.rows {
        w.serialize(TableCsvRow::from(r))?;
    }
    w.flush()
}

pub fn read_table_csv<R: Read>(input: R) -> std::io::Result<Vec<TableCsvRow>> {
    csv::Reader::from_reader(input)
        .into_deserialize()
        .map(|r| r.map_err(Into::into))
        .collect()
}

/// Aligned text laid out like the printed tables: one block per cell with
/// mean, (std. dev.) and [avg. time] lines.
pub fn table_text(report: &TableReport) -> String {
    let spec = &report.spec;
    let mut s = String::new();
    let _ = writeln!(
        s,
        "Table {}: {} of S_n, P(Z > x) = (1 + x)^-{}, N = {}, {} replications, seed {}",
        spec.id,
        mode_name(spec.mode),
        spec.alpha,
        report.samples,
        report.reps,
        report.seed
    );
    let rule = "-".repeat(96);
    let _ = writeln!(s, "{rule}");
    let _ = writeln!(
        s,
        "{:>4} {:>7} {:>10} {:>10} {:>12} {:>12} {:>12}  ",
        "n", "1-p", "True", "Approx.", "SM", "DLW", "MC"
    );
    let _ = writeln!(s, "{rule}");
    for r in &report.rows {
        let cols: [&ColumnSummary; 3] = [&r.sm, &r.dlw, &r.mc];
        let _ = writeln!(
            s,
            "{:>4} {:>7.0e} {:>10} {:>10} {:>12} {:>12} {:>12}  Avg. est.",
            r.n,
            r.one_minus_p,
            sig(r.true_value, 5),
            sig(r.approx, 5),
            sig(cols[0].mean, 5),
            sig(cols[1].mean, 5),
            sig(cols[2].mean, 5)
        );
        let _ = writeln!(
            s,
            "{:>34} {:>12} {:>12} {:>12}  (Std. dev.)",
            "",
            format!("({})", sig(cols[0].std_dev, 4)),
            format!("({})", sig(cols[1].std_dev, 4)),
            format!("({})", sig(cols[2].std_dev, 4))
        );
        let _ = writeln!(
            s,
            "{:>34} {:>12} {:>12} {:>12}  [Avg. time (s)]",
            "",
            format!("[{}]", sig(cols[0].avg_time_s, 3)),
            format!("[{}]", sig(cols[1].avg_time_s, 3)),
            format!("[{}]", sig(cols[2].avg_time_s, 3))
        );
        let _ = writeln!(s, "{rule}");
    }
    s
}

#[derive(Debug, Serialize, Deserialize)]
struct DiagnosticCsvRow {
    p: f64,
    lambda: f64,
    c: f64,
    ratio: f64,
    ratio_se: f64,
    phi: f64,
    max_scaled_weight: f64,
    var_ratio_bound: String,
    es_ratio_bound: String,
}

fn bound_text(b: Option<f64>, missing: &str) -> String {
    b.map_or_else(|| missing.to_string(), |v| format!("{v:?}"))
}

fn es_missing(alpha: f64) -> &'static str {
    if alpha <= 2.0 {
        ES_BOUND_NOT_APPLICABLE
    } else {
        "unavailable"
    }
}

pub fn write_diagnostic_csv<W: Write>(report: &DiagnosticReport, alpha: f64, levels: &[f64], out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in &report.rows {
        let l = levels.iter().position(|&p| p == row.p).unwrap_or(0);
        w.serialize(DiagnosticCsvRow {
            p: row.p,
            lambda: row.lambda,
            c: row.c,
            ratio: row.ratio,
            ratio_se: row.ratio_se,
            phi: row.phi,
            max_scaled_weight: row.max_scaled_weight,
            var_ratio_bound: bound_text(report.var_ratio_bound[l], "unavailable"),
            es_ratio_bound: bound_text(report.es_ratio_bound[l], es_missing(alpha)),
        })?;
    }
    w.flush()
}

pub fn diagnostic_text(report: &DiagnosticReport, alpha: f64, levels: &[f64]) -> String {
    let mut s = String::new();
    for (l, &p) in levels.iter().enumerate() {
        let rows: Vec<_> = report.rows.iter().filter(|r| r.p == p).collect();
        let lambda = rows.first().map_or(f64::NAN, |r| r.lambda);
        let _ = writeln!(s, "level 1-p = {:.0e}, lambda = {}", 1.0 - p, sig(lambda, 5));
        let _ = writeln!(
            s,
            "{:>8} {:>14} {:>12} {:>14} {:>16}",
            "c", "ratio", "(SE)", "phi(c)", "max w/F_Z"
        );
        for r in rows {
            let _ = writeln!(
                s,
                "{:>8} {:>14} {:>12} {:>14} {:>16}",
                r.c,
                sig(r.ratio, 6),
                format!("({})", sig(r.ratio_se, 3)),
                sig(r.phi, 6),
                sig(r.max_scaled_weight, 6)
            );
        }
        let _ = writeln!(
            s,
            "variance ratio bound: {}",
            bound_text(report.var_ratio_bound[l], "unavailable")
        );
        let _ = writeln!(
            s,
            "shortfall ratio bound: {}",
            bound_text(report.es_ratio_bound[l], es_missing(alpha))
        );
    }
    s
}
