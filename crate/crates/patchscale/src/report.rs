//! The final report: one JSON document plus CSV copies of its tables.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::{read_json, write_json, ActivitySettings, AnalysisSettings, SegmentationSettings};
use crate::csvio::write_table;
use crate::error::{AppError, Result};
use crate::pipeline::{
    artifact, files, AnalysisSummary, GroupAnalysis, IngestSummary, Outcome, SegmentSummary, SCHEMA_VERSION,
};
use crate::plot::emit_plot_data;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportSettings {
    pub activity: ActivitySettings,
    pub activity_filter_applied: bool,
    pub segmentation: SegmentationSettings,
    pub analysis: AnalysisSettings,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportCounts {
    pub trades_read: usize,
    pub firms_read: usize,
    pub active_firms: Option<usize>,
    pub trades_analyzed: usize,
    pub series: usize,
    pub patches: usize,
    pub buy: usize,
    pub sell: usize,
    pub non_directional: usize,
    pub directional: usize,
    pub below_min_trades: usize,
    pub used: usize,
    pub zero_duration: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Share of all patches that are non-directional; absent without patches.
    pub non_directional_share: Option<f64>,
    /// Directional patches dropped by the minimum trade count.
    pub skipped_below_min_trades: usize,
    /// Used patches with T = 0, dropped from log-space analyses of T.
    pub skipped_zero_duration: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Seeds {
    pub segment: u64,
    pub analyze: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    /// Tail exponents are CCDF exponents: `P(X > x) ~ x^-zeta`.
    pub convention: String,
    pub notes: Vec<String>,
    pub input: String,
    pub synthetic: bool,
    pub seeds: Seeds,
    pub settings: ReportSettings,
    pub counts: ReportCounts,
    pub diagnostics: Diagnostics,
    pub groups: Vec<GroupAnalysis>,
}

impl Report {
    pub fn pooled(&self) -> Option<&GroupAnalysis> {
        self.groups.iter().find(|g| g.pooled)
    }
}

const NOTES: [&str; 3] = [
    "tail exponents use the CCDF convention; the density exponent is zeta + 1",
    "N_m is treated as continuous in the Hill estimator",
    "pooled lognormality uses chi-squared(2) critical values; per-firm tests use the small-sample table below 50 patches",
];

fn reconcile(ingest: &IngestSummary, seg: &SegmentSummary, analysis: &AnalysisSummary) -> Result<()> {
    let bad = |what: &str| Err(AppError::Numerical(format!("report counts do not reconcile: {what}")));
    let pooled = analysis
        .groups
        .iter()
        .find(|g| g.pooled)
        .ok_or_else(|| AppError::Data("analysis has no pooled group".into()))?;
    let c = &pooled.counts;
    if seg.trades != ingest.trades_kept {
        return bad("ingested vs segmented trades");
    }
    if c.patches != seg.counts.patches || c.directional != seg.counts.buy + seg.counts.sell {
        return bad("patches vs segment summary");
    }
    if c.directional + c.non_directional != c.patches || c.used + c.below_min_trades != c.directional {
        return bad("pooled patch classes");
    }
    let stock_used: usize = analysis.groups.iter().filter(|g| !g.pooled).map(|g| g.counts.used).sum();
    if stock_used != c.used {
        return bad("per-stock vs pooled patches");
    }
    for g in &analysis.groups {
        if let Some(f) = g.allometry_tri.ok() {
            if (f.g1 - f.g2 * f.g3).abs() > 1e-12 * f.g1.abs().max(1.0) {
                return Err(AppError::Numerical(format!(
                    "trivariate exponents of group {} violate g1 = g2 * g3",
                    g.group
                )));
            }
        }
    }
    Ok(())
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn write_tables(out: &Path, r: &Report) -> Result<()> {
    let c = &r.counts;
    let counts: Vec<Vec<String>> = [
        ("trades_read", Some(c.trades_read)),
        ("firms_read", Some(c.firms_read)),
        ("active_firms", c.active_firms),
        ("trades_analyzed", Some(c.trades_analyzed)),
        ("series", Some(c.series)),
        ("patches", Some(c.patches)),
        ("buy", Some(c.buy)),
        ("sell", Some(c.sell)),
        ("non_directional", Some(c.non_directional)),
        ("directional", Some(c.directional)),
        ("below_min_trades", Some(c.below_min_trades)),
        ("used", Some(c.used)),
        ("zero_duration", Some(c.zero_duration)),
    ]
    .into_iter()
    .map(|(k, v)| vec![k.to_string(), v.map(|v| v.to_string()).unwrap_or_default()])
    .collect();
    write_table(&out.join("report_counts.csv"), &["key", "value"], &counts)?;

    let mut tails = Vec::new();
    let mut allo = Vec::new();
    let mut logn = Vec::new();
    let mut disp = Vec::new();
    for g in &r.groups {
        for (var, t) in patchscale_core::patch::Variable::ALL.iter().zip(&g.tails) {
            let mut row = vec![g.group.clone(), var.label().into()];
            match t {
                Outcome::Ok(f) => row.extend([
                    "ok".into(),
                    f.zeta.to_string(),
                    f.ci95[0].to_string(),
                    f.ci95[1].to_string(),
                    f.k.to_string(),
                    f.x_k.to_string(),
                    f.n.to_string(),
                ]),
                Outcome::Empty { .. } => row.extend(["empty".into(), String::new(), String::new(), String::new(), String::new(), String::new(), String::new()]),
            }
            tails.push(row);
        }
        for (mode, fit) in [("bi", &g.allometry_bi), ("tri", &g.allometry_tri)] {
            let mut row = vec![g.group.clone(), mode.to_string()];
            match fit {
                Outcome::Ok(f) => {
                    row.push("ok".into());
                    for (v, ci) in [(f.g1, f.ci95s.g1), (f.g2, f.ci95s.g2), (f.g3, f.ci95s.g3)] {
                        row.extend([v.to_string(), ci[0].to_string(), ci[1].to_string()]);
                    }
                    row.push(f.n_points.to_string());
                }
                Outcome::Empty { .. } => {
                    row.push("empty".into());
                    row.extend(std::iter::repeat_n(String::new(), 10));
                }
            }
            allo.push(row);
        }
        for e in &g.lognormality {
            let (cell, pct) = match &e.per_firm {
                Outcome::Ok(p) => (p.display.clone(), Some(p.percentage)),
                Outcome::Empty { .. } => ("empty".to_string(), None),
            };
            let (jb, reject) = match &e.pooled {
                Outcome::Ok(p) => (Some(p.jb_stat), p.reject.to_string()),
                Outcome::Empty { .. } => (None, String::new()),
            };
            logn.push(vec![g.group.clone(), e.variable.label().into(), cell, opt(pct), opt(jb), reject]);
        }
        if let Some(d) = g.per_firm_exponents.ok() {
            for (name, s) in [("g1", d.g1), ("g2", d.g2), ("g3", d.g3)] {
                disp.push(vec![g.group.clone(), name.into(), s.n.to_string(), s.mean.to_string(), s.sd.to_string()]);
            }
        }
    }
    write_table(
        &out.join("report_tails.csv"),
        &["group", "variable", "status", "zeta", "ci_low", "ci_high", "k", "x_k", "n"],
        &tails,
    )?;
    write_table(
        &out.join("report_allometry.csv"),
        &[
            "group", "mode", "status", "g1", "g1_low", "g1_high", "g2", "g2_low", "g2_high", "g3", "g3_low",
            "g3_high", "n_points",
        ],
        &allo,
    )?;
    write_table(
        &out.join("report_lognormality.csv"),
        &["group", "variable", "per_firm", "per_firm_pct", "pooled_jb", "pooled_reject"],
        &logn,
    )?;
    write_table(
        &out.join("report_firm_dispersion.csv"),
        &["group", "exponent", "firms", "mean", "sd"],
        &disp,
    )
}

/// Assemble the report from the stage artifacts, write it with its CSV
/// tables, and emit plot data.
pub fn report_stage(out: &Path) -> Result<Report> {
    let ingest: IngestSummary = read_json(&artifact(out, files::INGEST)?)?;
    let seg: SegmentSummary = read_json(&artifact(out, files::SEGMENT)?)?;
    let analysis: AnalysisSummary = read_json(&artifact(out, files::ANALYSIS)?)?;
    if analysis.schema_version != SCHEMA_VERSION || seg.schema_version != SCHEMA_VERSION {
        return Err(AppError::Data("artifact schema version mismatch".into()));
    }
    reconcile(&ingest, &seg, &analysis)?;
    let pooled = analysis.groups.iter().find(|g| g.pooled).expect("checked").counts;
    let report = Report {
        schema_version: SCHEMA_VERSION,
        convention: "ccdf".into(),
        notes: NOTES.iter().map(|s| s.to_string()).collect(),
        input: ingest.input.clone(),
        synthetic: ingest.synthetic,
        seeds: Seeds {
            segment: seg.seed,
            analyze: analysis.seed,
        },
        settings: ReportSettings {
            activity: ingest.activity.clone(),
            activity_filter_applied: ingest.filter_applied,
            segmentation: seg.settings.clone(),
            analysis: analysis.settings.clone(),
        },
        counts: ReportCounts {
            trades_read: ingest.trades,
            firms_read: ingest.firms,
            active_firms: ingest.active_firms.as_ref().map(Vec::len),
            trades_analyzed: seg.trades,
            series: seg.series,
            patches: seg.counts.patches,
            buy: seg.counts.buy,
            sell: seg.counts.sell,
            non_directional: seg.counts.non_directional,
            directional: pooled.directional,
            below_min_trades: pooled.below_min_trades,
            used: pooled.used,
            zero_duration: pooled.zero_duration,
        },
        diagnostics: Diagnostics {
            non_directional_share: (seg.counts.patches > 0)
                .then(|| seg.counts.non_directional as f64 / seg.counts.patches as f64),
            skipped_below_min_trades: pooled.below_min_trades,
            skipped_zero_duration: pooled.zero_duration,
        },
        groups: analysis.groups,
    };
    write_json(&out.join(files::REPORT), &report)?;
    write_tables(out, &report)?;
    emit_plot_data(out)?;
    Ok(report)
}
