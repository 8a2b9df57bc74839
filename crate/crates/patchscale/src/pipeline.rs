//! Pipeline stages. Each stage reads the artifacts of the previous one from
//! the output directory and writes its own.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use patchscale_core::allometry::{self, dispersion, fit_with_ci, log_points, Dispersion, LogPoint, Mode};
use patchscale_core::lognorm::{self, per_firm_lognormality, positive_values, CriticalValues, MIN_SAMPLE};
use patchscale_core::market::{build_all_series, filter_active_firms, FirmId, Trade};
use patchscale_core::patch::{cut_patches, DirectionalPatch, Variable};
use patchscale_core::rng::{derive_seed, tag};
use patchscale_core::segment::{Segmenter, SegmenterConfig};
use patchscale_core::synth::generate;
use patchscale_core::tail::fit_tail;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{
    read_json, write_json, ActivitySettings, AnalysisSettings, Input, RunConfig, SegmentationSettings,
};
use crate::csvio::{self, PatchRow};
use crate::error::{AppError, Result};

pub const SCHEMA_VERSION: u32 = 1;
pub const POOLED: &str = "ALL";

pub mod files {
    pub const TAPE: &str = "tape.csv";
    pub const GROUND_TRUTH: &str = "ground_truth.json";
    pub const SYNTH_CONFIG: &str = "synth_config.json";
    pub const INGEST: &str = "ingest.json";
    pub const SEGMENTATIONS: &str = "segmentations.json";
    pub const PATCHES: &str = "patches.csv";
    pub const SEGMENT: &str = "segment.json";
    pub const ANALYSIS: &str = "analysis.json";
    pub const ANALYSIS_DIR: &str = "analysis";
    pub const REPORT: &str = "report.json";
    pub const PLOTS_DIR: &str = "plots";
    pub const FAILED: &str = "FAILED";
}

/// Artifact path, failing with a data error naming it when absent.
pub fn artifact(out: &Path, name: &str) -> Result<PathBuf> {
    let p = out.join(name);
    if p.exists() {
        Ok(p)
    } else {
        Err(AppError::Data(format!("missing artifact: {}", p.display())))
    }
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| AppError::io(dir, e))
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| AppError::Usage(format!("--jobs: {e}")))
}

/// Directory name of an analysis group.
pub fn group_dir(group: &str, pooled: bool) -> String {
    if pooled {
        return POOLED.into();
    }
    let clean: String = group
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || "-_.".contains(c) { c } else { '_' })
        .collect();
    format!("stock_{clean}")
}

/// Run `f` as stage `stage`. On failure, tag the error and leave a marker
/// file in the output directory.
pub fn run_stage<T>(out: &Path, stage: &'static str, f: impl FnOnce() -> Result<T>) -> Result<T> {
    f().map_err(|e| {
        let e = e.stage(stage);
        if std::fs::create_dir_all(out).is_ok() {
            let _ = std::fs::write(
                out.join(files::FAILED),
                format!("stage: {stage}\nerror: {e}\n"),
            );
        }
        e
    })
}

// ---------------------------------------------------------------------------
// synth

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSummary {
    pub firms: usize,
    pub trades: usize,
    pub packages: usize,
    pub churn_segments: usize,
}

pub fn synth_stage(cfg: &RunConfig) -> Result<SynthSummary> {
    let input = cfg
        .input
        .as_ref()
        .ok_or_else(|| AppError::Usage("synth needs --preset or --synth-config".into()))?;
    let synth = input
        .synth_config(cfg.seed)?
        .ok_or_else(|| AppError::Usage("synth needs a generator input, not a tape".into()))?;
    let out = &cfg.output_dir;
    ensure_dir(out)?;
    let market = generate(&synth)?;
    csvio::write_trades_file(&out.join(files::TAPE), &market.trades)?;
    write_json(&out.join(files::GROUND_TRUTH), &market.truth)?;
    write_json(&out.join(files::SYNTH_CONFIG), &synth)?;
    Ok(SynthSummary {
        firms: synth.n_firms,
        trades: market.trades.len(),
        packages: market.truth.packages.len(),
        churn_segments: market.truth.churn.len(),
    })
}

// ---------------------------------------------------------------------------
// ingest

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestSummary {
    pub schema_version: u32,
    /// Short description of the input, free of directory names.
    pub input: String,
    pub tape: PathBuf,
    pub synthetic: bool,
    pub trades: usize,
    pub firms: usize,
    pub stocks: usize,
    pub activity: ActivitySettings,
    pub filter_applied: bool,
    /// Firms passing the activity filter; absent when it was not applied.
    pub active_firms: Option<Vec<String>>,
    pub trades_kept: usize,
}

fn file_name(p: &Path) -> String {
    p.file_name().map_or_else(|| p.display().to_string(), |n| n.to_string_lossy().into_owned())
}

pub fn ingest_stage(cfg: &RunConfig) -> Result<IngestSummary> {
    let out = &cfg.output_dir;
    ensure_dir(out)?;
    let (tape, input, synthetic) = match &cfg.input {
        Some(Input::Tape(p)) => (p.clone(), format!("tape:{}", file_name(p)), false),
        Some(Input::SynthPreset(name)) => (artifact(out, files::TAPE)?, format!("synth-preset:{name}"), true),
        Some(Input::SynthConfig(p)) => (artifact(out, files::TAPE)?, format!("synth-config:{}", file_name(p)), true),
        None => {
            let tape = artifact(out, files::TAPE)?;
            let synthetic = out.join(files::SYNTH_CONFIG).exists();
            (tape, format!("tape:{}", files::TAPE), synthetic)
        }
    };
    let tape = std::fs::canonicalize(&tape).map_err(|e| AppError::io(&tape, e))?;
    let trades = csvio::read_trades_file(&tape)?;
    let firms: BTreeSet<&FirmId> = trades.iter().map(|t| &t.firm).collect();
    let stocks: BTreeSet<_> = trades.iter().map(|t| &t.stock).collect();
    let filter_applied = cfg.activity.applies(synthetic);
    let (active_firms, trades_kept) = if filter_applied {
        let active = filter_active_firms(&trades, &cfg.activity.thresholds());
        let kept = trades.iter().filter(|t| active.contains(&t.firm)).count();
        (Some(active.into_iter().map(|f| f.0).collect()), kept)
    } else {
        (None, trades.len())
    };
    let summary = IngestSummary {
        schema_version: SCHEMA_VERSION,
        input,
        tape,
        synthetic,
        trades: trades.len(),
        firms: firms.len(),
        stocks: stocks.len(),
        activity: cfg.activity.clone(),
        filter_applied,
        active_firms,
        trades_kept,
    };
    write_json(&out.join(files::INGEST), &summary)?;
    Ok(summary)
}

/// Trades of the ingest stage, with the activity filter applied.
pub fn ingested_trades(out: &Path) -> Result<(IngestSummary, Vec<Trade>)> {
    let summary: IngestSummary = read_json(&artifact(out, files::INGEST)?)?;
    let mut trades = csvio::read_trades_file(&summary.tape)?;
    if let Some(active) = &summary.active_firms {
        let active: BTreeSet<&str> = active.iter().map(String::as_str).collect();
        trades.retain(|t| active.contains(t.firm.0.as_str()));
    }
    Ok((summary, trades))
}

// ---------------------------------------------------------------------------
// segment

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentationRecord {
    pub firm_id: String,
    pub stock_id: String,
    pub threshold: f64,
    pub boundaries: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PatchCounts {
    pub patches: usize,
    pub buy: usize,
    pub sell: usize,
    pub non_directional: usize,
}

impl PatchCounts {
    fn add(&mut self, row: &PatchRow) {
        self.patches += 1;
        match row.direction.as_str() {
            "B" => self.buy += 1,
            "S" => self.sell += 1,
            _ => self.non_directional += 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentSummary {
    pub schema_version: u32,
    pub settings: SegmentationSettings,
    pub seed: u64,
    pub series: usize,
    pub trades: usize,
    pub counts: PatchCounts,
    pub per_stock: BTreeMap<String, PatchCounts>,
}

pub fn segment_stage(cfg: &RunConfig) -> Result<SegmentSummary> {
    let out = &cfg.output_dir;
    let (_, trades) = ingested_trades(out)?;
    let s = &cfg.segmentation;
    let seed = derive_seed(cfg.seed, &[tag("segment")]);
    let segmenter = Segmenter::new(SegmenterConfig {
        threshold: s.threshold,
        statistic: s.t_statistic,
        mode: s.significance_mode,
        mc_trials: s.mc_trials,
        seed,
        ..SegmenterConfig::default()
    })?;
    let series: Vec<_> = build_all_series(&trades).into_iter().collect();
    let results = pool(cfg.jobs)?.install(|| {
        series
            .par_iter()
            .map(|(_, s)| {
                let seg = segmenter.segment(s);
                let patches = cut_patches(s, &seg)?;
                Ok((seg, patches))
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let mut records = Vec::with_capacity(series.len());
    let mut rows = Vec::new();
    let mut counts = PatchCounts::default();
    let mut per_stock: BTreeMap<String, PatchCounts> = BTreeMap::new();
    for (((stock, firm), _), (seg, patches)) in series.iter().zip(results) {
        records.push(SegmentationRecord {
            firm_id: firm.0.clone(),
            stock_id: stock.0.clone(),
            threshold: seg.threshold,
            boundaries: seg.boundaries,
        });
        for p in &patches {
            let row = PatchRow::new(p, s.theta);
            counts.add(&row);
            per_stock.entry(stock.0.clone()).or_default().add(&row);
            rows.push(row);
        }
    }
    write_json(&out.join(files::SEGMENTATIONS), &records)?;
    csvio::write_patches(&out.join(files::PATCHES), &rows)?;
    let summary = SegmentSummary {
        schema_version: SCHEMA_VERSION,
        settings: s.clone(),
        seed,
        series: series.len(),
        trades: trades.len(),
        counts,
        per_stock,
    };
    write_json(&out.join(files::SEGMENT), &summary)?;
    Ok(summary)
}

// ---------------------------------------------------------------------------
// analyze

/// Result of one analysis, or an explicit marker when there is too little
/// data for it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum Outcome<T> {
    Ok(T),
    Empty { reason: String },
}

impl<T> Outcome<T> {
    pub fn ok(&self) -> Option<&T> {
        match self {
            Outcome::Ok(t) => Some(t),
            Outcome::Empty { .. } => None,
        }
    }
}

/// Too little data becomes an empty marker; anything else is an error.
fn outcome<T>(r: patchscale_core::Result<T>) -> Result<Outcome<T>> {
    use patchscale_core::Error as E;
    match r {
        Ok(t) => Ok(Outcome::Ok(t)),
        Err(e @ E::TooFewPoints { .. }) | Err(e @ E::InvalidParameter { name: "k", .. }) => {
            Ok(Outcome::Empty { reason: e.to_string() })
        }
        Err(e) => Err(e.into()),
    }
}

fn empty<T>(reason: &str) -> Outcome<T> {
    Outcome::Empty { reason: reason.into() }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailFitExport {
    pub variable: Variable,
    pub zeta: f64,
    pub ci95: [f64; 2],
    pub k: usize,
    pub x_k: f64,
    pub n: usize,
    pub convention: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Intervals {
    pub g1: [f64; 2],
    pub g2: [f64; 2],
    pub g3: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllometryExport {
    pub mode: Mode,
    pub g1: f64,
    pub g2: f64,
    pub g3: f64,
    pub ci95s: Intervals,
    pub explained_variance: Vec<f64>,
    pub n_points: usize,
    #[serde(rename = "B")]
    pub b: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerFirmLognormality {
    pub tested: usize,
    pub non_rejecting: usize,
    pub percentage: f64,
    /// Percentage with counts, e.g. `93.5 (58/62)`.
    pub display: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PooledLognormality {
    pub n: usize,
    pub skewness: f64,
    pub kurtosis: f64,
    pub jb_stat: f64,
    pub critical_value: f64,
    pub reject: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LognormalityEntry {
    pub variable: Variable,
    pub per_firm: Outcome<PerFirmLognormality>,
    pub pooled: Outcome<PooledLognormality>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FirmDispersion {
    pub firms: usize,
    pub g1: Dispersion,
    pub g2: Dispersion,
    pub g3: Dispersion,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct GroupCounts {
    pub patches: usize,
    pub directional: usize,
    pub non_directional: usize,
    pub below_min_trades: usize,
    /// Directional patches with at least the minimum trade count.
    pub used: usize,
    /// Used patches with T = 0, left out of every log-space analysis of T.
    pub zero_duration: usize,
    pub firms: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupAnalysis {
    pub group: String,
    pub pooled: bool,
    pub dir: String,
    pub seed: u64,
    pub counts: GroupCounts,
    pub tails: Vec<Outcome<TailFitExport>>,
    pub allometry_bi: Outcome<AllometryExport>,
    pub allometry_tri: Outcome<AllometryExport>,
    pub lognormality: Vec<LognormalityEntry>,
    pub per_firm_exponents: Outcome<FirmDispersion>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisSummary {
    pub schema_version: u32,
    pub settings: AnalysisSettings,
    pub seed: u64,
    pub groups: Vec<GroupAnalysis>,
}

/// Table-1 style cell: `93.5 (58/62)`, `100 (27/27)`.
pub fn table_cell(non_rejecting: usize, tested: usize) -> String {
    let pct = 100.0 * non_rejecting as f64 / tested as f64;
    let s = format!("{pct:.1}");
    let s = s.strip_suffix(".0").unwrap_or(&s);
    format!("{s} ({non_rejecting}/{tested})")
}

#[derive(Serialize)]
struct FirmExponentRow<'a> {
    firm_id: &'a str,
    n_patches: usize,
    g1: f64,
    g2: f64,
    g3: f64,
}

fn export_fit(fit: allometry::AllometricFit, b: usize, seed: u64) -> AllometryExport {
    let ci = fit.ci95.expect("fit_with_ci attaches intervals");
    AllometryExport {
        mode: fit.mode,
        g1: fit.g1,
        g2: fit.g2,
        g3: fit.g3,
        ci95s: Intervals {
            g1: [ci[0].0, ci[0].1],
            g2: [ci[1].0, ci[1].1],
            g3: [ci[2].0, ci[2].1],
        },
        explained_variance: fit.explained_variance,
        n_points: fit.n_points,
        b,
        seed,
    }
}

/// Analyze the rows of one group and write its per-group exports to `dir`.
pub fn analyze_group(
    group: &str,
    pooled: bool,
    rows: &[&PatchRow],
    settings: &AnalysisSettings,
    seed: u64,
    dir: &Path,
) -> Result<GroupAnalysis> {
    ensure_dir(dir)?;
    let mut counts = GroupCounts {
        patches: rows.len(),
        ..GroupCounts::default()
    };
    let mut used: Vec<DirectionalPatch> = Vec::new();
    for r in rows {
        let Some(d) = r.to_directional() else {
            counts.non_directional += 1;
            continue;
        };
        counts.directional += 1;
        if r.n_trades() < settings.min_patch_trades {
            counts.below_min_trades += 1;
        } else {
            used.push(d);
        }
    }
    counts.used = used.len();
    counts.zero_duration = used.iter().filter(|d| d.duration == 0).count();
    let mut by_firm: BTreeMap<FirmId, Vec<DirectionalPatch>> = BTreeMap::new();
    for d in &used {
        by_firm.entry(d.patch.firm.clone()).or_default().push(d.clone());
    }
    counts.firms = by_firm.len();

    // Tails
    let policy = settings.k_policy()?;
    let mut tails = Vec::new();
    for var in Variable::ALL {
        let xs = positive_values(&used, var);
        let fit = if xs.is_empty() {
            empty("no directional patches")
        } else {
            outcome(fit_tail(&xs, policy))?
        };
        tails.push(match fit {
            Outcome::Ok(f) => Outcome::Ok(TailFitExport {
                variable: var,
                zeta: f.zeta,
                ci95: [f.ci95.0, f.ci95.1],
                k: f.k,
                x_k: f.x_k,
                n: f.n,
                convention: "ccdf".into(),
            }),
            Outcome::Empty { reason } => Outcome::Empty { reason },
        });
    }
    write_json(&dir.join("tail_fits.json"), &tails)?;

    // Allometry
    let (points, _) = log_points(&used);
    let b = settings.bootstrap_samples;
    let mut fits = Vec::new();
    for mode in [Mode::Bi, Mode::Tri] {
        let fit = if points.is_empty() {
            empty("no directional patches with T > 0")
        } else {
            outcome(fit_with_ci(&points, mode, b, seed))?
        };
        let fit = match fit {
            Outcome::Ok(f) => Outcome::Ok(export_fit(f, b, seed)),
            Outcome::Empty { reason } => Outcome::Empty { reason },
        };
        let name = match mode {
            Mode::Bi => "allometry_bi.json",
            Mode::Tri => "allometry_tri.json",
        };
        write_json(&dir.join(name), &fit)?;
        fits.push(fit);
    }
    let allometry_tri = fits.pop().expect("two modes");
    let allometry_bi = fits.pop().expect("two modes");

    // Per-firm exponents
    let firm_points: BTreeMap<FirmId, Vec<LogPoint>> = by_firm
        .iter()
        .map(|(f, ps)| (f.clone(), log_points(ps).0))
        .collect();
    let exps = allometry::per_firm_exponents(&firm_points, settings.min_firm_patches);
    let exp_rows: Vec<FirmExponentRow> = exps
        .iter()
        .map(|(f, e)| FirmExponentRow {
            firm_id: &f.0,
            n_patches: e.n_patches,
            g1: e.g1,
            g2: e.g2,
            g3: e.g3,
        })
        .collect();
    let exp_path = dir.join("per_firm_exponents.csv");
    if exp_rows.is_empty() {
        csvio::write_table(&exp_path, &["firm_id", "n_patches", "g1", "g2", "g3"], &[])?;
    } else {
        csvio::write_rows(&exp_path, &exp_rows)?;
    }
    let per_firm_exponents = match (
        dispersion(exps.values().map(|e| e.g1)),
        dispersion(exps.values().map(|e| e.g2)),
        dispersion(exps.values().map(|e| e.g3)),
    ) {
        (Some(g1), Some(g2), Some(g3)) => Outcome::Ok(FirmDispersion {
            firms: exps.len(),
            g1,
            g2,
            g3,
        }),
        _ => empty("no firm has enough patches"),
    };

    // Lognormality
    let min_firm = settings.min_firm_patches.max(MIN_SAMPLE);
    let mut lognormality = Vec::new();
    let mut jb_rows = Vec::new();
    for var in Variable::ALL {
        let testable = by_firm
            .values()
            .any(|ps| positive_values(ps, var).len() >= min_firm);
        let per_firm = if testable {
            let s = per_firm_lognormality(&by_firm, var, settings.min_firm_patches, settings.critical_values)?;
            for r in &s.results {
                jb_rows.push(vec![
                    r.firm.0.clone(),
                    var.label().to_string(),
                    r.n.to_string(),
                    r.jb_stat.to_string(),
                    r.critical_value.to_string(),
                    r.reject.to_string(),
                ]);
            }
            Outcome::Ok(PerFirmLognormality {
                tested: s.tested,
                non_rejecting: s.non_rejecting,
                percentage: s.percentage,
                display: table_cell(s.non_rejecting, s.tested),
            })
        } else {
            empty("no firm has enough patches")
        };
        let xs = positive_values(&used, var);
        let pooled_jb = if xs.len() < MIN_SAMPLE {
            empty("too few patches")
        } else {
            outcome(lognorm::lognormality(&xs, CriticalValues::Asymptotic))?
        };
        let pooled_jb = match pooled_jb {
            Outcome::Ok(j) => Outcome::Ok(PooledLognormality {
                n: j.n,
                skewness: j.skewness,
                kurtosis: j.kurtosis,
                jb_stat: j.jb_stat,
                critical_value: j.critical_value,
                reject: j.reject,
            }),
            Outcome::Empty { reason } => Outcome::Empty { reason },
        };
        lognormality.push(LognormalityEntry {
            variable: var,
            per_firm,
            pooled: pooled_jb,
        });
    }
    csvio::write_table(
        &dir.join("lognormality.csv"),
        &["firm_id", "variable", "n", "jb_stat", "critical_value", "reject"],
        &jb_rows,
    )?;
    write_json(&dir.join("lognormality_summary.json"), &lognormality)?;

    Ok(GroupAnalysis {
        group: group.into(),
        pooled,
        dir: group_dir(group, pooled),
        seed,
        counts,
        tails,
        allometry_bi,
        allometry_tri,
        lognormality,
        per_firm_exponents,
    })
}

pub fn analyze_stage(cfg: &RunConfig) -> Result<AnalysisSummary> {
    let out = &cfg.output_dir;
    let rows = csvio::read_patches(&artifact(out, files::PATCHES)?)?;
    let settings = &cfg.analysis;
    settings.k_policy()?;
    let seed = derive_seed(cfg.seed, &[tag("analyze")]);

    let mut groups: Vec<(String, bool, Vec<&PatchRow>)> = Vec::new();
    let mut by_stock: BTreeMap<&str, Vec<&PatchRow>> = BTreeMap::new();
    for r in &rows {
        by_stock.entry(&r.stock_id).or_default().push(r);
    }
    for (stock, rs) in by_stock {
        groups.push((stock.to_string(), false, rs));
    }
    groups.push((POOLED.into(), true, rows.iter().collect()));

    let base = out.join(files::ANALYSIS_DIR);
    let analyses = pool(cfg.jobs)?.install(|| {
        groups
            .par_iter()
            .map(|(name, pooled, rs)| {
                let dir = base.join(group_dir(name, *pooled));
                let gseed = derive_seed(seed, &[tag(name), *pooled as u64]);
                analyze_group(name, *pooled, rs, settings, gseed, &dir)
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let summary = AnalysisSummary {
        schema_version: SCHEMA_VERSION,
        settings: settings.clone(),
        seed,
        groups: analyses,
    };
    write_json(&out.join(files::ANALYSIS), &summary)?;
    Ok(summary)
}

// ---------------------------------------------------------------------------
// report

pub use crate::report::{report_stage, Report};

/// Every stage in order. Synthetic inputs are generated first.
pub fn run_pipeline(cfg: &RunConfig) -> Result<Report> {
    cfg.validate()?;
    let out = &cfg.output_dir;
    ensure_dir(out)?;
    let _ = std::fs::remove_file(out.join(files::FAILED));
    if cfg.input.as_ref().is_some_and(Input::is_synthetic) {
        run_stage(out, "synth", || synth_stage(cfg))?;
    }
    run_stage(out, "ingest", || ingest_stage(cfg))?;
    run_stage(out, "segment", || segment_stage(cfg))?;
    run_stage(out, "analyze", || analyze_stage(cfg))?;
    run_stage(out, "report", || report_stage(out))
}
