//! Plot data: CCDFs, log-log scatters with principal-axis lines and
//! histograms of per-firm exponents. No rendering.

use std::path::{Path, PathBuf};

use patchscale_core::allometry::{log_points, Relation};
use patchscale_core::lognorm::positive_values;
use patchscale_core::patch::{DirectionalPatch, Variable};
use patchscale_core::tail::ccdf;
use serde::Deserialize;

use crate::config::read_json;
use crate::csvio::{read_patches, write_table};
use crate::error::{AppError, Result};
use crate::pipeline::{artifact, files, AnalysisSummary};

pub const HIST_BINS: usize = 20;

/// Line through `centroid` with `slope`, spanning `[x_lo, x_hi]`.
pub fn axis_line(centroid: (f64, f64), slope: f64, x_lo: f64, x_hi: f64) -> [(f64, f64); 2] {
    let at = |x: f64| (x, centroid.1 + slope * (x - centroid.0));
    [at(x_lo), at(x_hi)]
}

/// Equal-width bins over the sample range, as `(lo, hi, count)`.
pub fn histogram(xs: &[f64], bins: usize) -> Vec<(f64, f64, usize)> {
    if xs.is_empty() || bins == 0 {
        return Vec::new();
    }
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi <= lo {
        return vec![(lo, hi, xs.len())];
    }
    let w = (hi - lo) / bins as f64;
    let mut counts = vec![0; bins];
    for &x in xs {
        let i = (((x - lo) / w) as usize).min(bins - 1);
        counts[i] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(i, c)| (lo + i as f64 * w, lo + (i + 1) as f64 * w, c))
        .collect()
}

fn num_rows(rows: impl IntoIterator<Item = Vec<f64>>) -> Vec<Vec<String>> {
    rows.into_iter()
        .map(|r| r.into_iter().map(|x| x.to_string()).collect())
        .collect()
}

#[derive(Deserialize)]
struct FirmExponentRow {
    g1: f64,
    g2: f64,
    g3: f64,
}

/// Write plot data for every analysis group under `plots/`. Returns the
/// files written.
pub fn emit_plot_data(out: &Path) -> Result<Vec<PathBuf>> {
    let rows = read_patches(&artifact(out, files::PATCHES)?)?;
    let analysis: AnalysisSummary = read_json(&artifact(out, files::ANALYSIS)?)?;
    let min_trades = analysis.settings.min_patch_trades;
    let mut written = Vec::new();
    for g in &analysis.groups {
        let used: Vec<DirectionalPatch> = rows
            .iter()
            .filter(|r| g.pooled || r.stock_id == g.group)
            .filter(|r| r.n_trades() >= min_trades)
            .filter_map(|r| r.to_directional())
            .collect();
        let dir = out.join(files::PLOTS_DIR).join(&g.dir);
        std::fs::create_dir_all(&dir).map_err(|e| AppError::io(&dir, e))?;
        let mut put = |name: String, header: &[&str], body: Vec<Vec<String>>| -> Result<()> {
            let p = dir.join(name);
            write_table(&p, header, &body)?;
            written.push(p);
            Ok(())
        };

        for var in Variable::ALL {
            let xs = positive_values(&used, var);
            let pts = if xs.is_empty() { Vec::new() } else { ccdf(&xs)? };
            put(
                format!("ccdf_{}.csv", var.label()),
                &["x", "p"],
                num_rows(pts.into_iter().map(|(x, p)| vec![x, p])),
            )?;
        }

        let (points, _) = log_points(&used);
        let slopes = g.allometry_bi.ok().map(|f| [f.g1, f.g2, f.g3]);
        for (i, rel) in Relation::ALL.into_iter().enumerate() {
            let xy: Vec<(f64, f64)> = points.iter().map(|p| rel.project(p)).collect();
            let label = rel.label();
            put(
                format!("scatter_{label}.csv"),
                &["log_x", "log_y"],
                num_rows(xy.iter().map(|&(x, y)| vec![x, y])),
            )?;
            let line = match slopes {
                Some(s) if !xy.is_empty() => {
                    let n = xy.len() as f64;
                    let cx = xy.iter().map(|p| p.0).sum::<f64>() / n;
                    let cy = xy.iter().map(|p| p.1).sum::<f64>() / n;
                    let lo = xy.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
                    let hi = xy.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
                    axis_line((cx, cy), s[i], lo, hi).iter().map(|&(x, y)| vec![x, y]).collect()
                }
                _ => Vec::new(),
            };
            put(format!("axis_{label}.csv"), &["log_x", "log_y"], num_rows(line))?;
        }

        let exp_path = artifact(
            &out.join(files::ANALYSIS_DIR).join(&g.dir),
            "per_firm_exponents.csv",
        )?;
        let mut rdr = csv::Reader::from_path(&exp_path).map_err(|e| AppError::io(&exp_path, e))?;
        let exps: Vec<FirmExponentRow> = rdr
            .deserialize()
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| AppError::io(&exp_path, e))?;
        for (label, pick) in [
            ("g1", (|e: &FirmExponentRow| e.g1) as fn(&FirmExponentRow) -> f64),
            ("g2", |e| e.g2),
            ("g3", |e| e.g3),
        ] {
            let xs: Vec<f64> = exps.iter().map(pick).collect();
            let hist = histogram(&xs, HIST_BINS);
            put(
                format!("hist_{label}.csv"),
                &["bin_low", "bin_high", "count"],
                hist.into_iter()
                    .map(|(lo, hi, c)| vec![lo.to_string(), hi.to_string(), c.to_string()])
                    .collect(),
            )?;
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn histogram_counts_everything() {
        let xs: Vec<f64> = (0..101).map(|i| i as f64 / 10.0).collect();
        let h = histogram(&xs, 20);
        assert_eq!(h.len(), 20);
        assert_eq!(h.iter().map(|b| b.2).sum::<usize>(), 101);
        assert_eq!(h[19].1, 10.0);
        assert_eq!(histogram(&[2.0, 2.0], 5), vec![(2.0, 2.0, 2)]);
        assert!(histogram(&[], 5).is_empty());
    }

    #[test]
    fn axis_line_through_centroid() {
        let [a, b] = axis_line((1.0, 2.0), 0.5, -1.0, 5.0);
        assert_eq!(a, (-1.0, 1.0));
        assert_eq!(b, (5.0, 4.0));
    }
}
