//! Run configuration, loaded from JSON and overridden by flags.

use std::path::{Path, PathBuf};

use patchscale_core::allometry::{DEFAULT_BOOTSTRAP, DEFAULT_MIN_FIRM_PATCHES, MIN_BOOTSTRAP};
use patchscale_core::lognorm::CriticalValues;
use patchscale_core::market::{ActivityThresholds, YearCoverage};
use patchscale_core::patch::{check_theta, DEFAULT_MIN_TRADES, DEFAULT_THETA};
use patchscale_core::segment::{SignificanceMode, TStatistic};
use patchscale_core::synth::SynthConfig;
use patchscale_core::tail::KPolicy;
use serde::{Deserialize, Serialize};

use crate::error::{AppError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Input {
    /// A trade-CSV tape.
    Tape(PathBuf),
    /// A named generator preset.
    SynthPreset(String),
    /// A generator config file.
    SynthConfig(PathBuf),
}

impl Input {
    pub fn is_synthetic(&self) -> bool {
        !matches!(self, Input::Tape(_))
    }

    /// Generator config for synthetic inputs, with the run seed applied.
    pub fn synth_config(&self, seed: u64) -> Result<Option<SynthConfig>> {
        let mut cfg = match self {
            Input::Tape(_) => return Ok(None),
            Input::SynthPreset(name) => SynthConfig::preset(name).ok_or_else(|| {
                AppError::Usage(format!(
                    "unknown preset '{name}' (known: {})",
                    patchscale_core::synth::PRESETS.join(", ")
                ))
            })?,
            Input::SynthConfig(path) => read_json(path)?,
        };
        cfg.seed = seed;
        cfg.validate()?;
        Ok(Some(cfg))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum FilterMode {
    /// Off for synthetic tapes, on otherwise.
    #[default]
    Auto,
    On,
    Off,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ActivitySettings {
    pub filter: FilterMode,
    pub min_trades_per_year: u64,
    pub min_active_days: u64,
    pub coverage: YearCoverage,
}

impl Default for ActivitySettings {
    fn default() -> Self {
        let t = ActivityThresholds::default();
        ActivitySettings {
            filter: FilterMode::Auto,
            min_trades_per_year: t.min_trades_per_year,
            min_active_days: t.min_active_days,
            coverage: t.coverage,
        }
    }
}

impl ActivitySettings {
    pub fn thresholds(&self) -> ActivityThresholds {
        ActivityThresholds {
            min_trades_per_year: self.min_trades_per_year,
            min_active_days: self.min_active_days,
            coverage: self.coverage,
        }
    }

    pub fn applies(&self, synthetic: bool) -> bool {
        match self.filter {
            FilterMode::Auto => !synthetic,
            FilterMode::On => true,
            FilterMode::Off => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SegmentationSettings {
    pub threshold: f64,
    pub significance_mode: SignificanceMode,
    pub t_statistic: TStatistic,
    pub mc_trials: usize,
    pub theta: f64,
}

impl Default for SegmentationSettings {
    fn default() -> Self {
        SegmentationSettings {
            threshold: 0.99,
            significance_mode: SignificanceMode::ClosedForm,
            t_statistic: TStatistic::Pooled,
            mc_trials: 1000,
            theta: DEFAULT_THETA,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisSettings {
    pub min_patch_trades: usize,
    /// `auto`, `fraction:<f>` or `fixed:<k>`.
    pub k: String,
    pub bootstrap_samples: usize,
    pub min_firm_patches: usize,
    pub critical_values: CriticalValues,
}

impl Default for AnalysisSettings {
    fn default() -> Self {
        AnalysisSettings {
            min_patch_trades: DEFAULT_MIN_TRADES,
            k: "auto".into(),
            bootstrap_samples: DEFAULT_BOOTSTRAP,
            min_firm_patches: DEFAULT_MIN_FIRM_PATCHES,
            critical_values: CriticalValues::SmallSample,
        }
    }
}

impl AnalysisSettings {
    pub fn k_policy(&self) -> Result<KPolicy> {
        parse_k(&self.k)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub input: Option<Input>,
    pub output_dir: PathBuf,
    pub seed: u64,
    /// Worker threads; 0 uses every core.
    pub jobs: usize,
    pub activity: ActivitySettings,
    pub segmentation: SegmentationSettings,
    pub analysis: AnalysisSettings,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            input: None,
            output_dir: PathBuf::from("out"),
            seed: 1,
            jobs: 0,
            activity: ActivitySettings::default(),
            segmentation: SegmentationSettings::default(),
            analysis: AnalysisSettings::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        read_json(path).map_err(|e| match e {
            AppError::Data(m) => AppError::Usage(m),
            e => e,
        })
    }

    /// Check ranges, and that referenced input files exist.
    pub fn validate(&self) -> Result<()> {
        let usage = |m: String| Err(AppError::Usage(m));
        let s = &self.segmentation;
        if !(s.threshold > 0.0 && s.threshold < 1.0) {
            return usage(format!("threshold must lie in (0, 1), got {}", s.threshold));
        }
        check_theta(s.theta)?;
        if s.significance_mode == SignificanceMode::MonteCarlo && s.mc_trials < 100 {
            return usage(format!("mc-trials must be at least 100, got {}", s.mc_trials));
        }
        if s.t_statistic == TStatistic::Welch && s.significance_mode == SignificanceMode::ClosedForm {
            return usage("the welch statistic requires --significance-mode monte-carlo".into());
        }
        let a = &self.analysis;
        if a.min_patch_trades < 2 {
            return usage("min-patch-trades must be at least 2".into());
        }
        if a.bootstrap_samples < MIN_BOOTSTRAP {
            return usage(format!("bootstrap-samples must be at least {MIN_BOOTSTRAP}"));
        }
        if a.min_firm_patches < 3 {
            return usage("min-firm-patches must be at least 3".into());
        }
        a.k_policy()?;
        match &self.input {
            Some(Input::Tape(p)) | Some(Input::SynthConfig(p)) if !p.is_file() => {
                usage(format!("input file not found: {}", p.display()))
            }
            Some(input) => input.synth_config(self.seed).map(|_| ()),
            None => Ok(()),
        }
    }
}

pub fn parse_k(s: &str) -> Result<KPolicy> {
    let bad = || AppError::Usage(format!("--k expects auto, fraction:<f> or fixed:<k>, got '{s}'"));
    let policy = match s.split_once(':') {
        None if s == "auto" => KPolicy::Auto,
        Some(("fraction", f)) => {
            let f: f64 = f.parse().map_err(|_| bad())?;
            if !(f > 0.0 && f < 1.0) {
                return Err(bad());
            }
            KPolicy::Fraction(f)
        }
        Some(("fixed", k)) => {
            let k: usize = k.parse().map_err(|_| bad())?;
            if k == 0 {
                return Err(bad());
            }
            KPolicy::Fixed(k)
        }
        _ => return Err(bad()),
    };
    Ok(policy)
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| AppError::io(path, e))
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| AppError::io(path, e))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| AppError::io(path, e))
}
