//! Command line.

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use patchscale_core::lognorm::CriticalValues;
use patchscale_core::market::YearCoverage;
use patchscale_core::segment::{SignificanceMode, TStatistic};

use crate::config::{FilterMode, Input, RunConfig};
use crate::error::{AppError, Result};
use crate::pipeline::{self, run_stage};

#[derive(Debug, Parser)]
#[command(name = "patchscale", version, about = "Detect directional trading patches and measure their scaling laws")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic tape with ground truth.
    Synth {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        source: SynthSource,
    },
    /// Read a tape and apply the firm activity filter.
    Ingest {
        #[command(flatten)]
        common: Common,
        /// Trade-CSV tape; defaults to the tape written by `synth`.
        #[arg(long)]
        input: Option<PathBuf>,
        #[command(flatten)]
        activity: ActivityArgs,
    },
    /// Segment every (firm, stock) series and export patches.
    Segment {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        segmentation: SegmentArgs,
    },
    /// Tail, allometry and lognormality analyses per stock and pooled.
    Analyze {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        analysis: AnalysisArgs,
    },
    /// Assemble the report and plot data from the stage artifacts.
    Report {
        #[command(flatten)]
        common: Common,
    },
    /// Run every stage.
    All {
        #[command(flatten)]
        common: Common,
        /// Trade-CSV tape.
        #[arg(long, conflicts_with_all = ["synth", "synth_config"])]
        input: Option<PathBuf>,
        /// Generate the input from a named preset.
        #[arg(long, value_name = "PRESET", conflicts_with = "synth_config")]
        synth: Option<String>,
        /// Generate the input from a generator config file.
        #[arg(long, value_name = "FILE")]
        synth_config: Option<PathBuf>,
        #[command(flatten)]
        activity: ActivityArgs,
        #[command(flatten)]
        segmentation: SegmentArgs,
        #[command(flatten)]
        analysis: AnalysisArgs,
    },
}

#[derive(Debug, Args)]
pub struct Common {
    /// Run configuration (JSON); flags override it.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[arg(long, value_name = "DIR")]
    pub output_dir: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SynthSource {
    /// Named generator preset.
    #[arg(long, alias = "synth", conflicts_with = "synth_config")]
    pub preset: Option<String>,
    #[arg(long, value_name = "FILE")]
    pub synth_config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Coverage {
    Strict,
    Prorated,
}

#[derive(Debug, Args)]
pub struct ActivityArgs {
    /// `auto` filters real tapes and skips synthetic ones.
    #[arg(long, value_enum)]
    pub activity_filter: Option<FilterMode>,
    #[arg(long)]
    pub min_trades_per_year: Option<u64>,
    #[arg(long)]
    pub min_active_days: Option<u64>,
    /// How partly covered years are judged.
    #[arg(long, value_enum)]
    pub year_coverage: Option<Coverage>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SigMode {
    ClosedForm,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum TStat {
    Pooled,
    Welch,
}

#[derive(Debug, Args)]
pub struct SegmentArgs {
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long, value_enum)]
    pub significance_mode: Option<SigMode>,
    #[arg(long, value_enum)]
    pub t_statistic: Option<TStat>,
    #[arg(long)]
    pub mc_trials: Option<usize>,
    #[arg(long)]
    pub theta: Option<f64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Critical {
    SmallSample,
    Asymptotic,
}

#[derive(Debug, Args)]
pub struct AnalysisArgs {
    #[arg(long)]
    pub min_patch_trades: Option<usize>,
    /// auto, fraction:<f> or fixed:<k>.
    #[arg(long)]
    pub k: Option<String>,
    #[arg(long)]
    pub bootstrap_samples: Option<usize>,
    #[arg(long)]
    pub min_firm_patches: Option<usize>,
    #[arg(long, value_enum)]
    pub critical_values: Option<Critical>,
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

impl Common {
    fn load(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        set(&mut cfg.output_dir, self.output_dir.clone());
        set(&mut cfg.seed, self.seed);
        set(&mut cfg.jobs, self.jobs);
        Ok(cfg)
    }
}

impl ActivityArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        let a = &mut cfg.activity;
        set(&mut a.filter, self.activity_filter);
        set(&mut a.min_trades_per_year, self.min_trades_per_year);
        set(&mut a.min_active_days, self.min_active_days);
        set(
            &mut a.coverage,
            self.year_coverage.map(|c| match c {
                Coverage::Strict => YearCoverage::Strict,
                Coverage::Prorated => YearCoverage::Prorated,
            }),
        );
    }
}

impl SegmentArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        let s = &mut cfg.segmentation;
        set(&mut s.threshold, self.threshold);
        set(
            &mut s.significance_mode,
            self.significance_mode.map(|m| match m {
                SigMode::ClosedForm => SignificanceMode::ClosedForm,
                SigMode::MonteCarlo => SignificanceMode::MonteCarlo,
            }),
        );
        set(
            &mut s.t_statistic,
            self.t_statistic.map(|t| match t {
                TStat::Pooled => TStatistic::Pooled,
                TStat::Welch => TStatistic::Welch,
            }),
        );
        set(&mut s.mc_trials, self.mc_trials);
        set(&mut s.theta, self.theta);
    }
}

impl AnalysisArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        let a = &mut cfg.analysis;
        set(&mut a.min_patch_trades, self.min_patch_trades);
        set(&mut a.k, self.k.clone());
        set(&mut a.bootstrap_samples, self.bootstrap_samples);
        set(&mut a.min_firm_patches, self.min_firm_patches);
        set(
            &mut a.critical_values,
            self.critical_values.map(|c| match c {
                Critical::SmallSample => CriticalValues::SmallSample,
                Critical::Asymptotic => CriticalValues::Asymptotic,
            }),
        );
    }
}

/// Run one parsed command.
pub fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Synth { common, source } => {
            let mut cfg = common.load()?;
            if let Some(p) = source.preset {
                cfg.input = Some(Input::SynthPreset(p));
            }
            if let Some(p) = source.synth_config {
                cfg.input = Some(Input::SynthConfig(p));
            }
            if !cfg.input.as_ref().is_some_and(Input::is_synthetic) {
                return Err(AppError::Usage("synth needs --preset or --synth-config".into()));
            }
            cfg.validate()?;
            let s = run_stage(&cfg.output_dir, "synth", || pipeline::synth_stage(&cfg))?;
            eprintln!("synth: {} trades, {} packages, {} firms", s.trades, s.packages, s.firms);
        }
        Command::Ingest { common, input, activity } => {
            let mut cfg = common.load()?;
            if let Some(p) = input {
                cfg.input = Some(Input::Tape(p));
            }
            activity.apply(&mut cfg);
            cfg.validate()?;
            let s = run_stage(&cfg.output_dir, "ingest", || pipeline::ingest_stage(&cfg))?;
            eprintln!("ingest: {} trades, {} firms, {} trades kept", s.trades, s.firms, s.trades_kept);
        }
        Command::Segment { common, segmentation } => {
            let mut cfg = common.load()?;
            segmentation.apply(&mut cfg);
            cfg.validate()?;
            let s = run_stage(&cfg.output_dir, "segment", || pipeline::segment_stage(&cfg))?;
            eprintln!(
                "segment: {} series, {} patches ({} buy, {} sell)",
                s.series, s.counts.patches, s.counts.buy, s.counts.sell
            );
        }
        Command::Analyze { common, analysis } => {
            let mut cfg = common.load()?;
            analysis.apply(&mut cfg);
            cfg.validate()?;
            let s = run_stage(&cfg.output_dir, "analyze", || pipeline::analyze_stage(&cfg))?;
            eprintln!("analyze: {} groups", s.groups.len());
        }
        Command::Report { common } => {
            let cfg = common.load()?;
            let r = run_stage(&cfg.output_dir, "report", || pipeline::report_stage(&cfg.output_dir))?;
            eprintln!("report: {} patches used", r.counts.used);
        }
        Command::All {
            common,
            input,
            synth,
            synth_config,
            activity,
            segmentation,
            analysis,
        } => {
            let mut cfg = common.load()?;
            if let Some(p) = input {
                cfg.input = Some(Input::Tape(p));
            }
            if let Some(p) = synth {
                cfg.input = Some(Input::SynthPreset(p));
            }
            if let Some(p) = synth_config {
                cfg.input = Some(Input::SynthConfig(p));
            }
            if cfg.input.is_none() {
                return Err(AppError::Usage("all needs --input, --synth or --synth-config".into()));
            }
            activity.apply(&mut cfg);
            segmentation.apply(&mut cfg);
            analysis.apply(&mut cfg);
            let r = pipeline::run_pipeline(&cfg)?;
            eprintln!(
                "done: {} patches, {} used; report in {}",
                r.counts.patches,
                r.counts.used,
                cfg.output_dir.join(pipeline::files::REPORT).display()
            );
        }
    }
    Ok(())
}

/// Parse `args` and run. Returns the process exit code.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn main() -> ExitCode {
    ExitCode::from(run(std::env::args_os()))
}
