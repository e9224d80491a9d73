//! Command-line entry points: `synth-data`, `train`, `generate`, `evaluate`.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use motiongan_core::dataset::{augment_mirror, load_corpus, write_synthetic_corpus, LoadOptions, SyntheticManifest};
use motiongan_core::metrics::{evaluate_directories, write_report};
use tch::Device;

use crate::config::TrainConfig;
use crate::error::{Error, Result};
use crate::generate::{generate_to_directory, resolve_estimator, GenerationMode};
use crate::losses::LossReport;
use crate::trainer::Trainer;

#[derive(Debug, Parser)]
#[command(name = "motiongan", version, about = "Landmark-driven face video synthesis")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Render a synthetic face-video corpus with exact landmarks.
    SynthData {
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        identities: usize,
        #[arg(long)]
        frames: usize,
        #[arg(long)]
        size: usize,
        #[arg(long)]
        seed: u64,
    },
    /// Train on a corpus of clip directories (mirrored copies are added).
    Train {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        resume: Option<PathBuf>,
    },
    /// Generate one frame per target landmark file.
    Generate {
        #[arg(long)]
        ckpt: PathBuf,
        #[arg(long)]
        source: PathBuf,
        #[arg(long = "source-lms")]
        source_lms: PathBuf,
        #[arg(long = "target-lms")]
        target_lms: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score predicted frames against ground truth.
    Evaluate {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        gt: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Outcome of one command: exit code 0 (success), 1 (user error) or 2
/// (internal error), and a one-line summary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommandResult {
    pub code: i32,
    pub summary: String,
}

impl CommandResult {
    fn ok(summary: String) -> Self {
        Self { code: 0, summary }
    }

    fn from_error(e: &Error) -> Self {
        Self {
            code: if e.is_user_error() { 1 } else { 2 },
            summary: format!("error: {e}"),
        }
    }
}

pub fn run_command(cmd: Command) -> Result<String> {
    let device = Device::Cpu;
    match cmd {
        Command::SynthData {
            out,
            identities,
            frames,
            size,
            seed,
        } => {
            if identities == 0 || frames == 0 || size == 0 {
                return Err(Error::Argument("identities, frames and size must be positive".into()));
            }
            let manifest = SyntheticManifest::random(seed, identities, frames, size);
            let clips = write_synthetic_corpus(&manifest, &out)?;
            Ok(format!(
                "wrote {} clips of {frames} frames at {size}x{size} to {}",
                clips.len(),
                out.display()
            ))
        }
        Command::Train {
            config,
            data,
            out,
            resume,
        } => {
            let cfg = TrainConfig::load(&config)?;
            let mut trainer = match resume {
                Some(ckpt) => {
                    let mut t = Trainer::from_checkpoint(&ckpt, device)?;
                    t.config.max_steps = cfg.max_steps;
                    t.config.checkpoint_every = cfg.checkpoint_every;
                    t
                }
                None => Trainer::new(&cfg, device)?,
            };
            let corpus = augment_mirror(&load_corpus(&data, LoadOptions::new(trainer.config.image_size))?);
            let last = trainer.fit(&corpus, &out)?;
            let means = trainer.running_means();
            let summary: Vec<String> = LossReport::FIELDS
                .iter()
                .zip(means)
                .map(|(n, v)| format!("{n}={v:.5}"))
                .collect();
            Ok(format!(
                "step {} checkpoint {} mean losses {}",
                trainer.step(),
                last.display(),
                summary.join(" ")
            ))
        }
        Command::Generate {
            ckpt,
            source,
            source_lms,
            target_lms,
            out,
        } => {
            let m = generate_to_directory(&ckpt, &source, &source_lms, &target_lms, &out, GenerationMode::Continuous, device)?;
            Ok(format!("generated {} frames in {}", m.frames.len(), out.display()))
        }
        Command::Evaluate { pred, gt, out } => {
            if !gt.is_dir() {
                return Err(Error::Argument(format!("ground-truth directory {} does not exist", gt.display())));
            }
            let mut estimator = resolve_estimator(&pred, device)?;
            let report = evaluate_directories(&pred, &gt, estimator.as_mut())?;
            write_report(&report, &out)?;
            Ok(report.summary_line())
        }
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> CommandResult
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            return CommandResult {
                code,
                summary: e.render().to_string(),
            };
        }
    };
    match run_command(cli.command) {
        Ok(summary) => CommandResult::ok(summary),
        Err(e) => CommandResult::from_error(&e),
    }
}
