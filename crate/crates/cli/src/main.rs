//! Command-line runner for the spiking-network experiments. Every verb works
//! from the same config file format; stage verbs run prerequisites first
//! (resuming them from checkpoints when present) and retrain their target.

use clap::{Parser, Subcommand};
use snn_core::config::{PipelineConfig, TaskKind};
use snn_core::pipeline::{generate_audio_corpus, run_pipeline_plan, PipelinePlan, RunRecord};
use snn_core::{CoreError, Result};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "snn",
    version,
    about = "Train and evaluate burst-coded spiking networks with first-spike readout"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Config file (sectioned key = value). Omitted keys fall back to the
    /// task defaults; omitted file means all defaults.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Override the master seed from the config.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    /// Override the output directory from the config.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Reuse checkpoints from an earlier run instead of retraining.
    #[arg(long, global = true)]
    resume: bool,
}

#[derive(Subcommand, Clone, Copy, PartialEq)]
enum Command {
    /// Run every stage end to end and audit the result.
    RunPipeline,
    /// Train the ANN reference network.
    TrainTeacher,
    /// Distill the teacher into the bursting hidden stack layer by layer.
    TrainLtl,
    /// Calibrate the output layer threshold on hidden spike statistics.
    Calibrate,
    /// Train the first-spike output layer on cached hidden spikes.
    TrainTtfs,
    /// Score the trained network on the held-out split.
    Eval,
    /// Count SynOps and estimate energy against the ANN reference.
    AuditEnergy,
    /// Run the sound localization experiment with its noise sweeps.
    LocExperiment,
    /// Render the localization audio corpus to disk.
    GenAudio,
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}

fn load_config(cli: &Cli) -> Result<PipelineConfig> {
    let default_task = match cli.command {
        Command::LocExperiment | Command::GenAudio => TaskKind::SoundLoc,
        _ => TaskKind::ImageClass,
    };
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            PipelineConfig::parse(&text)?
        }
        None => PipelineConfig::default_for(default_task),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.out_dir = out.clone();
    }
    Ok(cfg)
}

fn require_task(cfg: &PipelineConfig, want: TaskKind, verb: &str) -> Result<()> {
    if cfg.task != want {
        let hint = match want {
            TaskKind::SoundLoc => "set task = sound-loc in the [run] section",
            TaskKind::ImageClass => "set task = image-class in the [run] section",
        };
        return Err(CoreError::Config(format!(
            "{verb} needs {} config; {hint}",
            match want {
                TaskKind::SoundLoc => "a sound-loc",
                TaskKind::ImageClass => "an image-class",
            }
        )));
    }
    Ok(())
}

fn summarize(rec: &RunRecord) {
    println!(
        "task {}  seed {}  config {}",
        rec.task,
        rec.seed,
        &rec.config_hash[..12]
    );
    for s in &rec.stages {
        let mark = if s.resumed { "resumed" } else { "ran" };
        let metrics: Vec<String> = s
            .metrics
            .iter()
            .map(|(k, v)| format!("{k}={v:.6}"))
            .collect();
        println!(
            "  {:<10} {mark:<8} {:>8.1}s  {}",
            s.stage,
            s.wall_clock_s,
            metrics.join(" ")
        );
    }
    println!(
        "finished in {:.1}s, artifacts in {}",
        rec.wall_clock_s, rec.out_dir
    );
}

fn run(cli: Cli) -> Result<()> {
    let cfg = load_config(&cli)?;
    match cli.command {
        Command::RunPipeline => {
            let rec = run_pipeline_plan(&cfg, &PipelinePlan::full(cli.resume))?;
            summarize(&rec);
        }
        Command::LocExperiment => {
            require_task(&cfg, TaskKind::SoundLoc, "loc-experiment")?;
            let rec = run_pipeline_plan(&cfg, &PipelinePlan::full(cli.resume))?;
            summarize(&rec);
        }
        Command::GenAudio => {
            require_task(&cfg, TaskKind::SoundLoc, "gen-audio")?;
            let dir = cli.out.clone().unwrap_or_else(|| cfg.data_dir.clone());
            let (train, test) = generate_audio_corpus(&cfg, &dir)?;
            println!(
                "wrote {train} train and {test} test frames under {}",
                dir.display()
            );
        }
        Command::TrainTeacher
        | Command::TrainLtl
        | Command::Calibrate
        | Command::TrainTtfs
        | Command::Eval
        | Command::AuditEnergy => {
            let stage = match cli.command {
                Command::TrainTeacher => "teacher",
                Command::TrainLtl => "ltl",
                Command::Calibrate => "calibrate",
                Command::TrainTtfs => "ttfs",
                Command::Eval => "eval",
                Command::AuditEnergy => "energy",
                _ => unreachable!(),
            };
            require_task(&cfg, TaskKind::ImageClass, stage)?;
            let rec = run_pipeline_plan(&cfg, &PipelinePlan::through(stage))?;
            summarize(&rec);
        }
    }
    Ok(())
}
