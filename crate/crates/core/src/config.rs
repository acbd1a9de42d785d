//! Experiment configuration: a flat sectioned key=value text format with
//! hard errors on unknown keys, per-task defaults for everything omitted,
//! and a canonical resolved echo so runs never depend on silent defaults.

use crate::audio::experiment::LocalizationConfig;
use crate::audio::synth::NoiseKind;
use crate::coding::{CodingAssignment, HiddenScheme, InputScheme, OutputScheme};
use crate::energy::ArithMode;
use crate::error::{CoreError, Result};
use crate::ltl::LTLConfig;
use crate::optim::{LrSchedule, OptimKind};
use crate::teacher::TeacherConfig;
use crate::ttfs::TTFSTrainConfig;
use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::PathBuf;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TaskKind {
    ImageClass,
    SoundLoc,
}

/// Fully resolved pipeline configuration. Every field has a value after
/// parsing; the echo renders all of them back out.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub task: TaskKind,
    pub seed: u64,
    pub data_dir: PathBuf,
    pub out_dir: PathBuf,
    pub hidden_dims: Vec<usize>,
    pub t_window: usize,
    pub gamma: u32,
    pub v_th: f64,
    pub r: f64,
    pub tau_m: f64,
    pub tau_s: f64,
    pub coding: CodingAssignment,
    pub teacher: TeacherConfig,
    pub ltl: LTLConfig,
    pub ttfs: TTFSTrainConfig,
    /// Fraction of the training set held out for theta refreshes.
    pub val_fraction: f64,
    pub energy_mode: ArithMode,
    /// Count first-layer direct-coded currents as analog MACs in audits.
    pub first_layer_analog: bool,
    pub audio: AudioSection,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AudioSection {
    pub classes: usize,
    pub train_per_class: usize,
    pub test_per_class: usize,
    pub sample_rate: f64,
    pub frame_len: usize,
    pub side_m: f64,
    pub noise_kind: NoiseKind,
    pub snr_grid_db: Vec<f64>,
    pub deletion_grid: Vec<f64>,
    pub noise_seeds: u64,
    pub eta_deg: f64,
}

/// Section/key schema; parsing rejects anything not listed here.
const SCHEMA: &[(&str, &[&str])] = &[
    ("run", &["task", "seed", "data_dir", "out_dir"]),
    (
        "network",
        &[
            "hidden_dims",
            "t_window",
            "gamma",
            "v_th",
            "r",
            "tau_m",
            "tau_s",
            "input_scheme",
            "hidden_scheme",
            "output_scheme",
        ],
    ),
    (
        "teacher",
        &[
            "epochs",
            "batch_size",
            "lr",
            "optimizer",
            "momentum",
            "weight_decay",
            "schedule",
            "step_every",
            "step_gamma",
        ],
    ),
    (
        "ltl",
        &[
            "epochs",
            "batch_size",
            "lr",
            "lr_halve_every",
            "clip_targets",
            "scale_delta_by_r",
            "monitor_samples",
        ],
    ),
    (
        "ttfs",
        &[
            "alpha",
            "beta",
            "epochs",
            "batch_size",
            "lr",
            "momentum",
            "lr_decay_every",
            "lr_decay_gamma",
            "val_fraction",
        ],
    ),
    ("energy", &["mode", "first_layer_analog"]),
    (
        "audio",
        &[
            "classes",
            "train_per_class",
            "test_per_class",
            "sample_rate",
            "frame_len",
            "side_m",
            "noise",
            "snr_grid",
            "deletion_grid",
            "noise_seeds",
            "eta",
        ],
    ),
];

fn schema_has(section: &str, key: &str) -> bool {
    SCHEMA
        .iter()
        .any(|(s, keys)| *s == section && keys.contains(&key))
}

/// Raw parse: line-oriented, `[section]` headers, `key = value`, `#` comments.
fn parse_entries(text: &str) -> Result<HashMap<(String, String), String>> {
    let mut out = HashMap::new();
    let mut section = String::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            section = name.trim().to_string();
            if !SCHEMA.iter().any(|(s, _)| *s == section) {
                return Err(CoreError::Config(format!(
                    "line {}: unknown section [{section}]",
                    lineno + 1
                )));
            }
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CoreError::Config(format!(
                "line {}: expected key = value, got {line:?}",
                lineno + 1
            )));
        };
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if section.is_empty() {
            return Err(CoreError::Config(format!(
                "line {}: key {key:?} before any [section] header",
                lineno + 1
            )));
        }
        if !schema_has(&section, &key) {
            return Err(CoreError::Config(format!(
                "line {}: unknown key {section}.{key}",
                lineno + 1
            )));
        }
        if out
            .insert((section.clone(), key.clone()), value)
            .is_some()
        {
            return Err(CoreError::Config(format!(
                "line {}: duplicate key {section}.{key}",
                lineno + 1
            )));
        }
    }
    Ok(out)
}

struct Entries(HashMap<(String, String), String>);

impl Entries {
    fn raw(&self, section: &str, key: &str) -> Option<&str> {
        self.0
            .get(&(section.to_string(), key.to_string()))
            .map(|s| s.as_str())
    }

    fn parse<T: std::str::FromStr>(&self, section: &str, key: &str, default: T) -> Result<T> {
        match self.raw(section, key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| {
                CoreError::Config(format!("{section}.{key}: cannot parse {v:?}"))
            }),
        }
    }

    fn list<T: std::str::FromStr>(&self, section: &str, key: &str, default: Vec<T>) -> Result<Vec<T>> {
        match self.raw(section, key) {
            None => Ok(default),
            Some(v) => v
                .split(',')
                .map(|p| {
                    p.trim().parse().map_err(|_| {
                        CoreError::Config(format!("{section}.{key}: cannot parse element {p:?}"))
                    })
                })
                .collect(),
        }
    }

    fn choice<T: Copy>(
        &self,
        section: &str,
        key: &str,
        options: &[(&str, T)],
        default: T,
    ) -> Result<T> {
        match self.raw(section, key) {
            None => Ok(default),
            Some(v) => options
                .iter()
                .find(|(name, _)| *name == v)
                .map(|(_, val)| *val)
                .ok_or_else(|| {
                    let names: Vec<&str> = options.iter().map(|(n, _)| *n).collect();
                    CoreError::Config(format!(
                        "{section}.{key}: {v:?} is not one of {}",
                        names.join("|")
                    ))
                }),
        }
    }
}

impl PipelineConfig {
    /// Task-appropriate defaults for every field. The shared neuron-model
    /// values (v_th 1, gamma 5, r 1, tau_m 2, tau_s 0.5) are identical
    /// across tasks; stage hyperparameters differ.
    pub fn default_for(task: TaskKind) -> PipelineConfig {
        let audio = LocalizationConfig::default();
        let common_coding = CodingAssignment {
            input: if task == TaskKind::SoundLoc {
                InputScheme::Phase
            } else {
                InputScheme::Direct
            },
            hidden: HiddenScheme::Burst,
            output: OutputScheme::Ttfs,
        };
        match task {
            TaskKind::ImageClass => PipelineConfig {
                task,
                seed: 1,
                data_dir: PathBuf::from("data/mnist"),
                out_dir: PathBuf::from("runs/image"),
                hidden_dims: vec![300, 300],
                t_window: 8,
                gamma: 5,
                v_th: 1.0,
                r: 1.0,
                tau_m: 2.0,
                tau_s: 0.5,
                coding: common_coding,
                teacher: TeacherConfig::default(),
                ltl: LTLConfig {
                    t_window: 8,
                    ..LTLConfig::default()
                },
                ttfs: TTFSTrainConfig::default(),
                val_fraction: 0.1,
                energy_mode: ArithMode::Float32,
                first_layer_analog: false,
                audio: AudioSection::from(&audio),
            },
            TaskKind::SoundLoc => PipelineConfig {
                task,
                seed: 1,
                data_dir: PathBuf::from("data/audio"),
                out_dir: PathBuf::from("runs/audio"),
                hidden_dims: audio.hidden_dims.clone(),
                t_window: audio.t_window,
                gamma: audio.gamma,
                v_th: audio.v_th,
                r: audio.ltl.r,
                tau_m: 2.0,
                tau_s: 0.5,
                coding: common_coding,
                teacher: audio.teacher.clone(),
                ltl: audio.ltl.clone(),
                ttfs: audio.ttfs.clone(),
                val_fraction: audio.val_fraction,
                energy_mode: ArithMode::Float32,
                first_layer_analog: false,
                audio: AudioSection::from(&audio),
            },
        }
    }

    pub fn parse(text: &str) -> Result<PipelineConfig> {
        let entries = Entries(parse_entries(text)?);
        let task = entries.choice(
            "run",
            "task",
            &[
                ("image-class", TaskKind::ImageClass),
                ("sound-loc", TaskKind::SoundLoc),
            ],
            TaskKind::ImageClass,
        )?;
        let mut cfg = PipelineConfig::default_for(task);

        cfg.seed = entries.parse("run", "seed", cfg.seed)?;
        if let Some(v) = entries.raw("run", "data_dir") {
            cfg.data_dir = PathBuf::from(v);
        }
        if let Some(v) = entries.raw("run", "out_dir") {
            cfg.out_dir = PathBuf::from(v);
        }

        cfg.hidden_dims = entries.list("network", "hidden_dims", cfg.hidden_dims)?;
        cfg.t_window = entries.parse("network", "t_window", cfg.t_window)?;
        cfg.gamma = entries.parse("network", "gamma", cfg.gamma)?;
        cfg.v_th = entries.parse("network", "v_th", cfg.v_th)?;
        cfg.r = entries.parse("network", "r", cfg.r)?;
        cfg.tau_m = entries.parse("network", "tau_m", cfg.tau_m)?;
        cfg.tau_s = entries.parse("network", "tau_s", cfg.tau_s)?;
        cfg.coding.input = entries.choice(
            "network",
            "input_scheme",
            &[
                ("direct", InputScheme::Direct),
                ("phase", InputScheme::Phase),
            ],
            cfg.coding.input,
        )?;
        cfg.coding.hidden = entries.choice(
            "network",
            "hidden_scheme",
            &[("burst", HiddenScheme::Burst), ("rate", HiddenScheme::Rate)],
            cfg.coding.hidden,
        )?;
        cfg.coding.output = entries.choice(
            "network",
            "output_scheme",
            &[("ttfs", OutputScheme::Ttfs), ("direct", OutputScheme::Direct)],
            cfg.coding.output,
        )?;

        cfg.teacher.epochs = entries.parse("teacher", "epochs", cfg.teacher.epochs)?;
        cfg.teacher.batch_size = entries.parse("teacher", "batch_size", cfg.teacher.batch_size)?;
        cfg.teacher.lr = entries.parse("teacher", "lr", cfg.teacher.lr)?;
        let momentum = entries.parse("teacher", "momentum", 0.9)?;
        cfg.teacher.optimizer = entries.choice(
            "teacher",
            "optimizer",
            &[("sgd", OptimKind::sgd(momentum)), ("adam", OptimKind::adam())],
            cfg.teacher.optimizer,
        )?;
        if let OptimKind::SgdMomentum { momentum: m } = &mut cfg.teacher.optimizer {
            *m = momentum;
        }
        cfg.teacher.weight_decay =
            entries.parse("teacher", "weight_decay", cfg.teacher.weight_decay)?;
        let step_every = entries.parse("teacher", "step_every", 10usize)?;
        let step_gamma = entries.parse("teacher", "step_gamma", 0.5f64)?;
        cfg.teacher.schedule = entries.choice(
            "teacher",
            "schedule",
            &[
                ("constant", LrSchedule::Constant),
                (
                    "cosine",
                    LrSchedule::Cosine {
                        total: cfg.teacher.epochs,
                    },
                ),
                (
                    "step",
                    LrSchedule::StepDecay {
                        every: step_every,
                        gamma: step_gamma,
                    },
                ),
            ],
            match cfg.teacher.schedule {
                // keep the default family, but track a possibly overridden
                // epoch count
                LrSchedule::Cosine { .. } => LrSchedule::Cosine {
                    total: cfg.teacher.epochs,
                },
                other => other,
            },
        )?;

        cfg.ltl.t_window = cfg.t_window;
        cfg.ltl.r = cfg.r;
        cfg.ltl.epochs = entries.parse("ltl", "epochs", cfg.ltl.epochs)?;
        cfg.ltl.batch_size = entries.parse("ltl", "batch_size", cfg.ltl.batch_size)?;
        cfg.ltl.lr = entries.parse("ltl", "lr", cfg.ltl.lr)?;
        cfg.ltl.lr_halve_every = entries.parse("ltl", "lr_halve_every", cfg.ltl.lr_halve_every)?;
        cfg.ltl.clip_targets = entries.parse("ltl", "clip_targets", cfg.ltl.clip_targets)?;
        cfg.ltl.scale_delta_by_r =
            entries.parse("ltl", "scale_delta_by_r", cfg.ltl.scale_delta_by_r)?;
        cfg.ltl.monitor_samples =
            entries.parse("ltl", "monitor_samples", cfg.ltl.monitor_samples)?;

        cfg.ttfs.alpha = entries.parse("ttfs", "alpha", cfg.ttfs.alpha)?;
        cfg.ttfs.beta = entries.parse("ttfs", "beta", cfg.ttfs.beta)?;
        cfg.ttfs.epochs = entries.parse("ttfs", "epochs", cfg.ttfs.epochs)?;
        cfg.ttfs.batch_size = entries.parse("ttfs", "batch_size", cfg.ttfs.batch_size)?;
        cfg.ttfs.lr = entries.parse("ttfs", "lr", cfg.ttfs.lr)?;
        cfg.ttfs.momentum = entries.parse("ttfs", "momentum", cfg.ttfs.momentum)?;
        cfg.ttfs.lr_decay_every =
            entries.parse("ttfs", "lr_decay_every", cfg.ttfs.lr_decay_every)?;
        cfg.ttfs.lr_decay_gamma =
            entries.parse("ttfs", "lr_decay_gamma", cfg.ttfs.lr_decay_gamma)?;
        cfg.val_fraction = entries.parse("ttfs", "val_fraction", cfg.val_fraction)?;

        cfg.energy_mode = entries.choice(
            "energy",
            "mode",
            &[("float32", ArithMode::Float32), ("int32", ArithMode::Int32)],
            cfg.energy_mode,
        )?;
        cfg.first_layer_analog =
            entries.parse("energy", "first_layer_analog", cfg.first_layer_analog)?;

        cfg.audio.classes = entries.parse("audio", "classes", cfg.audio.classes)?;
        cfg.audio.train_per_class =
            entries.parse("audio", "train_per_class", cfg.audio.train_per_class)?;
        cfg.audio.test_per_class =
            entries.parse("audio", "test_per_class", cfg.audio.test_per_class)?;
        cfg.audio.sample_rate = entries.parse("audio", "sample_rate", cfg.audio.sample_rate)?;
        cfg.audio.frame_len = entries.parse("audio", "frame_len", cfg.audio.frame_len)?;
        cfg.audio.side_m = entries.parse("audio", "side_m", cfg.audio.side_m)?;
        cfg.audio.noise_kind = entries.choice(
            "audio",
            "noise",
            &[("babble", NoiseKind::Babble), ("factory", NoiseKind::Factory)],
            cfg.audio.noise_kind,
        )?;
        cfg.audio.snr_grid_db = entries.list("audio", "snr_grid", cfg.audio.snr_grid_db)?;
        cfg.audio.deletion_grid =
            entries.list("audio", "deletion_grid", cfg.audio.deletion_grid)?;
        cfg.audio.noise_seeds = entries.parse("audio", "noise_seeds", cfg.audio.noise_seeds)?;
        cfg.audio.eta_deg = entries.parse("audio", "eta", cfg.audio.eta_deg)?;

        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.hidden_dims.is_empty() || self.hidden_dims.iter().any(|&d| d == 0) {
            return Err(CoreError::Config("hidden_dims must be nonzero".into()));
        }
        if self.t_window == 0 || self.gamma == 0 {
            return Err(CoreError::Config("t_window and gamma must be >= 1".into()));
        }
        if !(self.v_th > 0.0 && self.r > 0.0) {
            return Err(CoreError::Config("v_th and r must be positive".into()));
        }
        if !(self.tau_m > self.tau_s && self.tau_s > 0.0) {
            return Err(CoreError::Config(format!(
                "need tau_m > tau_s > 0, got {} and {}",
                self.tau_m, self.tau_s
            )));
        }
        if !(0.0..0.5).contains(&self.val_fraction) || self.val_fraction <= 0.0 {
            return Err(CoreError::Config(format!(
                "val_fraction must lie in (0, 0.5), got {}",
                self.val_fraction
            )));
        }
        self.coding.validate(self.task == TaskKind::SoundLoc)?;
        Ok(())
    }

    /// Effective burst bound under the coding assignment (rate forces 1).
    pub fn effective_gamma(&self) -> u32 {
        self.coding.effective_gamma(self.gamma)
    }

    /// Assemble the localization experiment config from the resolved fields.
    pub fn localization(&self) -> LocalizationConfig {
        LocalizationConfig {
            classes: self.audio.classes,
            train_per_class: self.audio.train_per_class,
            test_per_class: self.audio.test_per_class,
            sample_rate: self.audio.sample_rate,
            frame_len: self.audio.frame_len,
            side_m: self.audio.side_m,
            t_window: self.t_window,
            gamma: self.effective_gamma(),
            v_th: self.v_th,
            hidden_dims: self.hidden_dims.clone(),
            teacher: self.teacher.clone(),
            ltl: LTLConfig {
                t_window: self.t_window,
                r: self.r,
                ..self.ltl.clone()
            },
            ttfs: self.ttfs.clone(),
            val_fraction: self.val_fraction,
            noise_kind: self.audio.noise_kind,
            snr_grid_db: self.audio.snr_grid_db.clone(),
            deletion_grid: self.audio.deletion_grid.clone(),
            noise_seeds: self.audio.noise_seeds,
            eta_deg: self.audio.eta_deg,
        }
    }

    /// Canonical rendering with every resolved value, parseable back into
    /// an identical config.
    pub fn resolved_echo(&self) -> String {
        let mut s = String::new();
        let w = &mut s;
        writeln!(w, "[run]").unwrap();
        writeln!(
            w,
            "task = {}",
            match self.task {
                TaskKind::ImageClass => "image-class",
                TaskKind::SoundLoc => "sound-loc",
            }
        )
        .unwrap();
        writeln!(w, "seed = {}", self.seed).unwrap();
        writeln!(w, "data_dir = {}", self.data_dir.display()).unwrap();
        writeln!(w, "out_dir = {}", self.out_dir.display()).unwrap();
        writeln!(w).unwrap();
        writeln!(w, "[network]").unwrap();
        writeln!(w, "hidden_dims = {}", join(&self.hidden_dims)).unwrap();
        writeln!(w, "t_window = {}", self.t_window).unwrap();
        writeln!(w, "gamma = {}", self.gamma).unwrap();
        writeln!(w, "v_th = {}", self.v_th).unwrap();
        writeln!(w, "r = {}", self.r).unwrap();
        writeln!(w, "tau_m = {}", self.tau_m).unwrap();
        writeln!(w, "tau_s = {}", self.tau_s).unwrap();
        writeln!(
            w,
            "input_scheme = {}",
            match self.coding.input {
                InputScheme::Direct => "direct",
                InputScheme::Phase => "phase",
            }
        )
        .unwrap();
        writeln!(
            w,
            "hidden_scheme = {}",
            match self.coding.hidden {
                HiddenScheme::Burst => "burst",
                HiddenScheme::Rate => "rate",
            }
        )
        .unwrap();
        writeln!(
            w,
            "output_scheme = {}",
            match self.coding.output {
                OutputScheme::Ttfs => "ttfs",
                OutputScheme::Direct => "direct",
            }
        )
        .unwrap();
        writeln!(w).unwrap();
        writeln!(w, "[teacher]").unwrap();
        writeln!(w, "epochs = {}", self.teacher.epochs).unwrap();
        writeln!(w, "batch_size = {}", self.teacher.batch_size).unwrap();
        writeln!(w, "lr = {}", self.teacher.lr).unwrap();
        let (opt_name, momentum) = match self.teacher.optimizer {
            OptimKind::SgdMomentum { momentum } => ("sgd", momentum),
            OptimKind::Adam { .. } => ("adam", 0.9),
        };
        writeln!(w, "optimizer = {opt_name}").unwrap();
        writeln!(w, "momentum = {momentum}").unwrap();
        writeln!(w, "weight_decay = {}", self.teacher.weight_decay).unwrap();
        let (sched, step_every, step_gamma) = match self.teacher.schedule {
            LrSchedule::Constant => ("constant", 10, 0.5),
            LrSchedule::Cosine { .. } => ("cosine", 10, 0.5),
            LrSchedule::StepDecay { every, gamma } => ("step", every, gamma),
        };
        writeln!(w, "schedule = {sched}").unwrap();
        writeln!(w, "step_every = {step_every}").unwrap();
        writeln!(w, "step_gamma = {step_gamma}").unwrap();
        writeln!(w).unwrap();
        writeln!(w, "[ltl]").unwrap();
        writeln!(w, "epochs = {}", self.ltl.epochs).unwrap();
        writeln!(w, "batch_size = {}", self.ltl.batch_size).unwrap();
        writeln!(w, "lr = {}", self.ltl.lr).unwrap();
        writeln!(w, "lr_halve_every = {}", self.ltl.lr_halve_every).unwrap();
        writeln!(w, "clip_targets = {}", self.ltl.clip_targets).unwrap();
        writeln!(w, "scale_delta_by_r = {}", self.ltl.scale_delta_by_r).unwrap();
        writeln!(w, "monitor_samples = {}", self.ltl.monitor_samples).unwrap();
        writeln!(w).unwrap();
        writeln!(w, "[ttfs]").unwrap();
        writeln!(w, "alpha = {}", self.ttfs.alpha).unwrap();
        writeln!(w, "beta = {}", self.ttfs.beta).unwrap();
        writeln!(w, "epochs = {}", self.ttfs.epochs).unwrap();
        writeln!(w, "batch_size = {}", self.ttfs.batch_size).unwrap();
        writeln!(w, "lr = {}", self.ttfs.lr).unwrap();
        writeln!(w, "momentum = {}", self.ttfs.momentum).unwrap();
        writeln!(w, "lr_decay_every = {}", self.ttfs.lr_decay_every).unwrap();
        writeln!(w, "lr_decay_gamma = {}", self.ttfs.lr_decay_gamma).unwrap();
        writeln!(w, "val_fraction = {}", self.val_fraction).unwrap();
        writeln!(w).unwrap();
        writeln!(w, "[energy]").unwrap();
        writeln!(
            w,
            "mode = {}",
            match self.energy_mode {
                ArithMode::Float32 => "float32",
                ArithMode::Int32 => "int32",
            }
        )
        .unwrap();
        writeln!(w, "first_layer_analog = {}", self.first_layer_analog).unwrap();
        writeln!(w).unwrap();
        writeln!(w, "[audio]").unwrap();
        writeln!(w, "classes = {}", self.audio.classes).unwrap();
        writeln!(w, "train_per_class = {}", self.audio.train_per_class).unwrap();
        writeln!(w, "test_per_class = {}", self.audio.test_per_class).unwrap();
        writeln!(w, "sample_rate = {}", self.audio.sample_rate).unwrap();
        writeln!(w, "frame_len = {}", self.audio.frame_len).unwrap();
        writeln!(w, "side_m = {}", self.audio.side_m).unwrap();
        writeln!(
            w,
            "noise = {}",
            match self.audio.noise_kind {
                NoiseKind::Babble => "babble",
                NoiseKind::Factory => "factory",
            }
        )
        .unwrap();
        writeln!(w, "snr_grid = {}", join(&self.audio.snr_grid_db)).unwrap();
        writeln!(w, "deletion_grid = {}", join(&self.audio.deletion_grid)).unwrap();
        writeln!(w, "noise_seeds = {}", self.audio.noise_seeds).unwrap();
        writeln!(w, "eta = {}", self.audio.eta_deg).unwrap();
        s
    }
}

impl From<&LocalizationConfig> for AudioSection {
    fn from(a: &LocalizationConfig) -> AudioSection {
        AudioSection {
            classes: a.classes,
            train_per_class: a.train_per_class,
            test_per_class: a.test_per_class,
            sample_rate: a.sample_rate,
            frame_len: a.frame_len,
            side_m: a.side_m,
            noise_kind: a.noise_kind,
            snr_grid_db: a.snr_grid_db.clone(),
            deletion_grid: a.deletion_grid.clone(),
            noise_seeds: a.noise_seeds,
            eta_deg: a.eta_deg,
        }
    }
}

fn join<T: std::fmt::Display>(items: &[T]) -> String {
    items
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}
