//! End-to-end sound-source localization: synthesize a grid-azimuth corpus,
//! encode with the phase front-end, distill an ANN teacher into the bursting
//! hidden stack, train the first-spike output layer, then sweep noise and
//! spike-deletion conditions.

use super::geometry::ArrayGeometry;
use super::metrics::localization_metrics;
use super::mtpc::{mtpc_encode, MTPCConfig};
use super::synth::{random_multitone, synthesize_frame, NoiseKind, SourceDescriptor};
use crate::data::{split_train_val, Dataset};
use crate::energy::{synops_snn_batch, Architecture};
use crate::error::{CoreError, Result};
use crate::ltl::{student_from_teacher, train_hidden_stack, LTLConfig, LTLReport};
use crate::neurons::{kernel_k0, run_window_batch_with, BurstingIFLayer, DoubleExpLIFLayer};
use crate::optim::{LrSchedule, OptimKind};
use crate::rng::stage_rng;
use crate::teacher::{
    train_teacher, TeacherConfig, TeacherNetwork, TeacherReport,
};
use crate::tensor::Tensor;
use crate::ttfs::{
    cache_hidden_counts, calibrate_output_threshold, evaluate_ttfs, train_output_layer,
    HiddenCache, TTFSReport, TTFSTrainConfig,
};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq)]
pub struct LocalizationConfig {
    /// Azimuth classes on a uniform grid (step = 360 / classes degrees).
    pub classes: usize,
    pub train_per_class: usize,
    pub test_per_class: usize,
    pub sample_rate: f64,
    pub frame_len: usize,
    /// Square array side in meters.
    pub side_m: f64,
    pub t_window: usize,
    pub gamma: u32,
    pub v_th: f64,
    pub hidden_dims: Vec<usize>,
    pub teacher: TeacherConfig,
    pub ltl: LTLConfig,
    pub ttfs: TTFSTrainConfig,
    /// Fraction of training samples held out for the theta refresh.
    pub val_fraction: f64,
    pub noise_kind: NoiseKind,
    pub snr_grid_db: Vec<f64>,
    pub deletion_grid: Vec<f64>,
    pub noise_seeds: u64,
    /// Accuracy counts predictions within this angular tolerance.
    pub eta_deg: f64,
}

impl Default for LocalizationConfig {
    fn default() -> Self {
        LocalizationConfig {
            classes: 72,
            train_per_class: 20,
            test_per_class: 8,
            sample_rate: 16_000.0,
            frame_len: 2720,
            side_m: 0.05,
            t_window: 16,
            gamma: 5,
            v_th: 1.0,
            hidden_dims: vec![256, 256],
            teacher: TeacherConfig {
                epochs: 30,
                batch_size: 64,
                lr: 0.05,
                optimizer: OptimKind::sgd(0.9),
                weight_decay: 5e-4,
                schedule: LrSchedule::Cosine { total: 30 },
            },
            ltl: LTLConfig {
                t_window: 16,
                r: 1.0,
                epochs: 4,
                batch_size: 128,
                lr: 1e-4,
                lr_halve_every: 10,
                clip_targets: true,
                scale_delta_by_r: true,
                monitor_samples: 1024,
            },
            ttfs: TTFSTrainConfig {
                alpha: 2.0,
                beta: 5.0,
                epochs: 20,
                batch_size: 128,
                lr: 0.05,
                momentum: 0.9,
                lr_decay_every: 0,
                lr_decay_gamma: 0.5,
            },
            val_fraction: 0.1,
            // The factory surrogate's wideband tone bank collides with signal
            // bins at every SNR, so degradation keeps growing as SNR drops;
            // babble saturates once its few tones clear the relative floor.
            noise_kind: NoiseKind::Factory,
            snr_grid_db: vec![20.0, 10.0, 5.0, 0.0],
            deletion_grid: vec![0.0, 0.2, 0.4, 0.6],
            noise_seeds: 3,
            eta_deg: 2.5,
        }
    }
}

impl LocalizationConfig {
    pub fn grid_step_deg(&self) -> f64 {
        360.0 / self.classes as f64
    }

    pub fn validate(&self) -> Result<()> {
        if self.classes < 2 || self.train_per_class == 0 || self.test_per_class == 0 {
            return Err(CoreError::Config(
                "need >= 2 classes and nonzero samples per class".into(),
            ));
        }
        if self.hidden_dims.is_empty() {
            return Err(CoreError::Config("need at least one hidden layer".into()));
        }
        if !(0.0..0.5).contains(&self.val_fraction) || self.val_fraction <= 0.0 {
            return Err(CoreError::Config(format!(
                "val_fraction must lie in (0, 0.5), got {}",
                self.val_fraction
            )));
        }
        if self.noise_seeds == 0 {
            return Err(CoreError::Config("noise_seeds must be >= 1".into()));
        }
        Ok(())
    }
}

/// Metrics for one evaluation condition, averaged over noise seeds where
/// applicable.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConditionMetrics {
    /// "clean", "snr" or "deletion".
    pub condition: String,
    /// SNR in dB or deletion probability; 0 for clean.
    pub param: f64,
    pub mae_deg: f64,
    pub accuracy: f64,
    pub mean_tf: f64,
    pub synops_per_sample: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct LocalizationReport {
    pub feature_dim: usize,
    pub teacher: TeacherReport,
    pub ltl: LTLReport,
    pub ttfs: TTFSReport,
    pub calibrated_v_th: f64,
    /// Clean condition first, then SNR and deletion sweeps in grid order.
    pub conditions: Vec<ConditionMetrics>,
    /// Per-sample decision times and correctness on the clean test set, for
    /// the decision-time histogram.
    pub clean_tf: Vec<usize>,
    pub clean_correct: Vec<bool>,
}

/// A held-back test sample: the class label plus everything needed to
/// re-render the frame under a different noise condition.
struct TestSample {
    class: usize,
    source: SourceDescriptor,
}

fn encode_set(
    cfg: &LocalizationConfig,
    mtpc: &MTPCConfig,
    geometry: &ArrayGeometry,
    per_class: usize,
    stage: &str,
    master_seed: u64,
    keep_sources: bool,
) -> Result<(Dataset, Vec<TestSample>)> {
    let mut rng = stage_rng(master_seed, stage);
    let bin_hz = cfg.sample_rate / mtpc.n_fft as f64;
    let bin_lo = (mtpc.f_lo / bin_hz).ceil() as usize;
    let bin_hi = ((mtpc.f_hi / bin_hz).floor() as usize).min(mtpc.n_fft / 2 - 1);
    let n = cfg.classes * per_class;
    let dim = mtpc.pairs.len() * mtpc.n_tau * mtpc.n_channels;
    let mut features = Tensor::zeros(&[n, dim]);
    let mut labels = Vec::with_capacity(n);
    let mut sources = Vec::new();
    let mut row = 0;
    for class in 0..cfg.classes {
        let az = class as f64 * cfg.grid_step_deg();
        for _ in 0..per_class {
            let source = random_multitone(bin_hz, bin_lo, bin_hi, &mut rng);
            let frame = synthesize_frame(
                az,
                &source,
                geometry,
                cfg.sample_rate,
                cfg.frame_len,
                None,
                &mut rng,
            )?;
            let map = mtpc_encode(&frame, mtpc)?;
            features.row_mut(row).copy_from_slice(&map.flatten());
            labels.push(class);
            if keep_sources {
                sources.push(TestSample { class, source });
            }
            row += 1;
        }
    }
    Ok((
        Dataset {
            features,
            labels,
            classes: cfg.classes,
        },
        sources,
    ))
}

struct ConditionOutcome {
    mae_deg: f64,
    accuracy: f64,
    mean_tf: f64,
    synops_per_sample: f64,
    t_f: Vec<usize>,
    correct: Vec<bool>,
}

/// Forward the frozen stack over a feature block (optionally with spike
/// deletion), decode first spikes and score azimuth errors.
fn eval_condition(
    stack: &[BurstingIFLayer],
    output: &DoubleExpLIFLayer,
    arch: &Architecture,
    features: &Tensor,
    labels: &[usize],
    cfg: &LocalizationConfig,
    deletion: Option<(f64, &mut ChaCha8Rng)>,
) -> Result<ConditionOutcome> {
    let history = run_window_batch_with(stack, features, cfg.t_window, deletion)?;
    let synops = synops_snn_batch(&history, arch)? as f64 / labels.len() as f64;
    let cache = HiddenCache::from_steps(&history.per_layer[history.layers() - 1])?;
    let eval = evaluate_ttfs(output, &cache, labels, 256)?;
    let step = cfg.grid_step_deg();
    let pred_az: Vec<f64> = eval.predicted.iter().map(|&c| c as f64 * step).collect();
    let true_az: Vec<f64> = labels.iter().map(|&c| c as f64 * step).collect();
    let m = localization_metrics(&pred_az, &true_az, cfg.eta_deg, step)?;
    Ok(ConditionOutcome {
        mae_deg: m.mae_deg,
        accuracy: m.accuracy,
        mean_tf: eval.mean_tf,
        synops_per_sample: synops,
        t_f: eval.t_f,
        correct: eval.correct_tf,
    })
}

fn average(condition: &str, param: f64, runs: &[ConditionOutcome]) -> ConditionMetrics {
    let n = runs.len() as f64;
    ConditionMetrics {
        condition: condition.to_string(),
        param,
        mae_deg: runs.iter().map(|r| r.mae_deg).sum::<f64>() / n,
        accuracy: runs.iter().map(|r| r.accuracy).sum::<f64>() / n,
        mean_tf: runs.iter().map(|r| r.mean_tf).sum::<f64>() / n,
        synops_per_sample: runs.iter().map(|r| r.synops_per_sample).sum::<f64>() / n,
    }
}

pub fn run_localization_experiment(
    cfg: &LocalizationConfig,
    master_seed: u64,
) -> Result<LocalizationReport> {
    run_localization_experiment_full(cfg, master_seed).map(|(report, _, _)| report)
}

/// Like [`run_localization_experiment`] but also hands back the trained
/// models so callers can checkpoint them.
pub fn run_localization_experiment_full(
    cfg: &LocalizationConfig,
    master_seed: u64,
) -> Result<(LocalizationReport, Vec<BurstingIFLayer>, DoubleExpLIFLayer)> {
    cfg.validate()?;
    let geometry = ArrayGeometry::square(cfg.side_m)?;
    let mtpc = MTPCConfig::for_geometry(&geometry);
    mtpc.validate()?;
    let feature_dim = mtpc.pairs.len() * mtpc.n_tau * mtpc.n_channels;

    let (train, _) = encode_set(
        cfg,
        &mtpc,
        &geometry,
        cfg.train_per_class,
        "audio-train",
        master_seed,
        false,
    )?;
    let (test, test_samples) = encode_set(
        cfg,
        &mtpc,
        &geometry,
        cfg.test_per_class,
        "audio-test",
        master_seed,
        true,
    )?;

    // ANN reference on the encoded features
    let mut teacher =
        TeacherNetwork::new_mlp(feature_dim, &cfg.hidden_dims, cfg.classes, &mut stage_rng(
            master_seed,
            "audio-teacher-init",
        ));
    let teacher_report = train_teacher(
        &mut teacher,
        &train,
        Some(&test),
        &cfg.teacher,
        &mut stage_rng(master_seed, "audio-teacher"),
    )?;

    // distill the hidden stack
    let mut stack = student_from_teacher(&teacher, cfg.v_th, cfg.gamma)?;
    let ltl_report = train_hidden_stack(
        &mut stack,
        &teacher,
        &train,
        &cfg.ltl,
        &mut stage_rng(master_seed, "audio-ltl"),
    )?;

    // first-spike output layer on cached hidden spikes
    let val_count = ((train.len() as f64 * cfg.val_fraction) as usize).max(cfg.classes);
    let (tr, val) = split_train_val(
        &train,
        val_count,
        &mut stage_rng(master_seed, "audio-split"),
    );
    let tr_cache = cache_hidden_counts(&stack, &tr, cfg.t_window, 256)?;
    let val_cache = cache_hidden_counts(&stack, &val, cfg.t_window, 256)?;
    let hidden_last = *cfg.hidden_dims.last().expect("validated nonempty");
    let mut init_rng = stage_rng(master_seed, "audio-output-init");
    let w = Tensor::randn(
        &[cfg.classes, hidden_last],
        (2.0 / hidden_last as f64).sqrt(),
        &mut init_rng,
    );
    let mut output = DoubleExpLIFLayer::new(
        w,
        2.0,
        0.5,
        cfg.v_th,
        kernel_k0(cfg.v_th, 2.0, 0.5, cfg.t_window)?,
    )?;
    let calibrated_v_th = calibrate_output_threshold(&mut output, &tr_cache, 256)?;
    let ttfs_report = train_output_layer(
        &mut output,
        &tr_cache,
        &tr.labels,
        &val_cache,
        &val.labels,
        &cfg.ttfs,
        &mut stage_rng(master_seed, "audio-ttfs"),
    )?;

    // condition sweeps
    let mut arch_dims = vec![feature_dim];
    arch_dims.extend_from_slice(&cfg.hidden_dims);
    arch_dims.push(cfg.classes);
    let arch = Architecture::mlp(&arch_dims)?;

    let mut conditions = Vec::new();
    let clean = eval_condition(&stack, &output, &arch, &test.features, &test.labels, cfg, None)?;
    let clean_tf = clean.t_f.clone();
    let clean_correct = clean.correct.clone();
    conditions.push(average("clean", 0.0, &[clean]));

    for &snr in &cfg.snr_grid_db {
        let mut runs = Vec::new();
        for seed in 0..cfg.noise_seeds {
            let stage = format!("audio-noise-{snr}-{seed}");
            let mut rng = stage_rng(master_seed, &stage);
            let mut features = Tensor::zeros(&[test_samples.len(), feature_dim]);
            for (row, sample) in test_samples.iter().enumerate() {
                let az = sample.class as f64 * cfg.grid_step_deg();
                let frame = synthesize_frame(
                    az,
                    &sample.source,
                    &geometry,
                    cfg.sample_rate,
                    cfg.frame_len,
                    Some((cfg.noise_kind, snr)),
                    &mut rng,
                )?;
                let map = mtpc_encode(&frame, &mtpc)?;
                features.row_mut(row).copy_from_slice(&map.flatten());
            }
            runs.push(eval_condition(
                &stack,
                &output,
                &arch,
                &features,
                &test.labels,
                cfg,
                None,
            )?);
        }
        conditions.push(average("snr", snr, &runs));
    }

    for &rate in &cfg.deletion_grid {
        let mut runs = Vec::new();
        for seed in 0..cfg.noise_seeds {
            let stage = format!("audio-del-{rate}-{seed}");
            let mut rng = stage_rng(master_seed, &stage);
            runs.push(eval_condition(
                &stack,
                &output,
                &arch,
                &test.features,
                &test.labels,
                cfg,
                Some((rate, &mut rng)),
            )?);
        }
        conditions.push(average("deletion", rate, &runs));
    }

    Ok((
        LocalizationReport {
            feature_dim,
            teacher: teacher_report,
            ltl: ltl_report,
            ttfs: ttfs_report,
            calibrated_v_th,
            conditions,
            clean_tf,
            clean_correct,
        },
        stack,
        output,
    ))
}
