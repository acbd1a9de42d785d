//! Stage-ordered experiment pipeline. Every stage checkpoints its model and
//! writes its training curves, so a crashed or interrupted run can pick up
//! where it stopped instead of redoing finished work.
//!
//! Output directory layout after a full image run:
//!
//! ```text
//! resolved_config.ini     canonical config echo; its hash names the run
//! run_record.json         per-stage metrics, wall clock, checkpoint paths
//! teacher.ckpt            trained ANN reference
//! teacher_curve.csv       epoch,train_loss,train_acc,test_acc
//! hidden.ckpt             distilled bursting stack
//! ltl_curves.csv          epoch,layer,normalized_mse
//! output_calibrated.ckpt  output layer right after threshold calibration
//! output.ckpt             output layer after first-spike training
//! ttfs_curves.csv         epoch,acc_tf,acc_t,mean_tf,l1,l2,theta
//! eval.csv                held-out accuracy, latency and trade-off
//! decision_histogram.csv  t_f,correct_count,wrong_count
//! energy.json, energy.csv SynOps audit of the test-set forward passes
//! ```
//!
//! Sound localization adds loc_report.json and loc_metrics.csv; the whole
//! experiment runs as a single stage and resumes coarsely from the saved
//! report.
//!
//! Metric files never contain wall-clock times, so two runs with the same
//! config and seed produce byte-identical CSVs.

use crate::audio::dataset::{save_manifest, store_frame, AudioManifest, AudioSampleMeta};
use crate::audio::experiment::{run_localization_experiment_full, ConditionMetrics, LocalizationReport};
use crate::audio::geometry::ArrayGeometry;
use crate::audio::mtpc::MTPCConfig;
use crate::audio::synth::{random_multitone, synthesize_frame};
use crate::checkpoint::{
    load_hidden_stack, load_output_layer, load_teacher, save_hidden_stack, save_output_layer,
    save_teacher,
};
use crate::coding::{argmax, OutputScheme};
use crate::config::{PipelineConfig, TaskKind};
use crate::data::{load_mnist_idx, split_train_val, Dataset};
use crate::energy::{
    energy_report, first_layer_analog_macs, synops_ann, synops_snn_batch, Architecture, ArithMode,
    EnergyModel, SynOpsLedger,
};
use crate::error::{CoreError, Result};
use crate::ltl::{student_from_teacher, train_hidden_stack, LTLCurvePoint};
use crate::neurons::{kernel_k0, run_window_batch, BurstingIFLayer, DoubleExpLIFLayer};
use crate::rng::stage_rng;
use crate::teacher::{evaluate_teacher, train_teacher, TeacherEpochStat, TeacherNetwork};
use crate::tensor::Tensor;
use crate::ttfs::{
    cache_hidden_counts, calibrate_output_threshold, decision_histogram, evaluate_ttfs, trade_off,
    train_output_layer, HiddenCache, TTFSCurveRow,
};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::Instant;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: String,
    pub wall_clock_s: f64,
    /// True when the stage was skipped because its checkpoint already existed.
    pub resumed: bool,
    pub metrics: BTreeMap<String, f64>,
    /// Checkpoint files this stage produced, relative to the run directory.
    pub checkpoints: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRecord {
    pub task: String,
    pub seed: u64,
    /// SHA-256 of the resolved config echo.
    pub config_hash: String,
    pub out_dir: String,
    pub stages: Vec<StageRecord>,
    pub wall_clock_s: f64,
}

impl RunRecord {
    fn push_stage(
        &mut self,
        stage: &str,
        started: Instant,
        resumed: bool,
        metrics: BTreeMap<String, f64>,
        checkpoints: &[&str],
    ) {
        self.stages.push(StageRecord {
            stage: stage.to_string(),
            wall_clock_s: started.elapsed().as_secs_f64(),
            resumed,
            metrics,
            checkpoints: checkpoints.iter().map(|s| s.to_string()).collect(),
        });
    }

    pub fn stage(&self, name: &str) -> Option<&StageRecord> {
        self.stages.iter().find(|s| s.stage == name)
    }
}

/// How much of the pipeline to run and which checkpoints to trust.
#[derive(Debug, Clone, Default)]
pub struct PipelinePlan {
    /// Load existing checkpoints for finished stages instead of retraining.
    pub resume: bool,
    /// Stop once this stage has run (None runs everything).
    pub stop_after: Option<String>,
    /// Retrain this stage even when its checkpoint exists.
    pub force: Option<String>,
}

impl PipelinePlan {
    pub fn full(resume: bool) -> PipelinePlan {
        PipelinePlan {
            resume,
            stop_after: None,
            force: None,
        }
    }

    /// Run up to and including `stage`, retraining it, while earlier stages
    /// resume from their checkpoints when present.
    pub fn through(stage: &str) -> PipelinePlan {
        PipelinePlan {
            resume: true,
            stop_after: Some(stage.to_string()),
            force: Some(stage.to_string()),
        }
    }

    fn reuse(&self, stage: &str) -> bool {
        self.resume && self.force.as_deref() != Some(stage)
    }

    fn stops_after(&self, stage: &str) -> bool {
        self.stop_after.as_deref() == Some(stage)
    }
}

/// Attach the failing stage's name so an aborted run says where it died.
fn tag<T>(stage: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        CoreError::Stage { .. } => e,
        other => CoreError::Stage {
            stage: stage.to_string(),
            message: other.to_string(),
        },
    })
}

fn json_err(e: serde_json::Error) -> CoreError {
    CoreError::Format(format!("json: {e}"))
}

fn write_lines(path: &Path, lines: &[String]) -> Result<()> {
    let mut body = lines.join("\n");
    body.push('\n');
    fs::write(path, body)?;
    Ok(())
}

fn write_teacher_curve(path: &Path, stats: &[TeacherEpochStat]) -> Result<()> {
    let mut lines = vec!["epoch,train_loss,train_acc,test_acc".to_string()];
    for s in stats {
        let test = s.test_acc.map(|a| a.to_string()).unwrap_or_default();
        lines.push(format!("{},{},{},{test}", s.epoch, s.train_loss, s.train_acc));
    }
    write_lines(path, &lines)
}

fn write_ltl_curves(path: &Path, curves: &[LTLCurvePoint]) -> Result<()> {
    let mut lines = vec!["epoch,layer,normalized_mse".to_string()];
    for c in curves {
        lines.push(format!("{},{},{}", c.epoch, c.layer, c.normalized_mse));
    }
    write_lines(path, &lines)
}

fn write_ttfs_curves(path: &Path, curves: &[TTFSCurveRow]) -> Result<()> {
    let mut lines = vec!["epoch,acc_tf,acc_t,mean_tf,l1,l2,theta".to_string()];
    for c in curves {
        lines.push(format!(
            "{},{},{},{},{},{},{}",
            c.epoch, c.acc_tf, c.acc_t, c.mean_tf, c.l1, c.l2, c.theta
        ));
    }
    write_lines(path, &lines)
}

/// Per-timestep decision tallies over a decoded test set.
pub fn emit_decision_histogram(
    path: &Path,
    t_f: &[usize],
    correct: &[bool],
    t_window: usize,
) -> Result<()> {
    let mut lines = vec!["t_f,correct_count,wrong_count".to_string()];
    for (t, good, bad) in decision_histogram(t_f, correct, t_window) {
        lines.push(format!("{t},{good},{bad}"));
    }
    write_lines(path, &lines)
}

fn write_loc_metrics(path: &Path, conditions: &[ConditionMetrics]) -> Result<()> {
    let mut lines = vec!["condition,param,mae_deg,accuracy,mean_tf,synops_per_sample".to_string()];
    for c in conditions {
        lines.push(format!(
            "{},{},{},{},{},{}",
            c.condition, c.param, c.mae_deg, c.accuracy, c.mean_tf, c.synops_per_sample
        ));
    }
    write_lines(path, &lines)
}

fn hex_digest(bytes: &[u8]) -> String {
    let mut s = String::with_capacity(bytes.len() * 2);
    for b in bytes {
        s.push_str(&format!("{b:02x}"));
    }
    s
}

fn mode_name(mode: ArithMode) -> &'static str {
    match mode {
        ArithMode::Float32 => "float32",
        ArithMode::Int32 => "int32",
    }
}

/// Write energy.json and energy.csv for a ledger accumulated over `samples`
/// forward passes; returns (ratio, saving) for the stage metrics.
fn write_energy_outputs(
    out: &Path,
    ledger: &SynOpsLedger,
    mode: ArithMode,
    samples: usize,
) -> Result<(f64, f64)> {
    let model = match mode {
        ArithMode::Float32 => EnergyModel::float32(),
        ArithMode::Int32 => EnergyModel::int32(),
    };
    let report = energy_report(ledger, &model)?;
    let json = serde_json::json!({
        "mode": mode_name(mode),
        "samples": samples,
        "ann_macs": ledger.ann_macs,
        "snn_acs": ledger.snn_acs,
        "snn_macs": ledger.snn_macs,
        "synops_ratio": report.ratio,
        "ann_pj": report.ann_pj,
        "snn_pj": report.snn_pj,
        "saving": report.saving,
        "saving_infinite": report.saving_infinite,
    });
    let mut text = serde_json::to_string_pretty(&json).map_err(json_err)?;
    text.push('\n');
    fs::write(out.join("energy.json"), text)?;
    write_lines(
        &out.join("energy.csv"),
        &[
            "metric,value".to_string(),
            format!("ann_macs,{}", ledger.ann_macs),
            format!("snn_acs,{}", ledger.snn_acs),
            format!("snn_macs,{}", ledger.snn_macs),
            format!("synops_ratio,{}", report.ratio),
            format!("ann_pj,{}", report.ann_pj),
            format!("snn_pj,{}", report.snn_pj),
            format!("saving,{}", report.saving),
        ],
    )?;
    Ok((report.ratio, report.saving))
}

/// Rate-decode the cached hidden spikes with the teacher's linear classifier;
/// this is the non-temporal reference the first-spike readout is compared to.
fn direct_reference(
    teacher: &TeacherNetwork,
    cache: &HiddenCache,
    labels: &[usize],
) -> Result<(f64, Vec<bool>)> {
    let wt = teacher.classifier_w.transpose();
    let idx: Vec<usize> = (0..cache.samples).collect();
    let mut correct = Vec::with_capacity(cache.samples);
    for piece in idx.chunks(256) {
        let steps = cache.batch_steps(piece);
        let mut mean = Tensor::zeros(&[piece.len(), cache.neurons]);
        for s in &steps {
            mean.add_scaled(s, 1.0 / steps.len() as f64);
        }
        let logits = mean.matmul(&wt)?;
        for (row, &s) in piece.iter().enumerate() {
            let scores: Vec<f64> = logits
                .row(row)
                .iter()
                .zip(teacher.classifier_b.iter())
                .map(|(v, b)| v + b)
                .collect();
            correct.push(argmax(&scores) == labels[s]);
        }
    }
    let acc = correct.iter().filter(|&&c| c).count() as f64 / labels.len().max(1) as f64;
    Ok((acc, correct))
}

fn ensure_cache<'a>(
    slot: &'a mut Option<HiddenCache>,
    stack: &[BurstingIFLayer],
    ds: &Dataset,
    t_window: usize,
) -> Result<&'a HiddenCache> {
    if slot.is_none() {
        *slot = Some(cache_hidden_counts(stack, ds, t_window, 256)?);
    }
    Ok(slot.as_ref().expect("just filled"))
}

fn ensure_split<'a>(
    slot: &'a mut Option<(Dataset, Dataset)>,
    train: &Dataset,
    cfg: &PipelineConfig,
) -> &'a (Dataset, Dataset) {
    if slot.is_none() {
        let val_count = ((train.len() as f64 * cfg.val_fraction) as usize)
            .max(train.classes)
            .min(train.len().saturating_sub(1));
        *slot = Some(split_train_val(
            train,
            val_count,
            &mut stage_rng(cfg.seed, "split"),
        ));
    }
    slot.as_ref().expect("just filled")
}

/// Run every stage of the configured experiment, checkpointing along the way.
/// With `resume` set, stages whose checkpoints already exist are loaded
/// instead of retrained; evaluation and audit stages always re-run.
pub fn run_pipeline(cfg: &PipelineConfig, resume: bool) -> Result<RunRecord> {
    run_pipeline_plan(cfg, &PipelinePlan::full(resume))
}

pub fn run_pipeline_plan(cfg: &PipelineConfig, plan: &PipelinePlan) -> Result<RunRecord> {
    cfg.validate()?;
    let stages: &[&str] = match cfg.task {
        TaskKind::ImageClass => &["data", "teacher", "ltl", "calibrate", "ttfs", "eval", "energy"],
        TaskKind::SoundLoc => &["experiment", "report"],
    };
    if let Some(stop) = plan.stop_after.as_deref() {
        if !stages.contains(&stop) {
            return Err(CoreError::Config(format!(
                "no stage named {stop} in a {} run (stages: {})",
                match cfg.task {
                    TaskKind::ImageClass => "image-class",
                    TaskKind::SoundLoc => "sound-loc",
                },
                stages.join(", ")
            )));
        }
        if matches!(stop, "calibrate" | "ttfs") && cfg.coding.output != OutputScheme::Ttfs {
            return Err(CoreError::Config(format!(
                "stage {stop} does not run when output_scheme = direct"
            )));
        }
    }
    fs::create_dir_all(&cfg.out_dir)?;
    let echo = cfg.resolved_echo();
    fs::write(cfg.out_dir.join("resolved_config.ini"), &echo)?;
    let mut hasher = Sha256::new();
    hasher.update(echo.as_bytes());
    let config_hash = hex_digest(&hasher.finalize());

    let started = Instant::now();
    let mut record = RunRecord {
        task: match cfg.task {
            TaskKind::ImageClass => "image-class".to_string(),
            TaskKind::SoundLoc => "sound-loc".to_string(),
        },
        seed: cfg.seed,
        config_hash,
        out_dir: cfg.out_dir.display().to_string(),
        stages: Vec::new(),
        wall_clock_s: 0.0,
    };

    match cfg.task {
        TaskKind::ImageClass => image_pipeline(cfg, plan, &mut record)?,
        TaskKind::SoundLoc => sound_loc_pipeline(cfg, plan, &mut record)?,
    }

    record.wall_clock_s = started.elapsed().as_secs_f64();
    let mut text = serde_json::to_string_pretty(&record).map_err(json_err)?;
    text.push('\n');
    fs::write(cfg.out_dir.join("run_record.json"), text)?;
    Ok(record)
}

fn image_pipeline(cfg: &PipelineConfig, plan: &PipelinePlan, rec: &mut RunRecord) -> Result<()> {
    let out = &cfg.out_dir;
    let seed = cfg.seed;

    // data
    let started = Instant::now();
    let data = tag("data", load_mnist_idx(&cfg.data_dir))?;
    let mut m = BTreeMap::new();
    m.insert("train_samples".to_string(), data.train.len() as f64);
    m.insert("test_samples".to_string(), data.test.len() as f64);
    m.insert("features".to_string(), data.train.dim() as f64);
    m.insert("classes".to_string(), data.train.classes as f64);
    rec.push_stage("data", started, false, m, &[]);
    if plan.stops_after("data") {
        return Ok(());
    }

    let features = data.train.dim();
    let classes = data.train.classes;
    let gamma = cfg.effective_gamma();

    // teacher
    let teacher_ckpt = out.join("teacher.ckpt");
    let started = Instant::now();
    let mut m = BTreeMap::new();
    let (teacher, teacher_resumed) = if plan.reuse("teacher") && teacher_ckpt.exists() {
        let net = tag("teacher", load_teacher(&teacher_ckpt))?;
        m.insert(
            "test_acc".to_string(),
            tag("teacher", evaluate_teacher(&net, &data.test))?,
        );
        (net, true)
    } else {
        let mut net = TeacherNetwork::new_mlp(
            features,
            &cfg.hidden_dims,
            classes,
            &mut stage_rng(seed, "teacher-init"),
        );
        let report = tag(
            "teacher",
            train_teacher(
                &mut net,
                &data.train,
                Some(&data.test),
                &cfg.teacher,
                &mut stage_rng(seed, "teacher"),
            ),
        )?;
        tag("teacher", save_teacher(&teacher_ckpt, &net))?;
        tag(
            "teacher",
            write_teacher_curve(&out.join("teacher_curve.csv"), &report.epoch_stats),
        )?;
        m.insert("train_acc".to_string(), report.final_train_acc);
        if let Some(a) = report.final_test_acc {
            m.insert("test_acc".to_string(), a);
        }
        (net, false)
    };
    rec.push_stage("teacher", started, teacher_resumed, m, &["teacher.ckpt"]);
    if plan.stops_after("teacher") {
        return Ok(());
    }

    // layer-to-layer distillation of the hidden stack
    let hidden_ckpt = out.join("hidden.ckpt");
    let started = Instant::now();
    let mut m = BTreeMap::new();
    let (stack, ltl_resumed) = if plan.reuse("ltl") && hidden_ckpt.exists() {
        (tag("ltl", load_hidden_stack(&hidden_ckpt))?, true)
    } else {
        let mut stack = tag("ltl", student_from_teacher(&teacher, cfg.v_th, gamma))?;
        let report = tag(
            "ltl",
            train_hidden_stack(
                &mut stack,
                &teacher,
                &data.train,
                &cfg.ltl,
                &mut stage_rng(seed, "ltl"),
            ),
        )?;
        tag("ltl", save_hidden_stack(&hidden_ckpt, &stack))?;
        tag(
            "ltl",
            write_ltl_curves(&out.join("ltl_curves.csv"), &report.curves),
        )?;
        for (i, mse) in report.final_mse.iter().enumerate() {
            m.insert(format!("final_mse_layer{i}"), *mse);
        }
        (stack, false)
    };
    rec.push_stage("ltl", started, ltl_resumed, m, &["hidden.ckpt"]);
    if plan.stops_after("ltl") {
        return Ok(());
    }

    // first-spike output layer, unless the run decodes rates directly
    let mut split: Option<(Dataset, Dataset)> = None;
    let mut tr_cache: Option<HiddenCache> = None;
    let mut out_layer: Option<DoubleExpLIFLayer> = None;

    if cfg.coding.output == OutputScheme::Ttfs {
        let cal_ckpt = out.join("output_calibrated.ckpt");
        let ttfs_ckpt = out.join("output.ckpt");

        // calibrate
        let started = Instant::now();
        let mut m = BTreeMap::new();
        let (mut layer, cal_resumed) = if plan.reuse("calibrate") && cal_ckpt.exists() {
            let l = tag("calibrate", load_output_layer(&cal_ckpt))?;
            m.insert("v_th".to_string(), l.v_th);
            m.insert("k0".to_string(), l.k0);
            (l, true)
        } else {
            let pair = ensure_split(&mut split, &data.train, cfg);
            let cache = tag(
                "calibrate",
                ensure_cache(&mut tr_cache, &stack, &pair.0, cfg.t_window),
            )?;
            // warm start from the teacher's classifier: its rows already
            // separate the hidden rates the stack was distilled to emit
            let k0 = tag(
                "calibrate",
                kernel_k0(cfg.v_th, cfg.tau_m, cfg.tau_s, cfg.t_window),
            )?;
            let mut l = tag(
                "calibrate",
                DoubleExpLIFLayer::new(
                    teacher.classifier_w.clone(),
                    cfg.tau_m,
                    cfg.tau_s,
                    cfg.v_th,
                    k0,
                ),
            )?;
            let v_th = tag("calibrate", calibrate_output_threshold(&mut l, cache, 256))?;
            tag("calibrate", save_output_layer(&cal_ckpt, &l))?;
            m.insert("v_th".to_string(), v_th);
            m.insert("k0".to_string(), l.k0);
            (l, false)
        };
        rec.push_stage(
            "calibrate",
            started,
            cal_resumed,
            m,
            &["output_calibrated.ckpt"],
        );
        if plan.stops_after("calibrate") {
            return Ok(());
        }

        // ttfs training
        let started = Instant::now();
        let mut m = BTreeMap::new();
        let ttfs_resumed;
        if plan.reuse("ttfs") && ttfs_ckpt.exists() {
            layer = tag("ttfs", load_output_layer(&ttfs_ckpt))?;
            ttfs_resumed = true;
        } else {
            let pair = ensure_split(&mut split, &data.train, cfg);
            let mut val_cache: Option<HiddenCache> = None;
            let val_c = tag(
                "ttfs",
                ensure_cache(&mut val_cache, &stack, &pair.1, cfg.t_window),
            )?;
            let tr_c = tag(
                "ttfs",
                ensure_cache(&mut tr_cache, &stack, &pair.0, cfg.t_window),
            )?;
            let report = tag(
                "ttfs",
                train_output_layer(
                    &mut layer,
                    tr_c,
                    &pair.0.labels,
                    val_c,
                    &pair.1.labels,
                    &cfg.ttfs,
                    &mut stage_rng(seed, "ttfs"),
                ),
            )?;
            tag("ttfs", save_output_layer(&ttfs_ckpt, &layer))?;
            tag(
                "ttfs",
                write_ttfs_curves(&out.join("ttfs_curves.csv"), &report.curves),
            )?;
            m.insert("final_acc_tf".to_string(), report.final_acc_tf);
            m.insert("final_acc_t".to_string(), report.final_acc_t);
            m.insert("final_mean_tf".to_string(), report.final_mean_tf);
            m.insert("final_theta".to_string(), report.final_theta);
            ttfs_resumed = false;
        }
        rec.push_stage("ttfs", started, ttfs_resumed, m, &["output.ckpt"]);
        if plan.stops_after("ttfs") {
            return Ok(());
        }
        out_layer = Some(layer);
    }

    // evaluation on the held-out split (always re-run)
    let started = Instant::now();
    let test_cache = tag(
        "eval",
        cache_hidden_counts(&stack, &data.test, cfg.t_window, 256),
    )?;
    let (reference_acc, direct_correct) =
        tag("eval", direct_reference(&teacher, &test_cache, &data.test.labels))?;
    let mut m = BTreeMap::new();
    let (acc_tf, acc_t, mean_tf, t_f, correct): (f64, f64, f64, Vec<usize>, Vec<bool>) =
        match &out_layer {
            Some(layer) => {
                let eval = tag(
                    "eval",
                    evaluate_ttfs(layer, &test_cache, &data.test.labels, 256),
                )?;
                (eval.acc_tf, eval.acc_t, eval.mean_tf, eval.t_f, eval.correct_tf)
            }
            None => {
                // direct output coding: every decision happens at T
                let n = data.test.len();
                (
                    reference_acc,
                    reference_acc,
                    cfg.t_window as f64,
                    vec![cfg.t_window; n],
                    direct_correct,
                )
            }
        };
    let trade = trade_off(reference_acc, acc_tf, mean_tf);
    write_lines(
        &out.join("eval.csv"),
        &[
            "split,acc_tf,acc_t,mean_tf,reference_acc,trade_off".to_string(),
            format!("test,{acc_tf},{acc_t},{mean_tf},{reference_acc},{trade}"),
        ],
    )?;
    emit_decision_histogram(
        &out.join("decision_histogram.csv"),
        &t_f,
        &correct,
        cfg.t_window,
    )?;
    m.insert("acc_tf".to_string(), acc_tf);
    m.insert("acc_t".to_string(), acc_t);
    m.insert("mean_tf".to_string(), mean_tf);
    m.insert("reference_acc".to_string(), reference_acc);
    m.insert("trade_off".to_string(), trade);
    rec.push_stage("eval", started, false, m, &[]);
    if plan.stops_after("eval") {
        return Ok(());
    }

    // energy audit over the test set (always re-run)
    let started = Instant::now();
    let mut dims = vec![features];
    dims.extend_from_slice(&cfg.hidden_dims);
    dims.push(classes);
    let arch = tag("energy", Architecture::mlp(&dims))?;
    let n = data.test.len();
    let idx: Vec<usize> = (0..n).collect();
    let mut snn_total = 0u64;
    for piece in idx.chunks(512) {
        let (x, _) = data.test.batch(piece);
        let hist = tag("energy", run_window_batch(&stack, &x, cfg.t_window))?;
        snn_total += tag("energy", synops_snn_batch(&hist, &arch))?;
    }
    let ledger = SynOpsLedger {
        ann_macs: tag("energy", synops_ann(&arch))? * n as u64,
        snn_acs: snn_total,
        snn_macs: if cfg.first_layer_analog {
            tag("energy", first_layer_analog_macs(&arch, cfg.t_window))? * n as u64
        } else {
            0
        },
    };
    let (ratio, saving) = tag(
        "energy",
        write_energy_outputs(out, &ledger, cfg.energy_mode, n),
    )?;
    let mut m = BTreeMap::new();
    m.insert("synops_ratio".to_string(), ratio);
    m.insert("saving".to_string(), saving);
    m.insert("snn_acs_per_sample".to_string(), snn_total as f64 / n as f64);
    rec.push_stage("energy", started, false, m, &[]);
    Ok(())
}

fn sound_loc_pipeline(cfg: &PipelineConfig, plan: &PipelinePlan, rec: &mut RunRecord) -> Result<()> {
    let out = &cfg.out_dir;
    let report_path = out.join("loc_report.json");

    // the experiment is one stage: synthesis, encoding, the full training
    // chain and the noise sweeps all share in-memory state, so resumption is
    // all-or-nothing from the saved report
    let started = Instant::now();
    let mut m = BTreeMap::new();
    let (report, resumed) = if plan.reuse("experiment") && report_path.exists() {
        let text = tag("experiment", fs::read_to_string(&report_path).map_err(CoreError::from))?;
        let report: LocalizationReport =
            tag("experiment", serde_json::from_str(&text).map_err(json_err))?;
        (report, true)
    } else {
        let loc = cfg.localization();
        let (report, stack, output) =
            tag("experiment", run_localization_experiment_full(&loc, cfg.seed))?;
        tag("experiment", save_hidden_stack(&out.join("hidden.ckpt"), &stack))?;
        tag("experiment", save_output_layer(&out.join("output.ckpt"), &output))?;
        let mut text = serde_json::to_string_pretty(&report).map_err(json_err)?;
        text.push('\n');
        fs::write(&report_path, text)?;
        (report, false)
    };
    if let Some(a) = report.teacher.final_test_acc {
        m.insert("teacher_test_acc".to_string(), a);
    }
    m.insert("calibrated_v_th".to_string(), report.calibrated_v_th);
    m.insert("ttfs_final_acc_tf".to_string(), report.ttfs.final_acc_tf);
    rec.push_stage(
        "experiment",
        started,
        resumed,
        m,
        &["hidden.ckpt", "output.ckpt"],
    );
    if plan.stops_after("experiment") {
        return Ok(());
    }

    // emit curves, condition metrics and the energy audit (always re-run)
    let started = Instant::now();
    tag(
        "report",
        write_teacher_curve(&out.join("teacher_curve.csv"), &report.teacher.epoch_stats),
    )?;
    tag(
        "report",
        write_ltl_curves(&out.join("ltl_curves.csv"), &report.ltl.curves),
    )?;
    tag(
        "report",
        write_ttfs_curves(&out.join("ttfs_curves.csv"), &report.ttfs.curves),
    )?;
    tag(
        "report",
        write_loc_metrics(&out.join("loc_metrics.csv"), &report.conditions),
    )?;
    tag(
        "report",
        emit_decision_histogram(
            &out.join("decision_histogram.csv"),
            &report.clean_tf,
            &report.clean_correct,
            cfg.t_window,
        ),
    )?;

    let clean = report
        .conditions
        .first()
        .ok_or_else(|| CoreError::Data("experiment produced no conditions".into()));
    let clean = tag("report", clean)?;
    let mut dims = vec![report.feature_dim];
    dims.extend_from_slice(&cfg.hidden_dims);
    dims.push(cfg.audio.classes);
    let arch = tag("report", Architecture::mlp(&dims))?;
    let n = report.clean_tf.len();
    let ledger = SynOpsLedger {
        ann_macs: tag("report", synops_ann(&arch))? * n as u64,
        snn_acs: (clean.synops_per_sample * n as f64).round() as u64,
        snn_macs: if cfg.first_layer_analog {
            tag("report", first_layer_analog_macs(&arch, cfg.t_window))? * n as u64
        } else {
            0
        },
    };
    let (ratio, saving) = tag(
        "report",
        write_energy_outputs(out, &ledger, cfg.energy_mode, n),
    )?;
    let mut m = BTreeMap::new();
    m.insert("clean_mae_deg".to_string(), clean.mae_deg);
    m.insert("clean_accuracy".to_string(), clean.accuracy);
    m.insert("clean_mean_tf".to_string(), clean.mean_tf);
    m.insert("synops_ratio".to_string(), ratio);
    m.insert("saving".to_string(), saving);
    rec.push_stage("report", started, false, m, &[]);
    Ok(())
}

/// Render the localization corpus to disk: train/ and test/ directories of
/// per-channel PCM frames plus a manifest each. The synthesis streams match
/// the in-memory experiment, so encoding a stored corpus reproduces the
/// experiment's features exactly.
pub fn generate_audio_corpus(cfg: &PipelineConfig, dir: &Path) -> Result<(usize, usize)> {
    let loc = cfg.localization();
    loc.validate()?;
    let geometry = ArrayGeometry::square(loc.side_m)?;
    let mtpc = MTPCConfig::for_geometry(&geometry);
    let bin_hz = loc.sample_rate / mtpc.n_fft as f64;
    let bin_lo = (mtpc.f_lo / bin_hz).ceil() as usize;
    let bin_hi = ((mtpc.f_hi / bin_hz).floor() as usize).min(mtpc.n_fft / 2 - 1);
    let mut counts = (0usize, 0usize);
    for (split, per_class, stage) in [
        ("train", loc.train_per_class, "audio-train"),
        ("test", loc.test_per_class, "audio-test"),
    ] {
        let sub = dir.join(split);
        fs::create_dir_all(&sub)?;
        let mut rng = stage_rng(cfg.seed, stage);
        let mut samples = Vec::with_capacity(loc.classes * per_class);
        for class in 0..loc.classes {
            let az = class as f64 * loc.grid_step_deg();
            for k in 0..per_class {
                let source = random_multitone(bin_hz, bin_lo, bin_hi, &mut rng);
                let frame = synthesize_frame(
                    az,
                    &source,
                    &geometry,
                    loc.sample_rate,
                    loc.frame_len,
                    None,
                    &mut rng,
                )?;
                let stem = format!("az{class:03}_{k:02}");
                let files = store_frame(&sub, &stem, &frame)?;
                samples.push(AudioSampleMeta {
                    azimuth_deg: az,
                    files,
                    source,
                });
            }
        }
        let total = samples.len();
        save_manifest(
            &sub,
            &AudioManifest {
                sample_rate: loc.sample_rate,
                frame_len: loc.frame_len,
                geometry: geometry.clone(),
                seed: cfg.seed,
                samples,
            },
        )?;
        if split == "train" {
            counts.0 = total;
        } else {
            counts.1 = total;
        }
    }
    Ok(counts)
}
