//! Acceptance suite: one test per release criterion, each printing a
//! `criterion N: PASS` line with the measured numbers (visible under
//! `--nocapture`). The MNIST stack for criteria 5/6/8/11 is built once and
//! shared; everything else sets up its own fixtures. Oracles here are written
//! against the public API only and re-derive expected values independently
//! of the library internals.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::path::PathBuf;
use std::sync::OnceLock;
use std::time::Instant;

use snn_core::coding::{CodingAssignment, HiddenScheme, InputScheme, OutputScheme};
use snn_core::data::{load_mnist_idx, split_train_val, Dataset, IdxData};
use snn_core::energy::{
    energy_report, synops_ann, synops_snn, ArchLayer, Architecture, EnergyModel, SynOpsLedger,
};
use snn_core::gradcheck::check_gradient;
use snn_core::ltl::{
    ltl_backward, ltl_loss, student_from_teacher, surrogate_forward, train_hidden_stack, LTLConfig,
    TapeInput,
};
use snn_core::neurons::{
    burst_fire, run_window, run_window_batch, BurstingIFLayer, DoubleExpLIFLayer, SpikeTrain,
};
use snn_core::rng::stage_rng;
use snn_core::teacher::{evaluate_teacher, train_teacher, TeacherConfig, TeacherNetwork};
use snn_core::tensor::Tensor;
use snn_core::ttfs::{
    cache_hidden_counts, calibrate_output_threshold, evaluate_ttfs, loss_l1, loss_l2,
    train_output_layer, update_theta, HiddenCache, TTFSEval, TTFSTrainConfig, ThetaState,
};

fn mnist_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/mnist")
}

/// Teacher classifier applied to the window-mean spike rates: the reference
/// decode every spiking accuracy is compared against.
fn direct_decode_acc(cache: &HiddenCache, labels: &[usize], w: &Tensor, b: &[f64]) -> f64 {
    let n = cache.samples;
    let idx: Vec<usize> = (0..n).collect();
    let mut correct = 0usize;
    for piece in idx.chunks(512) {
        let steps = cache.batch_steps(piece);
        let mut rates = Tensor::zeros(&[piece.len(), cache.neurons]);
        for st in &steps {
            for (acc, &v) in rates.data_mut().iter_mut().zip(st.data()) {
                *acc += v;
            }
        }
        for v in rates.data_mut() {
            *v /= cache.t_window as f64;
        }
        let logits = rates.matmul(&w.transpose()).unwrap();
        for (bi, &s) in piece.iter().enumerate() {
            let row = logits.row(bi);
            let mut best = 0usize;
            let mut best_v = f64::NEG_INFINITY;
            for (c, &x) in row.iter().enumerate() {
                let x = x + b[c];
                if x > best_v {
                    best_v = x;
                    best = c;
                }
            }
            if best == labels[s] {
                correct += 1;
            }
        }
    }
    correct as f64 / n as f64
}

/// Everything criteria 5, 6, 8 and 11 share: the trained MNIST stack with
/// its cached hidden spikes and the timing of each phase.
struct MnistArtifacts {
    data: IdxData,
    teacher: TeacherNetwork,
    teacher_acc: f64,
    teacher_secs: f64,
    tr: Dataset,
    val: Dataset,
    tr_cache: HiddenCache,
    val_cache: HiddenCache,
    student_direct_acc: f64,
    eval: TTFSEval,
    ltl_epochs: usize,
    total_secs: f64,
}

const MASTER_SEED: u64 = 1;
const T_WINDOW: usize = 8;
const GAMMA: u32 = 5;

fn artifacts() -> &'static MnistArtifacts {
    static CELL: OnceLock<MnistArtifacts> = OnceLock::new();
    CELL.get_or_init(|| {
        let t_total = Instant::now();
        let data = load_mnist_idx(&mnist_dir()).expect("MNIST under data/mnist");

        let mut init_rng = stage_rng(MASTER_SEED, "teacher-init");
        let mut teacher = TeacherNetwork::new_mlp(784, &[300, 300], 10, &mut init_rng);
        let t_teacher = Instant::now();
        let mut teacher_rng = stage_rng(MASTER_SEED, "teacher");
        train_teacher(
            &mut teacher,
            &data.train,
            Some(&data.test),
            &TeacherConfig::default(),
            &mut teacher_rng,
        )
        .expect("teacher training");
        let teacher_secs = t_teacher.elapsed().as_secs_f64();
        let teacher_acc = evaluate_teacher(&teacher, &data.test).expect("teacher eval");

        let ltl_cfg = LTLConfig {
            t_window: T_WINDOW,
            ..LTLConfig::default()
        };
        let mut stack = student_from_teacher(&teacher, 1.0, GAMMA).expect("student stack");
        let mut ltl_rng = stage_rng(MASTER_SEED, "ltl");
        train_hidden_stack(&mut stack, &teacher, &data.train, &ltl_cfg, &mut ltl_rng)
            .expect("hidden distillation");

        let mut split_rng = stage_rng(MASTER_SEED, "split");
        let (tr, val) = split_train_val(&data.train, 6000, &mut split_rng);
        let tr_cache = cache_hidden_counts(&stack, &tr, T_WINDOW, 512).expect("train cache");
        let val_cache = cache_hidden_counts(&stack, &val, T_WINDOW, 512).expect("val cache");
        let test_cache =
            cache_hidden_counts(&stack, &data.test, T_WINDOW, 512).expect("test cache");
        let student_direct_acc = direct_decode_acc(
            &test_cache,
            &data.test.labels,
            &teacher.classifier_w,
            &teacher.classifier_b,
        );

        let mut layer =
            DoubleExpLIFLayer::new(teacher.classifier_w.clone(), 2.0, 0.5, 1.0, 1.0)
                .expect("output layer");
        calibrate_output_threshold(&mut layer, &tr_cache, 512).expect("calibration");
        let mut ttfs_rng = stage_rng(MASTER_SEED, "ttfs");
        train_output_layer(
            &mut layer,
            &tr_cache,
            &tr.labels,
            &val_cache,
            &val.labels,
            &TTFSTrainConfig::default(),
            &mut ttfs_rng,
        )
        .expect("output training");
        let eval = evaluate_ttfs(&layer, &test_cache, &data.test.labels, 512).expect("test eval");

        MnistArtifacts {
            data,
            teacher,
            teacher_acc,
            teacher_secs,
            tr,
            val,
            tr_cache,
            val_cache,
            student_direct_acc,
            eval,
            ltl_epochs: ltl_cfg.epochs,
            total_secs: t_total.elapsed().as_secs_f64(),
        }
    })
}

#[test]
fn criterion_01_rate_coding_is_burst_with_unit_gamma() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for case in 0..100 {
        let depth = rng.gen_range(1..=3);
        let t_window = rng.gen_range(1..=8);
        let batch = rng.gen_range(1..=4);
        let input_dim = rng.gen_range(2..=16);
        let requested_gamma = rng.gen_range(2..=8);
        let scheme = CodingAssignment {
            input: InputScheme::Direct,
            hidden: HiddenScheme::Rate,
            output: OutputScheme::Direct,
        };

        let mut dims = vec![input_dim];
        for _ in 0..depth {
            dims.push(rng.gen_range(1..=32));
        }
        let mut rate_stack = Vec::new();
        let mut burst_stack = Vec::new();
        for l in 0..depth {
            let w = Tensor::randn(&[dims[l + 1], dims[l]], 1.0, &mut rng);
            let bias = if rng.gen_bool(0.5) {
                Some((0..dims[l + 1]).map(|_| rng.gen_range(-0.5..0.5)).collect())
            } else {
                None
            };
            let v_th = rng.gen_range(0.3..1.5);
            rate_stack.push(
                BurstingIFLayer::new(
                    w.clone(),
                    bias.clone(),
                    v_th,
                    scheme.effective_gamma(requested_gamma),
                )
                .unwrap(),
            );
            burst_stack.push(BurstingIFLayer::new(w, bias, v_th, 1).unwrap());
        }

        let input = Tensor::randn(&[batch, input_dim], 1.0, &mut rng);
        let rate_hist = run_window_batch(&rate_stack, &input, t_window).unwrap();
        let burst_hist = run_window_batch(&burst_stack, &input, t_window).unwrap();
        for l in 0..depth {
            for s in 0..batch {
                let a = rate_hist.train(l, s);
                let b = burst_hist.train(l, s);
                assert_eq!(
                    a.counts(),
                    b.counts(),
                    "criterion 1: FAIL — case {case} layer {l} sample {s} differs"
                );
                assert!(
                    a.max_count() <= 1,
                    "criterion 1: FAIL — rate-coded spikes must be binary"
                );
            }
        }
        // the sequential single-sample path must agree too
        let first: Vec<f64> = input.row(0).to_vec();
        let ra = run_window(&mut rate_stack, &first, t_window).unwrap();
        let rb = run_window(&mut burst_stack, &first, t_window).unwrap();
        for l in 0..depth {
            assert_eq!(
                ra[l].counts(),
                rb[l].counts(),
                "criterion 1: FAIL — case {case} per-sample path differs at layer {l}"
            );
        }
    }
    println!("criterion 1: PASS — 100 random stacks, rate scheme bit-identical to burst at gamma 1");
}

#[test]
fn criterion_02_burst_step_conserves_charge() {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let weights = Tensor::from_vec(&[1, 1], vec![1.0]).unwrap();
    for i in 0..100_000 {
        let v_before: f64 = rng.gen_range(-5.0..5.0);
        let current: f64 = rng.gen_range(-5.0..5.0);
        let v_th: f64 = rng.gen_range(0.1..3.0);
        let gamma: u32 = rng.gen_range(1..=10);

        let mut layer = BurstingIFLayer::new(weights.clone(), None, v_th, gamma).unwrap();
        layer.v[0] = v_before;
        let spikes = layer.burst_step(&[current]).unwrap();
        let s = spikes[0];

        assert!(
            (s as u32) <= gamma,
            "criterion 2: FAIL — tuple {i}: burst size {s} above gamma {gamma}"
        );
        // identical operation order as the step itself, so equality is exact
        let charged = v_before + current;
        assert_eq!(s, burst_fire(charged, v_th, gamma), "criterion 2: FAIL — tuple {i}");
        let expected = charged - s as f64 * v_th;
        assert_eq!(
            layer.v[0], expected,
            "criterion 2: FAIL — tuple {i}: residual {} vs {expected}",
            layer.v[0]
        );
    }
    println!("criterion 2: PASS — 100000 random tuples conserve charge exactly");
}

#[test]
fn criterion_03_ltl_backward_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut worst: f64 = 0.0;
    for case in 0..20 {
        let fan_in = rng.gen_range(2..=8);
        let neurons = rng.gen_range(2..=16);
        let batch = rng.gen_range(1..=3);
        let t_window = rng.gen_range(1..=8);
        let r = [0.5, 1.0, 2.0][case % 3];
        let v_th = 1.0;
        let weights = Tensor::randn(&[neurons, fan_in], 0.7, &mut rng);
        let bias: Option<Vec<f64>> = if case % 2 == 0 {
            Some((0..neurons).map(|_| rng.gen_range(-0.3..0.3)).collect())
        } else {
            None
        };
        let input = if case % 3 == 0 {
            TapeInput::Static(Tensor::randn(&[batch, fan_in], 1.0, &mut rng))
        } else {
            let steps = (0..t_window)
                .map(|_| {
                    let mut m = Tensor::randn(&[batch, fan_in], 1.0, &mut rng);
                    for v in m.data_mut() {
                        *v = v.abs().floor().min(4.0);
                    }
                    m
                })
                .collect();
            TapeInput::PerStep(steps)
        };
        let targets = Tensor::randn(&[batch, neurons], 1.0, &mut rng);

        let tape = surrogate_forward(&weights, bias.as_deref(), &input, t_window, v_th).unwrap();
        let grads = ltl_backward(&tape, &targets, r, true).unwrap();

        let loss_w = |w: &Tensor| {
            let t = surrogate_forward(w, bias.as_deref(), &input, t_window, v_th).unwrap();
            ltl_loss(&targets, &t.mean_rates(), r).unwrap()
        };
        let err_w = check_gradient(loss_w, &weights, &grads.d_weights, 1e-5).unwrap();
        worst = worst.max(err_w);
        assert!(
            err_w <= 1e-4,
            "criterion 3: FAIL — case {case} weight grad rel err {err_w:.3e}"
        );

        if let Some(b) = &bias {
            let bt = Tensor::from_vec(&[1, neurons], b.clone()).unwrap();
            let analytic = Tensor::from_vec(&[1, neurons], grads.d_bias.clone()).unwrap();
            let loss_b = |probe: &Tensor| {
                let t = surrogate_forward(
                    &weights,
                    Some(probe.data()),
                    &input,
                    t_window,
                    v_th,
                )
                .unwrap();
                ltl_loss(&targets, &t.mean_rates(), r).unwrap()
            };
            let err_b = check_gradient(loss_b, &bt, &analytic, 1e-5).unwrap();
            worst = worst.max(err_b);
            assert!(
                err_b <= 1e-4,
                "criterion 3: FAIL — case {case} bias grad rel err {err_b:.3e}"
            );
        }
    }
    println!("criterion 3: PASS — 20 random layers, worst rel err {worst:.3e} (tolerance 1e-4)");
}

#[test]
fn criterion_04_ttfs_loss_gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let mut worst: f64 = 0.0;
    for case in 0..20 {
        let hidden = rng.gen_range(4..=12);
        let classes = rng.gen_range(3..=6);
        let samples = 24usize;
        let t_window = rng.gen_range(4..=8);
        let v_th = rng.gen_range(0.8..1.6);
        let k0 = rng.gen_range(1.2..2.4);
        let tau_m = 2.0;
        let tau_s = 0.5;

        let steps: Vec<Tensor> = (0..t_window)
            .map(|_| {
                let mut m = Tensor::zeros(&[samples, hidden]);
                for v in m.data_mut() {
                    *v = rng.gen_range(0..=4) as f64;
                }
                m
            })
            .collect();
        let cache = HiddenCache::from_steps(&steps).unwrap();
        let labels: Vec<usize> = (0..samples).map(|_| rng.gen_range(0..classes)).collect();
        let weights = Tensor::randn(&[classes, hidden], 0.3, &mut rng);
        let layer = DoubleExpLIFLayer::new(weights.clone(), tau_m, tau_s, v_th, k0).unwrap();

        // reproduce the theta the first training step will use: one
        // validation pass of the untouched layer through the public schedule
        let pre = evaluate_ttfs(&layer, &cache, &labels, samples).unwrap();
        let theta = update_theta(ThetaState::initial(), pre.acc_tf, pre.acc_t).theta;

        // recover the implementation's gradient from a single full-batch SGD
        // step: the first momentum update is the raw gradient
        let cfg = TTFSTrainConfig {
            alpha: 2.0,
            beta: 5.0,
            epochs: 1,
            batch_size: samples,
            lr: 1e-3,
            momentum: 0.0,
            lr_decay_every: 0,
            lr_decay_gamma: 0.5,
        };
        let mut trained = layer.clone();
        let mut step_rng = ChaCha8Rng::seed_from_u64(9000 + case as u64);
        train_output_layer(
            &mut trained,
            &cache,
            &labels,
            &cache,
            &labels,
            &cfg,
            &mut step_rng,
        )
        .unwrap();
        let mut analytic = Tensor::zeros(&[classes, hidden]);
        for i in 0..analytic.len() {
            analytic.data_mut()[i] =
                (weights.data()[i] - trained.weights.data()[i]) / cfg.lr;
        }

        // independent kernel trace: double-exponential PSP per hidden unit,
        // frozen at each sample's first-spike time from the reference forward
        let base = snn_core::ttfs::ttfs_forward_batch(&layer, &steps).unwrap();
        let dm = (-1.0 / tau_m).exp();
        let ds = (-1.0 / tau_s).exp();
        let mut k_fixed = Tensor::zeros(&[samples, hidden]);
        for b in 0..samples {
            let mut m = vec![0.0f64; hidden];
            let mut i_syn = vec![0.0f64; hidden];
            for t in 0..base.t_f[b] {
                for n in 0..hidden {
                    let c = steps[t].at(b, n);
                    m[n] = dm * (m[n] + c);
                    i_syn[n] = ds * (i_syn[n] + c);
                }
            }
            for n in 0..hidden {
                k_fixed.row_mut(b)[n] = k0 * (m[n] - i_syn[n]);
            }
        }
        for i in 0..k_fixed.len() {
            assert!(
                (k_fixed.data()[i] - base.k_at_tf.data()[i]).abs() <= 1e-9,
                "criterion 4: FAIL — case {case}: kernel trace disagrees with the oracle"
            );
        }

        let loss_of = |w: &Tensor| {
            let v = k_fixed.matmul(&w.transpose()).unwrap();
            let mut total = 0.0;
            for b in 0..samples {
                total += cfg.alpha * loss_l1(v.row(b), labels[b])
                    + cfg.beta * loss_l2(v.row(b), labels[b], theta, v_th);
            }
            total / samples as f64
        };
        let err = check_gradient(loss_of, &weights, &analytic, 1e-5).unwrap();
        worst = worst.max(err);
        assert!(
            err <= 1e-4,
            "criterion 4: FAIL — case {case} rel err {err:.3e} (theta {theta:.3})"
        );
    }
    println!("criterion 4: PASS — 20 random instances, worst rel err {worst:.3e} (tolerance 1e-4)");
}

#[test]
fn criterion_05_mnist_stack_end_to_end() {
    let a = artifacts();
    assert!(
        a.teacher_acc >= 0.97,
        "criterion 5: FAIL — teacher accuracy {:.4} below 0.97",
        a.teacher_acc
    );
    assert!(
        a.teacher_secs < 900.0,
        "criterion 5: FAIL — teacher took {:.0}s, budget 900s",
        a.teacher_secs
    );
    assert!(
        a.ltl_epochs <= 10,
        "criterion 5: FAIL — distillation used {} epochs",
        a.ltl_epochs
    );
    assert!(
        a.student_direct_acc >= a.teacher_acc - 0.015,
        "criterion 5: FAIL — student direct decode {:.4} not within 1.5% of teacher {:.4}",
        a.student_direct_acc,
        a.teacher_acc
    );
    assert!(
        a.eval.acc_tf >= a.student_direct_acc - 0.010,
        "criterion 5: FAIL — TTFS accuracy {:.4} not within 1.0% of direct decode {:.4}",
        a.eval.acc_tf,
        a.student_direct_acc
    );
    assert!(
        a.eval.mean_tf <= 0.75 * T_WINDOW as f64,
        "criterion 5: FAIL — mean t_f {:.3} above {:.1}",
        a.eval.mean_tf,
        0.75 * T_WINDOW as f64
    );
    assert!(
        a.total_secs < 2700.0,
        "criterion 5: FAIL — full stack took {:.0}s, budget 2700s",
        a.total_secs
    );
    println!(
        "criterion 5: PASS — teacher {:.4} in {:.0}s, student direct {:.4}, TTFS {:.4} at mean t_f {:.3}, total {:.0}s",
        a.teacher_acc, a.teacher_secs, a.student_direct_acc, a.eval.acc_tf, a.eval.mean_tf, a.total_secs
    );
}

#[test]
fn criterion_06_gamma_ablation_trend() {
    let a = artifacts();
    let t0 = Instant::now();

    // precondition for the gamma 1 claim: the teacher really produces
    // activations above the one-spike-per-step ceiling
    let (first, _) = a.data.train.batch(&(0..512).collect::<Vec<_>>());
    let snap = a.teacher.snapshot_activations(&first).unwrap();
    let max_act = snap
        .activations
        .iter()
        .flat_map(|t| t.data().iter().cloned())
        .fold(0.0f64, f64::max);
    assert!(
        max_act > 1.0,
        "criterion 6: FAIL — precondition broken, teacher peak activation {max_act:.3}"
    );

    let ltl_cfg = LTLConfig {
        t_window: T_WINDOW,
        ..LTLConfig::default()
    };
    let mut accs = std::collections::BTreeMap::new();
    accs.insert(GAMMA, a.student_direct_acc);
    for gamma in [1u32, 2, 10] {
        let mut stack = student_from_teacher(&a.teacher, 1.0, gamma).unwrap();
        let mut rng = stage_rng(MASTER_SEED, "ltl");
        train_hidden_stack(&mut stack, &a.teacher, &a.data.train, &ltl_cfg, &mut rng).unwrap();
        let cache = cache_hidden_counts(&stack, &a.data.test, T_WINDOW, 512).unwrap();
        let acc = direct_decode_acc(
            &cache,
            &a.data.test.labels,
            &a.teacher.classifier_w,
            &a.teacher.classifier_b,
        );
        accs.insert(gamma, acc);
    }

    let plateau = [accs[&2], accs[&5], accs[&10]];
    for (i, &x) in plateau.iter().enumerate() {
        for &y in plateau.iter().skip(i + 1) {
            assert!(
                (x - y).abs() <= 0.005,
                "criterion 6: FAIL — gamma 2/5/10 spread {:.4} above 0.005: {accs:?}",
                (x - y).abs()
            );
        }
    }
    let floor = plateau.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(
        accs[&1] < floor,
        "criterion 6: FAIL — gamma 1 at {:.4} is not strictly below the plateau {:.4}",
        accs[&1],
        floor
    );
    let secs = t0.elapsed().as_secs_f64();
    assert!(secs < 3600.0, "criterion 6: FAIL — took {secs:.0}s, budget 3600s");
    println!(
        "criterion 6: PASS — accuracies gamma 1/2/5/10 = {:.4}/{:.4}/{:.4}/{:.4}, teacher peak activation {max_act:.2}, {secs:.0}s",
        accs[&1], accs[&2], accs[&5], accs[&10]
    );
}

#[test]
fn criterion_07_theta_schedule_values() {
    let s = update_theta(ThetaState::initial(), 0.8, 0.9);
    assert!(
        (s.theta - (1.0 - 8.0 / 9.0)).abs() < 1e-12,
        "criterion 7: FAIL — theta(0.8, 0.9) = {}",
        s.theta
    );
    assert_eq!(s.acc_tf, 0.8);
    assert_eq!(s.acc_t, 0.9);

    // clamp at equal and at inverted accuracies
    assert_eq!(update_theta(s, 0.9, 0.9).theta, 0.0, "criterion 7: FAIL — no clamp at equality");
    assert_eq!(update_theta(s, 0.95, 0.9).theta, 0.0, "criterion 7: FAIL — no clamp when tf leads");
    // degenerate denominators
    assert_eq!(update_theta(s, 0.0, 0.5).theta, 1.0, "criterion 7: FAIL — dead readout");
    assert_eq!(update_theta(s, 0.0, 0.0).theta, 0.0, "criterion 7: FAIL — zero acc_t");
    println!("criterion 7: PASS — schedule reproduces 1 - 8/9 and clamps at acc_tf >= acc_t");
}

#[test]
fn criterion_08_latency_advances_and_dual_loss_holds_accuracy() {
    let a = artifacts();
    let t0 = Instant::now();
    let mut tf0_sum = 0.0;
    let mut tf5_sum = 0.0;
    let mut beta0_final = 0.0;
    let mut dual_final = 0.0;
    let seeds = [7u64, 8, 9];
    for &seed in &seeds {
        let mut init_rng = ChaCha8Rng::seed_from_u64(seed);
        let w0 = Tensor::randn(&[10, 300], 0.1, &mut init_rng);
        let mut base = DoubleExpLIFLayer::new(w0, 2.0, 0.5, 1.0, 1.0).unwrap();
        calibrate_output_threshold(&mut base, &a.tr_cache, 512).unwrap();
        for beta in [0.0, 2.0] {
            let mut layer = base.clone();
            let cfg = TTFSTrainConfig {
                beta,
                ..TTFSTrainConfig::default()
            };
            let mut rng = ChaCha8Rng::seed_from_u64(seed * 100 + 1);
            let report = train_output_layer(
                &mut layer,
                &a.tr_cache,
                &a.tr.labels,
                &a.val_cache,
                &a.val.labels,
                &cfg,
                &mut rng,
            )
            .unwrap();
            if beta == 0.0 {
                tf0_sum += report.curves[0].mean_tf;
                tf5_sum += report.curves[5].mean_tf;
                beta0_final += report.final_acc_tf;
            } else {
                dual_final += report.final_acc_tf;
            }
        }
    }
    let n = seeds.len() as f64;
    let (tf0, tf5) = (tf0_sum / n, tf5_sum / n);
    let (acc_b0, acc_dual) = (beta0_final / n, dual_final / n);
    assert!(
        tf5 < tf0,
        "criterion 8: FAIL — mean t_f did not advance: epoch 0 {tf0:.4}, epoch 5 {tf5:.4}"
    );
    assert!(
        acc_dual >= acc_b0,
        "criterion 8: FAIL — dual loss {acc_dual:.4} below the beta=0 baseline {acc_b0:.4}"
    );
    let secs = t0.elapsed().as_secs_f64();
    assert!(secs < 1800.0, "criterion 8: FAIL — took {secs:.0}s, budget 1800s");
    println!(
        "criterion 8: PASS — 3 seeds: mean t_f {tf0:.3} -> {tf5:.3} by epoch 5, final acc beta0 {acc_b0:.4} vs dual {acc_dual:.4}, {secs:.0}s"
    );
}

/// Count per-connection MACs the slow way: one increment per (output unit,
/// kernel tap) pair, with no reference to the library's fan-in shortcut.
fn brute_force_ann(arch: &Architecture) -> u64 {
    let mut total = 0u64;
    for layer in &arch.layers {
        match layer {
            ArchLayer::Dense { inputs, outputs } => {
                for _ in 0..*inputs {
                    for _ in 0..*outputs {
                        total += 1;
                    }
                }
            }
            ArchLayer::Conv {
                c_in,
                h,
                w,
                f,
                kh,
                kw,
                stride,
                padding,
            } => {
                let oh = (h + 2 * padding - kh) / stride + 1;
                let ow = (w + 2 * padding - kw) / stride + 1;
                for _ in 0..*f {
                    for _ in 0..oh {
                        for _ in 0..ow {
                            total += (c_in * kh * kw) as u64;
                        }
                    }
                }
            }
        }
    }
    total
}

/// Per-spike accumulate count from the input side: for every spike, walk the
/// downstream layer's geometry and count the output units it actually
/// reaches (padding-clipped positions excluded).
fn brute_force_snn(trains: &[SpikeTrain], arch: &Architecture) -> u64 {
    let mut total = 0u64;
    for (l, train) in trains.iter().enumerate() {
        let downstream = &arch.layers[l + 1];
        for j in 0..train.neurons() {
            let mut spikes = 0u64;
            for t in 0..train.window() {
                spikes += train.count(j, t) as u64;
            }
            if spikes == 0 {
                continue;
            }
            let reach: u64 = match downstream {
                ArchLayer::Dense { outputs, .. } => *outputs as u64,
                ArchLayer::Conv {
                    h,
                    w,
                    f,
                    kh,
                    kw,
                    stride,
                    padding,
                    ..
                } => {
                    let oh = (h + 2 * padding - kh) / stride + 1;
                    let ow = (w + 2 * padding - kw) / stride + 1;
                    let iy = (j % (h * w)) / w;
                    let ix = j % w;
                    let mut rows = 0u64;
                    for oy in 0..oh {
                        let tap = iy as isize + *padding as isize - (oy * stride) as isize;
                        if tap >= 0 && (tap as usize) < *kh {
                            rows += 1;
                        }
                    }
                    let mut cols = 0u64;
                    for ox in 0..ow {
                        let tap = ix as isize + *padding as isize - (ox * stride) as isize;
                        if tap >= 0 && (tap as usize) < *kw {
                            cols += 1;
                        }
                    }
                    rows * cols * *f as u64
                }
            };
            total += spikes * reach;
        }
    }
    total
}

#[test]
fn criterion_09_synops_oracle_and_energy_arithmetic() {
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    for case in 0..20 {
        // grow a random valid chain, spatial shapes feeding conv layers
        let depth = rng.gen_range(1..=3);
        let mut layers = Vec::new();
        let mut spatial: Option<(usize, usize, usize)> = if rng.gen_bool(0.6) {
            Some((rng.gen_range(1..=2), rng.gen_range(3..=6), rng.gen_range(3..=6)))
        } else {
            None
        };
        let mut flat = spatial.map_or(rng.gen_range(2..=12), |(c, h, w)| c * h * w);
        for _ in 0..depth {
            let conv_ok = spatial.is_some() && rng.gen_bool(0.5);
            if conv_ok {
                let (c, h, w) = spatial.unwrap();
                let kh = rng.gen_range(1..=h.min(3));
                let kw = rng.gen_range(1..=w.min(3));
                let stride = rng.gen_range(1..=2);
                let padding = rng.gen_range(0..=1);
                let f = rng.gen_range(1..=3);
                layers.push(ArchLayer::Conv {
                    c_in: c,
                    h,
                    w,
                    f,
                    kh,
                    kw,
                    stride,
                    padding,
                });
                let oh = (h + 2 * padding - kh) / stride + 1;
                let ow = (w + 2 * padding - kw) / stride + 1;
                spatial = Some((f, oh, ow));
                flat = f * oh * ow;
            } else {
                let outputs = rng.gen_range(1..=12);
                layers.push(ArchLayer::Dense {
                    inputs: flat,
                    outputs,
                });
                spatial = None;
                flat = outputs;
            }
        }
        let arch = Architecture { layers };

        assert_eq!(
            synops_ann(&arch).unwrap(),
            brute_force_ann(&arch),
            "criterion 9: FAIL — ANN MACs differ on case {case}"
        );

        let t_window = rng.gen_range(1..=4);
        let mut trains = Vec::new();
        for l in 1..arch.layers.len() {
            let neurons = arch.layers[l].input_count();
            let mut train = SpikeTrain::new(neurons, t_window);
            for n in 0..neurons {
                for t in 0..t_window {
                    train.set_count(n, t, rng.gen_range(0..=3));
                }
            }
            trains.push(train);
        }
        assert_eq!(
            synops_snn(&trains, &arch).unwrap(),
            brute_force_snn(&trains, &arch),
            "criterion 9: FAIL — SNN accumulates differ on case {case}"
        );
    }

    // the published arithmetic: a 0.49 SynOps ratio under 32-bit float
    // constants is a 10.43x saving
    let ledger = SynOpsLedger {
        ann_macs: 100,
        snn_acs: 49,
        snn_macs: 0,
    };
    let report = energy_report(&ledger, &EnergyModel::float32()).unwrap();
    assert!(
        (report.ratio - 0.49).abs() < 1e-12,
        "criterion 9: FAIL — ratio {}",
        report.ratio
    );
    assert!(
        (report.saving - 10.43).abs() <= 0.01,
        "criterion 9: FAIL — saving {:.4} not within 0.01 of 10.43",
        report.saving
    );
    println!(
        "criterion 9: PASS — 20 architectures match brute-force enumeration, ratio 0.49 -> saving {:.4}",
        report.saving
    );
}

#[test]
fn criterion_10_sound_localization_desk_scale() {
    use snn_core::audio::experiment::{run_localization_experiment, LocalizationConfig};
    let t0 = Instant::now();
    let cfg = LocalizationConfig::default();
    let report = run_localization_experiment(&cfg, 20250823).unwrap();

    let clean = report
        .conditions
        .iter()
        .find(|c| c.condition == "clean")
        .expect("clean condition present");
    assert!(
        clean.mae_deg <= 15.0,
        "criterion 10: FAIL — clean MAE {:.2} deg above 15",
        clean.mae_deg
    );
    assert!(
        clean.accuracy >= 0.40,
        "criterion 10: FAIL — clean accuracy {:.3} below 0.40",
        clean.accuracy
    );
    assert!(
        clean.mean_tf < cfg.t_window as f64,
        "criterion 10: FAIL — mean t_f {:.2} not below T={}",
        clean.mean_tf,
        cfg.t_window
    );

    // noise robustness: MAE must not improve as the SNR drops or as more
    // spikes are deleted (rows are seed-averaged by the harness)
    let snr: Vec<&_> = report.conditions.iter().filter(|c| c.condition == "snr").collect();
    assert_eq!(snr.len(), cfg.snr_grid_db.len());
    for pair in snr.windows(2) {
        assert!(
            pair[1].mae_deg >= pair[0].mae_deg,
            "criterion 10: FAIL — MAE dropped from {:.2} to {:.2} going {} -> {} dB",
            pair[0].mae_deg,
            pair[1].mae_deg,
            pair[0].param,
            pair[1].param
        );
    }
    let del: Vec<&_> = report
        .conditions
        .iter()
        .filter(|c| c.condition == "deletion")
        .collect();
    assert_eq!(del.len(), cfg.deletion_grid.len());
    for pair in del.windows(2) {
        assert!(
            pair[1].mae_deg >= pair[0].mae_deg,
            "criterion 10: FAIL — MAE dropped from {:.2} to {:.2} at deletion {} -> {}",
            pair[0].mae_deg,
            pair[1].mae_deg,
            pair[0].param,
            pair[1].param
        );
    }
    let secs = t0.elapsed().as_secs_f64();
    assert!(secs < 3600.0, "criterion 10: FAIL — took {secs:.0}s, budget 3600s");
    let snr_maes: Vec<String> = snr.iter().map(|c| format!("{:.2}", c.mae_deg)).collect();
    let del_maes: Vec<String> = del.iter().map(|c| format!("{:.2}", c.mae_deg)).collect();
    println!(
        "criterion 10: PASS — clean MAE {:.2} deg, acc {:.3}, mean t_f {:.2}; SNR MAE [{}], deletion MAE [{}], {secs:.0}s",
        clean.mae_deg,
        clean.accuracy,
        clean.mean_tf,
        snr_maes.join(", "),
        del_maes.join(", ")
    );
}

#[test]
fn criterion_11_early_decisions_are_at_least_as_accurate() {
    let a = artifacts();
    let mut sorted = a.eval.t_f.clone();
    sorted.sort_unstable();
    let median = sorted[sorted.len() / 2];

    let acc_of = |keep: &dyn Fn(usize) -> bool| -> Option<f64> {
        let mut n = 0usize;
        let mut c = 0usize;
        for (i, &tf) in a.eval.t_f.iter().enumerate() {
            if keep(tf) {
                n += 1;
                if a.eval.correct_tf[i] {
                    c += 1;
                }
            }
        }
        (n > 0).then(|| c as f64 / n as f64)
    };

    // strict split when the median leaves samples on both sides, otherwise
    // fold the median bucket into the early side (heavy ties at t_f = 1)
    let (below, above) = match (acc_of(&|tf| tf < median), acc_of(&|tf| tf > median)) {
        (Some(b), Some(u)) => (b, Some(u)),
        _ => (acc_of(&|tf| tf <= median).expect("nonempty"), acc_of(&|tf| tf > median)),
    };
    match above {
        Some(u) => {
            assert!(
                below >= u,
                "criterion 11: FAIL — early accuracy {below:.4} below late accuracy {u:.4}"
            );
            println!(
                "criterion 11: PASS — median t_f {median}, early {below:.4} >= late {u:.4}"
            );
        }
        None => {
            println!(
                "criterion 11: PASS — all {} samples decide at t_f {median}, accuracy {below:.4}",
                a.eval.t_f.len()
            );
        }
    }
}

#[test]
fn criterion_12_pipeline_runs_are_byte_identical() {
    use snn_core::config::{PipelineConfig, TaskKind};
    use snn_core::optim::LrSchedule;
    use snn_core::pipeline::run_pipeline;

    let make_cfg = |out: &std::path::Path| {
        let mut cfg = PipelineConfig::default_for(TaskKind::SoundLoc);
        cfg.seed = 11;
        cfg.out_dir = out.to_path_buf();
        cfg.hidden_dims = vec![64];
        cfg.t_window = 8;
        cfg.ltl.t_window = 8;
        cfg.audio.classes = 12;
        cfg.audio.train_per_class = 6;
        cfg.audio.test_per_class = 2;
        cfg.audio.frame_len = 1024;
        cfg.audio.snr_grid_db = vec![10.0];
        cfg.audio.deletion_grid = vec![0.5];
        cfg.audio.noise_seeds = 1;
        cfg.teacher.epochs = 12;
        cfg.teacher.batch_size = 16;
        cfg.teacher.schedule = LrSchedule::Cosine { total: 12 };
        cfg.ltl.epochs = 2;
        cfg.ltl.batch_size = 16;
        cfg.ltl.monitor_samples = 72;
        cfg.ttfs.epochs = 20;
        cfg.ttfs.batch_size = 16;
        cfg.val_fraction = 0.2;
        cfg
    };

    let base = std::env::temp_dir().join(format!("snn_acceptance_c12_{}", std::process::id()));
    let dir_a = base.join("a");
    let dir_b = base.join("b");
    for d in [&dir_a, &dir_b] {
        if d.exists() {
            std::fs::remove_dir_all(d).unwrap();
        }
    }
    run_pipeline(&make_cfg(&dir_a), false).unwrap();
    run_pipeline(&make_cfg(&dir_b), false).unwrap();

    let metric_files = [
        "teacher_curve.csv",
        "ltl_curves.csv",
        "ttfs_curves.csv",
        "loc_metrics.csv",
        "decision_histogram.csv",
        "energy.csv",
        "energy.json",
    ];
    for f in metric_files {
        let a = std::fs::read(dir_a.join(f)).unwrap_or_else(|_| panic!("{f} missing in run a"));
        let b = std::fs::read(dir_b.join(f)).unwrap_or_else(|_| panic!("{f} missing in run b"));
        assert_eq!(a, b, "criterion 12: FAIL — {f} differs between identical runs");
    }
    std::fs::remove_dir_all(&base).ok();
    println!(
        "criterion 12: PASS — {} metric files byte-identical across two seeded runs",
        metric_files.len()
    );
}
