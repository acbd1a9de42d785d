//! Scratch probe: TTFS dynamics from random output init (3 seeds, beta 0 vs
//! dual) and the gamma ablation margins, reusing runs/debug_image checkpoints.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use snn_core::checkpoint::{load_hidden_stack, load_teacher};
use snn_core::data::{load_mnist_idx, split_train_val};
use snn_core::ltl::{student_from_teacher, train_hidden_stack, LTLConfig};
use snn_core::neurons::DoubleExpLIFLayer;
use snn_core::tensor::Tensor;
use snn_core::ttfs::{
    cache_hidden_counts, calibrate_output_threshold, train_output_layer, HiddenCache,
    TTFSTrainConfig,
};
use std::path::Path;
use std::time::Instant;

fn direct_acc(
    cache: &HiddenCache,
    labels: &[usize],
    w: &Tensor,
    b: &[f64],
    t_window: usize,
) -> f64 {
    let n = cache.samples;
    let mut rates = Tensor::zeros(&[n, cache.neurons]);
    let idx: Vec<usize> = (0..n).collect();
    for piece in idx.chunks(512) {
        let steps = cache.batch_steps(piece);
        for (bi, &s) in piece.iter().enumerate() {
            let row = rates.row_mut(s);
            for st in &steps {
                for (r, &c) in row.iter_mut().zip(st.row(bi)) {
                    *r += c;
                }
            }
        }
    }
    for v in rates.data_mut() {
        *v /= t_window as f64;
    }
    let logits = rates.matmul(&w.transpose()).unwrap();
    let mut correct = 0usize;
    for s in 0..n {
        let row = logits.row(s);
        let mut best = 0usize;
        let mut bv = f64::NEG_INFINITY;
        for (c, &x) in row.iter().enumerate() {
            let x = x + b[c];
            if x > bv {
                bv = x;
                best = c;
            }
        }
        if best == labels[s] {
            correct += 1;
        }
    }
    correct as f64 / n as f64
}

fn main() {
    let t0 = Instant::now();
    let data = load_mnist_idx(Path::new("data/mnist")).unwrap();
    let teacher = load_teacher(Path::new("runs/debug_image/teacher.ckpt")).unwrap();
    let stack = load_hidden_stack(Path::new("runs/debug_image/hidden.ckpt")).unwrap();
    let t_window = 8usize;

    // precondition for the gamma ablation: teacher activations above 1
    let (first, _) = data.train.batch(&(0..512).collect::<Vec<_>>());
    let snap = teacher.snapshot_activations(&first).unwrap();
    let mut max_act: f64 = 0.0;
    for a in &snap.activations {
        for &v in a.data() {
            max_act = max_act.max(v);
        }
    }
    println!("teacher max activation over 512 samples: {max_act:.3}");

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (tr, val) = split_train_val(&data.train, 6000, &mut rng);
    println!("[{:.0}s] caching hidden counts", t0.elapsed().as_secs_f64());
    let tr_cache = cache_hidden_counts(&stack, &tr, t_window, 512).unwrap();
    let val_cache = cache_hidden_counts(&stack, &val, t_window, 512).unwrap();
    println!("[{:.0}s] caches ready", t0.elapsed().as_secs_f64());

    // --- part A: beta 0 vs dual from random init, 3 seeds -------------------
    for seed in [7u64, 8, 9] {
        let mut init_rng = ChaCha8Rng::seed_from_u64(seed);
        let w0 = Tensor::randn(&[10, 300], 0.1, &mut init_rng);
        let mut base = DoubleExpLIFLayer::new(w0, 2.0, 0.5, 1.0, 1.0).unwrap();
        let v_th = calibrate_output_threshold(&mut base, &tr_cache, 512).unwrap();
        for (label, beta) in [("beta0", 0.0), ("dual ", 2.0)] {
            let mut layer = base.clone();
            let cfg = TTFSTrainConfig {
                beta,
                ..TTFSTrainConfig::default()
            };
            let mut train_rng = ChaCha8Rng::seed_from_u64(seed * 100 + 1);
            let report = train_output_layer(
                &mut layer,
                &tr_cache,
                &tr.labels,
                &val_cache,
                &val.labels,
                &cfg,
                &mut train_rng,
            )
            .unwrap();
            println!(
                "[{:.0}s] seed {seed} {label} v_th {v_th:.3}: tf0 {:.3} tf5 {:.3} tf_final {:.3} acc_final {:.4}",
                t0.elapsed().as_secs_f64(),
                report.curves[0].mean_tf,
                report.curves[5].mean_tf,
                report.final_mean_tf,
                report.final_acc_tf,
            );
        }
    }

    // --- part B: gamma ablation -------------------------------------------
    let acc5 = direct_acc(
        &cache_hidden_counts(&stack, &data.test, t_window, 512).unwrap(),
        &data.test.labels,
        &teacher.classifier_w,
        &teacher.classifier_b,
        t_window,
    );
    println!("[{:.0}s] gamma 5 (loaded stack) test acc {acc5:.4}", t0.elapsed().as_secs_f64());
    for gamma in [1u32, 2, 10] {
        let mut s = student_from_teacher(&teacher, 1.0, gamma).unwrap();
        let mut ltl_rng = ChaCha8Rng::seed_from_u64(400 + gamma as u64);
        let cfg = LTLConfig::default();
        train_hidden_stack(&mut s, &teacher, &data.train, &cfg, &mut ltl_rng).unwrap();
        let cache = cache_hidden_counts(&s, &data.test, t_window, 512).unwrap();
        let acc = direct_acc(
            &cache,
            &data.test.labels,
            &teacher.classifier_w,
            &teacher.classifier_b,
            t_window,
        );
        println!(
            "[{:.0}s] gamma {gamma} test acc {acc:.4}",
            t0.elapsed().as_secs_f64()
        );
    }
}
