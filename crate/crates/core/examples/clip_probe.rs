//! Scratch probe: teacher activation tails and ANN accuracy under hard
//! activation caps, for the current weight decay and stronger ones.

use rand_chacha::rand_core::SeedableRng;
use snn_core::data::{load_mnist_idx, Dataset};
use snn_core::rng::stage_rng;
use snn_core::teacher::{train_teacher, TeacherConfig, TeacherNetwork};
use snn_core::tensor::Tensor;
use std::path::Path;

fn capped_acc(net: &TeacherNetwork, ds: &Dataset, cap: f64) -> f64 {
    let idx: Vec<usize> = (0..ds.len()).collect();
    let mut correct = 0usize;
    for piece in idx.chunks(512) {
        let (x, labels) = ds.batch(piece);
        // recompute the chain with every hidden layer capped
        let mut h = x;
        for layer in &net.hidden {
            let snn_core::teacher::TeacherLayer::Dense { w, b } = layer else {
                panic!("dense only");
            };
            let mut next = h.matmul(&w.transpose()).unwrap();
            for r in 0..next.rows() {
                for (v, &bv) in next.row_mut(r).iter_mut().zip(b.iter()) {
                    *v = (*v + bv).max(0.0).min(cap);
                }
            }
            h = next;
        }
        let logits = h.matmul(&net.classifier_w.transpose()).unwrap();
        for (bi, &label) in labels.iter().enumerate() {
            let row = logits.row(bi);
            let mut best = 0;
            let mut bv = f64::NEG_INFINITY;
            for (c, &v) in row.iter().enumerate() {
                let v = v + net.classifier_b[c];
                if v > bv {
                    bv = v;
                    best = c;
                }
            }
            if best == label {
                correct += 1;
            }
        }
    }
    correct as f64 / ds.len() as f64
}

fn report(tag: &str, net: &TeacherNetwork, data: &snn_core::data::IdxData) {
    let (x, _) = data.train.batch(&(0..4096).collect::<Vec<_>>());
    let snap = net.snapshot_activations(&x).unwrap();
    for (l, a) in snap.activations.iter().enumerate() {
        let mut v: Vec<f64> = a.data().to_vec();
        v.sort_by(|p, q| p.partial_cmp(q).unwrap());
        let n = v.len();
        let q = |p: f64| v[((n as f64 * p) as usize).min(n - 1)];
        let above = |t: f64| v.iter().filter(|&&x| x > t).count() as f64 / n as f64;
        println!(
            "{tag} layer {l}: p99 {:.2} p999 {:.2} max {:.2}  frac>1 {:.4} frac>2 {:.4} frac>5 {:.4}",
            q(0.99),
            q(0.999),
            v[n - 1],
            above(1.0),
            above(2.0),
            above(5.0)
        );
    }
    for cap in [1.0, 2.0, 5.0, 10.0, f64::INFINITY] {
        println!("{tag} cap {cap}: test acc {:.4}", capped_acc(net, &data.test, cap));
    }
}

fn main() {
    let data = load_mnist_idx(Path::new("data/mnist")).unwrap();
    let current = snn_core::checkpoint::load_teacher(Path::new("runs/debug_image/teacher.ckpt")).unwrap();
    report("wd5e-4", &current, &data);

    for wd in [1e-3, 2e-3, 4e-3] {
        let mut rng = stage_rng(1, "teacher-init");
        let mut net = TeacherNetwork::new_mlp(784, &[300, 300], 10, &mut rng);
        let cfg = TeacherConfig {
            weight_decay: wd,
            ..TeacherConfig::default()
        };
        let mut trng = stage_rng(1, "teacher");
        train_teacher(&mut net, &data.train, None, &cfg, &mut trng).unwrap();
        report(&format!("wd{wd:.0e}"), &net, &data);
    }
    let _ = rand_chacha::ChaCha8Rng::seed_from_u64(0);
}
