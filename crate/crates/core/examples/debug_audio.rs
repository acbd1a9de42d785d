//! Scratch driver for inspecting localization training stage by stage.

use snn_core::audio::experiment::{run_localization_experiment, LocalizationConfig};
use snn_core::audio::synth::NoiseKind;

fn main() {
    for kind in [NoiseKind::Babble, NoiseKind::Factory] {
        for seed in [20_250_823u64, 7u64] {
            let mut cfg = LocalizationConfig::default();
            cfg.test_per_class = 8;
            cfg.noise_kind = kind;
            let t0 = std::time::Instant::now();
            let report = run_localization_experiment(&cfg, seed).unwrap();
            println!(
                "== {kind:?} seed {seed}: {:.1}s, teacher test {:?}",
                t0.elapsed().as_secs_f64(),
                report.teacher.final_test_acc
            );
            for c in &report.conditions {
                println!(
                    "{} {}: mae {:.2} acc {:.3} mean_tf {:.2} synops {:.0}",
                    c.condition, c.param, c.mae_deg, c.accuracy, c.mean_tf, c.synops_per_sample
                );
            }
        }
    }
}
