//! Synaptic-operation accounting. An ANN forward pass costs one
//! multiply-accumulate per connection; an SNN costs one accumulate per spike
//! per reached downstream synapse, with burst counts weighting the cost.
//! Energy comes from per-op picojoule figures for 45 nm arithmetic.

use crate::error::{CoreError, Result};
use crate::neurons::{BatchHistory, SpikeTrain};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ArchLayer {
    Dense {
        inputs: usize,
        outputs: usize,
    },
    Conv {
        c_in: usize,
        h: usize,
        w: usize,
        f: usize,
        kh: usize,
        kw: usize,
        stride: usize,
        padding: usize,
    },
}

impl ArchLayer {
    pub fn input_count(&self) -> usize {
        match self {
            ArchLayer::Dense { inputs, .. } => *inputs,
            ArchLayer::Conv { c_in, h, w, .. } => c_in * h * w,
        }
    }

    pub fn output_count(&self) -> Result<usize> {
        match self {
            ArchLayer::Dense { outputs, .. } => Ok(*outputs),
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
                let oh = crate::conv::conv_out_dim(*h, *kh, *stride, *padding)?;
                let ow = crate::conv::conv_out_dim(*w, *kw, *stride, *padding)?;
                Ok(f * oh * ow)
            }
        }
    }

    /// Uniform per-output fan-in: dense inputs, or C_in * kh * kw for conv.
    pub fn fan_in(&self) -> usize {
        match self {
            ArchLayer::Dense { inputs, .. } => *inputs,
            ArchLayer::Conv { c_in, kh, kw, .. } => c_in * kh * kw,
        }
    }

    /// Per-input-neuron downstream connection counts. Dense neurons reach
    /// every output; a conv input pixel reaches f copies of however many
    /// output positions actually cover it under stride and padding (border
    /// pixels reach fewer).
    pub fn fan_out_per_input(&self) -> Result<Vec<u64>> {
        match self {
            ArchLayer::Dense { inputs, outputs } => Ok(vec![*outputs as u64; *inputs]),
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
                let oh = crate::conv::conv_out_dim(*h, *kh, *stride, *padding)?;
                let ow = crate::conv::conv_out_dim(*w, *kw, *stride, *padding)?;
                let mut coverage = vec![0u64; h * w];
                for oy in 0..oh {
                    for ox in 0..ow {
                        for dy in 0..*kh {
                            for dx in 0..*kw {
                                let iy = (oy * stride + dy) as isize - *padding as isize;
                                let ix = (ox * stride + dx) as isize - *padding as isize;
                                if iy >= 0 && (iy as usize) < *h && ix >= 0 && (ix as usize) < *w
                                {
                                    coverage[iy as usize * w + ix as usize] += 1;
                                }
                            }
                        }
                    }
                }
                let mut out = Vec::with_capacity(c_in * h * w);
                for _ in 0..*c_in {
                    out.extend(coverage.iter().map(|&c| c * *f as u64));
                }
                Ok(out)
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct Architecture {
    pub layers: Vec<ArchLayer>,
}

impl Architecture {
    pub fn mlp(dims: &[usize]) -> Result<Architecture> {
        if dims.len() < 2 {
            return Err(CoreError::Config("need at least input and output dims".into()));
        }
        Ok(Architecture {
            layers: dims
                .windows(2)
                .map(|p| ArchLayer::Dense {
                    inputs: p[0],
                    outputs: p[1],
                })
                .collect(),
        })
    }

    fn validate_chain(&self) -> Result<()> {
        if self.layers.is_empty() {
            return Err(CoreError::Config("architecture has no layers".into()));
        }
        for (i, pair) in self.layers.windows(2).enumerate() {
            let upstream = pair[0].output_count()?;
            let downstream = pair[1].input_count();
            if upstream != downstream {
                return Err(CoreError::Config(format!(
                    "layer {i} outputs {upstream} neurons but layer {} expects {downstream}",
                    i + 1
                )));
            }
        }
        Ok(())
    }
}

/// Total ANN multiply-accumulates for one forward pass: sum over layers of
/// uniform fan-in times output count.
pub fn synops_ann(arch: &Architecture) -> Result<u64> {
    arch.validate_chain()?;
    let mut total = 0u64;
    for layer in &arch.layers {
        total += layer.fan_in() as u64 * layer.output_count()? as u64;
    }
    Ok(total)
}

/// Total SNN accumulates for one sample's window: every spike of hidden
/// layer l (burst count included) costs its neuron's fan-out into layer l+1.
/// The input layer is direct-coded and excluded; `trains` covers the hidden
/// layers in order, so trains[l] drives arch.layers[l+1].
pub fn synops_snn(trains: &[SpikeTrain], arch: &Architecture) -> Result<u64> {
    arch.validate_chain()?;
    if trains.len() + 1 != arch.layers.len() {
        return Err(CoreError::Config(format!(
            "{} spike trains for {} weight layers (need layers - 1)",
            trains.len(),
            arch.layers.len()
        )));
    }
    let mut total = 0u64;
    for (l, train) in trains.iter().enumerate() {
        let downstream = &arch.layers[l + 1];
        if train.neurons() != downstream.input_count() {
            return Err(CoreError::Config(format!(
                "hidden layer {l} has {} neurons, downstream expects {}",
                train.neurons(),
                downstream.input_count()
            )));
        }
        let fan_out = downstream.fan_out_per_input()?;
        for (j, &fo) in fan_out.iter().enumerate() {
            let mut spikes = 0u64;
            for t in 0..train.window() {
                spikes += train.count(j, t) as u64;
            }
            total += fo * spikes;
        }
    }
    Ok(total)
}

/// Batched SNN SynOps summed over every sample in the history.
pub fn synops_snn_batch(history: &BatchHistory, arch: &Architecture) -> Result<u64> {
    arch.validate_chain()?;
    if history.layers() + 1 != arch.layers.len() {
        return Err(CoreError::Config(format!(
            "{} history layers for {} weight layers (need layers - 1)",
            history.layers(),
            arch.layers.len()
        )));
    }
    let mut total = 0u64;
    for l in 0..history.layers() {
        let downstream = &arch.layers[l + 1];
        let steps = &history.per_layer[l];
        if steps[0].cols() != downstream.input_count() {
            return Err(CoreError::Config(format!(
                "hidden layer {l} has {} neurons, downstream expects {}",
                steps[0].cols(),
                downstream.input_count()
            )));
        }
        let fan_out = downstream.fan_out_per_input()?;
        // fan-out is time-independent: weight each neuron's total count once
        let mut totals = vec![0u64; steps[0].cols()];
        for mat in steps {
            for r in 0..mat.rows() {
                for (acc, &v) in totals.iter_mut().zip(mat.row(r).iter()) {
                    *acc += v as u64;
                }
            }
        }
        for (&fo, &spikes) in fan_out.iter().zip(totals.iter()) {
            total += fo * spikes;
        }
    }
    Ok(total)
}

/// MAC-like work done by the direct-coded input layer if it is audited as
/// analog: the full first-layer connection count, once per timestep.
pub fn first_layer_analog_macs(arch: &Architecture, t_window: usize) -> Result<u64> {
    arch.validate_chain()?;
    let first = &arch.layers[0];
    Ok(first.fan_in() as u64 * first.output_count()? as u64 * t_window as u64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithMode {
    Float32,
    Int32,
}

#[derive(Debug, Clone, Copy)]
pub struct EnergyModel {
    pub mac_pj: f64,
    pub ac_pj: f64,
    pub mode: ArithMode,
}

impl EnergyModel {
    pub fn float32() -> EnergyModel {
        EnergyModel {
            mac_pj: 4.6,
            ac_pj: 0.9,
            mode: ArithMode::Float32,
        }
    }

    pub fn int32() -> EnergyModel {
        EnergyModel {
            mac_pj: 3.1,
            ac_pj: 0.1,
            mode: ArithMode::Int32,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mac_pj > self.ac_pj && self.ac_pj > 0.0) {
            return Err(CoreError::Config(format!(
                "need mac_pj > ac_pj > 0, got {} and {}",
                self.mac_pj, self.ac_pj
            )));
        }
        Ok(())
    }
}

/// Operation totals for matched ANN and SNN runs over the same workload.
#[derive(Debug, Clone, Copy, Default)]
pub struct SynOpsLedger {
    pub ann_macs: u64,
    pub snn_acs: u64,
    /// Nonzero only when the first layer is audited as analog.
    pub snn_macs: u64,
}

#[derive(Debug, Clone, Copy)]
pub struct EnergyReport {
    /// SynOps(SNN) / SynOps(ANN).
    pub ratio: f64,
    pub ann_pj: f64,
    pub snn_pj: f64,
    /// ann_pj / snn_pj; meaningless when `saving_infinite` is set.
    pub saving: f64,
    pub saving_infinite: bool,
}

pub fn energy_report(ledger: &SynOpsLedger, model: &EnergyModel) -> Result<EnergyReport> {
    model.validate()?;
    if ledger.ann_macs == 0 {
        return Err(CoreError::Config("ANN op count is zero".into()));
    }
    let snn_ops = ledger.snn_acs + ledger.snn_macs;
    let ratio = snn_ops as f64 / ledger.ann_macs as f64;
    let ann_pj = ledger.ann_macs as f64 * model.mac_pj;
    let snn_pj = ledger.snn_acs as f64 * model.ac_pj + ledger.snn_macs as f64 * model.mac_pj;
    if snn_pj == 0.0 {
        return Ok(EnergyReport {
            ratio,
            ann_pj,
            snn_pj,
            saving: f64::INFINITY,
            saving_infinite: true,
        });
    }
    Ok(EnergyReport {
        ratio,
        ann_pj,
        snn_pj,
        saving: ann_pj / snn_pj,
        saving_infinite: false,
    })
}
