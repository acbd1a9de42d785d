//! Versioned binary checkpoints for bit-exact resume: a fixed header
//! (magic, version, kind tag) followed by shape-prefixed little-endian f64
//! blocks. Everything a stage trains can be stored and restored without
//! losing a single bit.

use crate::error::{CoreError, Result};
use crate::neurons::{BurstingIFLayer, DoubleExpLIFLayer};
use crate::teacher::{TeacherLayer, TeacherNetwork};
use crate::tensor::Tensor;
use std::fs;
use std::path::Path;

const MAGIC: &[u8; 8] = b"SNNCKPT\0";
const VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckpointKind {
    TeacherMlp,
    HiddenStack,
    OutputLif,
}

impl CheckpointKind {
    fn tag(self) -> u8 {
        match self {
            CheckpointKind::TeacherMlp => 1,
            CheckpointKind::HiddenStack => 2,
            CheckpointKind::OutputLif => 3,
        }
    }

    fn from_tag(tag: u8) -> Result<CheckpointKind> {
        match tag {
            1 => Ok(CheckpointKind::TeacherMlp),
            2 => Ok(CheckpointKind::HiddenStack),
            3 => Ok(CheckpointKind::OutputLif),
            other => Err(CoreError::Format(format!(
                "unknown checkpoint kind tag {other}"
            ))),
        }
    }
}

fn push_u32(buf: &mut Vec<u8>, v: u32) {
    buf.extend_from_slice(&v.to_le_bytes());
}

fn push_f64(buf: &mut Vec<u8>, v: f64) {
    buf.extend_from_slice(&v.to_le_bytes());
}

fn push_tensor(buf: &mut Vec<u8>, t: &Tensor) {
    push_u32(buf, t.shape().len() as u32);
    for &d in t.shape() {
        push_u32(buf, d as u32);
    }
    for &v in t.data() {
        push_f64(buf, v);
    }
}

fn push_vec(buf: &mut Vec<u8>, v: &[f64]) {
    push_u32(buf, 1);
    push_u32(buf, v.len() as u32);
    for &x in v {
        push_f64(buf, x);
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.buf.len() {
            return Err(CoreError::Format(format!(
                "checkpoint truncated at byte {} (wanted {n} more)",
                self.pos
            )));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }

    fn f64(&mut self) -> Result<f64> {
        let b = self.take(8)?;
        Ok(f64::from_le_bytes(b.try_into().expect("8 bytes")))
    }

    fn tensor(&mut self) -> Result<Tensor> {
        let ndim = self.u32()? as usize;
        if ndim == 0 || ndim > 4 {
            return Err(CoreError::Format(format!("bad tensor rank {ndim}")));
        }
        let mut shape = Vec::with_capacity(ndim);
        for _ in 0..ndim {
            shape.push(self.u32()? as usize);
        }
        let count: usize = shape.iter().product();
        let mut data = Vec::with_capacity(count);
        for _ in 0..count {
            data.push(self.f64()?);
        }
        Tensor::from_vec(&shape, data)
    }

    fn vec(&mut self) -> Result<Vec<f64>> {
        let t = self.tensor()?;
        if t.shape().len() != 1 {
            return Err(CoreError::Format(format!(
                "expected a vector block, got rank {}",
                t.shape().len()
            )));
        }
        Ok(t.data().to_vec())
    }

    fn done(&self) -> Result<()> {
        if self.pos != self.buf.len() {
            return Err(CoreError::Format(format!(
                "{} trailing bytes after checkpoint payload",
                self.buf.len() - self.pos
            )));
        }
        Ok(())
    }
}

fn write_checkpoint(path: &Path, kind: CheckpointKind, payload: &[u8]) -> Result<()> {
    let mut buf = Vec::with_capacity(payload.len() + 16);
    buf.extend_from_slice(MAGIC);
    push_u32(&mut buf, VERSION);
    buf.push(kind.tag());
    buf.extend_from_slice(payload);
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    fs::write(path, buf)?;
    Ok(())
}

fn read_checkpoint(path: &Path, expect: CheckpointKind) -> Result<Vec<u8>> {
    let buf = fs::read(path)?;
    let mut r = Reader { buf: &buf, pos: 0 };
    if r.take(8)? != MAGIC {
        return Err(CoreError::Format(format!(
            "{}: not a checkpoint (bad magic)",
            path.display()
        )));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(CoreError::Format(format!(
            "{}: unsupported checkpoint version {version}",
            path.display()
        )));
    }
    let kind = CheckpointKind::from_tag(r.u8()?)?;
    if kind != expect {
        return Err(CoreError::Format(format!(
            "{}: checkpoint holds {kind:?}, expected {expect:?}",
            path.display()
        )));
    }
    Ok(buf[r.pos..].to_vec())
}

/// Store a dense teacher. Conv teachers are not checkpointable here.
pub fn save_teacher(path: &Path, net: &TeacherNetwork) -> Result<()> {
    let mut payload = Vec::new();
    push_u32(&mut payload, net.hidden.len() as u32);
    for layer in &net.hidden {
        match layer {
            TeacherLayer::Dense { w, b } => {
                push_tensor(&mut payload, w);
                push_vec(&mut payload, b);
            }
            TeacherLayer::Conv2d { .. } => {
                return Err(CoreError::Config(
                    "only dense teachers can be checkpointed".into(),
                ));
            }
        }
    }
    push_tensor(&mut payload, &net.classifier_w);
    push_vec(&mut payload, &net.classifier_b);
    write_checkpoint(path, CheckpointKind::TeacherMlp, &payload)
}

pub fn load_teacher(path: &Path) -> Result<TeacherNetwork> {
    let payload = read_checkpoint(path, CheckpointKind::TeacherMlp)?;
    let mut r = Reader {
        buf: &payload,
        pos: 0,
    };
    let n = r.u32()? as usize;
    let mut hidden = Vec::with_capacity(n);
    for _ in 0..n {
        let w = r.tensor()?;
        let b = r.vec()?;
        hidden.push(TeacherLayer::Dense { w, b });
    }
    let classifier_w = r.tensor()?;
    let classifier_b = r.vec()?;
    r.done()?;
    Ok(TeacherNetwork {
        hidden,
        classifier_w,
        classifier_b,
    })
}

pub fn save_hidden_stack(path: &Path, stack: &[BurstingIFLayer]) -> Result<()> {
    let mut payload = Vec::new();
    push_u32(&mut payload, stack.len() as u32);
    for layer in stack {
        push_f64(&mut payload, layer.v_th);
        push_u32(&mut payload, layer.gamma);
        payload.push(u8::from(layer.bias.is_some()));
        push_tensor(&mut payload, &layer.weights);
        if let Some(b) = &layer.bias {
            push_vec(&mut payload, b);
        }
    }
    write_checkpoint(path, CheckpointKind::HiddenStack, &payload)
}

pub fn load_hidden_stack(path: &Path) -> Result<Vec<BurstingIFLayer>> {
    let payload = read_checkpoint(path, CheckpointKind::HiddenStack)?;
    let mut r = Reader {
        buf: &payload,
        pos: 0,
    };
    let n = r.u32()? as usize;
    let mut stack = Vec::with_capacity(n);
    for _ in 0..n {
        let v_th = r.f64()?;
        let gamma = r.u32()?;
        let has_bias = r.u8()? != 0;
        let w = r.tensor()?;
        let bias = if has_bias { Some(r.vec()?) } else { None };
        stack.push(BurstingIFLayer::new(w, bias, v_th, gamma)?);
    }
    r.done()?;
    Ok(stack)
}

pub fn save_output_layer(path: &Path, layer: &DoubleExpLIFLayer) -> Result<()> {
    let mut payload = Vec::new();
    push_f64(&mut payload, layer.tau_m);
    push_f64(&mut payload, layer.tau_s);
    push_f64(&mut payload, layer.v_th);
    push_f64(&mut payload, layer.k0);
    push_tensor(&mut payload, &layer.weights);
    write_checkpoint(path, CheckpointKind::OutputLif, &payload)
}

pub fn load_output_layer(path: &Path) -> Result<DoubleExpLIFLayer> {
    let payload = read_checkpoint(path, CheckpointKind::OutputLif)?;
    let mut r = Reader {
        buf: &payload,
        pos: 0,
    };
    let tau_m = r.f64()?;
    let tau_s = r.f64()?;
    let v_th = r.f64()?;
    let k0 = r.f64()?;
    let w = r.tensor()?;
    r.done()?;
    DoubleExpLIFLayer::new(w, tau_m, tau_s, v_th, k0)
}
