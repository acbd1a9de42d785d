//! On-disk audio corpus: one raw little-endian f32 PCM file per channel plus
//! a JSON manifest tying files to azimuths and source descriptions.

use super::geometry::ArrayGeometry;
use super::synth::{MicArrayFrame, SourceDescriptor};
use crate::error::{CoreError, Result};
use serde::{Deserialize, Serialize};
use std::fs;
use std::io::{Read, Write};
use std::path::Path;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AudioSampleMeta {
    pub azimuth_deg: f64,
    /// One PCM file per channel, relative to the manifest directory.
    pub files: Vec<String>,
    pub source: SourceDescriptor,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AudioManifest {
    pub sample_rate: f64,
    pub frame_len: usize,
    pub geometry: ArrayGeometry,
    pub seed: u64,
    pub samples: Vec<AudioSampleMeta>,
}

fn write_pcm(path: &Path, samples: &[f64]) -> Result<()> {
    let mut buf = Vec::with_capacity(samples.len() * 4);
    for &s in samples {
        buf.extend_from_slice(&(s as f32).to_le_bytes());
    }
    let mut f = fs::File::create(path)?;
    f.write_all(&buf)?;
    Ok(())
}

fn read_pcm(path: &Path, expect_len: usize) -> Result<Vec<f64>> {
    let mut bytes = Vec::new();
    fs::File::open(path)?.read_to_end(&mut bytes)?;
    if bytes.len() != expect_len * 4 {
        return Err(CoreError::Data(format!(
            "{}: expected {} samples, file holds {} bytes",
            path.display(),
            expect_len,
            bytes.len()
        )));
    }
    Ok(bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
        .collect())
}

/// Write a frame's channels as `<stem>_ch<i>.f32` next to the manifest.
pub fn store_frame(dir: &Path, stem: &str, frame: &MicArrayFrame) -> Result<Vec<String>> {
    let mut names = Vec::with_capacity(frame.channels.len());
    for (i, ch) in frame.channels.iter().enumerate() {
        let name = format!("{stem}_ch{i}.f32");
        write_pcm(&dir.join(&name), ch)?;
        names.push(name);
    }
    Ok(names)
}

/// Load one sample's channels back into a frame.
pub fn load_frame(dir: &Path, manifest: &AudioManifest, idx: usize) -> Result<MicArrayFrame> {
    let meta = manifest
        .samples
        .get(idx)
        .ok_or_else(|| CoreError::Data(format!("sample index {idx} out of range")))?;
    let channels = meta
        .files
        .iter()
        .map(|name| read_pcm(&dir.join(name), manifest.frame_len))
        .collect::<Result<Vec<_>>>()?;
    Ok(MicArrayFrame {
        channels,
        sample_rate: manifest.sample_rate,
        azimuth_deg: meta.azimuth_deg,
    })
}

pub fn save_manifest(dir: &Path, manifest: &AudioManifest) -> Result<()> {
    let json = serde_json::to_string_pretty(manifest)
        .map_err(|e| CoreError::Format(format!("manifest encode: {e}")))?;
    fs::write(dir.join("manifest.json"), json)?;
    Ok(())
}

pub fn load_manifest(dir: &Path) -> Result<AudioManifest> {
    let json = fs::read_to_string(dir.join("manifest.json"))?;
    serde_json::from_str(&json).map_err(|e| CoreError::Format(format!("manifest decode: {e}")))
}
