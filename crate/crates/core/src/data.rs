//! Dataset ingestion and toy-problem generators: IDX (MNIST) parsing with
//! per-dataset normalization, Gaussian blobs, XOR, and split/shuffle helpers.

use crate::error::{CoreError, Result};
use crate::tensor::Tensor;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use std::io::{Read, Write};
use std::path::Path;

pub const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
pub const IDX_LABELS_MAGIC: u32 = 0x0000_0801;

/// Flat supervised dataset: one feature row per sample.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub features: Tensor, // [n, d]
    pub labels: Vec<usize>,
    pub classes: usize,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.cols()
    }

    /// Gather a minibatch by sample indices.
    pub fn batch(&self, idx: &[usize]) -> (Tensor, Vec<usize>) {
        let d = self.dim();
        let mut feats = Tensor::zeros(&[idx.len(), d]);
        let mut labels = Vec::with_capacity(idx.len());
        for (row, &i) in idx.iter().enumerate() {
            feats.row_mut(row).copy_from_slice(self.features.row(i));
            labels.push(self.labels[i]);
        }
        (feats, labels)
    }
}

fn read_u32_be(r: &mut impl Read) -> Result<u32> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)?;
    Ok(u32::from_be_bytes(buf))
}

/// Parse an IDX image file: returns (n, rows, cols, pixel bytes).
pub fn read_idx_images(path: &Path) -> Result<(usize, usize, usize, Vec<u8>)> {
    let mut f = std::fs::File::open(path)?;
    let magic = read_u32_be(&mut f)?;
    if magic != IDX_IMAGES_MAGIC {
        return Err(CoreError::Format(format!(
            "{}: bad image magic {magic:#010x}",
            path.display()
        )));
    }
    let n = read_u32_be(&mut f)? as usize;
    let rows = read_u32_be(&mut f)? as usize;
    let cols = read_u32_be(&mut f)? as usize;
    let mut pixels = vec![0u8; n * rows * cols];
    f.read_exact(&mut pixels)?;
    Ok((n, rows, cols, pixels))
}

/// Parse an IDX label file.
pub fn read_idx_labels(path: &Path) -> Result<Vec<u8>> {
    let mut f = std::fs::File::open(path)?;
    let magic = read_u32_be(&mut f)?;
    if magic != IDX_LABELS_MAGIC {
        return Err(CoreError::Format(format!(
            "{}: bad label magic {magic:#010x}",
            path.display()
        )));
    }
    let n = read_u32_be(&mut f)? as usize;
    let mut labels = vec![0u8; n];
    f.read_exact(&mut labels)?;
    Ok(labels)
}

/// Write an IDX image file (used for fixtures and round-trip tests).
pub fn write_idx_images(path: &Path, rows: usize, cols: usize, images: &[u8]) -> Result<()> {
    assert_eq!(images.len() % (rows * cols), 0);
    let n = images.len() / (rows * cols);
    let mut f = std::fs::File::create(path)?;
    f.write_all(&IDX_IMAGES_MAGIC.to_be_bytes())?;
    f.write_all(&(n as u32).to_be_bytes())?;
    f.write_all(&(rows as u32).to_be_bytes())?;
    f.write_all(&(cols as u32).to_be_bytes())?;
    f.write_all(images)?;
    Ok(())
}

pub fn write_idx_labels(path: &Path, labels: &[u8]) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(&IDX_LABELS_MAGIC.to_be_bytes())?;
    f.write_all(&(labels.len() as u32).to_be_bytes())?;
    f.write_all(labels)?;
    Ok(())
}

/// MNIST-style paired splits plus the normalization constants applied.
#[derive(Debug, Clone)]
pub struct IdxData {
    pub train: Dataset,
    pub test: Dataset,
    pub mean: f64,
    pub std: f64,
}

/// Load an IDX dataset directory (train-images-idx3-ubyte etc.), scale pixels
/// to [0,1], then standardize both splits with the train split's global
/// mean/std.
pub fn load_mnist_idx(dir: &Path) -> Result<IdxData> {
    let (ntr, rows, cols, train_px) = read_idx_images(&dir.join("train-images-idx3-ubyte"))?;
    let train_labels = read_idx_labels(&dir.join("train-labels-idx1-ubyte"))?;
    let (nte, rows2, cols2, test_px) = read_idx_images(&dir.join("t10k-images-idx3-ubyte"))?;
    let test_labels = read_idx_labels(&dir.join("t10k-labels-idx1-ubyte"))?;
    if train_labels.len() != ntr || test_labels.len() != nte {
        return Err(CoreError::Data("image/label count mismatch".into()));
    }
    if (rows, cols) != (rows2, cols2) {
        return Err(CoreError::Data("train/test image shapes differ".into()));
    }
    let d = rows * cols;

    let to_unit = |px: &[u8]| -> Vec<f64> { px.iter().map(|&p| p as f64 / 255.0).collect() };
    let train_unit = to_unit(&train_px);
    let test_unit = to_unit(&test_px);

    let mean = train_unit.iter().sum::<f64>() / train_unit.len() as f64;
    let var = train_unit.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
        / train_unit.len() as f64;
    let std = var.sqrt().max(1e-12);

    let normalize = |unit: Vec<f64>, n: usize| -> Result<Tensor> {
        let data: Vec<f64> = unit.into_iter().map(|v| (v - mean) / std).collect();
        Tensor::from_vec(&[n, d], data)
    };
    let classes = 1 + train_labels.iter().chain(test_labels.iter()).copied().max().unwrap_or(0) as usize;
    Ok(IdxData {
        train: Dataset {
            features: normalize(train_unit, ntr)?,
            labels: train_labels.iter().map(|&l| l as usize).collect(),
            classes,
        },
        test: Dataset {
            features: normalize(test_unit, nte)?,
            labels: test_labels.iter().map(|&l| l as usize).collect(),
            classes,
        },
        mean,
        std,
    })
}

/// Isotropic Gaussian blobs, one cluster per class center.
pub fn gaussian_blobs<R: Rng>(
    n_per_class: usize,
    centers: &[Vec<f64>],
    std: f64,
    rng: &mut R,
) -> Dataset {
    let d = centers[0].len();
    let normal = Normal::new(0.0, std).unwrap();
    let mut feats = Tensor::zeros(&[n_per_class * centers.len(), d]);
    let mut labels = Vec::new();
    for (c, center) in centers.iter().enumerate() {
        for i in 0..n_per_class {
            let row = feats.row_mut(c * n_per_class + i);
            for (j, &cj) in center.iter().enumerate() {
                row[j] = cj + normal.sample(rng);
            }
            labels.push(c);
        }
    }
    Dataset {
        features: feats,
        labels,
        classes: centers.len(),
    }
}

/// The four XOR points.
pub fn xor_dataset() -> Dataset {
    let feats = Tensor::from_vec(
        &[4, 2],
        vec![0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 1.0, 1.0],
    )
    .unwrap();
    Dataset {
        features: feats,
        labels: vec![0, 1, 1, 0],
        classes: 2,
    }
}

/// Fisher-Yates shuffle of 0..n with the caller's stream.
pub fn shuffle_indices<R: Rng>(n: usize, rng: &mut R) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.gen_range(0..=i);
        idx.swap(i, j);
    }
    idx
}

/// Split off a validation set (shuffled with the given stream).
pub fn split_train_val<R: Rng>(ds: &Dataset, val_count: usize, rng: &mut R) -> (Dataset, Dataset) {
    assert!(val_count < ds.len());
    let idx = shuffle_indices(ds.len(), rng);
    let (val_idx, train_idx) = idx.split_at(val_count);
    let (vf, vl) = ds.batch(val_idx);
    let (tf, tl) = ds.batch(train_idx);
    (
        Dataset {
            features: tf,
            labels: tl,
            classes: ds.classes,
        },
        Dataset {
            features: vf,
            labels: vl,
            classes: ds.classes,
        },
    )
}
