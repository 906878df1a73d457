use std::path::Path;

use rand::seq::index;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const IDX_IMAGE_MAGIC: u32 = 0x0000_0803;
pub const IDX_LABEL_MAGIC: u32 = 0x0000_0801;
pub const MNIST_PIXELS: usize = 28 * 28;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputSource {
    IdxFiles,
    GaussianNoise,
}

/// Flat images (one row of `dim` reals per sample) with class labels.
#[derive(Debug, Clone, PartialEq)]
pub struct MnistDataset {
    images: Vec<f64>,
    labels: Vec<u8>,
    dim: usize,
    source: InputSource,
}

impl MnistDataset {
    pub fn new(images: Vec<f64>, labels: Vec<u8>, dim: usize, source: InputSource) -> Result<Self> {
        if dim == 0 || images.len() != labels.len() * dim {
            return Err(Error::DimensionMismatch {
                expected: labels.len() * dim,
                actual: images.len(),
            });
        }
        Ok(Self {
            images,
            labels,
            dim,
            source,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn source(&self) -> InputSource {
        self.source
    }

    pub fn images(&self) -> &[f64] {
        &self.images
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn image(&self, i: usize) -> &[f64] {
        &self.images[i * self.dim..(i + 1) * self.dim]
    }

    /// Samples at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> MnistDataset {
        let mut images = Vec::with_capacity(indices.len() * self.dim);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            images.extend_from_slice(self.image(i));
            labels.push(self.labels[i]);
        }
        MnistDataset {
            images,
            labels,
            dim: self.dim,
            source: self.source,
        }
    }
}

fn idx_err(path: &Path, reason: impl Into<String>) -> Error {
    Error::Idx {
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

fn be_u32(bytes: &[u8], at: usize) -> Option<u32> {
    bytes
        .get(at..at + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
}

/// Parse an unsigned-byte rank-3 IDX image file into `(count, rows, cols, pixels)`.
pub fn parse_idx_images(bytes: &[u8], path: &Path) -> Result<(usize, usize, usize, Vec<u8>)> {
    let magic = be_u32(bytes, 0).ok_or_else(|| idx_err(path, "truncated header"))?;
    if magic != IDX_IMAGE_MAGIC {
        return Err(idx_err(path, format!("bad image magic {magic:#010x}")));
    }
    let header = (be_u32(bytes, 4), be_u32(bytes, 8), be_u32(bytes, 12));
    let (Some(count), Some(rows), Some(cols)) = header else {
        return Err(idx_err(path, "truncated header"));
    };
    let (count, rows, cols) = (count as usize, rows as usize, cols as usize);
    let need = count
        .checked_mul(rows)
        .and_then(|v| v.checked_mul(cols))
        .ok_or_else(|| idx_err(path, "header sizes overflow"))?;
    let body = &bytes[16..];
    if body.len() < need {
        return Err(idx_err(
            path,
            format!("truncated: expected {need} pixel bytes, found {}", body.len()),
        ));
    }
    Ok((count, rows, cols, body[..need].to_vec()))
}

/// Parse an unsigned-byte rank-1 IDX label file.
pub fn parse_idx_labels(bytes: &[u8], path: &Path) -> Result<Vec<u8>> {
    let magic = be_u32(bytes, 0).ok_or_else(|| idx_err(path, "truncated header"))?;
    if magic != IDX_LABEL_MAGIC {
        return Err(idx_err(path, format!("bad label magic {magic:#010x}")));
    }
    let count = be_u32(bytes, 4).ok_or_else(|| idx_err(path, "truncated header"))? as usize;
    let body = &bytes[8..];
    if body.len() < count {
        return Err(idx_err(
            path,
            format!("truncated: expected {count} labels, found {}", body.len()),
        ));
    }
    let labels = body[..count].to_vec();
    if let Some(bad) = labels.iter().find(|&&l| l > 9) {
        return Err(idx_err(path, format!("label {bad} outside 0..9")));
    }
    Ok(labels)
}

pub fn encode_idx_images(pixels: &[u8], count: usize, rows: usize, cols: usize) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + pixels.len());
    for v in [IDX_IMAGE_MAGIC, count as u32, rows as u32, cols as u32] {
        out.extend_from_slice(&v.to_be_bytes());
    }
    out.extend_from_slice(pixels);
    out
}

pub fn encode_idx_labels(labels: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + labels.len());
    out.extend_from_slice(&IDX_LABEL_MAGIC.to_be_bytes());
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    out.extend_from_slice(labels);
    out
}

/// Read an image/label IDX pair; pixels are scaled to `[0, 1]` by `/255`.
pub fn load_mnist_idx(images_path: impl AsRef<Path>, labels_path: impl AsRef<Path>) -> Result<MnistDataset> {
    let (ip, lp) = (images_path.as_ref(), labels_path.as_ref());
    let ib = std::fs::read(ip).map_err(|e| Error::io(ip, e))?;
    let lb = std::fs::read(lp).map_err(|e| Error::io(lp, e))?;
    let (count, rows, cols, pixels) = parse_idx_images(&ib, ip)?;
    let labels = parse_idx_labels(&lb, lp)?;
    if labels.len() != count {
        return Err(idx_err(
            lp,
            format!("{} labels for {count} images in {}", labels.len(), ip.display()),
        ));
    }
    let images = pixels.iter().map(|&p| f64::from(p) / 255.0).collect();
    MnistDataset::new(images, labels, rows * cols, InputSource::IdxFiles)
}

/// `s` distinct indices of `0..len`, uniformly without replacement.
pub fn subsample_indices<R: Rng + ?Sized>(len: usize, s: usize, rng: &mut R) -> Result<Vec<usize>> {
    if s > len {
        return Err(Error::InvalidParameter(format!("cannot draw {s} samples from {len}")));
    }
    Ok(index::sample(rng, len, s).into_vec())
}

pub fn subsample<R: Rng + ?Sized>(dataset: &MnistDataset, s: usize, rng: &mut R) -> Result<MnistDataset> {
    let idx = subsample_indices(dataset.len(), s, rng)?;
    Ok(dataset.select(&idx))
}

/// Same labels, every input replaced by iid standard Gaussian entries.
pub fn make_noise_inputs<R: Rng + ?Sized>(dataset: &MnistDataset, rng: &mut R) -> Result<MnistDataset> {
    if dataset.is_empty() {
        return Err(Error::InvalidParameter("noise inputs need a nonempty dataset".into()));
    }
    let images = (0..dataset.images.len()).map(|_| rng.sample(StandardNormal)).collect();
    MnistDataset::new(images, dataset.labels.clone(), dataset.dim, InputSource::GaussianNoise)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stream::trial_rng;

    fn tiny(n: usize) -> MnistDataset {
        let images = (0..n * 4).map(|v| v as f64).collect();
        let labels = (0..n).map(|i| (i % 10) as u8).collect();
        MnistDataset::new(images, labels, 4, InputSource::IdxFiles).unwrap()
    }

    #[test]
    fn header_magics() {
        let p = Path::new("mem");
        let img = encode_idx_images(&[0, 255, 128, 1], 1, 2, 2);
        assert_eq!(&img[..4], &[0, 0, 8, 3]);
        let (count, rows, cols, px) = parse_idx_images(&img, p).unwrap();
        assert_eq!((count, rows, cols), (1, 2, 2));
        assert_eq!(px, vec![0, 255, 128, 1]);
        let lab = encode_idx_labels(&[7]);
        assert_eq!(&lab[..4], &[0, 0, 8, 1]);
        assert_eq!(parse_idx_labels(&lab, p).unwrap(), vec![7]);
    }

    #[test]
    fn swapped_files_rejected() {
        let p = Path::new("mem");
        let img = encode_idx_images(&[0; 4], 1, 2, 2);
        let lab = encode_idx_labels(&[1]);
        assert!(parse_idx_images(&lab, p).is_err());
        assert!(parse_idx_labels(&img, p).is_err());
    }

    #[test]
    fn truncation_detected() {
        let p = Path::new("mem");
        let img = encode_idx_images(&[0; 8], 2, 2, 2);
        assert!(parse_idx_images(&img[..img.len() - 1], p).is_err());
        assert!(parse_idx_images(&img[..10], p).is_err());
        let lab = encode_idx_labels(&[1, 2, 3]);
        assert!(parse_idx_labels(&lab[..lab.len() - 1], p).is_err());
    }

    #[test]
    fn out_of_range_label_rejected() {
        assert!(parse_idx_labels(&encode_idx_labels(&[3, 10]), Path::new("mem")).is_err());
    }

    #[test]
    fn full_subsample_is_a_permutation() {
        let d = tiny(25);
        let mut rng = trial_rng(1, 0);
        let mut idx = subsample_indices(d.len(), d.len(), &mut rng).unwrap();
        idx.sort_unstable();
        assert_eq!(idx, (0..25).collect::<Vec<_>>());
    }

    #[test]
    fn single_subsample_comes_from_source() {
        let d = tiny(25);
        let s = subsample(&d, 1, &mut trial_rng(2, 0)).unwrap();
        assert_eq!(s.len(), 1);
        assert!((0..d.len()).any(|i| d.image(i) == s.image(0) && d.labels()[i] == s.labels()[0]));
    }

    #[test]
    fn oversized_subsample_rejected() {
        assert!(subsample(&tiny(3), 4, &mut trial_rng(0, 0)).is_err());
    }

    #[test]
    fn half_subsample_is_distinct() {
        let mut idx = subsample_indices(60_000, 30_000, &mut trial_rng(3, 0)).unwrap();
        idx.sort_unstable();
        idx.dedup();
        assert_eq!(idx.len(), 30_000);
    }

    #[test]
    fn noise_keeps_labels() {
        let d = tiny(12);
        let n = make_noise_inputs(&d, &mut trial_rng(4, 0)).unwrap();
        assert_eq!(n.labels(), d.labels());
        assert_eq!(n.source(), InputSource::GaussianNoise);
        assert_eq!(n.images().len(), d.images().len());
        assert!(n.images().iter().any(|&v| !(0.0..=1.0).contains(&v)));
    }
}
