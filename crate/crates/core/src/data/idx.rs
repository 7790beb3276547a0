//! IDX image/label containers (the MNIST distribution format).

use std::io::Write;
use std::path::Path;

use super::{Dataset, SplitFractions, Task};
use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

const IMAGES_MAGIC: u32 = 0x0000_0803;
const LABELS_MAGIC: u32 = 0x0000_0801;

/// Flattened images with pixels scaled to `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageSet {
    pub pixels: DenseMatrix,
    pub labels: Vec<u8>,
    pub height: usize,
    pub width: usize,
}

fn be_u32(bytes: &[u8], at: usize) -> Result<u32> {
    bytes
        .get(at..at + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| Error::Format("truncated header".into()))
}

fn read(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::io(path, e))
}

pub fn parse_idx_images(bytes: &[u8]) -> Result<(usize, usize, usize, &[u8])> {
    let magic = be_u32(bytes, 0)?;
    if magic != IMAGES_MAGIC {
        return Err(Error::Format(format!(
            "image magic {magic:#010x}, expected {IMAGES_MAGIC:#010x}"
        )));
    }
    let n = be_u32(bytes, 4)? as usize;
    let h = be_u32(bytes, 8)? as usize;
    let w = be_u32(bytes, 12)? as usize;
    let body = &bytes[16..];
    if body.len() != n * h * w {
        return Err(Error::Format(format!(
            "image payload has {} bytes, header implies {}",
            body.len(),
            n * h * w
        )));
    }
    Ok((n, h, w, body))
}

pub fn parse_idx_labels(bytes: &[u8]) -> Result<&[u8]> {
    let magic = be_u32(bytes, 0)?;
    if magic != LABELS_MAGIC {
        return Err(Error::Format(format!(
            "label magic {magic:#010x}, expected {LABELS_MAGIC:#010x}"
        )));
    }
    let n = be_u32(bytes, 4)? as usize;
    let body = &bytes[8..];
    if body.len() != n {
        return Err(Error::Format(format!(
            "label payload has {} bytes, header implies {n}",
            body.len()
        )));
    }
    Ok(body)
}

pub fn load_idx(images_path: &Path, labels_path: &Path) -> Result<ImageSet> {
    let img = read(images_path)?;
    let lab = read(labels_path)?;
    let (n, h, w, body) = parse_idx_images(&img)?;
    let labels = parse_idx_labels(&lab)?;
    if labels.len() != n {
        return Err(Error::Format(format!(
            "{n} images but {} labels",
            labels.len()
        )));
    }
    let pixels = body.iter().map(|&p| p as f64 / 255.0).collect();
    Ok(ImageSet {
        pixels: DenseMatrix::new(n, h * w, pixels)?,
        labels: labels.to_vec(),
        height: h,
        width: w,
    })
}

pub fn write_idx_images(path: &Path, height: usize, width: usize, pixels: &[u8]) -> Result<()> {
    let per = height * width;
    if per == 0 || !pixels.len().is_multiple_of(per) {
        return Err(Error::Format(
            "pixel buffer is not a whole number of images".into(),
        ));
    }
    let mut out = Vec::with_capacity(16 + pixels.len());
    out.extend_from_slice(&IMAGES_MAGIC.to_be_bytes());
    out.extend_from_slice(&((pixels.len() / per) as u32).to_be_bytes());
    out.extend_from_slice(&(height as u32).to_be_bytes());
    out.extend_from_slice(&(width as u32).to_be_bytes());
    out.extend_from_slice(pixels);
    write_all(path, &out)
}

pub fn write_idx_labels(path: &Path, labels: &[u8]) -> Result<()> {
    let mut out = Vec::with_capacity(8 + labels.len());
    out.extend_from_slice(&LABELS_MAGIC.to_be_bytes());
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    out.extend_from_slice(labels);
    write_all(path, &out)
}

fn write_all(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(bytes).map_err(|e| Error::io(path, e))
}

/// Binary "is it `target_digit`?" task over flattened pixels, split with `seed`.
pub fn binarize_label(
    images: &ImageSet,
    target_digit: u8,
    fractions: SplitFractions,
    seed: u64,
) -> Result<Dataset> {
    let targets = images
        .labels
        .iter()
        .map(|&l| (l == target_digit) as u8 as f64)
        .collect();
    let names = (0..images.height * images.width)
        .map(|i| format!("px_{}_{}", i / images.width, i % images.width))
        .collect();
    let mut ds = Dataset::new(
        images.pixels.clone(),
        targets,
        Task::BinaryClassification,
        names,
    )?
    .with_split(fractions, seed)?;
    ds.image_dims = Some((images.height, images.width));
    Ok(ds)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_binarized() {
        let set = ImageSet {
            pixels: DenseMatrix::zeros(4, 4),
            labels: vec![7, 1, 7, 0],
            height: 2,
            width: 2,
        };
        let ds = binarize_label(&set, 7, SplitFractions::default(), 0).unwrap();
        assert_eq!(ds.targets, vec![1.0, 0.0, 1.0, 0.0]);
        assert_eq!(ds.image_dims, Some((2, 2)));
    }

    #[test]
    fn bad_magic_rejected() {
        let mut bytes = vec![0, 0, 8, 1, 0, 0, 0, 0];
        assert!(parse_idx_images(&bytes).is_err());
        bytes[3] = 3;
        assert!(parse_idx_labels(&bytes).is_err());
    }
}
