//! Big-endian IDX containers (the MNIST distribution format).
//!
//! Image files: magic `0x00000803`, count, rows, cols, then row-major pixel
//! bytes. Label files: magic `0x00000801`, count, then one byte per label.
//! Gzip-compressed files are detected by their header and inflated.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use flate2::read::GzDecoder;

use crate::error::{Error, Result};

pub const IMAGE_MAGIC: u32 = 0x0000_0803;
pub const LABEL_MAGIC: u32 = 0x0000_0801;

/// One grayscale image and its class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageSample {
    pub rows: usize,
    pub cols: usize,
    pub pixels: Vec<u8>,
    pub label: u8,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdxImages {
    pub rows: usize,
    pub cols: usize,
    pub images: Vec<Vec<u8>>,
}

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    let raw = fs::read(path)?;
    if raw.starts_with(&[0x1f, 0x8b]) {
        let mut out = Vec::new();
        GzDecoder::new(&raw[..]).read_to_end(&mut out)?;
        Ok(out)
    } else {
        Ok(raw)
    }
}

fn be_u32(bytes: &[u8], at: usize, what: &str) -> Result<u32> {
    bytes
        .get(at..at + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| Error::Length {
            context: format!("IDX header field {what}"),
            expected: at + 4,
            actual: bytes.len(),
        })
}

pub fn parse_idx_images(bytes: &[u8]) -> Result<IdxImages> {
    let magic = be_u32(bytes, 0, "magic")?;
    if magic != IMAGE_MAGIC {
        return Err(Error::Format(format!(
            "IDX image magic {magic:#010x}, expected {IMAGE_MAGIC:#010x}"
        )));
    }
    let count = be_u32(bytes, 4, "count")? as usize;
    let rows = be_u32(bytes, 8, "rows")? as usize;
    let cols = be_u32(bytes, 12, "cols")? as usize;
    let size = rows * cols;
    let body = &bytes[16..];
    if body.len() < count * size {
        return Err(Error::Length {
            context: format!("{count} IDX images of {rows}x{cols}"),
            expected: 16 + count * size,
            actual: bytes.len(),
        });
    }
    let images = body[..count * size]
        .chunks(size.max(1))
        .map(<[u8]>::to_vec)
        .collect();
    Ok(IdxImages { rows, cols, images })
}

pub fn parse_idx_labels(bytes: &[u8]) -> Result<Vec<u8>> {
    let magic = be_u32(bytes, 0, "magic")?;
    if magic != LABEL_MAGIC {
        return Err(Error::Format(format!(
            "IDX label magic {magic:#010x}, expected {LABEL_MAGIC:#010x}"
        )));
    }
    let count = be_u32(bytes, 4, "count")? as usize;
    let body = &bytes[8..];
    if body.len() < count {
        return Err(Error::Length {
            context: format!("{count} IDX labels"),
            expected: 8 + count,
            actual: bytes.len(),
        });
    }
    Ok(body[..count].to_vec())
}

pub fn read_idx_images(path: &Path) -> Result<IdxImages> {
    parse_idx_images(&read_bytes(path)?)
}

pub fn read_idx_labels(path: &Path) -> Result<Vec<u8>> {
    parse_idx_labels(&read_bytes(path)?)
}

/// Pairs an image file with its label file.
pub fn load_idx(images: &Path, labels: &Path) -> Result<Vec<ImageSample>> {
    let imgs = read_idx_images(images)?;
    let labels = read_idx_labels(labels)?;
    if labels.len() != imgs.images.len() {
        return Err(Error::Format(format!(
            "{} images but {} labels",
            imgs.images.len(),
            labels.len()
        )));
    }
    Ok(imgs
        .images
        .into_iter()
        .zip(labels)
        .map(|(pixels, label)| ImageSample {
            rows: imgs.rows,
            cols: imgs.cols,
            pixels,
            label,
        })
        .collect())
}

pub fn idx_images_bytes(rows: usize, cols: usize, images: &[Vec<u8>]) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + images.len() * rows * cols);
    for v in [IMAGE_MAGIC, images.len() as u32, rows as u32, cols as u32] {
        out.extend_from_slice(&v.to_be_bytes());
    }
    for img in images {
        out.extend_from_slice(img);
    }
    out
}

pub fn write_idx_images(path: &Path, rows: usize, cols: usize, images: &[Vec<u8>]) -> Result<()> {
    fs::File::create(path)?.write_all(&idx_images_bytes(rows, cols, images))?;
    Ok(())
}

pub fn write_idx_labels(path: &Path, labels: &[u8]) -> Result<()> {
    let mut out = Vec::with_capacity(8 + labels.len());
    out.extend_from_slice(&LABEL_MAGIC.to_be_bytes());
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    out.extend_from_slice(labels);
    fs::File::create(path)?.write_all(&out)?;
    Ok(())
}

fn find(dir: &Path, stems: &[&str]) -> Option<PathBuf> {
    stems
        .iter()
        .flat_map(|s| [dir.join(s), dir.join(format!("{s}.gz"))])
        .find(|p| p.is_file())
}

/// Loads every IDX image/label pair found in `dir`, in the order
/// `train`, `t10k`, then an unprefixed `images`/`labels` pair.
pub fn load_mnist_dir(dir: &Path) -> Result<Vec<ImageSample>> {
    let mut all = Vec::new();
    let mut found = false;
    for prefix in ["train-", "t10k-", ""] {
        let img = find(
            dir,
            &[
                &format!("{prefix}images-idx3-ubyte"),
                &format!("{prefix}images.idx3-ubyte"),
            ],
        );
        let lbl = find(
            dir,
            &[
                &format!("{prefix}labels-idx1-ubyte"),
                &format!("{prefix}labels.idx1-ubyte"),
            ],
        );
        if let (Some(img), Some(lbl)) = (img, lbl) {
            all.extend(load_idx(&img, &lbl)?);
            found = true;
        }
    }
    if !found {
        return Err(Error::Io(std::io::Error::new(
            std::io::ErrorKind::NotFound,
            format!("no IDX image/label files in {}", dir.display()),
        )));
    }
    Ok(all)
}
