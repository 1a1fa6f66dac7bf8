//! Image ingestion from CSV and PGM files with per-image normalization.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Result, SpnError};
use crate::inference::{Evidence, Obs};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImageFormat {
    Csv,
    Pgm,
}

impl ImageFormat {
    /// Guesses the format from a file extension.
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "csv" => Some(Self::Csv),
            "pgm" => Some(Self::Pgm),
            _ => None,
        }
    }
}

/// What to do with an image whose pixels are all equal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ConstantPolicy {
    #[default]
    Reject,
    /// Keep it as an all-zero image with unit scale.
    Zero,
}

/// Mean and population standard deviation removed from an image.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normalization {
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImageDataset {
    pub width: usize,
    pub height: usize,
    /// Normalized intensities, row-major.
    pub images: Vec<Vec<f64>>,
    pub normalization: Vec<Normalization>,
}

impl ImageDataset {
    /// Normalizes every raw image to zero mean and unit variance.
    pub fn from_raw(
        width: usize,
        height: usize,
        raw: Vec<Vec<f64>>,
        policy: ConstantPolicy,
    ) -> Result<Self> {
        let mut images = Vec::with_capacity(raw.len());
        let mut normalization = Vec::with_capacity(raw.len());
        for (i, img) in raw.into_iter().enumerate() {
            if img.len() != width * height {
                return Err(SpnError::Input(format!(
                    "image {i} has {} pixels, expected {}x{}",
                    img.len(),
                    width,
                    height
                )));
            }
            let (normalized, norm) = normalize(&img, policy)
                .ok_or_else(|| SpnError::Input(format!("image {i} is constant and cannot be normalized")))?;
            images.push(normalized);
            normalization.push(norm);
        }
        Ok(Self { width, height, images, normalization })
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn pixels(&self) -> usize {
        self.width * self.height
    }

    /// Maps normalized values of image `i` back to its original scale.
    pub fn denormalize(&self, i: usize, values: &[f64]) -> Vec<f64> {
        let n = self.normalization[i];
        values.iter().map(|v| v * n.std + n.mean).collect()
    }

    /// Fully observed evidence for every image.
    pub fn evidence(&self) -> Vec<Evidence> {
        self.images
            .iter()
            .map(|img| Evidence::from_obs(img.iter().map(|&v| Obs::Real(v)).collect()))
            .collect()
    }

    pub fn subset(&self, indices: &[usize]) -> Self {
        Self {
            width: self.width,
            height: self.height,
            images: indices.iter().map(|&i| self.images[i].clone()).collect(),
            normalization: indices.iter().map(|&i| self.normalization[i]).collect(),
        }
    }
}

fn normalize(img: &[f64], policy: ConstantPolicy) -> Option<(Vec<f64>, Normalization)> {
    let n = img.len() as f64;
    let mean = img.iter().sum::<f64>() / n;
    let var = img.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let std = var.sqrt();
    if std > 0.0 && img.iter().any(|&v| v != img[0]) {
        let centered: Vec<f64> = img.iter().map(|v| (v - mean) / std).collect();
        // A second pass removes the rounding left by the first.
        let m2 = centered.iter().sum::<f64>() / n;
        let s2 = (centered.iter().map(|v| (v - m2).powi(2)).sum::<f64>() / n).sqrt();
        let out = centered.iter().map(|v| (v - m2) / s2).collect();
        Some((out, Normalization { mean: mean + m2 * std, std: std * s2 }))
    } else {
        match policy {
            ConstantPolicy::Reject => None,
            ConstantPolicy::Zero => Some((vec![0.0; img.len()], Normalization { mean, std: 1.0 })),
        }
    }
}

/// A raw image before normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct RawImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<f64>,
}

/// Comma-separated rows, one image per file.
pub fn parse_csv(text: &str) -> std::result::Result<RawImage, String> {
    let mut pixels = Vec::new();
    let mut width = None;
    let mut height = 0;
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let row: Vec<f64> = line
            .split(',')
            .map(|t| {
                let t = t.trim();
                t.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| format!("line {}: bad value {t:?}", n + 1))
            })
            .collect::<std::result::Result<_, _>>()?;
        match width {
            None => width = Some(row.len()),
            Some(w) if w != row.len() => {
                return Err(format!("line {}: {} values, expected {w}", n + 1, row.len()))
            }
            _ => {}
        }
        pixels.extend(row);
        height += 1;
    }
    let width = width.ok_or("empty image")?;
    Ok(RawImage { width, height, pixels })
}

/// Binary (`P5`) or ASCII (`P2`) graymap, scaled to `[0, 1]` by maxval.
pub fn parse_pgm(bytes: &[u8]) -> std::result::Result<RawImage, String> {
    let mut pos = 0;
    let mut token = || -> std::result::Result<String, String> {
        loop {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos < bytes.len() && bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
                continue;
            }
            break;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() && bytes[pos] != b'#' {
            pos += 1;
        }
        if start == pos {
            return Err("unexpected end of file".into());
        }
        Ok(String::from_utf8_lossy(&bytes[start..pos]).into_owned())
    };
    let magic = token()?;
    let number = |t: String, what: &str| t.parse::<usize>().map_err(|_| format!("bad {what} {t:?}"));
    let width = number(token()?, "width")?;
    let height = number(token()?, "height")?;
    let maxval = number(token()?, "maxval")?;
    if width == 0 || height == 0 {
        return Err(format!("empty image {width}x{height}"));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(format!("maxval {maxval} out of range"));
    }
    let count = width * height;
    let scale = maxval as f64;
    let pixels = match magic.as_str() {
        "P2" => {
            let mut out = Vec::with_capacity(count);
            for _ in 0..count {
                let v = number(token()?, "pixel")?;
                if v > maxval {
                    return Err(format!("pixel {v} exceeds maxval {maxval}"));
                }
                out.push(v as f64 / scale);
            }
            out
        }
        "P5" => {
            // Exactly one whitespace byte separates the header from the data.
            let data = &bytes[(pos + 1).min(bytes.len())..];
            let bpp = if maxval < 256 { 1 } else { 2 };
            if data.len() < count * bpp {
                return Err(format!("expected {} data bytes, found {}", count * bpp, data.len()));
            }
            (0..count)
                .map(|i| {
                    let v = if bpp == 1 {
                        data[i] as usize
                    } else {
                        (data[2 * i] as usize) << 8 | data[2 * i + 1] as usize
                    };
                    v as f64 / scale
                })
                .collect()
        }
        other => return Err(format!("unsupported magic {other:?}")),
    };
    Ok(RawImage { width, height, pixels })
}

fn read_image(path: &Path, format: ImageFormat) -> Result<RawImage> {
    let bytes = fs::read(path).map_err(|source| SpnError::Io { path: path.into(), source })?;
    let parsed = match format {
        ImageFormat::Pgm => parse_pgm(&bytes),
        ImageFormat::Csv => match std::str::from_utf8(&bytes) {
            Ok(text) => parse_csv(text),
            Err(_) => Err("not valid UTF-8".into()),
        },
    };
    parsed.map_err(|message| SpnError::File { path: path.into(), message })
}

/// Files of `format` under `path` in name order, or `path` itself when it
/// is a file.
pub fn dataset_files(path: &Path, format: ImageFormat) -> Result<Vec<PathBuf>> {
    let io = |source| SpnError::Io { path: path.into(), source };
    if !fs::metadata(path).map_err(io)?.is_dir() {
        return Ok(vec![path.to_path_buf()]);
    }
    let mut files = Vec::new();
    for entry in fs::read_dir(path).map_err(io)? {
        let p = entry.map_err(io)?.path();
        if p.is_file() && ImageFormat::from_path(&p) == Some(format) {
            files.push(p);
        }
    }
    files.sort();
    if files.is_empty() {
        return Err(SpnError::File { path: path.into(), message: "no image files found".into() });
    }
    Ok(files)
}

/// Loads every image under `path` (a file or a directory) and normalizes it.
pub fn load_dataset(path: &Path, format: ImageFormat, policy: ConstantPolicy) -> Result<ImageDataset> {
    let files = dataset_files(path, format)?;
    let mut raw = Vec::with_capacity(files.len());
    let mut dims = None;
    for f in &files {
        let img = read_image(f, format)?;
        match dims {
            None => dims = Some((img.width, img.height)),
            Some(d) if d != (img.width, img.height) => {
                return Err(SpnError::File {
                    path: f.clone(),
                    message: format!("image is {}x{}, expected {}x{}", img.width, img.height, d.0, d.1),
                })
            }
            _ => {}
        }
        raw.push(img.pixels);
    }
    let (width, height) = dims.expect("at least one file");
    let mut normalized = Vec::with_capacity(raw.len());
    let mut norms = Vec::with_capacity(raw.len());
    for (img, f) in raw.into_iter().zip(&files) {
        let (n, norm) = normalize(&img, policy).ok_or_else(|| SpnError::File {
            path: f.clone(),
            message: "constant image cannot be normalized".into(),
        })?;
        normalized.push(n);
        norms.push(norm);
    }
    Ok(ImageDataset { width, height, images: normalized, normalization: norms })
}

/// Writes an image as CSV rows.
pub fn write_csv(path: &Path, width: usize, pixels: &[f64]) -> Result<()> {
    let text: String = pixels
        .chunks(width)
        .map(|row| row.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",") + "\n")
        .collect();
    fs::write(path, text).map_err(|source| SpnError::Io { path: path.into(), source })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two_normalization() {
        let ds = ImageDataset::from_raw(2, 2, vec![vec![1.0, 2.0, 3.0, 4.0]], ConstantPolicy::Reject).unwrap();
        let expected = [-1.3416407865, -0.4472135955, 0.4472135955, 1.3416407865];
        for (a, b) in ds.images[0].iter().zip(expected) {
            assert!((a - b).abs() < 1e-9);
        }
        let back = ds.denormalize(0, &ds.images[0]);
        for (a, b) in back.iter().zip([1.0, 2.0, 3.0, 4.0]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_images() {
        let raw = vec![vec![5.0; 4]];
        assert!(ImageDataset::from_raw(2, 2, raw.clone(), ConstantPolicy::Reject).is_err());
        let ds = ImageDataset::from_raw(2, 2, raw, ConstantPolicy::Zero).unwrap();
        assert_eq!(ds.images[0], vec![0.0; 4]);
    }

    #[test]
    fn csv_parsing() {
        let img = parse_csv("1, 2,3\n4,5,6\n\n").unwrap();
        assert_eq!((img.width, img.height), (3, 2));
        assert_eq!(img.pixels, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert!(parse_csv("1,2\n3\n").is_err());
        assert!(parse_csv("1,x\n").is_err());
        assert!(parse_csv("").is_err());
    }

    #[test]
    fn ascii_pgm() {
        let img = parse_pgm(b"P2\n# comment\n2 1\n255\n0 255\n").unwrap();
        assert_eq!(img.pixels, vec![0.0, 1.0]);
        assert!(parse_pgm(b"P2\n2 1\n255\n0 256\n").is_err());
    }

    #[test]
    fn binary_pgm() {
        let mut bytes = b"P5\n2 2\n255\n".to_vec();
        bytes.extend([0u8, 51, 102, 255]);
        let img = parse_pgm(&bytes).unwrap();
        assert_eq!(img.pixels, vec![0.0, 0.2, 0.4, 1.0]);
        let mut wide = b"P5 1 1 65535\n".to_vec();
        wide.extend([0xff, 0xff]);
        assert_eq!(parse_pgm(&wide).unwrap().pixels, vec![1.0]);
        assert!(parse_pgm(b"P5\n2 2\n255\n\x00").is_err());
        assert!(parse_pgm(b"P6\n1 1\n255\n\x00").is_err());
    }
}
