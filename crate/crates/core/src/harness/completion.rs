//! Occlusion completion, mean squared error scoring and the
//! nearest-neighbor baseline.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Result, SpnError};
use crate::graph::Spn;
use crate::harness::dataset::ImageDataset;
use crate::inference::{mpe_with, Evidence, MpeMode, Obs, PassState};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
    Top,
    Bottom,
}

impl FromStr for Side {
    type Err = SpnError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "left" => Ok(Self::Left),
            "right" => Ok(Self::Right),
            "top" => Ok(Self::Top),
            "bottom" => Ok(Self::Bottom),
            _ => Err(SpnError::Input(format!("unknown side {s:?}"))),
        }
    }
}

/// Hides one half of every image. With an odd side length the extra line
/// stays visible.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CompletionTask {
    pub side: Side,
}

impl CompletionTask {
    pub fn new(side: Side) -> Self {
        Self { side }
    }

    /// `true` for occluded pixels, row-major.
    pub fn mask(&self, width: usize, height: usize) -> Vec<bool> {
        let (hw, hh) = (width / 2, height / 2);
        let mut mask = vec![false; width * height];
        for y in 0..height {
            for x in 0..width {
                mask[y * width + x] = match self.side {
                    Side::Left => x < hw,
                    Side::Right => x >= width - hw,
                    Side::Top => y < hh,
                    Side::Bottom => y >= height - hh,
                };
            }
        }
        mask
    }

    /// Evidence with the occluded pixels marginalized.
    pub fn evidence(&self, image: &[f64], mask: &[bool]) -> Evidence {
        Evidence::from_obs(
            image
                .iter()
                .zip(mask)
                .map(|(&v, &hidden)| if hidden { Obs::Missing } else { Obs::Real(v) })
                .collect(),
        )
    }
}

/// Mean squared error over the masked pixels; zero when none are masked.
pub fn masked_mse(truth: &[f64], guess: &[f64], mask: &[bool]) -> f64 {
    let (mut total, mut n) = (0.0, 0usize);
    for ((t, g), &m) in truth.iter().zip(guess).zip(mask) {
        if m {
            total += (t - g).powi(2);
            n += 1;
        }
    }
    if n == 0 {
        0.0
    } else {
        total / n as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImageCompletion {
    pub index: usize,
    /// The completed image; visible pixels are copied from the input.
    pub pixels: Vec<f64>,
    /// `None` when the visible half had zero probability.
    pub mse: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompletionReport {
    pub images: Vec<ImageCompletion>,
    /// Mean over the images that were scored.
    pub mean_mse: f64,
}

impl fmt::Display for CompletionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for img in &self.images {
            match img.mse {
                Some(mse) => writeln!(f, "image={} mse={mse}", img.index)?,
                None => writeln!(f, "image={} skipped=zero_evidence", img.index)?,
            }
        }
        write!(f, "mean_mse={}", self.mean_mse)
    }
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        f64::NAN
    } else {
        sum / n as f64
    }
}

/// Fills the occluded half of each image with the MPE completion.
pub fn complete_and_score(
    model: &Spn,
    dataset: &ImageDataset,
    task: CompletionTask,
    mode: MpeMode,
) -> Result<CompletionReport> {
    if model.vars().len() != dataset.pixels() {
        return Err(SpnError::Input(format!(
            "model has {} variables but images have {} pixels",
            model.vars().len(),
            dataset.pixels()
        )));
    }
    let mask = task.mask(dataset.width, dataset.height);
    let results: Vec<Result<ImageCompletion>> = dataset
        .images
        .par_iter()
        .enumerate()
        .map_init(
            || PassState::new(model),
            |pass, (index, image)| {
                let e = task.evidence(image, &mask);
                match mpe_with(model, &e, mode, pass, |_, _| 0.0) {
                    Ok(r) => {
                        let pixels: Vec<f64> = image
                            .iter()
                            .zip(&mask)
                            .zip(&r.state)
                            .map(|((&v, &hidden), s)| if hidden { s.as_f64() } else { v })
                            .collect();
                        let mse = Some(masked_mse(image, &pixels, &mask));
                        Ok(ImageCompletion { index, pixels, mse })
                    }
                    Err(SpnError::ZeroEvidence) => Ok(ImageCompletion { index, pixels: image.clone(), mse: None }),
                    Err(e) => Err(e),
                }
            },
        )
        .collect();
    let images = results.into_iter().collect::<Result<Vec<_>>>()?;
    let mean_mse = mean(images.iter().filter_map(|i| i.mse));
    Ok(CompletionReport { images, mean_mse })
}

/// Completes each test image with the hidden half of the training image
/// whose visible half is closest in Euclidean distance.
pub fn nn_baseline(train: &ImageDataset, test: &ImageDataset, task: CompletionTask) -> Result<CompletionReport> {
    if train.is_empty() {
        return Err(SpnError::Input("nearest-neighbor baseline needs training images".into()));
    }
    if (train.width, train.height) != (test.width, test.height) {
        return Err(SpnError::Input("training and test images differ in size".into()));
    }
    let mask = task.mask(test.width, test.height);
    let visible_distance = |a: &[f64], b: &[f64]| -> f64 {
        a.iter().zip(b).zip(&mask).filter(|(_, &m)| !m).map(|((x, y), _)| (x - y).powi(2)).sum()
    };
    let images: Vec<ImageCompletion> = test
        .images
        .par_iter()
        .enumerate()
        .map(|(index, image)| {
            let mut best = (f64::INFINITY, 0);
            for (j, cand) in train.images.iter().enumerate() {
                let d = visible_distance(image, cand);
                if d < best.0 {
                    best = (d, j);
                }
            }
            let source = &train.images[best.1];
            let pixels: Vec<f64> =
                image.iter().zip(source).zip(&mask).map(|((&v, &s), &m)| if m { s } else { v }).collect();
            let mse = Some(masked_mse(image, &pixels, &mask));
            ImageCompletion { index, pixels, mse }
        })
        .collect();
    let mean_mse = mean(images.iter().filter_map(|i| i.mse));
    Ok(CompletionReport { images, mean_mse })
}

/// Raw `size × size` images with one full bar: rows `0..size` first, then
/// columns. The bar is 1 and the background 0.
pub fn bar_world(size: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(2 * size);
    for r in 0..size {
        out.push((0..size * size).map(|p| f64::from(u8::from(p / size == r))).collect());
    }
    for c in 0..size {
        out.push((0..size * size).map(|p| f64::from(u8::from(p % size == c))).collect());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::dataset::ConstantPolicy;

    #[test]
    fn masks_split_in_half() {
        let left = CompletionTask::new(Side::Left).mask(3, 2);
        assert_eq!(left, vec![true, false, false, true, false, false]);
        let right = CompletionTask::new(Side::Right).mask(3, 2);
        assert_eq!(right, vec![false, false, true, false, false, true]);
        let bottom = CompletionTask::new(Side::Bottom).mask(2, 2);
        assert_eq!(bottom, vec![false, false, true, true]);
        for side in [Side::Left, Side::Right, Side::Top, Side::Bottom] {
            let m = CompletionTask::new(side).mask(8, 8);
            assert_eq!(m.iter().filter(|&&x| x).count(), 32);
        }
        assert!(CompletionTask::new(Side::Left).mask(1, 4).iter().all(|&x| !x));
    }

    #[test]
    fn mse_basics() {
        assert_eq!(masked_mse(&[1.0, 2.0], &[0.0, 0.0], &[true, false]), 1.0);
        assert_eq!(masked_mse(&[1.0], &[5.0], &[false]), 0.0);
    }

    fn bars() -> ImageDataset {
        ImageDataset::from_raw(4, 4, bar_world(4), ConstantPolicy::Reject).unwrap()
    }

    #[test]
    fn nn_self_match_is_exact() {
        // Row bars have pairwise distinct right halves.
        let ds = bars().subset(&[0, 1, 2, 3]);
        let report = nn_baseline(&ds, &ds, CompletionTask::new(Side::Left)).unwrap();
        assert_eq!(report.mean_mse, 0.0);
    }

    #[test]
    fn nn_single_training_image_is_forced() {
        let ds = bars();
        let train = ds.subset(&[5]);
        let report = nn_baseline(&train, &ds, CompletionTask::new(Side::Top)).unwrap();
        let mask = CompletionTask::new(Side::Top).mask(4, 4);
        for img in &report.images {
            for p in 0..16 {
                if mask[p] {
                    assert_eq!(img.pixels[p], train.images[0][p]);
                }
            }
        }
        assert!(nn_baseline(&ds.subset(&[]), &ds, CompletionTask::new(Side::Top)).is_err());
    }

    #[test]
    fn bar_world_layout() {
        let bars = bar_world(3);
        assert_eq!(bars.len(), 6);
        assert_eq!(bars[1], vec![0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0]);
        assert_eq!(bars[5], vec![0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn report_format() {
        let report = CompletionReport {
            images: vec![
                ImageCompletion { index: 0, pixels: vec![], mse: Some(0.5) },
                ImageCompletion { index: 1, pixels: vec![], mse: None },
            ],
            mean_mse: 0.5,
        };
        assert_eq!(report.to_string(), "image=0 mse=0.5\nimage=1 skipped=zero_evidence\nmean_mse=0.5");
    }
}
