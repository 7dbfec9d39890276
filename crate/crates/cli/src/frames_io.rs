//! 8-bit PNG frame sequences named `frame_%04d.png`, numbered from 1.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use image::{DynamicImage, GrayImage, RgbImage};
use seawake::flowlab::Frame;

pub fn frame_name(index: usize) -> String {
    format!("frame_{index:04}.png")
}

fn to_u8(v: f64) -> u8 {
    (v * 255.0).round().clamp(0.0, 255.0) as u8
}

pub fn write_frame(frame: &Frame, path: &Path) -> Result<()> {
    let (w, h) = (frame.width() as u32, frame.height() as u32);
    let bytes: Vec<u8> = frame.samples().iter().map(|&v| to_u8(v)).collect();
    let img = match frame.channels() {
        1 => DynamicImage::ImageLuma8(GrayImage::from_raw(w, h, bytes).expect("buffer matches frame size")),
        _ => DynamicImage::ImageRgb8(RgbImage::from_raw(w, h, bytes).expect("buffer matches frame size")),
    };
    img.save_with_format(path, image::ImageFormat::Png)
        .with_context(|| format!("io: cannot write {}", path.display()))
}

/// Grey PNGs load as one channel, everything else as RGB.
pub fn read_frame(path: &Path) -> Result<Frame> {
    let img = image::open(path).with_context(|| format!("io: cannot read image {}", path.display()))?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let (channels, raw) = match img {
        DynamicImage::ImageLuma8(g) => (1, g.into_raw()),
        other => (3, other.to_rgb8().into_raw()),
    };
    let samples = raw.into_iter().map(|b| f64::from(b) / 255.0).collect();
    Frame::new(w, h, channels, samples)
        .map_err(seawake::Error::from)
        .with_context(|| format!("io: {}", path.display()))
}

/// Writes `frames` as `frame_{first_index}.png`, `frame_{first_index + 1}.png`, ...
pub fn write_sequence(frames: &[Frame], dir: &Path, first_index: usize) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).with_context(|| format!("io: cannot create {}", dir.display()))?;
    frames
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let path = dir.join(frame_name(first_index + i));
            write_frame(f, &path)?;
            Ok(path)
        })
        .collect()
}

/// Every `frame_NNNN.png` in `dir`, in frame-number order.
pub fn list_sequence(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = std::fs::read_dir(dir).with_context(|| format!("io: cannot list {}", dir.display()))?;
    let mut numbered = Vec::new();
    for entry in entries {
        let path = entry.with_context(|| format!("io: cannot list {}", dir.display()))?.path();
        let Some(name) = path.file_name().and_then(|n| n.to_str()) else {
            continue;
        };
        if let Some(n) = name
            .strip_prefix("frame_")
            .and_then(|s| s.strip_suffix(".png"))
            .and_then(|s| s.parse::<usize>().ok())
        {
            numbered.push((n, path));
        }
    }
    numbered.sort();
    Ok(numbered.into_iter().map(|(_, p)| p).collect())
}

pub fn read_sequence(dir: &Path) -> Result<Vec<Frame>> {
    let paths = list_sequence(dir)?;
    if paths.is_empty() {
        bail!("contract: no frame_NNNN.png files in {}", dir.display());
    }
    paths.iter().map(|p| read_frame(p)).collect()
}
