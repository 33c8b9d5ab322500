//! Color images and videos as pure quaternion matrices and tensors, plus file I/O.
//!
//! Pixel data stays in `[0, 255]` as `f64` throughout. Channel planes are
//! column-major (`row + height * col`), the same flat order used by
//! [`QuaternionMatrix`] and [`QuaternionTensor`].

use std::fs::{self, File};
use std::io::{BufReader, BufWriter};
use std::path::Path;

use image::{ColorType, ImageFormat, RgbImage};
use rayon::prelude::*;

use crate::completion::SamplingMask;
use crate::error::{Error, Result};
use crate::linalg::QuaternionMatrix;
use crate::tensor::QuaternionTensor;

pub const PIXEL_MAX: f64 = 255.0;

#[derive(Debug, Clone, PartialEq)]
pub struct ColorImage {
    height: usize,
    width: usize,
    /// R, G, B planes.
    channels: [Vec<f64>; 3],
}

impl ColorImage {
    pub fn new(height: usize, width: usize, channels: [Vec<f64>; 3]) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::shape("image dimensions must be positive"));
        }
        if channels.iter().any(|c| c.len() != height * width) {
            return Err(Error::shape(format!(
                "each channel of a {height}x{width} image needs {} values",
                height * width
            )));
        }
        Ok(ColorImage {
            height,
            width,
            channels,
        })
    }

    pub fn filled(height: usize, width: usize, rgb: [f64; 3]) -> Result<Self> {
        let n = height * width;
        Self::new(height, width, rgb.map(|v| vec![v; n]))
    }

    pub fn from_fn(
        height: usize,
        width: usize,
        mut f: impl FnMut(usize, usize) -> [f64; 3],
    ) -> Result<Self> {
        let n = height * width;
        let mut channels = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
        for j in 0..width {
            for i in 0..height {
                let px = f(i, j);
                for c in 0..3 {
                    channels[c][i + height * j] = px[c];
                }
            }
        }
        Self::new(height, width, channels)
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn channel(&self, c: usize) -> &[f64] {
        &self.channels[c]
    }

    pub fn channels(&self) -> &[Vec<f64>; 3] {
        &self.channels
    }

    pub fn pixel(&self, i: usize, j: usize) -> [f64; 3] {
        let l = i + self.height * j;
        [
            self.channels[0][l],
            self.channels[1][l],
            self.channels[2][l],
        ]
    }

    fn from_rgb8(img: &RgbImage) -> Self {
        let (w, h) = (img.width() as usize, img.height() as usize);
        let mut channels = [vec![0.0; w * h], vec![0.0; w * h], vec![0.0; w * h]];
        for (x, y, p) in img.enumerate_pixels() {
            let l = y as usize + h * x as usize;
            for (plane, &v) in channels.iter_mut().zip(&p.0) {
                plane[l] = f64::from(v);
            }
        }
        ColorImage {
            height: h,
            width: w,
            channels,
        }
    }

    /// Clamps to `[0, 255]` and rounds half to even.
    pub fn to_rgb8(&self) -> RgbImage {
        RgbImage::from_fn(self.width as u32, self.height as u32, |x, y| {
            let l = y as usize + self.height * x as usize;
            image::Rgb([0, 1, 2].map(|c| quantize(self.channels[c][l])))
        })
    }
}

fn quantize(v: f64) -> u8 {
    if v.is_nan() {
        return 0;
    }
    v.clamp(0.0, PIXEL_MAX).round_ties_even() as u8
}

#[derive(Debug, Clone, PartialEq)]
pub struct ColorVideo {
    frames: Vec<ColorImage>,
}

impl ColorVideo {
    pub fn new(frames: Vec<ColorImage>) -> Result<Self> {
        let first = frames
            .first()
            .ok_or_else(|| Error::shape("video needs at least one frame"))?;
        let dims = (first.height, first.width);
        if let Some((t, f)) = frames
            .iter()
            .enumerate()
            .find(|(_, f)| (f.height, f.width) != dims)
        {
            return Err(Error::shape(format!(
                "frame {} is {}x{}, expected {}x{}",
                t + 1,
                f.height,
                f.width,
                dims.0,
                dims.1
            )));
        }
        Ok(ColorVideo { frames })
    }

    pub fn height(&self) -> usize {
        self.frames[0].height
    }

    pub fn width(&self) -> usize {
        self.frames[0].width
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn frames(&self) -> &[ColorImage] {
        &self.frames
    }

    pub fn frame(&self, t: usize) -> &ColorImage {
        &self.frames[t]
    }
}

/// Encodes each pixel as `0 + r i + g j + b k`.
pub fn image_to_qmatrix(img: &ColorImage) -> QuaternionMatrix {
    let n = img.height * img.width;
    QuaternionMatrix::from_column_major(
        img.height,
        img.width,
        [
            vec![0.0; n],
            img.channels[0].clone(),
            img.channels[1].clone(),
            img.channels[2].clone(),
        ],
    )
    .expect("channel lengths match dimensions")
}

/// Reads the three imaginary planes back as R, G, B clamped to `[0, 255]`;
/// the real part is discarded.
pub fn qmatrix_to_image(q: &QuaternionMatrix) -> Result<ColorImage> {
    let channels = [1, 2, 3].map(|c| q.plane(c).iter().map(|&v| clamp_pixel(v)).collect());
    ColorImage::new(q.rows(), q.cols(), channels)
}

fn clamp_pixel(v: f64) -> f64 {
    if v.is_nan() {
        0.0
    } else {
        v.clamp(0.0, PIXEL_MAX)
    }
}

/// Height × width × frames pure quaternion tensor.
pub fn video_to_qtensor(v: &ColorVideo) -> QuaternionTensor {
    let shape = [v.height(), v.width(), v.len()];
    let n: usize = shape.iter().product();
    let mut planes = [
        vec![0.0; n],
        Vec::with_capacity(n),
        Vec::with_capacity(n),
        Vec::with_capacity(n),
    ];
    for f in &v.frames {
        for c in 0..3 {
            planes[c + 1].extend_from_slice(&f.channels[c]);
        }
    }
    QuaternionTensor::from_planes(&shape, planes).expect("frame sizes are uniform")
}

/// Inverse of [`video_to_qtensor`] for order-3 tensors, clamping to `[0, 255]`.
pub fn qtensor_to_video(t: &QuaternionTensor) -> Result<ColorVideo> {
    if t.order() != 3 {
        return Err(Error::shape(format!(
            "video tensors must have order 3, got {}",
            t.order()
        )));
    }
    let (h, w, frames) = (t.shape()[0], t.shape()[1], t.shape()[2]);
    let n = h * w;
    let out = (0..frames)
        .map(|f| {
            let channels = [1, 2, 3].map(|c| {
                t.plane(c)[f * n..(f + 1) * n]
                    .iter()
                    .map(|&v| clamp_pixel(v))
                    .collect()
            });
            ColorImage::new(h, w, channels)
        })
        .collect::<Result<_>>()?;
    ColorVideo::new(out)
}

/// Anything `load_media` can return.
#[derive(Debug, Clone, PartialEq)]
pub enum Media {
    Image(ColorImage),
    Video(ColorVideo),
    /// Raw `qt1` tensor of any supported order.
    Tensor(QuaternionTensor),
}

impl Media {
    pub fn to_tensor(&self) -> QuaternionTensor {
        match self {
            Media::Image(img) => QuaternionTensor::from_matrix(&image_to_qmatrix(img)),
            Media::Video(v) => video_to_qtensor(v),
            Media::Tensor(t) => t.clone(),
        }
    }

    pub fn shape(&self) -> Vec<usize> {
        match self {
            Media::Image(img) => vec![img.height, img.width],
            Media::Video(v) => vec![v.height(), v.width(), v.len()],
            Media::Tensor(t) => t.shape().to_vec(),
        }
    }

    /// Rebuilds media of the same kind as `self` from a recovered tensor.
    pub fn like(&self, t: &QuaternionTensor) -> Result<Media> {
        if t.shape() != self.shape().as_slice() {
            return Err(Error::shape(format!(
                "tensor shape {:?} does not match media shape {:?}",
                t.shape(),
                self.shape()
            )));
        }
        match self {
            Media::Image(_) => Ok(Media::Image(qmatrix_to_image(&t.unfold(0)?)?)),
            Media::Video(_) => Ok(Media::Video(qtensor_to_video(t)?)),
            Media::Tensor(_) => Ok(Media::Tensor(t.clone())),
        }
    }
}

fn extension(path: &Path) -> Option<String> {
    path.extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
}

/// Loads a PNG/BMP image, a directory of `frame_NNNN.png` frames, or a `qt1` tensor.
pub fn load_media(path: &Path) -> Result<Media> {
    if path.is_dir() {
        return load_frames(path).map(Media::Video);
    }
    match extension(path).as_deref() {
        Some("png" | "bmp") => load_image(path).map(Media::Image),
        Some("qt1") => {
            let f = BufReader::new(File::open(path)?);
            QuaternionTensor::read_qt1(f).map(Media::Tensor)
        }
        _ => Err(Error::UnsupportedFormat(format!(
            "{}: expected .png, .bmp, .qt1 or a frame directory",
            path.display()
        ))),
    }
}

/// Writes media; images go to `.png`/`.bmp`, videos to a frame directory,
/// tensors to `.qt1`.
pub fn save_media(path: &Path, media: &Media) -> Result<()> {
    match media {
        Media::Image(img) => save_image(path, img),
        Media::Video(v) => save_frames(path, v),
        Media::Tensor(t) => {
            if extension(path).as_deref() != Some("qt1") {
                return Err(Error::UnsupportedFormat(format!(
                    "{}: tensors are written as .qt1",
                    path.display()
                )));
            }
            let mut w = BufWriter::new(File::create(path)?);
            t.write_qt1(&mut w)?;
            std::io::Write::flush(&mut w)?;
            Ok(())
        }
    }
}

/// Loads an 8-bit image; grayscale is expanded to RGB and alpha is dropped.
pub fn load_image(path: &Path) -> Result<ColorImage> {
    let img = image::ImageReader::open(path)?
        .with_guessed_format()?
        .decode()?;
    match img.color() {
        ColorType::L8 | ColorType::La8 | ColorType::Rgb8 | ColorType::Rgba8 => {}
        other => {
            return Err(Error::UnsupportedDepth(format!(
                "{}: {other:?} has {} bits per channel, only 8-bit images are supported",
                path.display(),
                other.bits_per_pixel() / u16::from(other.channel_count())
            )))
        }
    }
    Ok(ColorImage::from_rgb8(&img.to_rgb8()))
}

pub fn save_image(path: &Path, img: &ColorImage) -> Result<()> {
    let format = match extension(path).as_deref() {
        Some("png") => ImageFormat::Png,
        Some("bmp") => ImageFormat::Bmp,
        _ => {
            return Err(Error::UnsupportedFormat(format!(
                "{}: images are written as .png or .bmp",
                path.display()
            )))
        }
    };
    img.to_rgb8().save_with_format(path, format)?;
    Ok(())
}

/// Frame number of `frame_<digits>.png`, if the name matches.
fn frame_number(name: &str) -> Option<usize> {
    let digits = name.strip_prefix("frame_")?.strip_suffix(".png")?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok()
}

/// Frames must be numbered `1..=T` without gaps; other files are ignored.
pub fn load_frames(dir: &Path) -> Result<ColorVideo> {
    let mut numbered = Vec::new();
    for entry in fs::read_dir(dir)? {
        let entry = entry?;
        if let Some(n) = entry.file_name().to_str().and_then(frame_number) {
            numbered.push((n, entry.path()));
        }
    }
    if numbered.is_empty() {
        return Err(Error::malformed(format!(
            "{}: no frame_NNNN.png files",
            dir.display()
        )));
    }
    numbered.sort();
    for (expect, (n, path)) in (1..).zip(&numbered) {
        if *n != expect {
            return Err(Error::malformed(format!(
                "{}: frame numbering must run 1..={} without gaps or duplicates, found {}",
                dir.display(),
                numbered.len(),
                path.display()
            )));
        }
    }
    let frames = numbered
        .par_iter()
        .map(|(_, p)| load_image(p))
        .collect::<Result<Vec<_>>>()?;
    ColorVideo::new(frames)
}

pub fn frame_file_name(t: usize) -> String {
    format!("frame_{t:04}.png")
}

pub fn save_frames(dir: &Path, v: &ColorVideo) -> Result<()> {
    fs::create_dir_all(dir)?;
    v.frames
        .par_iter()
        .enumerate()
        .try_for_each(|(t, f)| save_image(&dir.join(frame_file_name(t + 1)), f))
}

pub fn load_mask(path: &Path) -> Result<SamplingMask> {
    SamplingMask::read_qmsk1(BufReader::new(File::open(path)?))
}

/// Loads a mask and checks it against the shape of the data it will be applied to.
pub fn load_mask_for(path: &Path, shape: &[usize]) -> Result<SamplingMask> {
    let mask = load_mask(path)?;
    if mask.shape() != shape {
        return Err(Error::shape(format!(
            "mask shape {:?} does not match media shape {shape:?}",
            mask.shape()
        )));
    }
    Ok(mask)
}

pub fn save_mask(path: &Path, mask: &SamplingMask) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    mask.write_qmsk1(&mut w)?;
    std::io::Write::flush(&mut w)?;
    Ok(())
}
