//! PSNR, SSIM and frame-averaged SSIM.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::media::{ColorImage, ColorVideo, PIXEL_MAX};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricConfig {
    /// Dynamic range `L`.
    pub peakval: f64,
    /// Side of the square Gaussian window; odd and at least 3.
    pub ssim_window: usize,
    pub ssim_sigma: f64,
}

impl Default for MetricConfig {
    fn default() -> Self {
        MetricConfig {
            peakval: PIXEL_MAX,
            ssim_window: 11,
            ssim_sigma: 1.5,
        }
    }
}

impl MetricConfig {
    pub fn c1(&self) -> f64 {
        (0.01 * self.peakval).powi(2)
    }

    pub fn c2(&self) -> f64 {
        (0.03 * self.peakval).powi(2)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.peakval.is_finite() && self.peakval > 0.0) {
            return Err(Error::arg("peakval must be positive"));
        }
        if self.ssim_window < 3 || self.ssim_window.is_multiple_of(2) {
            return Err(Error::arg(format!(
                "ssim window must be odd and >= 3, got {}",
                self.ssim_window
            )));
        }
        if !(self.ssim_sigma.is_finite() && self.ssim_sigma > 0.0) {
            return Err(Error::arg("ssim sigma must be positive"));
        }
        Ok(())
    }
}

/// `10 log10(peak² / MSE)` over paired scalar sequences.
///
/// Identical inputs give `f64::INFINITY`.
pub fn psnr_scalars<'a>(
    x: impl IntoIterator<Item = &'a [f64]>,
    t: impl IntoIterator<Item = &'a [f64]>,
    cfg: &MetricConfig,
) -> Result<f64> {
    cfg.validate()?;
    let (mut sum, mut n) = (0.0, 0usize);
    let mut ti = t.into_iter();
    for xs in x {
        let ts = ti
            .next()
            .ok_or_else(|| Error::shape("inputs differ in length"))?;
        if xs.len() != ts.len() {
            return Err(Error::shape("inputs differ in length"));
        }
        sum += xs
            .iter()
            .zip(ts)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>();
        n += xs.len();
    }
    if ti.next().is_some() {
        return Err(Error::shape("inputs differ in length"));
    }
    if n == 0 {
        return Err(Error::arg("empty input"));
    }
    let mse = sum / n as f64;
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (cfg.peakval * cfg.peakval / mse).log10())
}

fn check_dims(x: &ColorImage, t: &ColorImage) -> Result<()> {
    if (x.height(), x.width()) != (t.height(), t.width()) {
        return Err(Error::shape(format!(
            "images are {}x{} and {}x{}",
            x.height(),
            x.width(),
            t.height(),
            t.width()
        )));
    }
    Ok(())
}

fn check_videos(x: &ColorVideo, t: &ColorVideo) -> Result<()> {
    if x.len() != t.len() {
        return Err(Error::shape(format!(
            "videos have {} and {} frames",
            x.len(),
            t.len()
        )));
    }
    check_dims(x.frame(0), t.frame(0))
}

pub fn psnr(x: &ColorImage, t: &ColorImage, cfg: &MetricConfig) -> Result<f64> {
    check_dims(x, t)?;
    psnr_scalars(
        x.channels().iter().map(Vec::as_slice),
        t.channels().iter().map(Vec::as_slice),
        cfg,
    )
}

/// PSNR with one MSE over every scalar of every frame.
pub fn psnr_video(x: &ColorVideo, t: &ColorVideo, cfg: &MetricConfig) -> Result<f64> {
    check_videos(x, t)?;
    let xs = x
        .frames()
        .iter()
        .flat_map(|f| f.channels().iter().map(Vec::as_slice));
    let ts = t
        .frames()
        .iter()
        .flat_map(|f| f.channels().iter().map(Vec::as_slice));
    psnr_scalars(xs, ts, cfg)
}

fn gaussian_kernel(size: usize, sigma: f64) -> Vec<f64> {
    let c = (size / 2) as f64;
    let k: Vec<f64> = (0..size)
        .map(|i| (-((i as f64 - c).powi(2)) / (2.0 * sigma * sigma)).exp())
        .collect();
    let s: f64 = k.iter().sum();
    k.into_iter().map(|v| v / s).collect()
}

/// Index into `0..n` with half-sample symmetric reflection (`d c b a | a b c d`).
fn reflect(i: isize, n: usize) -> usize {
    let n = n as isize;
    let period = 2 * n;
    let m = i.rem_euclid(period);
    (if m < n { m } else { period - 1 - m }) as usize
}

/// Separable Gaussian filter of a column-major `h × w` plane.
fn filter(src: &[f64], h: usize, w: usize, k: &[f64]) -> Vec<f64> {
    let r = (k.len() / 2) as isize;
    let mut tmp = vec![0.0; h * w];
    for j in 0..w {
        for i in 0..h {
            tmp[i + h * j] = k
                .iter()
                .enumerate()
                .map(|(a, &kv)| kv * src[reflect(i as isize + a as isize - r, h) + h * j])
                .sum();
        }
    }
    let mut out = vec![0.0; h * w];
    for j in 0..w {
        for i in 0..h {
            out[i + h * j] = k
                .iter()
                .enumerate()
                .map(|(a, &kv)| kv * tmp[i + h * reflect(j as isize + a as isize - r, w)])
                .sum();
        }
    }
    out
}

/// Mean of the SSIM map of one channel.
fn ssim_plane(x: &[f64], t: &[f64], h: usize, w: usize, cfg: &MetricConfig) -> f64 {
    let k = gaussian_kernel(cfg.ssim_window, cfg.ssim_sigma);
    let sq = |a: &[f64], b: &[f64]| -> Vec<f64> { a.iter().zip(b).map(|(u, v)| u * v).collect() };
    let mu_x = filter(x, h, w, &k);
    let mu_t = filter(t, h, w, &k);
    let e_xx = filter(&sq(x, x), h, w, &k);
    let e_tt = filter(&sq(t, t), h, w, &k);
    let e_xt = filter(&sq(x, t), h, w, &k);
    let (c1, c2) = (cfg.c1(), cfg.c2());
    let total: f64 = (0..h * w)
        .map(|l| {
            let (mx, mt) = (mu_x[l], mu_t[l]);
            let vx = e_xx[l] - mx * mx;
            let vt = e_tt[l] - mt * mt;
            let cov = e_xt[l] - mx * mt;
            ((2.0 * mx * mt + c1) * (2.0 * cov + c2)) / ((mx * mx + mt * mt + c1) * (vx + vt + c2))
        })
        .sum();
    total / (h * w) as f64
}

/// SSIM with a Gaussian window and reflective borders, computed per RGB
/// channel and averaged.
pub fn ssim(x: &ColorImage, t: &ColorImage, cfg: &MetricConfig) -> Result<f64> {
    cfg.validate()?;
    check_dims(x, t)?;
    let (h, w) = (x.height(), x.width());
    if h < cfg.ssim_window || w < cfg.ssim_window {
        return Err(Error::shape(format!(
            "{h}x{w} image is smaller than the {0}x{0} SSIM window",
            cfg.ssim_window
        )));
    }
    let s: f64 = (0..3)
        .map(|c| ssim_plane(x.channel(c), t.channel(c), h, w, cfg))
        .sum();
    Ok(s / 3.0)
}

/// Per-frame SSIM values.
pub fn ssim_frames(x: &ColorVideo, t: &ColorVideo, cfg: &MetricConfig) -> Result<Vec<f64>> {
    check_videos(x, t)?;
    x.frames()
        .par_iter()
        .zip(t.frames())
        .map(|(a, b)| ssim(a, b, cfg))
        .collect()
}

/// Mean SSIM over frames.
pub fn assim(x: &ColorVideo, t: &ColorVideo, cfg: &MetricConfig) -> Result<f64> {
    let per = ssim_frames(x, t, cfg)?;
    Ok(per.iter().sum::<f64>() / per.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::rng;
    use rand::Rng;

    fn noisy(base: &ColorImage, amp: f64, seed: u64) -> ColorImage {
        let mut r = rng(seed);
        let ch = [0, 1, 2].map(|c| {
            base.channel(c)
                .iter()
                .map(|&v| v + amp * (r.gen::<f64>() - 0.5))
                .collect()
        });
        ColorImage::new(base.height(), base.width(), ch).unwrap()
    }

    fn card(h: usize, w: usize) -> ColorImage {
        ColorImage::from_fn(h, w, |i, j| {
            [
                (i * 4 % 256) as f64,
                (j * 4 % 256) as f64,
                ((i + j) * 2 % 256) as f64,
            ]
        })
        .unwrap()
    }

    #[test]
    fn kernel_and_reflection() {
        let k = gaussian_kernel(11, 1.5);
        assert!((k.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert_eq!(k[0], k[10]);
        assert_eq!(reflect(-1, 5), 0);
        assert_eq!(reflect(-2, 5), 1);
        assert_eq!(reflect(5, 5), 4);
        assert_eq!(reflect(6, 5), 3);
        assert_eq!(reflect(3, 5), 3);
    }

    #[test]
    fn psnr_examples() {
        let cfg = MetricConfig::default();
        let a = card(8, 8);
        assert_eq!(psnr(&a, &a, &cfg).unwrap(), f64::INFINITY);
        let shifted = ColorImage::new(
            8,
            8,
            a.channels()
                .clone()
                .map(|c| c.iter().map(|v| v + 16.0).collect()),
        )
        .unwrap();
        let want = 10.0 * (255.0f64 * 255.0 / 256.0).log10();
        assert!((psnr(&shifted, &a, &cfg).unwrap() - want).abs() < 1e-9);
        assert!(psnr(&card(8, 9), &a, &cfg).is_err());
    }

    #[test]
    fn psnr_decreases_with_noise() {
        let cfg = MetricConfig::default();
        let base = card(16, 16);
        let vals: Vec<f64> = [2.0, 8.0, 32.0]
            .iter()
            .map(|&amp| psnr(&noisy(&base, amp, 5), &base, &cfg).unwrap())
            .collect();
        assert!(vals[0] > vals[1] && vals[1] > vals[2], "{vals:?}");
    }

    #[test]
    fn ssim_examples() {
        let cfg = MetricConfig::default();
        let a = card(64, 64);
        assert!((ssim(&a, &a, &cfg).unwrap() - 1.0).abs() <= 1e-12);
        let black = ColorImage::filled(64, 64, [0.0; 3]).unwrap();
        let white = ColorImage::filled(64, 64, [255.0; 3]).unwrap();
        assert!(ssim(&black, &white, &cfg).unwrap() < 0.05);
        let b = noisy(&a, 40.0, 9);
        let (s1, s2) = (ssim(&a, &b, &cfg).unwrap(), ssim(&b, &a, &cfg).unwrap());
        assert!((s1 - s2).abs() < 1e-12);
        assert!(s1 < 1.0 && s1 > -1.0);
        assert!(ssim(&card(8, 64), &card(8, 64), &cfg).is_err());
    }

    #[test]
    fn constant_images_closed_form() {
        // constant planes: variances vanish, so SSIM reduces to the luminance term
        let cfg = MetricConfig::default();
        let x = ColorImage::filled(16, 16, [100.0; 3]).unwrap();
        let t = ColorImage::filled(16, 16, [50.0; 3]).unwrap();
        let c1 = cfg.c1();
        let want = (2.0 * 100.0 * 50.0 + c1) / (100.0f64.powi(2) + 50.0f64.powi(2) + c1);
        assert!((ssim(&x, &t, &cfg).unwrap() - want).abs() < 1e-9);
    }

    #[test]
    fn assim_examples() {
        let cfg = MetricConfig::default();
        let a = card(16, 16);
        let b = noisy(&a, 60.0, 2);
        let s = ssim(&b, &a, &cfg).unwrap();
        let ref_v = ColorVideo::new(vec![a.clone(), a.clone()]).unwrap();
        let rec = ColorVideo::new(vec![a.clone(), b]).unwrap();
        assert!((assim(&rec, &rec, &cfg).unwrap() - 1.0).abs() < 1e-12);
        assert!((assim(&rec, &ref_v, &cfg).unwrap() - (1.0 + s) / 2.0).abs() < 1e-12);
        let one = ColorVideo::new(vec![a.clone()]).unwrap();
        assert!(assim(&one, &ref_v, &cfg).is_err());
    }

    #[test]
    fn config_validation() {
        let mut c = MetricConfig::default();
        assert!((c.c1() - 6.5025).abs() < 1e-12);
        assert!((c.c2() - 58.5225).abs() < 1e-12);
        c.ssim_window = 10;
        assert!(c.validate().is_err());
        c.ssim_window = 1;
        assert!(c.validate().is_err());
    }
}
