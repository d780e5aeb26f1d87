//! Total-variation denoising and inpainting of grayscale images.
//!
//! The objective is `Σ_{S} (y - μ)² + λ Σ_{pixels} Σ_{4-neighbours}
//! sqrt((μ_p - μ_q)² + ε)`, where the double sum visits every neighbouring
//! pair twice. Each TV term is majorized by a quadratic tangent at the
//! current image, and the surrogate is minimized over one checkerboard colour
//! at a time: pixels of one colour share no neighbours, so each has a closed
//! form update.

use std::io::{Read, Write};

use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
use image::{ExtendedColorType, ImageEncoder, ImageFormat};
use log::{debug, warn};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::driver::{MmProblem, MmRun, Sense, StoppingRule, Driver};
use crate::error::{MmError, Result};

/// Pixel intensities in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageGrid {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl ImageGrid {
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(MmError::InvalidInput("image must have positive size".into()));
        }
        if values.len() != width * height {
            return Err(MmError::DimensionMismatch {
                expected: width * height,
                found: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(MmError::InvalidInput("non-finite pixel".into()));
        }
        Ok(ImageGrid {
            width,
            height,
            values,
        })
    }

    pub fn constant(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let values = (0..height)
            .flat_map(|r| (0..width).map(move |c| (r, c)))
            .map(|(r, c)| f(r, c))
            .collect();
        Self::new(width, height, values)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.width + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.values[row * self.width + col] = value;
    }

    pub fn same_shape(&self, other: &ImageGrid) -> Result<()> {
        if (self.width, self.height) != (other.width, other.height) {
            return Err(MmError::InvalidInput(format!(
                "image shapes differ: {}x{} vs {}x{}",
                self.width, self.height, other.width, other.height
            )));
        }
        Ok(())
    }

    /// Mean squared difference from `other`.
    pub fn mse(&self, other: &ImageGrid) -> Result<f64> {
        self.same_shape(other)?;
        let sum: f64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        Ok(sum / self.values.len() as f64)
    }

    /// Adds seeded Gaussian noise with standard deviation `sigma`.
    pub fn with_noise(&self, sigma: f64, seed: u64) -> Result<Self> {
        let normal = Normal::new(0.0, sigma)
            .map_err(|e| MmError::InvalidInput(format!("noise level {sigma}: {e}")))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values = self.values.iter().map(|v| v + normal.sample(&mut rng)).collect();
        Self::new(self.width, self.height, values)
    }

    /// Reads a binary (P5) PGM with maxval 255.
    pub fn read_pgm<R: Read>(mut reader: R) -> Result<Self> {
        let mut bytes = Vec::new();
        reader.read_to_end(&mut bytes)?;
        let img = image::load_from_memory_with_format(&bytes, ImageFormat::Pnm)
            .map_err(|e| MmError::Parse(format!("PGM: {e}")))?;
        if img.color() != image::ColorType::L8 {
            return Err(MmError::Parse(format!(
                "expected an 8-bit grayscale PGM, got {:?}",
                img.color()
            )));
        }
        let gray = img.to_luma8();
        let (w, h) = gray.dimensions();
        Self::new(
            w as usize,
            h as usize,
            gray.into_raw().into_iter().map(f64::from).collect(),
        )
    }

    /// Writes a binary (P5) PGM, clamping to `[0, 255]` and rounding half up.
    pub fn write_pgm<W: Write>(&self, writer: W) -> Result<()> {
        let bytes: Vec<u8> = self
            .values
            .iter()
            .map(|v| (v.clamp(0.0, 255.0) + 0.5).floor() as u8)
            .collect();
        PnmEncoder::new(writer)
            .with_subtype(PnmSubtype::Graymap(SampleEncoding::Binary))
            .write_image(&bytes, self.width as u32, self.height as u32, ExtendedColorType::L8)
            .map_err(|e| MmError::Io(format!("PGM: {e}")))
    }
}

/// Pixels whose observed value is trusted (the set `S`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PixelMask {
    width: usize,
    height: usize,
    accept: Vec<bool>,
}

impl PixelMask {
    pub fn new(width: usize, height: usize, accept: Vec<bool>) -> Result<Self> {
        if accept.len() != width * height {
            return Err(MmError::DimensionMismatch {
                expected: width * height,
                found: accept.len(),
            });
        }
        Ok(PixelMask {
            width,
            height,
            accept,
        })
    }

    pub fn full(width: usize, height: usize) -> Self {
        PixelMask {
            width,
            height,
            accept: vec![true; width * height],
        }
    }

    pub fn accepts(&self, row: usize, col: usize) -> bool {
        self.accept[row * self.width + col]
    }

    pub fn set(&mut self, row: usize, col: usize, accept: bool) {
        self.accept[row * self.width + col] = accept;
    }

    pub fn accepted_count(&self) -> usize {
        self.accept.iter().filter(|&&a| a).count()
    }

    /// Mask from a PGM: zero excludes a pixel, any other value accepts it.
    pub fn read_pgm<R: Read>(reader: R) -> Result<Self> {
        let img = ImageGrid::read_pgm(reader)?;
        Self::new(
            img.width,
            img.height,
            img.values.iter().map(|&v| v != 0.0).collect(),
        )
    }

    pub fn write_pgm<W: Write>(&self, writer: W) -> Result<()> {
        let img = ImageGrid::new(
            self.width,
            self.height,
            self.accept.iter().map(|&a| if a { 255.0 } else { 0.0 }).collect(),
        )?;
        img.write_pgm(writer)
    }

    fn check(&self, img: &ImageGrid) -> Result<()> {
        if (self.width, self.height) != (img.width, img.height) {
            return Err(MmError::InvalidInput(format!(
                "mask is {}x{} but image is {}x{}",
                self.width, self.height, img.width, img.height
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TVConfig {
    pub lambda: f64,
    pub eps: f64,
    pub sweeps: usize,
}

impl TVConfig {
    pub fn new(lambda: f64, eps: f64, sweeps: usize) -> Result<Self> {
        let cfg = TVConfig {
            lambda,
            eps,
            sweeps,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0) || !self.lambda.is_finite() {
            return Err(MmError::InvalidInput(format!(
                "lambda must be positive, got {}",
                self.lambda
            )));
        }
        if !(self.eps > 0.0) || !self.eps.is_finite() {
            return Err(MmError::InvalidInput(format!(
                "eps must be positive, got {}",
                self.eps
            )));
        }
        if self.sweeps == 0 {
            return Err(MmError::InvalidInput("sweeps must be positive".into()));
        }
        Ok(())
    }
}

impl Default for TVConfig {
    fn default() -> Self {
        TVConfig {
            lambda: 15.0,
            eps: 1.0,
            sweeps: 200,
        }
    }
}

/// Stop once no pixel moves by more than this in a sweep.
pub const PIXEL_TOL: f64 = 1e-4;

/// `sqrt(x² + eps)`.
pub fn tv_norm(x: f64, eps: f64) -> f64 {
    (x * x + eps).sqrt()
}

fn neighbours(width: usize, height: usize, row: usize, col: usize) -> impl Iterator<Item = (usize, usize)> {
    let up = (row > 0).then(|| (row - 1, col));
    let down = (row + 1 < height).then(|| (row + 1, col));
    let left = (col > 0).then(|| (row, col - 1));
    let right = (col + 1 < width).then(|| (row, col + 1));
    [up, down, left, right].into_iter().flatten()
}

pub fn tv_objective(mu: &ImageGrid, y: &ImageGrid, mask: &PixelMask, config: &TVConfig) -> Result<f64> {
    mu.same_shape(y)?;
    mask.check(mu)?;
    let (w, h) = (mu.width, mu.height);
    let mut data = 0.0;
    let mut tv = 0.0;
    for r in 0..h {
        for c in 0..w {
            let m = mu.get(r, c);
            if mask.accepts(r, c) {
                data += (y.get(r, c) - m).powi(2);
            }
            for (nr, nc) in neighbours(w, h, r, c) {
                tv += tv_norm(m - mu.get(nr, nc), config.eps);
            }
        }
    }
    Ok(data + config.lambda * tv)
}

/// Minimizer of the majorized objective in one pixel, the other pixels held
/// at `mu`.
///
/// Every neighbour pair appears twice in the objective, so a pixel's TV part
/// is `2λ Σ sqrt(d² + ε)`, majorized by `λ Σ d² / tv_k` plus a constant with
/// `tv_k` the current TV norms. Minimizing gives
/// `(y + λ Σ μ_k / tv_k) / (1 + λ Σ 1 / tv_k)` inside `S` and the
/// `1 / tv_k`-weighted neighbour mean outside it.
fn pixel_update(mu: &ImageGrid, y: &ImageGrid, mask: &PixelMask, config: &TVConfig, row: usize, col: usize) -> Result<f64> {
    let m = mu.get(row, col);
    let mut weighted = 0.0;
    let mut weight = 0.0;
    for (nr, nc) in neighbours(mu.width, mu.height, row, col) {
        let other = mu.get(nr, nc);
        let inv = 1.0 / tv_norm(m - other, config.eps);
        weighted += other * inv;
        weight += inv;
    }
    if mask.accepts(row, col) {
        Ok((y.get(row, col) + config.lambda * weighted) / (1.0 + config.lambda * weight))
    } else if weight > 0.0 {
        Ok(weighted / weight)
    } else {
        Err(MmError::Degenerate(format!(
            "pixel ({row}, {col}) is outside the mask and has no neighbours"
        )))
    }
}

/// Updates `pixels` in place, in the given order, each reading the current
/// state of its neighbours.
pub fn update_pixels(
    mu: &mut ImageGrid,
    y: &ImageGrid,
    mask: &PixelMask,
    config: &TVConfig,
    pixels: &[(usize, usize)],
) -> Result<()> {
    mu.same_shape(y)?;
    mask.check(mu)?;
    let mut largest_weight = 0.0f64;
    for &(r, c) in pixels {
        if r >= mu.height || c >= mu.width {
            return Err(MmError::InvalidInput(format!(
                "pixel ({r}, {c}) outside a {}x{} image",
                mu.height, mu.width
            )));
        }
        if log::log_enabled!(log::Level::Debug) {
            for (nr, nc) in neighbours(mu.width, mu.height, r, c) {
                let d = mu.get(r, c) - mu.get(nr, nc);
                largest_weight = largest_weight.max(1.0 / tv_norm(d, config.eps));
            }
        }
        let v = pixel_update(mu, y, mask, config, r, c)?;
        mu.set(r, c, v);
    }
    debug!("block of {} pixels: largest TV weight {largest_weight:.3e}", pixels.len());
    Ok(())
}

/// Pixels with `(row + col) % 2 == parity`, row by row.
pub fn checkerboard_block(width: usize, height: usize, parity: usize) -> Vec<(usize, usize)> {
    (0..height)
        .flat_map(|r| (0..width).map(move |c| (r, c)))
        .filter(|(r, c)| (r + c) % 2 == parity)
        .collect()
}

/// Updates pixels with `row + col` even, then those with `row + col` odd,
/// the second half reading the refreshed first half. Pixels of one parity
/// share no neighbours, so the order within a block does not matter.
pub fn checkerboard_sweep(mu: &ImageGrid, y: &ImageGrid, mask: &PixelMask, config: &TVConfig) -> Result<ImageGrid> {
    let mut current = mu.clone();
    for parity in [0, 1] {
        let block = checkerboard_block(mu.width, mu.height, parity);
        update_pixels(&mut current, y, mask, config, &block)?;
    }
    Ok(current)
}

/// Starting image: observed values on `S`, the mean accepted intensity
/// elsewhere.
pub fn initial_image(y: &ImageGrid, mask: &PixelMask) -> Result<ImageGrid> {
    mask.check(y)?;
    let accepted: Vec<f64> = (0..y.values.len())
        .filter(|&i| mask.accept[i])
        .map(|i| y.values[i])
        .collect();
    let fill = if accepted.is_empty() {
        warn!("no accepted pixels; the restoration is data-free");
        0.0
    } else {
        accepted.iter().sum::<f64>() / accepted.len() as f64
    };
    let values = (0..y.values.len())
        .map(|i| if mask.accept[i] { y.values[i] } else { fill })
        .collect();
    ImageGrid::new(y.width, y.height, values)
}

/// Restoration as an [`MmProblem`] over the pixel values.
pub struct TvProblem<'a> {
    pub y: &'a ImageGrid,
    pub mask: &'a PixelMask,
    pub config: TVConfig,
}

impl TvProblem<'_> {
    fn image(&self, theta: &[f64]) -> Result<ImageGrid> {
        ImageGrid::new(self.y.width, self.y.height, theta.to_vec())
    }
}

impl MmProblem for TvProblem<'_> {
    fn dimension(&self) -> usize {
        self.y.values.len()
    }
    fn sense(&self) -> Sense {
        Sense::Minimize
    }
    fn objective(&self, theta: &[f64]) -> Result<f64> {
        tv_objective(&self.image(theta)?, self.y, self.mask, &self.config)
    }
    fn mm_map(&self, theta: &[f64]) -> Result<Vec<f64>> {
        Ok(checkerboard_sweep(&self.image(theta)?, self.y, self.mask, &self.config)?.values)
    }
}

/// Runs up to `config.sweeps` sweeps from [`initial_image`], stopping early
/// once no pixel moves by more than [`PIXEL_TOL`].
pub fn restore(y: &ImageGrid, mask: &PixelMask, config: &TVConfig) -> Result<(ImageGrid, MmRun)> {
    config.validate()?;
    let start = initial_image(y, mask)?;
    let problem = TvProblem {
        y,
        mask,
        config: *config,
    };
    let rule = StoppingRule::new(config.sweeps).param_tol(PIXEL_TOL);
    let run = Driver::new(rule).run(&problem, &start.values)?;
    let restored = ImageGrid::new(y.width, y.height, run.report.theta_final.clone())?;
    Ok((restored, run))
}

/// Two flat regions split down the middle: `left` on the left half and
/// `right` on the right half.
pub fn two_region_image(width: usize, height: usize, left: f64, right: f64) -> Result<ImageGrid> {
    ImageGrid::from_fn(width, height, |_, c| if c < width / 2 { left } else { right })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn cfg(lambda: f64, eps: f64) -> TVConfig {
        TVConfig::new(lambda, eps, 50).unwrap()
    }

    #[test]
    fn tv_norm_examples() {
        assert_eq!(tv_norm(0.0, 1.0), 1.0);
        assert_abs_diff_eq!(tv_norm(2.0, 1.0), 5f64.sqrt(), epsilon = 1e-15);
        for x in [0.3, 7.0, 1e-4] {
            assert_eq!(tv_norm(-x, 0.5), tv_norm(x, 0.5));
        }
    }

    #[test]
    fn objective_examples() {
        let mu = ImageGrid::new(2, 1, vec![0.0, 1.0]).unwrap();
        let mask = PixelMask::full(2, 1);
        let f = tv_objective(&mu, &mu, &mask, &cfg(1.0, 1.0)).unwrap();
        assert_abs_diff_eq!(f, 2.0 * 2f64.sqrt(), epsilon = 1e-15);

        // 3x3 has 12 unordered neighbour pairs
        let flat = ImageGrid::constant(3, 3, 7.0).unwrap();
        let f = tv_objective(&flat, &flat, &PixelMask::full(3, 3), &cfg(2.0, 4.0)).unwrap();
        assert_abs_diff_eq!(f, 2.0 * 24.0 * 2.0, epsilon = 1e-12);
    }

    #[test]
    fn constant_image_is_fixed() {
        let y = ImageGrid::constant(5, 4, 42.0).unwrap();
        let mask = PixelMask::full(5, 4);
        let next = checkerboard_sweep(&y, &y, &mask, &cfg(15.0, 1.0)).unwrap();
        assert_eq!(next, y);
        let (restored, _) = restore(&y, &mask, &cfg(15.0, 1.0)).unwrap();
        assert_eq!(restored, y);
    }

    #[test]
    fn hole_is_filled_with_surrounding_value() {
        let y = ImageGrid::constant(3, 3, 9.0).unwrap();
        let mut mask = PixelMask::full(3, 3);
        mask.set(1, 1, false);
        let mut mu = y.clone();
        mu.set(1, 1, -100.0);
        assert_eq!(pixel_update(&mu, &y, &mask, &cfg(1.0, 1.0), 1, 1).unwrap(), 9.0);
        let (restored, _) = restore(&y, &mask, &cfg(15.0, 1.0)).unwrap();
        assert_abs_diff_eq!(restored.get(1, 1), 9.0, epsilon = 1e-12);
    }

    #[test]
    fn lone_unobserved_pixel_fails() {
        let y = ImageGrid::constant(1, 1, 3.0).unwrap();
        let mask = PixelMask::new(1, 1, vec![false]).unwrap();
        assert!(checkerboard_sweep(&y, &y, &mask, &cfg(1.0, 1.0)).is_err());
        let observed = PixelMask::full(1, 1);
        assert_eq!(checkerboard_sweep(&y, &y, &observed, &cfg(1.0, 1.0)).unwrap(), y);
    }

    #[test]
    fn noisy_two_regions_improve() {
        let clean = two_region_image(8, 8, 50.0, 200.0).unwrap();
        let noisy = clean.with_noise(10.0, 3).unwrap();
        let mask = PixelMask::full(8, 8);
        let config = cfg(15.0, 1.0);
        let before = tv_objective(&noisy, &noisy, &mask, &config).unwrap();
        let (restored, run) = restore(&noisy, &mask, &config).unwrap();
        assert!(run.trace.monotone_throughout());
        let after = tv_objective(&restored, &noisy, &mask, &config).unwrap();
        assert!(after <= before);
    }

    #[test]
    fn shape_mismatch() {
        let a = ImageGrid::constant(2, 2, 0.0).unwrap();
        let b = ImageGrid::constant(3, 2, 0.0).unwrap();
        assert!(tv_objective(&a, &b, &PixelMask::full(2, 2), &cfg(1.0, 1.0)).is_err());
        assert!(tv_objective(&a, &a, &PixelMask::full(3, 2), &cfg(1.0, 1.0)).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(TVConfig::new(0.0, 1.0, 1).is_err());
        assert!(TVConfig::new(1.0, 0.0, 1).is_err());
        assert!(TVConfig::new(1.0, 1.0, 0).is_err());
    }

    #[test]
    fn pgm_round_trip() {
        let img = ImageGrid::from_fn(5, 3, |r, c| (r * 40 + c * 13) as f64).unwrap();
        let mut buf = Vec::new();
        img.write_pgm(&mut buf).unwrap();
        assert!(buf.starts_with(b"P5"));
        let back = ImageGrid::read_pgm(&buf[..]).unwrap();
        assert_eq!(back, img);
        let mut again = Vec::new();
        back.write_pgm(&mut again).unwrap();
        assert_eq!(buf, again);
    }

    #[test]
    fn pgm_clamps_and_rounds() {
        let img = ImageGrid::new(4, 1, vec![-3.0, 12.5, 12.49, 300.0]).unwrap();
        let mut buf = Vec::new();
        img.write_pgm(&mut buf).unwrap();
        let back = ImageGrid::read_pgm(&buf[..]).unwrap();
        assert_eq!(back.values(), &[0.0, 13.0, 12.0, 255.0]);
    }

    #[test]
    fn mask_round_trip() {
        let mut mask = PixelMask::full(3, 2);
        mask.set(0, 1, false);
        let mut buf = Vec::new();
        mask.write_pgm(&mut buf).unwrap();
        assert_eq!(PixelMask::read_pgm(&buf[..]).unwrap(), mask);
    }
}
