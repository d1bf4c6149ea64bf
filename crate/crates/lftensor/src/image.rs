use crate::error::{Error, Result};

/// Planar-agnostic image container: `height x width x channels`, row-major
/// with interleaved channels, all samples f64.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    height: usize,
    width: usize,
    channels: usize,
    data: Vec<f64>,
}

/// One corner of a bilinear footprint: pixel coordinates plus its weight.
#[derive(Debug, Clone, Copy)]
pub struct BilinearTap {
    pub y: usize,
    pub x: usize,
    pub weight: f64,
}

impl Image {
    pub fn zeros(height: usize, width: usize, channels: usize) -> Self {
        Image {
            height,
            width,
            channels,
            data: vec![0.0; height * width * channels],
        }
    }

    pub fn from_vec(height: usize, width: usize, channels: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != height * width * channels {
            return Err(Error::DimensionMismatch(format!(
                "image payload {} != {}x{}x{}",
                data.len(),
                height,
                width,
                channels
            )));
        }
        Ok(Image {
            height,
            width,
            channels,
            data,
        })
    }

    /// Constant-valued image.
    pub fn splat(height: usize, width: usize, channels: usize, value: f64) -> Self {
        Image {
            height,
            width,
            channels,
            data: vec![value; height * width * channels],
        }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    fn idx(&self, y: usize, x: usize, c: usize) -> usize {
        (y * self.width + x) * self.channels + c
    }

    #[inline]
    pub fn get(&self, y: usize, x: usize, c: usize) -> f64 {
        debug_assert!(y < self.height && x < self.width && c < self.channels);
        self.data[self.idx(y, x, c)]
    }

    #[inline]
    pub fn set(&mut self, y: usize, x: usize, c: usize, value: f64) {
        let i = self.idx(y, x, c);
        self.data[i] = value;
    }

    pub fn same_dims(&self, other: &Image) -> bool {
        self.height == other.height && self.width == other.width && self.channels == other.channels
    }

    pub fn require_finite(&self, what: &str) -> Result<()> {
        if self.data.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::NonFiniteData(what.to_string()))
        }
    }

    pub fn require_unit_range(&self, what: &str) -> Result<()> {
        self.require_finite(what)?;
        if self.data.iter().all(|&v| (0.0..=1.0).contains(&v)) {
            Ok(())
        } else {
            Err(Error::OutOfRange(format!("{what}: samples must lie in [0,1]")))
        }
    }

    /// Bilinear sample at continuous coordinates with border clamp. Exact
    /// (bit-identical) at integer coordinates.
    pub fn sample_bilinear(&self, x: f64, y: f64, c: usize) -> f64 {
        let taps = bilinear_taps(self.height, self.width, x, y);
        taps[0].weight * self.get(taps[0].y, taps[0].x, c)
            + taps[1].weight * self.get(taps[1].y, taps[1].x, c)
            + taps[2].weight * self.get(taps[2].y, taps[2].x, c)
            + taps[3].weight * self.get(taps[3].y, taps[3].x, c)
    }

    /// Rec.601 luminance of an RGB image; identity on 1-channel input.
    pub fn luminance(&self) -> Result<Image> {
        if self.channels == 1 {
            return Ok(self.clone());
        }
        if self.channels != 3 {
            return Err(Error::DimensionMismatch(format!(
                "luminance needs 1 or 3 channels, got {}",
                self.channels
            )));
        }
        let mut out = Image::zeros(self.height, self.width, 1);
        for y in 0..self.height {
            for x in 0..self.width {
                let l = 0.299 * self.get(y, x, 0) + 0.587 * self.get(y, x, 1)
                    + 0.114 * self.get(y, x, 2);
                out.set(y, x, 0, l);
            }
        }
        Ok(out)
    }
}

/// The four (y, x, weight) corners of a border-clamped bilinear lookup.
///
/// Weight layout follows `(1-fy)(1-fx), (1-fy)fx, fy(1-fx), fy fx`; at an
/// integer coordinate the first tap carries weight exactly 1.0, so sampling
/// there reproduces the stored value bit-for-bit.
pub fn bilinear_taps(height: usize, width: usize, x: f64, y: f64) -> [BilinearTap; 4] {
    let xc = x.clamp(0.0, (width - 1) as f64);
    let yc = y.clamp(0.0, (height - 1) as f64);
    let x0 = xc.floor() as usize;
    let y0 = yc.floor() as usize;
    let x1 = (x0 + 1).min(width - 1);
    let y1 = (y0 + 1).min(height - 1);
    let fx = xc - x0 as f64;
    let fy = yc - y0 as f64;
    [
        BilinearTap { y: y0, x: x0, weight: (1.0 - fy) * (1.0 - fx) },
        BilinearTap { y: y0, x: x1, weight: (1.0 - fy) * fx },
        BilinearTap { y: y1, x: x0, weight: fy * (1.0 - fx) },
        BilinearTap { y: y1, x: x1, weight: fy * fx },
    ]
}

/// Mean absolute difference over all samples of two same-shaped images.
pub fn mean_abs_diff(a: &Image, b: &Image) -> Result<f64> {
    if !a.same_dims(b) {
        return Err(Error::DimensionMismatch(format!(
            "mean_abs_diff: {}x{}x{} vs {}x{}x{}",
            a.height, a.width, a.channels, b.height, b.width, b.channels
        )));
    }
    let n = a.data.len();
    if n == 0 {
        return Ok(0.0);
    }
    let sum: f64 = a
        .data
        .iter()
        .zip(&b.data)
        .map(|(x, y)| (x - y).abs())
        .sum();
    Ok(sum / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bilinear_is_exact_at_integer_coords() {
        let img = Image::from_vec(2, 3, 1, vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6]).unwrap();
        for y in 0..2 {
            for x in 0..3 {
                let s = img.sample_bilinear(x as f64, y as f64, 0);
                assert_eq!(s.to_bits(), img.get(y, x, 0).to_bits());
            }
        }
    }

    #[test]
    fn bilinear_midpoint_is_average() {
        let img = Image::from_vec(1, 2, 1, vec![0.0, 1.0]).unwrap();
        assert!((img.sample_bilinear(0.5, 0.0, 0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn bilinear_clamps_at_borders() {
        let img = Image::from_vec(1, 2, 1, vec![0.25, 0.75]).unwrap();
        assert_eq!(img.sample_bilinear(-3.0, 0.0, 0), 0.25);
        assert_eq!(img.sample_bilinear(9.0, 5.0, 0), 0.75);
    }

    #[test]
    fn luminance_uses_rec601_weights() {
        let img = Image::from_vec(1, 1, 3, vec![1.0, 0.5, 0.25]).unwrap();
        let l = img.luminance().unwrap();
        let want = 0.299 + 0.587 * 0.5 + 0.114 * 0.25;
        assert!((l.get(0, 0, 0) - want).abs() < 1e-15);
    }
}
