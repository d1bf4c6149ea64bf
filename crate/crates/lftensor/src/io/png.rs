use std::path::Path;

use crate::error::{Error, Result};
use crate::image::Image;

/// 8-bit quantizer: round(255 * clamp(s, 0, 1)), round-half-away-from-zero
/// (`f64::round`), so 0.5 stores as byte 128.
pub fn quantize_unit(s: f64) -> u8 {
    (255.0 * s.clamp(0.0, 1.0)).round() as u8
}

/// Write an image as an 8-bit PNG: RGB for 3 channels, grayscale for 1.
pub fn save_image_png(img: &Image, path: &Path) -> Result<()> {
    let w = img.width() as u32;
    let h = img.height() as u32;
    let bytes: Vec<u8> = img.data().iter().map(|&s| quantize_unit(s)).collect();
    let res = match img.channels() {
        3 => image::RgbImage::from_raw(w, h, bytes)
            .expect("sized buffer")
            .save(path),
        1 => image::GrayImage::from_raw(w, h, bytes)
            .expect("sized buffer")
            .save(path),
        c => {
            return Err(Error::DimensionMismatch(format!(
                "png save supports 1 or 3 channels, got {c}"
            )))
        }
    };
    res.map_err(|e| Error::io(path, std::io::Error::other(e)))
}

/// Load a PNG as a 3-channel image with samples byte/255.
pub fn load_image_png(path: &Path) -> Result<Image> {
    let img = image::open(path).map_err(|e| Error::io(path, std::io::Error::other(e)))?;
    let rgb = img.to_rgb8();
    let (w, h) = rgb.dimensions();
    let data = rgb.into_raw().iter().map(|&b| b as f64 / 255.0).collect();
    Image::from_vec(h as usize, w as usize, 3, data)
}

/// Load a PNG as a single-channel image (luma conversion if the file is RGB).
pub fn load_single_channel_png(path: &Path) -> Result<Image> {
    let img = image::open(path).map_err(|e| Error::io(path, std::io::Error::other(e)))?;
    let gray = img.to_luma8();
    let (w, h) = gray.dimensions();
    let data = gray.into_raw().iter().map(|&b| b as f64 / 255.0).collect();
    Image::from_vec(h as usize, w as usize, 1, data)
}
