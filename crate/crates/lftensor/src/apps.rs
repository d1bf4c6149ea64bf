//! Post-capture applications: shift-and-add refocusing with a square
//! synthetic aperture, epipolar-plane image extraction, and novel-view
//! slicing.

use crate::error::{Error, Result};
use crate::image::Image;
use crate::lightfield::{LightField, SubApertureImage, CHANNELS};

/// Shift-and-add refocus: average the views with max(|du|, |dv|) <=
/// `aperture_radius`, each sampled at (x - d*du, y - d*dv) so that content
/// at disparity `focus_disparity` aligns across the aperture. Radius 0 is
/// exactly the center view.
pub fn refocus(lf: &LightField, focus_disparity: f64, aperture_radius: f64) -> Result<Image> {
    if !(aperture_radius.is_finite() && aperture_radius >= 0.0) {
        return Err(Error::InvalidConfig(
            "aperture_radius must be >= 0".into(),
        ));
    }
    let (vc, uc) = lf.center_indices()?;
    let mut included: Vec<(usize, usize, f64, f64)> = Vec::new();
    for (v, u) in lf.view_indices() {
        let du = u as i64 - uc as i64;
        let dv = v as i64 - vc as i64;
        if (du.abs().max(dv.abs())) as f64 <= aperture_radius {
            included.push((v, u, du as f64, dv as f64));
        }
    }
    if included.is_empty() {
        return Err(Error::EmptySet("aperture"));
    }

    let mut out = Image::zeros(lf.height(), lf.width(), CHANNELS);
    let count = included.len() as f64;
    for (v, u, du, dv) in included {
        let view = lf.view_image(v, u)?;
        for y in 0..lf.height() {
            for x in 0..lf.width() {
                let xs = x as f64 - focus_disparity * du;
                let ys = y as f64 - focus_disparity * dv;
                for c in 0..CHANNELS {
                    let s = view.sample_bilinear(xs, ys, c);
                    out.set(y, x, c, out.get(y, x, c) + s);
                }
            }
        }
    }
    for v in out.data_mut() {
        *v /= count;
    }
    Ok(out)
}

/// EPI slicing axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EpiMode {
    /// Fix y and v; rows of the output sweep u, columns sweep x.
    Horizontal,
    /// Fix x and u; rows sweep v, columns sweep y.
    Vertical,
}

/// Extract an epipolar-plane image: one spatial and one angular axis.
/// Horizontal mode yields an (angular_cols x width) image at
/// y = `fixed_spatial`, v = `fixed_angular`; vertical mode the analogue.
pub fn extract_epi(
    lf: &LightField,
    mode: EpiMode,
    fixed_spatial: usize,
    fixed_angular: usize,
) -> Result<Image> {
    match mode {
        EpiMode::Horizontal => {
            if fixed_spatial >= lf.height() {
                return Err(Error::IndexOutOfBounds(format!(
                    "row {fixed_spatial} >= height {}",
                    lf.height()
                )));
            }
            if fixed_angular >= lf.angular_rows() {
                return Err(Error::IndexOutOfBounds(format!(
                    "view row {fixed_angular} >= angular_rows {}",
                    lf.angular_rows()
                )));
            }
            let mut out = Image::zeros(lf.angular_cols(), lf.width(), CHANNELS);
            for u in 0..lf.angular_cols() {
                for x in 0..lf.width() {
                    for c in 0..CHANNELS {
                        out.set(u, x, c, lf.get(fixed_angular, u, fixed_spatial, x, c));
                    }
                }
            }
            Ok(out)
        }
        EpiMode::Vertical => {
            if fixed_spatial >= lf.width() {
                return Err(Error::IndexOutOfBounds(format!(
                    "column {fixed_spatial} >= width {}",
                    lf.width()
                )));
            }
            if fixed_angular >= lf.angular_cols() {
                return Err(Error::IndexOutOfBounds(format!(
                    "view column {fixed_angular} >= angular_cols {}",
                    lf.angular_cols()
                )));
            }
            let mut out = Image::zeros(lf.angular_rows(), lf.height(), CHANNELS);
            for v in 0..lf.angular_rows() {
                for y in 0..lf.height() {
                    for c in 0..CHANNELS {
                        out.set(v, y, c, lf.get(v, fixed_angular, y, fixed_spatial, c));
                    }
                }
            }
            Ok(out)
        }
    }
}

/// Slice one view out with its signed offsets from the center.
pub fn novel_view(lf: &LightField, u: usize, v: usize) -> Result<SubApertureImage> {
    let (vc, uc) = lf.center_indices()?;
    if v >= lf.angular_rows() || u >= lf.angular_cols() {
        return Err(Error::IndexOutOfBounds(format!(
            "view ({v},{u}) outside {}x{} grid",
            lf.angular_rows(),
            lf.angular_cols()
        )));
    }
    SubApertureImage::new(
        lf.view_image(v, u)?,
        (u as i64 - uc as i64, v as i64 - vc as i64),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_lf(rows: usize, cols: usize, h: usize, w: usize, seed: u64) -> LightField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = (0..rows * cols * h * w * CHANNELS)
            .map(|_| rng.gen_range(0.0..=1.0))
            .collect();
        LightField::from_vec(rows, cols, h, w, data).unwrap()
    }

    /// Forward synthesis: view(du, dv)(x) = tex(x + delta*du, y + delta*dv).
    fn synth_lf(tex: &Image, rows: usize, cols: usize, delta: f64) -> LightField {
        let (h, w) = (tex.height(), tex.width());
        let vc = (rows as i64 - 1) / 2;
        let uc = (cols as i64 - 1) / 2;
        let mut lf = LightField::zeros(rows, cols, h, w);
        for v in 0..rows {
            for u in 0..cols {
                let du = (u as i64 - uc) as f64;
                let dv = (v as i64 - vc) as f64;
                for y in 0..h {
                    for x in 0..w {
                        for c in 0..CHANNELS {
                            let s = tex
                                .sample_bilinear(x as f64 + delta * du, y as f64 + delta * dv, c)
                                .clamp(0.0, 1.0);
                            lf.set(v, u, y, x, c, s);
                        }
                    }
                }
            }
        }
        lf
    }

    fn noise_texture(h: usize, w: usize, seed: u64) -> Image {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = (0..h * w * CHANNELS).map(|_| rng.gen_range(0.0..=1.0)).collect();
        Image::from_vec(h, w, CHANNELS, data).unwrap()
    }

    /// Variance of the 4-neighbor Laplacian response over the interior,
    /// used as a focus score.
    fn variance_of_laplacian(img: &Image) -> f64 {
        let lum = img.luminance().unwrap();
        let (h, w) = (lum.height(), lum.width());
        let mut responses = Vec::new();
        for y in 1..h - 1 {
            for x in 1..w - 1 {
                let lap = lum.get(y, x - 1, 0)
                    + lum.get(y, x + 1, 0)
                    + lum.get(y - 1, x, 0)
                    + lum.get(y + 1, x, 0)
                    - 4.0 * lum.get(y, x, 0);
                responses.push(lap);
            }
        }
        let n = responses.len() as f64;
        let mean = responses.iter().sum::<f64>() / n;
        responses.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / n
    }

    #[test]
    fn zero_radius_refocus_is_the_center_view() {
        let lf = random_lf(3, 3, 4, 4, 1);
        let out = refocus(&lf, 1.7, 0.0).unwrap();
        let center = lf.center_view().unwrap();
        assert_eq!(out.data(), center.data());
    }

    #[test]
    fn zero_parallax_refocus_is_center_for_any_aperture() {
        let tex = noise_texture(5, 5, 2);
        let lf = synth_lf(&tex, 3, 3, 0.0);
        let out = refocus(&lf, 0.0, 1.0).unwrap();
        let center = lf.center_view().unwrap();
        for (a, b) in out.data().iter().zip(center.data()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn refocus_sharpness_peaks_at_true_disparity() {
        let tex = noise_texture(24, 24, 3);
        let delta = 1.0;
        let lf = synth_lf(&tex, 5, 5, delta);
        let at_true = variance_of_laplacian(&refocus(&lf, delta, 2.0).unwrap());
        let below = variance_of_laplacian(&refocus(&lf, delta - 1.0, 2.0).unwrap());
        let above = variance_of_laplacian(&refocus(&lf, delta + 1.0, 2.0).unwrap());
        assert!(at_true > below, "{at_true} !> {below}");
        assert!(at_true > above, "{at_true} !> {above}");
    }

    #[test]
    fn refocus_output_stays_in_unit_range() {
        let lf = random_lf(3, 3, 6, 6, 4);
        let out = refocus(&lf, -1.5, 1.0).unwrap();
        assert!(out.data().iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn negative_aperture_is_rejected() {
        let lf = random_lf(3, 3, 2, 2, 5);
        assert!(refocus(&lf, 0.0, -1.0).is_err());
    }

    #[test]
    fn epi_rows_identical_on_zero_parallax_lf() {
        let tex = noise_texture(4, 6, 6);
        let lf = synth_lf(&tex, 3, 3, 0.0);
        let epi = extract_epi(&lf, EpiMode::Horizontal, 2, 1).unwrap();
        assert_eq!(epi.height(), lf.angular_cols());
        assert_eq!(epi.width(), lf.width());
        for u in 1..epi.height() {
            for x in 0..epi.width() {
                for c in 0..CHANNELS {
                    assert_eq!(epi.get(u, x, c), epi.get(0, x, c));
                }
            }
        }
    }

    #[test]
    fn epi_vertical_shape_and_content() {
        let lf = random_lf(3, 5, 4, 6, 7);
        let epi = extract_epi(&lf, EpiMode::Vertical, 3, 2).unwrap();
        assert_eq!(epi.height(), lf.angular_rows());
        assert_eq!(epi.width(), lf.height());
        for v in 0..3 {
            for y in 0..4 {
                for c in 0..CHANNELS {
                    assert_eq!(epi.get(v, y, c), lf.get(v, 2, y, 3, c));
                }
            }
        }
    }

    #[test]
    fn epi_out_of_range_indices_are_rejected() {
        let lf = random_lf(3, 3, 4, 4, 8);
        assert!(matches!(
            extract_epi(&lf, EpiMode::Horizontal, 4, 0),
            Err(Error::IndexOutOfBounds(_))
        ));
        assert!(matches!(
            extract_epi(&lf, EpiMode::Horizontal, 0, 3),
            Err(Error::IndexOutOfBounds(_))
        ));
    }

    #[test]
    fn novel_view_center_and_corners() {
        let lf = random_lf(3, 5, 2, 2, 9);
        let center = novel_view(&lf, 2, 1).unwrap();
        assert_eq!(center.angular_coord, (0, 0));
        let corner = novel_view(&lf, 4, 2).unwrap();
        assert_eq!(corner.angular_coord, (2, 1));
        let corner0 = novel_view(&lf, 0, 0).unwrap();
        assert_eq!(corner0.angular_coord, (-2, -1));
        assert!(matches!(
            novel_view(&lf, 5, 0),
            Err(Error::IndexOutOfBounds(_))
        ));
    }

    #[test]
    fn novel_view_slices_reassemble_the_light_field() {
        let lf = random_lf(3, 3, 3, 3, 10);
        let mut views = Vec::new();
        for (v, u) in lf.view_indices() {
            views.push(novel_view(&lf, u, v).unwrap().image);
        }
        let back = LightField::from_views(3, 3, &views).unwrap();
        assert_eq!(back.data(), lf.data());
    }
}
