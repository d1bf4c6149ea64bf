//! Thin-lens dual-pixel forward model: the affine disparity/depth relation,
//! dp-channel simulation from ground-truth light fields, and scanline
//! defocus-cue extraction.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::lightfield::{DisparityMap, DualPixelFrame, LightField};

/// Thin-lens calibration for the dual-pixel disparity model
/// d = alpha * (A f / (1 - f/z_f)) * (1/z_f - 1/z).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DpCalibration {
    /// Unitless positive sensor scale factor.
    pub alpha: f64,
    /// Main lens aperture size, length units.
    pub aperture: f64,
    /// Focal length, length units.
    pub focal_length: f64,
    /// Depth of the focus plane, length units; must exceed the focal length.
    pub focus_depth: f64,
}

impl DpCalibration {
    pub fn new(alpha: f64, aperture: f64, focal_length: f64, focus_depth: f64) -> Result<Self> {
        for (name, v) in [
            ("alpha", alpha),
            ("aperture", aperture),
            ("focal_length", focal_length),
            ("focus_depth", focus_depth),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidConfig(format!("{name} must be positive")));
            }
        }
        if focus_depth <= focal_length {
            return Err(Error::InvalidConfig(
                "focus_depth must exceed focal_length".into(),
            ));
        }
        Ok(DpCalibration {
            alpha,
            aperture,
            focal_length,
            focus_depth,
        })
    }
}

/// Per-pixel scene depth, strictly positive.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthMap {
    height: usize,
    width: usize,
    data: Vec<f64>,
}

impl DepthMap {
    pub fn from_vec(height: usize, width: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != height * width {
            return Err(Error::DimensionMismatch(format!(
                "depth payload {} != {}x{}",
                data.len(),
                height,
                width
            )));
        }
        if !data.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFiniteData("depth map".into()));
        }
        if !data.iter().all(|&v| v > 0.0) {
            return Err(Error::OutOfRange("depth values must be > 0".into()));
        }
        Ok(DepthMap {
            height,
            width,
            data,
        })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }
}

/// Expand the thin-lens expression into its affine-in-inverse-depth form
/// d = p + q/z: with k = alpha * A f / (1 - f/z_f), p = k / z_f and q = -k.
pub fn dp_affine_params(calib: &DpCalibration) -> (f64, f64) {
    let k = calib.alpha * calib.aperture * calib.focal_length
        / (1.0 - calib.focal_length / calib.focus_depth);
    (k / calib.focus_depth, -k)
}

/// Per-pixel dual-pixel disparity p + q/z.
pub fn depth_to_dp_disparity(depth: &DepthMap, calib: &DpCalibration) -> Result<DisparityMap> {
    let (p, q) = dp_affine_params(calib);
    let data = depth.data().iter().map(|z| p + q / z).collect();
    DisparityMap::from_vec(depth.height(), depth.width(), data)
}

/// Simulate dual-pixel channels by averaging the horizontal neighbors of
/// the center view: dp_L = (L(-1) + L(0)) / 2, dp_R = (L(0) + L(+1)) / 2,
/// reduced to a single channel by Rec.601 luminance; rgb is the center view
/// itself. Each dp channel thus sits half a view step from the center, so
/// its apparent baseline is half the adjacent-view baseline.
pub fn simulate_dp_from_lf(lf: &LightField) -> Result<DualPixelFrame> {
    let (vc, uc) = lf.center_indices()?;
    if lf.angular_cols() < 3 {
        return Err(Error::TooFewViews(lf.angular_cols()));
    }
    let center = lf.view_image(vc, uc)?;
    let left = lf.view_image(vc, uc - 1)?;
    let right = lf.view_image(vc, uc + 1)?;

    let average = |a: &crate::image::Image, b: &crate::image::Image| {
        let mut out = a.clone();
        for (o, bv) in out.data_mut().iter_mut().zip(b.data()) {
            *o = (*o + bv) / 2.0;
        }
        out
    };
    let dp_left = average(&left, &center).luminance()?;
    let dp_right = average(&center, &right).luminance()?;
    DualPixelFrame::new(center, dp_left, dp_right)
}

/// Per-column samples of one scanline of a dual-pixel frame.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanlineSample {
    pub col: usize,
    pub dp_left: f64,
    pub dp_right: f64,
    pub abs_diff: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanlineReport {
    pub row: usize,
    pub samples: Vec<ScanlineSample>,
}

impl ScanlineReport {
    /// CSV with header `col,dp_left,dp_right,abs_diff`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("col,dp_left,dp_right,abs_diff\n");
        for s in &self.samples {
            let _ = writeln!(out, "{},{},{},{}", s.col, s.dp_left, s.dp_right, s.abs_diff);
        }
        out
    }
}

/// Extract the dp_L / dp_R intensities and their absolute difference along
/// one row; pure extraction, no transformation.
pub fn scanline_analysis(frame: &DualPixelFrame, row: usize) -> Result<ScanlineReport> {
    if row >= frame.height() {
        return Err(Error::RowOutOfBounds {
            row,
            height: frame.height(),
        });
    }
    let samples = (0..frame.width())
        .map(|col| {
            let l = frame.dp_left.get(row, col, 0);
            let r = frame.dp_right.get(row, col, 0);
            ScanlineSample {
                col,
                dp_left: l,
                dp_right: r,
                abs_diff: (l - r).abs(),
            }
        })
        .collect();
    Ok(ScanlineReport { row, samples })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::Image;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_calib(rng: &mut ChaCha8Rng) -> DpCalibration {
        let focal = rng.gen_range(0.01..0.1);
        DpCalibration::new(
            rng.gen_range(0.1..5.0),
            rng.gen_range(0.001..0.05),
            focal,
            focal * rng.gen_range(1.5..50.0),
        )
        .unwrap()
    }

    /// Unexpanded transcription of the thin-lens disparity.
    fn thin_lens_disparity(calib: &DpCalibration, z: f64) -> f64 {
        calib.alpha * (calib.aperture * calib.focal_length
            / (1.0 - calib.focal_length / calib.focus_depth))
            * (1.0 / calib.focus_depth - 1.0 / z)
    }

    #[test]
    fn affine_form_matches_unexpanded_expression() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let calib = random_calib(&mut rng);
            let (p, q) = dp_affine_params(&calib);
            for _ in 0..100 {
                let z = rng.gen_range(calib.focal_length * 1.01..calib.focus_depth * 100.0);
                let direct = thin_lens_disparity(&calib, z);
                assert!(
                    (p + q / z - direct).abs() <= 1e-12 * direct.abs().max(1.0),
                    "p + q/z != direct at z={z}"
                );
            }
        }
    }

    #[test]
    fn focus_plane_has_zero_disparity() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let calib = random_calib(&mut rng);
            let (p, q) = dp_affine_params(&calib);
            assert!((p + q / calib.focus_depth).abs() < 1e-12);
        }
    }

    #[test]
    fn disparity_limits() {
        let calib = DpCalibration::new(2.0, 0.01, 0.05, 2.0).unwrap();
        let (p, q) = dp_affine_params(&calib);
        // z -> inf tends to p.
        assert!((p + q / 1e15 - p).abs() < 1e-9);
        // alpha -> 0 collapses both coefficients.
        let tiny = DpCalibration::new(1e-300, 0.01, 0.05, 2.0).unwrap();
        let (p0, q0) = dp_affine_params(&tiny);
        assert!(p0.abs() < 1e-290 && q0.abs() < 1e-290);
    }

    #[test]
    fn depth_map_conversion_hand_values() {
        let calib = DpCalibration::new(1.5, 0.02, 0.05, 3.0).unwrap();
        let (p, q) = dp_affine_params(&calib);
        let depth = DepthMap::from_vec(1, 2, vec![3.0, 6.0]).unwrap();
        let d = depth_to_dp_disparity(&depth, &calib).unwrap();
        assert!(d.get(0, 0).abs() < 1e-15, "in-focus plane must be zero");
        assert!((d.get(0, 1) - (p + q / 6.0)).abs() < 1e-15);
    }

    #[test]
    fn all_in_focus_depth_yields_zero_map() {
        let calib = DpCalibration::new(1.0, 0.01, 0.05, 2.5).unwrap();
        let depth = DepthMap::from_vec(2, 2, vec![2.5; 4]).unwrap();
        let d = depth_to_dp_disparity(&depth, &calib).unwrap();
        assert!(d.data().iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn zero_parallax_lf_gives_identical_dp_channels() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let view = Image::from_vec(4, 4, 3, (0..48).map(|_| rng.gen_range(0.0..1.0)).collect())
            .unwrap();
        let views = vec![view.clone(); 9];
        let lf = LightField::from_views(3, 3, &views).unwrap();
        let frame = simulate_dp_from_lf(&lf).unwrap();
        assert_eq!(frame.dp_left.data(), frame.dp_right.data());
        assert_eq!(frame.dp_left.data(), view.luminance().unwrap().data());
    }

    #[test]
    fn constant_views_average_by_hand() {
        // Center row views constant 0.2 (left), 0.4 (center), 0.8 (right).
        let mk = |v: f64| Image::splat(2, 2, 3, v);
        let views = vec![
            mk(0.0), mk(0.0), mk(0.0),
            mk(0.2), mk(0.4), mk(0.8),
            mk(0.0), mk(0.0), mk(0.0),
        ];
        let lf = LightField::from_views(3, 3, &views).unwrap();
        let frame = simulate_dp_from_lf(&lf).unwrap();
        // Luminance of a gray value is the value itself.
        assert!(frame.dp_left.data().iter().all(|v| (v - 0.3).abs() < 1e-12));
        assert!(frame.dp_right.data().iter().all(|v| (v - 0.6).abs() < 1e-12));
        assert!(frame.rgb.data().iter().all(|v| (v - 0.4).abs() < 1e-12));
    }

    #[test]
    fn too_few_columns_is_rejected() {
        let lf = LightField::zeros(3, 1, 2, 2);
        assert!(matches!(
            simulate_dp_from_lf(&lf),
            Err(Error::TooFewViews(1))
        ));
    }

    #[test]
    fn scanline_zero_difference_for_equal_planes() {
        let rgb = Image::splat(2, 3, 3, 0.5);
        let dp = Image::splat(2, 3, 1, 0.25);
        let frame = DualPixelFrame::new(rgb, dp.clone(), dp).unwrap();
        let report = scanline_analysis(&frame, 1).unwrap();
        assert!(report.samples.iter().all(|s| s.abs_diff == 0.0));
        let csv = report.to_csv();
        assert!(csv.starts_with("col,dp_left,dp_right,abs_diff\n"));
        assert_eq!(csv.lines().count(), 4);
    }

    #[test]
    fn scanline_out_of_range_row_is_rejected() {
        let rgb = Image::splat(2, 2, 3, 0.5);
        let dp = Image::splat(2, 2, 1, 0.5);
        let frame = DualPixelFrame::new(rgb, dp.clone(), dp).unwrap();
        assert!(matches!(
            scanline_analysis(&frame, 2),
            Err(Error::RowOutOfBounds { row: 2, height: 2 })
        ));
    }

    #[test]
    fn scanline_difference_peaks_at_defocused_edge() {
        // A soft edge at column 8 in both dp channels, displaced by +-1
        // column (defocus disparity): |dp_L - dp_R| must peak within +-2
        // columns of the edge.
        let w = 16;
        let edge = 8.0f64;
        let soft = |x: f64, center: f64| 1.0 / (1.0 + (-2.0 * (x - center)).exp());
        let mut left = Image::zeros(1, w, 1);
        let mut right = Image::zeros(1, w, 1);
        for x in 0..w {
            left.set(0, x, 0, soft(x as f64, edge - 1.0));
            right.set(0, x, 0, soft(x as f64, edge + 1.0));
        }
        let rgb = Image::splat(1, w, 3, 0.5);
        let frame = DualPixelFrame::new(rgb, left, right).unwrap();
        let report = scanline_analysis(&frame, 0).unwrap();
        let peak = report
            .samples
            .iter()
            .max_by(|a, b| a.abs_diff.partial_cmp(&b.abs_diff).unwrap())
            .unwrap();
        assert!((peak.col as f64 - edge).abs() <= 2.0, "peak at {}", peak.col);
    }
}
