//! Bilinear inverse warping and the warping-based consistency losses:
//! geometric (views warped to the center by scaled disparity), temporal
//! (re-warped to the next frame by optical flow), and photometric.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::image::{mean_abs_diff, Image};
use crate::lightfield::{DisparityMap, FlowField, LightField, SubApertureImage};

/// Multiplier on the ingested disparity that widens the synthesized
/// baseline. Values outside [1, 3] are allowed but logged as a warning;
/// reconstruction quality degrades past 3.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaselineScale(f64);

impl BaselineScale {
    pub fn new(a: f64) -> Self {
        if !(1.0..=3.0).contains(&a) {
            log::warn!("baseline scale a={a} outside the supported range [1,3]");
        }
        BaselineScale(a)
    }

    pub fn value(&self) -> f64 {
        self.0
    }
}

impl Default for BaselineScale {
    fn default() -> Self {
        BaselineScale(1.2)
    }
}

/// out(x, y) = src sampled bilinearly at (x + fx, y + fy), border clamp.
/// Zero flow reproduces `src` bit for bit.
pub fn inverse_warp(src: &Image, flow: &FlowField) -> Result<Image> {
    if src.height() != flow.height() || src.width() != flow.width() {
        return Err(Error::DimensionMismatch(format!(
            "image {}x{} vs flow {}x{}",
            src.height(),
            src.width(),
            flow.height(),
            flow.width()
        )));
    }
    let mut out = Image::zeros(src.height(), src.width(), src.channels());
    for y in 0..src.height() {
        for x in 0..src.width() {
            let (fx, fy) = flow.get(y, x);
            let xs = x as f64 + fx;
            let ys = y as f64 + fy;
            for c in 0..src.channels() {
                out.set(y, x, c, src.sample_bilinear(xs, ys, c));
            }
        }
    }
    Ok(out)
}

/// Per-pixel flow that pulls a view with offset (du, dv) onto the center:
/// (-du * a * d, -dv * a * d).
pub fn disparity_flow(
    d: &DisparityMap,
    angular_coord: (i64, i64),
    scale: BaselineScale,
) -> FlowField {
    let (du, dv) = (angular_coord.0 as f64, angular_coord.1 as f64);
    let a = scale.value();
    let mut flow = FlowField::zeros(d.height(), d.width());
    for y in 0..d.height() {
        for x in 0..d.width() {
            let disp = d.get(y, x);
            flow.set(y, x, -du * a * disp, -dv * a * disp);
        }
    }
    flow
}

/// Warp one sub-aperture view onto the center using the scaled disparity.
/// The center view itself (du = dv = 0) passes through unchanged for any
/// disparity.
pub fn warp_view_to_center(
    sai: &SubApertureImage,
    d: &DisparityMap,
    scale: BaselineScale,
) -> Result<Image> {
    if sai.image.height() != d.height() || sai.image.width() != d.width() {
        return Err(Error::DimensionMismatch(format!(
            "view {}x{} vs disparity {}x{}",
            sai.image.height(),
            sai.image.width(),
            d.height(),
            d.width()
        )));
    }
    let flow = disparity_flow(d, sai.angular_coord, scale);
    inverse_warp(&sai.image, &flow)
}

fn check_center_dims(lf: &LightField, center_ref: &Image) -> Result<()> {
    if center_ref.height() != lf.height()
        || center_ref.width() != lf.width()
        || center_ref.channels() != 3
    {
        return Err(Error::DimensionMismatch(format!(
            "reference {}x{}x{} vs light field {}x{}x3",
            center_ref.height(),
            center_ref.width(),
            center_ref.channels(),
            lf.height(),
            lf.width()
        )));
    }
    Ok(())
}

/// Mean absolute difference over pixels at least `border` away from every
/// edge. Returns 0 when the mask swallows the whole image.
fn masked_mae(a: &Image, b: &Image, border: usize) -> Result<f64> {
    if !a.same_dims(b) {
        return Err(Error::DimensionMismatch("masked_mae operands".into()));
    }
    if border == 0 {
        return mean_abs_diff(a, b);
    }
    if 2 * border >= a.height() || 2 * border >= a.width() {
        return Ok(0.0);
    }
    let mut sum = 0.0;
    let mut count = 0usize;
    for y in border..a.height() - border {
        for x in border..a.width() - border {
            for c in 0..a.channels() {
                sum += (a.get(y, x, c) - b.get(y, x, c)).abs();
                count += 1;
            }
        }
    }
    Ok(sum / count as f64)
}

fn mask_width(flow: &FlowField) -> usize {
    flow.max_abs_component().ceil() as usize
}

fn per_view_losses<F>(lf: &LightField, view_loss: F) -> Result<f64>
where
    F: Fn(usize, usize) -> Result<f64> + Sync,
{
    let views: Vec<(usize, usize)> = lf.view_indices().collect();
    let losses: Vec<Result<f64>> = views
        .par_iter()
        .map(|&(v, u)| view_loss(v, u))
        .collect();
    let mut total = 0.0;
    for l in losses {
        total += l?;
    }
    Ok(total)
}

fn sub_aperture(lf: &LightField, v: usize, u: usize) -> Result<SubApertureImage> {
    let (vc, uc) = lf.center_indices()?;
    SubApertureImage::new(
        lf.view_image(v, u)?,
        (u as i64 - uc as i64, v as i64 - vc as i64),
    )
}

/// Sum over views of the per-view mean absolute error between each view
/// warped to the center and `center_ref`. With `masked` set, a per-view
/// border of width ceil(max |flow|) is excluded.
pub fn geometric_loss(
    lf: &LightField,
    d: &DisparityMap,
    center_ref: &Image,
    scale: BaselineScale,
    masked: bool,
) -> Result<f64> {
    check_center_dims(lf, center_ref)?;
    lf.center_indices()?;
    per_view_losses(lf, |v, u| {
        let sai = sub_aperture(lf, v, u)?;
        let flow = disparity_flow(d, sai.angular_coord, scale);
        let warped = inverse_warp(&sai.image, &flow)?;
        let border = if masked { mask_width(&flow) } else { 0 };
        masked_mae(&warped, center_ref, border)
    })
}

/// Two-stage warp: each view is pulled onto the center with the scaled
/// disparity, then pushed to the next frame with the optical flow; the sum
/// of per-view mean absolute errors against `next_frame` is returned. With
/// zero flow this reduces exactly to [`geometric_loss`] against
/// `next_frame`.
pub fn temporal_loss(
    lf_t: &LightField,
    d: &DisparityMap,
    flow: &FlowField,
    next_frame: &Image,
    scale: BaselineScale,
    masked: bool,
) -> Result<f64> {
    check_center_dims(lf_t, next_frame)?;
    if flow.height() != lf_t.height() || flow.width() != lf_t.width() {
        return Err(Error::DimensionMismatch(format!(
            "flow {}x{} vs light field {}x{}",
            flow.height(),
            flow.width(),
            lf_t.height(),
            lf_t.width()
        )));
    }
    lf_t.center_indices()?;
    let flow_border = mask_width(flow);
    per_view_losses(lf_t, |v, u| {
        let sai = sub_aperture(lf_t, v, u)?;
        let dflow = disparity_flow(d, sai.angular_coord, scale);
        let to_center = inverse_warp(&sai.image, &dflow)?;
        let to_next = inverse_warp(&to_center, flow)?;
        let border = if masked {
            mask_width(&dflow) + flow_border
        } else {
            0
        };
        masked_mae(&to_next, next_frame, border)
    })
}

/// Mean absolute error between the center view and the input view.
pub fn photometric_loss(lf: &LightField, input_view: &Image) -> Result<f64> {
    check_center_dims(lf, input_view)?;
    let center = lf.center_view()?;
    mean_abs_diff(&center, input_view)
}
