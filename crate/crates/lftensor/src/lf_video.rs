//! Light-field video synthesis from a single 4-D light field under a 6-DoF
//! camera path: in-plane rotation about the (U/2, 0) pivot, focal-scaled
//! tilt folded into the angular shift, and z-translation coupling the
//! spatial coordinate back into the view coordinate.

use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::Image;
use crate::io::save_image_png;
use crate::lightfield::{LightField, CHANNELS};

/// One camera pose: translation (px, py in view-grid steps, pz a unitless
/// scale coupling) and rotation (radians).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    /// (px, py, pz)
    pub p: [f64; 3],
    /// (theta_x, theta_y, theta_z)
    pub r: [f64; 3],
}

impl Pose {
    pub const IDENTITY: Pose = Pose {
        p: [0.0; 3],
        r: [0.0; 3],
    };
}

/// A 6-DoF trajectory plus the camera model constants it is expressed in:
/// focal length (view-grid units), the stereo row offset v_m, and the
/// horizontal view extent U used as both the stereo baseline and the
/// rotation pivot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CameraPath {
    pub frames: Vec<Pose>,
    pub focal_length: f64,
    pub v_m: f64,
    pub u_extent: f64,
}

impl CameraPath {
    pub fn validate(&self) -> Result<()> {
        if self.frames.is_empty() {
            return Err(Error::EmptySet("camera path frames"));
        }
        let finite = self
            .frames
            .iter()
            .all(|f| f.p.iter().chain(f.r.iter()).all(|v| v.is_finite()))
            && self.focal_length.is_finite()
            && self.v_m.is_finite()
            && self.u_extent.is_finite();
        if !finite {
            return Err(Error::NonFiniteData("camera path".into()));
        }
        Ok(())
    }

    /// The stereo preset: views (0, v_m) and (U, v_m).
    pub fn stereo_views(&self) -> [(f64, f64); 2] {
        [(0.0, self.v_m), (self.u_extent, self.v_m)]
    }

    pub fn from_json_file(path: &Path) -> Result<CameraPath> {
        let body = fs::read_to_string(path)
            .map_err(|e| Error::CorruptDescriptor(format!("{}: {e}", path.display())))?;
        let cam: CameraPath = serde_json::from_str(&body)
            .map_err(|e| Error::CorruptDescriptor(format!("{}: {e}", path.display())))?;
        cam.validate()?;
        Ok(cam)
    }
}

/// Quadrilinear light-field sample: bilinear in the angular grid times
/// bilinear in space, all four axes border-clamped.
fn sample_lf(lf: &LightField, xs: f64, ys: f64, ua: f64, va: f64, c: usize) -> f64 {
    let cols = lf.angular_cols();
    let rows = lf.angular_rows();
    let uc = ua.clamp(0.0, (cols - 1) as f64);
    let vc = va.clamp(0.0, (rows - 1) as f64);
    let u0 = uc.floor() as usize;
    let v0 = vc.floor() as usize;
    let u1 = (u0 + 1).min(cols - 1);
    let v1 = (v0 + 1).min(rows - 1);
    let fu = uc - u0 as f64;
    let fv = vc - v0 as f64;

    let spatial = |v: usize, u: usize| -> f64 {
        let w = lf.width();
        let h = lf.height();
        let xc = xs.clamp(0.0, (w - 1) as f64);
        let yc = ys.clamp(0.0, (h - 1) as f64);
        let x0 = xc.floor() as usize;
        let y0 = yc.floor() as usize;
        let x1 = (x0 + 1).min(w - 1);
        let y1 = (y0 + 1).min(h - 1);
        let fx = xc - x0 as f64;
        let fy = yc - y0 as f64;
        (1.0 - fy) * ((1.0 - fx) * lf.get(v, u, y0, x0, c) + fx * lf.get(v, u, y0, x1, c))
            + fy * ((1.0 - fx) * lf.get(v, u, y1, x0, c) + fx * lf.get(v, u, y1, x1, c))
    };

    (1.0 - fv) * ((1.0 - fu) * spatial(v0, u0) + fu * spatial(v0, u1))
        + fv * ((1.0 - fu) * spatial(v1, u0) + fu * spatial(v1, u1))
}

/// Render the view at continuous angular coordinate (view_u, view_v) under
/// `pose`, using the path's focal length and horizontal extent. At the
/// identity pose and an on-grid view this is an exact copy of that SAI.
pub fn render_view_at_pose(
    lf: &LightField,
    path: &CameraPath,
    pose: &Pose,
    view_u: f64,
    view_v: f64,
) -> Result<Image> {
    if lf.angular_rows() < 2 || lf.angular_cols() < 2 {
        return Err(Error::DegenerateAngularGrid {
            rows: lf.angular_rows(),
            cols: lf.angular_cols(),
        });
    }
    let [px, py, pz] = pose.p;
    let [tx, ty, tz] = pose.r;
    let (cz, sz) = (tz.cos(), tz.sin());
    let pivot = path.u_extent / 2.0;
    let pxi = px + path.focal_length * tx;
    let pyi = py + path.focal_length * ty;

    let mut out = Image::zeros(lf.height(), lf.width(), CHANNELS);
    for y in 0..lf.height() {
        for x in 0..lf.width() {
            let xr = x as f64 - pivot;
            let xj = xr * cz - y as f64 * sz + pivot;
            let yj = xr * sz + y as f64 * cz;
            let ua = view_u + pxi - xj * pz;
            let va = view_v + pyi - yj * pz;
            for c in 0..CHANNELS {
                out.set(y, x, c, sample_lf(lf, xj, yj, ua, va, c));
            }
        }
    }
    Ok(out)
}

/// One rendered multi-view frame per pose; each frame holds one image per
/// requested (u, v) view, in order.
pub fn simulate_lf_video(
    lf: &LightField,
    path: &CameraPath,
    out_views: &[(f64, f64)],
) -> Result<Vec<Vec<Image>>> {
    path.validate()?;
    if out_views.is_empty() {
        return Err(Error::EmptySet("output views"));
    }
    let frames: Vec<Result<Vec<Image>>> = path
        .frames
        .par_iter()
        .map(|pose| {
            out_views
                .iter()
                .map(|&(u, v)| render_view_at_pose(lf, path, pose, u, v))
                .collect()
        })
        .collect();
    frames.into_iter().collect()
}

fn format_coord(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct VideoDescriptor {
    frame_count: usize,
    views: Vec<(f64, f64)>,
    height: usize,
    width: usize,
}

/// Write frames as `frame_{t}/view_{v}_{u}.png` plus a `video.json`
/// descriptor.
pub fn save_video_frames(
    frames: &[Vec<Image>],
    out_views: &[(f64, f64)],
    dir: &Path,
) -> Result<()> {
    if frames.is_empty() {
        return Err(Error::EmptySet("video frames"));
    }
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let meta = VideoDescriptor {
        frame_count: frames.len(),
        views: out_views.to_vec(),
        height: frames[0][0].height(),
        width: frames[0][0].width(),
    };
    let meta_path = dir.join("video.json");
    let body = serde_json::to_string_pretty(&meta)
        .map_err(|e| Error::io(&meta_path, std::io::Error::other(e)))?;
    fs::write(&meta_path, body).map_err(|e| Error::io(&meta_path, e))?;
    for (t, frame) in frames.iter().enumerate() {
        let frame_dir = dir.join(format!("frame_{t}"));
        fs::create_dir_all(&frame_dir).map_err(|e| Error::io(&frame_dir, e))?;
        for (img, &(u, v)) in frame.iter().zip(out_views) {
            let name = format!("view_{}_{}.png", format_coord(v), format_coord(u));
            save_image_png(img, &frame_dir.join(name))?;
        }
    }
    Ok(())
}
