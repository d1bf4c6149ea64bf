//! Disparity evaluation: affine-invariant MAE/RMSE, 1-D plane extraction by
//! quantile-initialized Lloyd iteration, the symmetric bins chamfer
//! distance, the temperature-weighted distillation loss with its
//! edge-aware smoothness pyramid, PSNR, and the sequence-level temporal
//! consistency score.

use crate::error::{Error, Result};
use crate::image::Image;
use crate::lightfield::{DisparityMap, FlowField, LightField};
use crate::tensor_display::DisparityPlanes;
use crate::warp::{temporal_loss, BaselineScale};

/// Least-squares affine map s * pred + t ~ ref.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineFit {
    pub s: f64,
    pub t: f64,
}

const VARIANCE_FLOOR: f64 = 1e-12;

fn check_map_dims(pred: &DisparityMap, reference: &DisparityMap) -> Result<()> {
    if pred.height() != reference.height() || pred.width() != reference.width() {
        return Err(Error::DimensionMismatch(format!(
            "prediction {}x{} vs reference {}x{}",
            pred.height(),
            pred.width(),
            reference.height(),
            reference.width()
        )));
    }
    Ok(())
}

/// Closed-form normal equations for argmin_{s,t} sum (s*pred + t - ref)^2.
/// A constant prediction (variance <= 1e-12) is degenerate.
pub fn affine_fit(pred: &DisparityMap, reference: &DisparityMap) -> Result<AffineFit> {
    check_map_dims(pred, reference)?;
    let n = pred.data().len() as f64;
    let mean_p = pred.data().iter().sum::<f64>() / n;
    let mean_r = reference.data().iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var = 0.0;
    for (p, r) in pred.data().iter().zip(reference.data()) {
        cov += (p - mean_p) * (r - mean_r);
        var += (p - mean_p) * (p - mean_p);
    }
    cov /= n;
    var /= n;
    if var <= VARIANCE_FLOOR {
        return Err(Error::DegeneratePrediction(var));
    }
    let s = cov / var;
    Ok(AffineFit {
        s,
        t: mean_r - s * mean_p,
    })
}

/// Affine-invariant MAE and RMSE of `pred` against `reference` after the
/// least-squares alignment. Invariant under any positive-gain affine remap
/// of the prediction.
pub fn ai_metrics(pred: &DisparityMap, reference: &DisparityMap) -> Result<(f64, f64)> {
    let fit = affine_fit(pred, reference)?;
    let n = pred.data().len() as f64;
    let mut abs_sum = 0.0;
    let mut sq_sum = 0.0;
    for (p, r) in pred.data().iter().zip(reference.data()) {
        let e = fit.s * p + fit.t - r;
        abs_sum += e.abs();
        sq_sum += e * e;
    }
    Ok((abs_sum / n, (sq_sum / n).sqrt()))
}

/// Sorted (not necessarily distinct) disparity plane centers.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneCenters {
    centers: Vec<f64>,
}

impl PlaneCenters {
    /// Sorts ascending; rejects empty or non-finite input.
    pub fn new(mut centers: Vec<f64>) -> Result<Self> {
        if centers.is_empty() {
            return Err(Error::EmptySet("plane centers"));
        }
        if !centers.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFiniteData("plane center".into()));
        }
        centers.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(PlaneCenters { centers })
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    /// Convert to display planes; fails if any two centers coincide.
    pub fn into_disparity_planes(self) -> Result<DisparityPlanes> {
        DisparityPlanes::new(self.centers)
    }
}

/// Clustering objective: sum over values of the squared distance to the
/// nearest center.
fn kmeans_objective(values: &[f64], centers: &[f64]) -> f64 {
    values
        .iter()
        .map(|v| {
            centers
                .iter()
                .map(|c| (v - c) * (v - c))
                .fold(f64::INFINITY, f64::min)
        })
        .sum()
}

/// 1-D k-means over the disparity histogram. Centers start at the
/// (i + 0.5)/k quantiles and move by Lloyd iteration until the largest
/// center movement falls below 1e-9 or 100 iterations pass. Assignment ties
/// go to the lower cluster and empty clusters keep their center, so the
/// procedure is deterministic. If the converged centers contain exact
/// duplicates (k exceeding the number of distinct values), duplicates are
/// merged and the freed slots are re-split onto the data extremes, padding
/// with repeats when the data has no further distinct values.
pub fn extract_disparity_planes(d: &DisparityMap, k: usize) -> Result<PlaneCenters> {
    if k == 0 {
        return Err(Error::InvalidConfig("k must be >= 1".into()));
    }
    let mut values: Vec<f64> = d.data().to_vec();
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = values.len();

    let mut centers: Vec<f64> = (0..k)
        .map(|i| {
            let q = (i as f64 + 0.5) / k as f64;
            let idx = ((q * n as f64).floor() as usize).min(n - 1);
            values[idx]
        })
        .collect();

    let prefix: Vec<f64> = std::iter::once(0.0)
        .chain(values.iter().scan(0.0, |acc, v| {
            *acc += v;
            Some(*acc)
        }))
        .collect();

    for _ in 0..100 {
        // 1-D nearest-center assignment is an interval partition at the
        // midpoints between consecutive (sorted) centers.
        centers.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut splits = Vec::with_capacity(k + 1);
        splits.push(0usize);
        for i in 0..k - 1 {
            let boundary = 0.5 * (centers[i] + centers[i + 1]);
            // v == boundary joins the lower cluster.
            let split = values.partition_point(|v| *v <= boundary);
            splits.push(split.max(*splits.last().unwrap()));
        }
        splits.push(n);

        let mut movement = 0.0f64;
        let mut next = centers.clone();
        for (i, c) in next.iter_mut().enumerate() {
            let (lo, hi) = (splits[i], splits[i + 1]);
            if hi > lo {
                let mean = (prefix[hi] - prefix[lo]) / (hi - lo) as f64;
                movement = movement.max((mean - *c).abs());
                *c = mean;
            }
        }
        centers = next;
        if movement < 1e-9 {
            break;
        }
    }
    centers.sort_by(|a, b| a.partial_cmp(b).unwrap());

    // Merge exact duplicates, then re-split the freed slots at the extremes.
    let mut merged: Vec<f64> = Vec::with_capacity(k);
    for c in &centers {
        if merged.last() != Some(c) {
            merged.push(*c);
        }
    }
    if merged.len() < k {
        let (lo, hi) = (values[0], values[n - 1]);
        for extreme in [lo, hi] {
            if merged.len() < k && !merged.contains(&extreme) {
                merged.push(extreme);
            }
        }
        let mut fill = 0usize;
        while merged.len() < k {
            merged.push(merged[fill % merged.len()]);
            fill += 1;
        }
    }
    PlaneCenters::new(merged)
}

/// Symmetric sum of squared nearest-neighbor distances between two center
/// sets. Zero exactly when the sets are equal as sets.
pub fn bins_chamfer(x: &PlaneCenters, c: &PlaneCenters) -> Result<f64> {
    if x.is_empty() || c.is_empty() {
        return Err(Error::EmptySet("chamfer operand"));
    }
    let one_way = |from: &[f64], to: &[f64]| -> f64 {
        from.iter()
            .map(|a| {
                to.iter()
                    .map(|b| (a - b) * (a - b))
                    .fold(f64::INFINITY, f64::min)
            })
            .sum::<f64>()
    };
    Ok(one_way(x.centers(), c.centers()) + one_way(c.centers(), x.centers()))
}

/// 2x2 mean pooling; odd trailing rows/columns fold into the last pooled
/// cell, and a 1-wide dimension passes through.
fn pool_half(img: &Image) -> Image {
    let oh = (img.height() / 2).max(1);
    let ow = (img.width() / 2).max(1);
    let mut out = Image::zeros(oh, ow, img.channels());
    for y in 0..oh {
        for x in 0..ow {
            let y1 = (2 * y + 1).min(img.height() - 1);
            let x1 = (2 * x + 1).min(img.width() - 1);
            let y0 = (2 * y).min(img.height() - 1);
            let x0 = (2 * x).min(img.width() - 1);
            for ch in 0..img.channels() {
                let s = img.get(y0, x0, ch)
                    + img.get(y0, x1, ch)
                    + img.get(y1, x0, ch)
                    + img.get(y1, x1, ch);
                out.set(y, x, ch, s / 4.0);
            }
        }
    }
    out
}

/// Single-scale edge-aware smoothness: mean over pixels of
/// |dx d| * exp(-|dx I|) + |dy d| * exp(-|dy I|), forward differences with
/// zero gradient on the last row/column, |dI| the L1 norm over channels.
fn disl_single_scale(disp: &Image, rgb: &Image) -> f64 {
    let (h, w) = (disp.height(), disp.width());
    let grad_x = |img: &Image, y: usize, x: usize| -> f64 {
        if x + 1 >= w {
            return 0.0;
        }
        (0..img.channels())
            .map(|c| (img.get(y, x + 1, c) - img.get(y, x, c)).abs())
            .sum()
    };
    let grad_y = |img: &Image, y: usize, x: usize| -> f64 {
        if y + 1 >= h {
            return 0.0;
        }
        (0..img.channels())
            .map(|c| (img.get(y + 1, x, c) - img.get(y, x, c)).abs())
            .sum()
    };
    let mut sum = 0.0;
    for y in 0..h {
        for x in 0..w {
            sum += grad_x(disp, y, x) * (-grad_x(rgb, y, x)).exp()
                + grad_y(disp, y, x) * (-grad_y(rgb, y, x)).exp();
        }
    }
    sum / (h * w) as f64
}

/// Depth-inverse-smoothness pyramid: the single-scale term summed over
/// `levels` scales, halving resolution by 2x2 mean pooling between levels.
pub fn disl_pyramid(pred: &DisparityMap, rgb: &Image, levels: usize) -> Result<f64> {
    if levels == 0 {
        return Err(Error::InvalidConfig("levels must be >= 1".into()));
    }
    if pred.height() != rgb.height() || pred.width() != rgb.width() {
        return Err(Error::DimensionMismatch(format!(
            "disparity {}x{} vs rgb {}x{}",
            pred.height(),
            pred.width(),
            rgb.height(),
            rgb.width()
        )));
    }
    let mut disp = Image::from_vec(pred.height(), pred.width(), 1, pred.data().to_vec())?;
    let mut guide = rgb.clone();
    let mut total = 0.0;
    for level in 0..levels {
        total += disl_single_scale(&disp, &guide);
        if level + 1 < levels {
            disp = pool_half(&disp);
            guide = pool_half(&guide);
        }
    }
    Ok(total)
}

/// Temperature weights for the distillation loss; at least one must be
/// positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistillTemperatures {
    pub t1: f64,
    pub t2: f64,
    pub t3: f64,
    pub pyramid_levels: usize,
}

impl DistillTemperatures {
    pub fn new(t1: f64, t2: f64, t3: f64, pyramid_levels: usize) -> Result<Self> {
        for t in [t1, t2, t3] {
            if !(t.is_finite() && t >= 0.0) {
                return Err(Error::InvalidConfig(
                    "temperatures must be finite and non-negative".into(),
                ));
            }
        }
        if t1 <= 0.0 && t2 <= 0.0 && t3 <= 0.0 {
            return Err(Error::InvalidConfig(
                "at least one temperature must be positive".into(),
            ));
        }
        if pyramid_levels == 0 {
            return Err(Error::InvalidConfig("pyramid_levels must be >= 1".into()));
        }
        Ok(DistillTemperatures {
            t1,
            t2,
            t3,
            pyramid_levels,
        })
    }
}

impl Default for DistillTemperatures {
    fn default() -> Self {
        DistillTemperatures {
            t1: 1.0,
            t2: 1.0,
            t3: 1.0,
            pyramid_levels: 4,
        }
    }
}

/// T1 * mean|pred - teacher| + T2 * mean (pred - teacher)^2
/// + T3 * disl_pyramid(pred, rgb).
pub fn distillation_loss(
    pred: &DisparityMap,
    teacher: &DisparityMap,
    rgb: &Image,
    temps: &DistillTemperatures,
) -> Result<f64> {
    check_map_dims(pred, teacher)?;
    let n = pred.data().len() as f64;
    let mut l1 = 0.0;
    let mut l2 = 0.0;
    for (p, t) in pred.data().iter().zip(teacher.data()) {
        l1 += (p - t).abs();
        l2 += (p - t) * (p - t);
    }
    let smooth = if temps.t3 > 0.0 {
        disl_pyramid(pred, rgb, temps.pyramid_levels)?
    } else {
        0.0
    };
    Ok(temps.t1 * l1 / n + temps.t2 * l2 / n + temps.t3 * smooth)
}

/// Peak signal-to-noise ratio with peak 1.0; +inf for identical inputs.
pub fn psnr(a: &Image, b: &Image) -> Result<f64> {
    if !a.same_dims(b) {
        return Err(Error::DimensionMismatch("psnr operands".into()));
    }
    let n = a.data().len() as f64;
    let mse: f64 = a
        .data()
        .iter()
        .zip(b.data())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        / n;
    if mse == 0.0 {
        Ok(f64::INFINITY)
    } else {
        Ok(10.0 * (1.0 / mse).log10())
    }
}

/// Mean over frames of the temporal warping loss; flow is ingested, never
/// computed here.
pub fn temporal_consistency_score(
    lf_seq: &[LightField],
    d_seq: &[DisparityMap],
    flow_seq: &[FlowField],
    next_frames: &[Image],
    scale: BaselineScale,
    masked: bool,
) -> Result<f64> {
    let n = lf_seq.len();
    if n == 0 {
        return Err(Error::EmptySet("frame sequence"));
    }
    if d_seq.len() != n || flow_seq.len() != n || next_frames.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "sequence lengths lf={} d={} flow={} next={}",
            n,
            d_seq.len(),
            flow_seq.len(),
            next_frames.len()
        )));
    }
    let mut total = 0.0;
    for i in 0..n {
        total += temporal_loss(
            &lf_seq[i],
            &d_seq[i],
            &flow_seq[i],
            &next_frames[i],
            scale,
            masked,
        )?;
    }
    Ok(total / n as f64)
}
