//! Multiplicative tensor-display layer: a view is a sum over ranks of
//! products over disparity-shifted layers. Rendering, the least-squares
//! objective with its analytic gradient, and projected-gradient fitting.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::image::{bilinear_taps, BilinearTap};
use crate::lightfield::{LightField, CHANNELS};

/// Low-rank layer stack: `n_layers x rank` RGB images f_m^l with entries in
/// [0, 1], stored (l, m, y, x, c).
#[derive(Debug, Clone, PartialEq)]
pub struct LayerStack {
    n_layers: usize,
    rank: usize,
    height: usize,
    width: usize,
    data: Vec<f64>,
}

impl LayerStack {
    pub fn from_vec(
        n_layers: usize,
        rank: usize,
        height: usize,
        width: usize,
        data: Vec<f64>,
    ) -> Result<Self> {
        if n_layers == 0 || rank == 0 {
            return Err(Error::DimensionMismatch(
                "layer stack needs n_layers >= 1 and rank >= 1".into(),
            ));
        }
        if data.len() != n_layers * rank * height * width * CHANNELS {
            return Err(Error::DimensionMismatch(format!(
                "stack payload {} != {}x{}x{}x{}x{}",
                data.len(),
                n_layers,
                rank,
                height,
                width,
                CHANNELS
            )));
        }
        for &v in &data {
            if !v.is_finite() {
                return Err(Error::NonFiniteData("layer stack entry".into()));
            }
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::OutOfRange(format!("stack entry {v} outside [0,1]")));
            }
        }
        Ok(LayerStack {
            n_layers,
            rank,
            height,
            width,
            data,
        })
    }

    pub fn splat(n_layers: usize, rank: usize, height: usize, width: usize, value: f64) -> Self {
        LayerStack {
            n_layers,
            rank,
            height,
            width,
            data: vec![value.clamp(0.0, 1.0); n_layers * rank * height * width * CHANNELS],
        }
    }

    pub fn n_layers(&self) -> usize {
        self.n_layers
    }

    pub fn rank(&self) -> usize {
        self.rank
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

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn index(&self, l: usize, m: usize, y: usize, x: usize, c: usize) -> usize {
        (((l * self.rank + m) * self.height + y) * self.width + x) * CHANNELS + c
    }

    #[inline]
    pub fn get(&self, l: usize, m: usize, y: usize, x: usize, c: usize) -> f64 {
        self.data[self.index(l, m, y, x, c)]
    }

    #[inline]
    pub fn set(&mut self, l: usize, m: usize, y: usize, x: usize, c: usize, value: f64) {
        let i = self.index(l, m, y, x, c);
        self.data[i] = value;
    }

    #[inline]
    fn sample_with_taps(&self, l: usize, m: usize, c: usize, taps: &[BilinearTap; 4]) -> f64 {
        taps[0].weight * self.get(l, m, taps[0].y, taps[0].x, c)
            + taps[1].weight * self.get(l, m, taps[1].y, taps[1].x, c)
            + taps[2].weight * self.get(l, m, taps[2].y, taps[2].x, c)
            + taps[3].weight * self.get(l, m, taps[3].y, taps[3].x, c)
    }
}

/// Per-layer disparity plane centers D_l, strictly increasing, in pixels of
/// shift per unit angular offset.
#[derive(Debug, Clone, PartialEq)]
pub struct DisparityPlanes {
    centers: Vec<f64>,
}

impl DisparityPlanes {
    pub fn new(centers: Vec<f64>) -> Result<Self> {
        if centers.is_empty() {
            return Err(Error::EmptySet("disparity planes"));
        }
        if !centers.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFiniteData("disparity plane center".into()));
        }
        if centers.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConfig(
                "disparity plane centers must be strictly increasing".into(),
            ));
        }
        Ok(DisparityPlanes { centers })
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }
}

/// Fit loop knobs. `tolerance` stops the loop once the relative loss
/// decrease over the trailing 10 iterations drops below it.
#[derive(Debug, Clone, Copy)]
pub struct FitConfig {
    pub max_iters: usize,
    pub step_size: f64,
    pub tolerance: f64,
    pub seed: u64,
}

impl FitConfig {
    pub fn new(max_iters: usize, step_size: f64, tolerance: f64, seed: u64) -> Result<Self> {
        if max_iters == 0 {
            return Err(Error::InvalidConfig("max_iters must be >= 1".into()));
        }
        if !(step_size.is_finite() && step_size > 0.0) {
            return Err(Error::InvalidConfig("step_size must be positive".into()));
        }
        if !(tolerance.is_finite() && tolerance > 0.0) {
            return Err(Error::InvalidConfig("tolerance must be positive".into()));
        }
        Ok(FitConfig {
            max_iters,
            step_size,
            tolerance,
            seed,
        })
    }
}

fn check_pairing(stack: &LayerStack, planes: &DisparityPlanes) -> Result<()> {
    if planes.len() != stack.n_layers() {
        return Err(Error::DimensionMismatch(format!(
            "{} planes for {} layers",
            planes.len(),
            stack.n_layers()
        )));
    }
    Ok(())
}

fn center_offsets(angular_rows: usize, angular_cols: usize) -> Result<(i64, i64)> {
    if angular_rows % 2 == 0 {
        return Err(Error::EvenAngularDim(angular_rows));
    }
    if angular_cols % 2 == 0 {
        return Err(Error::EvenAngularDim(angular_cols));
    }
    Ok(((angular_rows as i64 - 1) / 2, (angular_cols as i64 - 1) / 2))
}

/// Render one view's pixels. `du`, `dv` are signed offsets from the center
/// view. Accumulation is m outer, l inner; the sum is clamped to [0, 1].
fn render_view_into(
    stack: &LayerStack,
    planes: &DisparityPlanes,
    du: f64,
    dv: f64,
    out: &mut [f64],
) {
    let (h, w) = (stack.height(), stack.width());
    let centers = planes.centers();
    let mut taps: Vec<[BilinearTap; 4]> = Vec::with_capacity(centers.len());
    for y in 0..h {
        for x in 0..w {
            taps.clear();
            for &d in centers {
                taps.push(bilinear_taps(h, w, x as f64 + d * du, y as f64 + d * dv));
            }
            for c in 0..CHANNELS {
                let mut sum = 0.0;
                for m in 0..stack.rank() {
                    let mut prod = 1.0;
                    for (l, t) in taps.iter().enumerate() {
                        prod *= stack.sample_with_taps(l, m, c, t);
                    }
                    sum += prod;
                }
                out[(y * w + x) * CHANNELS + c] = sum.clamp(0.0, 1.0);
            }
        }
    }
}

/// Evaluate the display model for every view of an
/// `angular_rows x angular_cols` grid (both odd).
pub fn render_light_field(
    stack: &LayerStack,
    planes: &DisparityPlanes,
    angular_rows: usize,
    angular_cols: usize,
) -> Result<LightField> {
    check_pairing(stack, planes)?;
    let (vc, uc) = center_offsets(angular_rows, angular_cols)?;
    let (h, w) = (stack.height(), stack.width());
    let view_len = h * w * CHANNELS;

    let views: Vec<Vec<f64>> = (0..angular_rows * angular_cols)
        .into_par_iter()
        .map(|i| {
            let v = i / angular_cols;
            let u = i % angular_cols;
            let du = u as i64 - uc;
            let dv = v as i64 - vc;
            let mut buf = vec![0.0; view_len];
            render_view_into(stack, planes, du as f64, dv as f64, &mut buf);
            buf
        })
        .collect();

    let mut data = Vec::with_capacity(angular_rows * angular_cols * view_len);
    for view in views {
        data.extend_from_slice(&view);
    }
    LightField::from_vec(angular_rows, angular_cols, h, w, data)
}

/// Mean-squared reconstruction loss against `target` plus its analytic
/// gradient with respect to every stack entry (same (l, m, y, x, c) layout
/// as the stack payload). Clamp saturation is passed through unchanged
/// (straight-through), so the gradient matches the unclamped model.
pub fn td_loss_and_gradient(
    stack: &LayerStack,
    planes: &DisparityPlanes,
    target: &LightField,
) -> Result<(f64, Vec<f64>)> {
    check_pairing(stack, planes)?;
    let (vc, uc) = center_offsets(target.angular_rows(), target.angular_cols())?;
    if target.height() != stack.height() || target.width() != stack.width() {
        return Err(Error::DimensionMismatch(format!(
            "target {}x{} vs stack {}x{}",
            target.height(),
            target.width(),
            stack.height(),
            stack.width()
        )));
    }
    let (h, w) = (stack.height(), stack.width());
    let (rows, cols) = (target.angular_rows(), target.angular_cols());
    let n_samples = (rows * cols * h * w * CHANNELS) as f64;
    let (n_layers, rank) = (stack.n_layers(), stack.rank());

    // Per-view partial gradients, reduced sequentially in view order so the
    // result is independent of the thread count.
    let partials: Vec<(f64, Vec<f64>)> = (0..rows * cols)
        .into_par_iter()
        .map(|i| {
            let v = i / cols;
            let u = i % cols;
            let du = (u as i64 - uc) as f64;
            let dv = (v as i64 - vc) as f64;
            let centers = planes.centers();
            let mut grad = vec![0.0; stack.len()];
            let mut sq_sum = 0.0;
            let mut taps: Vec<[BilinearTap; 4]> = Vec::with_capacity(n_layers);
            let mut samples = vec![0.0; n_layers];
            let mut prefix = vec![1.0; n_layers + 1];
            let mut suffix = vec![1.0; n_layers + 1];
            for y in 0..h {
                for x in 0..w {
                    taps.clear();
                    for &d in centers {
                        taps.push(bilinear_taps(h, w, x as f64 + d * du, y as f64 + d * dv));
                    }
                    for c in 0..CHANNELS {
                        let mut sum = 0.0;
                        for m in 0..rank {
                            let mut prod = 1.0;
                            for (l, t) in taps.iter().enumerate() {
                                prod *= stack.sample_with_taps(l, m, c, t);
                            }
                            sum += prod;
                        }
                        let rendered = sum.clamp(0.0, 1.0);
                        let residual = rendered - target.get(v, u, y, x, c);
                        sq_sum += residual * residual;
                        let upstream = 2.0 * residual / n_samples;
                        for m in 0..rank {
                            for (l, t) in taps.iter().enumerate() {
                                samples[l] = stack.sample_with_taps(l, m, c, t);
                            }
                            for l in 0..n_layers {
                                prefix[l + 1] = prefix[l] * samples[l];
                            }
                            for l in (0..n_layers).rev() {
                                suffix[l] = suffix[l + 1] * samples[l];
                            }
                            for (l, t) in taps.iter().enumerate() {
                                let others = prefix[l] * suffix[l + 1];
                                let g = upstream * others;
                                for tap in t {
                                    grad[stack.index(l, m, tap.y, tap.x, c)] += g * tap.weight;
                                }
                            }
                        }
                    }
                }
            }
            (sq_sum, grad)
        })
        .collect();

    let mut loss = 0.0;
    let mut grad = vec![0.0; stack.len()];
    for (sq_sum, part) in partials {
        loss += sq_sum;
        for (g, p) in grad.iter_mut().zip(&part) {
            *g += p;
        }
    }
    Ok((loss / n_samples, grad))
}

fn initial_stack(
    target: &LightField,
    n_layers: usize,
    rank: usize,
    seed: u64,
) -> Result<LayerStack> {
    let center = target.center_view()?;
    let (h, w) = (target.height(), target.width());
    let exponent = 1.0 / n_layers as f64;
    let mut data = vec![0.0; n_layers * rank * h * w * CHANNELS];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut i = 0;
    for _l in 0..n_layers {
        for m in 0..rank {
            for y in 0..h {
                for x in 0..w {
                    for c in 0..CHANNELS {
                        let base = if m == 0 {
                            center.get(y, x, c).powf(exponent)
                        } else {
                            0.5
                        };
                        let noise: f64 = rng.gen_range(-0.01..=0.01);
                        data[i] = (base + noise).clamp(0.0, 1.0);
                        i += 1;
                    }
                }
            }
        }
    }
    LayerStack::from_vec(n_layers, rank, h, w, data)
}

/// Fit a layer stack to `target` by projected gradient descent with the
/// plane centers held fixed. Initialization: rank-0 layers start at the
/// center view raised to 1/L, higher ranks at 0.5, all perturbed by seeded
/// uniform noise in [-0.01, 0.01] and clamped to [0, 1].
///
/// Returns the iterate with the lowest evaluated loss (so the fitted loss
/// never exceeds the initial one) together with the per-iterate loss
/// history starting at the initial stack.
pub fn fit_layer_stack(
    target: &LightField,
    planes: &DisparityPlanes,
    rank: usize,
    cfg: &FitConfig,
) -> Result<(LayerStack, Vec<f64>)> {
    if rank == 0 {
        return Err(Error::InvalidConfig("rank must be >= 1".into()));
    }
    let n_layers = planes.len();
    let mut stack = initial_stack(target, n_layers, rank, cfg.seed)?;
    let mut history = Vec::with_capacity(cfg.max_iters + 1);
    let mut best = stack.clone();
    let mut best_loss = f64::INFINITY;

    for _ in 0..cfg.max_iters {
        let (loss, grad) = td_loss_and_gradient(&stack, planes, target)?;
        history.push(loss);
        if loss < best_loss {
            best_loss = loss;
            best = stack.clone();
        }
        let i = history.len() - 1;
        if i >= 10 {
            let past = history[i - 10];
            if past > 0.0 && (past - history[i]) / past < cfg.tolerance {
                return Ok((best, history));
            }
        }
        for (entry, g) in stack.data_mut().iter_mut().zip(&grad) {
            *entry = (*entry - cfg.step_size * g).clamp(0.0, 1.0);
        }
    }
    let (final_loss, _) = td_loss_and_gradient(&stack, planes, target)?;
    history.push(final_loss);
    if final_loss < best_loss {
        best = stack;
    }
    Ok((best, history))
}
