use crate::error::{Error, Result};
use crate::image::Image;

/// 4-D spatial-angular radiance grid: `angular_rows x angular_cols` views of
/// `height x width` RGB, stored (v, u, y, x, c) row-major with v = 0 the top
/// view row and u = 0 the leftmost view column. Samples live in [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct LightField {
    angular_rows: usize,
    angular_cols: usize,
    height: usize,
    width: usize,
    data: Vec<f64>,
}

pub const CHANNELS: usize = 3;

impl LightField {
    pub fn zeros(angular_rows: usize, angular_cols: usize, height: usize, width: usize) -> Self {
        LightField {
            angular_rows,
            angular_cols,
            height,
            width,
            data: vec![0.0; angular_rows * angular_cols * height * width * CHANNELS],
        }
    }

    pub fn from_vec(
        angular_rows: usize,
        angular_cols: usize,
        height: usize,
        width: usize,
        data: Vec<f64>,
    ) -> Result<Self> {
        if angular_rows == 0 || angular_cols == 0 || height == 0 || width == 0 {
            return Err(Error::DimensionMismatch(
                "light field dimensions must all be >= 1".into(),
            ));
        }
        if data.len() != angular_rows * angular_cols * height * width * CHANNELS {
            return Err(Error::DimensionMismatch(format!(
                "light field payload {} != {}x{}x{}x{}x{}",
                data.len(),
                angular_rows,
                angular_cols,
                height,
                width,
                CHANNELS
            )));
        }
        let lf = LightField {
            angular_rows,
            angular_cols,
            height,
            width,
            data,
        };
        lf.validate()?;
        Ok(lf)
    }

    /// Assemble from per-view images in (v, u) row-major order.
    pub fn from_views(
        angular_rows: usize,
        angular_cols: usize,
        views: &[Image],
    ) -> Result<Self> {
        if views.len() != angular_rows * angular_cols {
            return Err(Error::DimensionMismatch(format!(
                "expected {} views, got {}",
                angular_rows * angular_cols,
                views.len()
            )));
        }
        let (h, w) = (views[0].height(), views[0].width());
        let mut data = Vec::with_capacity(angular_rows * angular_cols * h * w * CHANNELS);
        for img in views {
            if img.height() != h || img.width() != w || img.channels() != CHANNELS {
                return Err(Error::DimensionMismatch(
                    "all views must share HxWx3 dimensions".into(),
                ));
            }
            data.extend_from_slice(img.data());
        }
        LightField::from_vec(angular_rows, angular_cols, h, w, data)
    }

    fn validate(&self) -> Result<()> {
        for &v in &self.data {
            if !v.is_finite() {
                return Err(Error::NonFiniteData("light field sample".into()));
            }
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::OutOfRange(format!(
                    "light field sample {v} outside [0,1]"
                )));
            }
        }
        Ok(())
    }

    pub fn angular_rows(&self) -> usize {
        self.angular_rows
    }

    pub fn angular_cols(&self) -> usize {
        self.angular_cols
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

    #[inline]
    pub fn get(&self, v: usize, u: usize, y: usize, x: usize, c: usize) -> f64 {
        debug_assert!(
            v < self.angular_rows
                && u < self.angular_cols
                && y < self.height
                && x < self.width
                && c < CHANNELS
        );
        self.data[(((v * self.angular_cols + u) * self.height + y) * self.width + x) * CHANNELS + c]
    }

    #[inline]
    pub fn set(&mut self, v: usize, u: usize, y: usize, x: usize, c: usize, value: f64) {
        let i =
            (((v * self.angular_cols + u) * self.height + y) * self.width + x) * CHANNELS + c;
        self.data[i] = value;
    }

    /// Center view indices; defined only for odd angular dimensions.
    pub fn center_indices(&self) -> Result<(usize, usize)> {
        if self.angular_rows % 2 == 0 {
            return Err(Error::EvenAngularDim(self.angular_rows));
        }
        if self.angular_cols % 2 == 0 {
            return Err(Error::EvenAngularDim(self.angular_cols));
        }
        Ok(((self.angular_rows - 1) / 2, (self.angular_cols - 1) / 2))
    }

    /// Copy the (v, u) view out as an HxWx3 image.
    pub fn view_image(&self, v: usize, u: usize) -> Result<Image> {
        if v >= self.angular_rows || u >= self.angular_cols {
            return Err(Error::IndexOutOfBounds(format!(
                "view ({v},{u}) outside {}x{} grid",
                self.angular_rows, self.angular_cols
            )));
        }
        let stride = self.height * self.width * CHANNELS;
        let start = (v * self.angular_cols + u) * stride;
        Image::from_vec(
            self.height,
            self.width,
            CHANNELS,
            self.data[start..start + stride].to_vec(),
        )
    }

    pub fn center_view(&self) -> Result<Image> {
        let (vc, uc) = self.center_indices()?;
        self.view_image(vc, uc)
    }

    /// Iterate view indices in (v, u) row-major order.
    pub fn view_indices(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let cols = self.angular_cols;
        (0..self.angular_rows).flat_map(move |v| (0..cols).map(move |u| (v, u)))
    }
}

/// One angular slice of a light field, tagged with its signed view offset
/// (du, dv) from the center view.
#[derive(Debug, Clone, PartialEq)]
pub struct SubApertureImage {
    pub image: Image,
    /// (du, dv): u/x offset first, v/y offset second, in view units.
    pub angular_coord: (i64, i64),
}

impl SubApertureImage {
    pub fn new(image: Image, angular_coord: (i64, i64)) -> Result<Self> {
        image.require_unit_range("sub-aperture image")?;
        Ok(SubApertureImage {
            image,
            angular_coord,
        })
    }
}

/// Scalar per-pixel disparity, in pixels of shift per unit angular offset.
/// Positive disparity shifts the sampling coordinate in +x for +u.
#[derive(Debug, Clone, PartialEq)]
pub struct DisparityMap {
    height: usize,
    width: usize,
    data: Vec<f64>,
}

impl DisparityMap {
    pub fn from_vec(height: usize, width: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != height * width {
            return Err(Error::DimensionMismatch(format!(
                "disparity payload {} != {}x{}",
                data.len(),
                height,
                width
            )));
        }
        if !data.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFiniteData("disparity map".into()));
        }
        Ok(DisparityMap {
            height,
            width,
            data,
        })
    }

    pub fn constant(height: usize, width: usize, value: f64) -> Result<Self> {
        DisparityMap::from_vec(height, width, vec![value; height * width])
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

    #[inline]
    pub fn get(&self, y: usize, x: usize) -> f64 {
        debug_assert!(y < self.height && x < self.width);
        self.data[y * self.width + x]
    }
}

/// Per-pixel optical flow (fx, fy) in pixels per frame, interleaved.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowField {
    height: usize,
    width: usize,
    data: Vec<f64>,
}

impl FlowField {
    pub fn from_vec(height: usize, width: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != height * width * 2 {
            return Err(Error::DimensionMismatch(format!(
                "flow payload {} != {}x{}x2",
                data.len(),
                height,
                width
            )));
        }
        if !data.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFiniteData("flow field".into()));
        }
        Ok(FlowField {
            height,
            width,
            data,
        })
    }

    pub fn zeros(height: usize, width: usize) -> Self {
        FlowField {
            height,
            width,
            data: vec![0.0; height * width * 2],
        }
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

    #[inline]
    pub fn get(&self, y: usize, x: usize) -> (f64, f64) {
        debug_assert!(y < self.height && x < self.width);
        let i = (y * self.width + x) * 2;
        (self.data[i], self.data[i + 1])
    }

    #[inline]
    pub fn set(&mut self, y: usize, x: usize, fx: f64, fy: f64) {
        let i = (y * self.width + x) * 2;
        self.data[i] = fx;
        self.data[i + 1] = fy;
    }

    /// Largest absolute flow component, used for border masks.
    pub fn max_abs_component(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// The 5-channel single-view input: RGB plus left/right dual-pixel planes,
/// all the same HxW with samples in [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct DualPixelFrame {
    pub rgb: Image,
    pub dp_left: Image,
    pub dp_right: Image,
}

impl DualPixelFrame {
    pub fn new(rgb: Image, dp_left: Image, dp_right: Image) -> Result<Self> {
        if rgb.channels() != CHANNELS || dp_left.channels() != 1 || dp_right.channels() != 1 {
            return Err(Error::DimensionMismatch(
                "dual-pixel frame needs 3-channel rgb and 1-channel dp planes".into(),
            ));
        }
        if rgb.height() != dp_left.height()
            || rgb.width() != dp_left.width()
            || rgb.height() != dp_right.height()
            || rgb.width() != dp_right.width()
        {
            return Err(Error::DimensionMismatch(
                "rgb and dp planes must share HxW".into(),
            ));
        }
        rgb.require_unit_range("dual-pixel rgb")?;
        dp_left.require_unit_range("dp_left")?;
        dp_right.require_unit_range("dp_right")?;
        Ok(DualPixelFrame {
            rgb,
            dp_left,
            dp_right,
        })
    }

    pub fn height(&self) -> usize {
        self.rgb.height()
    }

    pub fn width(&self) -> usize {
        self.rgb.width()
    }
}
