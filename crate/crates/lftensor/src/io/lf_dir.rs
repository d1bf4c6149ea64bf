use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::png::{load_image_png, save_image_png};
use crate::lightfield::LightField;

#[derive(Debug, Serialize, Deserialize)]
struct LfDescriptor {
    angular_rows: usize,
    angular_cols: usize,
    height: usize,
    width: usize,
}

fn view_file_name(v: usize, u: usize) -> String {
    format!("view_{v}_{u}.png")
}

/// Save a light field as `meta.json` plus one 8-bit PNG per view,
/// `view_{v}_{u}.png`, v = row from 0 at the top, u = column from 0 at the
/// left.
pub fn save_light_field(lf: &LightField, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let meta = LfDescriptor {
        angular_rows: lf.angular_rows(),
        angular_cols: lf.angular_cols(),
        height: lf.height(),
        width: lf.width(),
    };
    let meta_path = dir.join("meta.json");
    let body = serde_json::to_string_pretty(&meta)
        .map_err(|e| Error::io(&meta_path, std::io::Error::other(e)))?;
    fs::write(&meta_path, body).map_err(|e| Error::io(&meta_path, e))?;
    for (v, u) in lf.view_indices() {
        let img = lf.view_image(v, u)?;
        save_image_png(&img, &dir.join(view_file_name(v, u)))?;
    }
    Ok(())
}

/// Load a light field saved by [`save_light_field`]. Errors: missing or
/// unparseable `meta.json` -> `CorruptDescriptor`; a view file absent ->
/// `MissingView`; a view whose decoded size disagrees with the descriptor ->
/// `DimensionMismatch`.
pub fn load_light_field(dir: &Path) -> Result<LightField> {
    let meta_path = dir.join("meta.json");
    let body = fs::read_to_string(&meta_path)
        .map_err(|e| Error::CorruptDescriptor(format!("{}: {e}", meta_path.display())))?;
    let meta: LfDescriptor = serde_json::from_str(&body)
        .map_err(|e| Error::CorruptDescriptor(format!("{}: {e}", meta_path.display())))?;
    if meta.angular_rows == 0 || meta.angular_cols == 0 || meta.height == 0 || meta.width == 0 {
        return Err(Error::CorruptDescriptor(
            "descriptor dimensions must all be >= 1".into(),
        ));
    }
    let mut lf = LightField::zeros(meta.angular_rows, meta.angular_cols, meta.height, meta.width);
    for v in 0..meta.angular_rows {
        for u in 0..meta.angular_cols {
            let path = dir.join(view_file_name(v, u));
            if !path.exists() {
                return Err(Error::MissingView(path));
            }
            let img = load_image_png(&path)?;
            if img.height() != meta.height || img.width() != meta.width {
                return Err(Error::DimensionMismatch(format!(
                    "{}: {}x{} does not match descriptor {}x{}",
                    path.display(),
                    img.height(),
                    img.width(),
                    meta.height,
                    meta.width
                )));
            }
            for y in 0..meta.height {
                for x in 0..meta.width {
                    for c in 0..3 {
                        lf.set(v, u, y, x, c, img.get(y, x, c));
                    }
                }
            }
        }
    }
    Ok(lf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::png::quantize_unit;
    use crate::lightfield::CHANNELS;

    #[test]
    fn single_white_view_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let lf = LightField::from_vec(1, 1, 2, 2, vec![1.0; 2 * 2 * CHANNELS]).unwrap();
        save_light_field(&lf, dir.path()).unwrap();
        let back = load_light_field(dir.path()).unwrap();
        assert_eq!(back.angular_rows(), 1);
        assert_eq!(back.angular_cols(), 1);
        assert!(back.data().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn missing_view_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let lf = LightField::zeros(1, 2, 2, 2);
        save_light_field(&lf, dir.path()).unwrap();
        fs::remove_file(dir.path().join("view_0_1.png")).unwrap();
        assert!(matches!(
            load_light_field(dir.path()),
            Err(Error::MissingView(_))
        ));
    }

    #[test]
    fn corrupt_descriptor_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("meta.json"), "{not json").unwrap();
        assert!(matches!(
            load_light_field(dir.path()),
            Err(Error::CorruptDescriptor(_))
        ));
    }

    #[test]
    fn view_dim_disagreement_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let lf = LightField::zeros(1, 1, 2, 2);
        save_light_field(&lf, dir.path()).unwrap();
        // Overwrite the view with a larger image.
        let big = crate::image::Image::zeros(3, 3, 3);
        save_image_png(&big, &dir.path().join("view_0_0.png")).unwrap();
        assert!(matches!(
            load_light_field(dir.path()),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn round_trip_is_exact_at_8bit_quantization() {
        let dir = tempfile::tempdir().unwrap();
        let mut lf = LightField::zeros(1, 2, 3, 3);
        let mut k = 0usize;
        for (v, u) in [(0, 0), (0, 1)] {
            for y in 0..3 {
                for x in 0..3 {
                    for c in 0..CHANNELS {
                        lf.set(v, u, y, x, c, (k % 256) as f64 / 255.0 * 0.997 + 0.001);
                        k += 1;
                    }
                }
            }
        }
        save_light_field(&lf, dir.path()).unwrap();
        let back = load_light_field(dir.path()).unwrap();
        for (a, b) in lf.data().iter().zip(back.data()) {
            // Loaded value must equal the quantized original exactly.
            assert_eq!(*b, quantize_unit(*a) as f64 / 255.0);
        }
    }

    #[test]
    fn save_load_save_is_byte_identical() {
        let dir1 = tempfile::tempdir().unwrap();
        let dir2 = tempfile::tempdir().unwrap();
        let mut lf = LightField::zeros(1, 1, 4, 4);
        for y in 0..4 {
            for x in 0..4 {
                for c in 0..CHANNELS {
                    lf.set(0, 0, y, x, c, ((y * 4 + x + c) as f64 / 50.0).min(1.0));
                }
            }
        }
        save_light_field(&lf, dir1.path()).unwrap();
        let back = load_light_field(dir1.path()).unwrap();
        save_light_field(&back, dir2.path()).unwrap();
        let a = fs::read(dir1.path().join("view_0_0.png")).unwrap();
        let b = fs::read(dir2.path().join("view_0_0.png")).unwrap();
        assert_eq!(a, b);
    }
}
