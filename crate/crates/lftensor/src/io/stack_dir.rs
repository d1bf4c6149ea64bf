use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::Image;
use crate::io::png::{load_image_png, save_image_png};
use crate::tensor_display::{DisparityPlanes, LayerStack};

#[derive(Debug, Serialize, Deserialize)]
struct StackDescriptor {
    n_layers: usize,
    rank: usize,
    height: usize,
    width: usize,
    planes: Vec<f64>,
}

fn layer_file_name(l: usize, m: usize) -> String {
    format!("layer_{l}_rank_{m}.png")
}

/// Persist a layer stack as `layer_{l}_rank_{m}.png` images (8-bit) plus a
/// `stack.json` descriptor that carries the plane centers at full precision.
pub fn save_layer_stack(stack: &LayerStack, planes: &DisparityPlanes, dir: &Path) -> Result<()> {
    if planes.len() != stack.n_layers() {
        return Err(Error::DimensionMismatch(format!(
            "{} planes for {} layers",
            planes.len(),
            stack.n_layers()
        )));
    }
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let meta = StackDescriptor {
        n_layers: stack.n_layers(),
        rank: stack.rank(),
        height: stack.height(),
        width: stack.width(),
        planes: planes.centers().to_vec(),
    };
    let meta_path = dir.join("stack.json");
    let body = serde_json::to_string_pretty(&meta)
        .map_err(|e| Error::io(&meta_path, std::io::Error::other(e)))?;
    fs::write(&meta_path, body).map_err(|e| Error::io(&meta_path, e))?;
    for l in 0..stack.n_layers() {
        for m in 0..stack.rank() {
            let mut img = Image::zeros(stack.height(), stack.width(), 3);
            for y in 0..stack.height() {
                for x in 0..stack.width() {
                    for c in 0..3 {
                        img.set(y, x, c, stack.get(l, m, y, x, c));
                    }
                }
            }
            save_image_png(&img, &dir.join(layer_file_name(l, m)))?;
        }
    }
    Ok(())
}

/// Load a stack saved by [`save_layer_stack`].
pub fn load_layer_stack(dir: &Path) -> Result<(LayerStack, DisparityPlanes)> {
    let meta_path = dir.join("stack.json");
    let body = fs::read_to_string(&meta_path)
        .map_err(|e| Error::CorruptDescriptor(format!("{}: {e}", meta_path.display())))?;
    let meta: StackDescriptor = serde_json::from_str(&body)
        .map_err(|e| Error::CorruptDescriptor(format!("{}: {e}", meta_path.display())))?;
    let planes = DisparityPlanes::new(meta.planes)?;
    if planes.len() != meta.n_layers {
        return Err(Error::CorruptDescriptor(format!(
            "{} planes for {} layers",
            planes.len(),
            meta.n_layers
        )));
    }
    let mut stack = LayerStack::from_vec(
        meta.n_layers,
        meta.rank,
        meta.height,
        meta.width,
        vec![0.0; meta.n_layers * meta.rank * meta.height * meta.width * 3],
    )?;
    for l in 0..meta.n_layers {
        for m in 0..meta.rank {
            let path = dir.join(layer_file_name(l, m));
            if !path.exists() {
                return Err(Error::MissingView(path));
            }
            let img = load_image_png(&path)?;
            if img.height() != meta.height || img.width() != meta.width {
                return Err(Error::DimensionMismatch(format!(
                    "{}: layer image does not match descriptor dims",
                    path.display()
                )));
            }
            for y in 0..meta.height {
                for x in 0..meta.width {
                    for c in 0..3 {
                        stack.set(l, m, y, x, c, img.get(y, x, c));
                    }
                }
            }
        }
    }
    Ok((stack, planes))
}
