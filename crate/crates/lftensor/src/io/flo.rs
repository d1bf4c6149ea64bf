use std::fs;
use std::io::{BufReader, Read};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt};

use crate::error::{Error, Result};
use crate::lightfield::FlowField;

const FLO_MAGIC: f32 = 202021.25;

/// Load a Middlebury .flo file: float magic 202021.25, i32 width, i32
/// height, then interleaved (fx, fy) float32 pairs row-major top-to-bottom.
pub fn load_flow_flo(path: &Path) -> Result<FlowField> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = BufReader::new(file);

    let magic = r
        .read_f32::<LittleEndian>()
        .map_err(|e| Error::io(path, e))?;
    if magic != FLO_MAGIC {
        return Err(Error::BadMagic {
            expected: FLO_MAGIC.to_string(),
            found: magic.to_string(),
        });
    }
    let w = r
        .read_i32::<LittleEndian>()
        .map_err(|e| Error::io(path, e))?;
    let h = r
        .read_i32::<LittleEndian>()
        .map_err(|e| Error::io(path, e))?;
    if w <= 0 || h <= 0 {
        return Err(Error::CorruptDescriptor(format!(
            "flo dims {w}x{h} must be positive"
        )));
    }
    let (w, h) = (w as usize, h as usize);

    let expected = w * h * 2 * 4;
    let mut payload = Vec::with_capacity(expected);
    r.read_to_end(&mut payload).map_err(|e| Error::io(path, e))?;
    if payload.len() < expected {
        return Err(Error::TruncatedPayload {
            expected,
            got: payload.len(),
        });
    }
    let mut data = Vec::with_capacity(w * h * 2);
    let mut cursor = &payload[..expected];
    for _ in 0..w * h {
        let fx = cursor
            .read_f32::<LittleEndian>()
            .map_err(|e| Error::io(path, e))?;
        let fy = cursor
            .read_f32::<LittleEndian>()
            .map_err(|e| Error::io(path, e))?;
        data.push(fx as f64);
        data.push(fy as f64);
    }
    FlowField::from_vec(h, w, data)
}
