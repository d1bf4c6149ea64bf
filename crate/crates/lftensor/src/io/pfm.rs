use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use crate::error::{Error, Result};
use crate::lightfield::DisparityMap;

/// Write a disparity map as a grayscale PFM: magic "Pf", dims line, scale
/// line "-1.0" (little-endian), float32 rows bottom-to-top.
pub fn save_disparity_pfm(d: &DisparityMap, path: &Path) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    write!(w, "Pf\n{} {}\n-1.0\n", d.width(), d.height()).map_err(|e| Error::io(path, e))?;
    for y in (0..d.height()).rev() {
        for x in 0..d.width() {
            w.write_f32::<LittleEndian>(d.get(y, x) as f32)
                .map_err(|e| Error::io(path, e))?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn read_header_line<R: BufRead>(r: &mut R, path: &Path) -> Result<String> {
    let mut line = String::new();
    r.read_line(&mut line).map_err(|e| Error::io(path, e))?;
    Ok(line.trim_end_matches(['\n', '\r']).to_string())
}

/// Load a grayscale PFM. Only the little-endian flavor (negative scale) is
/// accepted; a "PF" (color) magic is `BadMagic`.
pub fn load_disparity_pfm(path: &Path) -> Result<DisparityMap> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = BufReader::new(file);

    let magic = read_header_line(&mut r, path)?;
    if magic != "Pf" {
        return Err(Error::BadMagic {
            expected: "Pf".into(),
            found: magic,
        });
    }
    let dims = read_header_line(&mut r, path)?;
    let mut it = dims.split_whitespace();
    let (w, h) = match (it.next(), it.next()) {
        (Some(w), Some(h)) => (
            w.parse::<usize>()
                .map_err(|_| Error::CorruptDescriptor(format!("pfm dims line {dims:?}")))?,
            h.parse::<usize>()
                .map_err(|_| Error::CorruptDescriptor(format!("pfm dims line {dims:?}")))?,
        ),
        _ => return Err(Error::CorruptDescriptor(format!("pfm dims line {dims:?}"))),
    };
    if w == 0 || h == 0 {
        return Err(Error::CorruptDescriptor("pfm dims must be >= 1".into()));
    }
    let scale_line = read_header_line(&mut r, path)?;
    let scale: f64 = scale_line
        .trim()
        .parse()
        .map_err(|_| Error::BadScale(scale_line.clone()))?;
    if scale >= 0.0 {
        return Err(Error::BadScale(format!(
            "{scale_line}: only little-endian (negative scale) PFM is supported"
        )));
    }

    let expected = w * h * 4;
    let mut payload = Vec::with_capacity(expected);
    r.read_to_end(&mut payload).map_err(|e| Error::io(path, e))?;
    if payload.len() < expected {
        return Err(Error::TruncatedPayload {
            expected,
            got: payload.len(),
        });
    }
    let mut cursor = &payload[..expected];
    let mut data = vec![0.0f64; w * h];
    for y in (0..h).rev() {
        for x in 0..w {
            let v = cursor
                .read_f32::<LittleEndian>()
                .map_err(|e| Error::io(path, e))?;
            data[y * w + x] = v as f64;
        }
    }
    DisparityMap::from_vec(h, w, data)
}
