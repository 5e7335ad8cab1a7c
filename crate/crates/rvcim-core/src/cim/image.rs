//! Weight image files: a 16-byte header (magic, version, mode tag, dims)
//! followed by n_wl x n_sa ternary weights as signed bytes, row-major.

use std::io::{Read, Write};

use thiserror::Error;

use super::{MacroMode, TernaryWeightArray};

pub const IMAGE_MAGIC: [u8; 4] = *b"CIMW";
pub const IMAGE_HEADER_LEN: usize = 16;
const IMAGE_VERSION: u8 = 1;

#[derive(Debug, Error)]
pub enum ImageError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad magic {0:02x?}")]
    BadMagic([u8; 4]),
    #[error("unsupported version {0}")]
    Version(u8),
    #[error("unknown mode tag {0}")]
    Mode(u8),
    #[error("dims {n_wl}x{n_sa} do not match mode geometry")]
    Dims { n_wl: u32, n_sa: u32 },
    #[error("non-ternary byte {value} at row {row}, column {column}")]
    NotTernary { value: i8, row: usize, column: usize },
}

pub fn save_image(arr: &TernaryWeightArray, mut w: impl Write) -> Result<(), ImageError> {
    let mode = arr.mode();
    let mut header = [0u8; IMAGE_HEADER_LEN];
    header[..4].copy_from_slice(&IMAGE_MAGIC);
    header[4] = IMAGE_VERSION;
    header[5] = mode.tag();
    header[8..12].copy_from_slice(&(mode.n_wl() as u32).to_le_bytes());
    header[12..16].copy_from_slice(&(mode.n_sa() as u32).to_le_bytes());
    w.write_all(&header)?;
    let mut body = Vec::with_capacity(mode.n_wl() * mode.n_sa());
    for row in 0..mode.n_wl() {
        for col in 0..mode.n_sa() {
            body.push(arr.get(row, col) as u8);
        }
    }
    w.write_all(&body)?;
    Ok(())
}

pub fn load_image(mut r: impl Read) -> Result<TernaryWeightArray, ImageError> {
    let mut header = [0u8; IMAGE_HEADER_LEN];
    r.read_exact(&mut header)?;
    let mut magic = [0u8; 4];
    magic.copy_from_slice(&header[..4]);
    if magic != IMAGE_MAGIC {
        return Err(ImageError::BadMagic(magic));
    }
    if header[4] != IMAGE_VERSION {
        return Err(ImageError::Version(header[4]));
    }
    let mode = MacroMode::from_tag(header[5]).ok_or(ImageError::Mode(header[5]))?;
    let n_wl = u32::from_le_bytes(header[8..12].try_into().unwrap());
    let n_sa = u32::from_le_bytes(header[12..16].try_into().unwrap());
    if n_wl as usize != mode.n_wl() || n_sa as usize != mode.n_sa() {
        return Err(ImageError::Dims { n_wl, n_sa });
    }
    let mut body = vec![0u8; mode.n_wl() * mode.n_sa()];
    r.read_exact(&mut body)?;
    let mut arr = TernaryWeightArray::new(mode);
    let mut row_buf = vec![0i8; 1];
    for row in 0..mode.n_wl() {
        for col in 0..mode.n_sa() {
            let v = body[row * mode.n_sa() + col] as i8;
            if !(-1..=1).contains(&v) {
                return Err(ImageError::NotTernary { value: v, row, column: col });
            }
            if v != 0 {
                row_buf[0] = v;
                arr.write_weights(row, col, &row_buf).expect("in range by construction");
            }
        }
    }
    Ok(arr)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn image_roundtrip() {
        let mut arr = TernaryWeightArray::new(MacroMode::X);
        arr.write_weights(100, 42, &[1, -1, 0, 1, -1]).unwrap();
        arr.write_weights(1000, 255, &[-1; 24]).unwrap();
        let mut buf = Vec::new();
        save_image(&arr, &mut buf).unwrap();
        assert_eq!(buf.len(), IMAGE_HEADER_LEN + 1024 * 256);
        let back = load_image(buf.as_slice()).unwrap();
        assert_eq!(back, arr);
    }

    #[test]
    fn rejects_bad_magic() {
        let buf = vec![0u8; IMAGE_HEADER_LEN];
        assert!(matches!(load_image(buf.as_slice()), Err(ImageError::BadMagic(_))));
    }
}
