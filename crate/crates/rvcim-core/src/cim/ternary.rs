//! Ternary weight encodings: the differential cell pair and the packed
//! 2-bit code used in weight SRAM (00=0, 01=+1, 10=-1, 11 invalid).

use thiserror::Error;

/// Map a ternary weight onto its differential cell pair `(c_plus, c_minus)`.
pub fn symmetric_map(w: i8) -> (u8, u8) {
    match w {
        1 => (1, 0),
        -1 => (0, 1),
        0 => (0, 0),
        _ => panic!("non-ternary weight {w}"),
    }
}

/// Recover a ternary weight from a cell pair; `(1, 1)` has no meaning.
pub fn symmetric_unmap(c_plus: u8, c_minus: u8) -> Option<i8> {
    match (c_plus, c_minus) {
        (1, 0) => Some(1),
        (0, 1) => Some(-1),
        (0, 0) => Some(0),
        _ => None,
    }
}

/// 2-bit code for one weight. The low bit is the plus cell, the high bit the
/// minus cell, so the packed form is literally the cell image.
pub fn trit_to_code(w: i8) -> u8 {
    let (p, m) = symmetric_map(w);
    p | m << 1
}

pub fn code_to_trit(code: u8) -> Option<i8> {
    match code & 0b11 {
        0b00 => Some(0),
        0b01 => Some(1),
        0b10 => Some(-1),
        _ => None,
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("invalid packed ternary code 0b11 for weight {index}")]
pub struct PackError {
    pub index: usize,
}

/// Pack 32 ternary weights into two 32-bit words, 2 bits per weight,
/// weight i at bits [2i+1:2i] of the 64-bit little-endian pair.
pub fn pack_trits(weights: &[i8; 32]) -> [u32; 2] {
    let mut v = 0u64;
    for (i, &w) in weights.iter().enumerate() {
        v |= (trit_to_code(w) as u64) << (2 * i);
    }
    [v as u32, (v >> 32) as u32]
}

/// Inverse of [`pack_trits`]; fails on the reserved code 0b11.
pub fn unpack_trits(words: [u32; 2]) -> Result<[i8; 32], PackError> {
    let v = words[0] as u64 | (words[1] as u64) << 32;
    let mut out = [0i8; 32];
    for (i, slot) in out.iter_mut().enumerate() {
        let code = ((v >> (2 * i)) & 0b11) as u8;
        *slot = code_to_trit(code).ok_or(PackError { index: i })?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_map_definition() {
        assert_eq!(symmetric_map(1), (1, 0));
        assert_eq!(symmetric_map(-1), (0, 1));
        assert_eq!(symmetric_map(0), (0, 0));
    }

    #[test]
    fn unmap_inverts_map_exhaustively() {
        for w in [-1i8, 0, 1] {
            let (p, m) = symmetric_map(w);
            assert_eq!(symmetric_unmap(p, m), Some(w));
        }
        assert_eq!(symmetric_unmap(1, 1), None);
    }

    #[test]
    fn pack_roundtrip_and_invalid_code() {
        let mut w = [0i8; 32];
        for (i, slot) in w.iter_mut().enumerate() {
            *slot = [(-1i8), 0, 1][i % 3];
        }
        let packed = pack_trits(&w);
        assert_eq!(unpack_trits(packed).unwrap(), w);

        // Force code 0b11 at weight 5.
        let bad = [packed[0] | 0b11 << 10, packed[1]];
        assert_eq!(unpack_trits(bad), Err(PackError { index: 5 }));
    }
}
