//! Weight array, input shift buffer, and the MAC + sense path.

use super::ternary::{pack_trits, symmetric_map, unpack_trits, PackError};
use super::{CimError, MacroMode};

/// Ternary weights stored column-major as two bitplanes (plus/minus cells),
/// one u64-bitset pair per sense-amplifier column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TernaryWeightArray {
    mode: MacroMode,
    /// words_per_col u64s per column, bit i of column j = cell (i, j).
    plus: Vec<u64>,
    minus: Vec<u64>,
    words_per_col: usize,
}

impl TernaryWeightArray {
    /// Fresh macro: all cells (0, 0), i.e. every weight zero.
    pub fn new(mode: MacroMode) -> Self {
        let words_per_col = mode.n_wl() / 64;
        let len = words_per_col * mode.n_sa();
        TernaryWeightArray { mode, plus: vec![0; len], minus: vec![0; len], words_per_col }
    }

    pub fn mode(&self) -> MacroMode {
        self.mode
    }

    fn check_range(&self, row_base: usize, len: usize, column: usize) -> Result<(), CimError> {
        let n_wl = self.mode.n_wl();
        if row_base + len > n_wl {
            return Err(CimError::RowRange { row_base, row_end: row_base + len, n_wl });
        }
        if column >= self.mode.n_sa() {
            return Err(CimError::Column { column, n_sa: self.mode.n_sa() });
        }
        Ok(())
    }

    #[inline]
    fn col_words(&self, column: usize) -> std::ops::Range<usize> {
        let start = column * self.words_per_col;
        start..start + self.words_per_col
    }

    /// Read one weight; caller guarantees range.
    pub fn get(&self, row: usize, column: usize) -> i8 {
        let idx = column * self.words_per_col + row / 64;
        let bit = row % 64;
        let p = (self.plus[idx] >> bit) & 1;
        let m = (self.minus[idx] >> bit) & 1;
        p as i8 - m as i8
    }

    fn set(&mut self, row: usize, column: usize, w: i8) {
        let idx = column * self.words_per_col + row / 64;
        let bit = row % 64;
        let (p, m) = symmetric_map(w);
        self.plus[idx] = self.plus[idx] & !(1 << bit) | (p as u64) << bit;
        self.minus[idx] = self.minus[idx] & !(1 << bit) | (m as u64) << bit;
    }

    /// Replace `values.len()` weights of one column starting at `row_base`.
    pub fn write_weights(
        &mut self,
        row_base: usize,
        column: usize,
        values: &[i8],
    ) -> Result<(), CimError> {
        self.check_range(row_base, values.len(), column)?;
        for (i, &v) in values.iter().enumerate() {
            if !(-1..=1).contains(&v) {
                return Err(CimError::NotTernary { value: v, index: i });
            }
        }
        for (i, &v) in values.iter().enumerate() {
            self.set(row_base + i, column, v);
        }
        Ok(())
    }

    /// Non-destructive read of `count` weights of one column.
    pub fn read_weights(
        &self,
        row_base: usize,
        column: usize,
        count: usize,
    ) -> Result<Vec<i8>, CimError> {
        self.check_range(row_base, count, column)?;
        Ok((0..count).map(|i| self.get(row_base + i, column)).collect())
    }

    /// cim.read/cim.write segment coordinates: 32-row blocks, column-major.
    pub fn segment_coords(&self, segment: usize) -> Result<(usize, usize), CimError> {
        let count = self.mode.segment_count();
        if segment >= count {
            return Err(CimError::Segment { segment, count });
        }
        let blocks_per_col = self.mode.n_wl() / 32;
        Ok((segment / blocks_per_col, segment % blocks_per_col * 32))
    }

    /// Read one 32-weight segment in the packed 2-bit wire format.
    pub fn read_segment(&self, segment: usize) -> Result<[u32; 2], CimError> {
        let (column, row_base) = self.segment_coords(segment)?;
        let mut w = [0i8; 32];
        for (i, slot) in w.iter_mut().enumerate() {
            *slot = self.get(row_base + i, column);
        }
        Ok(pack_trits(&w))
    }

    /// Write one 32-weight segment from the packed 2-bit wire format.
    pub fn write_segment(&mut self, segment: usize, words: [u32; 2]) -> Result<(), CimError> {
        let (column, row_base) = self.segment_coords(segment)?;
        let w = unpack_trits(words).map_err(|PackError { index }| CimError::NotTernary {
            value: 0,
            index,
        })?;
        for (i, &v) in w.iter().enumerate() {
            self.set(row_base + i, column, v);
        }
        Ok(())
    }

    /// Pre-threshold MAC sum for one column over the buffer.
    pub fn mac_sum(&self, buffer: &InputShiftBuffer, column: usize) -> i32 {
        let words = buffer.words();
        let range = self.col_words(column);
        let mut pos = 0u32;
        let mut neg = 0u32;
        for (i, w) in range.enumerate() {
            pos += (words[i] & self.plus[w]).count_ones();
            neg += (words[i] & self.minus[w]).count_ones();
        }
        pos as i32 - neg as i32
    }

    /// Full MAC + sense pass: for each column, 1 iff the exact integer sum
    /// exceeds the column threshold (ReLU fused with 1-bit quantization; a
    /// sum equal to the threshold senses 0). Output bits are packed
    /// little-endian into `n_sa / 32` words.
    pub fn mac_and_sense(
        &self,
        buffer: &InputShiftBuffer,
        sa: &SaConfig,
    ) -> Result<Vec<u32>, CimError> {
        if buffer.len() != self.mode.n_wl() {
            return Err(CimError::BufferLength { got: buffer.len(), want: self.mode.n_wl() });
        }
        let n_sa = self.mode.n_sa();
        let mut out = vec![0u32; self.mode.output_words()];
        for col in 0..n_sa {
            let s = self.mac_sum(buffer, col);
            if s > sa.thresholds[col] {
                out[col / 32] |= 1 << (col % 32);
            }
        }
        Ok(out)
    }

    /// State fingerprint used by tests to prove reads are non-destructive.
    pub fn fingerprint(&self) -> u64 {
        let mut h = 0xcbf29ce484222325u64;
        for w in self.plus.iter().chain(self.minus.iter()) {
            h = (h ^ w).wrapping_mul(0x100000001b3);
        }
        h
    }
}

/// Activation bits, one per wordline. A shift discards the oldest 32 bits
/// (indices 0..32) and appends 32 new bits at the top, preserving order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InputShiftBuffer {
    words: Vec<u64>,
    n_bits: usize,
}

impl InputShiftBuffer {
    pub fn new(mode: MacroMode) -> Self {
        InputShiftBuffer { words: vec![0; mode.n_wl() / 64], n_bits: mode.n_wl() }
    }

    pub fn len(&self) -> usize {
        self.n_bits
    }

    pub fn is_empty(&self) -> bool {
        self.n_bits == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn bit(&self, i: usize) -> bool {
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    /// Shift the buffer down by 32 bits; `value` bit k lands at index
    /// `n_bits - 32 + k`.
    pub fn shift_in_32(&mut self, value: u32) {
        let n = self.words.len();
        for i in 0..n - 1 {
            self.words[i] = self.words[i] >> 32 | self.words[i + 1] << 32;
        }
        self.words[n - 1] = self.words[n - 1] >> 32 | (value as u64) << 32;
    }

    /// Build a buffer from explicit bits (tests and oracles).
    pub fn from_bits(mode: MacroMode, bits: &[bool]) -> Result<Self, CimError> {
        if bits.len() != mode.n_wl() {
            return Err(CimError::BufferLength { got: bits.len(), want: mode.n_wl() });
        }
        let mut b = InputShiftBuffer::new(mode);
        for (i, &v) in bits.iter().enumerate() {
            if v {
                b.words[i / 64] |= 1 << (i % 64);
            }
        }
        Ok(b)
    }
}

/// Per-column SA decision thresholds; all zero by default, configurable to
/// absorb folded batch-norm biases.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SaConfig {
    pub thresholds: Vec<i32>,
}

impl SaConfig {
    pub fn zeros(mode: MacroMode) -> Self {
        SaConfig { thresholds: vec![0; mode.n_sa()] }
    }
}

/// One macro instance: weights, input buffer, and SA thresholds. Owned by
/// exactly one simulation unit; all operations take exclusive access.
#[derive(Debug, Clone)]
pub struct CimMacro {
    pub weights: TernaryWeightArray,
    pub buffer: InputShiftBuffer,
    pub sa: SaConfig,
}

impl CimMacro {
    pub fn new(mode: MacroMode) -> Self {
        CimMacro {
            weights: TernaryWeightArray::new(mode),
            buffer: InputShiftBuffer::new(mode),
            sa: SaConfig::zeros(mode),
        }
    }

    pub fn mode(&self) -> MacroMode {
        self.weights.mode()
    }

    /// One conv step: shift in 32 activation bits, MAC, sense.
    pub fn conv_step(&mut self, value: u32) -> Vec<u32> {
        self.buffer.shift_in_32(value);
        self.weights
            .mac_and_sense(&self.buffer, &self.sa)
            .expect("buffer length matches mode by construction")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn write_then_read_roundtrip() {
        let mut arr = TernaryWeightArray::new(MacroMode::X);
        let vals = vec![1i8; 32];
        arr.write_weights(0, 0, &vals).unwrap();
        assert_eq!(arr.read_weights(0, 0, 32).unwrap(), vals);
    }

    #[test]
    fn empty_write_is_identity() {
        let mut arr = TernaryWeightArray::new(MacroMode::X);
        let before = arr.fingerprint();
        arr.write_weights(5, 3, &[]).unwrap();
        assert_eq!(arr.fingerprint(), before);
    }

    #[test]
    fn write_bounds() {
        let mut arr = TernaryWeightArray::new(MacroMode::X);
        assert!(arr.write_weights(1000, 0, &[1i8; 24]).is_ok());
        let err = arr.write_weights(1000, 0, &vec![1i8; 64]).unwrap_err();
        assert_eq!(err, CimError::RowRange { row_base: 1000, row_end: 1064, n_wl: 1024 });
    }

    #[test]
    fn fresh_macro_reads_zero() {
        let arr = TernaryWeightArray::new(MacroMode::Y);
        assert!(arr.read_weights(0, 511, 512).unwrap().iter().all(|&w| w == 0));
    }

    #[test]
    fn all_zero_buffer_senses_zero() {
        let mut m = CimMacro::new(MacroMode::X);
        m.weights.write_weights(0, 0, &[1i8; 32]).unwrap();
        let out = m.weights.mac_and_sense(&m.buffer, &m.sa).unwrap();
        assert!(out.iter().all(|&w| w == 0));
    }

    #[test]
    fn single_positive_term_senses_one() {
        let mut m = CimMacro::new(MacroMode::X);
        m.weights.write_weights(0, 7, &[1]).unwrap();
        let mut bits = vec![false; 1024];
        bits[0] = true;
        let buf = InputShiftBuffer::from_bits(MacroMode::X, &bits).unwrap();
        let out = m.weights.mac_and_sense(&buf, &m.sa).unwrap();
        assert_eq!(out[0], 1 << 7);
        assert_eq!(&out[1..], &[0; 7]);
    }

    #[test]
    fn tie_with_threshold_senses_zero() {
        let mut m = CimMacro::new(MacroMode::X);
        m.weights.write_weights(0, 0, &[1]).unwrap();
        m.sa.thresholds[0] = 1;
        let mut bits = vec![false; 1024];
        bits[0] = true;
        let buf = InputShiftBuffer::from_bits(MacroMode::X, &bits).unwrap();
        let out = m.weights.mac_and_sense(&buf, &m.sa).unwrap();
        assert_eq!(out[0], 0);
    }

    #[test]
    fn shift_preserves_order() {
        let mut b = InputShiftBuffer::new(MacroMode::X);
        b.shift_in_32(0xffff_ffff);
        // New bits at the top 32 indices.
        assert!(b.bit(1023) && b.bit(992));
        assert!(!b.bit(991));
        for _ in 0..31 {
            b.shift_in_32(0);
        }
        // After 31 more shifts they sit at the bottom.
        assert!(b.bit(0) && b.bit(31));
        assert!(!b.bit(32));
        b.shift_in_32(0);
        assert!(!b.bit(0));
    }

    #[test]
    fn segment_roundtrip() {
        let mut arr = TernaryWeightArray::new(MacroMode::X);
        let mut w = [0i8; 32];
        for (i, slot) in w.iter_mut().enumerate() {
            *slot = [1i8, -1, 0][i % 3];
        }
        arr.write_segment(8191, pack_trits(&w)).unwrap();
        assert_eq!(arr.read_segment(8191).unwrap(), pack_trits(&w));
        // Segment 8191 in X-mode = column 255, rows 992..1024.
        assert_eq!(arr.segment_coords(8191).unwrap(), (255, 992));
        assert_eq!(arr.segment_coords(8192), Err(CimError::Segment { segment: 8192, count: 8192 }));
    }
}
