//! Functional model of the 512Kb SRAM CIM macro: ternary weights stored on
//! differential cell pairs, a 32-bit input shift buffer, and per-column
//! sense amplifiers that fuse thresholding with ReLU.

mod image;
mod macro_model;
mod ternary;

pub use image::{load_image, save_image, ImageError, IMAGE_HEADER_LEN, IMAGE_MAGIC};
pub use macro_model::{CimMacro, InputShiftBuffer, SaConfig, TernaryWeightArray};
pub use ternary::{
    code_to_trit, pack_trits, symmetric_map, symmetric_unmap, trit_to_code, unpack_trits,
    PackError,
};

use thiserror::Error;

/// Macro geometry. X-mode favors wide inputs, Y-mode wide outputs; both hold
/// 512Kb of cells and two bitlines back each sense amplifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MacroMode {
    X,
    Y,
}

impl MacroMode {
    /// Wordline count (input rows).
    pub fn n_wl(self) -> usize {
        match self {
            MacroMode::X => 1024,
            MacroMode::Y => 512,
        }
    }

    /// Bitline count (2 per stored ternary weight).
    pub fn n_bl(self) -> usize {
        match self {
            MacroMode::X => 512,
            MacroMode::Y => 1024,
        }
    }

    /// Sense amplifier count (output columns).
    pub fn n_sa(self) -> usize {
        match self {
            MacroMode::X => 256,
            MacroMode::Y => 512,
        }
    }

    /// Peak operation count of one conv cycle; each MAC counts as 2 ops.
    pub fn peak_ops_per_cycle(self) -> u64 {
        2 * self.n_wl() as u64 * self.n_sa() as u64
    }

    /// 32-weight segments addressable by cim.read/cim.write.
    pub fn segment_count(self) -> usize {
        self.n_wl() / 32 * self.n_sa()
    }

    /// Output words produced by one conv (n_sa bits packed into u32s).
    pub fn output_words(self) -> usize {
        self.n_sa() / 32
    }

    pub fn tag(self) -> u8 {
        match self {
            MacroMode::X => 0,
            MacroMode::Y => 1,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            0 => Some(MacroMode::X),
            1 => Some(MacroMode::Y),
            _ => None,
        }
    }
}

/// Peak throughput in TOPS at the given clock.
pub fn peak_tops(mode: MacroMode, clock_mhz: u32) -> f64 {
    mode.peak_ops_per_cycle() as f64 * clock_mhz as f64 * 1e6 / 1e12
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CimError {
    #[error("weight access out of range: rows {row_base}..{row_end} of {n_wl}")]
    RowRange { row_base: usize, row_end: usize, n_wl: usize },
    #[error("column {column} out of range ({n_sa} columns)")]
    Column { column: usize, n_sa: usize },
    #[error("value {value} at index {index} is not ternary")]
    NotTernary { value: i8, index: usize },
    #[error("segment {segment} out of range ({count} segments)")]
    Segment { segment: usize, count: usize },
    #[error("buffer length {got} does not match wordline count {want}")]
    BufferLength { got: usize, want: usize },
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometry_matches_both_modes() {
        assert_eq!((MacroMode::X.n_wl(), MacroMode::X.n_bl(), MacroMode::X.n_sa()), (1024, 512, 256));
        assert_eq!((MacroMode::Y.n_wl(), MacroMode::Y.n_bl(), MacroMode::Y.n_sa()), (512, 1024, 512));
        // 512Kb of cells in both modes.
        assert_eq!(MacroMode::X.n_wl() * MacroMode::X.n_bl(), 524288);
        assert_eq!(MacroMode::Y.n_wl() * MacroMode::Y.n_bl(), 524288);
        // 2 bitlines per SA.
        assert_eq!(MacroMode::X.n_bl(), 2 * MacroMode::X.n_sa());
        assert_eq!(MacroMode::Y.n_bl(), 2 * MacroMode::Y.n_sa());
    }

    #[test]
    fn peak_ops_equal_across_modes() {
        assert_eq!(MacroMode::X.peak_ops_per_cycle(), 524288);
        assert_eq!(MacroMode::Y.peak_ops_per_cycle(), 524288);
    }

    #[test]
    fn peak_tops_at_50mhz_prints_26_21() {
        let tops = peak_tops(MacroMode::X, 50);
        assert!((tops - 26.2144).abs() < 1e-9);
        assert_eq!(format!("{tops:.2}"), "26.21");
    }

    #[test]
    fn x_mode_has_8192_segments() {
        assert_eq!(MacroMode::X.segment_count(), 8192);
        assert_eq!(MacroMode::Y.segment_count(), 8192);
    }
}
