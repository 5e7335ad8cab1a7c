//! Memory system: instruction memory, the two dual-ported SRAM banks, a
//! latency-modeled DRAM, and the uDMA engine for bulk transfers.

mod dma;
mod sram;

pub use dma::{DmaDir, DmaEngine, DmaRequest, DmaState, SramBankId};
pub use sram::SramBank;

use thiserror::Error;

/// Core-visible address map. SRAM banks are word-addressed internally; the
/// core's load/store port uses these byte bases.
pub mod map {
    pub const IMEM_BASE: u32 = 0x0000_0000;
    pub const FM_BASE: u32 = 0x1000_0000;
    pub const WEIGHT_BASE: u32 = 0x2000_0000;
    pub const DRAM_BASE: u32 = 0x4000_0000;
    pub const MMIO_BASE: u32 = 0xf000_0000;

    // DMA register offsets from MMIO_BASE.
    pub const DMA_SRC: u32 = 0x00;
    pub const DMA_DST_BANK: u32 = 0x04;
    pub const DMA_DST: u32 = 0x08;
    pub const DMA_LEN: u32 = 0x0c;
    pub const DMA_CTRL: u32 = 0x10;
    pub const DMA_STATUS: u32 = 0x14;

    pub const DMA_CTRL_START: u32 = 1 << 0;
    /// Direction bit in DMA_CTRL: 0 = DRAM to SRAM, 1 = SRAM to DRAM.
    pub const DMA_CTRL_TO_DRAM: u32 = 1 << 1;
}

/// Feature-map SRAM: 256 Kbit.
pub const FM_SRAM_WORDS: usize = 256 * 1024 / 32;
/// Weight SRAM: 512 Kbit.
pub const WEIGHT_SRAM_WORDS: usize = 512 * 1024 / 32;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MemError {
    #[error("{bank} word address {addr} out of bounds ({words} words)")]
    Bounds { bank: &'static str, addr: u32, words: usize },
    #[error("dma start while a transfer is in flight")]
    DmaBusy,
}
