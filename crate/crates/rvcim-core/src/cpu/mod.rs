//! Two-stage in-order core model: machine state, trap causes, the
//! per-instruction latency table, and the dual-issue pairing rule used by
//! the conv/pool pipeline.

use crate::config::CoreConfig;
use crate::isa::{disassemble, BaseOp, Format, Instruction};

/// Architectural state. x0 is hardwired to zero; the cycle counter is
/// advanced by each instruction's latency.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MachineState {
    pub pc: u32,
    pub regs: [u32; 32],
    pub cycle: u64,
    pub halted: bool,
}

impl Default for MachineState {
    fn default() -> Self {
        Self::new()
    }
}

impl MachineState {
    pub fn new() -> Self {
        MachineState { pc: 0, regs: [0; 32], cycle: 0, halted: false }
    }

    #[inline]
    pub fn reg(&self, r: u8) -> u32 {
        self.regs[r as usize]
    }

    #[inline]
    pub fn set_reg(&mut self, r: u8, v: u32) {
        if r != 0 {
            self.regs[r as usize] = v;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TrapCause {
    #[error("illegal instruction 0x{word:08x} at pc 0x{pc:08x}")]
    IllegalInstruction { pc: u32, word: u32 },
    #[error("misaligned access at 0x{addr:08x} (width {width})")]
    Misaligned { addr: u32, width: u32 },
    #[error("out-of-bounds access at 0x{addr:08x}")]
    OutOfBounds { addr: u32 },
    #[error("misaligned jump target 0x{target:08x}")]
    MisalignedJump { target: u32 },
    #[error("fetch out of bounds at pc 0x{pc:08x}")]
    FetchOutOfBounds { pc: u32 },
    #[error("cim access out of range: {detail}")]
    CimRange { detail: String },
    #[error("non-ternary packed weight in word at {bank} address {addr}")]
    NonTernaryWeight { bank: &'static str, addr: u32 },
    #[error("dma start while busy")]
    DmaBusy,
    #[error("environment call at pc 0x{pc:08x}")]
    EnvironmentCall { pc: u32 },
    #[error("breakpoint at pc 0x{pc:08x}")]
    Breakpoint { pc: u32 },
}

/// Memory region classes the core can touch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    Imem,
    Fm,
    Weight,
    Dram,
    Mmio,
}

/// True when an instruction may occupy the second issue slot of a
/// cim.conv pair: base ALU ops and single-cycle SRAM memory ops. Control
/// transfers, system ops, and fences never pair; loads/stores pair only if
/// their resolved address is on-chip SRAM (the core checks that at issue).
pub fn pairable_shape(inst: &Instruction) -> bool {
    match inst {
        Instruction::Base { op, .. } => {
            !inst.is_control_flow()
                && !matches!(op, BaseOp::Fence | BaseOp::Ecall | BaseOp::Ebreak)
        }
        Instruction::Cim { .. } => false,
    }
}

pub fn is_mem_op(inst: &Instruction) -> bool {
    matches!(
        inst,
        Instruction::Base {
            op: BaseOp::Lb
                | BaseOp::Lh
                | BaseOp::Lw
                | BaseOp::Lbu
                | BaseOp::Lhu
                | BaseOp::Sb
                | BaseOp::Sh
                | BaseOp::Sw,
            ..
        }
    )
}

/// Latency of a non-memory, non-branch-dependent instruction. Memory costs
/// and taken-branch bubbles are added where the outcome is known.
pub fn base_cost(inst: &Instruction, core: &CoreConfig) -> u64 {
    match inst {
        Instruction::Cim { .. } => 1,
        Instruction::Base { op, .. } => match op {
            // Unconditional jumps always refill the pipeline.
            BaseOp::Jal | BaseOp::Jalr => 1 + core.taken_branch_extra,
            _ => 1,
        },
    }
}

/// One retired instruction in the execution trace.
#[derive(Debug, Clone)]
pub struct TraceEntry {
    pub cycle: u64,
    pub pc: u32,
    pub inst: Instruction,
    pub reg_write: Option<(u8, u32)>,
    /// Byte address and word value of a store, when one happened.
    pub mem_write: Option<(u32, u32)>,
}

impl TraceEntry {
    /// Stable rendering: `cycle pc disassembly [effects]`.
    pub fn render(&self) -> String {
        let mut s = format!("{:>10} {:08x}  {}", self.cycle, self.pc, disassemble(&self.inst));
        if let Some((r, v)) = self.reg_write {
            s.push_str(&format!(" ; x{r}=0x{v:08x}"));
        }
        if let Some((a, v)) = self.mem_write {
            s.push_str(&format!(" ; [0x{a:08x}]=0x{v:08x}"));
        }
        s
    }
}

/// Outcome of a completed run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StopReason {
    /// Jump-to-self detected.
    Halted,
    /// A trap was raised; state is as of before the trapping instruction.
    Trap(TrapCause),
    /// max_cycles exceeded.
    Timeout,
}

pub fn is_u_format(inst: &Instruction) -> bool {
    matches!(inst, Instruction::Base { op, .. } if op.format() == Format::U)
}
