//! Instruction set: RV32I base subset plus the three CIM-type instructions
//! (opcode `1111110`), with binary encode/decode and a line assembler.
//!
//! CIM-type layout (S-type-like split, two disjoint immediates):
//!
//! ```text
//! [31:25]=imm_s  [24:20]=rs2  [19:15]=rs1  [14:12]=funct3  [11:7]=imm_d  [6:0]=1111110
//! ```
//!
//! `imm_s` is a signed 7-bit word offset, `imm_d` a signed 5-bit word
//! offset. funct3 selects conv (000), read (001), write (010).

mod asm;
mod decode;
mod encode;

pub use asm::{assemble, disassemble, AsmError};
pub use decode::decode;
pub use encode::encode;

use thiserror::Error;

/// Opcode shared by all CIM-type instructions.
pub const CIM_OPCODE: u32 = 0b1111110;

/// funct3 selectors under [`CIM_OPCODE`].
pub const CIM_FUNCT3_CONV: u32 = 0b000;
pub const CIM_FUNCT3_READ: u32 = 0b001;
pub const CIM_FUNCT3_WRITE: u32 = 0b010;

/// The three CIM operations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CimOp {
    /// Shift 32 FM bits into the input buffer, MAC, store SA outputs.
    Conv,
    /// Copy one 32-weight macro segment into weight SRAM.
    Read,
    /// Copy 32 packed weights from weight SRAM into the macro.
    Write,
}

impl CimOp {
    pub fn funct3(self) -> u32 {
        match self {
            CimOp::Conv => CIM_FUNCT3_CONV,
            CimOp::Read => CIM_FUNCT3_READ,
            CimOp::Write => CIM_FUNCT3_WRITE,
        }
    }

    pub fn from_funct3(funct3: u32) -> Option<Self> {
        match funct3 {
            CIM_FUNCT3_CONV => Some(CimOp::Conv),
            CIM_FUNCT3_READ => Some(CimOp::Read),
            CIM_FUNCT3_WRITE => Some(CimOp::Write),
            _ => None,
        }
    }

    pub fn mnemonic(self) -> &'static str {
        match self {
            CimOp::Conv => "cim.conv",
            CimOp::Read => "cim.read",
            CimOp::Write => "cim.write",
        }
    }
}

/// RV32I base opcodes understood by the core.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BaseOp {
    Lui,
    Auipc,
    Jal,
    Jalr,
    Beq,
    Bne,
    Blt,
    Bge,
    Bltu,
    Bgeu,
    Lb,
    Lh,
    Lw,
    Lbu,
    Lhu,
    Sb,
    Sh,
    Sw,
    Addi,
    Slti,
    Sltiu,
    Xori,
    Ori,
    Andi,
    Slli,
    Srli,
    Srai,
    Add,
    Sub,
    Sll,
    Slt,
    Sltu,
    Xor,
    Srl,
    Sra,
    Or,
    And,
    Fence,
    Ecall,
    Ebreak,
}

/// Encoding format of a base op.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    R,
    I,
    Shift,
    S,
    B,
    U,
    J,
    Sys,
}

impl BaseOp {
    pub fn format(self) -> Format {
        use BaseOp::*;
        match self {
            Lui | Auipc => Format::U,
            Jal => Format::J,
            Jalr | Lb | Lh | Lw | Lbu | Lhu | Addi | Slti | Sltiu | Xori | Ori | Andi
            | Fence => Format::I,
            Slli | Srli | Srai => Format::Shift,
            Sb | Sh | Sw => Format::S,
            Beq | Bne | Blt | Bge | Bltu | Bgeu => Format::B,
            Add | Sub | Sll | Slt | Sltu | Xor | Srl | Sra | Or | And => Format::R,
            Ecall | Ebreak => Format::Sys,
        }
    }

    pub fn mnemonic(self) -> &'static str {
        use BaseOp::*;
        match self {
            Lui => "lui",
            Auipc => "auipc",
            Jal => "jal",
            Jalr => "jalr",
            Beq => "beq",
            Bne => "bne",
            Blt => "blt",
            Bge => "bge",
            Bltu => "bltu",
            Bgeu => "bgeu",
            Lb => "lb",
            Lh => "lh",
            Lw => "lw",
            Lbu => "lbu",
            Lhu => "lhu",
            Sb => "sb",
            Sh => "sh",
            Sw => "sw",
            Addi => "addi",
            Slti => "slti",
            Sltiu => "sltiu",
            Xori => "xori",
            Ori => "ori",
            Andi => "andi",
            Slli => "slli",
            Srli => "srli",
            Srai => "srai",
            Add => "add",
            Sub => "sub",
            Sll => "sll",
            Slt => "slt",
            Sltu => "sltu",
            Xor => "xor",
            Srl => "srl",
            Sra => "sra",
            Or => "or",
            And => "and",
            Fence => "fence",
            Ecall => "ecall",
            Ebreak => "ebreak",
        }
    }
}

/// A decoded instruction. Fields that a format does not carry are zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Instruction {
    Base {
        op: BaseOp,
        rd: u8,
        rs1: u8,
        rs2: u8,
        /// Sign-extended immediate; for U-type the full shifted value.
        imm: i32,
    },
    Cim {
        op: CimOp,
        rs1: u8,
        rs2: u8,
        /// Signed 7-bit source word offset.
        imm_s: i32,
        /// Signed 5-bit destination word offset.
        imm_d: i32,
    },
}

impl Instruction {
    pub fn cim(op: CimOp, rs1: u8, rs2: u8, imm_s: i32, imm_d: i32) -> Self {
        Instruction::Cim { op, rs1, rs2, imm_s, imm_d }
    }

    /// R-type register-register op.
    pub fn r(op: BaseOp, rd: u8, rs1: u8, rs2: u8) -> Self {
        Instruction::Base { op, rd, rs1, rs2, imm: 0 }
    }

    /// I-type (also loads, jalr, shifts).
    pub fn i(op: BaseOp, rd: u8, rs1: u8, imm: i32) -> Self {
        Instruction::Base { op, rd, rs1, rs2: 0, imm }
    }

    /// S-type store.
    pub fn s(op: BaseOp, rs1: u8, rs2: u8, imm: i32) -> Self {
        Instruction::Base { op, rd: 0, rs1, rs2, imm }
    }

    /// B-type branch.
    pub fn b(op: BaseOp, rs1: u8, rs2: u8, imm: i32) -> Self {
        Instruction::Base { op, rd: 0, rs1, rs2, imm }
    }

    /// U-type; `imm20` is the upper-20-bit value before shifting.
    pub fn u(op: BaseOp, rd: u8, imm20: u32) -> Self {
        Instruction::Base { op, rd, rs1: 0, rs2: 0, imm: (imm20 << 12) as i32 }
    }

    /// J-type jump.
    pub fn j(op: BaseOp, rd: u8, imm: i32) -> Self {
        Instruction::Base { op, rd, rs1: 0, rs2: 0, imm }
    }

    pub fn nop() -> Self {
        Instruction::i(BaseOp::Addi, 0, 0, 0)
    }

    pub fn is_cim_conv(&self) -> bool {
        matches!(self, Instruction::Cim { op: CimOp::Conv, .. })
    }

    /// Control-transfer instructions (jumps and branches).
    pub fn is_control_flow(&self) -> bool {
        matches!(
            self,
            Instruction::Base {
                op: BaseOp::Jal
                    | BaseOp::Jalr
                    | BaseOp::Beq
                    | BaseOp::Bne
                    | BaseOp::Blt
                    | BaseOp::Bge
                    | BaseOp::Bltu
                    | BaseOp::Bgeu,
                ..
            }
        )
    }
}

/// Errors from [`encode`].
#[derive(Debug, Error, PartialEq, Eq)]
pub enum EncodeError {
    #[error("register index {0} out of range (must be < 32)")]
    Register(u8),
    #[error("{field} immediate {value} does not fit {bits} signed bits")]
    Immediate { field: &'static str, value: i32, bits: u32 },
    #[error("{field} immediate {value} must be even")]
    Misaligned { field: &'static str, value: i32 },
    #[error("shift amount {0} out of range (must be < 32)")]
    Shamt(i32),
    #[error("upper immediate 0x{0:x} has nonzero low 12 bits")]
    UpperImm(i32),
}

/// Errors from [`decode`].
#[derive(Debug, Error, PartialEq, Eq)]
pub enum DecodeError {
    #[error("illegal instruction word 0x{0:08x}")]
    Illegal(u32),
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cimop_funct3_roundtrip() {
        for op in [CimOp::Conv, CimOp::Read, CimOp::Write] {
            assert_eq!(CimOp::from_funct3(op.funct3()), Some(op));
        }
        assert_eq!(CimOp::from_funct3(0b111), None);
        assert_eq!(CimOp::from_funct3(0b011), None);
    }
}
