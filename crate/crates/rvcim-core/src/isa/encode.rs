//! Instruction word encoding.

use super::{BaseOp, EncodeError, Format, Instruction, CIM_OPCODE};

fn check_reg(r: u8) -> Result<u32, EncodeError> {
    if r < 32 {
        Ok(r as u32)
    } else {
        Err(EncodeError::Register(r))
    }
}

fn check_signed(field: &'static str, value: i32, bits: u32) -> Result<u32, EncodeError> {
    let min = -(1i32 << (bits - 1));
    let max = (1i32 << (bits - 1)) - 1;
    if value < min || value > max {
        return Err(EncodeError::Immediate { field, value, bits });
    }
    Ok((value as u32) & ((1u32 << bits) - 1))
}

fn opcode_funct(op: BaseOp) -> (u32, u32, u32) {
    use BaseOp::*;
    // (opcode, funct3, funct7)
    match op {
        Lui => (0b0110111, 0, 0),
        Auipc => (0b0010111, 0, 0),
        Jal => (0b1101111, 0, 0),
        Jalr => (0b1100111, 0b000, 0),
        Beq => (0b1100011, 0b000, 0),
        Bne => (0b1100011, 0b001, 0),
        Blt => (0b1100011, 0b100, 0),
        Bge => (0b1100011, 0b101, 0),
        Bltu => (0b1100011, 0b110, 0),
        Bgeu => (0b1100011, 0b111, 0),
        Lb => (0b0000011, 0b000, 0),
        Lh => (0b0000011, 0b001, 0),
        Lw => (0b0000011, 0b010, 0),
        Lbu => (0b0000011, 0b100, 0),
        Lhu => (0b0000011, 0b101, 0),
        Sb => (0b0100011, 0b000, 0),
        Sh => (0b0100011, 0b001, 0),
        Sw => (0b0100011, 0b010, 0),
        Addi => (0b0010011, 0b000, 0),
        Slti => (0b0010011, 0b010, 0),
        Sltiu => (0b0010011, 0b011, 0),
        Xori => (0b0010011, 0b100, 0),
        Ori => (0b0010011, 0b110, 0),
        Andi => (0b0010011, 0b111, 0),
        Slli => (0b0010011, 0b001, 0b0000000),
        Srli => (0b0010011, 0b101, 0b0000000),
        Srai => (0b0010011, 0b101, 0b0100000),
        Add => (0b0110011, 0b000, 0b0000000),
        Sub => (0b0110011, 0b000, 0b0100000),
        Sll => (0b0110011, 0b001, 0b0000000),
        Slt => (0b0110011, 0b010, 0b0000000),
        Sltu => (0b0110011, 0b011, 0b0000000),
        Xor => (0b0110011, 0b100, 0b0000000),
        Srl => (0b0110011, 0b101, 0b0000000),
        Sra => (0b0110011, 0b101, 0b0100000),
        Or => (0b0110011, 0b110, 0b0000000),
        And => (0b0110011, 0b111, 0b0000000),
        Fence => (0b0001111, 0b000, 0),
        Ecall => (0b1110011, 0b000, 0),
        Ebreak => (0b1110011, 0b000, 0),
    }
}

/// Encode an instruction to its 32-bit word.
pub fn encode(inst: &Instruction) -> Result<u32, EncodeError> {
    match *inst {
        Instruction::Cim { op, rs1, rs2, imm_s, imm_d } => {
            let rs1 = check_reg(rs1)?;
            let rs2 = check_reg(rs2)?;
            let imm_s = check_signed("imm_s", imm_s, 7)?;
            let imm_d = check_signed("imm_d", imm_d, 5)?;
            Ok(imm_s << 25 | rs2 << 20 | rs1 << 15 | op.funct3() << 12 | imm_d << 7 | CIM_OPCODE)
        }
        Instruction::Base { op, rd, rs1, rs2, imm } => {
            let (opcode, funct3, funct7) = opcode_funct(op);
            match op.format() {
                Format::R => {
                    let rd = check_reg(rd)?;
                    let rs1 = check_reg(rs1)?;
                    let rs2 = check_reg(rs2)?;
                    Ok(funct7 << 25 | rs2 << 20 | rs1 << 15 | funct3 << 12 | rd << 7 | opcode)
                }
                Format::I => {
                    let rd = check_reg(rd)?;
                    let rs1 = check_reg(rs1)?;
                    let imm = check_signed("imm", imm, 12)?;
                    Ok(imm << 20 | rs1 << 15 | funct3 << 12 | rd << 7 | opcode)
                }
                Format::Shift => {
                    let rd = check_reg(rd)?;
                    let rs1 = check_reg(rs1)?;
                    if !(0..32).contains(&imm) {
                        return Err(EncodeError::Shamt(imm));
                    }
                    let shamt = imm as u32;
                    Ok(funct7 << 25 | shamt << 20 | rs1 << 15 | funct3 << 12 | rd << 7 | opcode)
                }
                Format::S => {
                    let rs1 = check_reg(rs1)?;
                    let rs2 = check_reg(rs2)?;
                    let imm = check_signed("imm", imm, 12)?;
                    let hi = imm >> 5;
                    let lo = imm & 0x1f;
                    Ok(hi << 25 | rs2 << 20 | rs1 << 15 | funct3 << 12 | lo << 7 | opcode)
                }
                Format::B => {
                    let rs1 = check_reg(rs1)?;
                    let rs2 = check_reg(rs2)?;
                    if imm & 1 != 0 {
                        return Err(EncodeError::Misaligned { field: "imm", value: imm });
                    }
                    let imm = check_signed("imm", imm, 13)?;
                    let b12 = (imm >> 12) & 1;
                    let b11 = (imm >> 11) & 1;
                    let b10_5 = (imm >> 5) & 0x3f;
                    let b4_1 = (imm >> 1) & 0xf;
                    Ok(b12 << 31
                        | b10_5 << 25
                        | rs2 << 20
                        | rs1 << 15
                        | funct3 << 12
                        | b4_1 << 8
                        | b11 << 7
                        | opcode)
                }
                Format::U => {
                    let rd = check_reg(rd)?;
                    if imm & 0xfff != 0 {
                        return Err(EncodeError::UpperImm(imm));
                    }
                    Ok((imm as u32) | rd << 7 | opcode)
                }
                Format::J => {
                    let rd = check_reg(rd)?;
                    if imm & 1 != 0 {
                        return Err(EncodeError::Misaligned { field: "imm", value: imm });
                    }
                    let imm = check_signed("imm", imm, 21)?;
                    let b20 = (imm >> 20) & 1;
                    let b19_12 = (imm >> 12) & 0xff;
                    let b11 = (imm >> 11) & 1;
                    let b10_1 = (imm >> 1) & 0x3ff;
                    Ok(b20 << 31 | b10_1 << 21 | b11 << 20 | b19_12 << 12 | rd << 7 | opcode)
                }
                Format::Sys => {
                    let imm12 = if op == BaseOp::Ebreak { 1u32 } else { 0u32 };
                    Ok(imm12 << 20 | opcode)
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::isa::CimOp;

    /// Independent bit assembly for the CIM layout, kept separate from the
    /// encoder so the two routes can disagree.
    fn cim_word_oracle(funct3: u32, rs1: u32, rs2: u32, imm_s: i32, imm_d: i32) -> u32 {
        let mut w = 0u32;
        w |= 0b1111110;
        w |= ((imm_d as u32) & 0x1f) << 7;
        w |= funct3 << 12;
        w |= rs1 << 15;
        w |= rs2 << 20;
        w |= ((imm_s as u32) & 0x7f) << 25;
        w
    }

    #[test]
    fn cim_conv_example_word() {
        let inst = Instruction::cim(CimOp::Conv, 1, 2, 0, 4);
        let w = encode(&inst).unwrap();
        assert_eq!(w, 0x0020827e);
        assert_eq!(w, cim_word_oracle(0b000, 1, 2, 0, 4));
    }

    #[test]
    fn cim_read_zero_operands() {
        let w = encode(&Instruction::cim(CimOp::Read, 0, 0, 0, 0)).unwrap();
        assert_eq!(w & 0x7f, 0b1111110);
        assert_eq!((w >> 12) & 0x7, 0b001);
        assert_eq!(w & !(0x7f | 0x7 << 12), 0);
    }

    #[test]
    fn cim_imm_s_out_of_range() {
        let err = encode(&Instruction::cim(CimOp::Conv, 1, 2, 100, 0)).unwrap_err();
        assert_eq!(err, EncodeError::Immediate { field: "imm_s", value: 100, bits: 7 });
    }

    #[test]
    fn cim_imm_d_out_of_range() {
        let err = encode(&Instruction::cim(CimOp::Write, 1, 2, 0, 16)).unwrap_err();
        assert_eq!(err, EncodeError::Immediate { field: "imm_d", value: 16, bits: 5 });
    }

    #[test]
    fn register_out_of_range() {
        let err = encode(&Instruction::r(BaseOp::Add, 32, 0, 0)).unwrap_err();
        assert_eq!(err, EncodeError::Register(32));
    }

    // Cross-checks against the published RV32I encodings.
    #[test]
    fn known_rv32i_words() {
        let cases: Vec<(Instruction, u32)> = vec![
            (Instruction::i(BaseOp::Addi, 1, 0, 5), 0x00500093),
            (Instruction::r(BaseOp::Add, 3, 1, 2), 0x002081b3),
            (Instruction::r(BaseOp::Sub, 3, 1, 2), 0x402081b3),
            (Instruction::u(BaseOp::Lui, 5, 0x12345), 0x123452b7),
            (Instruction::i(BaseOp::Lw, 6, 2, 8), 0x00812303),
            (Instruction::s(BaseOp::Sw, 2, 6, 12), 0x00612623),
            (Instruction::b(BaseOp::Beq, 1, 2, -4), 0xfe208ee3),
            (Instruction::j(BaseOp::Jal, 1, 16), 0x010000ef),
            (Instruction::i(BaseOp::Jalr, 0, 1, 0), 0x00008067),
            (Instruction::i(BaseOp::Srai, 4, 3, 7), 0x4071d213),
            (Instruction::r(BaseOp::Ecall, 0, 0, 0), 0x00000073),
            (Instruction::r(BaseOp::Ebreak, 0, 0, 0), 0x00100073),
        ];
        for (inst, want) in cases {
            assert_eq!(encode(&inst).unwrap(), want, "{inst:?}");
        }
    }
}
