//! Instruction word decoding.

use super::{BaseOp, CimOp, DecodeError, Instruction, CIM_OPCODE};

#[inline]
fn rd(w: u32) -> u8 {
    ((w >> 7) & 0x1f) as u8
}
#[inline]
fn rs1(w: u32) -> u8 {
    ((w >> 15) & 0x1f) as u8
}
#[inline]
fn rs2(w: u32) -> u8 {
    ((w >> 20) & 0x1f) as u8
}
#[inline]
fn funct3(w: u32) -> u32 {
    (w >> 12) & 0x7
}
#[inline]
fn funct7(w: u32) -> u32 {
    w >> 25
}

#[inline]
fn imm_i(w: u32) -> i32 {
    (w as i32) >> 20
}

#[inline]
fn imm_s(w: u32) -> i32 {
    ((w & 0xfe00_0000) as i32 >> 20) | ((w >> 7) & 0x1f) as i32
}

#[inline]
fn imm_b(w: u32) -> i32 {
    ((w & 0x8000_0000) as i32 >> 19)
        | (((w >> 7) & 1) << 11) as i32
        | (((w >> 25) & 0x3f) << 5) as i32
        | (((w >> 8) & 0xf) << 1) as i32
}

#[inline]
fn imm_u(w: u32) -> i32 {
    (w & 0xffff_f000) as i32
}

#[inline]
fn imm_j(w: u32) -> i32 {
    ((w & 0x8000_0000) as i32 >> 11)
        | (w & 0xff000) as i32
        | (((w >> 20) & 1) << 11) as i32
        | (((w >> 21) & 0x3ff) << 1) as i32
}

/// Decode a 32-bit instruction word.
pub fn decode(word: u32) -> Result<Instruction, DecodeError> {
    let illegal = || DecodeError::Illegal(word);
    let opcode = word & 0x7f;
    match opcode {
        CIM_OPCODE => {
            let op = CimOp::from_funct3(funct3(word)).ok_or_else(illegal)?;
            // imm_s is bits [31:25], imm_d bits [11:7], both sign-extended.
            let s = (word as i32) >> 25;
            let d = ((word << 20) as i32) >> 27;
            Ok(Instruction::cim(op, rs1(word), rs2(word), s, d))
        }
        0b0110111 => Ok(Instruction::Base {
            op: BaseOp::Lui,
            rd: rd(word),
            rs1: 0,
            rs2: 0,
            imm: imm_u(word),
        }),
        0b0010111 => Ok(Instruction::Base {
            op: BaseOp::Auipc,
            rd: rd(word),
            rs1: 0,
            rs2: 0,
            imm: imm_u(word),
        }),
        0b1101111 => Ok(Instruction::Base {
            op: BaseOp::Jal,
            rd: rd(word),
            rs1: 0,
            rs2: 0,
            imm: imm_j(word),
        }),
        0b1100111 => {
            if funct3(word) != 0 {
                return Err(illegal());
            }
            Ok(Instruction::i(BaseOp::Jalr, rd(word), rs1(word), imm_i(word)))
        }
        0b1100011 => {
            let op = match funct3(word) {
                0b000 => BaseOp::Beq,
                0b001 => BaseOp::Bne,
                0b100 => BaseOp::Blt,
                0b101 => BaseOp::Bge,
                0b110 => BaseOp::Bltu,
                0b111 => BaseOp::Bgeu,
                _ => return Err(illegal()),
            };
            Ok(Instruction::b(op, rs1(word), rs2(word), imm_b(word)))
        }
        0b0000011 => {
            let op = match funct3(word) {
                0b000 => BaseOp::Lb,
                0b001 => BaseOp::Lh,
                0b010 => BaseOp::Lw,
                0b100 => BaseOp::Lbu,
                0b101 => BaseOp::Lhu,
                _ => return Err(illegal()),
            };
            Ok(Instruction::i(op, rd(word), rs1(word), imm_i(word)))
        }
        0b0100011 => {
            let op = match funct3(word) {
                0b000 => BaseOp::Sb,
                0b001 => BaseOp::Sh,
                0b010 => BaseOp::Sw,
                _ => return Err(illegal()),
            };
            Ok(Instruction::s(op, rs1(word), rs2(word), imm_s(word)))
        }
        0b0010011 => {
            let f3 = funct3(word);
            match f3 {
                0b001 | 0b101 => {
                    let shamt = ((word >> 20) & 0x1f) as i32;
                    let op = match (f3, funct7(word)) {
                        (0b001, 0b0000000) => BaseOp::Slli,
                        (0b101, 0b0000000) => BaseOp::Srli,
                        (0b101, 0b0100000) => BaseOp::Srai,
                        _ => return Err(illegal()),
                    };
                    Ok(Instruction::i(op, rd(word), rs1(word), shamt))
                }
                _ => {
                    let op = match f3 {
                        0b000 => BaseOp::Addi,
                        0b010 => BaseOp::Slti,
                        0b011 => BaseOp::Sltiu,
                        0b100 => BaseOp::Xori,
                        0b110 => BaseOp::Ori,
                        0b111 => BaseOp::Andi,
                        _ => unreachable!(),
                    };
                    Ok(Instruction::i(op, rd(word), rs1(word), imm_i(word)))
                }
            }
        }
        0b0110011 => {
            let op = match (funct3(word), funct7(word)) {
                (0b000, 0b0000000) => BaseOp::Add,
                (0b000, 0b0100000) => BaseOp::Sub,
                (0b001, 0b0000000) => BaseOp::Sll,
                (0b010, 0b0000000) => BaseOp::Slt,
                (0b011, 0b0000000) => BaseOp::Sltu,
                (0b100, 0b0000000) => BaseOp::Xor,
                (0b101, 0b0000000) => BaseOp::Srl,
                (0b101, 0b0100000) => BaseOp::Sra,
                (0b110, 0b0000000) => BaseOp::Or,
                (0b111, 0b0000000) => BaseOp::And,
                _ => return Err(illegal()),
            };
            Ok(Instruction::r(op, rd(word), rs1(word), rs2(word)))
        }
        0b0001111 => {
            if funct3(word) != 0 {
                return Err(illegal());
            }
            // Keep pred/succ bits so encode(decode(w)) == w.
            Ok(Instruction::i(BaseOp::Fence, rd(word), rs1(word), imm_i(word)))
        }
        0b1110011 => {
            if funct3(word) != 0 || rd(word) != 0 || rs1(word) != 0 {
                return Err(illegal());
            }
            match word >> 20 {
                0 => Ok(Instruction::r(BaseOp::Ecall, 0, 0, 0)),
                1 => Ok(Instruction::r(BaseOp::Ebreak, 0, 0, 0)),
                _ => Err(illegal()),
            }
        }
        _ => Err(illegal()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::isa::encode;

    #[test]
    fn decode_cim_conv_example() {
        let inst = decode(0x0020827e).unwrap();
        assert_eq!(inst, Instruction::cim(CimOp::Conv, 1, 2, 0, 4));
    }

    #[test]
    fn decode_cim_sign_extension() {
        // imm_s = -1 (0x7f), imm_d = -16 (0x10).
        let w = encode(&Instruction::cim(CimOp::Write, 3, 4, -1, -16)).unwrap();
        let inst = decode(w).unwrap();
        assert_eq!(inst, Instruction::cim(CimOp::Write, 3, 4, -1, -16));
    }

    #[test]
    fn undefined_cim_funct3_is_illegal() {
        // funct3 = 0b111 under the CIM opcode.
        let w = 0b111 << 12 | 0b1111110;
        assert_eq!(decode(w), Err(DecodeError::Illegal(w)));
    }

    #[test]
    fn decode_known_add() {
        assert_eq!(decode(0x002081b3).unwrap(), Instruction::r(BaseOp::Add, 3, 1, 2));
    }

    #[test]
    fn unknown_opcode_is_illegal() {
        assert_eq!(decode(0xffff_ffff), Err(DecodeError::Illegal(0xffff_ffff)));
        assert_eq!(decode(0), Err(DecodeError::Illegal(0)));
    }

    #[test]
    fn fence_roundtrips_pred_succ() {
        let w = 0x0ff0_000f;
        let inst = decode(w).unwrap();
        assert_eq!(encode(&inst).unwrap(), w);
    }
}
