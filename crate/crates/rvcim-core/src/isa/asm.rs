//! Line assembler and disassembler.
//!
//! Grammar: one instruction per line, `#` starts a comment, `label:` defines
//! a label. Branch and jump targets may be labels (resolved PC-relative) or
//! numeric byte offsets. Store/load addresses use `imm(reg)` syntax.

use std::collections::HashMap;

use thiserror::Error;

use super::{encode, BaseOp, CimOp, EncodeError, Format, Instruction};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AsmError {
    #[error("line {line}: syntax error: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: undefined label `{label}`")]
    UndefinedLabel { line: usize, label: String },
    #[error("line {line}: duplicate label `{label}`")]
    DuplicateLabel { line: usize, label: String },
    #[error("line {line}: {source}")]
    Encode { line: usize, source: EncodeError },
}

fn parse_reg(tok: &str) -> Option<u8> {
    let t = tok.trim();
    if let Some(num) = t.strip_prefix('x') {
        if let Ok(n) = num.parse::<u8>() {
            if n < 32 {
                return Some(n);
            }
        }
        return None;
    }
    // ABI names.
    let n: u8 = match t {
        "zero" => 0,
        "ra" => 1,
        "sp" => 2,
        "gp" => 3,
        "tp" => 4,
        "t0" => 5,
        "t1" => 6,
        "t2" => 7,
        "s0" | "fp" => 8,
        "s1" => 9,
        "a0" => 10,
        "a1" => 11,
        "a2" => 12,
        "a3" => 13,
        "a4" => 14,
        "a5" => 15,
        "a6" => 16,
        "a7" => 17,
        "s2" => 18,
        "s3" => 19,
        "s4" => 20,
        "s5" => 21,
        "s6" => 22,
        "s7" => 23,
        "s8" => 24,
        "s9" => 25,
        "s10" => 26,
        "s11" => 27,
        "t3" => 28,
        "t4" => 29,
        "t5" => 30,
        "t6" => 31,
        _ => return None,
    };
    Some(n)
}

fn parse_int(tok: &str) -> Option<i64> {
    let t = tok.trim();
    let (neg, t) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t),
    };
    let v = if let Some(hex) = t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")) {
        i64::from_str_radix(hex, 16).ok()?
    } else {
        t.parse::<i64>().ok()?
    };
    Some(if neg { -v } else { v })
}

/// One statement after label extraction.
struct Stmt<'a> {
    line: usize,
    mnemonic: &'a str,
    operands: Vec<&'a str>,
}

/// Strip comment, pull off leading `label:` definitions.
fn scan(source: &str) -> Result<(Vec<Stmt<'_>>, HashMap<&str, u32>), AsmError> {
    let mut stmts = Vec::new();
    let mut labels: HashMap<&str, u32> = HashMap::new();
    for (idx, raw) in source.lines().enumerate() {
        let line = idx + 1;
        let mut text = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        }
        .trim();
        // Labels; several may stack on one line.
        while let Some(colon) = text.find(':') {
            let (name, rest) = text.split_at(colon);
            let name = name.trim();
            if name.is_empty() || !name.chars().all(|c| c.is_alphanumeric() || c == '_' || c == '.')
            {
                return Err(AsmError::Syntax { line, msg: format!("bad label `{name}`") });
            }
            let pc = (stmts.len() as u32) * 4;
            if labels.insert(name, pc).is_some() {
                return Err(AsmError::DuplicateLabel { line, label: name.to_string() });
            }
            text = rest[1..].trim();
        }
        if text.is_empty() {
            continue;
        }
        let (mnemonic, rest) = match text.find(char::is_whitespace) {
            Some(p) => (&text[..p], text[p..].trim()),
            None => (text, ""),
        };
        let operands: Vec<&str> =
            if rest.is_empty() { Vec::new() } else { rest.split(',').map(str::trim).collect() };
        stmts.push(Stmt { line, mnemonic, operands });
    }
    Ok((stmts, labels))
}

struct Ctx<'a> {
    line: usize,
    pc: u32,
    labels: &'a HashMap<&'a str, u32>,
}

impl Ctx<'_> {
    fn err(&self, msg: impl Into<String>) -> AsmError {
        AsmError::Syntax { line: self.line, msg: msg.into() }
    }

    fn reg(&self, tok: &str) -> Result<u8, AsmError> {
        parse_reg(tok).ok_or_else(|| self.err(format!("bad register `{tok}`")))
    }

    fn imm(&self, tok: &str) -> Result<i32, AsmError> {
        parse_int(tok)
            .and_then(|v| i32::try_from(v).ok())
            .ok_or_else(|| self.err(format!("bad immediate `{tok}`")))
    }

    /// Branch/jump target: a label or a numeric byte offset.
    fn target(&self, tok: &str) -> Result<i32, AsmError> {
        if let Some(v) = parse_int(tok) {
            return i32::try_from(v).map_err(|_| self.err(format!("offset `{tok}` too large")));
        }
        match self.labels.get(tok) {
            Some(&addr) => Ok(addr.wrapping_sub(self.pc) as i32),
            None => {
                Err(AsmError::UndefinedLabel { line: self.line, label: tok.to_string() })
            }
        }
    }

    /// `imm(reg)` address operand.
    fn mem(&self, tok: &str) -> Result<(i32, u8), AsmError> {
        let open = tok.find('(').ok_or_else(|| self.err(format!("expected imm(reg), got `{tok}`")))?;
        let close = tok.rfind(')').ok_or_else(|| self.err("missing `)`"))?;
        let imm = if tok[..open].trim().is_empty() { 0 } else { self.imm(&tok[..open])? };
        let reg = self.reg(&tok[open + 1..close])?;
        Ok((imm, reg))
    }
}

fn base_by_mnemonic(m: &str) -> Option<BaseOp> {
    use BaseOp::*;
    Some(match m {
        "lui" => Lui,
        "auipc" => Auipc,
        "jal" => Jal,
        "jalr" => Jalr,
        "beq" => Beq,
        "bne" => Bne,
        "blt" => Blt,
        "bge" => Bge,
        "bltu" => Bltu,
        "bgeu" => Bgeu,
        "lb" => Lb,
        "lh" => Lh,
        "lw" => Lw,
        "lbu" => Lbu,
        "lhu" => Lhu,
        "sb" => Sb,
        "sh" => Sh,
        "sw" => Sw,
        "addi" => Addi,
        "slti" => Slti,
        "sltiu" => Sltiu,
        "xori" => Xori,
        "ori" => Ori,
        "andi" => Andi,
        "slli" => Slli,
        "srli" => Srli,
        "srai" => Srai,
        "add" => Add,
        "sub" => Sub,
        "sll" => Sll,
        "slt" => Slt,
        "sltu" => Sltu,
        "xor" => Xor,
        "srl" => Srl,
        "sra" => Sra,
        "or" => Or,
        "and" => And,
        "fence" => Fence,
        "ecall" => Ecall,
        "ebreak" => Ebreak,
        _ => return None,
    })
}

fn cim_by_mnemonic(m: &str) -> Option<CimOp> {
    match m {
        "cim.conv" => Some(CimOp::Conv),
        "cim.read" => Some(CimOp::Read),
        "cim.write" => Some(CimOp::Write),
        _ => None,
    }
}

fn expect_operands(ctx: &Ctx, ops: &[&str], n: usize) -> Result<(), AsmError> {
    if ops.len() != n {
        Err(ctx.err(format!("expected {n} operands, got {}", ops.len())))
    } else {
        Ok(())
    }
}

fn lower_stmt(ctx: &Ctx, mnemonic: &str, ops: &[&str]) -> Result<Instruction, AsmError> {
    if let Some(op) = cim_by_mnemonic(mnemonic) {
        expect_operands(ctx, ops, 4)?;
        return Ok(Instruction::cim(
            op,
            ctx.reg(ops[0])?,
            ctx.reg(ops[1])?,
            ctx.imm(ops[2])?,
            ctx.imm(ops[3])?,
        ));
    }
    // Single-word pseudo-instructions.
    match mnemonic {
        "nop" => {
            expect_operands(ctx, ops, 0)?;
            return Ok(Instruction::nop());
        }
        "mv" => {
            expect_operands(ctx, ops, 2)?;
            return Ok(Instruction::i(BaseOp::Addi, ctx.reg(ops[0])?, ctx.reg(ops[1])?, 0));
        }
        "li" => {
            expect_operands(ctx, ops, 2)?;
            let v = ctx.imm(ops[1])?;
            if !(-2048..=2047).contains(&v) {
                return Err(ctx.err(format!("li immediate {v} does not fit 12 signed bits")));
            }
            return Ok(Instruction::i(BaseOp::Addi, ctx.reg(ops[0])?, 0, v));
        }
        "j" => {
            expect_operands(ctx, ops, 1)?;
            return Ok(Instruction::j(BaseOp::Jal, 0, ctx.target(ops[0])?));
        }
        "ret" => {
            expect_operands(ctx, ops, 0)?;
            return Ok(Instruction::i(BaseOp::Jalr, 0, 1, 0));
        }
        _ => {}
    }
    let op = base_by_mnemonic(mnemonic)
        .ok_or_else(|| ctx.err(format!("unknown mnemonic `{mnemonic}`")))?;
    match op.format() {
        Format::R => {
            expect_operands(ctx, ops, 3)?;
            Ok(Instruction::r(op, ctx.reg(ops[0])?, ctx.reg(ops[1])?, ctx.reg(ops[2])?))
        }
        Format::I | Format::Shift => match op {
            BaseOp::Lb | BaseOp::Lh | BaseOp::Lw | BaseOp::Lbu | BaseOp::Lhu => {
                expect_operands(ctx, ops, 2)?;
                let (imm, rs1) = ctx.mem(ops[1])?;
                Ok(Instruction::i(op, ctx.reg(ops[0])?, rs1, imm))
            }
            BaseOp::Jalr => {
                // Accept both `jalr rd, rs1, imm` and `jalr rd, imm(rs1)`.
                if ops.len() == 2 {
                    let (imm, rs1) = ctx.mem(ops[1])?;
                    Ok(Instruction::i(op, ctx.reg(ops[0])?, rs1, imm))
                } else {
                    expect_operands(ctx, ops, 3)?;
                    Ok(Instruction::i(op, ctx.reg(ops[0])?, ctx.reg(ops[1])?, ctx.imm(ops[2])?))
                }
            }
            BaseOp::Fence => {
                expect_operands(ctx, ops, 0)?;
                Ok(Instruction::i(BaseOp::Fence, 0, 0, 0x0ff))
            }
            _ => {
                expect_operands(ctx, ops, 3)?;
                Ok(Instruction::i(op, ctx.reg(ops[0])?, ctx.reg(ops[1])?, ctx.imm(ops[2])?))
            }
        },
        Format::S => {
            expect_operands(ctx, ops, 2)?;
            let (imm, rs1) = ctx.mem(ops[1])?;
            Ok(Instruction::s(op, rs1, ctx.reg(ops[0])?, imm))
        }
        Format::B => {
            expect_operands(ctx, ops, 3)?;
            Ok(Instruction::b(op, ctx.reg(ops[0])?, ctx.reg(ops[1])?, ctx.target(ops[2])?))
        }
        Format::U => {
            expect_operands(ctx, ops, 2)?;
            let v = ctx.imm(ops[1])?;
            if !(0..(1 << 20)).contains(&v) {
                return Err(ctx.err(format!("upper immediate {v} does not fit 20 bits")));
            }
            Ok(Instruction::u(op, ctx.reg(ops[0])?, v as u32))
        }
        Format::J => {
            expect_operands(ctx, ops, 2)?;
            Ok(Instruction::j(op, ctx.reg(ops[0])?, ctx.target(ops[1])?))
        }
        Format::Sys => {
            expect_operands(ctx, ops, 0)?;
            Ok(Instruction::r(op, 0, 0, 0))
        }
    }
}

/// Assemble a source text into instruction words.
pub fn assemble(source: &str) -> Result<Vec<u32>, AsmError> {
    let (stmts, labels) = scan(source)?;
    let mut words = Vec::with_capacity(stmts.len());
    for (i, stmt) in stmts.iter().enumerate() {
        let ctx = Ctx { line: stmt.line, pc: (i as u32) * 4, labels: &labels };
        let inst = lower_stmt(&ctx, stmt.mnemonic, &stmt.operands)?;
        let word =
            encode(&inst).map_err(|source| AsmError::Encode { line: stmt.line, source })?;
        words.push(word);
    }
    Ok(words)
}

/// Render an instruction in assembler syntax. Branch/jump offsets are
/// numeric byte offsets, so the text re-assembles to the same word.
pub fn disassemble(inst: &Instruction) -> String {
    match *inst {
        Instruction::Cim { op, rs1, rs2, imm_s, imm_d } => {
            format!("{} x{rs1}, x{rs2}, {imm_s}, {imm_d}", op.mnemonic())
        }
        Instruction::Base { op, rd, rs1, rs2, imm } => {
            let m = op.mnemonic();
            match op.format() {
                Format::R => format!("{m} x{rd}, x{rs1}, x{rs2}"),
                Format::I | Format::Shift => match op {
                    BaseOp::Lb | BaseOp::Lh | BaseOp::Lw | BaseOp::Lbu | BaseOp::Lhu => {
                        format!("{m} x{rd}, {imm}(x{rs1})")
                    }
                    BaseOp::Fence => m.to_string(),
                    _ => format!("{m} x{rd}, x{rs1}, {imm}"),
                },
                Format::S => format!("{m} x{rs2}, {imm}(x{rs1})"),
                Format::B => format!("{m} x{rs1}, x{rs2}, {imm}"),
                Format::U => format!("{m} x{rd}, 0x{:x}", (imm as u32) >> 12),
                Format::J => format!("{m} x{rd}, {imm}"),
                Format::Sys => m.to_string(),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::isa::decode;

    #[test]
    fn assemble_cim_conv_example() {
        assert_eq!(assemble("cim.conv x1, x2, 0, 4").unwrap(), vec![0x0020827e]);
    }

    #[test]
    fn empty_source_is_empty_program() {
        assert_eq!(assemble("").unwrap(), Vec::<u32>::new());
        assert_eq!(assemble("  # just a comment\n\n").unwrap(), Vec::<u32>::new());
    }

    #[test]
    fn unknown_mnemonic_reports_line() {
        let err = assemble("cim.bogus x1").unwrap_err();
        match err {
            AsmError::Syntax { line, .. } => assert_eq!(line, 1),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn labels_resolve_pc_relative() {
        let words = assemble(
            "start:\n\
             addi x1, x0, 1\n\
             beq x1, x0, done\n\
             jal x0, start\n\
             done:\n\
             jal x0, done\n",
        )
        .unwrap();
        // beq at pc=4 targets pc=12 -> offset 8.
        assert_eq!(decode(words[1]).unwrap(), Instruction::b(BaseOp::Beq, 1, 0, 8));
        // jal at pc=8 targets pc=0 -> offset -8.
        assert_eq!(decode(words[2]).unwrap(), Instruction::j(BaseOp::Jal, 0, -8));
        // jump-to-self.
        assert_eq!(decode(words[3]).unwrap(), Instruction::j(BaseOp::Jal, 0, 0));
    }

    #[test]
    fn undefined_label_is_an_error() {
        let err = assemble("jal x0, nowhere").unwrap_err();
        assert_eq!(err, AsmError::UndefinedLabel { line: 1, label: "nowhere".into() });
    }

    #[test]
    fn loads_stores_and_abi_names() {
        let words = assemble("lw a0, 8(sp)\nsw a0, -4(s0)\n").unwrap();
        assert_eq!(decode(words[0]).unwrap(), Instruction::i(BaseOp::Lw, 10, 2, 8));
        assert_eq!(decode(words[1]).unwrap(), Instruction::s(BaseOp::Sw, 8, 10, -4));
    }

    #[test]
    fn disassemble_reassembles_to_same_word() {
        let src = "addi x1, x0, -17\n\
                   lui x2, 0xfffff\n\
                   auipc x3, 0x1\n\
                   lw x4, -12(x5)\n\
                   sb x6, 3(x7)\n\
                   beq x8, x9, 64\n\
                   jal x1, -2048\n\
                   jalr x0, x1, 0\n\
                   srai x10, x11, 31\n\
                   and x12, x13, x14\n\
                   cim.conv x1, x2, -64, 15\n\
                   cim.read x3, x4, 63, -16\n\
                   cim.write x5, x6, 1, 2\n\
                   fence\n\
                   ecall\n\
                   ebreak\n";
        let words = assemble(src).unwrap();
        for w in words {
            let inst = decode(w).unwrap();
            let text = disassemble(&inst);
            let again = assemble(&text).unwrap();
            assert_eq!(again, vec![w], "fixpoint failed for `{text}`");
        }
    }
}
