//! One simulation unit: core state, instruction memory, the two SRAM banks,
//! DRAM, the CIM macro, and the DMA engine, driven cycle-accurately.

use crate::cim::{CimError, CimMacro, MacroMode};
use crate::config::SimConfig;
use crate::cpu::{
    base_cost, is_mem_op, pairable_shape, MachineState, Region, StopReason, TraceEntry, TrapCause,
};
use crate::isa::{decode, BaseOp, CimOp, Instruction};
use crate::mem::{
    map, DmaDir, DmaEngine, DmaRequest, MemError, SramBank, SramBankId, FM_SRAM_WORDS,
    WEIGHT_SRAM_WORDS,
};

#[derive(Debug, Clone, Default)]
struct DmaRegs {
    src: u32,
    dst_bank: u32,
    dst: u32,
    len: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOutcome {
    pub reason: StopReason,
    pub cycles: u64,
    pub retired: u64,
}

pub struct System {
    pub cfg: SimConfig,
    pub state: MachineState,
    imem_words: Vec<u32>,
    imem_decoded: Vec<Option<Instruction>>,
    pub fm: SramBank,
    pub weight: SramBank,
    pub dram: Vec<u32>,
    pub cim: CimMacro,
    pub dma: DmaEngine,
    dma_regs: DmaRegs,
    dma_synced_at: u64,
    pub retired: u64,
}

impl System {
    pub fn new(cfg: SimConfig, mode: MacroMode) -> Self {
        let dram_words = cfg.dram.size_words as usize;
        System {
            cfg,
            state: MachineState::new(),
            imem_words: Vec::new(),
            imem_decoded: Vec::new(),
            fm: SramBank::new("fm", FM_SRAM_WORDS),
            weight: SramBank::new("weight", WEIGHT_SRAM_WORDS),
            dram: vec![0; dram_words],
            cim: CimMacro::new(mode),
            dma: DmaEngine::new(),
            dma_regs: DmaRegs::default(),
            dma_synced_at: 0,
            retired: 0,
        }
    }

    /// Load a program image at byte address 0 and pre-decode it.
    pub fn load_program(&mut self, words: &[u32]) {
        self.imem_words = words.to_vec();
        self.imem_decoded = words.iter().map(|&w| decode(w).ok()).collect();
        self.state = MachineState::new();
        self.retired = 0;
        self.dma_synced_at = 0;
    }

    pub fn imem(&self) -> &[u32] {
        &self.imem_words
    }

    fn fetch(&self, pc: u32) -> Result<Instruction, TrapCause> {
        if pc % 4 != 0 {
            return Err(TrapCause::FetchOutOfBounds { pc });
        }
        let idx = (pc / 4) as usize;
        match self.imem_decoded.get(idx) {
            Some(Some(inst)) => Ok(*inst),
            Some(None) => {
                Err(TrapCause::IllegalInstruction { pc, word: self.imem_words[idx] })
            }
            None => Err(TrapCause::FetchOutOfBounds { pc }),
        }
    }

    fn region_of(&self, addr: u32) -> Option<(Region, u32)> {
        if (map::FM_BASE..map::FM_BASE + (FM_SRAM_WORDS as u32) * 4).contains(&addr) {
            Some((Region::Fm, addr - map::FM_BASE))
        } else if (map::WEIGHT_BASE..map::WEIGHT_BASE + (WEIGHT_SRAM_WORDS as u32) * 4)
            .contains(&addr)
        {
            Some((Region::Weight, addr - map::WEIGHT_BASE))
        } else if addr >= map::DRAM_BASE
            && ((addr - map::DRAM_BASE) as usize) < self.dram.len() * 4
        {
            Some((Region::Dram, addr - map::DRAM_BASE))
        } else if (map::MMIO_BASE..map::MMIO_BASE + 0x18).contains(&addr) {
            Some((Region::Mmio, addr - map::MMIO_BASE))
        } else {
            None
        }
    }

    /// Apply a completed transfer's data movement.
    fn apply_dma(&mut self, req: DmaRequest) {
        let len = req.len_words as usize;
        let d = req.dram_word as usize;
        let s = req.sram_word as usize;
        let bank = match req.bank {
            SramBankId::Weight => &mut self.weight,
            SramBankId::Fm => &mut self.fm,
        };
        match req.dir {
            DmaDir::DramToSram => {
                bank.words_mut()[s..s + len].copy_from_slice(&self.dram[d..d + len]);
            }
            DmaDir::SramToDram => {
                self.dram[d..d + len].copy_from_slice(&bank.words()[s..s + len]);
            }
        }
    }

    /// Advance the DMA engine to the current cycle, applying completion.
    fn sync_dma(&mut self) {
        let now = self.state.cycle;
        if now > self.dma_synced_at {
            if let Some(req) = self.dma.advance(now - self.dma_synced_at) {
                self.apply_dma(req);
            }
            self.dma_synced_at = now;
        }
    }

    fn dram_word(&self, word_off: u32) -> Result<u32, TrapCause> {
        self.dram
            .get(word_off as usize)
            .copied()
            .ok_or(TrapCause::OutOfBounds { addr: map::DRAM_BASE + word_off * 4 })
    }

    /// Start a transfer from the current MMIO register values.
    fn dma_kick(&mut self, ctrl: u32) -> Result<(), TrapCause> {
        self.sync_dma();
        let bank = SramBankId::from_tag(self.dma_regs.dst_bank)
            .ok_or(TrapCause::OutOfBounds { addr: map::MMIO_BASE + map::DMA_DST_BANK })?;
        let dir = if ctrl & map::DMA_CTRL_TO_DRAM != 0 {
            DmaDir::SramToDram
        } else {
            DmaDir::DramToSram
        };
        let req = DmaRequest {
            dram_word: self.dma_regs.src,
            bank,
            sram_word: self.dma_regs.dst,
            len_words: self.dma_regs.len,
            dir,
        };
        // Validate ranges up front so a bad transfer traps at the start
        // instruction instead of corrupting state later.
        let bank_words = match bank {
            SramBankId::Weight => WEIGHT_SRAM_WORDS,
            SramBankId::Fm => FM_SRAM_WORDS,
        } as u64;
        if req.sram_word as u64 + req.len_words as u64 > bank_words {
            return Err(TrapCause::OutOfBounds {
                addr: map::MMIO_BASE + map::DMA_DST,
            });
        }
        if req.dram_word as u64 + req.len_words as u64 > self.dram.len() as u64 {
            return Err(TrapCause::OutOfBounds { addr: map::MMIO_BASE + map::DMA_SRC });
        }
        self.dma.start(req, &self.cfg.dram).map_err(|e| match e {
            MemError::DmaBusy => TrapCause::DmaBusy,
            MemError::Bounds { addr, .. } => TrapCause::OutOfBounds { addr },
        })?;
        Ok(())
    }

    /// Word-granular load with its cycle cost.
    fn load_word_raw(&mut self, addr: u32) -> Result<(u32, u64), TrapCause> {
        match self.region_of(addr) {
            Some((Region::Fm, off)) => Ok((
                self.fm.read_word(off / 4).map_err(|_| TrapCause::OutOfBounds { addr })?,
                1,
            )),
            Some((Region::Weight, off)) => Ok((
                self.weight.read_word(off / 4).map_err(|_| TrapCause::OutOfBounds { addr })?,
                1,
            )),
            Some((Region::Dram, off)) => {
                let v = self.dram_word(off / 4)?;
                Ok((v, self.cfg.dram.fetch_cost(1).max(1)))
            }
            Some((Region::Mmio, off)) => match off {
                map::DMA_SRC => Ok((self.dma_regs.src, 1)),
                map::DMA_DST_BANK => Ok((self.dma_regs.dst_bank, 1)),
                map::DMA_DST => Ok((self.dma_regs.dst, 1)),
                map::DMA_LEN => Ok((self.dma_regs.len, 1)),
                map::DMA_CTRL => Ok((0, 1)),
                map::DMA_STATUS => {
                    // Blocking status read: stalls until any in-flight
                    // transfer completes, then observes its effects.
                    self.sync_dma();
                    let stall = self.dma.remaining();
                    if stall > 0 {
                        if let Some(req) = self.dma.advance(stall) {
                            self.apply_dma(req);
                        }
                        self.dma_synced_at = self.state.cycle + stall;
                    }
                    let status = match self.dma.state() {
                        crate::mem::DmaState::Idle => 0,
                        crate::mem::DmaState::Busy { .. } => 1,
                        crate::mem::DmaState::Done => 2,
                    };
                    Ok((status, 1 + stall))
                }
                _ => Err(TrapCause::OutOfBounds { addr }),
            },
            _ => Err(TrapCause::OutOfBounds { addr }),
        }
    }

    fn store_word_raw(&mut self, addr: u32, value: u32) -> Result<u64, TrapCause> {
        match self.region_of(addr) {
            Some((Region::Fm, off)) => {
                self.fm.write_word(off / 4, value).map_err(|_| TrapCause::OutOfBounds { addr })?;
                Ok(1)
            }
            Some((Region::Weight, off)) => {
                self.weight
                    .write_word(off / 4, value)
                    .map_err(|_| TrapCause::OutOfBounds { addr })?;
                Ok(1)
            }
            Some((Region::Dram, off)) => {
                let w = (off / 4) as usize;
                if w >= self.dram.len() {
                    return Err(TrapCause::OutOfBounds { addr });
                }
                self.dram[w] = value;
                Ok(self.cfg.dram.fetch_cost(1).max(1))
            }
            Some((Region::Mmio, off)) => {
                match off {
                    map::DMA_SRC => self.dma_regs.src = value,
                    map::DMA_DST_BANK => self.dma_regs.dst_bank = value,
                    map::DMA_DST => self.dma_regs.dst = value,
                    map::DMA_LEN => self.dma_regs.len = value,
                    map::DMA_CTRL => {
                        if value & map::DMA_CTRL_START != 0 {
                            self.dma_kick(value)?;
                        }
                    }
                    _ => return Err(TrapCause::OutOfBounds { addr }),
                }
                Ok(1)
            }
            _ => Err(TrapCause::OutOfBounds { addr }),
        }
    }

    fn load(&mut self, addr: u32, width: u32, signed: bool) -> Result<(u32, u64), TrapCause> {
        if addr % width != 0 {
            return Err(TrapCause::Misaligned { addr, width });
        }
        let word_addr = addr & !3;
        let (word, cycles) = self.load_word_raw(word_addr)?;
        let shift = (addr % 4) * 8;
        let v = match (width, signed) {
            (4, _) => word,
            (2, false) => (word >> shift) & 0xffff,
            (2, true) => ((word >> shift) & 0xffff) as u16 as i16 as i32 as u32,
            (1, false) => (word >> shift) & 0xff,
            (1, true) => ((word >> shift) & 0xff) as u8 as i8 as i32 as u32,
            _ => unreachable!(),
        };
        Ok((v, cycles))
    }

    fn store(&mut self, addr: u32, value: u32, width: u32) -> Result<(u32, u64), TrapCause> {
        if addr % width != 0 {
            return Err(TrapCause::Misaligned { addr, width });
        }
        let word_addr = addr & !3;
        if width == 4 {
            let c = self.store_word_raw(word_addr, value)?;
            return Ok((value, c));
        }
        // Sub-word store: read-modify-write on the backing word. MMIO only
        // accepts word accesses.
        if matches!(self.region_of(word_addr), Some((Region::Mmio, _))) {
            return Err(TrapCause::Misaligned { addr, width });
        }
        let (old, _) = self.load_word_raw(word_addr)?;
        let shift = (addr % 4) * 8;
        let mask = if width == 2 { 0xffffu32 } else { 0xffu32 } << shift;
        let merged = (old & !mask) | ((value << shift) & mask);
        let c = self.store_word_raw(word_addr, merged)?;
        Ok((merged, c))
    }

    fn cim_range(detail: String) -> TrapCause {
        TrapCause::CimRange { detail }
    }

    /// Execute one CIM instruction. All range checks precede any mutation.
    fn exec_cim(
        &mut self,
        op: CimOp,
        rs1: u8,
        rs2: u8,
        imm_s: i32,
        imm_d: i32,
    ) -> Result<Option<(u32, u32)>, TrapCause> {
        let a1 = self.state.reg(rs1).wrapping_add(imm_s as u32);
        let a2 = self.state.reg(rs2).wrapping_add(imm_d as u32);
        match op {
            CimOp::Conv => {
                let out_words = self.cim.mode().output_words() as u32;
                if a1 >= FM_SRAM_WORDS as u32 {
                    return Err(Self::cim_range(format!(
                        "conv source word {a1} outside FM SRAM ({FM_SRAM_WORDS} words)"
                    )));
                }
                if a2 as u64 + out_words as u64 > FM_SRAM_WORDS as u64 {
                    return Err(Self::cim_range(format!(
                        "conv destination words {a2}..{} outside FM SRAM",
                        a2 as u64 + out_words as u64
                    )));
                }
                let value = self.fm.read_word(a1).expect("checked");
                let out = self.cim.conv_step(value);
                self.fm.write_wide(a2, &out).expect("checked");
                Ok(Some((map::FM_BASE + a2 * 4, out[0])))
            }
            CimOp::Read => {
                let words = self.cim.weights.read_segment(a1 as usize).map_err(|e| {
                    Self::cim_range(format!("read segment {a1}: {e}"))
                })?;
                if a2 as u64 + 2 > WEIGHT_SRAM_WORDS as u64 {
                    return Err(Self::cim_range(format!(
                        "read destination words {a2}..{} outside weight SRAM",
                        a2 + 2
                    )));
                }
                self.weight.write_wide(a2, &words).expect("checked");
                Ok(Some((map::WEIGHT_BASE + a2 * 4, words[0])))
            }
            CimOp::Write => {
                if a1 as u64 + 2 > WEIGHT_SRAM_WORDS as u64 {
                    return Err(Self::cim_range(format!(
                        "write source words {a1}..{} outside weight SRAM",
                        a1 + 2
                    )));
                }
                let words: [u32; 2] = self.weight.read_wide(a1, 2).expect("checked").try_into().unwrap();
                self.cim.weights.write_segment(a2 as usize, words).map_err(|e| match e {
                    CimError::NotTernary { index, .. } => TrapCause::NonTernaryWeight {
                        bank: "weight",
                        addr: a1 + index as u32 / 16,
                    },
                    other => Self::cim_range(format!("write segment {a2}: {other}")),
                })?;
                Ok(None)
            }
        }
    }

    /// Execute a single instruction, mutating state. Returns the trace
    /// effects and the consumed cycles; the caller advances pc and cycle.
    fn exec_one(
        &mut self,
        pc: u32,
        inst: Instruction,
    ) -> Result<(u32, u64, Option<(u8, u32)>, Option<(u32, u32)>), TrapCause> {
        use BaseOp::*;
        let core = self.cfg.core.clone();
        let mut next = pc.wrapping_add(4);
        let mut cycles;
        let mut reg_write = None;
        let mut mem_write = None;
        match inst {
            Instruction::Cim { op, rs1, rs2, imm_s, imm_d } => {
                cycles = 1;
                mem_write = self.exec_cim(op, rs1, rs2, imm_s, imm_d)?;
            }
            Instruction::Base { op, rd, rs1, rs2, imm } => {
                let r1 = self.state.reg(rs1);
                let r2 = self.state.reg(rs2);
                cycles = base_cost(&inst, &core);
                match op {
                    Lui => {
                        self.state.set_reg(rd, imm as u32);
                        reg_write = Some((rd, imm as u32));
                    }
                    Auipc => {
                        let v = pc.wrapping_add(imm as u32);
                        self.state.set_reg(rd, v);
                        reg_write = Some((rd, v));
                    }
                    Jal => {
                        let target = pc.wrapping_add(imm as u32);
                        if target % 4 != 0 {
                            return Err(TrapCause::MisalignedJump { target });
                        }
                        self.state.set_reg(rd, pc.wrapping_add(4));
                        reg_write = Some((rd, pc.wrapping_add(4)));
                        next = target;
                        if target == pc {
                            self.state.halted = true;
                        }
                    }
                    Jalr => {
                        let target = r1.wrapping_add(imm as u32) & !1;
                        if target % 4 != 0 {
                            return Err(TrapCause::MisalignedJump { target });
                        }
                        self.state.set_reg(rd, pc.wrapping_add(4));
                        reg_write = Some((rd, pc.wrapping_add(4)));
                        next = target;
                        if target == pc {
                            self.state.halted = true;
                        }
                    }
                    Beq | Bne | Blt | Bge | Bltu | Bgeu => {
                        let taken = match op {
                            Beq => r1 == r2,
                            Bne => r1 != r2,
                            Blt => (r1 as i32) < (r2 as i32),
                            Bge => (r1 as i32) >= (r2 as i32),
                            Bltu => r1 < r2,
                            Bgeu => r1 >= r2,
                            _ => unreachable!(),
                        };
                        if taken {
                            let target = pc.wrapping_add(imm as u32);
                            if target % 4 != 0 {
                                return Err(TrapCause::MisalignedJump { target });
                            }
                            next = target;
                            cycles += core.taken_branch_extra;
                        }
                    }
                    Lb | Lh | Lw | Lbu | Lhu => {
                        let addr = r1.wrapping_add(imm as u32);
                        let (width, signed) = match op {
                            Lb => (1, true),
                            Lbu => (1, false),
                            Lh => (2, true),
                            Lhu => (2, false),
                            _ => (4, false),
                        };
                        let (v, c) = self.load(addr, width, signed)?;
                        self.state.set_reg(rd, v);
                        reg_write = Some((rd, v));
                        cycles = c;
                    }
                    Sb | Sh | Sw => {
                        let addr = r1.wrapping_add(imm as u32);
                        let width = match op {
                            Sb => 1,
                            Sh => 2,
                            _ => 4,
                        };
                        let (stored, c) = self.store(addr, r2, width)?;
                        mem_write = Some((addr & !3, stored));
                        cycles = c;
                    }
                    Addi => set_alu(&mut self.state, rd, r1.wrapping_add(imm as u32), &mut reg_write),
                    Slti => set_alu(
                        &mut self.state,
                        rd,
                        ((r1 as i32) < imm) as u32,
                        &mut reg_write,
                    ),
                    Sltiu => set_alu(&mut self.state, rd, (r1 < imm as u32) as u32, &mut reg_write),
                    Xori => set_alu(&mut self.state, rd, r1 ^ imm as u32, &mut reg_write),
                    Ori => set_alu(&mut self.state, rd, r1 | imm as u32, &mut reg_write),
                    Andi => set_alu(&mut self.state, rd, r1 & imm as u32, &mut reg_write),
                    Slli => set_alu(&mut self.state, rd, r1 << (imm as u32 & 31), &mut reg_write),
                    Srli => set_alu(&mut self.state, rd, r1 >> (imm as u32 & 31), &mut reg_write),
                    Srai => set_alu(
                        &mut self.state,
                        rd,
                        ((r1 as i32) >> (imm as u32 & 31)) as u32,
                        &mut reg_write,
                    ),
                    Add => set_alu(&mut self.state, rd, r1.wrapping_add(r2), &mut reg_write),
                    Sub => set_alu(&mut self.state, rd, r1.wrapping_sub(r2), &mut reg_write),
                    Sll => set_alu(&mut self.state, rd, r1 << (r2 & 31), &mut reg_write),
                    Slt => set_alu(&mut self.state, rd, ((r1 as i32) < r2 as i32) as u32, &mut reg_write),
                    Sltu => set_alu(&mut self.state, rd, (r1 < r2) as u32, &mut reg_write),
                    Xor => set_alu(&mut self.state, rd, r1 ^ r2, &mut reg_write),
                    Srl => set_alu(&mut self.state, rd, r1 >> (r2 & 31), &mut reg_write),
                    Sra => set_alu(&mut self.state, rd, ((r1 as i32) >> (r2 & 31)) as u32, &mut reg_write),
                    Or => set_alu(&mut self.state, rd, r1 | r2, &mut reg_write),
                    And => set_alu(&mut self.state, rd, r1 & r2, &mut reg_write),
                    Fence => {}
                    Ecall => return Err(TrapCause::EnvironmentCall { pc }),
                    Ebreak => return Err(TrapCause::Breakpoint { pc }),
                }
            }
        }
        Ok((next, cycles, reg_write, mem_write))
    }

    /// True when the candidate second-slot instruction resolves to a
    /// single-cycle on-chip access (or has no memory access at all).
    fn pair_addr_ok(&self, inst: &Instruction) -> bool {
        if !is_mem_op(inst) {
            return true;
        }
        if let Instruction::Base { rs1, imm, .. } = inst {
            let addr = self.state.reg(*rs1).wrapping_add(*imm as u32);
            matches!(self.region_of(addr), Some((Region::Fm | Region::Weight, _)))
        } else {
            false
        }
    }

    /// Execute one issue step (one instruction, or a conv+op pair when the
    /// pipeline flag is on). Appends to `trace` when given.
    pub fn step(&mut self, mut trace: Option<&mut Vec<TraceEntry>>) -> Result<(), TrapCause> {
        debug_assert!(!self.state.halted);
        self.sync_dma();
        let pc = self.state.pc;
        let i0 = self.fetch(pc)?;

        if self.cfg.core.cim_pairing && i0.is_cim_conv() {
            if let Ok(i1) = self.fetch(pc.wrapping_add(4)) {
                if pairable_shape(&i1) && self.pair_addr_ok(&i1) {
                    let cycle = self.state.cycle;
                    let (_, _, _, mw0) = self.exec_one(pc, i0)?;
                    if let Some(t) = trace.as_deref_mut() {
                        t.push(TraceEntry { cycle, pc, inst: i0, reg_write: None, mem_write: mw0 });
                    }
                    self.retired += 1;
                    self.state.pc = pc.wrapping_add(4);
                    // Second slot retires in the same cycle.
                    let pc1 = self.state.pc;
                    let (next, _, rw1, mw1) = self.exec_one(pc1, i1)?;
                    if let Some(t) = trace.as_deref_mut() {
                        t.push(TraceEntry {
                            cycle,
                            pc: pc1,
                            inst: i1,
                            reg_write: rw1,
                            mem_write: mw1,
                        });
                    }
                    self.retired += 1;
                    self.state.pc = next;
                    self.state.cycle = cycle + 1;
                    return Ok(());
                }
            }
        }

        let cycle = self.state.cycle;
        let (next, cycles, rw, mw) = self.exec_one(pc, i0)?;
        if let Some(t) = trace.as_deref_mut() {
            t.push(TraceEntry { cycle, pc, inst: i0, reg_write: rw, mem_write: mw });
        }
        self.retired += 1;
        self.state.pc = next;
        self.state.cycle = cycle + cycles;
        Ok(())
    }

    /// Run until halt (jump-to-self), trap, or the cycle budget runs out.
    pub fn run(&mut self, max_cycles: u64, mut trace: Option<&mut Vec<TraceEntry>>) -> RunOutcome {
        loop {
            if self.state.halted {
                return RunOutcome {
                    reason: StopReason::Halted,
                    cycles: self.state.cycle,
                    retired: self.retired,
                };
            }
            if self.state.cycle >= max_cycles {
                return RunOutcome {
                    reason: StopReason::Timeout,
                    cycles: self.state.cycle,
                    retired: self.retired,
                };
            }
            if let Err(trap) = self.step(trace.as_deref_mut()) {
                return RunOutcome {
                    reason: StopReason::Trap(trap),
                    cycles: self.state.cycle,
                    retired: self.retired,
                };
            }
        }
    }
}

#[inline]
fn set_alu(state: &mut MachineState, rd: u8, v: u32, reg_write: &mut Option<(u8, u32)>) {
    state.set_reg(rd, v);
    *reg_write = Some((rd, v));
}
