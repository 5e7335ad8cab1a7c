//! Simulator for an RV32I core extended with single-cycle compute-in-memory
//! (CIM) instructions, a ternary SRAM CIM macro, a latency-modeled memory
//! system, and a scheduling compiler for binary CNN inference.

pub mod cim;
pub mod config;
pub mod cpu;
pub mod isa;
pub mod kws;
pub mod mem;
pub mod report;
pub mod sched;
pub mod system;
