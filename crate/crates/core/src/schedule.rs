//! Straight-line exponentiation schedules from addition chains.
//!
//! Register `t_j` holds `base^{s_j}`; every chain step becomes one
//! multiplication and registers are never overwritten.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::chain::AdditionChain;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScheduleError {
    #[error("modulus must be at least 2, got {0}")]
    BadModulus(u64),
}

/// `t_dest := t_left * t_right`
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(into = "[usize; 3]")]
pub struct Instruction {
    pub dest: usize,
    pub left: usize,
    pub right: usize,
}

impl From<Instruction> for [usize; 3] {
    fn from(i: Instruction) -> Self {
        [i.dest, i.left, i.right]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Schedule {
    pub exponent: u64,
    pub instructions: Vec<Instruction>,
}

pub fn emit(chain: &AdditionChain) -> Schedule {
    let instructions = chain
        .indexed_steps()
        .map(|(j, s)| Instruction {
            dest: j,
            left: s.left,
            right: s.right,
        })
        .collect();
    Schedule {
        exponent: chain.target(),
        instructions,
    }
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    (a as u128 * b as u128 % m as u128) as u64
}

impl Schedule {
    pub fn multiplications(&self) -> usize {
        self.instructions.len()
    }

    /// `base^exponent mod modulus`.
    pub fn evaluate(&self, base: u64, modulus: u64) -> Result<u64, ScheduleError> {
        if modulus < 2 {
            return Err(ScheduleError::BadModulus(modulus));
        }
        // registers[0] is unused so indices match t_1, t_2, ...
        let mut registers = vec![0u64; self.instructions.len() + 2];
        registers[1] = base % modulus;
        for ins in &self.instructions {
            registers[ins.dest] = mul_mod(registers[ins.left], registers[ins.right], modulus);
        }
        Ok(registers[self.instructions.len() + 1])
    }
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for ins in &self.instructions {
            writeln!(f, "t{} = t{} * t{}", ins.dest, ins.left, ins.right)?;
        }
        Ok(())
    }
}
