//! Size guards for the exponential-cost exact routines.
//!
//! `DIMERLOOPS_BUDGET` overrides the defaults. A bare integer replaces the
//! enumeration vertex budget; `key=value` pairs separated by commas set
//! individual guards, e.g. `enum=40,transfer=33554432,mdd=18`.

use crate::error::{Error, Result};

pub const ENV_VAR: &str = "DIMERLOOPS_BUDGET";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    /// Largest lattice (in vertices) the backtracking enumerator accepts.
    pub enum_vertices: usize,
    /// Largest number of (boundary, interface) state pairs for the transfer matrix.
    pub transfer_states: u128,
    /// Largest lattice for full monomer-set sweeps at positive activity.
    pub mdd_vertices: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            enum_vertices: 36,
            transfer_states: 1 << 24,
            mdd_vertices: 16,
        }
    }
}

impl Budget {
    /// Defaults with the environment override applied.
    pub fn from_env() -> Result<Self> {
        match std::env::var(ENV_VAR) {
            Ok(text) => Self::parse(&text),
            Err(_) => Ok(Self::default()),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut b = Self::default();
        let text = text.trim();
        if text.is_empty() {
            return Ok(b);
        }
        if let Ok(n) = text.parse::<usize>() {
            b.enum_vertices = n;
            return Ok(b);
        }
        for part in text.split(',') {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| Error::InvalidArgument(format!("bad budget entry {part:?}")))?;
            let value = value.trim();
            let bad = |_| Error::InvalidArgument(format!("bad budget value {value:?}"));
            match key.trim() {
                "enum" => b.enum_vertices = value.parse().map_err(bad)?,
                "transfer" => b.transfer_states = value.parse().map_err(bad)?,
                "mdd" => b.mdd_vertices = value.parse().map_err(bad)?,
                other => {
                    return Err(Error::InvalidArgument(format!(
                        "unknown budget key {other:?}"
                    )))
                }
            }
        }
        Ok(b)
    }

    pub fn unlimited() -> Self {
        Budget {
            enum_vertices: usize::MAX,
            transfer_states: u128::MAX,
            mdd_vertices: usize::MAX,
        }
    }

    pub fn check_enum(&self, vertices: usize) -> Result<()> {
        if vertices > self.enum_vertices {
            return Err(Error::Budget {
                what: "cover enumeration",
                needed: vertices as u128,
                budget: self.enum_vertices as u128,
            });
        }
        Ok(())
    }

    pub fn check_mdd(&self, vertices: usize) -> Result<()> {
        if vertices > self.mdd_vertices {
            return Err(Error::Budget {
                what: "monomer-set sweep",
                needed: vertices as u128,
                budget: self.mdd_vertices as u128,
            });
        }
        Ok(())
    }
}
