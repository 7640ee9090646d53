use crate::error::{Error, Result};

/// Desk-scale resource limits. Every expensive operation checks the relevant
/// field before allocating.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    /// Largest variable count `m` for a closure.
    pub max_vars: usize,
    /// Largest number of linear terms over `m` variables.
    pub max_universe: usize,
    /// Largest single operation table, in cells.
    pub max_table_cells: u64,
    /// Largest number of candidates an exhaustive enumeration may visit.
    pub max_enumeration: u64,
    /// Largest carrier for automorphism search and census runs.
    pub max_carrier: usize,
    pub max_samples: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_vars: 7,
            max_universe: 2_000_000,
            max_table_cells: 100_000_000,
            max_enumeration: 1 << 24,
            max_carrier: 64,
            max_samples: 1_000_000,
        }
    }
}

impl Budget {
    pub fn with_max_vars(mut self, max_vars: usize) -> Self {
        self.max_vars = max_vars;
        self
    }

    pub(crate) fn check_vars(&self, m: usize) -> Result<()> {
        if m > self.max_vars {
            return Err(Error::Budget(format!(
                "{m} variables exceeds the limit of {} (raise it with --max-vars)",
                self.max_vars
            )));
        }
        Ok(())
    }

    pub(crate) fn check_carrier(&self, n: usize) -> Result<()> {
        if n > self.max_carrier {
            return Err(Error::Budget(format!("carrier size {n} exceeds the limit of {}", self.max_carrier)));
        }
        Ok(())
    }

    pub(crate) fn check_enumeration(&self, what: &str, count: Option<u64>) -> Result<u64> {
        match count {
            Some(c) if c <= self.max_enumeration => Ok(c),
            _ => Err(Error::Budget(format!(
                "{what} would visit more than {} candidates",
                self.max_enumeration
            ))),
        }
    }
}

/// `base^exp` with overflow reported as `None`.
pub(crate) fn checked_pow(base: u64, exp: usize) -> Option<u64> {
    let exp = u32::try_from(exp).ok()?;
    base.checked_pow(exp)
}
