use crate::error::{Error, Result};

/// Hard limits on the size of intermediate objects. Exceeding one is an error,
/// never a silent truncation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    /// Maximum number of entries in a rule table.
    pub max_table: u64,
    /// Maximum number of enumerated random assignments (or candidate windows).
    pub max_enum: u64,
    /// Maximum number of automaton or graph states.
    pub max_states: u64,
    /// Maximum period of a periodic configuration.
    pub max_period: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { max_table: 4_000_000, max_enum: 50_000_000, max_states: 2_000_000, max_period: 1_000_000 }
    }
}

impl Budget {
    pub(crate) fn check_table(&self, what: &str, needed: Option<u128>) -> Result<()> {
        check(what, needed, self.max_table)
    }

    pub(crate) fn check_enum(&self, what: &str, needed: Option<u128>) -> Result<()> {
        check(what, needed, self.max_enum)
    }

    pub(crate) fn check_states(&self, what: &str, needed: Option<u128>) -> Result<()> {
        check(what, needed, self.max_states)
    }
}

fn check(what: &str, needed: Option<u128>, limit: u64) -> Result<()> {
    match needed {
        Some(n) if n <= limit as u128 => Ok(()),
        Some(n) => Err(Error::budget(what, n, limit as u128)),
        None => Err(Error::budget(what, "more than 2^128", limit as u128)),
    }
}

/// `base^exp` in `u128`, `None` on overflow.
pub(crate) fn pow128(base: usize, exp: usize) -> Option<u128> {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = acc.checked_mul(base as u128)?;
    }
    Some(acc)
}

/// Running count of enumerated items against a limit.
#[derive(Debug)]
pub(crate) struct Meter {
    what: &'static str,
    used: u128,
    limit: u64,
}

impl Meter {
    pub(crate) fn new(what: &'static str, limit: u64) -> Self {
        Meter { what, used: 0, limit }
    }

    pub(crate) fn spend(&mut self, n: u128) -> Result<()> {
        self.used = self.used.saturating_add(n);
        if self.used > self.limit as u128 {
            return Err(Error::budget(self.what, self.used, self.limit as u128));
        }
        Ok(())
    }
}
