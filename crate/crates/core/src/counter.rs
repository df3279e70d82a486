use std::sync::atomic::{AtomicU64, Ordering};

use num_bigint::BigUint;

/// Scalar operation tally shared by every kernel that takes part in one
/// computation. Updates are atomic, so sub-products evaluated on worker
/// threads count into the same handle.
#[derive(Debug, Default)]
pub struct OpCounter {
    mults: AtomicU64,
    adds: AtomicU64,
}

impl OpCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_mults(&self, n: u64) {
        self.mults.fetch_add(n, Ordering::Relaxed);
    }

    pub fn add_adds(&self, n: u64) {
        self.adds.fetch_add(n, Ordering::Relaxed);
    }

    pub fn mults(&self) -> BigUint {
        BigUint::from(self.mults.load(Ordering::Relaxed))
    }

    pub fn adds(&self) -> BigUint {
        BigUint::from(self.adds.load(Ordering::Relaxed))
    }

    pub fn total(&self) -> BigUint {
        self.mults() + self.adds()
    }

    pub fn snapshot(&self) -> OpCount {
        OpCount {
            mults: self.mults.load(Ordering::Relaxed),
            adds: self.adds.load(Ordering::Relaxed),
        }
    }

    pub fn reset(&self) {
        self.mults.store(0, Ordering::Relaxed);
        self.adds.store(0, Ordering::Relaxed);
    }
}

/// Plain copy of a counter's state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize)]
pub struct OpCount {
    pub mults: u64,
    pub adds: u64,
}

impl OpCount {
    pub fn total(&self) -> u64 {
        self.mults + self.adds
    }
}

pub(crate) fn tally_mults(counter: Option<&OpCounter>, n: usize) {
    if let Some(c) = counter {
        c.add_mults(n as u64);
    }
}

pub(crate) fn tally_adds(counter: Option<&OpCounter>, n: usize) {
    if let Some(c) = counter {
        c.add_adds(n as u64);
    }
}
