//! Per-thread operation counters for the token-side primitives.

use std::cell::Cell;
use std::ops::Sub;

thread_local! {
    static PRF: Cell<u64> = const { Cell::new(0) };
    static FIXED_BASE_EXP: Cell<u64> = const { Cell::new(0) };
    static SIGN: Cell<u64> = const { Cell::new(0) };
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OpCounts {
    pub prf_evals: u64,
    pub fixed_base_exps: u64,
    pub signatures: u64,
}

impl Sub for OpCounts {
    type Output = OpCounts;

    fn sub(self, rhs: OpCounts) -> OpCounts {
        OpCounts {
            prf_evals: self.prf_evals - rhs.prf_evals,
            fixed_base_exps: self.fixed_base_exps - rhs.fixed_base_exps,
            signatures: self.signatures - rhs.signatures,
        }
    }
}

pub fn snapshot() -> OpCounts {
    OpCounts {
        prf_evals: PRF.with(Cell::get),
        fixed_base_exps: FIXED_BASE_EXP.with(Cell::get),
        signatures: SIGN.with(Cell::get),
    }
}

pub(crate) fn count_prf() {
    PRF.with(|c| c.set(c.get() + 1));
}

pub(crate) fn count_fixed_base_exp(n: u64) {
    FIXED_BASE_EXP.with(|c| c.set(c.get() + n));
}

pub(crate) fn count_sign() {
    SIGN.with(|c| c.set(c.get() + 1));
}
