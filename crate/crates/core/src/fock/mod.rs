//! Truncated symmetric Fock space `⊕_{k ≤ K} Sym^k(ℂ^n)`.
//!
//! Basis vectors `|α⟩`, `α ∈ ℕⁿ`, are ordered level-major (`|α|` ascending)
//! and, inside a level, lexicographically descending: for `n = 2` the order
//! is `(0,0), (1,0), (0,1), (2,0), (1,1), (0,2), ...`. Operators that would
//! leave level `K` are compressed (their rows beyond `K` are dropped).

mod dump;
mod operator;
#[cfg(test)]
mod operator_tests;

pub use dump::{parse_dump, write_dump};
pub use operator::{FockOperator, LevelBand};

use crate::error::{Error, Result};
use std::collections::HashMap;
use std::sync::Arc;

/// Default cap on the truncated dimension `C(n+K, K)`.
pub const DEFAULT_MAX_DIM: usize = 20_000;

/// Ordered multi-index basis up to level `K`.
#[derive(Debug, PartialEq, Eq)]
pub struct FockTruncation {
    n: usize,
    top: usize,
    basis: Vec<Vec<u32>>,
    level_offsets: Vec<usize>,
    index: HashMap<Vec<u32>, usize>,
}

pub fn binomial(n: usize, k: usize) -> Option<usize> {
    let k = k.min(n.saturating_sub(k));
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > usize::MAX as u128 {
            return None;
        }
    }
    Some(acc as usize)
}

fn push_level(n: usize, k: usize, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if prefix.len() + 1 == n {
        prefix.push(k as u32);
        out.push(prefix.clone());
        prefix.pop();
        return;
    }
    for first in (0..=k).rev() {
        prefix.push(first as u32);
        push_level(n, k - first, prefix, out);
        prefix.pop();
    }
}

impl FockTruncation {
    /// Basis for `n` modes up to level `top` with the default cap.
    pub fn new(n: usize, top: usize) -> Result<Arc<Self>> {
        Self::with_cap(n, top, DEFAULT_MAX_DIM)
    }

    pub fn with_cap(n: usize, top: usize, cap: usize) -> Result<Arc<Self>> {
        if n == 0 {
            return Err(Error::Input("Fock space needs at least one mode".into()));
        }
        let dim = binomial(n + top, top).ok_or(Error::CapExceeded { dim: usize::MAX, cap })?;
        if dim > cap {
            return Err(Error::CapExceeded { dim, cap });
        }
        let mut basis = Vec::with_capacity(dim);
        let mut level_offsets = Vec::with_capacity(top + 2);
        for k in 0..=top {
            level_offsets.push(basis.len());
            push_level(n, k, &mut Vec::with_capacity(n), &mut basis);
        }
        level_offsets.push(basis.len());
        debug_assert_eq!(basis.len(), dim);
        let index = basis.iter().enumerate().map(|(i, a)| (a.clone(), i)).collect();
        Ok(Arc::new(Self { n, top, basis, level_offsets, index }))
    }

    pub fn modes(&self) -> usize {
        self.n
    }

    /// Top level `K` (inclusive).
    pub fn top_level(&self) -> usize {
        self.top
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<u32>] {
        &self.basis
    }

    /// Start index of each level, followed by `dim()`.
    pub fn level_offsets(&self) -> &[usize] {
        &self.level_offsets
    }

    pub fn level_range(&self, k: usize) -> std::ops::Range<usize> {
        self.level_offsets[k]..self.level_offsets[k + 1]
    }

    pub fn level_size(&self, k: usize) -> usize {
        self.level_offsets[k + 1] - self.level_offsets[k]
    }

    pub fn level_of(&self, i: usize) -> usize {
        self.basis[i].iter().map(|&a| a as usize).sum()
    }

    pub fn index_of(&self, alpha: &[u32]) -> Option<usize> {
        self.index.get(alpha).copied()
    }
}
