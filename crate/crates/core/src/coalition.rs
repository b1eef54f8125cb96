//! Canonical feature-subset encoding.

use serde::{Deserialize, Serialize};
use std::fmt;

/// Largest player count representable by [`Coalition`].
pub const MAX_PLAYERS: usize = 63;

/// A subset of `{0, .., d-1}` stored as a bit mask; bit `i` set means
/// feature `i` is present. Mask order doubles as the canonical enumeration
/// order of the power set.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Coalition(u64);

impl Coalition {
    pub const EMPTY: Coalition = Coalition(0);

    pub fn from_bits(bits: u64) -> Self {
        Coalition(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    /// All `d` players.
    pub fn full(d: usize) -> Self {
        debug_assert!(d <= MAX_PLAYERS);
        if d == 0 {
            Coalition(0)
        } else {
            Coalition(u64::MAX >> (64 - d))
        }
    }

    pub fn singleton(i: usize) -> Self {
        Coalition(1 << i)
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(indices: I) -> Self {
        Coalition(indices.into_iter().fold(0, |acc, i| acc | (1 << i)))
    }

    pub fn contains(self, i: usize) -> bool {
        i < 64 && self.0 >> i & 1 == 1
    }

    pub fn with(self, i: usize) -> Self {
        Coalition(self.0 | 1 << i)
    }

    pub fn without(self, i: usize) -> Self {
        Coalition(self.0 & !(1 << i))
    }

    pub fn union(self, other: Coalition) -> Self {
        Coalition(self.0 | other.0)
    }

    pub fn is_subset_of(self, other: Coalition) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    /// Member indices in increasing order.
    pub fn members(self) -> Members {
        Members(self.0)
    }

    /// Complement within `{0, .., d-1}`.
    pub fn complement(self, d: usize) -> Self {
        Coalition(!self.0 & Coalition::full(d).0)
    }

    /// Every subset of `{0, .., d-1}` in mask order.
    pub fn all(d: usize) -> impl Iterator<Item = Coalition> {
        (0..1u64 << d).map(Coalition)
    }
}

impl fmt::Debug for Coalition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.members()).finish()
    }
}

pub struct Members(u64);

impl Iterator for Members {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let i = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(i)
    }
}
