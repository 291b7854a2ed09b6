//! Symbolic cylinder sets, optionally crossed with a fiber interval.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum FiberRange {
    /// The whole fiber `[0, roof)` over each base point.
    Full,
    /// Half-open interval `[start, end)` of fiber heights.
    Interval(f64, f64),
}

impl FiberRange {
    /// Length of the range intersected with `[0, roof)`.
    pub fn length_within(&self, roof: f64) -> f64 {
        match *self {
            FiberRange::Full => roof,
            FiberRange::Interval(a, b) => (b.min(roof) - a.max(0.0)).max(0.0),
        }
    }

    pub fn is_empty(&self) -> bool {
        matches!(*self, FiberRange::Interval(a, b) if b <= a)
    }
}

/// Set of points whose symbols on coordinates `lo .. lo + word.len()` equal `word`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CylinderSet {
    pub lo: i64,
    pub word: Vec<u8>,
    pub fiber: FiberRange,
    /// Order of the Bowen ball this cylinder was produced from, if any.
    pub order: Option<f64>,
}

impl CylinderSet {
    pub fn new(lo: i64, word: Vec<u8>) -> Self {
        CylinderSet {
            lo,
            word,
            fiber: FiberRange::Full,
            order: None,
        }
    }

    pub fn with_fiber(mut self, fiber: FiberRange) -> Self {
        self.fiber = fiber;
        self
    }

    /// Last fixed coordinate (inclusive). Equals `lo - 1` for the empty word.
    pub fn hi(&self) -> i64 {
        self.lo + self.word.len() as i64 - 1
    }

    pub fn symbol(&self, coord: i64) -> Option<u8> {
        if coord < self.lo || coord > self.hi() {
            None
        } else {
            Some(self.word[(coord - self.lo) as usize])
        }
    }

    /// Base-set inclusion `self ⊆ other` (fiber ranges ignored).
    pub fn is_subset_of(&self, other: &CylinderSet) -> bool {
        if other.word.is_empty() {
            return true;
        }
        if other.lo < self.lo || other.hi() > self.hi() {
            return false;
        }
        (other.lo..=other.hi()).all(|c| self.symbol(c) == other.symbol(c))
    }

    /// Shift the coordinate labels by `-n` (the base map applied `n` times).
    pub fn shifted(&self, n: i64) -> Self {
        let mut c = self.clone();
        c.lo -= n;
        c
    }
}

/// Letters `a, b, c, ...` for symbols `0, 1, 2, ...`.
pub fn format_word(word: &[u8]) -> String {
    word.iter().map(|&s| (b'a' + s) as char).collect()
}

pub fn parse_word(text: &str) -> Option<Vec<u8>> {
    text.bytes()
        .map(|b| if b.is_ascii_lowercase() { Some(b - b'a') } else { None })
        .collect()
}
