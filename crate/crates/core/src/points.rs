//! Building admissible points around prescribed finite words.

use crate::error::{Error, Result};
use crate::symbolic::{Sft, SuspensionSystem, SymbolicPoint};

/// Shortest cycle through `v`, returned starting at `v`.
fn cycle_through(sft: &Sft, v: u8) -> Vec<u8> {
    let n = sft.alphabet_size();
    let mut parent: Vec<Option<u8>> = vec![None; n];
    let mut queue = std::collections::VecDeque::new();
    for s in sft.successors(v) {
        if s == v {
            return vec![v];
        }
        if parent[s as usize].is_none() {
            parent[s as usize] = Some(v);
            queue.push_back(s);
        }
    }
    while let Some(u) = queue.pop_front() {
        for s in sft.successors(u) {
            if s == v {
                let mut path = vec![u];
                let mut cur = u;
                while let Some(p) = parent[cur as usize] {
                    if p == v {
                        break;
                    }
                    path.push(p);
                    cur = p;
                }
                path.push(v);
                path.reverse();
                return path;
            }
            if parent[s as usize].is_none() {
                parent[s as usize] = Some(u);
                queue.push_back(s);
            }
        }
    }
    unreachable!("every symbol of a primitive shift lies on a cycle")
}

/// A point carrying `word` on coordinates `lo..`, continued periodically on
/// both sides along short cycles through the end symbols.
pub fn point_with_word(sys: &SuspensionSystem, lo: i64, word: &[u8], fiber: f64) -> Result<SymbolicPoint> {
    if word.is_empty() {
        return Err(Error::InadmissiblePoint("empty word".into()));
    }
    if !sys.sft.is_admissible(word) {
        return Err(Error::InadmissiblePoint(format!(
            "word {} is not admissible",
            crate::cylinder::format_word(word)
        )));
    }
    let hi = lo + word.len() as i64 - 1;
    // pad to cover coordinate 0
    let mut lo = lo;
    let mut window = word.to_vec();
    if hi < 0 {
        let last = *window.last().unwrap();
        let c = cycle_through(&sys.sft, last);
        let mut k = 1;
        while lo + (window.len() as i64) - 1 < 0 {
            window.push(c[k % c.len()]);
            k += 1;
        }
    }
    if lo > 0 {
        let first = window[0];
        let c = cycle_through(&sys.sft, first);
        let mut k = c.len() - 1;
        while lo > 0 {
            window.insert(0, c[k]);
            k = if k == 0 { c.len() - 1 } else { k - 1 };
            lo -= 1;
        }
    }
    let last = *window.last().unwrap();
    let fc = cycle_through(&sys.sft, last);
    let mut future_cycle: Vec<u8> = fc[1..].to_vec();
    future_cycle.push(last);
    let past_cycle = cycle_through(&sys.sft, window[0]);
    SymbolicPoint::new(sys, lo, window, past_cycle, future_cycle, fiber)
}

/// Same as [`point_with_word`] but keeps the tails of `base` outside
/// `[lo, lo + word.len())` wherever the joins allow it.
pub fn overwrite(sys: &SuspensionSystem, base: &SymbolicPoint, lo: i64, word: &[u8]) -> Result<SymbolicPoint> {
    let hi = lo + word.len() as i64 - 1;
    let with = point_with_word(sys, lo, word, 0.0)?;
    let left = if sys.sft.allowed(base.symbol(lo - 1), word[0]) {
        SymbolicPoint::splice(sys, base, &with, lo, base.fiber())?
    } else {
        with.with_fiber(base.fiber())
    };
    if sys.sft.allowed(word[word.len() - 1], base.symbol(hi + 1)) {
        SymbolicPoint::splice(sys, &left, base, hi + 1, base.fiber())
    } else {
        Ok(left)
    }
}
