//! Seeded random points and related point pairs for the sampled checks.

use rand::seq::IteratorRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::points::point_with_word;
use crate::symbolic::{Sft, SuspensionSystem, SymbolicPoint};

pub type SampleRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SampleRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random admissible word of length `len`, starting at `start` if given.
pub fn random_word(sft: &Sft, len: usize, start: Option<u8>, rng: &mut SampleRng) -> Vec<u8> {
    let mut w = Vec::with_capacity(len);
    if len == 0 {
        return w;
    }
    let first = start.unwrap_or_else(|| rng.gen_range(0..sft.alphabet_size() as u8));
    w.push(first);
    while w.len() < len {
        let next = sft.successors(*w.last().unwrap()).choose(rng).expect("no successor");
        w.push(next);
    }
    w
}

/// Random word of length `len` ending at `end`, listed in coordinate order.
pub fn random_word_ending(sft: &Sft, len: usize, end: u8, rng: &mut SampleRng) -> Vec<u8> {
    let mut w = vec![end];
    while w.len() < len {
        let prev = sft.predecessors(*w.last().unwrap()).choose(rng).expect("no predecessor");
        w.push(prev);
    }
    w.reverse();
    w
}

/// Point with a random word on `[−m, n]` and a uniform fiber height.
pub fn random_point(sys: &SuspensionSystem, m: usize, n: usize, rng: &mut SampleRng) -> Result<SymbolicPoint> {
    let w = random_word(&sys.sft, m + n + 1, None, rng);
    let p = point_with_word(sys, -(m as i64), &w, 0.0)?;
    let f = rng.gen_range(0.0..sys.roof_at(&p));
    Ok(p.with_fiber(f))
}

/// Point with `x`'s symbols from coordinate `cut` on, a random past below it
/// and a uniform fiber height.
pub fn weak_stable_partner(sys: &SuspensionSystem, x: &SymbolicPoint, cut: i64, rng: &mut SampleRng) -> Result<SymbolicPoint> {
    let prev = sys.sft.predecessors(x.symbol(cut)).choose(rng).expect("no predecessor");
    let mut word = random_word_ending(&sys.sft, 4, prev, rng);
    word.extend(x.symbols(cut, cut.max(0)));
    let donor = point_with_word(sys, cut - 4, &word, 0.0)?;
    let p = SymbolicPoint::splice(sys, &donor, x, cut, 0.0)?;
    let f = rng.gen_range(0.0..sys.roof_at(&p));
    Ok(p.with_fiber(f))
}

/// Point with `x`'s symbols below `cut`, a random future from `cut` on and a
/// uniform fiber height.
pub fn weak_unstable_partner(sys: &SuspensionSystem, x: &SymbolicPoint, cut: i64, rng: &mut SampleRng) -> Result<SymbolicPoint> {
    let lo = cut.min(0);
    let next = sys.sft.successors(x.symbol(cut - 1)).choose(rng).expect("no successor");
    let mut word = if lo < cut { x.symbols(lo, cut - 1) } else { vec![] };
    word.extend(random_word(&sys.sft, 4, Some(next), rng));
    let donor = point_with_word(sys, lo, &word, 0.0)?;
    let p = SymbolicPoint::splice(sys, x, &donor, cut, 0.0)?;
    let f = rng.gen_range(0.0..sys.roof_at(&p));
    Ok(p.with_fiber(f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::system;

    #[test]
    fn partners_share_the_right_half() {
        let sys = system("GOLD");
        let mut r = rng(3);
        for cut in [-2i64, 0, 1, 3] {
            let x = random_point(&sys, 3, 3, &mut r).unwrap();
            let y = weak_stable_partner(&sys, &x, cut, &mut r).unwrap();
            assert!((cut..cut + 10).all(|c| x.symbol(c) == y.symbol(c)));
            let z = weak_unstable_partner(&sys, &x, cut, &mut r).unwrap();
            assert!((cut - 10..cut).all(|c| x.symbol(c) == z.symbol(c)));
        }
    }

    #[test]
    fn words_are_admissible_and_seeded() {
        let sys = system("GOLD");
        let a = random_word(&sys.sft, 12, None, &mut rng(1));
        let b = random_word(&sys.sft, 12, None, &mut rng(1));
        assert_eq!(a, b);
        assert!(sys.sft.is_admissible(&a));
        let c = random_word_ending(&sys.sft, 6, 1, &mut rng(2));
        assert!(sys.sft.is_admissible(&c) && c[5] == 1);
    }
}
