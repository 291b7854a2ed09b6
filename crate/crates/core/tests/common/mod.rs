//! Exhaustive enumeration of antichain covers on small trees.

#![allow(dead_code)]

use std::collections::HashMap;

use carathedyn_core::points::overwrite;
use carathedyn_core::symbolic::{SuspensionSystem, SymbolicPoint};

const ENUMERATION_LIMIT: usize = 2_000_000;

pub type Cover = Vec<Vec<u8>>;

pub struct Brute<'a> {
    sys: &'a SuspensionSystem,
    anchor: SymbolicPoint,
    alpha: f64,
    cutoff: f64,
    cap: usize,
    weights: HashMap<Vec<u8>, Option<f64>>,
}

impl<'a> Brute<'a> {
    pub fn new(sys: &'a SuspensionSystem, anchor: SymbolicPoint, alpha: f64, cutoff: f64, cap: usize) -> Self {
        Brute {
            sys,
            anchor,
            alpha,
            cutoff,
            cap,
            weights: HashMap::new(),
        }
    }

    /// Weight of the ball fixing `word` on coordinates 1.., or `None` when its
    /// order is below the cutoff.
    fn weight(&mut self, word: &[u8]) -> Option<f64> {
        if let Some(w) = self.weights.get(word) {
            return *w;
        }
        let x = if word.is_empty() {
            self.anchor.clone()
        } else {
            overwrite(self.sys, &self.anchor, 1, word).unwrap().with_fiber(self.anchor.fiber())
        };
        let d = word.len() as i64;
        let t: f64 = (0..d).map(|j| self.sys.roof_at_coord(&x, j)).sum::<f64>() - x.fiber();
        let w = (word.len() >= self.sys.k_r && t >= self.cutoff - 1e-9)
            .then(|| (self.sys.birkhoff(&x, t) - self.alpha * t).exp());
        self.weights.insert(word.to_vec(), w);
        w
    }

    /// Every antichain below `word` meeting each path to the cap exactly once.
    pub fn covers(&mut self, word: &[u8]) -> Vec<Cover> {
        let own = self.weight(word).map(|_| vec![word.to_vec()]);
        if word.len() == self.cap {
            return own.into_iter().collect();
        }
        let last = *word.last().unwrap_or(&self.anchor.symbol(0));
        let kids: Vec<u8> = self.sys.sft.successors(last).collect();
        let mut combined: Vec<Cover> = vec![vec![]];
        for s in kids {
            let mut child = word.to_vec();
            child.push(s);
            let below = self.covers(&child);
            assert!(combined.len() * below.len() <= ENUMERATION_LIMIT, "tree too large to enumerate");
            combined = combined
                .iter()
                .flat_map(|a| {
                    below.iter().map(move |b| {
                        let mut c = a.clone();
                        c.extend(b.iter().cloned());
                        c
                    })
                })
                .collect();
        }
        combined.extend(own);
        combined
    }

    pub fn total(&mut self, cover: &Cover) -> f64 {
        cover.iter().map(|w| self.weight(w).unwrap()).sum()
    }

    pub fn minimum(&mut self, prefix: &[u8]) -> (f64, usize) {
        let all = self.covers(prefix);
        let n = all.len();
        let best = all.iter().map(|c| self.total(c)).fold(f64::INFINITY, f64::min);
        (best, n)
    }
}

pub fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs())
}

