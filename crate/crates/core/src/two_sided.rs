//! The measure `m` built directly from two-sided Bowen balls with the
//! flow-direction constraint `|β| < r/(s+t)` and weights
//! `e^{Φ(f_{−s}x, s+t) − (s+t)P}/(s+t)`.
//!
//! Symbolically a ball fixes coordinates `[−m(s) − k_r, n(t) + k_r]` and a
//! fiber window. For a node of the DP the forward and backward roof sums
//! `F`, `B` fix `s + t = B + F` whatever the center's height, so the weight
//! of a node does not depend on where its centers sit. Covering a fiber
//! interval of length `ℓ` takes `⌈ℓ(s+t)/r_unit⌉` balls.
//!
//! Only systems whose roof and potential read coordinate 0 alone are
//! supported.

use std::collections::HashMap;

use serde::Serialize;

use crate::cover::{INFINITY_SENTINEL, MAX_MATERIALIZED};
use crate::cylinder::{format_word, CylinderSet, FiberRange};
use crate::error::{Error, Result};
use crate::oracle::{flow_pressure, OracleMeasure};
use crate::report::{ratio_spread, CheckRecord};
use crate::symbolic::{SuspensionSystem, SymbolicPoint};

const ORDER_EPS: f64 = 1e-9;
const TIE_EPS: f64 = 1e-12;

fn check_memory_one(sys: &SuspensionSystem) -> Result<()> {
    if sys.k_r + 1 > MAX_BUF {
        return Err(Error::Unsupported(format!("k_r above {} in two-sided balls", MAX_BUF - 1)));
    }
    if sys.roof.window() != (0, 0) || sys.potential.window() != (0, 0) {
        return Err(Error::Unsupported(
            "two-sided balls need roof and potential reading coordinate 0 only".into(),
        ));
    }
    Ok(())
}

fn roof(sys: &SuspensionSystem, s: u8) -> f64 {
    sys.roof.eval_word(&[s])
}

fn log_weight(sys: &SuspensionSystem, s: u8, pressure: f64) -> f64 {
    (sys.potential.eval_word(&[s]) - pressure) * roof(sys, s)
}

#[derive(Debug, Clone, Serialize)]
pub struct TwoSidedBall {
    #[serde(skip)]
    pub center: SymbolicPoint,
    pub s: f64,
    pub t: f64,
    pub lo: i64,
    pub word: Vec<u8>,
    pub beta_halfwidth: f64,
}

/// `B*_{s,t}(x)`: minimal depths with backward/forward roof sums reaching
/// `s`/`t`, each side extended by `k_r`, and fiber half-width `r_unit/(s+t)`.
pub fn bstar(sys: &SuspensionSystem, x: &SymbolicPoint, s: f64, t: f64) -> Result<TwoSidedBall> {
    if !(s >= 1.0 && t >= 1.0) {
        return Err(Error::NegativeOrder(s.min(t)));
    }
    let k_r = sys.k_r as i64;
    let mut n = 0i64;
    let mut reach = -x.fiber();
    while reach < t {
        reach += sys.roof_at_coord(x, n);
        n += 1;
    }
    let mut m = 0i64;
    let mut reach = x.fiber();
    while reach < s {
        m += 1;
        reach += sys.roof_at_coord(x, -m);
    }
    let lo = -(m + k_r);
    Ok(TwoSidedBall {
        center: x.clone(),
        s,
        t,
        lo,
        word: x.symbols(lo, n + k_r),
        beta_halfwidth: sys.r_unit / (s + t),
    })
}

impl TwoSidedBall {
    pub fn hi(&self) -> i64 {
        self.lo + self.word.len() as i64 - 1
    }

    /// Flow displacement from the center to `z`, matching coordinates through
    /// the shift counters.
    pub fn beta(&self, sys: &SuspensionSystem, z: &SymbolicPoint) -> f64 {
        let x = &self.center;
        let n = z.shifts() - x.shifts();
        let crossed: f64 = if n >= 0 {
            (0..n).map(|k| sys.roof_at_coord(x, k)).sum()
        } else {
            -(n..0).map(|k| sys.roof_at_coord(x, k)).sum::<f64>()
        };
        z.fiber() - x.fiber() + crossed
    }

    pub fn contains(&self, sys: &SuspensionSystem, z: &SymbolicPoint) -> bool {
        let n = z.shifts() - self.center.shifts();
        let matches = (self.lo..=self.hi()).all(|j| z.symbol(j - n) == self.word[(j - self.lo) as usize]);
        matches && self.beta(sys, z).abs() < self.beta_halfwidth
    }

    /// The ball as a cylinder over the center's fiber, clipped to the roof.
    pub fn as_cylinder(&self, sys: &SuspensionSystem) -> CylinderSet {
        let f = self.center.fiber();
        let top = sys.roof_at_coord(&self.center, 0);
        CylinderSet::new(self.lo, self.word.clone()).with_fiber(FiberRange::Interval(
            (f - self.beta_halfwidth).max(0.0),
            (f + self.beta_halfwidth).min(top),
        ))
    }
}

/// How the DP may split the order between past and future.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Split {
    Free,
    /// Refine whichever side has the smaller roof sum, so `s ≈ t`.
    Symmetric,
}

#[derive(Debug, Clone, Serialize)]
pub struct TwoSidedCoverEntry {
    pub lo: i64,
    pub word: String,
    /// Smallest backward and forward orders over the node's centers.
    pub s: f64,
    pub t: f64,
    pub s_plus_t: f64,
    pub fiber_count: u64,
    pub log_weight: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TwoSidedCoverResult {
    pub value: f64,
    pub cutoff_t: f64,
    pub depth_cap: usize,
    pub cover: Option<Vec<TwoSidedCoverEntry>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Choice {
    Take,
    Past,
    Future,
    Dead,
}

const MAX_BUF: usize = 8;

/// Up to `MAX_BUF` symbols in coordinate order.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
struct Buf {
    syms: [u8; MAX_BUF],
    len: u8,
}

impl Buf {
    fn from_slice(w: &[u8]) -> Self {
        let mut syms = [0u8; MAX_BUF];
        syms[..w.len()].copy_from_slice(w);
        Buf { syms, len: w.len() as u8 }
    }

    fn get(&self, i: usize) -> u8 {
        self.syms[i]
    }

    fn first(&self) -> u8 {
        self.syms[0]
    }

    fn last(&self) -> u8 {
        self.syms[self.len as usize - 1]
    }

    /// Prepends `s`, dropping the last symbol beyond `cap`.
    fn push_front(&self, s: u8, cap: usize) -> Self {
        let mut out = Buf {
            syms: [0; MAX_BUF],
            len: 0,
        };
        out.syms[0] = s;
        let keep = (self.len as usize).min(cap - 1);
        out.syms[1..=keep].copy_from_slice(&self.syms[..keep]);
        out.len = keep as u8 + 1;
        out
    }

    /// Appends `s`, dropping the first symbol beyond `cap`.
    fn push_back(&self, s: u8, cap: usize) -> Self {
        let mut out = *self;
        if (out.len as usize) < cap {
            out.syms[out.len as usize] = s;
            out.len += 1;
        } else {
            out.syms.copy_within(1..cap, 0);
            out.syms[cap - 1] = s;
        }
        out
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
struct Key {
    left: Buf,
    right: Buf,
    a: u16,
    b: u16,
    back: u64,
    fwd: u64,
}

/// A DP node: the word on `[−a, b]` is kept whole while it is short and as
/// its two boundary buffers of `k_r + 1` symbols after that.
#[derive(Clone, Copy)]
struct Node {
    left: Buf,
    right: Buf,
    a: usize,
    b: usize,
    back: f64,
    fwd: f64,
}

impl Node {
    fn key(&self) -> Key {
        Key {
            left: self.left,
            right: self.right,
            a: self.a as u16,
            b: self.b as u16,
            back: self.back.to_bits(),
            fwd: self.fwd.to_bits(),
        }
    }
}

struct Dp<'a> {
    sys: &'a SuspensionSystem,
    pressure: f64,
    cutoff: f64,
    cap: usize,
    split: Split,
    fiber: (f64, f64),
    buf: usize,
    memo: HashMap<Key, (f64, Choice)>,
}

impl<'a> Dp<'a> {
    fn take(&self, node: &Node) -> Option<f64> {
        let s_ok = self.fiber.0 + node.back >= self.cutoff - ORDER_EPS;
        let t_ok = node.fwd - self.fiber.1 >= self.cutoff - ORDER_EPS;
        if !(s_ok && t_ok) {
            return None;
        }
        let u = node.back + node.fwd;
        Some(self.fiber_count(u) as f64 / u)
    }

    fn fiber_count(&self, u: f64) -> u64 {
        let len = self.fiber.1 - self.fiber.0;
        ((len * u / self.sys.r_unit) - 1e-9).ceil().max(1.0) as u64
    }

    fn extend_past(&self, node: &Node, s: u8) -> (Node, f64) {
        let k_r = self.sys.k_r;
        let left = node.left.push_front(s, self.buf);
        let len = node.a + node.b + 2;
        let right = if len <= self.buf { left } else { node.right };
        let mut child = Node {
            left,
            right,
            a: node.a + 1,
            ..*node
        };
        let mut inc = 0.0;
        if child.a > k_r {
            let sym = child.left.get(k_r);
            child.back += roof(self.sys, sym);
            inc = log_weight(self.sys, sym, self.pressure);
        }
        (child, inc)
    }

    fn extend_future(&self, node: &Node, s: u8) -> (Node, f64) {
        let k_r = self.sys.k_r;
        let right = node.right.push_back(s, self.buf);
        let len = node.a + node.b + 2;
        let left = if len <= self.buf { right } else { node.left };
        let mut child = Node {
            left,
            right,
            b: node.b + 1,
            ..*node
        };
        let mut inc = 0.0;
        if child.b > k_r {
            // the newly counted coordinate b − k_r heads the old buffer
            let sym = node.right.first();
            child.fwd += roof(self.sys, sym);
            inc = log_weight(self.sys, sym, self.pressure);
        }
        (child, inc)
    }

    fn past_children(&self, node: &Node) -> Vec<(Node, f64)> {
        self.sys
            .sft
            .predecessors(node.left.first())
            .map(|s| self.extend_past(node, s))
            .collect()
    }

    fn future_children(&self, node: &Node) -> Vec<(Node, f64)> {
        self.sys
            .sft
            .successors(node.right.last())
            .map(|s| self.extend_future(node, s))
            .collect()
    }

    fn allow_past(&self, node: &Node) -> bool {
        node.a < self.cap && (self.split == Split::Free || node.back <= node.fwd + ORDER_EPS)
    }

    fn allow_future(&self, node: &Node) -> bool {
        node.b < self.cap && (self.split == Split::Free || node.fwd <= node.back + ORDER_EPS)
    }

    /// Optimal value relative to the node's own weight.
    fn value(&mut self, node: &Node) -> f64 {
        let key = node.key();
        if let Some(&(v, _)) = self.memo.get(&key) {
            return v;
        }
        let mut best = (f64::INFINITY, Choice::Dead);
        if let Some(v) = self.take(node) {
            best = (v, Choice::Take);
        }
        if self.allow_future(node) {
            let v: f64 = self
                .future_children(node)
                .iter()
                .map(|(c, inc)| inc.exp() * self.value(c))
                .sum();
            if v <= best.0 * (1.0 + TIE_EPS) {
                best = (v, Choice::Future);
            }
        }
        if self.allow_past(node) {
            let v: f64 = self
                .past_children(node)
                .iter()
                .map(|(c, inc)| inc.exp() * self.value(c))
                .sum();
            if v < best.0 * (1.0 - TIE_EPS) {
                best = (v, Choice::Past);
            }
        }
        self.memo.insert(key, best);
        best.0
    }

    fn materialize(&self, node: &Node, word: &mut Vec<u8>, lo: i64, log_w: f64, out: &mut Vec<TwoSidedCoverEntry>) -> bool {
        if out.len() as f64 > MAX_MATERIALIZED {
            return false;
        }
        let choice = self.memo.get(&node.key()).map(|x| x.1).unwrap_or(Choice::Take);
        match choice {
            Choice::Dead => true,
            Choice::Take => {
                let u = node.back + node.fwd;
                out.push(TwoSidedCoverEntry {
                    lo,
                    word: format_word(word),
                    s: self.fiber.0 + node.back,
                    t: node.fwd - self.fiber.1,
                    s_plus_t: u,
                    fiber_count: self.fiber_count(u),
                    log_weight: log_w,
                });
                true
            }
            Choice::Past => {
                for (c, inc) in self.past_children(node) {
                    word.insert(0, c.left.first());
                    let ok = self.materialize(&c, word, lo - 1, log_w + inc, out);
                    word.remove(0);
                    if !ok {
                        return false;
                    }
                }
                true
            }
            Choice::Future => {
                for (c, inc) in self.future_children(node) {
                    word.push(c.right.last());
                    let ok = self.materialize(&c, word, lo, log_w + inc, out);
                    word.pop();
                    if !ok {
                        return false;
                    }
                }
                true
            }
        }
    }
}

/// Words covering `c` that fix coordinate 0, with their fiber interval over
/// coordinate 0.
pub(crate) fn roots(sys: &SuspensionSystem, c: &CylinderSet) -> Vec<(i64, Vec<u8>, (f64, f64))> {
    let mut words: Vec<(i64, Vec<u8>)> = if c.word.is_empty() {
        (0..sys.alphabet_size() as u8).map(|s| (0, vec![s])).collect()
    } else {
        vec![(c.lo, c.word.clone())]
    };
    while words[0].0 > 0 {
        words = words
            .into_iter()
            .flat_map(|(lo, w)| {
                sys.sft.predecessors(w[0]).map(move |s| {
                    let mut v = vec![s];
                    v.extend_from_slice(&w);
                    (lo - 1, v)
                })
            })
            .collect::<Vec<_>>();
    }
    while words[0].0 + words[0].1.len() as i64 <= 0 {
        words = words
            .into_iter()
            .flat_map(|(lo, w)| {
                sys.sft.successors(*w.last().unwrap()).map(move |s| {
                    let mut v = w.clone();
                    v.push(s);
                    (lo, v)
                })
            })
            .collect::<Vec<_>>();
    }
    words
        .into_iter()
        .filter(|(_, w)| sys.sft.is_admissible(w))
        .filter_map(|(lo, w)| {
            let top = roof(sys, w[(-lo) as usize]);
            let fiber = match c.fiber {
                FiberRange::Full => (0.0, top),
                FiberRange::Interval(a, b) => (a.max(0.0), b.min(top)),
            };
            (fiber.1 > fiber.0).then_some((lo, w, fiber))
        })
        .collect()
}

fn root_node(sys: &SuspensionSystem, pressure: f64, lo: i64, word: &[u8], buf: usize) -> (Node, f64) {
    let k_r = sys.k_r as i64;
    let (a, b) = (-lo, lo + word.len() as i64 - 1);
    let sym = |j: i64| word[(j - lo) as usize];
    let (m, n) = (a - k_r, b - k_r);
    let back: f64 = (1..=m).map(|k| roof(sys, sym(-k))).sum();
    let fwd: f64 = (0..n).map(|k| roof(sys, sym(k))).sum();
    let log_w: f64 = (-m.max(0)..n.max(0)).map(|k| log_weight(sys, sym(k), pressure)).sum();
    let take = buf.min(word.len());
    let node = Node {
        left: Buf::from_slice(&word[..take]),
        right: Buf::from_slice(&word[word.len() - take..]),
        a: a as usize,
        b: b as usize,
        back,
        fwd,
    };
    (node, log_w)
}

/// Depth cap on each side that lets both orders reach `cutoff`, plus a margin.
pub fn default_depth_cap(sys: &SuspensionSystem, cutoff: f64) -> usize {
    ((cutoff + sys.max_roof()) / sys.min_roof()).ceil() as usize + sys.k_r + 6
}

/// `m(Z)` at cutoff `T` over the restricted two-sided cover class. Sets that
/// do not fix coordinate 0 are split into the words that do.
pub fn m_value(
    sys: &SuspensionSystem,
    pressure: f64,
    z: &CylinderSet,
    cutoff: f64,
    depth_cap: usize,
) -> Result<TwoSidedCoverResult> {
    m_value_split(sys, pressure, z, cutoff, depth_cap, Split::Free)
}

pub fn m_value_split(
    sys: &SuspensionSystem,
    pressure: f64,
    z: &CylinderSet,
    cutoff: f64,
    depth_cap: usize,
    split: Split,
) -> Result<TwoSidedCoverResult> {
    m_value_impl(sys, pressure, z, cutoff, depth_cap, split, false)
}

/// [`m_value`] that also emits the optimal cover when it has at most
/// `MAX_MATERIALIZED` entries.
pub fn m_value_with_cover(
    sys: &SuspensionSystem,
    pressure: f64,
    z: &CylinderSet,
    cutoff: f64,
    depth_cap: usize,
) -> Result<TwoSidedCoverResult> {
    m_value_impl(sys, pressure, z, cutoff, depth_cap, Split::Free, true)
}

fn m_value_impl(
    sys: &SuspensionSystem,
    pressure: f64,
    z: &CylinderSet,
    cutoff: f64,
    depth_cap: usize,
    split: Split,
    want_cover: bool,
) -> Result<TwoSidedCoverResult> {
    TwoSidedSolver::new(sys, pressure, cutoff, depth_cap, split)?.solve(z, want_cover)
}

/// Evaluates `m` on many sets at one cutoff and cap, sharing the DP memo
/// between sets whose coordinate-0 fiber interval coincides.
pub struct TwoSidedSolver<'a> {
    sys: &'a SuspensionSystem,
    pressure: f64,
    cutoff: f64,
    depth_cap: usize,
    split: Split,
    dps: HashMap<(u64, u64), Dp<'a>>,
}

impl<'a> TwoSidedSolver<'a> {
    pub fn new(sys: &'a SuspensionSystem, pressure: f64, cutoff: f64, depth_cap: usize, split: Split) -> Result<Self> {
        check_memory_one(sys)?;
        if cutoff < 1.0 {
            return Err(Error::NegativeOrder(cutoff));
        }
        Ok(TwoSidedSolver {
            sys,
            pressure,
            cutoff,
            depth_cap,
            split,
            dps: HashMap::new(),
        })
    }

    pub fn value(&mut self, z: &CylinderSet) -> Result<f64> {
        Ok(self.solve(z, false)?.value)
    }

    pub fn solve(&mut self, z: &CylinderSet, want_cover: bool) -> Result<TwoSidedCoverResult> {
        let (sys, cutoff, depth_cap) = (self.sys, self.cutoff, self.depth_cap);
        let buf = sys.k_r + 1;
        let mut value = 0.0;
        let mut cover = want_cover.then(Vec::new);
        for (lo, word, fiber) in roots(sys, z) {
            let (node, log_w) = root_node(sys, self.pressure, lo, &word, buf);
            if node.a > depth_cap || node.b > depth_cap {
                return Err(Error::DepthCapTooSmall {
                    depth_cap,
                    cutoff,
                    needed: node.a.max(node.b),
                });
            }
            let dp = self.dps.entry((fiber.0.to_bits(), fiber.1.to_bits())).or_insert_with(|| Dp {
                sys,
                pressure: self.pressure,
                cutoff,
                cap: depth_cap,
                split: self.split,
                fiber,
                buf,
                memo: HashMap::new(),
            });
            let rel = dp.value(&node);
            if !rel.is_finite() || rel * log_w.exp() > INFINITY_SENTINEL {
                return Err(Error::DepthCapTooSmall {
                    depth_cap,
                    cutoff,
                    needed: default_depth_cap(sys, cutoff),
                });
            }
            value += rel * log_w.exp();
            if let Some(all) = cover.as_mut() {
                let mut part = Vec::new();
                let mut w = word.clone();
                let ok = dp.materialize(&node, &mut w, lo, log_w, &mut part);
                if ok && (all.len() + part.len()) as f64 <= MAX_MATERIALIZED {
                    all.extend(part);
                } else {
                    cover = None;
                }
            }
        }
        Ok(TwoSidedCoverResult {
            value,
            cutoff_t: cutoff,
            depth_cap,
            cover,
        })
    }
}

/// `m` on each set, in order. Sets are split into chunks that run in
/// parallel, each chunk sharing one solver.
pub fn m_values(
    sys: &SuspensionSystem,
    pressure: f64,
    sets: &[CylinderSet],
    cutoff: f64,
    depth_cap: usize,
    split: Split,
) -> Result<Vec<f64>> {
    const CHUNK: usize = 16;
    let chunks: Vec<&[CylinderSet]> = sets.chunks(CHUNK).collect();
    let out: Vec<Result<Vec<f64>>> = crate::par::map(&chunks, |chunk| {
        let mut solver = TwoSidedSolver::new(sys, pressure, cutoff, depth_cap, split)?;
        chunk.iter().map(|c| solver.value(c)).collect()
    });
    let mut values = Vec::with_capacity(sets.len());
    for chunk in out {
        values.extend(chunk?);
    }
    Ok(values)
}

/// Value implied by an emitted cover: `Σ count · e^{log_weight}/(s+t)`.
pub fn cover_total(cover: &[TwoSidedCoverEntry]) -> f64 {
    cover
        .iter()
        .map(|e| e.fiber_count as f64 * e.log_weight.exp() / e.s_plus_t)
        .sum()
}

/// `f_τ Z` as a disjoint list of cylinders fixing coordinate 0, each with a
/// fiber interval over its coordinate-0 roof.
pub fn flow_set(sys: &SuspensionSystem, z: &CylinderSet, tau: f64) -> Result<Vec<CylinderSet>> {
    check_memory_one(sys)?;
    let mut out = Vec::new();
    let mut stack: Vec<(i64, Vec<u8>, f64, f64)> = roots(sys, z)
        .into_iter()
        .map(|(lo, w, (a, b))| (lo, w, a + tau, b + tau))
        .collect();
    while let Some((lo, w, g1, g2)) = stack.pop() {
        if g2 <= g1 {
            continue;
        }
        let top = roof(sys, w[(-lo) as usize]);
        if g1 >= 0.0 && g2 <= top {
            out.push(CylinderSet::new(lo, w).with_fiber(FiberRange::Interval(g1, g2)));
        } else if g1 < 0.0 && g2 > 0.0 {
            stack.push((lo, w.clone(), g1, 0.0));
            stack.push((lo, w, 0.0, g2));
        } else if g1 < top && g2 > top {
            stack.push((lo, w.clone(), g1, top));
            stack.push((lo, w, top, g2));
        } else if g1 >= top {
            // move to the next coordinate: the old coordinate 1 becomes 0
            for (lo2, w2, _) in roots(sys, &CylinderSet::new(lo - 1, w.clone()).with_fiber(FiberRange::Full)) {
                stack.push((lo2, w2, g1 - top, g2 - top));
            }
        } else {
            for (lo2, w2, _) in roots(sys, &CylinderSet::new(lo + 1, w.clone()).with_fiber(FiberRange::Full)) {
                let below = roof(sys, w2[(-lo2) as usize]);
                stack.push((lo2, w2, g1 + below, g2 + below));
            }
        }
    }
    Ok(out)
}

/// Sum of `m_value` over the pieces of a disjoint union.
pub fn m_value_union(
    sys: &SuspensionSystem,
    pressure: f64,
    sets: &[CylinderSet],
    cutoff: f64,
    depth_cap: usize,
    split: Split,
) -> Result<f64> {
    Ok(m_values(sys, pressure, sets, cutoff, depth_cap, split)?.iter().sum())
}

/// `m(f_τ Z)` against `m(Z)` at the same cutoff.
#[allow(clippy::too_many_arguments)]
pub fn flow_invariance_check(
    sys: &SuspensionSystem,
    fixture: &str,
    pressure: f64,
    z: &CylinderSet,
    tau: f64,
    cutoff: f64,
    depth_cap: usize,
    split: Split,
    tol: f64,
) -> Result<CheckRecord> {
    let a = m_value_union(sys, pressure, std::slice::from_ref(z), cutoff, depth_cap, split)?;
    let b = m_value_union(sys, pressure, &flow_set(sys, z, tau)?, cutoff, depth_cap, split)?;
    Ok(CheckRecord::ratio_check(
        "two_sided_flow_invariance",
        fixture,
        format!("tau={tau},T={cutoff},split={split:?}"),
        b,
        a,
        tol,
    ))
}

#[derive(Debug, Clone, Serialize)]
pub struct GibbsStarReport {
    /// `sqrt(max ρ / min ρ)`: the smallest uniform constant after the best
    /// rescaling of `m`.
    pub bound: f64,
    /// `max(ρ, 1/ρ)` with `m` normalised by the whole space.
    pub raw_bound: f64,
    pub ratios: Vec<f64>,
    pub excluded: usize,
}

/// `ρ = m(B*_{s,t}(x)) (s+t) e^{(s+t)P − Φ(f_{−s}x, s+t)}` with `m`
/// normalised to a probability. Samples whose ball is deeper than the cap
/// allows are excluded.
pub fn gibbs_star_check(
    sys: &SuspensionSystem,
    pressure: f64,
    samples: &[(SymbolicPoint, f64, f64)],
    cutoff: f64,
    depth_cap: usize,
) -> Result<GibbsStarReport> {
    let whole = m_value(sys, pressure, &CylinderSet::new(0, vec![]), cutoff, depth_cap)?.value;
    let rows: Vec<Result<Option<f64>>> = crate::par::map(samples, |(x, s, t)| {
        let ball = bstar(sys, x, *s, *t)?;
        if (ball.hi() as usize) > depth_cap || ((-ball.lo) as usize) > depth_cap {
            return Ok(None);
        }
        let c = ball.as_cylinder(sys);
        let m = m_value(sys, pressure, &c, cutoff, depth_cap)?.value / whole;
        let phi = sys.birkhoff(&sys.flow(x, -s), s + t);
        Ok(Some(m * (s + t) * ((s + t) * pressure - phi).exp()))
    });
    let mut ratios = Vec::new();
    let mut excluded = 0;
    for r in rows {
        match r? {
            Some(v) => ratios.push(v),
            None => excluded += 1,
        }
    }
    let raw_bound = ratios.iter().map(|r| r.max(1.0 / r)).fold(1.0, f64::max);
    let hi = ratios.iter().cloned().fold(f64::MIN, f64::max);
    let lo = ratios.iter().cloned().fold(f64::MAX, f64::min);
    Ok(GibbsStarReport {
        bound: (hi / lo).sqrt(),
        raw_bound,
        ratios,
        excluded,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ProportionalityReport {
    pub values: Vec<f64>,
    pub oracle: Vec<f64>,
    pub spread: f64,
}

/// `m` against an oracle over a family of sets; `spread` is `max/min − 1`
/// of the ratios.
pub fn proportionality(
    sys: &SuspensionSystem,
    pressure: f64,
    oracle: &OracleMeasure,
    family: &[CylinderSet],
    cutoff: f64,
    depth_cap: usize,
) -> Result<ProportionalityReport> {
    let values = m_values(sys, pressure, family, cutoff, depth_cap, Split::Free)?;
    let rows: Vec<(f64, f64)> = values
        .into_iter()
        .zip(family)
        .map(|(v, c)| Ok((v, oracle.mass(c)?)))
        .collect::<Result<_>>()?;
    Ok(ProportionalityReport {
        spread: ratio_spread(rows.iter().copied()),
        values: rows.iter().map(|r| r.0).collect(),
        oracle: rows.iter().map(|r| r.1).collect(),
    })
}

/// `m` at pressure 0 for the geometric potential, whose weights are the
/// inverse unstable determinants `Π λ^{−1}`, against the oracle SRB measure.
pub fn srb_main_check(
    geometric: &SuspensionSystem,
    family: &[CylinderSet],
    cutoff: f64,
    depth_cap: usize,
) -> Result<ProportionalityReport> {
    let p = flow_pressure(geometric)?;
    if p.abs() > crate::product::ATTRACTOR_TOL {
        return Err(Error::NotAttractor(p));
    }
    let oracle = OracleMeasure::with_pressure(geometric, 0.0, crate::oracle::OracleKind::FlowEquilibrium)?;
    proportionality(geometric, 0.0, &oracle, family, cutoff, depth_cap)
}

/// All two-sided cylinders fixing coordinates `[−m, n]` × full fiber.
pub fn product_family(sys: &SuspensionSystem, m: usize, n: usize) -> Vec<CylinderSet> {
    sys.sft
        .admissible_words(m + n + 1)
        .into_iter()
        .map(|w| CylinderSet::new(-(m as i64), w))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::system;
    use crate::oracle::flow_oracle;

    #[test]
    fn bstar_on_full2() {
        let sys = system("FULL2");
        let x = SymbolicPoint::periodic(&sys, &[0, 1, 1], 0.0).unwrap();
        let b = bstar(&sys, &x, 3.0, 3.0).unwrap();
        assert_eq!((b.lo, b.hi()), (-3, 3));
        assert!((b.beta_halfwidth - sys.r_unit / 6.0).abs() < 1e-15);
        assert!(b.contains(&sys, &x));
        let tau = 2.0 * sys.r_unit / 6.0;
        assert!(!b.contains(&sys, &sys.flow(&x.with_fiber(0.5), tau)));
        let bm = bstar(&sys, &x.with_fiber(0.5), 3.0, 3.0).unwrap();
        assert!(!bm.contains(&sys, &sys.flow(&x.with_fiber(0.5), tau)));
        assert!(bm.contains(&sys, &sys.flow(&x.with_fiber(0.5), tau / 4.0)));
    }

    #[test]
    fn full2_whole_space_near_two_over_r_unit() {
        let sys = system("FULL2");
        let p = 2f64.ln();
        let mut vals = Vec::new();
        for t in [6.0, 10.0, 14.0] {
            let cap = default_depth_cap(&sys, t);
            let r = m_value(&sys, p, &CylinderSet::new(0, vec![]), t, cap).unwrap();
            // the ball fixes one forward symbol beyond the weighted ones
            assert!((r.value * sys.r_unit / 2.0 - 1.0).abs() < 0.1, "{}", r.value);
            vals.push(r.value);
        }
        assert!(vals.iter().all(|v| (v / vals[0] - 1.0).abs() < 0.1));
    }

    #[test]
    fn cover_sum_matches_value() {
        for name in ["FULL2", "BERN13", "ROOF2"] {
            let sys = system(name);
            let p = flow_pressure(&sys).unwrap();
            let r = m_value_with_cover(&sys, p, &CylinderSet::new(0, vec![0]), 4.0, 10).unwrap();
            let cover = r.cover.unwrap();
            assert!(cover.iter().all(|e| e.s.min(e.t) >= 4.0 - 1e-9));
            assert!((cover_total(&cover) / r.value - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_set_is_zero() {
        let sys = system("GOLD");
        let c = CylinderSet::new(0, vec![0]).with_fiber(FiberRange::Interval(0.3, 0.3));
        assert_eq!(m_value(&sys, 0.5, &c, 4.0, 10).unwrap().value, 0.0);
    }

    #[test]
    fn flow_set_pieces() {
        let sys = system("SRB3");
        let z = CylinderSet::new(0, vec![1]).with_fiber(FiberRange::Interval(0.0, 1.0));
        let moved = flow_set(&sys, &z, 1.0).unwrap();
        assert_eq!(moved.len(), 2);
        for c in &moved {
            assert_eq!(c.symbol(-1), Some(1));
            assert_eq!(c.fiber, FiberRange::Interval(0.0, 1.0));
        }
        let half = flow_set(&sys, &z.clone().with_fiber(FiberRange::Interval(0.0, 0.5)), 0.75).unwrap();
        assert_eq!(half.len(), 3);
        let total: f64 = half.iter().map(|c| c.fiber.length_within(1.0)).sum();
        assert!((total - 0.75).abs() < 1e-12);
    }

    #[test]
    fn flow_invariance_on_full2() {
        let sys = system("FULL2");
        let z = CylinderSet::new(0, vec![0]).with_fiber(FiberRange::Interval(0.0, 0.5));
        let cap = default_depth_cap(&sys, 10.0);
        let same = flow_invariance_check(&sys, "FULL2", 2f64.ln(), &z, 0.0, 10.0, cap, Split::Free, 0.0).unwrap();
        assert_eq!(same.ratio, 1.0);
        let r = flow_invariance_check(&sys, "FULL2", 2f64.ln(), &z, 0.25, 10.0, cap, Split::Free, 0.1).unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn bern13_proportional_to_oracle() {
        let sys = system("BERN13");
        let oracle = flow_oracle(&sys).unwrap();
        let cap = default_depth_cap(&sys, 10.0);
        let fam = product_family(&sys, 1, 1);
        let rep = proportionality(&sys, 0.0, &oracle, &fam, 10.0, cap).unwrap();
        assert!(rep.spread < 0.05, "{rep:?}");
    }

    #[test]
    fn monotone_in_depth_cap() {
        let sys = system("GOLD");
        let p = flow_pressure(&sys).unwrap();
        let c = CylinderSet::new(0, vec![0]);
        let mut last = f64::INFINITY;
        for cap in [12, 14, 16, 18] {
            let v = m_value(&sys, p, &c, 8.0, cap).unwrap().value;
            assert!(v <= last * (1.0 + 1e-12));
            last = v;
        }
    }

    #[test]
    fn memory_two_is_unsupported() {
        let sys = system("FULL2W");
        let r = m_value(&sys, 1.0, &CylinderSet::new(0, vec![0]), 4.0, 10);
        assert!(matches!(r, Err(Error::Unsupported(_))));
    }
}
