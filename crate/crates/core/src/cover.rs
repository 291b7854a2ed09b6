//! Carathéodory covers by symbolic Bowen balls.
//!
//! The outer-measure infimum over covers is computed exactly over the class of
//! rooted antichains of the cylinder tree. A node of the tree fixes one more
//! free coordinate than its parent; at node depth `d` the node is the Bowen
//! ball with `n = d - k_r` roof crossings, and its order is the crossing time
//! `S_n roof - fiber`. The recursion is
//!
//! ```text
//! value(node) = min(weight(node), Σ value(child))   if order(node) ≥ T
//!             = Σ value(child)                       otherwise
//! ```
//!
//! evaluated in the log domain with memoisation on the symbols that later
//! weights can still see, the depth and the order (saturated once ≥ T).

use std::collections::HashMap;
use std::io::Write;

use serde::Serialize;

use crate::cylinder::{format_word, CylinderSet};
use crate::error::{Error, Result};
use crate::points::point_with_word;
use crate::symbolic::{Side, SuspensionSystem, SymbolicPoint};

/// Values above this are treated as +∞ when bracketing critical values.
pub const INFINITY_SENTINEL: f64 = 1e12;

/// Largest optimal cover returned element by element.
pub const MAX_MATERIALIZED: f64 = 50_000.0;

const ORDER_EPS: f64 = 1e-9;
const TIE_EPS: f64 = 1e-12;

/// What a cover has to cover.
#[derive(Debug, Clone)]
pub enum CoverTarget {
    /// Every unstable leaf at fiber 0, one per admissible word on the
    /// potential window ending at coordinate 0.
    WholeSpace,
    /// A union of disjoint sub-cylinders of one leaf. For `Side::Forward` the
    /// leaf is the unstable leaf of `anchor` (coordinates ≤ 0 fixed) and each
    /// prefix lists the symbols on coordinates 1, 2, …; for `Side::Backward`
    /// it is the stable leaf (coordinates ≥ 0 fixed) and prefixes list
    /// coordinates -1, -2, … in that order. An empty prefix is the whole leaf.
    Leaf {
        side: Side,
        anchor: SymbolicPoint,
        prefixes: Vec<Vec<u8>>,
    },
}

impl CoverTarget {
    pub fn whole_leaf(side: Side, anchor: SymbolicPoint) -> Self {
        CoverTarget::Leaf {
            side,
            anchor,
            prefixes: vec![vec![]],
        }
    }

    pub fn leaf_cylinder(side: Side, anchor: SymbolicPoint, prefix: Vec<u8>) -> Self {
        CoverTarget::Leaf {
            side,
            anchor,
            prefixes: vec![prefix],
        }
    }

    /// Converts a cylinder on the leaf of `anchor` into a target. Fixed
    /// coordinates on the leaf's own side must agree with the anchor; gaps on
    /// the free side are filled with every admissible word.
    pub fn from_cylinder(sys: &SuspensionSystem, side: Side, anchor: SymbolicPoint, c: &CylinderSet) -> Result<Self> {
        let (free_lo, free_hi) = match side {
            Side::Forward => (1, c.hi().max(0)),
            Side::Backward => (c.lo.min(0), -1),
        };
        for k in c.lo..=c.hi() {
            let on_leaf = match side {
                Side::Forward => k <= 0,
                Side::Backward => k >= 0,
            };
            if on_leaf && c.symbol(k) != Some(anchor.symbol(k)) {
                return Err(Error::Unsupported(format!(
                    "cylinder {} at {} does not meet the leaf",
                    format_word(&c.word),
                    c.lo
                )));
            }
        }
        // walk order: outward from coordinate 0
        let coords: Vec<i64> = match side {
            Side::Forward => (free_lo..=free_hi).collect(),
            Side::Backward => (free_lo..=free_hi).rev().collect(),
        };
        let mut prefixes: Vec<Vec<u8>> = vec![vec![]];
        for (i, &k) in coords.iter().enumerate() {
            let choices: Vec<u8> = match c.symbol(k) {
                Some(s) => vec![s],
                None => (0..sys.alphabet_size() as u8).collect(),
            };
            let mut next = Vec::new();
            for p in &prefixes {
                let prev = if i == 0 { anchor.symbol(0) } else { p[i - 1] };
                for &s in &choices {
                    let ok = match side {
                        Side::Forward => sys.sft.allowed(prev, s),
                        Side::Backward => sys.sft.allowed(s, prev),
                    };
                    if ok {
                        let mut q = p.clone();
                        q.push(s);
                        next.push(q);
                    }
                }
            }
            prefixes = next;
        }
        Ok(CoverTarget::Leaf {
            side,
            anchor,
            prefixes,
        })
    }
}

/// One Bowen ball of an optimal cover.
#[derive(Debug, Clone, Serialize)]
pub struct CoverElement {
    /// Fixed coordinates of the ball on the free side of the leaf, together
    /// with coordinate 0.
    pub cylinder: CylinderSet,
    pub order: f64,
    /// `Φ − tα` for the ball.
    pub log_weight: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CoverDPResult {
    pub value: f64,
    pub log_value: f64,
    pub alpha: f64,
    pub cutoff_t: f64,
    pub depth_cap: usize,
    /// Number of balls in the optimal cover (may exceed what is materialised).
    pub cover_size: f64,
    pub optimal_cover: Option<Vec<CoverElement>>,
}

impl CoverDPResult {
    /// `value` with the +∞ sentinel applied.
    pub fn capped_value(&self) -> f64 {
        if self.value > INFINITY_SENTINEL {
            f64::INFINITY
        } else {
            self.value
        }
    }
}

pub(crate) fn log_sum_exp(xs: impl IntoIterator<Item = f64>) -> f64 {
    let xs: Vec<f64> = xs.into_iter().collect();
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

#[derive(Clone, Copy)]
struct Node {
    code: u64,
    depth: usize,
    order: f64,
}

#[derive(Clone, Copy)]
struct Memo {
    log_value: f64,
    count: f64,
    take: bool,
}

struct Dp<'a> {
    sys: &'a SuspensionSystem,
    side: Side,
    alpha: f64,
    cutoff: f64,
    cap: usize,
    a: u64,
    buf_len: usize,
    modulus: u64,
    pows: Vec<u64>,
    mem: usize,
    memo: HashMap<(u64, usize, i64), Memo>,
}

impl<'a> Dp<'a> {
    fn new(sys: &'a SuspensionSystem, side: Side, alpha: f64, cutoff: f64, cap: usize) -> Result<Self> {
        let mem = sys.memory();
        if side == Side::Backward && mem > 1 {
            return Err(Error::Unsupported(
                "backward covers need roof and potential depending on coordinate 0 only".into(),
            ));
        }
        let a = sys.alphabet_size() as u64;
        let buf_len = sys.k_r + mem + 1;
        let mut pows = vec![1u64; buf_len + 1];
        for i in 1..=buf_len {
            pows[i] = pows[i - 1]
                .checked_mul(a)
                .ok_or_else(|| Error::Unsupported("symbol buffer too long".into()))?;
        }
        Ok(Dp {
            sys,
            side,
            alpha,
            cutoff,
            cap,
            a,
            buf_len,
            modulus: pows[buf_len],
            pows,
            mem,
            memo: HashMap::new(),
        })
    }

    /// Symbol at buffer index `i` (0 oldest, `buf_len - 1` newest).
    fn sym(&self, code: u64, i: usize) -> u8 {
        ((code / self.pows[self.buf_len - 1 - i]) % self.a) as u8
    }

    fn takeable(&self, n: &Node) -> bool {
        n.depth >= self.sys.k_r && n.order >= self.cutoff - ORDER_EPS * self.cutoff.abs().max(1.0)
    }

    fn order_key(&self, n: &Node) -> i64 {
        if self.takeable(n) {
            i64::MAX
        } else {
            (n.order * 1e9).round() as i64
        }
    }

    fn extends(&self, last: u8, c: u8) -> bool {
        match self.side {
            Side::Forward => self.sys.sft.allowed(last, c),
            Side::Backward => self.sys.sft.allowed(c, last),
        }
    }

    /// Child of `n` through symbol `c`, with the log-weight increment.
    fn child(&self, n: &Node, c: u8) -> (Node, f64) {
        let code = (n.code * self.a + c as u64) % self.modulus;
        let depth = n.depth + 1;
        let mut order = n.order;
        let mut dlog = 0.0;
        if depth > self.sys.k_r {
            // the newly crossed base coordinate sits at buffer index `mem - 1`
            // going forward, and at `buf_len - 1 - k_r` going backward
            let l = self.mem;
            let word: Vec<u8> = match self.side {
                Side::Forward => (0..l).map(|i| self.sym(code, i)).collect(),
                Side::Backward => {
                    let top = self.buf_len - 1 - self.sys.k_r;
                    (0..l).map(|i| self.sym(code, top + l - 1 - i)).collect()
                }
            };
            let lo = -(l as i64 - 1);
            let roof = self.sys.roof.lifted_eval(&word, lo);
            let phi = self.sys.potential.lifted_eval(&word, lo);
            order += roof;
            dlog = (phi - self.alpha) * roof;
        }
        (Node { code, depth, order }, dlog)
    }

    fn solve(&mut self, n: Node) -> Memo {
        let key = (n.code, n.depth, self.order_key(&n));
        if let Some(m) = self.memo.get(&key) {
            return *m;
        }
        let takeable = self.takeable(&n);
        let out = if n.depth >= self.cap {
            if takeable {
                Memo {
                    log_value: 0.0,
                    count: 1.0,
                    take: true,
                }
            } else {
                Memo {
                    log_value: f64::INFINITY,
                    count: f64::INFINITY,
                    take: false,
                }
            }
        } else {
            let last = self.sym(n.code, self.buf_len - 1);
            let mut logs = Vec::new();
            let mut count = 0.0;
            for c in 0..self.a as u8 {
                if self.extends(last, c) {
                    let (ch, d) = self.child(&n, c);
                    let m = self.solve(ch);
                    logs.push(m.log_value + d);
                    count += m.count;
                }
            }
            let refine = log_sum_exp(logs);
            if takeable && refine > TIE_EPS {
                Memo {
                    log_value: 0.0,
                    count: 1.0,
                    take: true,
                }
            } else {
                Memo {
                    log_value: refine,
                    count,
                    take: false,
                }
            }
        };
        self.memo.insert(key, out);
        out
    }

    fn collect(&mut self, n: Node, logw: f64, path: &mut Vec<u8>, out: &mut Vec<CoverElement>) {
        let m = self.solve(n);
        if m.take {
            let cylinder = match self.side {
                Side::Forward => CylinderSet::new(0, path.clone()),
                Side::Backward => {
                    let mut w = path.clone();
                    w.reverse();
                    CylinderSet::new(-(path.len() as i64 - 1), w)
                }
            };
            let mut cylinder = cylinder;
            cylinder.order = Some(n.order);
            out.push(CoverElement {
                cylinder,
                order: n.order,
                log_weight: logw,
            });
            return;
        }
        let last = self.sym(n.code, self.buf_len - 1);
        for c in 0..self.a as u8 {
            if self.extends(last, c) {
                let (ch, d) = self.child(&n, c);
                path.push(c);
                self.collect(ch, logw + d, path, out);
                path.pop();
            }
        }
    }
}

struct Root {
    node: Node,
    log_weight: f64,
    /// Symbols on coordinate 0 and the free coordinates fixed so far.
    path: Vec<u8>,
}

fn leaf_root(dp: &Dp, anchor: &SymbolicPoint, prefix: &[u8]) -> Result<Option<Root>> {
    let sys = dp.sys;
    let f = anchor.fiber();
    let phi0 = sys.phi_at(anchor);
    let (order, log_weight) = match dp.side {
        Side::Forward => (-f, -(phi0 - dp.alpha) * f),
        Side::Backward => (f, (phi0 - dp.alpha) * f),
    };
    let b = dp.buf_len as i64;
    let code = (0..b).fold(0u64, |acc, i| {
        let coord = match dp.side {
            Side::Forward => i - (b - 1),
            Side::Backward => b - 1 - i,
        };
        acc * dp.a + anchor.symbol(coord) as u64
    });
    let mut node = Node { code, depth: 0, order };
    let mut log_weight = log_weight;
    let mut path = vec![anchor.symbol(0)];
    for &c in prefix {
        let last = dp.sym(node.code, dp.buf_len - 1);
        if !dp.extends(last, c) {
            return Ok(None);
        }
        let (ch, d) = dp.child(&node, c);
        node = ch;
        log_weight += d;
        path.push(c);
    }
    Ok(Some(Root {
        node,
        log_weight,
        path,
    }))
}

/// Smallest depth cap for which every node at the cap can be taken.
pub fn required_depth(sys: &SuspensionSystem, cutoff: f64, fiber: f64, side: Side) -> usize {
    let start = match side {
        Side::Forward => -fiber,
        Side::Backward => fiber,
    };
    let need = ((cutoff - start) / sys.min_roof() - ORDER_EPS).ceil().max(0.0) as usize;
    sys.k_r + need
}

/// Exact infimum of `Σ e^{Φ − tα}` over rooted antichain covers of `target`
/// by Bowen balls of order at least `cutoff` and depth at most `depth_cap`.
pub fn cover_value(
    sys: &SuspensionSystem,
    target: &CoverTarget,
    alpha: f64,
    cutoff: f64,
    depth_cap: usize,
) -> Result<CoverDPResult> {
    let (side, roots_src): (Side, Vec<(SymbolicPoint, Vec<u8>)>) = match target {
        CoverTarget::WholeSpace => {
            let l = sys.memory();
            let mut v = Vec::new();
            for w in sys.sft.admissible_words(l) {
                let p = point_with_word(sys, -(l as i64 - 1), &w, 0.0)?;
                v.push((p, vec![]));
            }
            (Side::Forward, v)
        }
        CoverTarget::Leaf {
            side,
            anchor,
            prefixes,
        } => (*side, prefixes.iter().map(|p| (anchor.clone(), p.clone())).collect()),
    };
    let mut dp = Dp::new(sys, side, alpha, cutoff, depth_cap)?;
    let mut roots = Vec::new();
    for (anchor, prefix) in &roots_src {
        let needed = required_depth(sys, cutoff, anchor.fiber(), side).max(prefix.len());
        if depth_cap < needed {
            return Err(Error::DepthCapTooSmall {
                depth_cap,
                cutoff,
                needed,
            });
        }
        if let Some(r) = leaf_root(&dp, anchor, prefix)? {
            roots.push(r);
        }
    }
    let mut logs = Vec::with_capacity(roots.len());
    let mut count = 0.0;
    for r in &roots {
        let m = dp.solve(r.node);
        logs.push(r.log_weight + m.log_value);
        count += m.count;
    }
    let log_value = if logs.is_empty() {
        f64::NEG_INFINITY
    } else {
        log_sum_exp(logs)
    };
    let optimal_cover = if count <= MAX_MATERIALIZED {
        let mut out = Vec::new();
        for r in &roots {
            let mut path = r.path.clone();
            dp.collect(r.node, r.log_weight, &mut path, &mut out);
        }
        Some(out)
    } else {
        None
    };
    Ok(CoverDPResult {
        value: log_value.exp(),
        log_value,
        alpha,
        cutoff_t: cutoff,
        depth_cap,
        cover_size: count,
        optimal_cover,
    })
}

/// Row of a per-cutoff value table.
#[derive(Debug, Clone, Serialize)]
pub struct CutoffRow {
    pub cutoff: f64,
    pub alpha: f64,
    pub value: f64,
    pub cover_size: f64,
}

impl From<&CoverDPResult> for CutoffRow {
    fn from(r: &CoverDPResult) -> Self {
        CutoffRow {
            cutoff: r.cutoff_t,
            alpha: r.alpha,
            value: r.value,
            cover_size: r.cover_size,
        }
    }
}

pub fn write_cutoff_table(mut w: impl Write, rows: &[CutoffRow]) -> std::io::Result<()> {
    writeln!(w, "T,alpha,value,cover_size")?;
    for r in rows {
        writeln!(w, "{},{},{:e},{}", r.cutoff, r.alpha, r.value, r.cover_size)?;
    }
    Ok(())
}

/// Result of [`extrapolate_limit`].
#[derive(Debug, Clone, Serialize)]
pub struct Extrapolated {
    pub value: f64,
    pub raw_tail: f64,
    pub accelerated: Option<f64>,
}

/// Limit of a sequence of per-cutoff values: the last value once successive
/// ratios are within 1e-3 of 1, otherwise the Aitken Δ² estimate from the
/// last three entries. Jumps by more than a factor 2 in both directions are
/// reported as oscillation.
pub fn extrapolate_limit(values: &[(f64, f64)]) -> Result<Extrapolated> {
    if values.len() < 3 {
        return Err(Error::Extrapolation(format!(
            "need at least 3 values, got {}",
            values.len()
        )));
    }
    let v: Vec<f64> = values.iter().map(|&(_, v)| v).collect();
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::Extrapolation("non-finite value in sequence".into()));
    }
    let ratios: Vec<f64> = v.windows(2).map(|w| w[1] / w[0]).collect();
    let jumpy = |r: f64| !(0.5..=2.0).contains(&r);
    if ratios.windows(2).any(|r| jumpy(r[0]) && jumpy(r[1]) && (r[0] - 1.0).signum() != (r[1] - 1.0).signum()) {
        return Err(Error::Extrapolation(format!("oscillating sequence {v:?}")));
    }
    let raw_tail = *v.last().unwrap();
    if ratios.iter().all(|r| (r - 1.0).abs() <= 1e-3) {
        return Ok(Extrapolated {
            value: raw_tail,
            raw_tail,
            accelerated: None,
        });
    }
    let n = v.len();
    let (a, b, c) = (v[n - 3], v[n - 2], v[n - 1]);
    let denom = (c - b) - (b - a);
    if denom.abs() <= 1e-15 * c.abs().max(1e-300) {
        return Ok(Extrapolated {
            value: raw_tail,
            raw_tail,
            accelerated: None,
        });
    }
    let acc = c - (c - b) * (c - b) / denom;
    Ok(Extrapolated {
        value: acc,
        raw_tail,
        accelerated: Some(acc),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CriticalValueEstimate {
    pub alpha_star: f64,
    /// Crossing `α_T` of the whole-space value through 1 at each cutoff.
    pub per_cutoff_values: Vec<(f64, f64)>,
    /// Crossings at the last cutoff for each depth cap of the extrapolation ladder.
    pub per_depth_values: Vec<(usize, f64)>,
    /// Spread between the two- and three-point extrapolants.
    pub tolerance: f64,
}

const BISECT_TOL: f64 = 1e-10;

/// Bisects `α` until the whole-space cover value at `(cutoff, depth_cap)`
/// crosses 1, checking that the value is nonincreasing in `α` on the way.
pub fn crossing(sys: &SuspensionSystem, cutoff: f64, depth_cap: usize) -> Result<f64> {
    let value = |a: f64| -> Result<f64> {
        Ok(cover_value(sys, &CoverTarget::WholeSpace, a, cutoff, depth_cap)?.log_value)
    };
    let spread = sys.potential.sup_norm() + (sys.alphabet_size() as f64).ln() / sys.min_roof() + 1.0;
    let (mut lo, mut hi) = (-spread, spread);
    let (mut vlo, mut vhi) = (value(lo)?, value(hi)?);
    let mut grow = 0;
    while !(vlo >= 0.0 && vhi <= 0.0) {
        grow += 1;
        if grow > 20 {
            return Err(Error::Extrapolation("no sign change of log value in alpha".into()));
        }
        lo -= spread;
        hi += spread;
        vlo = value(lo)?;
        vhi = value(hi)?;
    }
    let slack = 1e-9;
    while hi - lo > BISECT_TOL {
        let mid = 0.5 * (lo + hi);
        let vm = value(mid)?;
        if vm > vlo + slack * vlo.abs().max(1.0) || vm < vhi - slack * vhi.abs().max(1.0) {
            return Err(Error::NonMonotone(format!(
                "log values {vlo} at {lo}, {vm} at {mid}, {vhi} at {hi}"
            )));
        }
        if vm > 0.0 {
            lo = mid;
            vlo = vm;
        } else {
            hi = mid;
            vhi = vm;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Estimates the pressure as the critical value of the whole-space cover value.
///
/// For `α` above the pressure the infimum refines all the way to the depth
/// cap, so the crossing at a finite cap sits at `P + c₁/N + c₂/N² + …` with
/// `N = depth_cap - k_r`, whatever the cutoff. The estimate removes the first
/// two correction terms by Richardson extrapolation over the caps
/// `N/2, 3N/4, N` at the last cutoff of the schedule.
pub fn critical_value(sys: &SuspensionSystem, schedule: &[f64], depth_cap: usize) -> Result<CriticalValueEstimate> {
    if schedule.is_empty() || schedule.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Extrapolation("cutoff schedule must be increasing and nonempty".into()));
    }
    let last = *schedule.last().unwrap();
    let k_r = sys.k_r;
    let min_cap = required_depth(sys, last, 0.0, Side::Forward);
    let n = depth_cap.saturating_sub(k_r);
    let ladder: Vec<usize> = [n / 2, (3 * n) / 4, n].iter().map(|&m| m + k_r).collect();
    if ladder[0] < min_cap || ladder[0] >= ladder[1] {
        return Err(Error::DepthCapTooSmall {
            depth_cap,
            cutoff: last,
            needed: 2 * (min_cap - k_r).max(2) + k_r,
        });
    }
    let per_cutoff_values = crate::par::map(schedule, |&t| crossing(sys, t, depth_cap).map(|a| (t, a)))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let per_depth_values = crate::par::map(&ladder[..2], |&cap| crossing(sys, last, cap).map(|a| (cap, a)))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let mut per_depth_values = per_depth_values;
    per_depth_values.push((depth_cap, per_cutoff_values.last().unwrap().1));
    let h: Vec<f64> = per_depth_values.iter().map(|&(c, _)| 1.0 / (c - k_r) as f64).collect();
    let a: Vec<f64> = per_depth_values.iter().map(|&(_, a)| a).collect();
    let two = (a[2] * h[1] - a[1] * h[2]) / (h[1] - h[2]);
    let l0 = h[1] * h[2] / ((h[0] - h[1]) * (h[0] - h[2]));
    let l1 = h[0] * h[2] / ((h[1] - h[0]) * (h[1] - h[2]));
    let l2 = h[0] * h[1] / ((h[2] - h[0]) * (h[2] - h[1]));
    let three = l0 * a[0] + l1 * a[1] + l2 * a[2];
    Ok(CriticalValueEstimate {
        alpha_star: three,
        per_cutoff_values,
        per_depth_values,
        tolerance: (three - two).abs().max(BISECT_TOL),
    })
}

/// One entry of a leaf-measure table.
#[derive(Debug, Clone, Serialize)]
pub struct LeafMeasure {
    pub side: Side,
    pub value: f64,
    pub per_cutoff: Vec<(f64, f64)>,
    pub extrapolation: Option<Extrapolated>,
    /// Set when the per-cutoff values spread over more than a factor 10 or
    /// could not be extrapolated.
    pub unstable: bool,
}

/// Depth cap used for a leaf target at `cutoff`: enough to reach the cutoff
/// from the anchor plus `margin` further levels.
pub fn leaf_depth_cap(sys: &SuspensionSystem, target: &CoverTarget, cutoff: f64, margin: usize) -> usize {
    match target {
        CoverTarget::WholeSpace => required_depth(sys, cutoff, 0.0, Side::Forward) + margin,
        CoverTarget::Leaf {
            side,
            anchor,
            prefixes,
        } => {
            let longest = prefixes.iter().map(|p| p.len()).max().unwrap_or(0);
            required_depth(sys, cutoff, anchor.fiber(), *side).max(longest) + margin
        }
    }
}

/// Extra depth below the cutoff level given to leaf-measure computations.
pub const LEAF_MARGIN: usize = 12;

fn leaf_measure(sys: &SuspensionSystem, pressure: f64, target: &CoverTarget, cutoffs: &[f64], side: Side) -> Result<LeafMeasure> {
    let mut per_cutoff = Vec::with_capacity(cutoffs.len());
    for &t in cutoffs {
        let cap = leaf_depth_cap(sys, target, t, LEAF_MARGIN);
        per_cutoff.push((t, cover_value(sys, target, pressure, t, cap)?.value));
    }
    let vals: Vec<f64> = per_cutoff.iter().map(|&(_, v)| v).collect();
    let max = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let mut unstable = !(max <= 10.0 * min);
    let extrapolation = if per_cutoff.len() >= 3 {
        match extrapolate_limit(&per_cutoff) {
            Ok(e) => Some(e),
            Err(_) => {
                unstable = true;
                None
            }
        }
    } else {
        None
    };
    let value = match &extrapolation {
        Some(e) if e.value > 0.0 && e.value.is_finite() => e.value,
        _ => *vals.last().unwrap_or(&f64::NAN),
    };
    Ok(LeafMeasure {
        side,
        value,
        per_cutoff,
        extrapolation,
        unstable,
    })
}

/// `m^u` of a forward target on an unstable leaf.
pub fn leaf_measure_u(sys: &SuspensionSystem, pressure: f64, target: &CoverTarget, cutoffs: &[f64]) -> Result<LeafMeasure> {
    match target {
        CoverTarget::Leaf { side: Side::Forward, .. } | CoverTarget::WholeSpace => {
            leaf_measure(sys, pressure, target, cutoffs, Side::Forward)
        }
        _ => Err(Error::Unsupported("m^u needs a forward target".into())),
    }
}

/// `m^s` of a backward target on a stable leaf.
pub fn leaf_measure_s(sys: &SuspensionSystem, pressure: f64, target: &CoverTarget, cutoffs: &[f64]) -> Result<LeafMeasure> {
    match target {
        CoverTarget::Leaf { side: Side::Backward, .. } => leaf_measure(sys, pressure, target, cutoffs, Side::Backward),
        _ => Err(Error::Unsupported("m^s needs a backward target".into())),
    }
}

/// Default cutoff schedule for leaf measures.
pub const LEAF_CUTOFFS: [f64; 3] = [8.0, 12.0, 16.0];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::system;
    use crate::symbolic::SymbolicPoint;
    use approx::assert_relative_eq;

    fn leaf(name: &str) -> (SuspensionSystem, SymbolicPoint) {
        let sys = system(name);
        let p = SymbolicPoint::periodic(&sys, &[0], 0.0).unwrap();
        (sys, p)
    }

    #[test]
    fn full2_leaf_at_log2_is_one() {
        let (sys, p) = leaf("FULL2");
        let target = CoverTarget::whole_leaf(Side::Forward, p);
        let r = cover_value(&sys, &target, 2f64.ln(), 10.0, 30).unwrap();
        assert_relative_eq!(r.value, 1.0, epsilon = 1e-12);
        assert!(r.optimal_cover.is_none());
        // ties go to refinement: the deepest level is used
        let r = cover_value(&sys, &target, 2f64.ln(), 10.0, 14).unwrap();
        let cover = r.optimal_cover.unwrap();
        assert_eq!(cover.len(), 1 << 14);
        assert!(cover.iter().all(|e| e.cylinder.word.len() == 15));
    }

    #[test]
    fn full2_above_pressure_refines_to_cap() {
        let (sys, p) = leaf("FULL2");
        let target = CoverTarget::whole_leaf(Side::Forward, p);
        let alpha = 2f64.ln() + 0.1;
        for t in [5.0, 10.0, 15.0] {
            let r = cover_value(&sys, &target, alpha, t, 20).unwrap();
            assert_relative_eq!(r.value, (-0.1f64 * 20.0).exp(), max_relative = 1e-12);
        }
        let shallow = cover_value(&sys, &target, alpha, 5.0, 10).unwrap().value;
        let deep = cover_value(&sys, &target, alpha, 5.0, 20).unwrap().value;
        assert!(deep < shallow);
    }

    #[test]
    fn full2_below_pressure_takes_at_cutoff() {
        let (sys, p) = leaf("FULL2");
        let target = CoverTarget::whole_leaf(Side::Forward, p);
        let alpha = 2f64.ln() - 0.1;
        let r = cover_value(&sys, &target, alpha, 7.0, 20).unwrap();
        assert_relative_eq!(r.value, (0.1f64 * 7.0).exp(), max_relative = 1e-12);
        assert_eq!(r.cover_size, 128.0);
    }

    #[test]
    fn gold_leaf_value_is_bounded_and_stable() {
        let (sys, p) = leaf("GOLD");
        let alpha = ((1.0 + 5f64.sqrt()) / 2.0).ln();
        let target = CoverTarget::whole_leaf(Side::Forward, p);
        let v12 = cover_value(&sys, &target, alpha, 12.0, 40).unwrap().value;
        assert!((0.5..=2.0).contains(&v12), "{v12}");
        for t in [8.0, 16.0] {
            let v = cover_value(&sys, &target, alpha, t, 40).unwrap().value;
            assert!((v / v12 - 1.0).abs() < 0.1);
        }
    }

    #[test]
    fn cap_too_small_is_rejected() {
        let (sys, p) = leaf("ROOF2");
        let err = cover_value(&sys, &CoverTarget::whole_leaf(Side::Forward, p), 0.5, 10.0, 9).unwrap_err();
        assert!(matches!(err, Error::DepthCapTooSmall { needed: 10, .. }));
        assert!(cover_value(&sys, &CoverTarget::WholeSpace, 0.5, 10.0, 10).is_ok());
    }

    #[test]
    fn optimal_cover_is_an_antichain_summing_to_value() {
        for name in ["GOLD", "ROOF2", "BERN13"] {
            let (sys, p) = leaf(name);
            for alpha in [0.3, 0.48, 0.7] {
                let r = cover_value(&sys, &CoverTarget::whole_leaf(Side::Forward, p.clone()), alpha, 4.0, 9).unwrap();
                let cover = r.optimal_cover.clone().unwrap();
                assert_eq!(cover.len() as f64, r.cover_size);
                let total: f64 = cover.iter().map(|e| e.log_weight.exp()).sum();
                assert_relative_eq!(total, r.value, max_relative = 1e-12);
                for (i, a) in cover.iter().enumerate() {
                    assert!(a.order >= 4.0 - 1e-9);
                    for b in &cover[i + 1..] {
                        assert!(!a.cylinder.is_subset_of(&b.cylinder) && !b.cylinder.is_subset_of(&a.cylinder));
                    }
                }
                // covering: every depth-9 word on the leaf lies in some element
                for w in sys.sft.admissible_words(10) {
                    if w[0] != 0 {
                        continue;
                    }
                    let c = CylinderSet::new(0, w);
                    assert!(cover.iter().any(|e| c.is_subset_of(&e.cylinder)));
                }
            }
        }
    }

    #[test]
    fn backward_leaf_mirrors_forward_on_full_shift() {
        let (sys, p) = leaf("FULL2");
        let alpha = 2f64.ln();
        for depth in 1..=4 {
            let prefix = vec![1u8; depth];
            let f = cover_value(&sys, &CoverTarget::leaf_cylinder(Side::Forward, p.clone(), prefix.clone()), alpha, 8.0, 16).unwrap();
            let b = cover_value(&sys, &CoverTarget::leaf_cylinder(Side::Backward, p.clone(), prefix), alpha, 8.0, 16).unwrap();
            assert_relative_eq!(f.value, 0.5f64.powi(depth as i32), max_relative = 1e-12);
            assert_relative_eq!(b.value, f.value, max_relative = 1e-12);
        }
    }

    #[test]
    fn backward_needs_single_symbol_windows() {
        let sys = system("FULL2W");
        let p = SymbolicPoint::periodic(&sys, &[0], 0.0).unwrap();
        let err = cover_value(&sys, &CoverTarget::whole_leaf(Side::Backward, p), 0.5, 4.0, 10).unwrap_err();
        assert!(matches!(err, Error::Unsupported(_)));
    }

    #[test]
    fn from_cylinder_fills_gaps_and_checks_leaf() {
        let (sys, p) = leaf("GOLD");
        let c = CylinderSet::new(0, vec![0, 1]).clone();
        let mut wide = CylinderSet::new(3, vec![0]);
        wide.lo = 3;
        match CoverTarget::from_cylinder(&sys, Side::Forward, p.clone(), &wide).unwrap() {
            CoverTarget::Leaf { prefixes, .. } => {
                // coords 1..3 with x3 = a: aba excluded? only bb is forbidden
                for q in &prefixes {
                    assert_eq!(q.len(), 3);
                    assert_eq!(q[2], 0);
                }
                assert_eq!(prefixes.len(), 3);
            }
            _ => unreachable!(),
        }
        assert!(CoverTarget::from_cylinder(&sys, Side::Forward, p.clone(), &c).is_ok());
        let off_leaf = CylinderSet::new(0, vec![1]);
        assert!(CoverTarget::from_cylinder(&sys, Side::Forward, p, &off_leaf).is_err());
    }

    #[test]
    fn extrapolation_examples() {
        let c = extrapolate_limit(&[(5.0, 1.0), (10.0, 1.0), (15.0, 1.0)]).unwrap();
        assert_eq!(c.value, 1.0);
        assert!(c.accelerated.is_none());
        let g = extrapolate_limit(&[(5.0, 1.5), (10.0, 1.25), (15.0, 1.125)]).unwrap();
        assert_relative_eq!(g.value, 1.0, epsilon = 1e-12);
        assert_eq!(g.raw_tail, 1.125);
        assert!(matches!(
            extrapolate_limit(&[(5.0, 3.0), (10.0, 0.4), (15.0, 2.7)]),
            Err(Error::Extrapolation(_))
        ));
        assert!(extrapolate_limit(&[(5.0, 1.0), (10.0, 1.0)]).is_err());
    }

    #[test]
    fn critical_value_of_full2() {
        let sys = system("FULL2");
        let est = critical_value(&sys, &[10.0, 18.0], 40).unwrap();
        assert!((est.alpha_star - 2f64.ln()).abs() < 1e-6, "{est:?}");
        // raw crossings sit ln 2 / 40 above the pressure whatever the cutoff
        for &(_, a) in &est.per_cutoff_values {
            assert_relative_eq!(a - 2f64.ln(), 2f64.ln() / 40.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn cutoff_table_has_header_and_rows() {
        let rows = vec![CutoffRow {
            cutoff: 5.0,
            alpha: 0.5,
            value: 1.0,
            cover_size: 32.0,
        }];
        let mut out = Vec::new();
        write_cutoff_table(&mut out, &rows).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text, "T,alpha,value,cover_size\n5,0.5,1e0,32\n");
    }
}
