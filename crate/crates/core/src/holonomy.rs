//! Bracket, the cocycles ω⁺ and ω⁻, and checks of φ-conformality and the
//! holonomy Radon–Nikodym formula.
//!
//! Coordinates of two points are matched through their `shifts` counters: the
//! symbol of `y` at `j` corresponds to the symbol of `x` at
//! `j + y.shifts() − x.shifts()`. Points built by splicing inherit the
//! counter of the future part.

use serde::Serialize;

use crate::cover::{leaf_measure_u, CoverTarget, LEAF_CUTOFFS};
use crate::error::{Error, Result};
use crate::points::overwrite;
use crate::report::CheckRecord;
use crate::symbolic::{Side, SuspensionSystem, SymbolicPoint};

#[derive(Debug, Clone)]
pub struct BracketResult {
    pub point: SymbolicPoint,
    /// `f_beta([x,y])` lies on the strong stable set of `x`.
    pub beta: f64,
    /// Displacement taking `x` to the strong stable set of the bracket.
    pub t_displacement: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CocycleValue {
    pub value: f64,
    /// Coordinate beyond which the integrand vanishes identically.
    pub truncation_depth: usize,
    pub exact: bool,
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

/// Smallest `J` with `y_j = x_{j+n}` for all `j ≥ J`, if any.
fn future_agreement(x: &SymbolicPoint, y: &SymbolicPoint, n: i64) -> Option<i64> {
    let (_, xhi) = x.window_range();
    let (_, yhi) = y.window_range();
    let (xp, yp) = (x.tail_periods().1, y.tail_periods().1);
    let start = yhi.max(xhi - n) + 1;
    let period = lcm(xp, yp) as i64;
    if (start..start + period).any(|j| y.symbol(j) != x.symbol(j + n)) {
        return None;
    }
    let (ylo, _) = y.window_range();
    let (xlo, _) = x.window_range();
    let floor = ylo.min(xlo - n) - 2 * period - 1;
    let mut j = start;
    while j > floor && y.symbol(j - 1) == x.symbol(j - 1 + n) {
        j -= 1;
    }
    Some(j)
}

/// Largest `J` with `y_j = x_{j+n}` for all `j ≤ J`, if any.
fn past_agreement(x: &SymbolicPoint, y: &SymbolicPoint, n: i64) -> Option<i64> {
    let (xlo, xhi) = x.window_range();
    let (ylo, yhi) = y.window_range();
    let (xp, yp) = (x.tail_periods().0, y.tail_periods().0);
    let start = ylo.min(xlo - n) - 1;
    let period = lcm(xp, yp) as i64;
    if (start - period + 1..=start).any(|j| y.symbol(j) != x.symbol(j + n)) {
        return None;
    }
    let ceil = yhi.max(xhi - n) + 2 * period + 1;
    let mut j = start;
    while j < ceil && y.symbol(j + 1) == x.symbol(j + 1 + n) {
        j += 1;
    }
    Some(j)
}

fn relative_shift(x: &SymbolicPoint, y: &SymbolicPoint) -> i64 {
    y.shifts() - x.shifts()
}

/// `t` with `f_t x` on the strong stable set of `y`, and the coordinate of `y`
/// from which the synchronised orbits see identical potential windows.
pub fn weak_stable_displacement(sys: &SuspensionSystem, x: &SymbolicPoint, y: &SymbolicPoint) -> Result<(f64, i64)> {
    let n = relative_shift(x, y);
    let j0 = future_agreement(x, y, n).ok_or_else(|| Error::NotRelated {
        relation: "weak-stable",
        detail: "futures never agree".into(),
    })?;
    let j = (j0 + sys.memory() as i64 - 1).max(1);
    Ok((sys.crossing_time(x, j + n) - sys.crossing_time(y, j), j))
}

/// `t` with `f_t x` on the strong unstable set of `y`, and the coordinate of
/// `y` below which all potential windows agree.
pub fn weak_unstable_displacement(sys: &SuspensionSystem, x: &SymbolicPoint, y: &SymbolicPoint) -> Result<(f64, i64)> {
    let n = relative_shift(x, y);
    let j0 = past_agreement(x, y, n).ok_or_else(|| Error::NotRelated {
        relation: "weak-unstable",
        detail: "pasts never agree".into(),
    })?;
    let j = j0.min(0);
    Ok((sys.crossing_time(x, j + n) - sys.crossing_time(y, j), j))
}

/// `ω⁺(x, y) = Φ(x,t) − tP + ∫₀^∞ φ(f_{τ+t}x) − φ(f_τ y) dτ` for `y` on the
/// weak stable set of `x`. Past the synchronised coordinate the integrand is
/// zero, so the value is `Φ(x, t+T) − Φ(y, T) − tP` for `T` there.
pub fn omega_plus(sys: &SuspensionSystem, x: &SymbolicPoint, y: &SymbolicPoint, pressure: f64) -> Result<CocycleValue> {
    let (t, j) = weak_stable_displacement(sys, x, y)?;
    let big_t = sys.crossing_time(y, j);
    let n = relative_shift(x, y);
    let value = sys.birkhoff(x, sys.crossing_time(x, j + n)) - sys.birkhoff(y, big_t) - t * pressure;
    Ok(CocycleValue {
        value,
        truncation_depth: j as usize,
        exact: true,
    })
}

/// `ω⁻(x, y) = −Φ(x,t) + tP + ∫₀^∞ φ(f_{t−τ}x) − φ(f_{−τ}y) dτ` for `y` on
/// the weak unstable set of `x`, evaluated as `tP − Φ(x, t−S) + Φ(y, −S)`.
pub fn omega_minus(sys: &SuspensionSystem, x: &SymbolicPoint, y: &SymbolicPoint, pressure: f64) -> Result<CocycleValue> {
    let (t, j) = weak_unstable_displacement(sys, x, y)?;
    let n = relative_shift(x, y);
    let value = t * pressure - sys.birkhoff(x, sys.crossing_time(x, j + n)) + sys.birkhoff(y, sys.crossing_time(y, j));
    Ok(CocycleValue {
        value,
        truncation_depth: (-j) as usize,
        exact: true,
    })
}

/// `[x, y]`: the past of `y` (coordinates ≤ 0) followed by the future of `x`,
/// at the fiber height of `y`.
pub fn bracket(sys: &SuspensionSystem, x: &SymbolicPoint, y: &SymbolicPoint) -> Result<BracketResult> {
    if x.symbol(0) != y.symbol(0) {
        return Err(Error::NotInRectangle(format!(
            "x_0 = {} but y_0 = {}",
            x.symbol(0),
            y.symbol(0)
        )));
    }
    if (x.fiber() - y.fiber()).abs() >= sys.min_roof() / 2.0 {
        return Err(Error::NotInRectangle(format!(
            "fibers {} and {} are not local",
            x.fiber(),
            y.fiber()
        )));
    }
    let point = SymbolicPoint::splice(sys, y, x, 1, y.fiber())
        .map_err(|e| Error::NotInRectangle(format!("splice failed: {e}")))?;
    let (beta, _) = weak_stable_displacement(sys, &point, x)?;
    Ok(BracketResult {
        point,
        beta,
        t_displacement: -beta,
    })
}

fn leaf_mass(sys: &SuspensionSystem, pressure: f64, anchor: &SymbolicPoint, prefix: &[u8]) -> Result<f64> {
    let target = CoverTarget::leaf_cylinder(Side::Forward, anchor.clone(), prefix.to_vec());
    Ok(leaf_measure_u(sys, pressure, &target, &LEAF_CUTOFFS)?.value)
}

/// Every admissible extension of `prefix` (symbols on coordinates 1, 2, …
/// after `anchor`'s coordinate 0) to at least `len` symbols.
pub fn refine_prefix(sys: &SuspensionSystem, anchor: &SymbolicPoint, prefix: &[u8], len: usize) -> Vec<Vec<u8>> {
    let mut out = vec![prefix.to_vec()];
    while out[0].len() < len {
        let mut next = Vec::new();
        for p in &out {
            let last = *p.last().unwrap_or(&anchor.symbol(0));
            for s in sys.sft.successors(last) {
                let mut q = p.clone();
                q.push(s);
                next.push(q);
            }
        }
        out = next;
    }
    out
}

/// Number of roof crossings made by time `t` from `anchor` followed by
/// `prefix`, if the prefix is long enough to decide it.
fn crossings_within(sys: &SuspensionSystem, z: &SymbolicPoint, prefix_len: usize, t: f64) -> Option<usize> {
    let mut reach = -z.fiber();
    let mut k = 0usize;
    loop {
        // roof at coordinate k reads coordinates ≤ k
        if k > prefix_len {
            return None;
        }
        let r = sys.roof_at_coord(z, k as i64);
        if reach + r > t {
            return Some(k);
        }
        reach += r;
        k += 1;
    }
}

/// `m^u_{f_t W}(f_t Z)` against `∫_Z e^{tP − Φ(z,t)} dm^u_W(z)` for the
/// forward cylinder `Z` given by `prefix` on the unstable leaf of `anchor`.
pub fn check_conformality(
    sys: &SuspensionSystem,
    pressure: f64,
    t: f64,
    anchor: &SymbolicPoint,
    prefix: &[u8],
    tolerance: f64,
) -> Result<CheckRecord> {
    if t < 0.0 {
        return Err(Error::NegativeOrder(t));
    }
    // split Z until the crossing count by time t is constant on each piece
    let mut pending = vec![prefix.to_vec()];
    let mut pieces = Vec::new();
    while let Some(p) = pending.pop() {
        let z = overwrite_prefix(sys, anchor, &p)?;
        match crossings_within(sys, &z, p.len(), t) {
            Some(k) if k <= p.len() => pieces.push((p, z, k)),
            _ => pending.extend(refine_prefix(sys, anchor, &p, p.len() + 1)),
        }
    }
    let (mut lhs, mut rhs) = (0.0, 0.0);
    for (p, z, k) in &pieces {
        let image = sys.flow(z, t);
        lhs += leaf_mass(sys, pressure, &image, &p[*k..])?;
        let density = (t * pressure - sys.birkhoff(z, t)).exp();
        rhs += density * leaf_mass(sys, pressure, anchor, p)?;
    }
    Ok(CheckRecord::ratio_check(
        "conformality",
        &sys.name,
        format!("t={t} Z={}", crate::cylinder::format_word(prefix)),
        lhs,
        rhs,
        tolerance,
    ))
}

fn overwrite_prefix(sys: &SuspensionSystem, anchor: &SymbolicPoint, prefix: &[u8]) -> Result<SymbolicPoint> {
    if prefix.is_empty() {
        Ok(anchor.clone())
    } else {
        overwrite(sys, anchor, 1, prefix)
    }
}

/// Weak-stable holonomy from the unstable leaf of `source` to that of
/// `target` by replacing the past (coordinates ≤ 0) and the fiber height.
#[derive(Debug, Clone)]
pub struct PastReplacement {
    pub source: SymbolicPoint,
    pub target: SymbolicPoint,
}

impl PastReplacement {
    pub fn new(source: SymbolicPoint, target: SymbolicPoint) -> Result<Self> {
        if source.symbol(0) != target.symbol(0) {
            return Err(Error::NotInRectangle("leaves differ at coordinate 0".into()));
        }
        Ok(PastReplacement { source, target })
    }

    pub fn apply(&self, sys: &SuspensionSystem, z: &SymbolicPoint) -> Result<SymbolicPoint> {
        SymbolicPoint::splice(sys, &self.target, z, 1, self.target.fiber())
    }
}

/// Compares `m^u_{W₂}(πZ)` with `∫_Z e^{ω⁺(πz, z)} dm^u_{W₁}(z)` over a
/// family of forward cylinders and records the worst deviation.
pub fn holonomy_rn_check(
    sys: &SuspensionSystem,
    pressure: f64,
    pi: &PastReplacement,
    family: &[Vec<u8>],
    tolerance: f64,
) -> Result<CheckRecord> {
    let depth = sys.memory().saturating_sub(1);
    let mut worst: (f64, f64, f64) = (0.0, 1.0, 1.0);
    for prefix in family {
        let lhs = leaf_mass(sys, pressure, &pi.target, prefix)?;
        let mut rhs = 0.0;
        for p in refine_prefix(sys, &pi.source, prefix, depth) {
            let z = overwrite_prefix(sys, &pi.source, &p)?;
            let w = omega_plus(sys, &pi.apply(sys, &z)?, &z, pressure)?.value;
            rhs += w.exp() * leaf_mass(sys, pressure, &pi.source, &p)?;
        }
        let dev = (lhs / rhs - 1.0).abs();
        if dev >= worst.0 {
            worst = (dev, lhs, rhs);
        }
    }
    Ok(CheckRecord::ratio_check(
        "holonomy_rn",
        &sys.name,
        format!("family={} cylinders", family.len()),
        worst.1,
        worst.2,
        tolerance,
    ))
}

/// Deviation `|m^u(πZ)/m^u(Z) − 1|` for past replacements that agree with
/// `anchor` on `[−d, 0]` and differ at `−d − 1`, for each `d` in `depths`.
pub fn continuity_profile(
    sys: &SuspensionSystem,
    pressure: f64,
    anchor: &SymbolicPoint,
    prefix: &[u8],
    depths: &[usize],
) -> Result<Vec<(usize, f64)>> {
    let base = leaf_mass(sys, pressure, anchor, prefix)?;
    let mut out = Vec::new();
    for &d in depths {
        let target = differing_past(sys, anchor, d)?;
        let m = leaf_mass(sys, pressure, &target, prefix)?;
        out.push((d, (m / base - 1.0).abs()));
    }
    Ok(out)
}

/// A point with the same coordinates as `anchor` on `[−d, ∞)` and a
/// different symbol at `−d − 1`.
pub fn differing_past(sys: &SuspensionSystem, anchor: &SymbolicPoint, d: usize) -> Result<SymbolicPoint> {
    let c = -(d as i64) - 1;
    let keep = anchor.symbol(c + 1);
    let old = anchor.symbol(c);
    for s in sys.sft.predecessors(keep) {
        if s == old {
            continue;
        }
        let mut word = vec![s];
        word.extend(anchor.symbols(c + 1, 0));
        let with = crate::points::point_with_word(sys, c, &word, anchor.fiber())?;
        if let Ok(p) = SymbolicPoint::splice(sys, &with, anchor, 1, anchor.fiber()) {
            return Ok(p);
        }
    }
    Err(Error::Unsupported(format!(
        "no alternative symbol at coordinate {c}"
    )))
}
