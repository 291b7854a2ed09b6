//! Local product construction of the equilibrium measure on rectangles.
//!
//! A rectangle around `q` is the set of points with `z_0 = q_0` and fiber
//! height within `δ` of `q`'s. Its unstable plaque is the unstable leaf of
//! `q` at `q`'s height; its weak-stable plaque is the stable leaf of `q`
//! flowed by every offset in `(−δ, δ)`. Test sets are two-sided cylinders
//! through coordinate 0 crossed with a fiber interval inside the window.
//!
//! Densities are exact finite expressions; the only quadrature is along the
//! fiber, where every integrand is a single exponential in the offset.

use std::collections::HashMap;
use std::sync::Mutex;

use serde::Serialize;

use crate::cover::{leaf_measure_s, leaf_measure_u, CoverTarget, LEAF_CUTOFFS};
use crate::cylinder::{CylinderSet, FiberRange};
use crate::error::{Error, Result};
use crate::holonomy::{bracket, omega_minus, omega_plus, refine_prefix};
use crate::oracle::flow_pressure;
use crate::points::overwrite;
use crate::report::{CheckRecord, MeasureTable, Provenance};
use crate::symbolic::{LocallyConstantFunction, Side, SuspensionSystem, SymbolicPoint};

/// 4-point Gauss–Legendre nodes and weights on [−1, 1].
const GL_NODES: [f64; 4] = [
    -0.861_136_311_594_052_6,
    -0.339_981_043_584_856_3,
    0.339_981_043_584_856_3,
    0.861_136_311_594_052_6,
];
const GL_WEIGHTS: [f64; 4] = [
    0.347_854_845_137_453_9,
    0.652_145_154_862_546_1,
    0.652_145_154_862_546_1,
    0.347_854_845_137_453_9,
];

const WINDOW_EPS: f64 = 1e-12;

fn quadrature(a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> {
    let (mid, half) = ((a + b) / 2.0, (b - a) / 2.0);
    GL_NODES.iter().zip(GL_WEIGHTS).map(move |(x, w)| (mid + half * x, half * w))
}

#[derive(Debug, Clone)]
pub struct Rectangle {
    pub q: SymbolicPoint,
    pub delta: f64,
}

/// A test set inside a rectangle: symbols on `−past.len() .. −1`, the
/// center symbol at 0, symbols on `1 ..= future.len()`, and absolute fiber
/// heights `[lo, hi)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RectSet {
    pub past: Vec<u8>,
    pub future: Vec<u8>,
    pub fiber: (f64, f64),
}

impl Rectangle {
    /// Rectangle with `δ = min_roof/4` centred at `q` moved to height
    /// `min_roof/2`. The roof must read coordinate 0 only, so that strong
    /// stable leaves sit at a single fiber height.
    pub fn new(sys: &SuspensionSystem, q: &SymbolicPoint) -> Result<Self> {
        if sys.roof.window() != (0, 0) {
            return Err(Error::Unsupported("rectangles need a roof reading coordinate 0 only".into()));
        }
        let h = sys.min_roof();
        Ok(Rectangle {
            q: q.with_fiber(h / 2.0),
            delta: h / 4.0,
        })
    }

    pub fn center_symbol(&self) -> u8 {
        self.q.symbol(0)
    }

    pub fn window(&self) -> (f64, f64) {
        (self.q.fiber() - self.delta, self.q.fiber() + self.delta)
    }

    /// The whole rectangle as a test set.
    pub fn whole(&self) -> RectSet {
        RectSet {
            past: vec![],
            future: vec![],
            fiber: self.window(),
        }
    }

    /// Splits a two-sided cylinder into a [`RectSet`], or reports why it is
    /// not inside the rectangle.
    pub fn locate(&self, sys: &SuspensionSystem, c: &CylinderSet) -> Result<RectSet> {
        if c.symbol(0) != Some(self.center_symbol()) {
            return Err(Error::NotInRectangle(format!(
                "set does not fix coordinate 0 to {}",
                self.center_symbol()
            )));
        }
        let fiber = match c.fiber {
            FiberRange::Full => (0.0, sys.roof.eval_word(&[self.center_symbol()])),
            FiberRange::Interval(a, b) => (a, b),
        };
        let set = RectSet {
            past: c.word[..(-c.lo) as usize].to_vec(),
            future: c.word[(1 - c.lo) as usize..].to_vec(),
            fiber,
        };
        self.check(&set)?;
        Ok(set)
    }

    fn check(&self, z: &RectSet) -> Result<()> {
        let (lo, hi) = self.window();
        if z.fiber.0 < lo - WINDOW_EPS || z.fiber.1 > hi + WINDOW_EPS {
            return Err(Error::NotInRectangle(format!(
                "fiber [{}, {}) leaves the window [{lo}, {hi})",
                z.fiber.0, z.fiber.1
            )));
        }
        Ok(())
    }

    pub fn contains(&self, sys: &SuspensionSystem, c: &CylinderSet) -> bool {
        self.locate(sys, c).is_ok()
    }
}

impl RectSet {
    pub fn to_cylinder(&self, center: u8) -> CylinderSet {
        let mut word = self.past.clone();
        word.push(center);
        word.extend_from_slice(&self.future);
        CylinderSet::new(-(self.past.len() as i64), word).with_fiber(FiberRange::Interval(self.fiber.0, self.fiber.1))
    }

    pub fn shifted_fiber(&self, tau: f64) -> RectSet {
        RectSet {
            fiber: (self.fiber.0 + tau, self.fiber.1 + tau),
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Formula {
    /// Pushforward of `m^u_q × m^cs_q` under the bracket, density at `z`.
    Pushforward,
    /// Double integral over the two plaques.
    DoubleIntegral,
    /// Unstable conditionals `e^{ω⁻(z,y)} dm^u_y` integrated against `m^cs_q`.
    UnstableConditional,
    /// Weak-stable conditionals `e^{ω⁺(z,x)} dm^cs_x` integrated against `m^u_q`.
    StableConditional,
}

impl Formula {
    pub const ALL: [Formula; 4] = [
        Formula::Pushforward,
        Formula::DoubleIntegral,
        Formula::UnstableConditional,
        Formula::StableConditional,
    ];

    pub fn from_index(i: usize) -> Option<Formula> {
        Formula::ALL.get(i.wrapping_sub(1)).copied()
    }
}

type LeafKey = (bool, Vec<u8>, u64, Vec<u8>);

/// Evaluation context: system, pressure, rectangle, and a memo of leaf
/// measures shared across sets and threads.
pub struct ProductContext<'a> {
    pub sys: &'a SuspensionSystem,
    pub pressure: f64,
    pub rect: Rectangle,
    cache: Mutex<HashMap<LeafKey, f64>>,
}

const KEY_RADIUS: i64 = 12;

impl<'a> ProductContext<'a> {
    pub fn new(sys: &'a SuspensionSystem, pressure: f64, rect: Rectangle) -> Self {
        ProductContext {
            sys,
            pressure,
            rect,
            cache: Mutex::new(HashMap::new()),
        }
    }

    fn leaf(&self, side: Side, anchor: &SymbolicPoint, prefix: Vec<u8>) -> Result<f64> {
        let key = (
            side == Side::Forward,
            anchor.symbols(-KEY_RADIUS, KEY_RADIUS),
            anchor.fiber().to_bits(),
            prefix.clone(),
        );
        if let Some(v) = self.cache.lock().unwrap().get(&key) {
            return Ok(*v);
        }
        let target = CoverTarget::leaf_cylinder(side, anchor.clone(), prefix);
        let v = match side {
            Side::Forward => leaf_measure_u(self.sys, self.pressure, &target, &LEAF_CUTOFFS)?.value,
            Side::Backward => leaf_measure_s(self.sys, self.pressure, &target, &LEAF_CUTOFFS)?.value,
        };
        self.cache.lock().unwrap().insert(key, v);
        Ok(v)
    }

    /// `m^u` on the unstable leaf of `anchor` of the cylinder fixing
    /// coordinates `1..=future.len()`.
    pub fn m_u(&self, anchor: &SymbolicPoint, future: &[u8]) -> Result<f64> {
        self.leaf(Side::Forward, anchor, future.to_vec())
    }

    /// `m^s` on the stable leaf of `anchor` of the cylinder fixing
    /// coordinates `−past.len()..=−1` (given in coordinate order).
    pub fn m_s(&self, anchor: &SymbolicPoint, past: &[u8]) -> Result<f64> {
        self.leaf(Side::Backward, anchor, past.iter().rev().copied().collect())
    }

    fn with_past(&self, base: &SymbolicPoint, past: &[u8]) -> Result<SymbolicPoint> {
        if past.is_empty() {
            return Ok(base.clone());
        }
        overwrite(self.sys, base, -(past.len() as i64), past)
    }

    fn with_future(&self, base: &SymbolicPoint, future: &[u8]) -> Result<SymbolicPoint> {
        if future.is_empty() {
            return Ok(base.clone());
        }
        overwrite(self.sys, base, 1, future)
    }

    /// Point of the set `z` at height `fiber`, with `q`'s tails.
    pub fn point_in(&self, z: &RectSet, fiber: f64) -> Result<SymbolicPoint> {
        let p = self.with_past(&self.rect.q, &z.past)?;
        Ok(self.with_future(&p, &z.future)?.with_fiber(fiber))
    }

    /// Weak-stable plaque measure through `anchor`'s future of the backward
    /// cylinder `past` crossed with absolute heights `[a, b)`.
    pub fn weak_leaf_measure_at(&self, anchor: &SymbolicPoint, past: &[u8], fiber: (f64, f64)) -> Result<f64> {
        if fiber.1 <= fiber.0 {
            return Ok(0.0);
        }
        let mut total = 0.0;
        for (f, w) in quadrature(fiber.0, fiber.1) {
            total += w * self.m_s(&anchor.with_fiber(f), past)?;
        }
        Ok(total)
    }

    /// `m^cs_q` of a backward cylinder times a fiber interval.
    pub fn weak_leaf_measure(&self, past: &[u8], fiber: (f64, f64)) -> Result<f64> {
        let (lo, hi) = self.rect.window();
        if fiber.0 < lo - WINDOW_EPS || fiber.1 > hi + WINDOW_EPS {
            return Err(Error::NotInRectangle("fiber interval outside the weak-stable plaque".into()));
        }
        self.weak_leaf_measure_at(&self.rect.q, past, fiber)
    }

    fn admissible_futures(&self, len: usize) -> Vec<Vec<u8>> {
        refine_prefix(self.sys, &self.rect.q, &[], len)
    }

    fn admissible_pasts(&self, len: usize) -> Vec<Vec<u8>> {
        let mut out: Vec<Vec<u8>> = vec![vec![]];
        for _ in 0..len {
            let mut next = Vec::new();
            for p in &out {
                let first = *p.first().unwrap_or(&self.rect.center_symbol());
                for s in self.sys.sft.predecessors(first) {
                    let mut v = vec![s];
                    v.extend_from_slice(p);
                    next.push(v);
                }
            }
            out = next;
        }
        out
    }

    /// `μ_q(Z)` by one of the four product formulas.
    pub fn mu_q(&self, z: &RectSet, formula: Formula) -> Result<f64> {
        self.rect.check(z)?;
        if z.fiber.1 <= z.fiber.0 {
            return Ok(0.0);
        }
        match formula {
            Formula::Pushforward => self.formula_pushforward(z),
            Formula::DoubleIntegral => self.formula_double(z),
            Formula::UnstableConditional => self.formula_unstable(z),
            Formula::StableConditional => self.formula_stable(z),
        }
    }

    fn formula_pushforward(&self, z: &RectSet) -> Result<f64> {
        let (m, n) = (z.past.len() as i64, z.future.len() as i64);
        let q = &self.rect.q;
        let mut total = 0.0;
        for (f, w) in quadrature(z.fiber.0, z.fiber.1) {
            let pt = self.point_in(z, f)?;
            let x = bracket(self.sys, &pt, q)?.point;
            let y = bracket(self.sys, q, &pt)?.point;
            let back = bracket(self.sys, &x, &y)?.point;
            if !back.agrees_with(&pt, -m - KEY_RADIUS, n + KEY_RADIUS, 1e-12) {
                return Err(Error::NotRelated {
                    relation: "z = [x, y]".into(),
                    detail: "bracket does not invert the projections".into(),
                });
            }
            let dens = (omega_plus(self.sys, &pt, &x, self.pressure)?.value
                + omega_minus(self.sys, &pt, &y, self.pressure)?.value)
                .exp();
            let mu = self.m_u(q, &x.symbols(1, n))?;
            let ms = self.m_s(&y, &y.symbols(-m, -1))?;
            total += w * dens * mu * ms;
        }
        Ok(total)
    }

    fn formula_double(&self, z: &RectSet) -> Result<f64> {
        let (m, n) = (z.past.len(), z.future.len());
        let q = &self.rect.q;
        let xs = self.admissible_futures(n);
        let ys = self.admissible_pasts(m);
        let nodes: Vec<(f64, f64)> = quadrature(z.fiber.0, z.fiber.1).collect();
        let mut total = 0.0;
        for xw in &xs {
            let x = self.with_future(q, xw)?;
            for yw in &ys {
                let y0 = self.with_past(q, yw)?;
                for &(f, w) in &nodes {
                    let y = y0.with_fiber(f);
                    let pt = bracket(self.sys, &x, &y)?.point;
                    let inside = pt.symbols(-(m as i64), -1) == z.past
                        && pt.symbols(1, n as i64) == z.future
                        && pt.fiber() >= z.fiber.0
                        && pt.fiber() <= z.fiber.1;
                    if !inside {
                        continue;
                    }
                    let h = (omega_plus(self.sys, &pt, &x, self.pressure)?.value
                        + omega_minus(self.sys, &pt, &y, self.pressure)?.value)
                        .exp();
                    total += w * h * self.m_u(q, xw)? * self.m_s(&y, yw)?;
                }
            }
        }
        Ok(total)
    }

    fn formula_unstable(&self, z: &RectSet) -> Result<f64> {
        let base = self.with_past(&self.rect.q, &z.past)?;
        let mut total = 0.0;
        for (f, w) in quadrature(z.fiber.0, z.fiber.1) {
            let y = base.with_fiber(f);
            let pt = self.with_future(&y, &z.future)?;
            let inner = omega_minus(self.sys, &pt, &y, self.pressure)?.value.exp() * self.m_u(&y, &z.future)?;
            total += w * self.m_s(&y, &z.past)? * inner;
        }
        Ok(total)
    }

    fn formula_stable(&self, z: &RectSet) -> Result<f64> {
        let x = self.with_future(&self.rect.q, &z.future)?;
        let mut inner = 0.0;
        for (f, w) in quadrature(z.fiber.0, z.fiber.1) {
            let xf = x.with_fiber(f);
            let pt = self.with_past(&xf, &z.past)?;
            inner += w * omega_plus(self.sys, &pt, &x, self.pressure)?.value.exp() * self.m_s(&xf, &z.past)?;
        }
        Ok(self.m_u(&self.rect.q, &z.future)? * inner)
    }

    /// `h(y)` both ways: `∫ e^{ω⁺([x,y],x)} dm^u_q(x)` and `m^u_y(R^u_q(y))`.
    pub fn conditional_density(&self, y: &SymbolicPoint) -> Result<(f64, f64)> {
        let q = &self.rect.q;
        let depth = self.sys.potential.window_len().max(self.sys.roof.window_len()).max(2) - 1;
        let mut integral = 0.0;
        for xw in self.admissible_futures(depth) {
            let x = self.with_future(q, &xw)?;
            let pt = bracket(self.sys, &x, y)?.point;
            integral += omega_plus(self.sys, &pt, &x, self.pressure)?.value.exp() * self.m_u(q, &xw)?;
        }
        Ok((integral, self.m_u(y, &[])?))
    }

    pub fn conditional_density_check(&self, fixture: &str, y: &SymbolicPoint, tol: f64) -> Result<CheckRecord> {
        let (a, b) = self.conditional_density(y)?;
        Ok(CheckRecord::ratio_check(
            "conditional_density",
            fixture,
            format!("y={}", crate::cylinder::format_word(&y.symbols(-3, 3))),
            a,
            b,
            tol,
        ))
    }

    /// `μ_q(Z)` rebuilt from the transversal density `h(y)` against `m^cs_q`
    /// and the normalised unstable conditionals `e^{ω⁻(z,y)}/h(y)`.
    pub fn conditional_reconstruction(&self, z: &RectSet) -> Result<f64> {
        self.rect.check(z)?;
        let base = self.with_past(&self.rect.q, &z.past)?;
        let mut total = 0.0;
        for (f, w) in quadrature(z.fiber.0, z.fiber.1) {
            let y = base.with_fiber(f);
            let h = self.m_u(&y, &[])?;
            let pt = self.with_future(&y, &z.future)?;
            let conditional = omega_minus(self.sys, &pt, &y, self.pressure)?.value.exp() / h * self.m_u(&y, &z.future)?;
            total += w * self.m_s(&y, &z.past)? * h * conditional;
        }
        Ok(total)
    }

    /// All four formulas on one set.
    pub fn all_formulas(&self, z: &RectSet) -> Result<[f64; 4]> {
        let mut out = [0.0; 4];
        for (i, f) in Formula::ALL.iter().enumerate() {
            out[i] = self.mu_q(z, *f)?;
        }
        Ok(out)
    }
}

/// Largest pairwise relative deviation among the four formula values.
pub fn formula_spread(values: &[f64; 4]) -> f64 {
    let hi = values.iter().cloned().fold(f64::MIN, f64::max);
    let lo = values.iter().cloned().fold(f64::MAX, f64::min);
    if hi == 0.0 {
        0.0
    } else {
        (hi - lo) / lo.abs().max(f64::MIN_POSITIVE)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ProductRow {
    pub set_id: String,
    pub formula: [f64; 4],
    pub oracle: f64,
    pub ratio: f64,
    pub pass: bool,
}

/// Evaluates all four formulas on each set and compares the first to the
/// oracle mass. `pass` records four-formula agreement within `tol`.
pub fn comparison_table(
    ctx: &ProductContext,
    sets: &[RectSet],
    oracle: impl Fn(&CylinderSet) -> Result<f64> + Sync,
    tol: f64,
) -> Result<Vec<ProductRow>> {
    let center = ctx.rect.center_symbol();
    crate::par::map(sets, |z| {
        let values = ctx.all_formulas(z)?;
        let c = z.to_cylinder(center);
        let o = oracle(&c)?;
        Ok(ProductRow {
            set_id: format!(
                "{}@{}[{:.4},{:.4})",
                crate::cylinder::format_word(&c.word),
                c.lo,
                z.fiber.0,
                z.fiber.1
            ),
            formula: values,
            oracle: o,
            ratio: values[0] / o,
            pass: formula_spread(&values) <= tol,
        })
    })
    .into_iter()
    .collect()
}

/// Every set with `past.len() = m`, `future.len() = n`, and the given fiber
/// interval, inside the rectangle.
pub fn rect_sets(ctx: &ProductContext, m: usize, n: usize, fiber: (f64, f64)) -> Vec<RectSet> {
    let mut out = Vec::new();
    for past in ctx.admissible_pasts(m) {
        for future in ctx.admissible_futures(n) {
            out.push(RectSet {
                past: past.clone(),
                future,
                fiber,
            });
        }
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct PatchResult {
    pub table: MeasureTable,
    pub normalized: MeasureTable,
    pub overlap_checks: Vec<CheckRecord>,
}

/// Assigns each set its `μ_q` value from a containing rectangle, checking
/// that every containing rectangle agrees within `tol`. The normalised table
/// divides by the total over the family.
pub fn patch_global(
    sys: &SuspensionSystem,
    fixture: &str,
    pressure: f64,
    rects: &[Rectangle],
    sets: &[CylinderSet],
    tol: f64,
) -> Result<PatchResult> {
    let contexts: Vec<ProductContext> = rects
        .iter()
        .map(|r| ProductContext::new(sys, pressure, r.clone()))
        .collect();
    let rows: Vec<Result<(f64, Vec<CheckRecord>)>> = crate::par::map(sets, |c| {
        let mut values = Vec::new();
        for ctx in &contexts {
            if let Ok(z) = ctx.rect.locate(sys, c) {
                values.push(ctx.mu_q(&z, Formula::Pushforward)?);
            }
        }
        if values.is_empty() {
            return Err(Error::NotInRectangle(format!(
                "no rectangle contains {}@{}",
                crate::cylinder::format_word(&c.word),
                c.lo
            )));
        }
        let checks = values[1..]
            .iter()
            .map(|v| {
                CheckRecord::ratio_check(
                    "patch_overlap",
                    fixture,
                    format!("{}@{}", crate::cylinder::format_word(&c.word), c.lo),
                    *v,
                    values[0],
                    tol,
                )
            })
            .collect();
        Ok((values[0], checks))
    });
    let mut table = MeasureTable::new(Provenance::Product);
    let mut overlap_checks = Vec::new();
    for (c, row) in sets.iter().zip(rows) {
        let (v, checks) = row?;
        table.push(c.clone(), v);
        overlap_checks.extend(checks);
    }
    let total = table.total();
    let mut normalized = MeasureTable::new(Provenance::Product);
    for (c, v) in &table.entries {
        normalized.push(c.clone(), v / total);
    }
    Ok(PatchResult {
        table,
        normalized,
        overlap_checks,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct GibbsReport {
    /// `sqrt(max ρ / min ρ)`: the smallest `Q` that works after the best
    /// rescaling of `μ_q`.
    pub q: f64,
    pub ratios: Vec<f64>,
}

/// Gibbs ratios `μ_q(B_t(x)) e^{tP − Φ(x,t)}` for sample points of the
/// rectangle's unstable plaque. The ball fixes coordinates `[0, n + k_r]`
/// and spans the rectangle's fiber window.
pub fn gibbs_check(ctx: &ProductContext, samples: &[(SymbolicPoint, f64)]) -> Result<GibbsReport> {
    let ratios: Vec<Result<f64>> = crate::par::map(samples, |(x, t)| {
        let ball = ctx.sys.cylinder_ball(x, *t, Side::Forward)?;
        if ball.word[0] != ctx.rect.center_symbol() {
            return Err(Error::NotInRectangle("sample outside the rectangle".into()));
        }
        let z = RectSet {
            past: vec![],
            future: ball.word[1..].to_vec(),
            fiber: ctx.rect.window(),
        };
        let mu = ctx.mu_q(&z, Formula::UnstableConditional)?;
        Ok(mu * (t * ctx.pressure - ctx.sys.birkhoff(x, *t)).exp())
    });
    let ratios: Vec<f64> = ratios.into_iter().collect::<Result<_>>()?;
    let hi = ratios.iter().cloned().fold(f64::MIN, f64::max);
    let lo = ratios.iter().cloned().fold(f64::MAX, f64::min);
    Ok(GibbsReport {
        q: (hi / lo).sqrt(),
        ratios,
    })
}

/// `μ_q(f_τ Z)` against `μ_q(Z)`.
pub fn flow_invariance_check(ctx: &ProductContext, fixture: &str, z: &RectSet, tau: f64, tol: f64) -> Result<CheckRecord> {
    let a = ctx.mu_q(z, Formula::UnstableConditional)?;
    let b = ctx.mu_q(&z.shifted_fiber(tau), Formula::UnstableConditional)?;
    Ok(CheckRecord::ratio_check(
        "product_flow_invariance",
        fixture,
        format!("tau={tau}"),
        b,
        a,
        tol,
    ))
}

/// The system whose potential is the geometric potential `−log λ_s` spread
/// over the roof of `s`.
pub fn geometric_system(sys: &SuspensionSystem, expansion: &[f64]) -> Result<SuspensionSystem> {
    if expansion.len() != sys.alphabet_size() || expansion.iter().any(|l| *l <= 1.0) {
        return Err(Error::InvalidSystem("expansion rates must exceed 1, one per symbol".into()));
    }
    if sys.roof.window() != (0, 0) {
        return Err(Error::Unsupported("geometric potential needs a roof reading coordinate 0 only".into()));
    }
    let values: Vec<f64> = (0..sys.alphabet_size())
        .map(|s| -expansion[s].ln() / sys.roof.eval_word(&[s as u8]))
        .collect();
    let potential = LocallyConstantFunction::per_symbol(&sys.sft, &values)?;
    SuspensionSystem::new(
        format!("{}-geometric", sys.name),
        sys.sft.clone(),
        sys.roof.clone(),
        potential,
        sys.k_r,
        Some(sys.r_unit),
    )
}

/// SRB product on a rectangle of an Anosov-like symbolic model: unstable
/// leaf volume with the det-ratio density, weak-stable transversal from the
/// backward DP with geometric weights at pressure 0.
pub struct SrbProduct<'a> {
    pub geometric: &'a SuspensionSystem,
    pub expansion: Vec<f64>,
    ctx: ProductContext<'a>,
}

pub const ATTRACTOR_TOL: f64 = 1e-6;

impl<'a> SrbProduct<'a> {
    pub fn new(geometric: &'a SuspensionSystem, expansion: &[f64], q: &SymbolicPoint) -> Result<Self> {
        let p = flow_pressure(geometric)?;
        if p.abs() > ATTRACTOR_TOL {
            return Err(Error::NotAttractor(p));
        }
        let rect = Rectangle::new(geometric, q)?;
        Ok(SrbProduct {
            geometric,
            expansion: expansion.to_vec(),
            ctx: ProductContext::new(geometric, 0.0, rect),
        })
    }

    pub fn rectangle(&self) -> &Rectangle {
        &self.ctx.rect
    }

    pub fn context(&self) -> &ProductContext<'a> {
        &self.ctx
    }

    /// Leaf volume on the unstable leaf of `y` of the cylinder fixing
    /// coordinates `1..=word.len()`: `Π λ_{w_i}^{−1}`, scaled by the volume
    /// change `e^{−φ^u(y_0)·fiber}` of the flow from the base section.
    pub fn leaf_volume(&self, y: &SymbolicPoint, word: &[u8]) -> f64 {
        let phi0 = self.geometric.phi_at(y);
        let prod: f64 = word.iter().map(|s| 1.0 / self.expansion[*s as usize]).product();
        prod * (-phi0 * y.fiber()).exp()
    }

    /// Density of `ν^u_y` at `z` on the leaf of `y`.
    pub fn unstable_density(&self, z: &SymbolicPoint, y: &SymbolicPoint) -> Result<f64> {
        Ok(omega_minus(self.geometric, z, y, 0.0)?.value.exp())
    }

    pub fn value(&self, z: &RectSet) -> Result<f64> {
        self.ctx.rect.check(z)?;
        let ctx = &self.ctx;
        let base = ctx.with_past(&ctx.rect.q, &z.past)?;
        let mut total = 0.0;
        for (f, w) in quadrature(z.fiber.0, z.fiber.1) {
            let y = base.with_fiber(f);
            let pt = ctx.with_future(&y, &z.future)?;
            let nu_u = self.unstable_density(&pt, &y)? * self.leaf_volume(&y, &z.future);
            total += w * ctx.m_s(&y, &z.past)? * nu_u;
        }
        Ok(total)
    }
}
