//! Suspension flows over two-sided subshifts of finite type.
//!
//! A point is a finite window of symbols plus a periodic tail on each side,
//! together with a height in the fiber over its base sequence. Roof and
//! potential are locally constant, so Birkhoff integrals along orbit segments
//! are finite sums of (value × residence time).

use crate::cylinder::CylinderSet;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Sft {
    alphabet_size: usize,
    allowed: Vec<bool>,
}

impl Sft {
    pub fn new(alphabet_size: usize, transitions: Vec<Vec<bool>>) -> Result<Self> {
        if alphabet_size < 2 {
            return Err(Error::InvalidSystem(format!(
                "alphabet size {alphabet_size} < 2"
            )));
        }
        if transitions.len() != alphabet_size || transitions.iter().any(|r| r.len() != alphabet_size)
        {
            return Err(Error::InvalidSystem(
                "transition matrix shape does not match alphabet".into(),
            ));
        }
        let allowed: Vec<bool> = transitions.into_iter().flatten().collect();
        let sft = Sft {
            alphabet_size,
            allowed,
        };
        for a in 0..alphabet_size {
            let has_succ = (0..alphabet_size).any(|b| sft.allowed(a as u8, b as u8));
            let has_pred = (0..alphabet_size).any(|b| sft.allowed(b as u8, a as u8));
            if !has_succ || !has_pred {
                return Err(Error::InvalidSystem(format!(
                    "symbol {a} lacks a successor or predecessor"
                )));
            }
        }
        if !sft.is_primitive() {
            return Err(Error::InvalidSystem(
                "transition matrix is not irreducible and aperiodic".into(),
            ));
        }
        Ok(sft)
    }

    pub fn full(alphabet_size: usize) -> Result<Self> {
        Sft::new(alphabet_size, vec![vec![true; alphabet_size]; alphabet_size])
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    #[inline]
    pub fn allowed(&self, a: u8, b: u8) -> bool {
        self.allowed[a as usize * self.alphabet_size + b as usize]
    }

    pub fn successors(&self, a: u8) -> impl Iterator<Item = u8> + '_ {
        (0..self.alphabet_size as u8).filter(move |&b| self.allowed(a, b))
    }

    pub fn predecessors(&self, b: u8) -> impl Iterator<Item = u8> + '_ {
        (0..self.alphabet_size as u8).filter(move |&a| self.allowed(a, b))
    }

    pub fn is_admissible(&self, word: &[u8]) -> bool {
        word.iter().all(|&s| (s as usize) < self.alphabet_size)
            && word.windows(2).all(|w| self.allowed(w[0], w[1]))
    }

    /// Admissible words of the given length in lexicographic order.
    pub fn admissible_words(&self, len: usize) -> Vec<Vec<u8>> {
        let mut words: Vec<Vec<u8>> = vec![vec![]];
        for _ in 0..len {
            let mut next = Vec::new();
            for w in &words {
                for s in 0..self.alphabet_size as u8 {
                    if w.last().map_or(true, |&l| self.allowed(l, s)) {
                        let mut v = w.clone();
                        v.push(s);
                        next.push(v);
                    }
                }
            }
            words = next;
        }
        words
    }

    // Some power of the 0/1 matrix is strictly positive; Wielandt's bound
    // (n-1)^2 + 1 caps the exponent that needs checking.
    fn is_primitive(&self) -> bool {
        let n = self.alphabet_size;
        let mut power = self.allowed.clone();
        for _ in 0..((n - 1) * (n - 1) + 1) {
            if power.iter().all(|&x| x) {
                return true;
            }
            let mut next = vec![false; n * n];
            for i in 0..n {
                for k in 0..n {
                    if power[i * n + k] {
                        for j in 0..n {
                            if self.allowed[k * n + j] {
                                next[i * n + j] = true;
                            }
                        }
                    }
                }
            }
            power = next;
        }
        power.iter().all(|&x| x)
    }
}

/// Function of the symbols on coordinates `window_lo..=window_hi`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocallyConstantFunction {
    window_lo: i64,
    window_hi: i64,
    alphabet_size: usize,
    // dense over all words of the window length; NaN on inadmissible words
    values: Vec<f64>,
}

impl LocallyConstantFunction {
    /// `values` lists one entry per admissible word of the window length, in
    /// lexicographic order.
    pub fn from_admissible(sft: &Sft, window_lo: i64, window_hi: i64, values: &[f64]) -> Result<Self> {
        if window_lo > 0 || window_hi < 0 {
            return Err(Error::InvalidSystem(format!(
                "window [{window_lo}, {window_hi}] must contain 0"
            )));
        }
        let len = (window_hi - window_lo + 1) as usize;
        let words = sft.admissible_words(len);
        if words.len() != values.len() {
            return Err(Error::InvalidSystem(format!(
                "expected {} values for window length {len}, got {}",
                words.len(),
                values.len()
            )));
        }
        let a = sft.alphabet_size();
        let mut dense = vec![f64::NAN; a.pow(len as u32)];
        for (w, &v) in words.iter().zip(values) {
            if !v.is_finite() {
                return Err(Error::InvalidSystem(format!("non-finite value {v}")));
            }
            dense[code(w, a)] = v;
        }
        Ok(LocallyConstantFunction {
            window_lo,
            window_hi,
            alphabet_size: a,
            values: dense,
        })
    }

    pub fn from_fn(sft: &Sft, window_lo: i64, window_hi: i64, f: impl Fn(&[u8]) -> f64) -> Result<Self> {
        let len = (window_hi - window_lo + 1).max(1) as usize;
        let values: Vec<f64> = sft.admissible_words(len).iter().map(|w| f(w)).collect();
        Self::from_admissible(sft, window_lo, window_hi, &values)
    }

    pub fn constant(sft: &Sft, value: f64) -> Self {
        Self::from_fn(sft, 0, 0, |_| value).expect("constant function is always valid")
    }

    pub fn per_symbol(sft: &Sft, values: &[f64]) -> Result<Self> {
        Self::from_admissible(sft, 0, 0, values)
    }

    pub fn window(&self) -> (i64, i64) {
        (self.window_lo, self.window_hi)
    }

    pub fn window_len(&self) -> usize {
        (self.window_hi - self.window_lo + 1) as usize
    }

    /// Value on a word of exactly the window length.
    #[inline]
    pub fn eval_word(&self, word: &[u8]) -> f64 {
        debug_assert_eq!(word.len(), self.window_len());
        self.values[code(word, self.alphabet_size)]
    }

    /// Value at the base point whose symbol at coordinate `c` is `symbol(c)`.
    pub fn eval_with(&self, mut symbol: impl FnMut(i64) -> u8) -> f64 {
        let mut idx = 0usize;
        for c in self.window_lo..=self.window_hi {
            idx = idx * self.alphabet_size + symbol(c) as usize;
        }
        self.values[idx]
    }

    pub fn eval_at(&self, p: &SymbolicPoint) -> f64 {
        self.eval_with(|c| p.symbol(c))
    }

    pub fn defined_values(&self) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().copied().filter(|v| !v.is_nan())
    }

    pub fn min_value(&self) -> f64 {
        self.defined_values().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.defined_values().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn sup_norm(&self) -> f64 {
        self.defined_values().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// The same function read on words of a longer window `[lo, 0]`.
    pub fn lifted_eval(&self, word: &[u8], lo: i64) -> f64 {
        let skip = (self.window_lo - lo) as usize;
        self.eval_word(&word[skip..skip + self.window_len()])
    }
}

fn code(word: &[u8], alphabet: usize) -> usize {
    word.iter().fold(0, |acc, &s| acc * alphabet + s as usize)
}

/// A point of the suspension space: a two-sided symbol sequence, stored as a
/// finite window with periodic tails, and a fiber height.
///
/// `shifts` counts applications of the base map since the point was
/// constructed; coordinates of points derived from a common ancestor can be
/// matched through it.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolicPoint {
    lo: i64,
    window: Vec<u8>,
    past_cycle: Vec<u8>,
    past_anchor: i64,
    future_cycle: Vec<u8>,
    future_anchor: i64,
    fiber: f64,
    shifts: i64,
}

impl SymbolicPoint {
    /// `window` sits on coordinates `lo..lo+len`; `past_cycle` is repeated to
    /// the left (its last symbol at `lo-1`), `future_cycle` to the right (its
    /// first symbol at `lo+len`).
    pub fn new(
        sys: &SuspensionSystem,
        lo: i64,
        window: Vec<u8>,
        past_cycle: Vec<u8>,
        future_cycle: Vec<u8>,
        fiber: f64,
    ) -> Result<Self> {
        if window.is_empty() || past_cycle.is_empty() || future_cycle.is_empty() {
            return Err(Error::InadmissiblePoint("empty window or cycle".into()));
        }
        let hi = lo + window.len() as i64 - 1;
        if lo > 0 || hi < 0 {
            return Err(Error::InadmissiblePoint(format!(
                "window [{lo}, {hi}] must contain coordinate 0"
            )));
        }
        let p = SymbolicPoint {
            past_anchor: lo - past_cycle.len() as i64,
            future_anchor: hi + 1,
            lo,
            window,
            past_cycle,
            future_cycle,
            fiber,
            shifts: 0,
        };
        p.validate(sys)?;
        Ok(p)
    }

    /// The point whose whole sequence repeats `cycle`, with `cycle[0]` at 0.
    pub fn periodic(sys: &SuspensionSystem, cycle: &[u8], fiber: f64) -> Result<Self> {
        let p = SymbolicPoint {
            lo: 0,
            window: vec![cycle[0]],
            past_cycle: cycle.to_vec(),
            past_anchor: 0,
            future_cycle: cycle.to_vec(),
            future_anchor: 0,
            fiber,
            shifts: 0,
        };
        p.validate(sys)?;
        Ok(p)
    }

    pub fn validate(&self, sys: &SuspensionSystem) -> Result<()> {
        let sft = &sys.sft;
        let check_cycle = |c: &[u8]| {
            sft.is_admissible(c) && sft.allowed(*c.last().unwrap(), c[0])
        };
        if !check_cycle(&self.past_cycle) || !check_cycle(&self.future_cycle) {
            return Err(Error::InadmissiblePoint("tail cycle is not admissible".into()));
        }
        let (a, b) = (self.lo - 1, self.hi() + 1);
        let seq: Vec<u8> = (a..=b).map(|c| self.symbol(c)).collect();
        if !sft.is_admissible(&seq) {
            return Err(Error::InadmissiblePoint(format!(
                "window or tail joins contain a forbidden transition: {}",
                crate::cylinder::format_word(&seq)
            )));
        }
        let roof = sys.roof_at(self);
        if !(self.fiber >= 0.0 && self.fiber < roof) {
            return Err(Error::InadmissiblePoint(format!(
                "fiber {} outside [0, {roof})",
                self.fiber
            )));
        }
        Ok(())
    }

    #[inline]
    pub fn symbol(&self, coord: i64) -> u8 {
        if coord < self.lo {
            let n = self.past_cycle.len() as i64;
            self.past_cycle[(coord - self.past_anchor).rem_euclid(n) as usize]
        } else if coord > self.hi() {
            let n = self.future_cycle.len() as i64;
            self.future_cycle[(coord - self.future_anchor).rem_euclid(n) as usize]
        } else {
            self.window[(coord - self.lo) as usize]
        }
    }

    pub fn symbols(&self, from: i64, to_inclusive: i64) -> Vec<u8> {
        (from..=to_inclusive).map(|c| self.symbol(c)).collect()
    }

    pub fn window_range(&self) -> (i64, i64) {
        (self.lo, self.hi())
    }

    fn hi(&self) -> i64 {
        self.lo + self.window.len() as i64 - 1
    }

    pub fn fiber(&self) -> f64 {
        self.fiber
    }

    pub fn shifts(&self) -> i64 {
        self.shifts
    }

    /// Coordinate range beyond which both tails are purely periodic.
    pub fn tail_periods(&self) -> (usize, usize) {
        (self.past_cycle.len(), self.future_cycle.len())
    }

    /// Materialize tail symbols so that the window covers `[from, to]`.
    pub fn extend_window(&mut self, from: i64, to: i64) {
        if from < self.lo {
            let mut front: Vec<u8> = (from..self.lo).map(|c| self.symbol(c)).collect();
            front.extend_from_slice(&self.window);
            self.window = front;
            self.lo = from;
        }
        if to > self.hi() {
            let extra: Vec<u8> = (self.hi() + 1..=to).map(|c| self.symbol(c)).collect();
            self.window.extend(extra);
        }
    }

    pub fn with_fiber(&self, fiber: f64) -> Self {
        let mut p = self.clone();
        p.fiber = fiber;
        p
    }

    /// Symbols below `cut` from `past`, from `cut` on from `future`. Tails and
    /// the shift counter follow their respective sides.
    pub fn splice(
        sys: &SuspensionSystem,
        past: &SymbolicPoint,
        future: &SymbolicPoint,
        cut: i64,
        fiber: f64,
    ) -> Result<Self> {
        let lo = past.lo.min(cut - 1).min(0);
        let hi = future.hi().max(cut).max(0);
        let window: Vec<u8> = (lo..=hi)
            .map(|c| if c < cut { past.symbol(c) } else { future.symbol(c) })
            .collect();
        let p = SymbolicPoint {
            lo,
            window,
            past_cycle: past.past_cycle.clone(),
            past_anchor: past.past_anchor,
            future_cycle: future.future_cycle.clone(),
            future_anchor: future.future_anchor,
            fiber,
            shifts: future.shifts,
        };
        p.validate(sys)?;
        Ok(p)
    }

    /// Agreement of symbols on `[from, to]` and of fibers to `tol`.
    pub fn agrees_with(&self, other: &SymbolicPoint, from: i64, to: i64, tol: f64) -> bool {
        (from..=to).all(|c| self.symbol(c) == other.symbol(c)) && (self.fiber - other.fiber).abs() <= tol
    }

    fn shifted_raw(&self, n: i64) -> Self {
        let mut p = self.clone();
        p.lo -= n;
        p.past_anchor -= n;
        p.future_anchor -= n;
        p.shifts += n;
        let (lo, hi) = (p.lo, p.hi());
        p.extend_window(lo.min(0), hi.max(0));
        p
    }
}

/// Which side of the orbit a Bowen ball constrains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Side {
    Forward,
    Backward,
}

#[derive(Debug, Clone)]
pub struct SuspensionSystem {
    pub name: String,
    pub sft: Sft,
    pub roof: LocallyConstantFunction,
    pub potential: LocallyConstantFunction,
    /// Extra cylinder depth standing in for the fixed Bowen-ball radius.
    pub k_r: usize,
    /// Fiber-direction scale used by the two-sided balls.
    pub r_unit: f64,
}

impl SuspensionSystem {
    pub fn new(
        name: impl Into<String>,
        sft: Sft,
        roof: LocallyConstantFunction,
        potential: LocallyConstantFunction,
        k_r: usize,
        r_unit: Option<f64>,
    ) -> Result<Self> {
        if roof.min_value() <= 0.0 {
            return Err(Error::InvalidSystem(format!(
                "roof must be positive, min value {}",
                roof.min_value()
            )));
        }
        if roof.window().1 != 0 || potential.window().1 != 0 {
            return Err(Error::InvalidSystem(
                "roof and potential windows must end at coordinate 0".into(),
            ));
        }
        let r_unit = r_unit.unwrap_or(roof.min_value() / 4.0);
        if r_unit <= 0.0 {
            return Err(Error::InvalidSystem(format!("r_unit {r_unit} must be positive")));
        }
        Ok(SuspensionSystem {
            name: name.into(),
            sft,
            roof,
            potential,
            k_r,
            r_unit,
        })
    }

    pub fn alphabet_size(&self) -> usize {
        self.sft.alphabet_size()
    }

    /// Length of the longest window among roof and potential.
    pub fn memory(&self) -> usize {
        self.roof.window_len().max(self.potential.window_len())
    }

    pub fn min_roof(&self) -> f64 {
        self.roof.min_value()
    }

    pub fn max_roof(&self) -> f64 {
        self.roof.max_value()
    }

    pub fn roof_at(&self, p: &SymbolicPoint) -> f64 {
        self.roof.eval_at(p)
    }

    pub fn phi_at(&self, p: &SymbolicPoint) -> f64 {
        self.potential.eval_at(p)
    }

    /// Roof of the base point `σ^k p`.
    pub fn roof_at_coord(&self, p: &SymbolicPoint, k: i64) -> f64 {
        self.roof.eval_with(|c| p.symbol(c + k))
    }

    pub fn phi_at_coord(&self, p: &SymbolicPoint, k: i64) -> f64 {
        self.potential.eval_with(|c| p.symbol(c + k))
    }

    pub fn shift(&self, p: &SymbolicPoint, n: i64) -> SymbolicPoint {
        p.shifted_raw(n)
    }

    pub fn flow(&self, p: &SymbolicPoint, t: f64) -> SymbolicPoint {
        let mut q = p.clone();
        let mut fiber = p.fiber + t;
        loop {
            let roof = self.roof_at(&q);
            if fiber >= roof {
                fiber -= roof;
                q = q.shifted_raw(1);
            } else if fiber < 0.0 {
                q = q.shifted_raw(-1);
                fiber += self.roof_at(&q);
            } else {
                break;
            }
        }
        q.fiber = fiber;
        q
    }

    /// `Φ(p, t) = ∫₀ᵗ φ(f_s p) ds`, with `Φ(p, t) = -Φ(f_t p, -t)` for `t < 0`.
    pub fn birkhoff(&self, p: &SymbolicPoint, t: f64) -> f64 {
        if t < 0.0 {
            return -self.birkhoff(&self.flow(p, t), -t);
        }
        let mut total = 0.0;
        let mut remaining = t;
        let mut k = 0i64;
        let mut height = p.fiber;
        while remaining > 0.0 {
            let roof = self.roof_at_coord(p, k);
            let seg = (roof - height).min(remaining);
            total += self.phi_at_coord(p, k) * seg;
            remaining -= seg;
            height = 0.0;
            k += 1;
        }
        total
    }

    /// Time from `p` to the start of the fiber over `σ^j p` (negative for `j ≤ 0`).
    pub fn crossing_time(&self, p: &SymbolicPoint, j: i64) -> f64 {
        let mut s = -p.fiber;
        if j >= 0 {
            for k in 0..j {
                s += self.roof_at_coord(p, k);
            }
        } else {
            for k in j..0 {
                s -= self.roof_at_coord(p, k);
            }
        }
        s
    }

    /// Symbolic Bowen ball: forward balls fix coordinates `[0, n + k_r]` where
    /// `n` is the number of roof crossings needed to reach time `t`; backward
    /// balls mirror this on negative coordinates.
    pub fn cylinder_ball(&self, p: &SymbolicPoint, t: f64, side: Side) -> Result<CylinderSet> {
        if t < 0.0 || t.is_nan() {
            return Err(Error::NegativeOrder(t));
        }
        let k_r = self.k_r as i64;
        let mut c = match side {
            Side::Forward => {
                let mut n = 0i64;
                let mut reach = -p.fiber;
                while reach < t {
                    reach += self.roof_at_coord(p, n);
                    n += 1;
                }
                CylinderSet::new(0, p.symbols(0, n + k_r))
            }
            Side::Backward => {
                let mut m = 0i64;
                let mut reach = p.fiber;
                while reach < t {
                    m += 1;
                    reach += self.roof_at_coord(p, -m);
                }
                CylinderSet::new(-(m + k_r), p.symbols(-(m + k_r), 0))
            }
        };
        c.order = Some(t);
        Ok(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::system;
    use approx::assert_relative_eq;

    #[test]
    fn shift_relabels_coordinates() {
        let sys = system("FULL2");
        let a = SymbolicPoint::periodic(&sys, &[0], 0.0).unwrap();
        assert_eq!(sys.shift(&a, 5).symbols(-10, 10), a.symbols(-10, 10));
        let p = SymbolicPoint::new(&sys, -1, vec![0, 1, 0], vec![1], vec![1], 0.0).unwrap();
        let q = sys.shift(&p, 1);
        assert_eq!(q.symbols(-2, 0), vec![0, 1, 0]);
        assert_eq!(q.shifts(), 1);
        let back = sys.shift(&sys.shift(&p, 3), -3);
        assert_eq!(back.symbols(-12, 12), p.symbols(-12, 12));
    }

    #[test]
    fn flow_examples() {
        let full2 = system("FULL2");
        let a = SymbolicPoint::periodic(&full2, &[0], 0.25).unwrap();
        assert_relative_eq!(full2.flow(&a, 0.5).fiber(), 0.75);

        let p = SymbolicPoint::periodic(&full2, &[0, 0, 1], 0.0).unwrap();
        let q = full2.flow(&p, 1.0);
        assert_eq!(q.symbols(-3, 3), p.symbols(-2, 4));
        assert_eq!(q.fiber(), 0.0);

        let roof2 = system("ROOF2");
        let b = SymbolicPoint::periodic(&roof2, &[1], 0.0).unwrap();
        let q = roof2.flow(&b, 3.0);
        assert_eq!(q.shifts(), 1);
        assert_relative_eq!(q.fiber(), 1.0);
    }

    #[test]
    fn birkhoff_examples() {
        let sys = system("BERN13");
        let a = SymbolicPoint::periodic(&sys, &[0], 0.0).unwrap();
        assert_relative_eq!(sys.birkhoff(&a, 2.5), 2.5 * (1.0f64 / 3.0).ln(), epsilon = 1e-12);
        assert_relative_eq!(sys.birkhoff(&a, 2.5), -2.746531, epsilon = 1e-6);
        assert_eq!(sys.birkhoff(&a, 0.0), 0.0);
        // …a.ba…
        let p = SymbolicPoint::new(&sys, -1, vec![0, 1, 0], vec![0], vec![0], 0.0).unwrap();
        assert_relative_eq!(sys.birkhoff(&p, 2.0), -1.504077, epsilon = 1e-6);
    }

    #[test]
    fn negative_time_birkhoff_sign() {
        let sys = system("ROOF2");
        let p = SymbolicPoint::new(&sys, -2, vec![1, 0, 1, 1], vec![0, 1], vec![1, 0], 0.3).unwrap();
        let sys = SuspensionSystem::new(
            "tilted",
            sys.sft.clone(),
            sys.roof.clone(),
            LocallyConstantFunction::per_symbol(&sys.sft, &[0.7, -1.1]).unwrap(),
            0,
            None,
        )
        .unwrap();
        for t in [-4.2, -1.0, 0.5, 3.3] {
            let back = -sys.birkhoff(&sys.flow(&p, t), -t);
            assert_relative_eq!(sys.birkhoff(&p, t), back, epsilon = 1e-12);
        }
    }

    #[test]
    fn cylinder_ball_examples() {
        let full2 = system("FULL2");
        let a = SymbolicPoint::periodic(&full2, &[0], 0.0).unwrap();
        let c = full2.cylinder_ball(&a, 3.0, Side::Forward).unwrap();
        assert_eq!((c.lo, c.hi()), (0, 3));
        assert_eq!(c.order, Some(3.0));

        let mut wide = full2.clone();
        wide.k_r = 2;
        let c = wide.cylinder_ball(&a, 1.0, Side::Forward).unwrap();
        assert_eq!((c.lo, c.hi()), (0, 3));

        let roof2 = system("ROOF2");
        let b = SymbolicPoint::periodic(&roof2, &[1], 0.0).unwrap();
        let c = roof2.cylinder_ball(&b, 3.0, Side::Forward).unwrap();
        assert_eq!((c.lo, c.hi()), (0, 2));
        let c = roof2.cylinder_ball(&b, 3.0, Side::Backward).unwrap();
        assert_eq!((c.lo, c.hi()), (-2, 0));

        assert!(matches!(
            roof2.cylinder_ball(&b, -0.1, Side::Forward),
            Err(Error::NegativeOrder(_))
        ));
    }

    #[test]
    fn inadmissible_points_are_rejected() {
        let gold = system("GOLD");
        assert!(SymbolicPoint::new(&gold, 0, vec![1, 1], vec![0], vec![0], 0.0).is_err());
        assert!(SymbolicPoint::periodic(&gold, &[1], 0.0).is_err());
        assert!(SymbolicPoint::periodic(&gold, &[0], 1.5).is_err());
        assert!(SymbolicPoint::new(&gold, 1, vec![0], vec![0], vec![0], 0.0).is_err());
    }

    #[test]
    fn crossing_times_match_roof_sums() {
        let sys = system("ROOF2");
        let p = SymbolicPoint::new(&sys, -2, vec![1, 0, 1, 1], vec![0], vec![0], 0.5).unwrap();
        assert_relative_eq!(sys.crossing_time(&p, 0), -0.5);
        assert_relative_eq!(sys.crossing_time(&p, 2), -0.5 + 2.0 + 2.0);
        assert_relative_eq!(sys.crossing_time(&p, -2), -0.5 - 1.0 - 2.0);
        let q = sys.flow(&p, sys.crossing_time(&p, 2));
        assert_eq!(q.shifts(), 2);
        assert!(q.fiber().abs() < 1e-12);
    }
}
