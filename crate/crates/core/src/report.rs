//! Verification records and measure tables shared by the checks.

use serde::Serialize;

use crate::cylinder::CylinderSet;

/// Outcome of one executable identity check.
#[derive(Debug, Clone, Serialize)]
pub struct CheckRecord {
    pub check: String,
    pub fixture: String,
    pub params: String,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl CheckRecord {
    /// Passes when `|lhs/rhs − 1| ≤ tolerance` (or both sides vanish).
    pub fn ratio_check(
        check: impl Into<String>,
        fixture: impl Into<String>,
        params: impl Into<String>,
        lhs: f64,
        rhs: f64,
        tolerance: f64,
    ) -> Self {
        let ratio = if lhs == 0.0 && rhs == 0.0 { 1.0 } else { lhs / rhs };
        CheckRecord {
            check: check.into(),
            fixture: fixture.into(),
            params: params.into(),
            lhs,
            rhs,
            ratio,
            tolerance,
            pass: (ratio - 1.0).abs() <= tolerance,
        }
    }

    /// Passes when `|lhs − rhs| ≤ tolerance`.
    pub fn difference_check(
        check: impl Into<String>,
        fixture: impl Into<String>,
        params: impl Into<String>,
        lhs: f64,
        rhs: f64,
        tolerance: f64,
    ) -> Self {
        CheckRecord {
            check: check.into(),
            fixture: fixture.into(),
            params: params.into(),
            lhs,
            rhs,
            ratio: if rhs != 0.0 { lhs / rhs } else { f64::NAN },
            tolerance,
            pass: (lhs - rhs).abs() <= tolerance,
        }
    }

    /// Passes when `lhs ≤ rhs`.
    pub fn bound_check(
        check: impl Into<String>,
        fixture: impl Into<String>,
        params: impl Into<String>,
        lhs: f64,
        rhs: f64,
    ) -> Self {
        CheckRecord {
            check: check.into(),
            fixture: fixture.into(),
            params: params.into(),
            lhs,
            rhs,
            ratio: lhs / rhs,
            tolerance: 0.0,
            pass: lhs <= rhs,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Provenance {
    Caratheodory,
    Oracle,
    Product,
    Pushforward,
}

/// Masses of a family of cylinder sets, tagged with where they came from.
#[derive(Debug, Clone, Serialize)]
pub struct MeasureTable {
    pub provenance: Provenance,
    pub entries: Vec<(CylinderSet, f64)>,
}

impl MeasureTable {
    pub fn new(provenance: Provenance) -> Self {
        MeasureTable {
            provenance,
            entries: Vec::new(),
        }
    }

    pub fn push(&mut self, c: CylinderSet, mass: f64) {
        self.entries.push((c, mass));
    }

    pub fn total(&self) -> f64 {
        self.entries.iter().map(|(_, m)| m).sum()
    }

    /// Largest ratio spread `max/min − 1` of `self[i] / other[i]` over
    /// entries where both are positive.
    pub fn ratio_spread(&self, other: &MeasureTable) -> f64 {
        ratio_spread(self.entries.iter().zip(&other.entries).map(|((_, a), (_, b))| (*a, *b)))
    }
}

/// `max/min − 1` of the ratios `a/b` over pairs with both sides positive.
pub fn ratio_spread(pairs: impl IntoIterator<Item = (f64, f64)>) -> f64 {
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for (a, b) in pairs {
        if a > 0.0 && b > 0.0 {
            let r = a / b;
            lo = lo.min(r);
            hi = hi.max(r);
        }
    }
    if hi == 0.0 {
        return f64::NAN;
    }
    hi / lo - 1.0
}
