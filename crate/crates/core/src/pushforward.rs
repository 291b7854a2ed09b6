//! Time averages `ν_t = (1/t) ∫₀ᵗ m^u_x ∘ f_{−s} ds` of an unstable leaf
//! measure and their distance to the equilibrium measure.
//!
//! The plaque is the whole unstable leaf of the anchor at the anchor's
//! height. For systems whose roof and potential read coordinate 0 only, the
//! leaf measure of a future cylinder `[ξ₁…ξ_d]` is
//! `exp(Σ_{j<d} (φ(w_j) − P) r(w_j) − (φ(w_0) − P) f_x) · L(ξ_d)` by
//! conformality, where `L(s)` is the DP mass of a whole leaf at height 0 over
//! the symbol `s`. A forward pass over (recent symbols, roof sum) then gives
//! the pulled-back masses without enumerating futures.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::cover::{leaf_measure_u, CoverTarget, LEAF_CUTOFFS};
use crate::cylinder::{CylinderSet, FiberRange};
use crate::error::{Error, Result};
use crate::oracle::OracleMeasure;
use crate::points::point_with_word;
use crate::symbolic::{Side, SuspensionSystem, SymbolicPoint};
use crate::two_sided::roots;

/// Largest number of roof crossings followed before giving up.
pub const MAX_STEPS: usize = 10_000;

pub struct Plaque<'a> {
    pub sys: &'a SuspensionSystem,
    pub pressure: f64,
    pub anchor: SymbolicPoint,
    /// `L(s)` for each symbol.
    leaf_mass: Vec<f64>,
}

/// One term of the pulled-back mass: the integrand carries `mass` for
/// `s ∈ [from, to)`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Visit {
    pub from: f64,
    pub to: f64,
    pub mass: f64,
}

impl<'a> Plaque<'a> {
    pub fn new(sys: &'a SuspensionSystem, pressure: f64, anchor: SymbolicPoint) -> Result<Self> {
        if sys.roof.window() != (0, 0) || sys.potential.window() != (0, 0) {
            return Err(Error::Unsupported(
                "averaged pushforwards need roof and potential reading coordinate 0 only".into(),
            ));
        }
        let leaf_mass = (0..sys.alphabet_size() as u8)
            .map(|s| {
                let p = point_with_word(sys, 0, &[s], 0.0)?;
                Ok(leaf_measure_u(sys, pressure, &CoverTarget::whole_leaf(Side::Forward, p), &LEAF_CUTOFFS)?.value)
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(Plaque {
            sys,
            pressure,
            anchor,
            leaf_mass,
        })
    }

    fn roof(&self, s: u8) -> f64 {
        self.sys.roof.eval_word(&[s])
    }

    fn step_log_weight(&self, s: u8) -> f64 {
        (self.sys.potential.eval_word(&[s]) - self.pressure) * self.roof(s)
    }

    /// `m^u_x` of the future cylinder `word` on coordinates `1..`.
    pub fn cylinder_mass(&self, word: &[u8]) -> f64 {
        let x0 = self.anchor.symbol(0);
        let mut log_w = -(self.sys.potential.eval_word(&[x0]) - self.pressure) * self.anchor.fiber();
        let mut last = x0;
        for &s in word {
            log_w += self.step_log_weight(last);
            last = s;
        }
        log_w.exp() * self.leaf_mass[last as usize]
    }

    /// `m^u_x` of the whole plaque.
    pub fn total_mass(&self) -> f64 {
        self.cylinder_mass(&[])
    }

    /// Times `s ∈ [0, t)` at which leaf points sit in `Z`, grouped by the
    /// interval they occupy, with the leaf mass doing so.
    pub fn visits(&self, z: &CylinderSet, t: f64) -> Result<Vec<Visit>> {
        let mut out: BTreeMap<(u64, u64), f64> = BTreeMap::new();
        for (lo, word, (a, b)) in roots(self.sys, z) {
            self.visits_of_word(lo, &word, (a, b), t, &mut out)?;
        }
        let mut visits: Vec<Visit> = out
            .into_iter()
            .map(|((f, g), mass)| Visit {
                from: f64::from_bits(f),
                to: f64::from_bits(g),
                mass,
            })
            .collect();
        visits.sort_by(|p, q| p.from.total_cmp(&q.from).then(p.to.total_cmp(&q.to)));
        Ok(visits)
    }

    fn visits_of_word(
        &self,
        lo: i64,
        word: &[u8],
        fiber: (f64, f64),
        t: f64,
        out: &mut BTreeMap<(u64, u64), f64>,
    ) -> Result<()> {
        let hi = lo + word.len() as i64 - 1;
        let len = word.len();
        let fx = self.anchor.fiber();
        let x0 = self.anchor.symbol(0);
        let roofs: Vec<f64> = (0..self.sys.alphabet_size() as u8).map(|s| self.roof(s)).collect();
        // state: symbols on [j − len + 1, j] and how often each symbol was
        // crossed, which fixes S_j exactly
        let start = self.anchor.symbols(1 - len as i64, 0);
        let log0 = -(self.sys.potential.eval_word(&[x0]) - self.pressure) * fx;
        let mut states: BTreeMap<(Vec<u8>, Vec<u32>), f64> = BTreeMap::new();
        states.insert((start, vec![0; roofs.len()]), log0.exp());
        for j in 0..MAX_STEPS as i64 {
            let k = j - hi;
            let mut min_sk = f64::INFINITY;
            for ((window, counts), g) in &states {
                let s_j: f64 = counts.iter().zip(&roofs).map(|(c, r)| *c as f64 * r).sum();
                if k < 0 {
                    min_sk = min_sk.min(s_j);
                    continue;
                }
                // S_k = S_j minus the roofs of w_k … w_{j−1}
                let tail: f64 = window[len - 1 - hi as usize..len - 1].iter().map(|s| self.roof(*s)).sum();
                let s_k = s_j - tail;
                min_sk = min_sk.min(s_k);
                if window.as_slice() != word {
                    continue;
                }
                let top = self.roof(word[(-lo) as usize]);
                let from = (s_k - fx + fiber.0).max(0.0);
                let to = (s_k - fx + fiber.1.min(top)).min(t);
                if to > from {
                    let mass = g * self.leaf_mass[*window.last().unwrap() as usize];
                    *out.entry((from.to_bits(), to.to_bits())).or_insert(0.0) += mass;
                }
            }
            if min_sk - fx >= t {
                return Ok(());
            }
            let mut next: BTreeMap<(Vec<u8>, Vec<u32>), f64> = BTreeMap::new();
            for ((window, mut counts), g) in states {
                let last = *window.last().unwrap();
                let g2 = g * self.step_log_weight(last).exp();
                counts[last as usize] += 1;
                for succ in self.sys.sft.successors(last) {
                    let mut w2 = window[1..].to_vec();
                    w2.push(succ);
                    *next.entry((w2, counts.clone())).or_insert(0.0) += g2;
                }
            }
            states = next;
        }
        Err(Error::DepthCapTooSmall {
            depth_cap: MAX_STEPS,
            cutoff: t,
            needed: MAX_STEPS + 1,
        })
    }

    /// `m^u_x(f_{−s} Z)`.
    pub fn pulled_back_mass(&self, z: &CylinderSet, s: f64) -> Result<f64> {
        Ok(self
            .visits(z, s + 1.0)?
            .iter()
            .filter(|v| v.from <= s && s < v.to)
            .map(|v| v.mass)
            .sum())
    }

    /// `ν_t(Z)` by composite midpoint quadrature of step at most `step`
    /// over a partition that contains every breakpoint of the integrand.
    pub fn nu_t(&self, z: &CylinderSet, t: f64, step: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(Error::NegativeOrder(t));
        }
        let visits = self.visits(z, t)?;
        let mut cuts: Vec<f64> = vec![0.0, t];
        for v in &visits {
            cuts.push(v.from);
            cuts.push(v.to);
        }
        cuts.sort_by(f64::total_cmp);
        cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        let mut nodes = Vec::new();
        for w in cuts.windows(2) {
            let (a, b) = (w[0], w[1]);
            if b <= a {
                continue;
            }
            let pieces = ((b - a) / step).ceil().max(1.0) as usize;
            let h = (b - a) / pieces as f64;
            for i in 0..pieces {
                nodes.push((a + (i as f64 + 0.5) * h, h));
            }
        }
        let integrand = |s: f64| -> f64 {
            visits
                .iter()
                .filter(|v| v.from <= s && s < v.to)
                .map(|v| v.mass)
                .sum()
        };
        let terms: Vec<f64> = crate::par::map(&nodes, |(s, h)| integrand(*s) * h);
        Ok(crate::par::sum(&terms) / t)
    }

    /// `ν_t(Z)` summed interval by interval.
    pub fn nu_t_exact(&self, z: &CylinderSet, t: f64) -> Result<f64> {
        let visits = self.visits(z, t)?;
        Ok(visits.iter().map(|v| v.mass * (v.to - v.from)).sum::<f64>() / t)
    }
}

/// Default quadrature step: a twentieth of the shortest roof.
pub fn default_step(sys: &SuspensionSystem) -> f64 {
    0.05 * sys.min_roof()
}

/// Atoms of the depth-`d` algebra: symbols on `[−⌊(d−1)/2⌋, ⌈(d−1)/2⌉]`
/// crossed with the two halves of the fiber.
pub fn algebra(sys: &SuspensionSystem, depth: usize) -> Vec<CylinderSet> {
    let lo = -(((depth - 1) / 2) as i64);
    let mut out = Vec::new();
    for w in sys.sft.admissible_words(depth) {
        let zero = w[(-lo) as usize];
        let r = sys.roof.eval_word(&[zero]);
        for (a, b) in [(0.0, r / 2.0), (r / 2.0, r)] {
            out.push(CylinderSet::new(lo, w.clone()).with_fiber(FiberRange::Interval(a, b)));
        }
    }
    out
}

/// Half the ℓ¹ distance between normalised `ν_t` and the oracle on the
/// depth-`d` algebra.
pub fn tv_to_oracle(plaque: &Plaque, oracle: &OracleMeasure, t: f64, depth: usize, step: f64) -> Result<f64> {
    if depth == 0 || depth > 3 {
        return Err(Error::Config(format!("algebra depth {depth} must be 1..=3")));
    }
    let atoms = algebra(plaque.sys, depth);
    let nu: Vec<f64> = atoms.iter().map(|c| plaque.nu_t(c, t, step)).collect::<Result<_>>()?;
    let or: Vec<f64> = atoms.iter().map(|c| oracle.mass(c)).collect::<Result<_>>()?;
    let (sn, so): (f64, f64) = (nu.iter().sum(), or.iter().sum());
    Ok(0.5 * nu.iter().zip(&or).map(|(a, b)| (a / sn - b / so).abs()).sum::<f64>())
}

/// `ν_t` tabulated on a cylinder algebra.
#[derive(Debug, Clone, Serialize)]
pub struct AveragedPushforward {
    pub base_mass: f64,
    pub t: f64,
    pub quadrature_step: f64,
    pub depth: usize,
    pub values: Vec<(CylinderSet, f64)>,
}

impl AveragedPushforward {
    pub fn new(plaque: &Plaque, t: f64, depth: usize, step: f64) -> Result<Self> {
        let values = algebra(plaque.sys, depth)
            .into_iter()
            .map(|c| {
                let v = plaque.nu_t(&c, t, step)?;
                Ok((c, v))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(AveragedPushforward {
            base_mass: plaque.total_mass(),
            t,
            quadrature_step: step,
            depth,
            values,
        })
    }

    pub fn total(&self) -> f64 {
        self.values.iter().map(|(_, v)| v).sum()
    }

    /// Relative gap between the tabulated total and the plaque mass.
    pub fn mass_defect(&self) -> f64 {
        (self.total() / self.base_mass - 1.0).abs()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceRow {
    pub t: f64,
    pub depth: usize,
    pub tv_distance: f64,
}

pub fn convergence_table(
    plaque: &Plaque,
    oracle: &OracleMeasure,
    times: &[f64],
    depth: usize,
    step: f64,
) -> Result<Vec<ConvergenceRow>> {
    times
        .iter()
        .map(|&t| {
            Ok(ConvergenceRow {
                t,
                depth,
                tv_distance: tv_to_oracle(plaque, oracle, t, depth, step)?,
            })
        })
        .collect()
}

/// Whether distances are nonincreasing up to a relative `slack`.
pub fn is_nonincreasing(rows: &[ConvergenceRow], slack: f64) -> bool {
    rows.windows(2)
        .all(|w| w[1].tv_distance <= w[0].tv_distance * (1.0 + slack))
}

/// `|ν_{t+η}(Z) − ν_t(Z)|` and the bound `2η m^u(W)/(t+η)`.
pub fn cesaro_gap(plaque: &Plaque, z: &CylinderSet, t: f64, eta: f64) -> Result<(f64, f64)> {
    let a = plaque.nu_t_exact(z, t + eta)?;
    let b = plaque.nu_t_exact(z, t)?;
    Ok(((a - b).abs(), 2.0 * eta * plaque.total_mass() / (t + eta)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::system;
    use crate::oracle::{flow_oracle, flow_pressure};

    fn plaque<'a>(sys: &'a SuspensionSystem, cycle: &[u8], fiber: f64) -> Plaque<'a> {
        let p = flow_pressure(sys).unwrap();
        let x = SymbolicPoint::periodic(sys, cycle, fiber).unwrap();
        Plaque::new(sys, p, x).unwrap()
    }

    #[test]
    fn chain_weights_match_leaf_dp() {
        for name in ["BERN13", "ROOF2", "GOLD"] {
            let sys = system(name);
            let pl = plaque(&sys, &[0], 0.3);
            for word in [vec![], vec![0u8], vec![1], vec![0, 1], vec![1, 0, 0]] {
                if !sys.sft.is_admissible(&[&[0u8][..], &word].concat()) {
                    continue;
                }
                let target = CoverTarget::leaf_cylinder(Side::Forward, pl.anchor.clone(), word.clone());
                let dp = leaf_measure_u(&sys, pl.pressure, &target, &LEAF_CUTOFFS).unwrap().value;
                let chain = pl.cylinder_mass(&word);
                assert!((chain / dp - 1.0).abs() < 1e-5, "{name} {word:?}: {chain} vs {dp}");
            }
        }
    }

    #[test]
    fn whole_space_is_conserved() {
        let sys = system("FULL2");
        let pl = plaque(&sys, &[0], 0.0);
        let whole = CylinderSet::new(0, vec![]);
        for t in [0.7, 3.0, 12.5] {
            let v = pl.nu_t(&whole, t, default_step(&sys)).unwrap();
            assert!((v / pl.total_mass() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn midpoint_matches_interval_sum() {
        let sys = system("ROOF2");
        let pl = plaque(&sys, &[0, 1], 0.4);
        let z = CylinderSet::new(-1, vec![1, 0]).with_fiber(FiberRange::Interval(0.2, 0.7));
        let a = pl.nu_t(&z, 17.3, 0.05).unwrap();
        let b = pl.nu_t_exact(&z, 17.3).unwrap();
        assert!((a - b).abs() < 1e-12 * b.max(1.0));
    }

    #[test]
    fn equidistribution_examples() {
        let sys = system("FULL2");
        let pl = plaque(&sys, &[0], 0.0);
        let a = CylinderSet::new(0, vec![0]);
        let v = pl.nu_t(&a, 40.0, default_step(&sys)).unwrap();
        assert!((v / pl.total_mass() - 0.5).abs() < 0.025);
        let sys = system("BERN13");
        let pl = plaque(&sys, &[0], 0.0);
        let v = pl.nu_t(&a, 50.0, default_step(&sys)).unwrap();
        assert!((v / pl.total_mass() / (1.0 / 3.0) - 1.0).abs() < 0.05);
    }

    #[test]
    fn full2_depth_one_gap_is_first_roof() {
        // the first unit of time is spent entirely over symbol 0, after which
        // both symbols are visited equally
        let sys = system("FULL2");
        let pl = plaque(&sys, &[0], 0.0);
        let oracle = flow_oracle(&sys).unwrap();
        for t in [10.0, 20.0, 35.0] {
            let tv = tv_to_oracle(&pl, &oracle, t, 1, default_step(&sys)).unwrap();
            assert!((tv - 0.5 / t).abs() < 1e-9, "{t}: {tv}");
        }
    }

    #[test]
    fn pulled_back_mass_at_time_zero() {
        let sys = system("BERN13");
        let pl = plaque(&sys, &[0], 0.25);
        let z = CylinderSet::new(0, vec![0, 1]).with_fiber(FiberRange::Interval(0.0, 0.5));
        assert!((pl.pulled_back_mass(&z, 0.0).unwrap() / pl.cylinder_mass(&[1]) - 1.0).abs() < 1e-12);
        assert_eq!(pl.pulled_back_mass(&z, 0.3).unwrap(), 0.0);
    }

    #[test]
    fn algebra_tabulation_keeps_mass() {
        let sys = system("GOLD");
        let pl = plaque(&sys, &[0], 0.2);
        let table = AveragedPushforward::new(&pl, 15.0, 2, default_step(&sys)).unwrap();
        assert_eq!(table.values.len(), 6);
        assert!(table.mass_defect() < 1e-9);
    }

    #[test]
    fn cesaro_bound_holds() {
        let sys = system("SRB3");
        let pl = plaque(&sys, &[1], 0.0);
        let z = CylinderSet::new(0, vec![1]);
        for (t, eta) in [(5.0, 0.5), (10.0, 2.0), (20.0, 0.1)] {
            let (gap, bound) = cesaro_gap(&pl, &z, t, eta).unwrap();
            assert!(gap <= bound);
        }
    }
}
