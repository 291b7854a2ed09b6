use carathedyn_core::config::{system, PRIMARY_FIXTURES};
use carathedyn_core::cover::{cover_value, leaf_depth_cap, leaf_measure_u, CoverTarget};
use carathedyn_core::holonomy::{omega_minus, omega_plus};
use carathedyn_core::oracle::flow_pressure;
use carathedyn_core::sampling::{random_point, random_word, rng, weak_stable_partner, weak_unstable_partner};
use carathedyn_core::symbolic::{Side, SuspensionSystem, SymbolicPoint};
use proptest::prelude::*;
use rand::Rng;

fn fixture(i: usize) -> SuspensionSystem {
    system(PRIMARY_FIXTURES[i % PRIMARY_FIXTURES.len()])
}

/// Same point of the flow, allowing the two representations of a point on a
/// roof boundary.
fn same_point(sys: &SuspensionSystem, a: &SymbolicPoint, b: &SymbolicPoint) -> bool {
    let tol = 1e-9;
    match a.shifts() - b.shifts() {
        0 => a.agrees_with(b, -4, 4, tol),
        1 => a.fiber() < tol && (sys.roof_at(b) - b.fiber()).abs() < tol,
        -1 => b.fiber() < tol && (sys.roof_at(a) - a.fiber()).abs() < tol,
        _ => false,
    }
}

/// Whole unstable leaf of a random anchor with fiber 0.
fn anchor(sys: &SuspensionSystem, seed: u64) -> SymbolicPoint {
    let mut r = rng(seed);
    random_point(sys, 3, 0, &mut r).unwrap().with_fiber(0.0)
}

fn children(sys: &SuspensionSystem, a: &SymbolicPoint, prefix: &[u8]) -> Vec<Vec<u8>> {
    let last = *prefix.last().unwrap_or(&a.symbol(0));
    sys.sft
        .successors(last)
        .map(|s| {
            let mut p = prefix.to_vec();
            p.push(s);
            p
        })
        .collect()
}

fn forward_prefix(sys: &SuspensionSystem, a: &SymbolicPoint, len: usize, seed: u64) -> Vec<u8> {
    let mut r = rng(seed ^ 0x5eed);
    let first = a.symbol(0);
    let w = random_word(&sys.sft, len + 1, Some(first), &mut r);
    w[1..].to_vec()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn flow_is_a_group_action(f in 0usize..5, seed in any::<u64>(), s in -8.0f64..8.0, t in -8.0f64..8.0) {
        let sys = fixture(f);
        let x = random_point(&sys, 3, 3, &mut rng(seed)).unwrap();
        let two_step = sys.flow(&sys.flow(&x, s), t);
        let one_step = sys.flow(&x, s + t);
        prop_assert!(same_point(&sys, &two_step, &one_step));
        prop_assert!(same_point(&sys, &sys.flow(&x, 0.0), &x));
    }

    #[test]
    fn birkhoff_is_additive(f in 0usize..5, seed in any::<u64>(), s in -8.0f64..8.0, t in -8.0f64..8.0) {
        let sys = fixture(f);
        let x = random_point(&sys, 3, 3, &mut rng(seed)).unwrap();
        let whole = sys.birkhoff(&x, s + t);
        let split = sys.birkhoff(&x, s) + sys.birkhoff(&sys.flow(&x, s), t);
        prop_assert!((whole - split).abs() < 1e-9 * (1.0 + whole.abs()));
    }

    #[test]
    fn birkhoff_sign_convention(f in 0usize..5, seed in any::<u64>(), t in 0.0f64..8.0) {
        let sys = fixture(f);
        let x = random_point(&sys, 3, 3, &mut rng(seed)).unwrap();
        let back = sys.birkhoff(&x, -t);
        let fwd = sys.birkhoff(&sys.flow(&x, -t), t);
        prop_assert!((back + fwd).abs() < 1e-9 * (1.0 + fwd.abs()));
    }

    #[test]
    fn bowen_balls_shrink_with_time(f in 0usize..5, seed in any::<u64>(), t1 in 0.0f64..6.0, dt in 0.0f64..6.0) {
        let sys = fixture(f);
        let x = random_point(&sys, 6, 6, &mut rng(seed)).unwrap();
        for side in [Side::Forward, Side::Backward] {
            let small = sys.cylinder_ball(&x, t1 + dt, side).unwrap();
            let big = sys.cylinder_ball(&x, t1, side).unwrap();
            prop_assert!(small.is_subset_of(&big));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn cover_of_a_cylinder_is_subadditive(f in 0usize..5, seed in any::<u64>(), len in 0usize..3, cutoff in 2.0f64..6.0) {
        let sys = fixture(f);
        let p = flow_pressure(&sys).unwrap();
        let a = anchor(&sys, seed);
        let prefix = forward_prefix(&sys, &a, len, seed);
        let parent = CoverTarget::leaf_cylinder(Side::Forward, a.clone(), prefix.clone());
        let cap = leaf_depth_cap(&sys, &parent, cutoff, 3);
        let whole = cover_value(&sys, &parent, p, cutoff, cap).unwrap().value;
        let mut parts = 0.0;
        for c in children(&sys, &a, &prefix) {
            let t = CoverTarget::leaf_cylinder(Side::Forward, a.clone(), c);
            parts += cover_value(&sys, &t, p, cutoff, cap).unwrap().value;
        }
        prop_assert!(whole <= parts * (1.0 + 1e-12));
    }

    #[test]
    fn cover_value_is_monotone(f in 0usize..5, seed in any::<u64>(), cutoff in 2.0f64..6.0, da in 0.0f64..0.5, dt in 0.0f64..2.0) {
        let sys = fixture(f);
        let p = flow_pressure(&sys).unwrap();
        let target = CoverTarget::whole_leaf(Side::Forward, anchor(&sys, seed));
        let cap = leaf_depth_cap(&sys, &target, cutoff + dt, 2);
        let base = cover_value(&sys, &target, p, cutoff, cap).unwrap().value;
        let higher_alpha = cover_value(&sys, &target, p + da, cutoff, cap).unwrap().value;
        let higher_cutoff = cover_value(&sys, &target, p, cutoff + dt, cap).unwrap().value;
        prop_assert!(higher_alpha <= base * (1.0 + 1e-12));
        prop_assert!(higher_cutoff >= base * (1.0 - 1e-12));
    }

    #[test]
    fn cover_value_adds_over_children_past_the_parent_order(f in 0usize..5, seed in any::<u64>(), len in 0usize..3) {
        let sys = fixture(f);
        let p = flow_pressure(&sys).unwrap();
        let a = anchor(&sys, seed);
        let prefix = forward_prefix(&sys, &a, len, seed);
        // past the parent's largest possible order, the parent is never a cover element
        let cutoff = (len + 1) as f64 * sys.max_roof() + 1.0;
        let parent = CoverTarget::leaf_cylinder(Side::Forward, a.clone(), prefix.clone());
        let cap = leaf_depth_cap(&sys, &parent, cutoff, 3);
        let whole = cover_value(&sys, &parent, p, cutoff, cap).unwrap().value;
        let parts: f64 = children(&sys, &a, &prefix)
            .into_iter()
            .map(|c| {
                let t = CoverTarget::leaf_cylinder(Side::Forward, a.clone(), c);
                cover_value(&sys, &t, p, cutoff, cap).unwrap().value
            })
            .sum();
        prop_assert!((whole - parts).abs() <= 1e-12 * whole);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn leaf_measure_is_additive(f in 0usize..5, seed in any::<u64>(), len in 0usize..2) {
        let sys = fixture(f);
        let p = flow_pressure(&sys).unwrap();
        let a = anchor(&sys, seed);
        let prefix = forward_prefix(&sys, &a, len, seed);
        let cutoffs = [10.0, 14.0, 18.0];
        let parent = CoverTarget::leaf_cylinder(Side::Forward, a.clone(), prefix.clone());
        let whole = leaf_measure_u(&sys, p, &parent, &cutoffs).unwrap().value;
        let mut parts = 0.0;
        for c in children(&sys, &a, &prefix) {
            let t = CoverTarget::leaf_cylinder(Side::Forward, a.clone(), c);
            parts += leaf_measure_u(&sys, p, &t, &cutoffs).unwrap().value;
        }
        prop_assert!((whole - parts).abs() <= 1e-5 * whole, "whole {whole} parts {parts}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn omega_plus_is_an_antisymmetric_cocycle(f in 0usize..5, seed in any::<u64>()) {
        let sys = fixture(f);
        let p = flow_pressure(&sys).unwrap();
        let mut r = rng(seed);
        let x = random_point(&sys, 3, 3, &mut r).unwrap();
        let (c1, c2) = (r.gen_range(-2..=3), r.gen_range(-2..=3));
        let y = weak_stable_partner(&sys, &x, c1, &mut r).unwrap();
        let z = weak_stable_partner(&sys, &x, c2, &mut r).unwrap();
        let w = |a: &SymbolicPoint, b: &SymbolicPoint| omega_plus(&sys, a, b, p).unwrap().value;
        prop_assert!((w(&x, &y) - w(&x, &z) - w(&z, &y)).abs() < 1e-12);
        prop_assert!((w(&x, &y) + w(&y, &x)).abs() < 1e-12);
    }

    #[test]
    fn omega_minus_is_an_antisymmetric_cocycle(f in 0usize..5, seed in any::<u64>()) {
        let sys = fixture(f);
        let p = flow_pressure(&sys).unwrap();
        let mut r = rng(seed);
        let x = random_point(&sys, 3, 3, &mut r).unwrap();
        let (c1, c2) = (r.gen_range(-2..=3), r.gen_range(-2..=3));
        let y = weak_unstable_partner(&sys, &x, c1, &mut r).unwrap();
        let z = weak_unstable_partner(&sys, &x, c2, &mut r).unwrap();
        let w = |a: &SymbolicPoint, b: &SymbolicPoint| omega_minus(&sys, a, b, p).unwrap().value;
        prop_assert!((w(&x, &y) - w(&x, &z) - w(&z, &y)).abs() < 1e-12);
        prop_assert!((w(&x, &y) + w(&y, &x)).abs() < 1e-12);
    }
}
