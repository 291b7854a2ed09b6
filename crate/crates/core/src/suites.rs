//! The verification suites behind each harness task.

use rand::Rng;

use crate::cover::{critical_value, leaf_measure_s, leaf_measure_u, CoverTarget, LEAF_CUTOFFS};
use crate::cylinder::{format_word, CylinderSet, FiberRange};
use crate::error::{Error, Result};
use crate::harness::{SuiteContext, SuiteOutput, Table, Task};
use crate::holonomy::{check_conformality, differing_past, holonomy_rn_check, omega_minus, omega_plus, PastReplacement};
use crate::oracle::{flow_oracle, flow_pressure, OracleKind, OracleMeasure};
use crate::points::point_with_word;
use crate::product::{
    comparison_table, formula_spread, gibbs_check, geometric_system, patch_global, rect_sets, ProductContext,
    RectSet, Rectangle, SrbProduct,
};
use crate::pushforward::{cesaro_gap, convergence_table, default_step, Plaque};
use crate::report::{ratio_spread, CheckRecord};
use crate::sampling::{random_point, random_word, rng, weak_stable_partner, weak_unstable_partner};
use crate::symbolic::{Side, SuspensionSystem, SymbolicPoint};
use crate::two_sided::{self, default_depth_cap, gibbs_star_check, product_family, proportionality, srb_main_check, Split};

pub(crate) fn run_suite(task: Task, ctx: &SuiteContext) -> Result<SuiteOutput> {
    match task {
        Task::Pressure => pressure(ctx),
        Task::Leaf => leaf(ctx),
        Task::Conformality => conformality(ctx),
        Task::Cocycle => cocycle(ctx),
        Task::Product => product(ctx),
        Task::TwoSided => two_sided_suite(ctx),
        Task::Srb => srb(ctx),
        Task::Pushforward => pushforward(ctx),
        Task::All => unreachable!("expanded by the harness"),
    }
}

fn f(x: f64) -> String {
    format!("{x:.12e}")
}

/// Records `spread ≤ tol` as a difference check against zero.
fn spread_check(check: &str, fixture: &str, params: impl Into<String>, spread: f64, tol: f64) -> CheckRecord {
    CheckRecord::difference_check(check, fixture, params, spread, 0.0, tol)
}

fn needs_memory_one(sys: &SuspensionSystem, what: &str) -> Result<()> {
    if sys.roof.window() != (0, 0) || sys.potential.window() != (0, 0) {
        return Err(Error::Unsupported(format!("{what} needs roof and potential reading coordinate 0 only")));
    }
    Ok(())
}

pub const PRESSURE_SCHEDULE: [f64; 3] = [10.0, 14.0, 18.0];
pub const PRESSURE_CAP: usize = 40;
/// Longer windows converge more slowly in the cap.
pub const PRESSURE_CAP_WIDE: usize = 60;

fn pressure(ctx: &SuiteContext) -> Result<SuiteOutput> {
    let schedule = if ctx.config.cutoffs.is_empty() {
        PRESSURE_SCHEDULE.to_vec()
    } else {
        ctx.config.cutoffs.clone()
    };
    let default_cap = if ctx.sys.memory() == 1 { PRESSURE_CAP } else { PRESSURE_CAP_WIDE };
    let cap = ctx.config.depth_cap.unwrap_or(default_cap);
    let est = critical_value(ctx.sys, &schedule, cap)?;
    let default = if matches!(ctx.name, "FULL2" | "SRB3") { 1e-3 } else { 1e-2 };
    let tol = ctx.config.alpha_tol.unwrap_or_else(|| ctx.tol("critical_value", default));
    let mut out = SuiteOutput::default();
    out.checks.push(CheckRecord::difference_check(
        "critical_value",
        ctx.name,
        format!("T={:?} cap={cap}", schedule),
        est.alpha_star,
        ctx.pressure,
        tol,
    ));
    let mut t = Table::new(format!("{}_crossings", ctx.name), &["kind", "parameter", "alpha"]);
    for (c, a) in &est.per_cutoff_values {
        t.push(vec!["cutoff".into(), c.to_string(), f(*a)]);
    }
    for (d, a) in &est.per_depth_values {
        t.push(vec!["depth_cap".into(), d.to_string(), f(*a)]);
    }
    t.push(vec!["extrapolated".into(), cap.to_string(), f(est.alpha_star)]);
    out.tables.push(t);
    Ok(out)
}

/// Longest forward cylinders in the leaf suite.
pub const LEAF_DEPTH: usize = 6;

fn leaf(ctx: &SuiteContext) -> Result<SuiteOutput> {
    let sys = ctx.sys;
    let oracle = OracleMeasure::new(sys, OracleKind::ShiftGibbs)?;
    let mut r = rng(ctx.seed(Task::Leaf));
    let anchor = random_point(sys, 3, 0, &mut r)?.with_fiber(0.0);
    let l = sys.memory() as i64;
    let tol = ctx.strict_on_full2("leaf_proportionality", 1e-10, 0.05);
    let mut out = SuiteOutput::default();
    let mut table = Table::new(format!("{}_leaf", ctx.name), &["side", "word", "leaf_measure", "oracle", "ratio"]);

    let words: Vec<Vec<u8>> = (1..=LEAF_DEPTH)
        .flat_map(|d| sys.sft.admissible_words(d))
        .filter(|w| sys.sft.allowed(anchor.symbol(0), w[0]))
        .collect();
    let rows: Vec<Result<(f64, f64)>> = crate::par::map(&words, |w| {
        let target = CoverTarget::leaf_cylinder(Side::Forward, anchor.clone(), w.clone());
        let m = leaf_measure_u(sys, ctx.pressure, &target, &LEAF_CUTOFFS)?.value;
        let mut full = anchor.symbols(1 - l, 0);
        full.extend(w);
        Ok((m, oracle.unstable_leaf_mass(&full)?))
    });
    let rows: Vec<(f64, f64)> = rows.into_iter().collect::<Result<_>>()?;
    for (w, (m, o)) in words.iter().zip(&rows) {
        table.push(vec!["u".into(), format_word(w), f(*m), f(*o), f(m / o)]);
    }
    out.checks.push(spread_check(
        "leaf_proportionality",
        ctx.name,
        format!("side=u cylinders={}", words.len()),
        ratio_spread(rows.iter().copied()),
        tol,
    ));

    if sys.memory() == 1 {
        // stable-leaf prefixes list coordinates −1, −2, … in that order
        let words: Vec<Vec<u8>> = (1..=LEAF_DEPTH)
            .flat_map(|d| sys.sft.admissible_words(d))
            .filter(|w| sys.sft.allowed(*w.last().unwrap(), anchor.symbol(0)))
            .collect();
        let rows: Vec<Result<(f64, f64)>> = crate::par::map(&words, |w| {
            let prefix: Vec<u8> = w.iter().rev().copied().collect();
            let target = CoverTarget::leaf_cylinder(Side::Backward, anchor.clone(), prefix);
            let m = leaf_measure_s(sys, ctx.pressure, &target, &LEAF_CUTOFFS)?.value;
            let mut full = w.clone();
            full.push(anchor.symbol(0));
            Ok((m, oracle.stable_leaf_mass(&full)?))
        });
        let rows: Vec<(f64, f64)> = rows.into_iter().collect::<Result<_>>()?;
        for (w, (m, o)) in words.iter().zip(&rows) {
            table.push(vec!["s".into(), format_word(w), f(*m), f(*o), f(m / o)]);
        }
        out.checks.push(spread_check(
            "leaf_proportionality",
            ctx.name,
            format!("side=s cylinders={}", words.len()),
            ratio_spread(rows.iter().copied()),
            tol,
        ));
    }
    out.tables.push(table);
    Ok(out)
}

pub const CONFORMALITY_CYLINDERS: usize = 20;
pub const CONFORMALITY_TIMES: [f64; 3] = [1.0, 2.0, 3.0];

fn conformality(ctx: &SuiteContext) -> Result<SuiteOutput> {
    let sys = ctx.sys;
    let mut r = rng(ctx.seed(Task::Conformality));
    let tol = ctx.strict_on_full2("conformality", 1e-10, 0.01);
    let mut cases = Vec::new();
    for _ in 0..CONFORMALITY_CYLINDERS {
        let anchor = random_point(sys, 3, 3, &mut r)?;
        let len = r.gen_range(1..=3);
        let prefix = anchor.symbols(1, len);
        for t in CONFORMALITY_TIMES {
            cases.push((anchor.clone(), prefix.clone(), t));
        }
    }
    let checks: Vec<Result<CheckRecord>> = crate::par::map(&cases, |(a, p, t)| check_conformality(sys, ctx.pressure, *t, a, p, tol));
    Ok(SuiteOutput {
        checks: checks.into_iter().collect::<Result<_>>()?,
        ..SuiteOutput::default()
    })
}

pub const COCYCLE_TRIPLES: usize = 500;

fn cocycle(ctx: &SuiteContext) -> Result<SuiteOutput> {
    let sys = ctx.sys;
    let p = ctx.pressure;
    let mut r = rng(ctx.seed(Task::Cocycle));
    let tol = ctx.tol("cocycle", 1e-12);
    let mut worst = [0.0f64; 5];
    for _ in 0..COCYCLE_TRIPLES {
        let x = random_point(sys, 3, 3, &mut r)?;
        let (c1, c2) = (r.gen_range(-2..=3), r.gen_range(-2..=3));
        let y = weak_stable_partner(sys, &x, c1, &mut r)?;
        let z = weak_stable_partner(sys, &x, c2, &mut r)?;
        let xy = omega_plus(sys, &x, &y, p)?.value;
        let xz = omega_plus(sys, &x, &z, p)?.value;
        let zy = omega_plus(sys, &z, &y, p)?.value;
        let yx = omega_plus(sys, &y, &x, p)?.value;
        worst[0] = worst[0].max((xy - xz - zy).abs());
        worst[1] = worst[1].max((xy + yx).abs());

        let y = weak_unstable_partner(sys, &x, c1, &mut r)?;
        let z = weak_unstable_partner(sys, &x, c2, &mut r)?;
        let xy = omega_minus(sys, &x, &y, p)?.value;
        let xz = omega_minus(sys, &x, &z, p)?.value;
        let zy = omega_minus(sys, &z, &y, p)?.value;
        let yx = omega_minus(sys, &y, &x, p)?.value;
        worst[2] = worst[2].max((xy - xz - zy).abs());
        worst[3] = worst[3].max((xy + yx).abs());

        let t = r.gen_range(0.0..6.0);
        let ft = sys.flow(&x, t);
        let plus = omega_plus(sys, &x, &ft, p)?.value;
        let minus = omega_minus(sys, &x, &ft, p)?.value;
        worst[4] = worst[4].max((plus + minus).abs());
    }
    let names = [
        "omega_plus_cocycle",
        "omega_plus_antisymmetry",
        "omega_minus_cocycle",
        "omega_minus_antisymmetry",
        "omega_orbit",
    ];
    let mut out = SuiteOutput::default();
    for (name, w) in names.iter().zip(worst) {
        let tol = ctx.tol(name, tol);
        out.checks.push(spread_check(name, ctx.name, format!("triples={COCYCLE_TRIPLES}"), w, tol));
    }

    // Radon–Nikodym of past-replacement holonomies
    let exact = sys.potential.window() == (0, 0);
    let tol = ctx.tol("holonomy_rn", if exact { 1e-10 } else { 0.02 });
    let family: Vec<Vec<u8>> = (1..=2).flat_map(|d| sys.sft.admissible_words(d)).collect();
    for d in 0..3 {
        // resample until the past can be changed at −d − 1
        let (source, target) = loop {
            let source = random_point(sys, 3, 0, &mut r)?;
            if let Ok(t) = differing_past(sys, &source, d) {
                break (source.clone(), t.with_fiber(source.fiber()));
            }
        };
        let pi = PastReplacement::new(source.clone(), target)?;
        let fam: Vec<Vec<u8>> = family
            .iter()
            .filter(|w| sys.sft.allowed(source.symbol(0), w[0]))
            .cloned()
            .collect();
        let mut rec = holonomy_rn_check(sys, p, &pi, &fam, tol)?;
        rec.params = format!("d={d} {}", rec.params);
        out.checks.push(rec);
    }
    Ok(out)
}

pub const PRODUCT_SETS: usize = 50;
pub const PRODUCT_GIBBS_SAMPLES: usize = 100;

/// Test sets of a rectangle: cylinders of growing depth over the whole
/// fiber window and over its two halves.
pub fn product_test_sets(ctx: &ProductContext, count: usize) -> Vec<RectSet> {
    let (lo, hi) = ctx.rect.window();
    let mid = 0.5 * (lo + hi);
    let mut out = Vec::new();
    'outer: for (m, n) in [(0, 0), (1, 0), (0, 1), (1, 1), (2, 1), (1, 2), (2, 2), (3, 3)] {
        for fiber in [(lo, hi), (lo, mid), (mid, hi)] {
            for z in rect_sets(ctx, m, n, fiber) {
                out.push(z);
                if out.len() == count {
                    break 'outer;
                }
            }
        }
    }
    out
}

fn product(ctx: &SuiteContext) -> Result<SuiteOutput> {
    let sys = ctx.sys;
    if sys.roof.window() != (0, 0) || sys.memory() != 1 {
        return Err(Error::Unsupported("rectangles need memory-1 roof and potential".into()));
    }
    let mut r = rng(ctx.seed(Task::Product));
    let q = SymbolicPoint::periodic(sys, &[0], 0.0)?;
    let pc = ProductContext::new(sys, ctx.pressure, Rectangle::new(sys, &q)?);
    let mut out = SuiteOutput::default();

    let tol = ctx.strict_on_full2("product_formulas", 1e-6, 0.01);
    let sets = product_test_sets(&pc, PRODUCT_SETS);
    let oracle = flow_oracle(sys)?;
    let rows = comparison_table(&pc, &sets, |c| oracle.mass(c), tol)?;
    let spread = rows.iter().map(|row| formula_spread(&row.formula)).fold(0.0, f64::max);
    out.checks.push(spread_check("product_formulas", ctx.name, format!("sets={}", sets.len()), spread, tol));
    let prop = ratio_spread(rows.iter().map(|row| (row.formula[0], row.oracle)));
    out.checks.push(spread_check(
        "product_oracle_proportionality",
        ctx.name,
        format!("sets={}", sets.len()),
        prop,
        ctx.tol("product_oracle_proportionality", 1e-4),
    ));
    let mut table = Table::new(
        format!("{}_product", ctx.name),
        &["set", "pushforward", "double_integral", "unstable_conditional", "stable_conditional", "oracle"],
    );
    for row in &rows {
        let v = &row.formula;
        table.push(vec![row.set_id.clone(), f(v[0]), f(v[1]), f(v[2]), f(v[3]), f(row.oracle)]);
    }
    out.tables.push(table);

    // a second rectangle with the same center symbol and another tail
    let tail = random_word(&sys.sft, 6, Some(0), &mut r);
    let q2 = point_with_word(sys, 0, &tail, 0.0)?;
    let rects = [pc.rect.clone(), Rectangle::new(sys, &q2)?];
    let cylinders: Vec<CylinderSet> = product_test_sets(&pc, 20).iter().map(|z| z.to_cylinder(0)).collect();
    let patch = patch_global(sys, ctx.name, ctx.pressure, &rects, &cylinders, ctx.tol("patch_overlap", 1e-6))?;
    out.checks.extend(patch.overlap_checks);

    let mut samples = Vec::new();
    for _ in 0..PRODUCT_GIBBS_SAMPLES {
        let w = random_word(&sys.sft, 24, Some(0), &mut r);
        let x = point_with_word(sys, 0, &w, pc.rect.q.fiber())?;
        samples.push((x, r.gen_range(1.0..=20.0)));
    }
    let g = gibbs_check(&pc, &samples)?;
    out.checks.push(CheckRecord::bound_check(
        "product_gibbs",
        ctx.name,
        format!("samples={} t<=20", samples.len()),
        g.q,
        ctx.tol("product_gibbs", 10.0),
    ));

    let tol = ctx.tol("conditional_density", 0.01);
    for past in [vec![0u8], vec![1, 0], vec![0, 1, 0]] {
        if !sys.sft.is_admissible(&past) {
            continue;
        }
        let z = RectSet {
            past: past[..past.len() - 1].to_vec(),
            future: vec![],
            fiber: pc.rect.window(),
        };
        let y = pc.point_in(&z, pc.rect.q.fiber())?;
        out.checks.push(pc.conditional_density_check(ctx.name, &y, tol)?);
    }

    let (lo, hi) = pc.rect.window();
    let z = RectSet {
        past: vec![],
        future: vec![],
        fiber: (lo, 0.5 * (lo + hi)),
    };
    out.checks.push(crate::product::flow_invariance_check(
        &pc,
        ctx.name,
        &z,
        0.25 * (hi - lo),
        ctx.tol("product_flow_invariance", 1e-6),
    )?);
    Ok(out)
}

pub const TWO_SIDED_CUTOFF: f64 = 10.0;
pub const GIBBS_STAR_SAMPLES: usize = 100;

fn two_sided_suite(ctx: &SuiteContext) -> Result<SuiteOutput> {
    let sys = ctx.sys;
    needs_memory_one(sys, "the two-sided measure")?;
    let cutoff = ctx.config.cutoffs.last().copied().unwrap_or(TWO_SIDED_CUTOFF);
    let cap = ctx.config.depth_cap.unwrap_or_else(|| default_depth_cap(sys, cutoff));
    let mut r = rng(ctx.seed(Task::TwoSided));
    let mut out = SuiteOutput::default();

    let tol = ctx.tol("two_sided_flow_invariance", 0.10);
    let r0 = sys.roof.eval_word(&[0]);
    let sets = [
        CylinderSet::new(0, vec![0]).with_fiber(FiberRange::Interval(0.0, 0.5 * r0)),
        CylinderSet::new(-1, vec![0, 0]).with_fiber(FiberRange::Interval(0.25 * r0, 0.75 * r0)),
    ];
    for z in sets.iter().filter(|z| sys.sft.is_admissible(&z.word)) {
        for tau in [0.25, 1.0] {
            out.checks.push(two_sided::flow_invariance_check(
                sys, ctx.name, ctx.pressure, z, tau, cutoff, cap, Split::Free, tol,
            )?);
        }
    }

    let mut samples = Vec::new();
    for _ in 0..GIBBS_STAR_SAMPLES {
        let x = random_point(sys, 8, 8, &mut r)?;
        samples.push((x, r.gen_range(2.0..12.0), r.gen_range(2.0..12.0)));
    }
    let g = gibbs_star_check(sys, ctx.pressure, &samples, cutoff, cap)?;
    out.checks.push(CheckRecord::bound_check(
        "gibbs_star",
        ctx.name,
        format!("samples={} excluded={} raw={:.3}", g.ratios.len(), g.excluded, g.raw_bound),
        g.bound,
        ctx.tol("gibbs_star", 4.0),
    ));

    let oracle = flow_oracle(sys)?;
    let mut family = Vec::new();
    for (m, n) in [(0, 0), (1, 0), (0, 1), (1, 1), (0, 2), (2, 0)] {
        family.extend(product_family(sys, m, n));
    }
    let rep = proportionality(sys, ctx.pressure, &oracle, &family, cutoff, cap)?;
    out.checks.push(spread_check(
        "two_sided_proportionality",
        ctx.name,
        format!("sets={} T={cutoff}", family.len()),
        rep.spread,
        ctx.tol("two_sided_proportionality", 0.05),
    ));
    let mut table = Table::new(format!("{}_two_sided", ctx.name), &["lo", "word", "m", "oracle", "ratio"]);
    for ((c, v), o) in family.iter().zip(&rep.values).zip(&rep.oracle) {
        table.push(vec![c.lo.to_string(), format_word(&c.word), f(*v), f(*o), f(v / o)]);
    }
    out.tables.push(table);
    Ok(out)
}

fn srb(ctx: &SuiteContext) -> Result<SuiteOutput> {
    let Some(expansion) = ctx.fixture.expansion.as_deref() else {
        return Err(Error::Unsupported("no expansion rates: not an attractor model".into()));
    };
    let geom = geometric_system(ctx.sys, expansion)?;
    let p = flow_pressure(&geom)?;
    let mut out = SuiteOutput::default();
    out.checks.push(CheckRecord::difference_check(
        "srb_pressure",
        ctx.name,
        "geometric potential",
        p,
        0.0,
        ctx.tol("srb_pressure", 1e-6),
    ));
    if p.abs() > crate::product::ATTRACTOR_TOL {
        return Ok(out);
    }
    let tol = ctx.tol("srb_proportionality", 0.05);
    let cutoff = ctx.config.cutoffs.last().copied().unwrap_or(TWO_SIDED_CUTOFF);
    let cap = ctx.config.depth_cap.unwrap_or_else(|| default_depth_cap(&geom, cutoff));
    let mut family = product_family(&geom, 1, 1);
    family.push(CylinderSet::new(0, vec![]));
    let main = srb_main_check(&geom, &family, cutoff, cap)?;
    out.checks.push(spread_check("srb_main", ctx.name, format!("sets={}", family.len()), main.spread, tol));

    let oracle = OracleMeasure::with_pressure(&geom, 0.0, OracleKind::FlowEquilibrium)?;
    for center in 0..geom.alphabet_size() as u8 {
        let q = SymbolicPoint::periodic(&geom, &[center], 0.0)?;
        let srb = SrbProduct::new(&geom, expansion, &q)?;
        let mut sets = rect_sets(srb.context(), 1, 1, srb.rectangle().window());
        sets.push(srb.rectangle().whole());
        let pairs = sets
            .iter()
            .map(|z| Ok((srb.value(z)?, oracle.mass(&z.to_cylinder(center))?)))
            .collect::<Result<Vec<_>>>()?;
        out.checks.push(spread_check(
            "srb_product",
            ctx.name,
            format!("center={} sets={}", format_word(&[center]), sets.len()),
            ratio_spread(pairs),
            tol,
        ));
    }
    Ok(out)
}

pub const PUSHFORWARD_TIMES: [f64; 4] = [10.0, 20.0, 40.0, 80.0];
pub const PUSHFORWARD_DEPTH: usize = 2;

fn pushforward(ctx: &SuiteContext) -> Result<SuiteOutput> {
    let sys = ctx.sys;
    needs_memory_one(sys, "averaged pushforwards")?;
    let mut r = rng(ctx.seed(Task::Pushforward));
    let anchor = random_point(sys, 3, 0, &mut r)?;
    let plaque = Plaque::new(sys, ctx.pressure, anchor)?;
    let oracle = flow_oracle(sys)?;
    let step = default_step(sys);
    let mut out = SuiteOutput::default();

    let rows = convergence_table(&plaque, &oracle, &PUSHFORWARD_TIMES, PUSHFORWARD_DEPTH, step)?;
    let slack = ctx.tol("pushforward_monotone", 0.10);
    for w in rows.windows(2) {
        out.checks.push(CheckRecord::bound_check(
            "pushforward_monotone",
            ctx.name,
            format!("t={}->{}", w[0].t, w[1].t),
            w[1].tv_distance,
            w[0].tv_distance * (1.0 + slack),
        ));
    }
    let last = rows.last().unwrap();
    out.checks.push(CheckRecord::bound_check(
        "pushforward_final_tv",
        ctx.name,
        format!("t={} depth={}", last.t, last.depth),
        last.tv_distance,
        ctx.tol("pushforward_final_tv", 0.05),
    ));
    let mut table = Table::new(format!("{}_convergence", ctx.name), &["t", "depth", "tv_distance"]);
    for row in &rows {
        table.push(vec![row.t.to_string(), row.depth.to_string(), f(row.tv_distance)]);
    }
    out.tables.push(table);

    let whole = CylinderSet::new(0, vec![]);
    let base = plaque.total_mass();
    for t in PUSHFORWARD_TIMES {
        out.checks.push(CheckRecord::ratio_check(
            "pushforward_mass",
            ctx.name,
            format!("t={t}"),
            plaque.nu_t(&whole, t, step)?,
            base,
            ctx.tol("pushforward_mass", 0.01),
        ));
    }

    let atoms = crate::pushforward::algebra(sys, PUSHFORWARD_DEPTH);
    for z in atoms.iter().take(4) {
        for (t, eta) in [(10.0, 0.5), (20.0, 5.0), (40.0, 1.0)] {
            let (gap, bound) = cesaro_gap(&plaque, z, t, eta)?;
            out.checks.push(CheckRecord::bound_check(
                "pushforward_cesaro",
                ctx.name,
                format!("Z={}@{} t={t} eta={eta}", format_word(&z.word), z.lo),
                gap,
                bound,
            ));
        }
    }
    Ok(out)
}
