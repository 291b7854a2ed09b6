//! Run configuration, suite orchestration and reports.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use serde::Serialize;

use crate::config::{fixture, load_system_file, Fixture, PRIMARY_FIXTURES};
use crate::cover::required_depth;
use crate::error::{Error, Result};
use crate::oracle::flow_pressure;
use crate::report::CheckRecord;
use crate::symbolic::{Side, SuspensionSystem};
use crate::suites;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Pressure,
    Leaf,
    Conformality,
    Cocycle,
    Product,
    TwoSided,
    Srb,
    Pushforward,
    All,
}

impl Task {
    pub const SUITES: [Task; 8] = [
        Task::Pressure,
        Task::Leaf,
        Task::Conformality,
        Task::Cocycle,
        Task::Product,
        Task::TwoSided,
        Task::Srb,
        Task::Pushforward,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Task::Pressure => "pressure",
            Task::Leaf => "leaf",
            Task::Conformality => "conformality",
            Task::Cocycle => "cocycle",
            Task::Product => "product",
            Task::TwoSided => "two-sided",
            Task::Srb => "srb",
            Task::Pushforward => "pushforward",
            Task::All => "all",
        }
    }

    fn suites(self) -> Vec<Task> {
        match self {
            Task::All => Task::SUITES.to_vec(),
            t => vec![t],
        }
    }
}

impl FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Task::SUITES
            .iter()
            .chain(std::iter::once(&Task::All))
            .find(|t| t.name() == s)
            .copied()
            .ok_or_else(|| Error::Config(format!("unknown task {s}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SystemSource {
    Fixture(String),
    File(PathBuf),
}

#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub source: SystemSource,
    pub task: Task,
    /// Cover cutoffs; empty means each suite's default.
    pub cutoffs: Vec<f64>,
    pub depth_cap: Option<usize>,
    /// Tolerance on the critical value.
    pub alpha_tol: Option<f64>,
    /// Per-check tolerance overrides keyed by check name.
    pub tolerances: BTreeMap<String, f64>,
    pub seed: u64,
    #[serde(skip)]
    pub out_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(source: SystemSource, task: Task) -> Self {
        RunConfig {
            source,
            task,
            cutoffs: Vec::new(),
            depth_cap: None,
            alpha_tol: None,
            tolerances: BTreeMap::new(),
            seed: 0,
            out_dir: None,
        }
    }

    pub fn load(&self) -> Result<Fixture> {
        match &self.source {
            SystemSource::Fixture(name) => fixture(name),
            SystemSource::File(path) => {
                if !path.exists() {
                    return Err(Error::Config(format!("system file {} not found", path.display())));
                }
                load_system_file(path)
            }
        }
    }

    /// Rejects cutoffs that are not positive and increasing, and depth caps
    /// too shallow for the largest cutoff.
    pub fn validate(&self, sys: &SuspensionSystem) -> Result<()> {
        if self.cutoffs.iter().any(|t| !(*t > 0.0)) || self.cutoffs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("cutoffs must be positive and increasing".into()));
        }
        if let Some(tol) = self.alpha_tol {
            if !(tol > 0.0) {
                return Err(Error::Config("alpha tolerance must be positive".into()));
            }
        }
        if let (Some(cap), Some(&t)) = (self.depth_cap, self.cutoffs.last()) {
            let needed = required_depth(sys, t, 0.0, Side::Forward);
            if cap < needed {
                return Err(Error::DepthCapTooSmall {
                    depth_cap: cap,
                    cutoff: t,
                    needed,
                });
            }
        }
        Ok(())
    }

    pub(crate) fn tolerance(&self, check: &str, default: f64) -> f64 {
        self.tolerances.get(check).copied().unwrap_or(default)
    }
}

/// A CSV-ready table.
#[derive(Debug, Clone, Serialize)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: impl Into<String>, header: &[&str]) -> Self {
        Table {
            name: name.into(),
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.join(","));
            out.push('\n');
        }
        out
    }
}

/// Output of one suite.
#[derive(Debug, Clone, Default)]
pub struct SuiteOutput {
    pub checks: Vec<CheckRecord>,
    pub tables: Vec<Table>,
    /// Reason the suite does not apply to the system, if it does not.
    pub skipped: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteSummary {
    pub suite: String,
    pub checks: usize,
    pub failed: usize,
    pub skipped: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub fixture: String,
    pub description: String,
    pub oracle_pressure: f64,
    pub config: RunConfig,
    pub suites: Vec<SuiteSummary>,
    pub checks: Vec<CheckRecord>,
    pub tables: Vec<Table>,
    pub pass: bool,
    /// Wall-clock seconds per suite. Kept out of the JSON so that reports
    /// are reproducible byte for byte.
    #[serde(skip)]
    pub timing: Vec<(String, f64)>,
}

impl Report {
    pub fn failures(&self) -> impl Iterator<Item = &CheckRecord> {
        self.checks.iter().filter(|c| !c.pass)
    }

    /// Human-readable summary, one line per suite and per failed check.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "fixture {} ({}), oracle P = {:.9}",
            self.fixture,
            self.description,
            display_clean(self.oracle_pressure)
        );
        for (suite, (_, secs)) in self.suites.iter().zip(&self.timing) {
            match &suite.skipped {
                Some(why) => {
                    let _ = writeln!(s, "  {:<13} skipped: {why}", suite.suite);
                }
                None => {
                    let state = if suite.failed == 0 { "pass" } else { "FAIL" };
                    let _ = writeln!(
                        s,
                        "  {:<13} {state}  {}/{} checks  {secs:.2}s",
                        suite.suite,
                        suite.checks - suite.failed,
                        suite.checks
                    );
                }
            }
        }
        for c in self.failures() {
            let _ = writeln!(
                s,
                "  failed {} [{}]: lhs {:.6e} rhs {:.6e} tol {:.1e}",
                c.check, c.params, c.lhs, c.rhs, c.tolerance
            );
        }
        let _ = writeln!(s, "overall: {}", if self.pass { "pass" } else { "FAIL" });
        s
    }
}

/// Rounds values within 1e-12 of zero to zero, so they do not print as `-0.000`.
pub fn display_clean(x: f64) -> f64 {
    if x.abs() < 1e-12 {
        0.0
    } else {
        x
    }
}

/// What a suite needs besides its own defaults.
pub struct SuiteContext<'a> {
    pub name: &'a str,
    pub fixture: &'a Fixture,
    pub sys: &'a SuspensionSystem,
    pub pressure: f64,
    pub config: &'a RunConfig,
}

impl SuiteContext<'_> {
    pub fn seed(&self, task: Task) -> u64 {
        let idx = Task::SUITES.iter().position(|t| *t == task).unwrap_or(0) as u64;
        self.config.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(idx)
    }

    /// Strict tolerance on systems whose identity holds exactly, loose otherwise.
    pub fn strict_on_full2(&self, check: &str, strict: f64, loose: f64) -> f64 {
        let default = if self.name == "FULL2" { strict } else { loose };
        self.config.tolerance(check, default)
    }

    pub fn tol(&self, check: &str, default: f64) -> f64 {
        self.config.tolerance(check, default)
    }
}

fn is_config_error(e: &Error) -> bool {
    matches!(
        e,
        Error::Config(_) | Error::Io(_) | Error::DepthCapTooSmall { .. } | Error::InvalidSystem(_)
    )
}

/// Runs the selected suites. Configuration problems are returned as errors;
/// anything else a suite runs into becomes a failed check.
pub fn run(config: &RunConfig) -> Result<Report> {
    let fx = config.load()?;
    let sys = &fx.system;
    config.validate(sys)?;
    let pressure = flow_pressure(sys)?;
    let ctx = SuiteContext {
        name: &sys.name,
        fixture: &fx,
        sys,
        pressure,
        config,
    };
    let mut report = Report {
        fixture: sys.name.clone(),
        description: fx.description.clone(),
        oracle_pressure: pressure,
        config: config.clone(),
        suites: Vec::new(),
        checks: Vec::new(),
        tables: Vec::new(),
        pass: true,
        timing: Vec::new(),
    };
    for task in config.task.suites() {
        let start = Instant::now();
        let out = match suites::run_suite(task, &ctx) {
            Ok(out) => out,
            Err(Error::Unsupported(why)) => SuiteOutput {
                skipped: Some(why),
                ..SuiteOutput::default()
            },
            Err(e) if is_config_error(&e) => return Err(e),
            Err(e) => SuiteOutput {
                checks: vec![CheckRecord {
                    check: format!("{}_error", task.name()),
                    fixture: sys.name.clone(),
                    params: e.to_string(),
                    lhs: f64::NAN,
                    rhs: f64::NAN,
                    ratio: f64::NAN,
                    tolerance: 0.0,
                    pass: false,
                }],
                ..SuiteOutput::default()
            },
        };
        report.timing.push((task.name().to_string(), start.elapsed().as_secs_f64()));
        report.suites.push(SuiteSummary {
            suite: task.name().to_string(),
            checks: out.checks.len(),
            failed: out.checks.iter().filter(|c| !c.pass).count(),
            skipped: out.skipped,
        });
        report.checks.extend(out.checks);
        report.tables.extend(out.tables);
    }
    report.pass = report.checks.iter().all(|c| c.pass);
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct FixtureInfo {
    pub name: String,
    pub description: String,
    pub oracle_pressure: f64,
}

/// The five headline fixtures with their descriptions and oracle pressures.
pub fn list_fixtures() -> Result<Vec<FixtureInfo>> {
    PRIMARY_FIXTURES
        .iter()
        .map(|name| {
            let fx = fixture(name)?;
            Ok(FixtureInfo {
                name: name.to_string(),
                description: fx.description.clone(),
                oracle_pressure: flow_pressure(&fx.system)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tasks_round_trip() {
        for t in Task::SUITES.iter().chain(std::iter::once(&Task::All)) {
            assert_eq!(t.name().parse::<Task>().unwrap(), *t);
        }
        assert!("bogus".parse::<Task>().is_err());
    }

    #[test]
    fn fixture_listing() {
        let list = list_fixtures().unwrap();
        let names: Vec<&str> = list.iter().map(|f| f.name.as_str()).collect();
        assert_eq!(names, PRIMARY_FIXTURES);
        assert!((list[0].oracle_pressure - 2f64.ln()).abs() < 1e-12);
        assert!(list[0].description.contains("P=log 2"));
        let golden = ((1.0 + 5f64.sqrt()) / 2.0).ln();
        assert!((list[2].oracle_pressure - golden).abs() < 1e-9);
        assert!(list[4].oracle_pressure.abs() < 1e-12);
    }

    #[test]
    fn shallow_cap_is_a_config_error() {
        let mut cfg = RunConfig::new(SystemSource::Fixture("BERN13".into()), Task::TwoSided);
        cfg.cutoffs = vec![10.0];
        cfg.depth_cap = Some(4);
        assert!(matches!(run(&cfg), Err(Error::DepthCapTooSmall { .. })));
    }

    #[test]
    fn missing_file_is_a_config_error() {
        let cfg = RunConfig::new(SystemSource::File("/nonexistent/sys.toml".into()), Task::Pressure);
        assert!(matches!(run(&cfg), Err(Error::Config(_))));
    }

    #[test]
    fn csv_layout() {
        let mut t = Table::new("x", &["a", "b"]);
        t.push(vec!["1".into(), "2".into()]);
        assert_eq!(t.to_csv(), "a,b\n1,2\n");
    }
}
