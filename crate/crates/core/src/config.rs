//! Plain-text (TOML) system definitions and the bundled fixtures.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symbolic::{LocallyConstantFunction, Sft, SuspensionSystem};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FunctionSpec {
    pub window_lo: i64,
    pub window_hi: i64,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SystemSpec {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub description: Option<String>,
    pub alphabet: usize,
    pub transitions: Vec<Vec<u8>>,
    pub roof: FunctionSpec,
    pub potential: FunctionSpec,
    #[serde(default)]
    pub k_r: usize,
    #[serde(default)]
    pub r_unit: Option<f64>,
    /// Unstable expansion factor per symbol, for attractor models.
    #[serde(default)]
    pub expansion: Option<Vec<f64>>,
}

/// A loaded system plus the metadata that travels with it.
#[derive(Debug, Clone)]
pub struct Fixture {
    pub system: SuspensionSystem,
    pub description: String,
    pub expansion: Option<Vec<f64>>,
}

impl SystemSpec {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn build(&self) -> Result<Fixture> {
        let transitions = self
            .transitions
            .iter()
            .map(|row| {
                row.iter()
                    .map(|&v| match v {
                        0 => Ok(false),
                        1 => Ok(true),
                        other => Err(Error::Config(format!("transition entry {other} is not 0/1"))),
                    })
                    .collect::<Result<Vec<bool>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let sft = Sft::new(self.alphabet, transitions)?;
        let roof = LocallyConstantFunction::from_admissible(
            &sft,
            self.roof.window_lo,
            self.roof.window_hi,
            &self.roof.values,
        )?;
        let potential = LocallyConstantFunction::from_admissible(
            &sft,
            self.potential.window_lo,
            self.potential.window_hi,
            &self.potential.values,
        )?;
        if let Some(exp) = &self.expansion {
            if exp.len() != self.alphabet || exp.iter().any(|&l| !(l > 1.0)) {
                return Err(Error::Config(
                    "expansion needs one factor > 1 per symbol".into(),
                ));
            }
        }
        let name = self.name.clone().unwrap_or_else(|| "custom".into());
        let system = SuspensionSystem::new(name, sft, roof, potential, self.k_r, self.r_unit)?;
        Ok(Fixture {
            system,
            description: self.description.clone().unwrap_or_default(),
            expansion: self.expansion.clone(),
        })
    }
}

pub fn load_system_file(path: &Path) -> Result<Fixture> {
    let text = std::fs::read_to_string(path)?;
    SystemSpec::parse(&text)?.build()
}

const BUNDLED: &[(&str, &str)] = &[
    ("FULL2", include_str!("../fixtures/FULL2.toml")),
    ("GOLD", include_str!("../fixtures/GOLD.toml")),
    ("ROOF2", include_str!("../fixtures/ROOF2.toml")),
    ("BERN13", include_str!("../fixtures/BERN13.toml")),
    ("SRB3", include_str!("../fixtures/SRB3.toml")),
    ("SRB2", include_str!("../fixtures/SRB2.toml")),
    ("FULL2W", include_str!("../fixtures/FULL2W.toml")),
];

/// The five headline fixtures, in listing order.
pub const PRIMARY_FIXTURES: [&str; 5] = ["FULL2", "GOLD", "ROOF2", "BERN13", "SRB3"];

pub fn fixture(name: &str) -> Result<Fixture> {
    let upper = name.to_ascii_uppercase();
    BUNDLED
        .iter()
        .find(|(n, _)| *n == upper)
        .ok_or_else(|| Error::Config(format!("unknown fixture {name}")))
        .and_then(|(_, text)| SystemSpec::parse(text)?.build())
}

pub fn bundled_fixture_names() -> impl Iterator<Item = &'static str> {
    BUNDLED.iter().map(|(n, _)| *n)
}

/// Shorthand for tests and benches.
pub fn system(name: &str) -> SuspensionSystem {
    fixture(name)
        .unwrap_or_else(|e| panic!("fixture {name}: {e}"))
        .system
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_bundled_fixtures_load() {
        for name in bundled_fixture_names() {
            let f = fixture(name).unwrap();
            assert_eq!(f.system.name, name);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let base = include_str!("../fixtures/FULL2.toml");
        let single = base.replace("alphabet = 2", "alphabet = 1");
        assert!(SystemSpec::parse(&single).unwrap().build().is_err());

        let reducible = base.replace("[[1, 1], [1, 1]]", "[[1, 0], [0, 1]]");
        assert!(matches!(
            SystemSpec::parse(&reducible).unwrap().build(),
            Err(Error::InvalidSystem(_))
        ));

        let periodic = base.replace("[[1, 1], [1, 1]]", "[[0, 1], [1, 0]]");
        assert!(SystemSpec::parse(&periodic).unwrap().build().is_err());

        let zero_roof = base.replace("values = [1.0, 1.0]", "values = [1.0, 0.0]");
        assert!(SystemSpec::parse(&zero_roof).unwrap().build().is_err());

        let short = base.replace("values = [0.0, 0.0]", "values = [0.0]");
        assert!(SystemSpec::parse(&short).unwrap().build().is_err());
    }

    #[test]
    fn unknown_fixture_is_config_error() {
        assert!(matches!(fixture("NOPE"), Err(Error::Config(_))));
    }
}
