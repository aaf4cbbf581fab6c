//! On-disk model format.
//!
//! ```toml
//! schema_version = 1
//! mu = 1.0
//! routing = [[0.0, 1.0], [1.0, 0.0]]
//!
//! [[states]]
//! lambda = 2.0
//! beta = 1.0
//! sojourn = { family = "gamma", shape = 2.0, rate = 1.0 }
//!
//! [[states]]
//! lambda = 0.5
//! beta = 0.5
//! sojourn = { family = "exponential", rate = 1.0 }
//! ```
//!
//! Families: `exponential {rate}`, `gamma {shape, rate}`,
//! `deterministic {value}`, `hyperexponential {probs, rates}`,
//! `tabulated {points = [[s, value], ...], mean}`. Unknown keys are errors.
//! Files ending in `.json` are read as JSON with the same structure.

use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::environment::{
    EnvironmentModel, SojournDistribution, StateParams, ValidationReport, Violation,
};
use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateRecord {
    pub lambda: f64,
    pub beta: f64,
    pub sojourn: SojournDistribution,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub schema_version: u32,
    pub mu: f64,
    pub states: Vec<StateRecord>,
    pub routing: Vec<Vec<f64>>,
}

impl ModelFile {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        if path
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("json"))
        {
            Self::from_json_str(&text)
        } else {
            Self::from_toml_str(&text)
        }
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("model files always serialize")
    }

    pub fn from_model(model: &EnvironmentModel) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            mu: model.service_rate,
            states: model
                .states
                .iter()
                .map(|s| StateRecord {
                    lambda: s.arrival_rate,
                    beta: s.speed,
                    sojourn: s.sojourn.clone(),
                })
                .collect(),
            routing: model
                .routing
                .row_iter()
                .map(|r| r.iter().copied().collect())
                .collect(),
        }
    }

    /// Builds and validates the model.
    pub fn to_model(&self) -> Result<EnvironmentModel> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Parse(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        let k = self.states.len();
        let cols = self.routing.first().map_or(0, Vec::len);
        if self.routing.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidModel(ValidationReport(vec![
                Violation::RoutingShape {
                    rows: self.routing.len(),
                    cols,
                    states: k,
                },
            ])));
        }
        let routing = DMatrix::from_fn(self.routing.len(), cols, |i, j| self.routing[i][j]);
        let model = EnvironmentModel {
            service_rate: self.mu,
            states: self
                .states
                .iter()
                .map(|s| StateParams {
                    arrival_rate: s.lambda,
                    speed: s.beta,
                    sojourn: s.sojourn.clone(),
                })
                .collect(),
            routing,
        };
        model.ensure_valid()?;
        Ok(model)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
schema_version = 1
mu = 1.0
routing = [[0.0, 1.0], [1.0, 0.0]]

[[states]]
lambda = 2.0
beta = 1.0
sojourn = { family = "gamma", shape = 2.0, rate = 1.0 }

[[states]]
lambda = 0.5
beta = 0.5
sojourn = { family = "hyperexponential", probs = [0.5, 0.5], rates = [1.0, 2.0] }
"#;

    #[test]
    fn parses_sample() {
        let f = ModelFile::from_toml_str(SAMPLE).unwrap();
        let m = f.to_model().unwrap();
        assert_eq!(m.state_count(), 2);
        assert_eq!(
            m.states[0].sojourn,
            SojournDistribution::Gamma {
                shape: 2.0,
                rate: 1.0
            }
        );
        assert_eq!(ModelFile::from_model(&m), f);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let extra = SAMPLE.replace("mu = 1.0", "mu = 1.0\ncolour = 3");
        assert!(matches!(
            ModelFile::from_toml_str(&extra),
            Err(Error::Parse(_))
        ));
        let extra_param = SAMPLE.replace("shape = 2.0, rate", "shape = 2.0, scale = 1.0, rate");
        assert!(ModelFile::from_toml_str(&extra_param).is_err());
        let bad_family = SAMPLE.replace("\"gamma\"", "\"weibull\"");
        assert!(ModelFile::from_toml_str(&bad_family).is_err());
    }

    #[test]
    fn wrong_version_and_ragged_routing() {
        let v2 = SAMPLE.replace("schema_version = 1", "schema_version = 2");
        let f = ModelFile::from_toml_str(&v2).unwrap();
        assert!(matches!(f.to_model(), Err(Error::Parse(_))));
        let ragged = SAMPLE.replace("[[0.0, 1.0], [1.0, 0.0]]", "[[0.0, 1.0], [1.0]]");
        let f = ModelFile::from_toml_str(&ragged).unwrap();
        assert!(matches!(f.to_model(), Err(Error::InvalidModel(_))));
    }

    #[test]
    fn json_round_trip() {
        let f = ModelFile::from_toml_str(SAMPLE).unwrap();
        let json = serde_json::to_string(&f).unwrap();
        assert!(json.contains("\"family\":\"hyperexponential\""));
        assert_eq!(ModelFile::from_json_str(&json).unwrap(), f);
    }

    #[test]
    fn tabulated_family_parses() {
        let text = SAMPLE.replace(
            "{ family = \"gamma\", shape = 2.0, rate = 1.0 }",
            "{ family = \"tabulated\", points = [[0.0, 1.0], [1.0, 0.5], [4.0, 0.1]], mean = 1.2 }",
        );
        let m = ModelFile::from_toml_str(&text).unwrap().to_model().unwrap();
        assert!(matches!(
            m.states[0].sojourn,
            SojournDistribution::Tabulated { .. }
        ));
    }
}
