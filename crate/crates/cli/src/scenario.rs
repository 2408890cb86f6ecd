//! Scenario files.
//!
//! A scenario is a TOML document. Every section except `params` and
//! `initial_states` is optional and falls back to the defaults shown by
//! `lvpatch --help`. Coefficients are written as
//!
//! ```toml
//! [params.r1]
//! constant = 5.0
//! terms = [
//!     { amplitude = 0.5, frequency = "sqrt2", kind = "sin" },
//!     { amplitude = 0.5, frequency = 1.0, kind = "sin" },
//! ]
//! ```
//!
//! where `frequency = "sqrt2"` expands to `√2` exactly.

use std::path::{Path, PathBuf};

use lvpatch::{
    example51, validate_params, AttractOptions, DecayOptions, IntegrationOptions, RegionOptions,
    ScanOptions, State, SystemParams,
};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default = "default_name")]
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    pub initial_states: Vec<State>,
    #[serde(default)]
    pub integration: IntegrationOptions,
    #[serde(default)]
    pub simulate: SimulateSection,
    #[serde(default)]
    pub region: RegionOptions,
    #[serde(default)]
    pub decay: DecaySection,
    #[serde(default)]
    pub attract: AttractOptions,
    #[serde(default)]
    pub scan: ScanOptions,
    pub params: SystemParams,
}

fn default_name() -> String {
    "scenario".to_string()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateSection {
    pub t0: f64,
    pub t_end: f64,
}

impl Default for SimulateSection {
    fn default() -> Self {
        SimulateSection { t0: 0.0, t_end: 300.0 }
    }
}

/// Paired run for the Lyapunov envelope check. `primary` and `shadow`
/// default to the first two initial states; both are placed at `t0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecaySection {
    pub t0: f64,
    pub t1: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub primary: Option<State>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shadow: Option<State>,
    pub tol: f64,
    pub fit_floor: f64,
}

impl Default for DecaySection {
    fn default() -> Self {
        let d = DecayOptions::default();
        DecaySection { t0: 100.0, t1: 200.0, primary: None, shadow: None, tol: d.tol, fit_floor: d.fit_floor }
    }
}

impl DecaySection {
    pub fn options(&self) -> DecayOptions {
        DecayOptions { tol: self.tol, fit_floor: self.fit_floor }
    }
}

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let scenario: Scenario = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        if scenario.initial_states.is_empty() {
            return Err(CliError::Config("at least one initial state is required".into()));
        }
        scenario.integration.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(scenario)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario fields are always representable in TOML")
    }

    /// Runs parameter validation; failures map to the validation exit code.
    pub fn validate(&self) -> Result<(), CliError> {
        validate_params(&self.params).map_err(CliError::Validation)
    }

    pub fn decay_pair(&self) -> Result<(State, State), CliError> {
        let primary = self.decay.primary.unwrap_or(self.initial_states[0]);
        let shadow = match (self.decay.shadow, self.initial_states.get(1)) {
            (Some(s), _) => s,
            (None, Some(s)) => *s,
            (None, None) => {
                return Err(CliError::Config(
                    "decay check needs decay.shadow or a second initial state".into(),
                ))
            }
        };
        Ok((primary, shadow))
    }

    /// The built-in worked example with frequencies 1 and √2.
    pub fn example51() -> Self {
        let s = |z: [f64; 4]| State::from_array(z).expect("positive literal");
        Scenario {
            name: "example51".into(),
            output_dir: None,
            initial_states: vec![
                s([1.0, 1.0, 1.0, 1.0]),
                s([3.0, 2.0, 0.5, 1.5]),
                s([0.2, 0.4, 2.0, 3.0]),
            ],
            integration: IntegrationOptions::default(),
            simulate: SimulateSection::default(),
            region: RegionOptions::default(),
            decay: DecaySection {
                primary: Some(s([1.0, 1.0, 1.0, 1.0])),
                shadow: Some(s([2.0, 0.5, 1.5, 0.8])),
                ..Default::default()
            },
            attract: AttractOptions::default(),
            scan: ScanOptions::default(),
            params: example51(),
        }
    }
}
