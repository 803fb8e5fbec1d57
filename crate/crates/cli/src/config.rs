// Copyright 2026 The pdc-bell Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Config files and the flag-over-file merge.

use std::fs;
use std::path::Path;

use pdc_bell_core::bell::ChshSettings;
use pdc_bell_core::lhv::Model;
use pdc_bell_core::{CircuitConfig, Engine, Pump};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Every key a config file may set. Command-line flags take precedence.
#[derive(Debug, Default, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub alice_pump: Option<Pump>,
    pub bob_pump: Option<Pump>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub g: Option<f64>,
    pub order: Option<usize>,
    pub corrected: Option<bool>,
    pub engine: Option<Engine>,
    pub seed: Option<u64>,
    pub degrees: Option<bool>,
    pub model: Option<Model>,
    pub c: Option<f64>,
    pub d: Option<f64>,
    pub samples: Option<u64>,
    pub settings: Option<ChshSettings>,
    pub g_list: Option<Vec<f64>>,
    pub orders: Option<Vec<usize>>,
    pub probability_order: Option<usize>,
    pub points: Option<usize>,
    pub visibility: Option<f64>,
    pub n_tot: Option<u64>,
    pub rate: Option<f64>,
}

/// Reads a JSON file, reporting parse errors with line and column.
pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| CliError::Config {
        path: path.to_path_buf(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

pub fn load(path: Option<&Path>) -> Result<FileConfig, CliError> {
    match path {
        Some(p) => read_json(p),
        None => Ok(FileConfig::default()),
    }
}

/// Angle conversion selected by `--degrees`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Angles {
    pub degrees: bool,
}

impl Angles {
    pub fn radians(self, x: f64) -> f64 {
        if self.degrees {
            x.to_radians()
        } else {
            x
        }
    }

    pub fn settings(self, s: ChshSettings) -> ChshSettings {
        ChshSettings {
            alpha: self.radians(s.alpha),
            alpha_prime: self.radians(s.alpha_prime),
            beta: self.radians(s.beta),
            beta_prime: self.radians(s.beta_prime),
        }
    }
}

/// Circuit flags shared by `state`, `scan` and `oracle-check`.
#[derive(Debug, Default, Clone, clap::Args)]
pub struct CircuitArgs {
    /// Alice's pump: on or off.
    #[arg(long, value_parser = parse_pump)]
    pub alice: Option<Pump>,
    /// Bob's pump: on or off.
    #[arg(long, value_parser = parse_pump)]
    pub bob: Option<Pump>,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub g: Option<f64>,
    /// Taylor order of each squeezer (2 to 4).
    #[arg(long)]
    pub order: Option<usize>,
    /// Add the order-4 amplitude corrections (order 2 only).
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub corrected: Option<bool>,
}

impl CircuitArgs {
    /// Flags over file values over defaults (both pumps on, order 2,
    /// uncorrected, zero phases). `g` falls back to `default_g`.
    pub fn merge(
        &self,
        file: &FileConfig,
        angles: Angles,
        default_g: Option<f64>,
    ) -> Result<CircuitConfig, CliError> {
        let g = self.g.or(file.g).or(default_g).ok_or_else(|| {
            CliError::Usage("coupling g is required (--g or `g` in the config)".into())
        })?;
        let cfg = CircuitConfig::new(
            self.alice.or(file.alice_pump).unwrap_or(Pump::On),
            self.bob.or(file.bob_pump).unwrap_or(Pump::On),
            g,
        )
        .with_phases(
            angles.radians(self.alpha.or(file.alpha).unwrap_or(0.0)),
            angles.radians(self.beta.or(file.beta).unwrap_or(0.0)),
        )
        .with_order(self.order.or(file.order).unwrap_or(2))
        .with_corrected(self.corrected.or(file.corrected).unwrap_or(false));
        cfg.validate()?;
        Ok(cfg)
    }
}

pub fn parse_pump(s: &str) -> Result<Pump, String> {
    s.parse().map_err(|e: pdc_bell_core::Error| e.to_string())
}

pub fn parse_engine(s: &str) -> Result<Engine, String> {
    s.parse().map_err(|e: pdc_bell_core::Error| e.to_string())
}

pub fn parse_model(s: &str) -> Result<Model, String> {
    s.parse().map_err(|e: pdc_bell_core::Error| e.to_string())
}
