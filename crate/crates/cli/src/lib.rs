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

//! Command-line front end for `pdc-bell-core`.
//!
//! Every command writes its outputs plus a `<command>.manifest.json` into the
//! output directory. CSV bodies depend only on the merged configuration and
//! seed, so reruns are byte-identical apart from the manifest timestamp.

#![forbid(unsafe_code)]

use std::path::PathBuf;

pub mod commands;
pub mod config;
pub mod formats;
pub mod manifest;

pub use commands::{run, Cli, Command, Outcome};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}:{column}: {message}")]
    Config {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] pdc_bell_core::Error),
    #[error("csv: {0}")]
    Csv(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Csv(e.to_string())
    }
}

/// Process exit codes.
pub mod exit {
    pub const OK: u8 = 0;
    /// The command ran but an internal contract check failed.
    pub const CONTRACT: u8 = 1;
    pub const ERROR: u8 = 2;
}
