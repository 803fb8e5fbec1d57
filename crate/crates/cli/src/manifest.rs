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

//! Run manifests: what was run, with which inputs, and what it wrote.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct OutputRecord {
    pub file: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Versions {
    pub pdc_bell: &'static str,
    pub pdc_bell_core: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    /// The merged configuration the command ran with.
    pub config: serde_json::Value,
    pub seed: Option<u64>,
    pub engine: Option<String>,
    pub versions: Versions,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
    pub outputs: Vec<OutputRecord>,
}

/// Collects a command's output files under one directory and writes them
/// with a manifest named `<stem>.manifest.json`.
pub struct OutputSet {
    dir: PathBuf,
    stem: String,
    files: Vec<(String, Vec<u8>)>,
}

impl OutputSet {
    pub fn new(dir: &Path, stem: &str) -> Self {
        OutputSet {
            dir: dir.to_path_buf(),
            stem: stem.to_string(),
            files: Vec::new(),
        }
    }

    pub fn add(&mut self, name: &str, bytes: Vec<u8>) {
        self.files.push((name.to_string(), bytes));
    }

    pub fn add_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.add(name, bytes);
        Ok(())
    }

    /// Writes every file and the manifest; returns the manifest path.
    pub fn finish(
        self,
        command: &str,
        config: serde_json::Value,
        seed: Option<u64>,
        engine: Option<String>,
    ) -> Result<PathBuf, CliError> {
        fs::create_dir_all(&self.dir).map_err(|source| CliError::Io {
            path: self.dir.clone(),
            source,
        })?;
        let mut outputs = Vec::new();
        for (name, bytes) in &self.files {
            let path = self.dir.join(name);
            fs::write(&path, bytes).map_err(|source| CliError::Io { path, source })?;
            outputs.push(OutputRecord {
                file: name.clone(),
                sha256: hex::encode(Sha256::digest(bytes)),
            });
        }
        let manifest = RunManifest {
            command: command.to_string(),
            config,
            seed,
            engine,
            versions: Versions {
                pdc_bell: env!("CARGO_PKG_VERSION"),
                pdc_bell_core: pdc_bell_core::VERSION,
            },
            timestamp: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            outputs,
        };
        let path = self.dir.join(format!("{}.manifest.json", self.stem));
        let mut bytes = serde_json::to_vec_pretty(&manifest)?;
        bytes.push(b'\n');
        fs::write(&path, bytes).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?;
        Ok(path)
    }
}
