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

use alloc::string::String;

use thiserror::Error;

use crate::fock::Mode;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("pair generator needs two distinct modes, got {0:?} twice")]
    IdenticalModes(Mode),

    #[error("truncation order {order} exceeds the series storage order {max_order}")]
    OrderExceedsStorage { order: usize, max_order: usize },

    #[error("invalid circuit configuration: {0}")]
    InvalidConfig(String),

    #[error("unknown event label `{0}`")]
    UnknownEvent(String),

    #[error("norm squared has a non-negligible imaginary part ({0:e})")]
    ImaginaryResidue(f64),

    #[error("occupation {occupation:?} does not fit a cutoff of {cutoff} photons per mode")]
    OutsideSpace { occupation: [u32; 4], cutoff: u32 },

    #[error("cutoff {cutoff} too small: interior unitarity defect {defect:e}")]
    CutoffTooSmall { cutoff: u32, defect: f64 },

    #[error(
        "population {population:e} leaked onto the cutoff-{cutoff} boundary; use a larger cutoff"
    )]
    Leakage { cutoff: u32, population: f64 },

    #[error("perturbative and exact engines disagree: {perturbative:e} vs {exact:e} (tolerance {tolerance:e})")]
    EngineDisagreement {
        perturbative: f64,
        exact: f64,
        tolerance: f64,
    },

    #[error("interference fit needs at least 8 samples covering the full phase circle: {0}")]
    DegenerateSpan(String),

    #[error("counts missing for setting pair alpha={alpha}, beta={beta}")]
    MissingSetting { alpha: f64, beta: f64 },

    #[error("zero denominator in {0}")]
    ZeroDenominator(&'static str),

    #[error("counts table inconsistent: {0}")]
    InvalidCounts(String),

    #[error("coupling g={0} outside the model range (0, sqrt(6/(6 pi + 28))]")]
    CouplingOutOfRange(f64),

    #[error("invalid local hidden variable parameters: {0}")]
    InvalidParams(String),

    #[error("at least one Monte Carlo sample is required")]
    NoSamples,

    #[error("{0}")]
    Parse(String),
}
