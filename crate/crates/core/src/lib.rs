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

//! Numerical engines for the interwoven frustrated down conversion Bell
//! experiment.
//!
//! The crate is `no_std` (with `alloc`) and contains only pure computation:
//!
//! * [`fock`]: sparse four-mode Fock states whose amplitudes are truncated
//!   power series in the coupling `g`.
//! * [`perturbation`]: order-by-order construction of the four shutter
//!   configurations and truncated event probabilities.
//! * [`oracle`]: exact evolution on a photon-number-truncated space using
//!   dense matrix exponentials; the ground truth for everything else.
//! * [`bell`]: Clauser-Horne evaluation, the phase-shift "probability"
//!   construction and its CHSH-like combination, symmetry audits and the
//!   entanglement witness.
//! * [`lhv`]: the three local hidden variable models, their closed forms and
//!   a deterministic sharded Monte Carlo sampler.
//!
//! File formats, the command-line front end and parallel sweeps live in the
//! companion `pdc-bell` crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod bell;
mod error;
pub mod fock;
pub mod lhv;
pub mod oracle;
pub mod perturbation;

pub use error::{Error, Result};
pub use fock::{GPoly, Ket, KetSeries, Mode, Occupation};
pub use perturbation::{CircuitConfig, Event, EventProbabilities, Pump};

/// Version of this crate, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Which engine produces quantum probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Engine {
    /// Taylor-truncated amplitudes with order-4 probabilities.
    Perturbative,
    /// Exact evolution on a truncated Fock space.
    Oracle,
}

impl core::str::FromStr for Engine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "perturbative" => Ok(Engine::Perturbative),
            "oracle" => Ok(Engine::Oracle),
            other => Err(Error::Parse(alloc::format!("unknown engine `{other}`"))),
        }
    }
}

impl core::fmt::Display for Engine {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(match self {
            Engine::Perturbative => "perturbative",
            Engine::Oracle => "oracle",
        })
    }
}
