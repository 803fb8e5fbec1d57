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

//! Local hidden variable models for the phase-setting experiment.
//!
//! Each run draws a hidden phase `phi_A` uniform on `[0, 2pi)` and a number
//! `r_A` uniform on `[0, 1)`; Bob holds `phi_B = 2pi - phi_A` and
//! `r_B = 1 - r_A`. A station's lobe value is `sin(phi_A + pi - alpha)` for
//! Alice and `sin(phi_B - beta)` for Bob. All region tests are closed at the
//! lower edge and open at the upper edge.
//!
//! The printed form of the extended models mixes two symbols for the hidden
//! phase (`theta_A` and `phi_A`). Both are read as `phi_A` here.

use alloc::vec;
use core::f64::consts::{PI, TAU};
use core::fmt;
use core::str::FromStr;

#[allow(unused_imports)] // inherent float methods shadow these when std is linked
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bell::CountsTable;
use crate::{Error, Result};

/// Samples drawn per shard of [`mc_run`]; shard `k` is seeded with `seed + k`.
pub const SHARD_SIZE: u64 = 1 << 20;

/// Upper end of the coupling range of [`LhvParams::from_g`], `sqrt(6/(6pi+28))`.
pub fn g_max() -> f64 {
    (6.0 / (6.0 * PI + 28.0)).sqrt()
}

/// Lobe height `c` and flat-band width `d`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LhvParams {
    pub c: f64,
    pub d: f64,
}

impl LhvParams {
    pub fn new(c: f64, d: f64) -> Result<Self> {
        if !(c.is_finite() && d.is_finite() && c >= 0.0 && d >= 0.0) {
            return Err(Error::InvalidParams(alloc::format!(
                "c and d must be finite and non-negative, got c={c}, d={d}"
            )));
        }
        if c + d > 1.0 {
            return Err(Error::InvalidParams(alloc::format!(
                "c + d must not exceed 1, got {}",
                c + d
            )));
        }
        Ok(LhvParams { c, d })
    }

    /// `c = 2 pi g^4`, `d = 2 g^2 - 28/3 g^4`.
    pub fn from_g(g: f64) -> Result<Self> {
        // Small slack so the endpoint itself, where c = d, is accepted.
        if !(g > 0.0 && g <= g_max() * (1.0 + 1e-12)) {
            return Err(Error::CouplingOutOfRange(g));
        }
        let g2 = g * g;
        let g4 = g2 * g2;
        let p = Self::new(2.0 * PI * g4, 2.0 * g2 - 28.0 / 3.0 * g4)?;
        if p.c > p.d * (1.0 + 1e-12) {
            return Err(Error::CouplingOutOfRange(g));
        }
        Ok(p)
    }

    /// Probability of a `+1` at either station, `c/pi + d/2`.
    pub fn analytic_single(&self) -> f64 {
        self.c / PI + self.d / 2.0
    }

    /// Base-model coincidence probability `(c/pi)(1 + cos(alpha + beta))`.
    ///
    /// Holds for `c <= d <= 1/2`. With `d > 1/2` the two flat bands overlap
    /// and add a setting-independent term.
    pub fn analytic_joint(&self, alpha: f64, beta: f64) -> Result<f64> {
        if self.c > self.d {
            return Err(Error::InvalidParams(alloc::format!(
                "joint formula needs c <= d, got c={}, d={}",
                self.c,
                self.d
            )));
        }
        if self.d > 0.5 {
            return Err(Error::InvalidParams(alloc::format!(
                "joint formula needs d <= 1/2, got d={}",
                self.d
            )));
        }
        Ok(self.c / PI * (1.0 + (alpha + beta).cos()))
    }

    /// Fraction of runs in which both stations of the fair-postselection
    /// model register an outcome. The detection sets do not depend on the
    /// settings, so this is an interval overlap.
    pub fn fairpost_coincidence_fraction(&self) -> f64 {
        // Alice: r in [0, c) u [1-d, 1). Bob, in terms of r_A: (1-c, 1] u (0, d].
        let alice = [(0.0, self.c), (1.0 - self.d, 1.0)];
        let bob = [(1.0 - self.c, 1.0), (0.0, self.d)];
        let mut total = 0.0;
        for (a0, a1) in alice {
            for (b0, b1) in bob {
                total += (a1.min(b1) - a0.max(b0)).max(0.0);
            }
        }
        // Bob's intervals may overlap each other when c + d > 1; excluded by `new`.
        total
    }
}

/// One run's hidden variables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LhvSample {
    phi_a: f64,
    r_a: f64,
}

impl LhvSample {
    pub fn new(phi_a: f64, r_a: f64) -> Result<Self> {
        if !((0.0..TAU).contains(&phi_a) && (0.0..1.0).contains(&r_a)) {
            return Err(Error::InvalidParams(alloc::format!(
                "sample needs phi_A in [0, 2pi) and r_A in [0, 1), got ({phi_a}, {r_a})"
            )));
        }
        Ok(LhvSample { phi_a, r_a })
    }

    pub fn draw<R: Rng + ?Sized>(rng: &mut R) -> Self {
        LhvSample {
            phi_a: rng.random::<f64>() * TAU,
            r_a: rng.random::<f64>(),
        }
    }

    pub fn phi_a(&self) -> f64 {
        self.phi_a
    }

    pub fn r_a(&self) -> f64 {
        self.r_a
    }

    pub fn phi_b(&self) -> f64 {
        TAU - self.phi_a
    }

    pub fn r_b(&self) -> f64 {
        1.0 - self.r_a
    }

    fn lobe(&self, side: Side, setting: f64) -> f64 {
        match side {
            Side::A => (self.phi_a + PI - setting).sin(),
            Side::B => (self.phi_b() - setting).sin(),
        }
    }

    fn r(&self, side: Side) -> f64 {
        match side {
            Side::A => self.r_a,
            Side::B => self.r_b(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LocalOutcome {
    Plus,
    Minus,
    None,
}

impl LocalOutcome {
    /// `+1`, `-1`, or `0` for no detection.
    pub fn value(self) -> i8 {
        match self {
            LocalOutcome::Plus => 1,
            LocalOutcome::Minus => -1,
            LocalOutcome::None => 0,
        }
    }

    pub fn is_detected(self) -> bool {
        self != LocalOutcome::None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Model {
    Base,
    Symmetric,
    Fairpost,
}

impl Model {
    pub const ALL: [Model; 3] = [Model::Base, Model::Symmetric, Model::Fairpost];

    pub fn outcome(
        self,
        sample: &LhvSample,
        side: Side,
        setting: f64,
        params: &LhvParams,
    ) -> LocalOutcome {
        match self {
            Model::Base => outcome_base(sample, side, setting, params),
            Model::Symmetric => outcome_symmetric(sample, side, setting, params),
            Model::Fairpost => outcome_fairpost(sample, side, setting, params),
        }
    }
}

impl FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "base" => Ok(Model::Base),
            "symmetric" => Ok(Model::Symmetric),
            "fairpost" => Ok(Model::Fairpost),
            other => Err(Error::Parse(alloc::format!(
                "unknown model `{other}` (expected base, symmetric or fairpost)"
            ))),
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Model::Base => "base",
            Model::Symmetric => "symmetric",
            Model::Fairpost => "fairpost",
        })
    }
}

fn plus_region(s: f64, r: f64, params: &LhvParams) -> bool {
    s >= 0.0 && (r < params.c * s || r >= 1.0 - params.d)
}

pub fn outcome_base(
    sample: &LhvSample,
    side: Side,
    setting: f64,
    params: &LhvParams,
) -> LocalOutcome {
    if plus_region(sample.lobe(side, setting), sample.r(side), params) {
        LocalOutcome::Plus
    } else {
        LocalOutcome::None
    }
}

/// Base model plus a `-1` wherever the base model would give `+1` at the
/// setting shifted by `pi`.
pub fn outcome_symmetric(
    sample: &LhvSample,
    side: Side,
    setting: f64,
    params: &LhvParams,
) -> LocalOutcome {
    let r = sample.r(side);
    let s = sample.lobe(side, setting);
    if plus_region(s, r, params) {
        LocalOutcome::Plus
    } else if plus_region(-s, r, params) {
        LocalOutcome::Minus
    } else {
        LocalOutcome::None
    }
}

/// Base model plus a `-1` on the strip `c s <= r < c` and on the flat band
/// when the lobe is negative, so that a run is detected exactly when
/// `r < c` or `r >= 1 - d`, whatever the setting.
pub fn outcome_fairpost(
    sample: &LhvSample,
    side: Side,
    setting: f64,
    params: &LhvParams,
) -> LocalOutcome {
    let r = sample.r(side);
    let s = sample.lobe(side, setting);
    if plus_region(s, r, params) {
        LocalOutcome::Plus
    } else if (params.c * s <= r && r < params.c) || (s < 0.0 && r >= 1.0 - params.d) {
        LocalOutcome::Minus
    } else {
        LocalOutcome::None
    }
}

/// Setting-independent detection set of the fair-postselection model.
pub fn fairpost_detected(sample: &LhvSample, side: Side, params: &LhvParams) -> bool {
    let r = sample.r(side);
    r < params.c || r >= 1.0 - params.d
}

fn outcome_slot(o: LocalOutcome) -> usize {
    match o {
        LocalOutcome::Plus => 0,
        LocalOutcome::Minus => 1,
        LocalOutcome::None => 2,
    }
}

const SLOT_VALUES: [i8; 3] = [1, -1, 0];

/// Counts from `n_samples` runs drawn from `ChaCha8Rng::seed_from_u64(seed)`.
/// Every run is evaluated at every setting pair.
pub fn mc_shard(
    model: Model,
    settings: &[(f64, f64)],
    params: &LhvParams,
    n_samples: u64,
    seed: u64,
) -> Result<CountsTable> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tally = vec![[[0u64; 3]; 3]; settings.len()];
    for _ in 0..n_samples {
        let sample = LhvSample::draw(&mut rng);
        for (cell, &(alpha, beta)) in tally.iter_mut().zip(settings) {
            let a = model.outcome(&sample, Side::A, alpha, params);
            let b = model.outcome(&sample, Side::B, beta, params);
            cell[outcome_slot(a)][outcome_slot(b)] += 1;
        }
    }

    let mut table = CountsTable::new(n_samples);
    for (cell, &(alpha, beta)) in tally.iter().zip(settings) {
        table.add_setting(alpha, beta)?;
        for (i, row) in cell.iter().enumerate() {
            for (j, &n) in row.iter().enumerate() {
                if n > 0 && (i, j) != (2, 2) {
                    table.add(SLOT_VALUES[i], SLOT_VALUES[j], alpha, beta, n)?;
                }
            }
        }
    }
    Ok(table)
}

/// Number of shards [`mc_run`] splits `n_samples` into.
pub fn shard_count(n_samples: u64) -> u64 {
    n_samples.div_ceil(SHARD_SIZE)
}

/// Samples in shard `index` of a run of `n_samples`.
pub fn shard_len(n_samples: u64, index: u64) -> u64 {
    SHARD_SIZE.min(n_samples.saturating_sub(index * SHARD_SIZE))
}

/// Monte Carlo counts for every setting pair. Shard `k` holds up to
/// [`SHARD_SIZE`] runs seeded with `seed + k`; shard tables are summed in
/// shard order, so a parallel driver calling [`mc_shard`] directly gets the
/// same table.
pub fn mc_run(
    model: Model,
    settings: &[(f64, f64)],
    params: &LhvParams,
    n_samples: u64,
    seed: u64,
) -> Result<CountsTable> {
    if n_samples == 0 {
        return Err(Error::NoSamples);
    }
    let mut total = CountsTable::new(0);
    for k in 0..shard_count(n_samples) {
        let shard = mc_shard(
            model,
            settings,
            params,
            shard_len(n_samples, k),
            seed.wrapping_add(k),
        )?;
        total.merge(&shard)?;
    }
    Ok(total)
}
