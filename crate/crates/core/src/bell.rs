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

//! Clauser-Horne analysis, the phase-shift "CHSH" construction it is
//! compared against, count tables, and the off-off entanglement witness.
//!
//! Primed settings are the pumps being on: `A` is Alice's pair detection
//! with her pump off, `A'` with it on. In count tables, settings are the
//! local phases and outcomes are `+1`, `-1` or `0` (nothing detected).

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

#[allow(unused_imports)] // inherent float methods shadow these when std is linked
use num_traits::Float;

use crate::lhv::LhvParams;
use crate::oracle::{self, DEFAULT_CUTOFF};
use crate::perturbation::{self, CircuitConfig, Event, Pump};
use crate::{Engine, Error, Result};

/// Slack allowed when a joint probability exceeds its marginal.
pub const MARGINAL_SLACK: f64 = 1e-12;

/// Resolution of setting angles in a [`CountsTable`].
pub const ANGLE_QUANTUM: f64 = 1e-9;

/// Minimum number of points for [`visibility_fit`].
pub const MIN_FIT_POINTS: usize = 8;

/// Largest gap between sorted phases (mod 2pi) accepted by [`visibility_fit`].
pub const MAX_PHASE_GAP: f64 = PI / 2.0;

/// Allowed `|CH_perturbative - CH_exact|`; the two differ at order `g^6`.
pub fn engine_tolerance(g: f64) -> f64 {
    30.0 * g.powi(6) + 1e-12
}

/// The six probabilities of the Clauser-Horne inequality.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ChInputs {
    pub p_ab: f64,
    pub p_ab_prime: f64,
    pub p_a_prime_b: f64,
    pub p_a_prime_b_prime: f64,
    pub p_a: f64,
    pub p_b: f64,
}

impl ChInputs {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.p_ab,
            self.p_ab_prime,
            self.p_a_prime_b,
            self.p_a_prime_b_prime,
            self.p_a,
            self.p_b,
        ];
        if all.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::InvalidCounts(format!(
                "probability outside [0, 1] in {self:?}"
            )));
        }
        if self.p_ab > self.p_a + MARGINAL_SLACK
            || self.p_ab > self.p_b + MARGINAL_SLACK
            || self.p_ab_prime > self.p_a + MARGINAL_SLACK
            || self.p_a_prime_b > self.p_b + MARGINAL_SLACK
        {
            return Err(Error::InvalidCounts(format!(
                "joint exceeds marginal in {self:?}"
            )));
        }
        Ok(())
    }

    /// Base-model predictions at phase settings `A = alpha`, `A' = alpha'`,
    /// `B = beta`, `B' = beta'`.
    pub fn from_lhv(params: &LhvParams, settings: &ChshSettings) -> Result<Self> {
        let single = params.analytic_single();
        Ok(ChInputs {
            p_ab: params.analytic_joint(settings.alpha, settings.beta)?,
            p_ab_prime: params.analytic_joint(settings.alpha, settings.beta_prime)?,
            p_a_prime_b: params.analytic_joint(settings.alpha_prime, settings.beta)?,
            p_a_prime_b_prime: params.analytic_joint(settings.alpha_prime, settings.beta_prime)?,
            p_a: single,
            p_b: single,
        })
    }
}

/// `P(A,B) + P(A,B') + P(A',B) - P(A',B') - P(A) - P(B)`; positive values
/// violate local realism.
pub fn ch_value(inputs: &ChInputs) -> f64 {
    inputs.p_ab + inputs.p_ab_prime + inputs.p_a_prime_b
        - inputs.p_a_prime_b_prime
        - inputs.p_a
        - inputs.p_b
}

/// CH with on-off settings from one engine, cross-checked against the other.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct QuantumCh {
    pub g: f64,
    pub alpha: f64,
    pub beta: f64,
    pub engine: Engine,
    pub inputs: ChInputs,
    pub value: f64,
    /// CH from the other engine.
    pub reference: f64,
}

impl QuantumCh {
    pub fn violated(&self) -> bool {
        self.value > 0.0
    }
}

/// The six probabilities from the four pump configurations: off-off for
/// `A`, `B`, `(A,B)`; on-off for `(A',B)`; off-on for `(A,B')`; on-on for
/// `(A',B')`.
pub fn quantum_inputs(g: f64, alpha: f64, beta: f64, engine: Engine) -> Result<ChInputs> {
    let prob = |alice: Pump, bob: Pump, events: &[Event]| -> Result<Vec<f64>> {
        let cfg = CircuitConfig::new(alice, bob, g)
            .with_phases(alpha, beta)
            .with_corrected(true);
        match engine {
            Engine::Perturbative => {
                let state = perturbation::build_state(&cfg)?;
                events
                    .iter()
                    .map(|e| perturbation::probability(&state, *e, cfg.accuracy_order(), g))
                    .collect()
            }
            Engine::Oracle => {
                let state = oracle::exact_state_auto(&cfg, DEFAULT_CUTOFF)?;
                Ok(events.iter().map(|e| state.probability(*e)).collect())
            }
        }
    };
    let both = Event::Exact(crate::Occupation::new(1, 1, 1, 1));
    let off_off = prob(
        Pump::Off,
        Pump::Off,
        &[Event::AlicePair, Event::BobPair, both],
    )?;
    let on_off = prob(Pump::On, Pump::Off, &[both])?;
    let off_on = prob(Pump::Off, Pump::On, &[both])?;
    let on_on = prob(Pump::On, Pump::On, &[both])?;
    Ok(ChInputs {
        p_ab: off_off[2],
        p_ab_prime: off_on[0],
        p_a_prime_b: on_off[0],
        p_a_prime_b_prime: on_on[0],
        p_a: off_off[0],
        p_b: off_off[1],
    })
}

/// CH from `engine`, failing if the other engine differs by more than
/// [`engine_tolerance`].
pub fn ch_from_quantum(g: f64, alpha: f64, beta: f64, engine: Engine) -> Result<QuantumCh> {
    let inputs = quantum_inputs(g, alpha, beta, engine)?;
    let other = match engine {
        Engine::Perturbative => Engine::Oracle,
        Engine::Oracle => Engine::Perturbative,
    };
    let value = ch_value(&inputs);
    let reference = ch_value(&quantum_inputs(g, alpha, beta, other)?);
    let tolerance = engine_tolerance(g);
    if (value - reference).abs() > tolerance {
        let (perturbative, exact) = match engine {
            Engine::Perturbative => (value, reference),
            Engine::Oracle => (reference, value),
        };
        return Err(Error::EngineDisagreement {
            perturbative,
            exact,
            tolerance,
        });
    }
    Ok(QuantumCh {
        g,
        alpha,
        beta,
        engine,
        inputs,
        value,
        reference,
    })
}

/// CH at phase sum `delta` with the on-on coincidence replaced by
/// `2 g^4 [(2 - v) + v cos(delta)]`. This keeps the constructive maximum at
/// `4 g^4` and scales the interference depth by `v`.
pub fn synthetic_ch(g: f64, delta: f64, visibility: f64) -> Result<f64> {
    let mut inputs = quantum_inputs(g, delta, 0.0, Engine::Perturbative)?;
    let g4 = g.powi(4);
    inputs.p_a_prime_b_prime = 2.0 * g4 * ((2.0 - visibility) + visibility * delta.cos());
    Ok(ch_value(&inputs))
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct VisibilityScan {
    /// `(v, max over phases of CH)`.
    pub rows: Vec<(f64, f64)>,
    /// Visibility where the maximum crosses zero, by linear interpolation.
    pub threshold: Option<f64>,
}

/// Maximum synthetic CH over `phase_points` phase sums in `[0, 2pi)`, for
/// each visibility in `visibilities` (ascending).
pub fn visibility_scan(
    g: f64,
    visibilities: &[f64],
    phase_points: usize,
) -> Result<VisibilityScan> {
    if phase_points == 0 {
        return Err(Error::InvalidConfig(
            "visibility scan needs phase points".into(),
        ));
    }
    let mut rows = Vec::with_capacity(visibilities.len());
    for &v in visibilities {
        let mut best = f64::NEG_INFINITY;
        for k in 0..phase_points {
            let delta = TAU * k as f64 / phase_points as f64;
            best = best.max(synthetic_ch(g, delta, v)?);
        }
        rows.push((v, best));
    }
    let threshold = rows.windows(2).find_map(|w| {
        let ((v0, c0), (v1, c1)) = (w[0], w[1]);
        if c0 <= 0.0 && c1 > 0.0 {
            Some(v0 + (v1 - v0) * (-c0) / (c1 - c0))
        } else {
            None
        }
    });
    Ok(VisibilityScan { rows, threshold })
}

/// Least-squares fit `p = K (1 + v cos(delta - phase))`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct InterferenceFit {
    pub visibility: f64,
    /// `K`, the mean level.
    pub offset: f64,
    pub phase: f64,
    /// Root-mean-square residual.
    pub residual: f64,
    pub points: usize,
}

pub fn visibility_fit(samples: &[(f64, f64)]) -> Result<InterferenceFit> {
    if samples.len() < MIN_FIT_POINTS {
        return Err(Error::DegenerateSpan(format!(
            "{} points, need {MIN_FIT_POINTS}",
            samples.len()
        )));
    }
    let mut phases: Vec<f64> = samples.iter().map(|(d, _)| wrap_angle(*d)).collect();
    phases.sort_by(f64::total_cmp);
    let wrap_gap = phases[0] + TAU - phases[phases.len() - 1];
    let gap = phases
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(wrap_gap, f64::max);
    if gap > MAX_PHASE_GAP {
        return Err(Error::DegenerateSpan(format!(
            "largest phase gap {gap:.3} rad exceeds {MAX_PHASE_GAP:.3}"
        )));
    }

    // Normal equations for the basis (1, cos, sin).
    let mut ata = [[0.0f64; 3]; 3];
    let mut aty = [0.0f64; 3];
    for &(d, p) in samples {
        let row = [1.0, d.cos(), d.sin()];
        for i in 0..3 {
            aty[i] += row[i] * p;
            for j in 0..3 {
                ata[i][j] += row[i] * row[j];
            }
        }
    }
    let [a, b, c] = solve3(ata, aty)
        .ok_or_else(|| Error::DegenerateSpan("singular normal equations".into()))?;
    let amplitude = (b * b + c * c).sqrt();
    let visibility = if a > 0.0 { amplitude / a } else { 0.0 };
    let sse: f64 = samples
        .iter()
        .map(|&(d, p)| {
            let e = p - (a + b * d.cos() + c * d.sin());
            e * e
        })
        .sum();
    Ok(InterferenceFit {
        visibility,
        offset: a,
        phase: if amplitude > 0.0 { c.atan2(b) } else { 0.0 },
        residual: (sse / samples.len() as f64).sqrt(),
        points: samples.len(),
    })
}

fn solve3(mut m: [[f64; 3]; 3], mut y: [f64; 3]) -> Option<[f64; 3]> {
    let scale = m.iter().flatten().fold(0.0f64, |s, v| s.max(v.abs()));
    for col in 0..3 {
        let pivot = (col..3).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[pivot][col].abs() <= 1e-12 * scale {
            return None;
        }
        m.swap(col, pivot);
        y.swap(col, pivot);
        for row in col + 1..3 {
            let f = m[row][col] / m[col][col];
            let pivot_row = m[col];
            for (a, p) in m[row][col..].iter_mut().zip(&pivot_row[col..]) {
                *a -= f * p;
            }
            y[row] -= f * y[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let tail: f64 = (row + 1..3).map(|k| m[row][k] * x[k]).sum();
        x[row] = (y[row] - tail) / m[row][row];
    }
    Some(x)
}

/// `x mod 2pi` in `[0, 2pi)`.
pub fn wrap_angle(x: f64) -> f64 {
    let y = x % TAU;
    let y = if y < 0.0 { y + TAU } else { y };
    if y >= TAU {
        0.0
    } else {
        y
    }
}

fn full_turn_quanta() -> u64 {
    (TAU / ANGLE_QUANTUM).round() as u64
}

fn quantize(angle: f64) -> u64 {
    ((wrap_angle(angle) / ANGLE_QUANTUM).round() as u64) % full_turn_quanta()
}

type SettingKey = (u64, u64);

/// Outcome-pair counts per setting pair, with the number of trials run at
/// each setting pair.
///
/// Angles are stored modulo `2pi` on a grid of [`ANGLE_QUANTUM`]; lookups
/// also accept the neighbouring grid points. Entries with both outcomes `0`
/// are not stored. A setting pair can be present with no counts.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CountsTable {
    counts: BTreeMap<(SettingKey, i8, i8), u64>,
    settings: BTreeSet<SettingKey>,
    n_tot: u64,
}

impl CountsTable {
    pub fn new(n_tot: u64) -> Self {
        CountsTable {
            n_tot,
            ..Default::default()
        }
    }

    /// Trials per setting pair.
    pub fn n_tot(&self) -> u64 {
        self.n_tot
    }

    pub fn set_n_tot(&mut self, n_tot: u64) {
        self.n_tot = n_tot;
    }

    pub fn add_setting(&mut self, alpha: f64, beta: f64) -> Result<()> {
        if !(alpha.is_finite() && beta.is_finite()) {
            return Err(Error::InvalidCounts(format!(
                "non-finite setting ({alpha}, {beta})"
            )));
        }
        self.settings.insert((quantize(alpha), quantize(beta)));
        Ok(())
    }

    /// Adds `count` to outcome pair `(r, s)` at `(alpha, beta)`.
    pub fn add(&mut self, r: i8, s: i8, alpha: f64, beta: f64, count: u64) -> Result<()> {
        if !(-1..=1).contains(&r) || !(-1..=1).contains(&s) {
            return Err(Error::InvalidCounts(format!(
                "outcomes must be -1, 0 or 1, got ({r}, {s})"
            )));
        }
        self.add_setting(alpha, beta)?;
        if (r, s) == (0, 0) || count == 0 {
            return Ok(());
        }
        let key = self.resolve(alpha, beta).expect("setting just inserted");
        *self.counts.entry((key, r, s)).or_insert(0) += count;
        Ok(())
    }

    fn resolve(&self, alpha: f64, beta: f64) -> Option<SettingKey> {
        let full = full_turn_quanta();
        let (qa, qb) = (quantize(alpha), quantize(beta));
        let near = |q: u64, k: i64| ((q + full) as i64 + k) as u64 % full;
        let mut candidates = [(0i64, 0i64); 9];
        let mut n = 0;
        for da in [0, -1, 1] {
            for db in [0, -1, 1] {
                candidates[n] = (da, db);
                n += 1;
            }
        }
        candidates
            .iter()
            .map(|&(da, db)| (near(qa, da), near(qb, db)))
            .find(|key| self.settings.contains(key))
    }

    pub fn has_setting(&self, alpha: f64, beta: f64) -> bool {
        self.resolve(alpha, beta).is_some()
    }

    /// Setting pairs in storage order, angles in `[0, 2pi)`.
    pub fn settings(&self) -> Vec<(f64, f64)> {
        self.settings
            .iter()
            .map(|&(a, b)| (a as f64 * ANGLE_QUANTUM, b as f64 * ANGLE_QUANTUM))
            .collect()
    }

    /// `N(r, s | alpha, beta)`; zero for an absent entry at a present setting.
    pub fn count(&self, r: i8, s: i8, alpha: f64, beta: f64) -> Result<u64> {
        let key = self
            .resolve(alpha, beta)
            .ok_or(Error::MissingSetting { alpha, beta })?;
        Ok(self.counts.get(&(key, r, s)).copied().unwrap_or(0))
    }

    /// Sum of all stored counts at a setting pair.
    pub fn total_at(&self, alpha: f64, beta: f64) -> Result<u64> {
        let key = self
            .resolve(alpha, beta)
            .ok_or(Error::MissingSetting { alpha, beta })?;
        Ok(self
            .counts
            .range((key, i8::MIN, i8::MIN)..=(key, i8::MAX, i8::MAX))
            .map(|(_, n)| n)
            .sum())
    }

    /// Runs where Alice's outcome is `r`, whatever Bob got. For `r = 0` this
    /// includes the unstored runs where neither station detects.
    pub fn alice_count(&self, r: i8, alpha: f64, beta: f64) -> Result<u64> {
        if r == 0 {
            let detected = self.alice_count(1, alpha, beta)? + self.alice_count(-1, alpha, beta)?;
            return Ok(self.n_tot.saturating_sub(detected));
        }
        let mut n = 0;
        for s in [1, -1, 0] {
            n += self.count(r, s, alpha, beta)?;
        }
        Ok(n)
    }

    pub fn bob_count(&self, s: i8, alpha: f64, beta: f64) -> Result<u64> {
        if s == 0 {
            let detected = self.bob_count(1, alpha, beta)? + self.bob_count(-1, alpha, beta)?;
            return Ok(self.n_tot.saturating_sub(detected));
        }
        let mut n = 0;
        for r in [1, -1, 0] {
            n += self.count(r, s, alpha, beta)?;
        }
        Ok(n)
    }

    /// Runs where both stations register an outcome.
    pub fn coincidences_detected(&self, alpha: f64, beta: f64) -> Result<u64> {
        let mut n = 0;
        for r in [1, -1] {
            for s in [1, -1] {
                n += self.count(r, s, alpha, beta)?;
            }
        }
        Ok(n)
    }

    /// Entries as `(r, s, alpha, beta, count)` in storage order.
    pub fn entries(&self) -> impl Iterator<Item = (i8, i8, f64, f64, u64)> + '_ {
        self.counts.iter().map(|(&((a, b), r, s), &n)| {
            (r, s, a as f64 * ANGLE_QUANTUM, b as f64 * ANGLE_QUANTUM, n)
        })
    }

    /// Adds another table's counts and trials. Both must cover the same
    /// setting pairs unless `self` is empty.
    pub fn merge(&mut self, other: &CountsTable) -> Result<()> {
        if !self.settings.is_empty() && self.settings != other.settings {
            return Err(Error::InvalidCounts(
                "merging tables with different settings".into(),
            ));
        }
        self.settings.extend(other.settings.iter().copied());
        for (k, n) in &other.counts {
            *self.counts.entry(*k).or_insert(0) += n;
        }
        self.n_tot += other.n_tot;
        Ok(())
    }

    /// Checks that no setting pair holds more counts than trials.
    pub fn validate(&self) -> Result<()> {
        for &(a, b) in &self.settings() {
            let total = self.total_at(a, b)?;
            if total > self.n_tot {
                return Err(Error::InvalidCounts(format!(
                    "{total} counts at ({a}, {b}) exceed {} trials",
                    self.n_tot
                )));
            }
        }
        Ok(())
    }
}

/// Anything that yields `N(+1, +1 | alpha, beta)`, up to a common scale.
pub trait CoincidenceSource {
    fn coincidences(&self, alpha: f64, beta: f64) -> Result<f64>;
}

impl CoincidenceSource for CountsTable {
    fn coincidences(&self, alpha: f64, beta: f64) -> Result<f64> {
        Ok(self.count(1, 1, alpha, beta)? as f64)
    }
}

/// Base-model coincidence probabilities.
impl CoincidenceSource for LhvParams {
    fn coincidences(&self, alpha: f64, beta: f64) -> Result<f64> {
        self.analytic_joint(alpha, beta)
    }
}

/// Coincidences from a closure.
pub struct FnSource<F>(pub F);

impl<F: Fn(f64, f64) -> f64> CoincidenceSource for FnSource<F> {
    fn coincidences(&self, alpha: f64, beta: f64) -> Result<f64> {
        Ok((self.0)(alpha, beta))
    }
}

/// The settings `(alpha + (1-r)pi/2, beta + (1-s)pi/2)` for `r, s` in
/// `(+1,+1), (+1,-1), (-1,+1), (-1,-1)`.
pub fn shifted_settings(alpha: f64, beta: f64) -> [(f64, f64); 4] {
    [
        (alpha, beta),
        (alpha, beta + PI),
        (alpha + PI, beta),
        (alpha + PI, beta + PI),
    ]
}

/// The phase-shift "probability": the `+1,+1` coincidences at the setting
/// shifted by `pi` wherever `r` or `s` is `-1`, over the sum of all four
/// shifted variants.
pub fn paper_probability<S: CoincidenceSource + ?Sized>(
    source: &S,
    r: i8,
    s: i8,
    alpha: f64,
    beta: f64,
) -> Result<f64> {
    if !matches!(r, 1 | -1) || !matches!(s, 1 | -1) {
        return Err(Error::InvalidCounts(format!(
            "r and s must be +1 or -1, got ({r}, {s})"
        )));
    }
    let mut denominator = 0.0;
    for (a, b) in shifted_settings(alpha, beta) {
        denominator += source.coincidences(a, b)?;
    }
    if denominator <= 0.0 {
        return Err(Error::ZeroDenominator("phase-shift probability"));
    }
    let shift = |x: i8| f64::from(1 - x) * PI / 2.0;
    Ok(source.coincidences(alpha + shift(r), beta + shift(s))? / denominator)
}

/// `sum_{r,s} r s P_shift(r, s | alpha, beta)`.
pub fn paper_correlation<S: CoincidenceSource + ?Sized>(
    source: &S,
    alpha: f64,
    beta: f64,
) -> Result<f64> {
    let mut e = 0.0;
    for r in [1i8, -1] {
        for s in [1i8, -1] {
            e += f64::from(r * s) * paper_probability(source, r, s, alpha, beta)?;
        }
    }
    Ok(e)
}

/// Phase settings for the four-correlator construction.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ChshSettings {
    pub alpha: f64,
    pub alpha_prime: f64,
    pub beta: f64,
    pub beta_prime: f64,
}

impl ChshSettings {
    /// `alpha = 0, alpha' = pi/2, beta = -pi/4, beta' = -3pi/4`: each
    /// correlator `cos(alpha + beta)` equals `+-1/sqrt 2` with the sign that
    /// makes `S = 2 sqrt 2`.
    pub fn standard() -> Self {
        ChshSettings {
            alpha: 0.0,
            alpha_prime: PI / 2.0,
            beta: -PI / 4.0,
            beta_prime: -3.0 * PI / 4.0,
        }
    }

    /// `(alpha,beta), (alpha,beta'), (alpha',beta), (alpha',beta')`.
    pub fn pairs(&self) -> [(f64, f64); 4] {
        [
            (self.alpha, self.beta),
            (self.alpha, self.beta_prime),
            (self.alpha_prime, self.beta),
            (self.alpha_prime, self.beta_prime),
        ]
    }

    /// Every setting pair the construction reads, including `pi` shifts.
    pub fn required_settings(&self) -> Vec<(f64, f64)> {
        self.pairs()
            .iter()
            .flat_map(|&(a, b)| shifted_settings(a, b))
            .collect()
    }
}

impl Default for ChshSettings {
    fn default() -> Self {
        Self::standard()
    }
}

/// `S = E(alpha,beta) - E(alpha,beta') + E(alpha',beta) + E(alpha',beta')`
/// with `E` from [`paper_correlation`].
pub fn paper_chsh<S: CoincidenceSource + ?Sized>(
    source: &S,
    settings: &ChshSettings,
) -> Result<f64> {
    let [ab, abp, apb, apbp] = settings.pairs();
    Ok(
        paper_correlation(source, ab.0, ab.1)? - paper_correlation(source, abp.0, abp.1)?
            + paper_correlation(source, apb.0, apb.1)?
            + paper_correlation(source, apbp.0, apbp.1)?,
    )
}

/// Deviations from `N(+,-|a,b) = N(+,+|a,b+pi)`, `N(-,+|a,b) = N(+,+|a+pi,b)`
/// and `N(-,-|a,b) = N(+,+|a+pi,b+pi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SymmetryReport {
    /// `|lhs - rhs| / max(lhs, rhs)` per identity, zero when both vanish.
    pub relative: [f64; 3],
    /// `|lhs - rhs| / sqrt(lhs + rhs)` per identity.
    pub z_scores: [f64; 3],
    pub tolerance: f64,
}

impl SymmetryReport {
    pub fn max_relative(&self) -> f64 {
        self.relative.iter().copied().fold(0.0, f64::max)
    }

    pub fn passes(&self) -> bool {
        self.max_relative() <= self.tolerance
    }
}

pub fn symmetry_audit(
    counts: &CountsTable,
    alpha: f64,
    beta: f64,
    tolerance: f64,
) -> Result<SymmetryReport> {
    let pairs = [
        (
            counts.count(1, -1, alpha, beta)?,
            counts.count(1, 1, alpha, beta + PI)?,
        ),
        (
            counts.count(-1, 1, alpha, beta)?,
            counts.count(1, 1, alpha + PI, beta)?,
        ),
        (
            counts.count(-1, -1, alpha, beta)?,
            counts.count(1, 1, alpha + PI, beta + PI)?,
        ),
    ];
    let mut relative = [0.0; 3];
    let mut z_scores = [0.0; 3];
    for (i, &(lhs, rhs)) in pairs.iter().enumerate() {
        let (l, r) = (lhs as f64, rhs as f64);
        if lhs != rhs {
            relative[i] = (l - r).abs() / l.max(r);
            z_scores[i] = (l - r).abs() / (l + r).sqrt();
        }
    }
    Ok(SymmetryReport {
        relative,
        z_scores,
        tolerance,
    })
}

/// Fraction of trials entering the phase-shift denominator, and fraction with
/// both stations detecting.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PostselectionReport {
    pub alpha: f64,
    pub beta: f64,
    /// Sum of `N(+1,+1)` over the four `pi`-shifted settings, over `N_tot`.
    pub denominator_fraction: f64,
    /// `sum_{r,s = +-1} N(r,s | alpha,beta) / N_tot`.
    pub coincidence_fraction: f64,
}

pub fn postselection(counts: &CountsTable, alpha: f64, beta: f64) -> Result<PostselectionReport> {
    if counts.n_tot() == 0 {
        return Err(Error::ZeroDenominator("postselection fraction"));
    }
    let n = counts.n_tot() as f64;
    let mut denominator = 0.0;
    for (a, b) in shifted_settings(alpha, beta) {
        denominator += counts.coincidences(a, b)?;
    }
    Ok(PostselectionReport {
        alpha,
        beta,
        denominator_fraction: denominator / n,
        coincidence_fraction: counts.coincidences_detected(alpha, beta)? as f64 / n,
    })
}

/// Counts `N(r,s|alpha,beta) = round(n_tot * rate * (1 + r s v cos(alpha+beta)))`
/// for `r, s = +-1`, which satisfy the `pi`-shift identities exactly.
pub fn ideal_counts(
    settings: &[(f64, f64)],
    n_tot: u64,
    rate: f64,
    visibility: f64,
) -> Result<CountsTable> {
    if !(rate >= 0.0 && 4.0 * rate * (1.0 + visibility.abs()) <= 1.0) {
        return Err(Error::InvalidCounts(format!(
            "rate {rate} with visibility {visibility} exceeds one trial per run"
        )));
    }
    let mut table = CountsTable::new(n_tot);
    for &(alpha, beta) in settings {
        let cos = (alpha + beta).cos();
        for r in [1i8, -1] {
            for s in [1i8, -1] {
                let weight = 1.0 + f64::from(r * s) * visibility * cos;
                table.add(
                    r,
                    s,
                    alpha,
                    beta,
                    (n_tot as f64 * rate * weight).round() as u64,
                )?;
            }
        }
    }
    Ok(table)
}

/// CH from counts at phase settings, with a conservative uncertainty: the
/// sum of the six binomial standard errors.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CountsCh {
    pub inputs: ChInputs,
    pub value: f64,
    pub sigma: f64,
}

pub fn ch_from_counts(counts: &CountsTable, settings: &ChshSettings) -> Result<CountsCh> {
    if counts.n_tot() == 0 {
        return Err(Error::ZeroDenominator("CH from counts"));
    }
    let n = counts.n_tot() as f64;
    let joint = |a: f64, b: f64| -> Result<f64> { Ok(counts.count(1, 1, a, b)? as f64 / n) };
    let (a, ap, b, bp) = (
        settings.alpha,
        settings.alpha_prime,
        settings.beta,
        settings.beta_prime,
    );
    let inputs = ChInputs {
        p_ab: joint(a, b)?,
        p_ab_prime: joint(a, bp)?,
        p_a_prime_b: joint(ap, b)?,
        p_a_prime_b_prime: joint(ap, bp)?,
        p_a: counts.alice_count(1, a, b)? as f64 / n,
        p_b: counts.bob_count(1, a, b)? as f64 / n,
    };
    let se = |p: f64| (p * (1.0 - p) / n).sqrt();
    let sigma = se(inputs.p_ab)
        + se(inputs.p_ab_prime)
        + se(inputs.p_a_prime_b)
        + se(inputs.p_a_prime_b_prime)
        + se(inputs.p_a)
        + se(inputs.p_b);
    Ok(CountsCh {
        value: ch_value(&inputs),
        inputs,
        sigma,
    })
}

/// Purity of Alice's reduced off-off state and the entanglement verdict.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EntanglementWitness {
    pub g: f64,
    pub purity: f64,
    /// `1 - g^2 / 2`.
    pub threshold: f64,
}

impl EntanglementWitness {
    pub fn entangled(&self) -> bool {
        self.purity < self.threshold
    }
}

pub fn entanglement_witness_offoff(g: f64, alpha: f64, beta: f64) -> Result<EntanglementWitness> {
    let cfg = CircuitConfig::new(Pump::Off, Pump::Off, g).with_phases(alpha, beta);
    let state = oracle::exact_state_auto(&cfg, DEFAULT_CUTOFF)?;
    Ok(EntanglementWitness {
        g,
        purity: state.alice_purity(),
        threshold: 1.0 - 0.5 * g * g,
    })
}

/// `P("11**")` of `template` at each Bob phase, Alice's phase held fixed.
pub fn alice_marginals(
    template: &CircuitConfig,
    betas: &[f64],
    engine: Engine,
) -> Result<Vec<(f64, f64)>> {
    betas
        .iter()
        .map(|&beta| {
            let cfg = template.with_phases(template.alpha, beta);
            let p = match engine {
                Engine::Perturbative => {
                    let state = perturbation::build_state(&cfg)?;
                    perturbation::probability(
                        &state,
                        Event::AlicePair,
                        perturbation::PROBABILITY_ORDER,
                        cfg.g,
                    )?
                }
                Engine::Oracle => {
                    oracle::exact_state_auto(&cfg, DEFAULT_CUTOFF)?.probability(Event::AlicePair)
                }
            };
            Ok((beta, p))
        })
        .collect()
}

/// `max - min` of the second components.
pub fn spread(values: &[(f64, f64)]) -> f64 {
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(_, p)| {
            (lo.min(p), hi.max(p))
        });
    if values.is_empty() {
        0.0
    } else {
        hi - lo
    }
}
