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

//! Order-by-order construction of the four shutter configurations.
//!
//! The circuit is `U_a1a2 U_b1b2 U_b(beta) U_a(alpha) U_a1b1 U_a2b2 |0000>`,
//! where the station squeezers `U_a1a2` / `U_b1b2` are present only when the
//! corresponding pump is on. Each squeezer `exp(i g (x^dag y^dag + x y))` is
//! replaced by its Taylor polynomial of the configured order, and the final
//! amplitudes are cut at that order.
//!
//! Probabilities are truncated power series in `g`: `T_n(|amplitude|^2)`.
//! A state cut at `g^2` misses amplitude corrections that contribute at
//! `g^4`; the `corrected` flag adds the relevant `g^3` / `g^4` amplitude
//! terms for each configuration so order-4 probabilities come out right.
//! Leaving it off reproduces the apparent remote-phase dependence of Alice's
//! single-pair rate.

use alloc::string::ToString;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use num_complex::Complex64;

use crate::fock::{GPoly, KetSeries, Mode, Occupation};
use crate::{Error, Result};

/// Order at which event probabilities are reported.
pub const PROBABILITY_ORDER: usize = 4;

/// Tolerance on the `[0, 1]` range of truncated probabilities.
pub const PROBABILITY_SLACK: f64 = 1e-12;

/// Shutter state of a station's pump.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Pump {
    On,
    Off,
}

impl Pump {
    pub fn is_on(self) -> bool {
        self == Pump::On
    }
}

impl FromStr for Pump {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "on" => Ok(Pump::On),
            "off" => Ok(Pump::Off),
            other => Err(Error::Parse(alloc::format!(
                "pump must be `on` or `off`, got `{other}`"
            ))),
        }
    }
}

impl fmt::Display for Pump {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(if self.is_on() { "on" } else { "off" })
    }
}

#[cfg(feature = "serde")]
fn default_order() -> usize {
    2
}

/// One experimental setting.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct CircuitConfig {
    pub alice_pump: Pump,
    pub bob_pump: Pump,
    /// Phase on `a1`, radians.
    #[cfg_attr(feature = "serde", serde(default))]
    pub alpha: f64,
    /// Phase on `b2`, radians.
    #[cfg_attr(feature = "serde", serde(default))]
    pub beta: f64,
    /// Coupling `g = g_c t`.
    pub g: f64,
    /// Taylor order of each squeezer and cut of the amplitudes.
    #[cfg_attr(feature = "serde", serde(default = "default_order"))]
    pub order: usize,
    /// Add the amplitude corrections needed for order-4 probabilities.
    /// Only meaningful at `order == 2`; ignored otherwise.
    #[cfg_attr(feature = "serde", serde(default))]
    pub corrected: bool,
}

impl CircuitConfig {
    pub fn new(alice_pump: Pump, bob_pump: Pump, g: f64) -> Self {
        CircuitConfig {
            alice_pump,
            bob_pump,
            alpha: 0.0,
            beta: 0.0,
            g,
            order: 2,
            corrected: false,
        }
    }

    pub fn with_phases(mut self, alpha: f64, beta: f64) -> Self {
        self.alpha = alpha;
        self.beta = beta;
        self
    }

    pub fn with_g(mut self, g: f64) -> Self {
        self.g = g;
        self
    }

    pub fn with_order(mut self, order: usize) -> Self {
        self.order = order;
        self
    }

    pub fn with_corrected(mut self, corrected: bool) -> Self {
        self.corrected = corrected;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.g.is_finite() && self.g >= 0.0) {
            return Err(Error::InvalidConfig(alloc::format!(
                "coupling g must be finite and non-negative, got {}",
                self.g
            )));
        }
        if !(self.alpha.is_finite() && self.beta.is_finite()) {
            return Err(Error::InvalidConfig("phases must be finite".to_string()));
        }
        if !(2..=4).contains(&self.order) {
            return Err(Error::InvalidConfig(alloc::format!(
                "order must be 2, 3 or 4, got {}",
                self.order
            )));
        }
        Ok(())
    }

    /// Highest power of `g` to which this build's probabilities are exact.
    pub fn accuracy_order(&self) -> usize {
        if self.corrected && self.order == 2 {
            PROBABILITY_ORDER
        } else {
            self.order
        }
    }

    /// The configuration with Alice's and Bob's stations swapped.
    pub fn mirrored(&self) -> Self {
        CircuitConfig {
            alice_pump: self.bob_pump,
            bob_pump: self.alice_pump,
            alpha: self.beta,
            beta: self.alpha,
            ..*self
        }
    }
}

/// A detection event: an exact occupation or a pair at one station.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Event {
    Exact(Occupation),
    /// `a1 a2 = 11`, Bob's modes unconstrained (`"11**"`).
    AlicePair,
    /// `b1 b2 = 11`, Alice's modes unconstrained (`"**11"`).
    BobPair,
}

impl Event {
    pub const LABELS: [&'static str; 16] = [
        "0000", "1111", "11**", "**11", "1010", "0101", "1100", "0011", "2020", "0202", "2200",
        "0022", "2110", "1201", "0112", "1021",
    ];

    pub fn all() -> Vec<Event> {
        Self::LABELS
            .iter()
            .map(|l| l.parse().expect("built-in label"))
            .collect()
    }

    pub fn matches(&self, occ: &Occupation) -> bool {
        match self {
            Event::Exact(o) => o == occ,
            Event::AlicePair => occ.get(Mode::A1) == 1 && occ.get(Mode::A2) == 1,
            Event::BobPair => occ.get(Mode::B1) == 1 && occ.get(Mode::B2) == 1,
        }
    }
}

impl FromStr for Event {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "11**" => Ok(Event::AlicePair),
            "**11" => Ok(Event::BobPair),
            _ if Self::LABELS.contains(&s) => Ok(Event::Exact(s.parse()?)),
            _ => Err(Error::UnknownEvent(s.to_string())),
        }
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Event::Exact(o) => write!(f, "{o}"),
            Event::AlicePair => f.write_str("11**"),
            Event::BobPair => f.write_str("**11"),
        }
    }
}

/// Probabilities of all labelled events for one configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct EventProbabilities {
    values: Vec<(Event, f64)>,
}

impl EventProbabilities {
    pub fn from_values(values: Vec<(Event, f64)>) -> Self {
        EventProbabilities { values }
    }

    pub fn get(&self, event: Event) -> Option<f64> {
        self.values
            .iter()
            .find(|(e, _)| *e == event)
            .map(|(_, p)| *p)
    }

    pub fn iter(&self) -> impl Iterator<Item = &(Event, f64)> {
        self.values.iter()
    }

    /// Range and marginal-consistency checks.
    pub fn check(&self) -> Result<()> {
        for (event, p) in &self.values {
            if !(-PROBABILITY_SLACK..=1.0 + PROBABILITY_SLACK).contains(p) {
                return Err(Error::InvalidConfig(alloc::format!(
                    "probability of {event} out of range: {p}"
                )));
            }
        }
        let full = self.get(Event::Exact(Occupation::new(1, 1, 1, 1)));
        for marginal in [Event::AlicePair, Event::BobPair] {
            if let (Some(m), Some(f)) = (self.get(marginal), full) {
                if m < f - PROBABILITY_SLACK {
                    return Err(Error::InvalidConfig(alloc::format!(
                        "marginal {marginal} = {m} below P(1111) = {f}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// `sum_{k=0}^{n} i^k / k! (x^dag y^dag + x y)^k` applied to `state`, the
/// `k`-th term carrying `g^k`.
pub fn apply_truncated_squeezer(
    state: &KetSeries,
    pair: (Mode, Mode),
    order: usize,
) -> Result<KetSeries> {
    if order > state.max_order() {
        return Err(Error::OrderExceedsStorage {
            order,
            max_order: state.max_order(),
        });
    }
    let mut out = state.clone();
    let mut term = state.clone();
    for k in 1..=order {
        // i^k / k! built up one factor at a time.
        let step = Complex64::new(0.0, 1.0 / k as f64);
        term = term
            .apply_pair_generator(pair.0, pair.1)?
            .scaled_shift(step, 1);
        out = &out + &term;
    }
    Ok(out)
}

/// Amplitude corrections of order `g^3` and `g^4` that matter for order-4
/// probabilities of a state cut at `g^2`.
pub fn correction_terms(config: &CircuitConfig) -> KetSeries {
    let order = PROBABILITY_ORDER;
    let e_a = Complex64::cis(config.alpha);
    let e_b = Complex64::cis(config.beta);
    let e_ab = Complex64::cis(config.alpha + config.beta);
    let minus_i = Complex64::new(0.0, -1.0);
    let real = |x: f64| Complex64::new(x, 0.0);
    let vac = |c: Complex64| (Occupation::VACUUM, GPoly::monomial(order, 4, c));
    let cubic = |occ: Occupation, c: Complex64| (occ, GPoly::monomial(order, 3, c));
    let crossed = |k: f64| {
        [
            cubic(Occupation::new(1, 0, 1, 0), minus_i * k * e_a),
            cubic(Occupation::new(0, 1, 0, 1), minus_i * k * e_b),
        ]
    };

    let mut terms = Vec::new();
    match (config.alice_pump, config.bob_pump) {
        (Pump::On, Pump::On) => {
            let w = real(7.0 / 3.0) + e_ab;
            terms.push(vac(w));
            terms.extend(crossed(10.0 / 3.0));
            terms.push(cubic(Occupation::new(1, 1, 0, 0), minus_i * w));
            terms.push(cubic(Occupation::new(0, 0, 1, 1), minus_i * w));
        }
        (Pump::Off, Pump::Off) => {
            terms.push(vac(real(2.0 / 3.0)));
            terms.extend(crossed(4.0 / 3.0));
        }
        (Pump::On, Pump::Off) => {
            terms.push(vac(real(11.0 / 8.0)));
            terms.extend(crossed(7.0 / 3.0));
            terms.push(cubic(Occupation::new(1, 1, 0, 0), minus_i * (11.0 / 6.0)));
        }
        (Pump::Off, Pump::On) => {
            terms.push(vac(real(11.0 / 8.0)));
            terms.extend(crossed(7.0 / 3.0));
            terms.push(cubic(Occupation::new(0, 0, 1, 1), minus_i * (11.0 / 6.0)));
        }
    }
    KetSeries::from_terms(order, terms)
}

/// Builds the truncated circuit state for `config`.
pub fn build_state(config: &CircuitConfig) -> Result<KetSeries> {
    config.validate()?;
    let storage = PROBABILITY_ORDER.max(config.order);
    let vacuum = KetSeries::vacuum(storage);
    if config.g == 0.0 {
        return Ok(vacuum);
    }
    let n = config.order;
    let mut s = apply_truncated_squeezer(&vacuum, (Mode::A2, Mode::B2), n)?;
    s = apply_truncated_squeezer(&s, (Mode::A1, Mode::B1), n)?;
    s = s
        .apply_phase(Mode::A1, config.alpha)
        .apply_phase(Mode::B2, config.beta);
    if config.bob_pump.is_on() {
        s = apply_truncated_squeezer(&s, (Mode::B1, Mode::B2), n)?;
    }
    if config.alice_pump.is_on() {
        s = apply_truncated_squeezer(&s, (Mode::A1, Mode::A2), n)?;
    }
    s = s.truncated(n);
    if config.corrected && n == 2 {
        s = &s + &correction_terms(config);
    }
    Ok(s)
}

/// `sum over matching occupations of T_n(|amplitude|^2)` as a real series.
pub fn probability_series(state: &KetSeries, event: Event, order: usize) -> Result<GPoly> {
    if order > state.max_order() {
        return Err(Error::OrderExceedsStorage {
            order,
            max_order: state.max_order(),
        });
    }
    let mut acc = GPoly::zero(state.max_order());
    for (_, amp) in state.iter().filter(|(occ, _)| event.matches(occ)) {
        acc += &amp.abs_squared();
    }
    let re = acc.truncated(order).real_coeffs()?;
    Ok(GPoly::from_real(state.max_order(), &re))
}

/// [`probability_series`] evaluated at `g`.
pub fn probability(state: &KetSeries, event: Event, order: usize, g: f64) -> Result<f64> {
    Ok(probability_series(state, event, order)?.eval(g).re)
}

/// All labelled event probabilities for `config` at order 4.
pub fn configuration_probabilities(config: &CircuitConfig) -> Result<EventProbabilities> {
    let state = build_state(config)?;
    let values = Event::all()
        .into_iter()
        .map(|e| Ok((e, probability(&state, e, PROBABILITY_ORDER, config.g)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(EventProbabilities { values })
}
