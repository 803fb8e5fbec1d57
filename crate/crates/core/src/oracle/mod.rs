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

//! Exact evolution on a photon-number-truncated Fock space.
//!
//! Every mode keeps `0..=cutoff` photons, so the space has `(cutoff+1)^4`
//! basis states. A squeezer couples only two modes; its exponential is
//! computed densely on the two-mode factor and applied across the other two
//! modes. Nothing here touches the series code in [`crate::fock`] or
//! [`crate::perturbation`] apart from shared labels, so the two routes stay
//! independent.

mod dense;

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // inherent float methods shadow these when std is linked
use num_traits::Float;

pub use dense::{expm, DenseMatrix, TAYLOR_TERM_TOLERANCE};

use crate::fock::{Mode, Occupation};
use crate::perturbation::{self, CircuitConfig, Event};
use crate::{Error, Result};

pub const DEFAULT_CUTOFF: u32 = 6;

/// Bound on `||U^dag U - I||_max` over interior basis states.
pub const UNITARITY_TOLERANCE: f64 = 1e-10;

/// Largest population allowed on the cutoff boundary, and largest norm error.
pub const LEAKAGE_TOLERANCE: f64 = 1e-9;

/// Cutoffs tried in turn by [`exact_state_auto`].
pub const CUTOFF_LADDER: [u32; 5] = [6, 8, 10, 12, 14];

/// Errors below this are treated as exact agreement in convergence fits.
pub const ERROR_FLOOR: f64 = 1e-14;

/// Allowed shortfall of a fitted convergence slope below `n + 1`.
pub const SLOPE_SLACK: f64 = 0.3;

/// Four modes with `0..=cutoff` photons each.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TruncatedSpace {
    cutoff: u32,
}

impl TruncatedSpace {
    pub fn new(cutoff: u32) -> Result<Self> {
        if cutoff < 2 {
            return Err(Error::CutoffTooSmall {
                cutoff,
                defect: f64::INFINITY,
            });
        }
        Ok(TruncatedSpace { cutoff })
    }

    pub fn cutoff(&self) -> u32 {
        self.cutoff
    }

    /// Photon levels per mode, `cutoff + 1`.
    pub fn levels(&self) -> usize {
        self.cutoff as usize + 1
    }

    pub fn dimension(&self) -> usize {
        self.levels().pow(4)
    }

    fn stride(&self, mode: Mode) -> usize {
        self.levels().pow(3 - mode.index() as u32)
    }

    pub fn index(&self, occ: &Occupation) -> Result<usize> {
        if occ.max_count() > self.cutoff {
            return Err(Error::OutsideSpace {
                occupation: occ.counts(),
                cutoff: self.cutoff,
            });
        }
        Ok(Mode::ALL
            .iter()
            .map(|&m| occ.get(m) as usize * self.stride(m))
            .sum())
    }

    pub fn occupation(&self, index: usize) -> Occupation {
        let l = self.levels();
        let mut counts = [0u32; 4];
        let mut rest = index;
        for slot in counts.iter_mut().rev() {
            *slot = (rest % l) as u32;
            rest /= l;
        }
        Occupation::from_counts(counts)
    }

    pub fn is_boundary(&self, occ: &Occupation) -> bool {
        occ.max_count() == self.cutoff
    }
}

/// `x^dag y^dag + x y` on a two-mode factor with `levels` photon levels per
/// mode, basis index `n_x * levels + n_y`.
pub fn pair_generator_matrix(levels: usize) -> DenseMatrix {
    let mut h = DenseMatrix::zeros(levels * levels);
    for nx in 0..levels - 1 {
        for ny in 0..levels - 1 {
            let lower = nx * levels + ny;
            let upper = (nx + 1) * levels + ny + 1;
            let amp = Complex64::new((((nx + 1) * (ny + 1)) as f64).sqrt(), 0.0);
            h.set(upper, lower, amp);
            h.set(lower, upper, amp);
        }
    }
    h
}

/// A squeezer: a dense unitary on two modes, identity on the other two.
#[derive(Debug, Clone)]
pub struct DenseOperator {
    space: TruncatedSpace,
    modes: (Mode, Mode),
    factor: DenseMatrix,
}

impl DenseOperator {
    pub fn modes(&self) -> (Mode, Mode) {
        self.modes
    }

    /// The two-mode factor, basis `n_first * levels + n_second`.
    pub fn factor(&self) -> &DenseMatrix {
        &self.factor
    }

    /// Applies the operator to a full state vector.
    pub fn apply(&self, psi: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(psi.len(), self.space.dimension(), "state dimension");
        let l = self.space.levels();
        let (m1, m2) = self.modes;
        let (s1, s2) = (self.space.stride(m1), self.space.stride(m2));
        let others: Vec<Mode> = Mode::ALL
            .iter()
            .copied()
            .filter(|m| *m != m1 && *m != m2)
            .collect();
        let (t1, t2) = (self.space.stride(others[0]), self.space.stride(others[1]));

        let mut out = vec![Complex64::new(0.0, 0.0); psi.len()];
        let mut block = vec![Complex64::new(0.0, 0.0); l * l];
        for o1 in 0..l {
            for o2 in 0..l {
                let base = o1 * t1 + o2 * t2;
                for n1 in 0..l {
                    for n2 in 0..l {
                        block[n1 * l + n2] = psi[base + n1 * s1 + n2 * s2];
                    }
                }
                let mapped = self.factor.mul_vec(&block);
                for n1 in 0..l {
                    for n2 in 0..l {
                        out[base + n1 * s1 + n2 * s2] = mapped[n1 * l + n2];
                    }
                }
            }
        }
        out
    }

    /// The full `(cutoff+1)^4` square matrix. Only sensible for small cutoffs.
    pub fn to_matrix(&self) -> DenseMatrix {
        let dim = self.space.dimension();
        let mut m = DenseMatrix::zeros(dim);
        let mut e = vec![Complex64::new(0.0, 0.0); dim];
        for col in 0..dim {
            e[col] = Complex64::new(1.0, 0.0);
            let image = self.apply(&e);
            e[col] = Complex64::new(0.0, 0.0);
            for (row, v) in image.into_iter().enumerate() {
                if v != Complex64::new(0.0, 0.0) {
                    m.set(row, col, v);
                }
            }
        }
        m
    }

    /// `max |U^dag U - I|` restricted to two-mode states with at most
    /// `cutoff - 2` photons per mode.
    pub fn unitarity_defect(&self) -> f64 {
        let l = self.space.levels();
        let interior = l.saturating_sub(2);
        let product = self.factor.adjoint().matmul(&self.factor);
        let mut worst: f64 = 0.0;
        for r in 0..l * l {
            for c in 0..l * l {
                let inside = |i: usize| i / l < interior && i % l < interior;
                if !(inside(r) && inside(c)) {
                    continue;
                }
                let target = if r == c { 1.0 } else { 0.0 };
                worst = worst.max((product.get(r, c) - Complex64::new(target, 0.0)).norm());
            }
        }
        worst
    }
}

/// `exp(i g (x^dag y^dag + x y))` on the modes of `pair`, without truncation
/// in `g`.
pub fn exact_squeezer(space: TruncatedSpace, pair: (Mode, Mode), g: f64) -> Result<DenseOperator> {
    if pair.0 == pair.1 {
        return Err(Error::IdenticalModes(pair.0));
    }
    if !(g.is_finite() && g >= 0.0) {
        return Err(Error::InvalidConfig(alloc::format!(
            "coupling g must be finite and non-negative, got {g}"
        )));
    }
    let generator = pair_generator_matrix(space.levels());
    let factor = expm(&generator.scaled(Complex64::new(0.0, g)));
    let op = DenseOperator {
        space,
        modes: pair,
        factor,
    };
    let defect = op.unitarity_defect();
    if defect > UNITARITY_TOLERANCE {
        return Err(Error::CutoffTooSmall {
            cutoff: space.cutoff(),
            defect,
        });
    }
    Ok(op)
}

/// Dense final state of the circuit.
#[derive(Debug, Clone)]
pub struct ExactState {
    space: TruncatedSpace,
    amplitudes: Vec<Complex64>,
}

impl ExactState {
    pub fn space(&self) -> TruncatedSpace {
        self.space
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, occ: &Occupation) -> Complex64 {
        self.space
            .index(occ)
            .map(|i| self.amplitudes[i])
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn norm_squared(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn boundary_population(&self) -> f64 {
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| self.space.is_boundary(&self.space.occupation(*i)))
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    pub fn probability(&self, event: Event) -> f64 {
        match event {
            Event::Exact(occ) => self.amplitude(&occ).norm_sqr(),
            _ => self
                .amplitudes
                .iter()
                .enumerate()
                .filter(|(i, _)| event.matches(&self.space.occupation(*i)))
                .map(|(_, a)| a.norm_sqr())
                .sum(),
        }
    }

    /// Purity `Tr rho_A^2` of the reduced state of Alice's modes `(a1, a2)`.
    pub fn alice_purity(&self) -> f64 {
        // Index layout puts (a1, a2) in the high digits: psi[alice * l^2 + bob].
        let l2 = self.space.levels().pow(2);
        let mut purity = 0.0;
        for i in 0..l2 {
            for j in 0..l2 {
                let rho_ij: Complex64 = (0..l2)
                    .map(|b| self.amplitudes[i * l2 + b] * self.amplitudes[j * l2 + b].conj())
                    .sum();
                purity += rho_ij.norm_sqr();
            }
        }
        purity
    }

    fn check_leakage(&self) -> Result<()> {
        let population = self.boundary_population();
        let norm_error = (self.norm_squared() - 1.0).abs();
        if population > LEAKAGE_TOLERANCE || norm_error > LEAKAGE_TOLERANCE {
            return Err(Error::Leakage {
                cutoff: self.space.cutoff(),
                population: population.max(norm_error),
            });
        }
        Ok(())
    }
}

/// Exact state of the circuit for `config` at the given cutoff. The `order`
/// and `corrected` fields are ignored.
pub fn exact_state(config: &CircuitConfig, cutoff: u32) -> Result<ExactState> {
    config.validate()?;
    let space = TruncatedSpace::new(cutoff)?;
    let mut psi = vec![Complex64::new(0.0, 0.0); space.dimension()];
    psi[0] = Complex64::new(1.0, 0.0);

    let squeeze = |psi: &[Complex64], pair| -> Result<Vec<Complex64>> {
        Ok(exact_squeezer(space, pair, config.g)?.apply(psi))
    };
    psi = squeeze(&psi, (Mode::A2, Mode::B2))?;
    psi = squeeze(&psi, (Mode::A1, Mode::B1))?;
    for (i, amp) in psi.iter_mut().enumerate() {
        let occ = space.occupation(i);
        let phase = f64::from(occ.get(Mode::A1)) * config.alpha
            + f64::from(occ.get(Mode::B2)) * config.beta;
        *amp *= Complex64::cis(phase);
    }
    if config.bob_pump.is_on() {
        psi = squeeze(&psi, (Mode::B1, Mode::B2))?;
    }
    if config.alice_pump.is_on() {
        psi = squeeze(&psi, (Mode::A1, Mode::A2))?;
    }

    let state = ExactState {
        space,
        amplitudes: psi,
    };
    state.check_leakage()?;
    Ok(state)
}

/// [`exact_state`] at the first cutoff of [`CUTOFF_LADDER`] (not below
/// `min_cutoff`) whose boundary leakage is within tolerance.
pub fn exact_state_auto(config: &CircuitConfig, min_cutoff: u32) -> Result<ExactState> {
    let mut last = None;
    for cutoff in CUTOFF_LADDER.iter().copied().filter(|c| *c >= min_cutoff) {
        match exact_state(config, cutoff) {
            Err(err @ Error::Leakage { .. }) => last = Some(err),
            other => return other,
        }
    }
    Err(last.unwrap_or(Error::Leakage {
        cutoff: min_cutoff,
        population: f64::NAN,
    }))
}

pub fn exact_probability(config: &CircuitConfig, event: Event, cutoff: u32) -> Result<f64> {
    Ok(exact_state(config, cutoff)?.probability(event))
}

/// One `(g, event)` entry of a convergence scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub g: f64,
    pub event: Event,
    pub exact: f64,
    pub perturbative: f64,
    pub abs_err: f64,
}

/// Fitted error slope of one event.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventConvergence {
    pub event: Event,
    /// Least-squares slope of `ln err` against `ln g`; `None` when fewer than
    /// two positive couplings were scanned or the error sits at the floor.
    pub slope: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub order: usize,
    pub rows: Vec<ConvergenceRow>,
    pub events: Vec<EventConvergence>,
}

impl ConvergenceReport {
    /// `n + 1 - 0.3`.
    pub fn required_slope(&self) -> f64 {
        self.order as f64 + 1.0 - SLOPE_SLACK
    }

    pub fn slope(&self, event: Event) -> Option<f64> {
        self.events
            .iter()
            .find(|e| e.event == event)
            .and_then(|e| e.slope)
    }

    /// `Some(pass)` for events with a fitted slope.
    pub fn passes(&self, event: Event) -> Option<bool> {
        self.slope(event).map(|s| s >= self.required_slope())
    }

    pub fn all_pass(&self) -> bool {
        self.events
            .iter()
            .all(|e| self.passes(e.event).unwrap_or(true))
    }

    /// Rows for one event, in scan order.
    pub fn rows_for(&self, event: Event) -> impl Iterator<Item = &ConvergenceRow> {
        self.rows.iter().filter(move |r| r.event == event)
    }
}

/// Compares exact probabilities against order-`n` truncated probabilities of
/// the perturbative build of `template` at each coupling in `g_list`.
pub fn convergence_scan(
    template: &CircuitConfig,
    g_list: &[f64],
    order: usize,
) -> Result<ConvergenceReport> {
    let events = Event::all();
    let mut rows = Vec::with_capacity(g_list.len() * events.len());
    for &g in g_list {
        let cfg = template.with_g(g);
        let exact = exact_state_auto(&cfg, DEFAULT_CUTOFF)?;
        let series = perturbation::build_state(&cfg)?;
        for &event in &events {
            let e = exact.probability(event);
            let p = perturbation::probability(&series, event, order, g)?;
            rows.push(ConvergenceRow {
                g,
                event,
                exact: e,
                perturbative: p,
                abs_err: (e - p).abs(),
            });
        }
    }
    let events = events
        .into_iter()
        .map(|event| {
            let points: Vec<(f64, f64)> = rows
                .iter()
                .filter(|r| r.event == event && r.g > 0.0)
                .map(|r| (r.g, r.abs_err))
                .collect();
            let usable = points.len() >= 2 && points.iter().all(|(_, e)| *e > ERROR_FLOOR);
            let slope = usable.then(|| log_log_slope(&points));
            EventConvergence { event, slope }
        })
        .collect();
    Ok(ConvergenceReport {
        order,
        rows,
        events,
    })
}

fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|(g, _)| g.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|(_, e)| e.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}
