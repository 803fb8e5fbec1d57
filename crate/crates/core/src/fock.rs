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

//! Sparse four-mode Fock states with power-series amplitudes.
//!
//! Modes are fixed to the four beams of the set-up, ordered `(a1, a2, b1, b2)`.
//! A [`KetSeries`] maps occupations to [`GPoly`] amplitudes, polynomials in
//! the dimensionless coupling `g` truncated at a shared storage order. Phases
//! enter as already-evaluated complex numbers.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, AddAssign, Mul, Neg, Sub};
use core::str::FromStr;

use num_complex::Complex64;
#[allow(unused_imports)] // inherent float methods shadow these when std is linked
use num_traits::Float;

use crate::{Error, Result};

/// Coefficients with modulus below this are dropped after arithmetic.
pub const PRUNE_EPS: f64 = 1e-15;

/// Largest imaginary residue tolerated in a norm or probability series.
pub const IMAG_TOLERANCE: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// One of the four labelled beams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Mode {
    A1,
    A2,
    B1,
    B2,
}

impl Mode {
    pub const ALL: [Mode; 4] = [Mode::A1, Mode::A2, Mode::B1, Mode::B2];

    pub const fn index(self) -> usize {
        match self {
            Mode::A1 => 0,
            Mode::A2 => 1,
            Mode::B1 => 2,
            Mode::B2 => 3,
        }
    }

    /// The mode this one maps to when Alice's and Bob's stations are swapped.
    pub const fn mirrored(self) -> Mode {
        match self {
            Mode::A1 => Mode::B2,
            Mode::A2 => Mode::B1,
            Mode::B1 => Mode::A2,
            Mode::B2 => Mode::A1,
        }
    }

    pub const fn label(self) -> &'static str {
        match self {
            Mode::A1 => "a1",
            Mode::A2 => "a2",
            Mode::B1 => "b1",
            Mode::B2 => "b2",
        }
    }
}

/// Photon numbers in `(a1, a2, b1, b2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Occupation([u32; 4]);

impl Occupation {
    pub const VACUUM: Occupation = Occupation([0; 4]);

    pub const fn new(a1: u32, a2: u32, b1: u32, b2: u32) -> Self {
        Occupation([a1, a2, b1, b2])
    }

    pub const fn from_counts(counts: [u32; 4]) -> Self {
        Occupation(counts)
    }

    pub const fn counts(&self) -> [u32; 4] {
        self.0
    }

    pub const fn get(&self, mode: Mode) -> u32 {
        self.0[mode.index()]
    }

    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn max_count(&self) -> u32 {
        self.0.iter().copied().max().unwrap_or(0)
    }

    /// Occupation after swapping the stations: `a1 <-> b2`, `a2 <-> b1`.
    pub fn mirrored(&self) -> Self {
        let [a1, a2, b1, b2] = self.0;
        Occupation([b2, b1, a2, a1])
    }

    fn with_delta(&self, i: Mode, j: Mode, up: bool) -> Option<Self> {
        let mut counts = self.0;
        for m in [i, j] {
            let n = &mut counts[m.index()];
            if up {
                *n += 1;
            } else {
                *n = n.checked_sub(1)?;
            }
        }
        Some(Occupation(counts))
    }
}

impl fmt::Display for Occupation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.iter().all(|&n| n < 10) {
            for n in self.0 {
                write!(f, "{n}")?;
            }
            Ok(())
        } else {
            let [a, b, c, d] = self.0;
            write!(f, "({a},{b},{c},{d})")
        }
    }
}

impl FromStr for Occupation {
    type Err = Error;

    /// Parses the compact four-digit form, e.g. `"1021"`.
    fn from_str(s: &str) -> Result<Self> {
        let digits: Vec<u32> = s.chars().filter_map(|c| c.to_digit(10)).collect();
        if digits.len() != 4 || s.chars().count() != 4 {
            return Err(Error::Parse(format!("occupation `{s}` is not four digits")));
        }
        Ok(Occupation([digits[0], digits[1], digits[2], digits[3]]))
    }
}

/// Complex polynomial in `g`, truncated at `max_order`.
///
/// `coeffs[k]` multiplies `g^k`; every product discards powers above the
/// storage order. Both operands of a binary operation must share it.
#[derive(Debug, Clone, PartialEq)]
pub struct GPoly {
    coeffs: Vec<Complex64>,
}

impl GPoly {
    pub fn zero(max_order: usize) -> Self {
        GPoly {
            coeffs: vec![ZERO; max_order + 1],
        }
    }

    pub fn one(max_order: usize) -> Self {
        Self::constant(max_order, ONE)
    }

    pub fn constant(max_order: usize, c: Complex64) -> Self {
        Self::monomial(max_order, 0, c)
    }

    /// `c * g^power`, or zero when `power` exceeds the storage order.
    pub fn monomial(max_order: usize, power: usize, c: Complex64) -> Self {
        let mut p = Self::zero(max_order);
        if power <= max_order {
            p.coeffs[power] = c;
        }
        p.prune();
        p
    }

    /// Builds from leading coefficients; missing ones are zero, extra ones
    /// beyond `max_order` are discarded.
    pub fn from_coeffs<I>(max_order: usize, coeffs: I) -> Self
    where
        I: IntoIterator<Item = Complex64>,
    {
        let mut p = Self::zero(max_order);
        for (slot, c) in p.coeffs.iter_mut().zip(coeffs) {
            *slot = c;
        }
        p.prune();
        p
    }

    pub fn from_real(max_order: usize, coeffs: &[f64]) -> Self {
        Self::from_coeffs(max_order, coeffs.iter().map(|&x| Complex64::new(x, 0.0)))
    }

    pub fn max_order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, power: usize) -> Complex64 {
        self.coeffs.get(power).copied().unwrap_or(ZERO)
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == ZERO)
    }

    /// Lowest power with a non-zero coefficient.
    pub fn leading_power(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| *c != ZERO)
    }

    pub fn eval(&self, g: f64) -> Complex64 {
        self.coeffs.iter().rev().fold(ZERO, |acc, c| acc * g + c)
    }

    /// Multiplies by `g^k`.
    pub fn shift(&self, k: usize) -> Self {
        let n = self.coeffs.len();
        let mut p = Self::zero(self.max_order());
        for i in 0..n.saturating_sub(k) {
            p.coeffs[i + k] = self.coeffs[i];
        }
        p
    }

    pub fn conj(&self) -> Self {
        GPoly {
            coeffs: self.coeffs.iter().map(|c| c.conj()).collect(),
        }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut p = GPoly {
            coeffs: self.coeffs.iter().map(|x| x * c).collect(),
        };
        p.prune();
        p
    }

    /// `|p|^2` as a series, truncated at the storage order.
    pub fn abs_squared(&self) -> Self {
        &self.conj() * self
    }

    /// Drops every power above `n`, keeping the storage order.
    pub fn truncated(&self, n: usize) -> Self {
        let mut p = self.clone();
        for c in p.coeffs.iter_mut().skip(n + 1) {
            *c = ZERO;
        }
        p
    }

    /// Same coefficients stored at a different order (extra powers dropped).
    pub fn with_max_order(&self, max_order: usize) -> Self {
        Self::from_coeffs(max_order, self.coeffs.iter().copied())
    }

    /// Real coefficients, failing when any imaginary part exceeds
    /// [`IMAG_TOLERANCE`].
    pub fn real_coeffs(&self) -> Result<Vec<f64>> {
        let worst = self.coeffs.iter().map(|c| c.im.abs()).fold(0.0, f64::max);
        if worst > IMAG_TOLERANCE {
            return Err(Error::ImaginaryResidue(worst));
        }
        Ok(self.coeffs.iter().map(|c| c.re).collect())
    }

    /// Largest coefficient-wise distance to `other`.
    pub fn max_abs_diff(&self, other: &GPoly) -> f64 {
        let n = self.coeffs.len().max(other.coeffs.len());
        (0..n)
            .map(|k| (self.coeff(k) - other.coeff(k)).norm())
            .fold(0.0, f64::max)
    }

    fn prune(&mut self) {
        for c in &mut self.coeffs {
            if c.norm() < PRUNE_EPS {
                *c = ZERO;
            }
        }
    }

    fn check_order(&self, other: &GPoly) {
        assert_eq!(
            self.coeffs.len(),
            other.coeffs.len(),
            "GPoly operands must share a truncation order"
        );
    }
}

impl Add for &GPoly {
    type Output = GPoly;

    fn add(self, rhs: &GPoly) -> GPoly {
        let mut p = self.clone();
        p += rhs;
        p
    }
}

impl Add for GPoly {
    type Output = GPoly;

    fn add(self, rhs: GPoly) -> GPoly {
        &self + &rhs
    }
}

impl AddAssign<&GPoly> for GPoly {
    fn add_assign(&mut self, rhs: &GPoly) {
        self.check_order(rhs);
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a += b;
        }
        self.prune();
    }
}

impl Sub for &GPoly {
    type Output = GPoly;

    fn sub(self, rhs: &GPoly) -> GPoly {
        self + &(-rhs)
    }
}

impl Neg for &GPoly {
    type Output = GPoly;

    fn neg(self) -> GPoly {
        GPoly {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

impl Mul for &GPoly {
    type Output = GPoly;

    fn mul(self, rhs: &GPoly) -> GPoly {
        self.check_order(rhs);
        let n = self.coeffs.len();
        let mut p = GPoly::zero(n - 1);
        for (i, a) in self.coeffs.iter().enumerate() {
            if *a == ZERO {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().take(n - i).enumerate() {
                p.coeffs[i + j] += a * b;
            }
        }
        p.prune();
        p
    }
}

impl Mul for GPoly {
    type Output = GPoly;

    fn mul(self, rhs: GPoly) -> GPoly {
        &self * &rhs
    }
}

impl Mul<Complex64> for &GPoly {
    type Output = GPoly;

    fn mul(self, rhs: Complex64) -> GPoly {
        self.scale(rhs)
    }
}

/// A numeric ket: occupation to amplitude, canonical sparse form.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Ket {
    terms: BTreeMap<Occupation, Complex64>,
}

impl Ket {
    pub fn from_terms<I>(terms: I) -> Self
    where
        I: IntoIterator<Item = (Occupation, Complex64)>,
    {
        let mut ket = Ket::default();
        for (occ, amp) in terms {
            *ket.terms.entry(occ).or_insert(ZERO) += amp;
        }
        ket.terms.retain(|_, a| a.norm() >= PRUNE_EPS);
        ket
    }

    pub fn amplitude(&self, occ: &Occupation) -> Complex64 {
        self.terms.get(occ).copied().unwrap_or(ZERO)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Occupation, &Complex64)> {
        self.terms.iter()
    }

    pub fn norm_squared(&self) -> f64 {
        self.terms.values().map(|a| a.norm_sqr()).sum()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Ket) -> Complex64 {
        self.terms
            .iter()
            .filter_map(|(occ, a)| other.terms.get(occ).map(|b| a.conj() * b))
            .sum()
    }

    pub fn normalized(&self) -> Ket {
        let n = self.norm_squared().sqrt();
        Ket {
            terms: self.terms.iter().map(|(o, a)| (*o, a / n)).collect(),
        }
    }
}

/// Perturbative state: occupation to truncated power series in `g`.
#[derive(Debug, Clone, PartialEq)]
pub struct KetSeries {
    terms: BTreeMap<Occupation, GPoly>,
    max_order: usize,
}

impl KetSeries {
    pub fn zero(max_order: usize) -> Self {
        KetSeries {
            terms: BTreeMap::new(),
            max_order,
        }
    }

    /// `|0000>` with amplitude exactly 1.
    pub fn vacuum(max_order: usize) -> Self {
        let mut s = Self::zero(max_order);
        s.terms.insert(Occupation::VACUUM, GPoly::one(max_order));
        s
    }

    pub fn from_terms<I>(max_order: usize, terms: I) -> Self
    where
        I: IntoIterator<Item = (Occupation, GPoly)>,
    {
        let mut s = Self::zero(max_order);
        for (occ, poly) in terms {
            s.add_term(occ, &poly);
        }
        s
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Occupation, &GPoly)> {
        self.terms.iter()
    }

    pub fn support(&self) -> impl Iterator<Item = &Occupation> {
        self.terms.keys()
    }

    pub fn amplitude(&self, occ: &Occupation) -> GPoly {
        self.terms
            .get(occ)
            .cloned()
            .unwrap_or_else(|| GPoly::zero(self.max_order))
    }

    /// Adds `poly` to the amplitude of `occ`, removing the entry if it
    /// cancels.
    pub fn add_term(&mut self, occ: Occupation, poly: &GPoly) {
        assert_eq!(
            poly.max_order(),
            self.max_order,
            "amplitude order must match the series"
        );
        let entry = self
            .terms
            .entry(occ)
            .or_insert_with(|| GPoly::zero(self.max_order));
        *entry += poly;
        if entry.is_zero() {
            self.terms.remove(&occ);
        }
    }

    /// Applies `x^dag y^dag + x y` for the modes `i`, `j` (no coupling factor).
    pub fn apply_pair_generator(&self, i: Mode, j: Mode) -> Result<KetSeries> {
        if i == j {
            return Err(Error::IdenticalModes(i));
        }
        let mut out = Self::zero(self.max_order);
        for (occ, amp) in &self.terms {
            let (ni, nj) = (f64::from(occ.get(i)), f64::from(occ.get(j)));
            if let Some(up) = occ.with_delta(i, j, true) {
                let f = ((ni + 1.0) * (nj + 1.0)).sqrt();
                out.add_term(up, &amp.scale(Complex64::new(f, 0.0)));
            }
            if let Some(down) = occ.with_delta(i, j, false) {
                let f = (ni * nj).sqrt();
                out.add_term(down, &amp.scale(Complex64::new(f, 0.0)));
            }
        }
        Ok(out)
    }

    /// Single-mode creation operator.
    pub fn create(&self, mode: Mode) -> KetSeries {
        let mut out = Self::zero(self.max_order);
        for (occ, amp) in &self.terms {
            let mut counts = occ.counts();
            let n = counts[mode.index()];
            counts[mode.index()] = n + 1;
            let f = f64::from(n + 1).sqrt();
            out.add_term(Occupation(counts), &amp.scale(Complex64::new(f, 0.0)));
        }
        out
    }

    /// Single-mode annihilation operator.
    pub fn annihilate(&self, mode: Mode) -> KetSeries {
        let mut out = Self::zero(self.max_order);
        for (occ, amp) in &self.terms {
            let mut counts = occ.counts();
            let n = counts[mode.index()];
            if n == 0 {
                continue;
            }
            counts[mode.index()] = n - 1;
            let f = f64::from(n).sqrt();
            out.add_term(Occupation(counts), &amp.scale(Complex64::new(f, 0.0)));
        }
        out
    }

    /// Multiplies each term by `exp(i n_mode theta)`.
    pub fn apply_phase(&self, mode: Mode, theta: f64) -> KetSeries {
        debug_assert!(theta.is_finite(), "phase must be finite");
        let terms = self
            .terms
            .iter()
            .map(|(occ, amp)| {
                let n = f64::from(occ.get(mode));
                (*occ, amp.scale(Complex64::cis(n * theta)))
            })
            .filter(|(_, amp)| !amp.is_zero())
            .collect();
        KetSeries {
            terms,
            max_order: self.max_order,
        }
    }

    /// Multiplies every amplitude by `c g^k`.
    pub fn scaled_shift(&self, c: Complex64, k: usize) -> KetSeries {
        let terms = self
            .terms
            .iter()
            .map(|(occ, amp)| (*occ, amp.shift(k).scale(c)))
            .filter(|(_, amp)| !amp.is_zero())
            .collect();
        KetSeries {
            terms,
            max_order: self.max_order,
        }
    }

    /// Drops every power of `g` above `n` in every amplitude.
    pub fn truncated(&self, n: usize) -> KetSeries {
        let terms = self
            .terms
            .iter()
            .map(|(occ, amp)| (*occ, amp.truncated(n)))
            .filter(|(_, amp)| !amp.is_zero())
            .collect();
        KetSeries {
            terms,
            max_order: self.max_order,
        }
    }

    /// Stations swapped: occupations mirrored with [`Occupation::mirrored`].
    pub fn mirrored(&self) -> KetSeries {
        KetSeries {
            terms: self
                .terms
                .iter()
                .map(|(occ, amp)| (occ.mirrored(), amp.clone()))
                .collect(),
            max_order: self.max_order,
        }
    }

    /// `<self|other>` as a truncated series.
    pub fn inner(&self, other: &KetSeries) -> GPoly {
        let mut acc = GPoly::zero(self.max_order);
        for (occ, a) in &self.terms {
            if let Some(b) = other.terms.get(occ) {
                acc += &(&a.conj() * b);
            }
        }
        acc
    }

    /// `sum |amplitude|^2` truncated at the storage order. Coefficients are
    /// real; the imaginary residue is checked and discarded.
    pub fn norm_squared(&self) -> Result<GPoly> {
        let mut acc = GPoly::zero(self.max_order);
        for amp in self.terms.values() {
            acc += &amp.abs_squared();
        }
        let re = acc.real_coeffs()?;
        Ok(GPoly::from_real(self.max_order, &re))
    }

    pub fn evaluate(&self, g: f64) -> Ket {
        Ket::from_terms(self.terms.iter().map(|(occ, amp)| (*occ, amp.eval(g))))
    }

    /// Largest coefficient distance over the union of both supports.
    pub fn max_abs_diff(&self, other: &KetSeries) -> f64 {
        let zero = GPoly::zero(self.max_order.max(other.max_order));
        self.terms
            .keys()
            .chain(other.terms.keys())
            .map(|occ| {
                let a = self.terms.get(occ).unwrap_or(&zero);
                let b = other.terms.get(occ).unwrap_or(&zero);
                a.max_abs_diff(b)
            })
            .fold(0.0, f64::max)
    }
}

impl Add for &KetSeries {
    type Output = KetSeries;

    fn add(self, rhs: &KetSeries) -> KetSeries {
        let mut out = self.clone();
        for (occ, amp) in &rhs.terms {
            out.add_term(*occ, amp);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::SQRT_2;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn ket_of(order: usize, terms: &[(Occupation, f64)]) -> KetSeries {
        KetSeries::from_terms(
            order,
            terms
                .iter()
                .map(|(o, a)| (*o, GPoly::constant(order, c(*a, 0.0)))),
        )
    }

    #[test]
    fn vacuum_is_single_unit_term() {
        let v = KetSeries::vacuum(4);
        assert_eq!(v.len(), 1);
        let ket = v.evaluate(0.3);
        assert_eq!(ket.amplitude(&Occupation::VACUUM), ONE);
        assert_eq!(ket.len(), 1);
        assert_eq!(v.norm_squared().unwrap(), GPoly::one(4));
    }

    #[test]
    fn pair_generator_on_vacuum() {
        let out = KetSeries::vacuum(0)
            .apply_pair_generator(Mode::A1, Mode::B1)
            .unwrap();
        assert_eq!(out, ket_of(0, &[(Occupation::new(1, 0, 1, 0), 1.0)]));
    }

    #[test]
    fn pair_generator_raises_and_lowers() {
        let s = ket_of(0, &[(Occupation::new(1, 0, 1, 0), 1.0)]);
        let out = s.apply_pair_generator(Mode::A1, Mode::B1).unwrap();
        let expected = ket_of(
            0,
            &[
                (Occupation::new(2, 0, 2, 0), 2.0),
                (Occupation::VACUUM, 1.0),
            ],
        );
        assert!(out.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn pair_generator_annihilation_on_empty_mode_vanishes() {
        let s = ket_of(0, &[(Occupation::new(1, 1, 0, 0), 1.0)]);
        let out = s.apply_pair_generator(Mode::A1, Mode::B1).unwrap();
        assert_eq!(out.len(), 1);
        let amp = out.amplitude(&Occupation::new(2, 1, 1, 0)).coeff(0);
        assert!((amp - c(SQRT_2, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn pair_generator_rejects_identical_modes() {
        assert_eq!(
            KetSeries::vacuum(2).apply_pair_generator(Mode::B2, Mode::B2),
            Err(Error::IdenticalModes(Mode::B2))
        );
    }

    #[test]
    fn zero_phase_is_identity() {
        let s = ket_of(
            2,
            &[
                (Occupation::new(1, 0, 1, 0), 0.5),
                (Occupation::VACUUM, 0.25),
            ],
        );
        assert_eq!(s.apply_phase(Mode::A1, 0.0), s);
    }

    #[test]
    fn phase_multiplies_by_photon_number() {
        let alpha = 0.73;
        let one = ket_of(0, &[(Occupation::new(1, 0, 1, 0), 1.0)]).apply_phase(Mode::A1, alpha);
        let two = ket_of(0, &[(Occupation::new(2, 0, 2, 0), 1.0)]).apply_phase(Mode::A1, alpha);
        let a1 = one.amplitude(&Occupation::new(1, 0, 1, 0)).coeff(0);
        let a2 = two.amplitude(&Occupation::new(2, 0, 2, 0)).coeff(0);
        assert!((a1 - Complex64::cis(alpha)).norm() < 1e-15);
        assert!((a2 - Complex64::cis(2.0 * alpha)).norm() < 1e-15);
    }

    #[test]
    fn ladder_round_trip_counts_photons() {
        for n in 0..=5 {
            for mode in Mode::ALL {
                let mut counts = [1, 0, 2, 1];
                counts[mode.index()] = n;
                let occ = Occupation::from_counts(counts);
                let s = ket_of(0, &[(occ, 1.0)]);
                let out = s.create(mode).annihilate(mode);
                let amp = out.amplitude(&occ).coeff(0);
                assert!((amp.re - f64::from(n + 1)).abs() < 1e-12, "n={n}");
                assert_eq!(out.len(), 1);
            }
        }
    }

    #[test]
    fn norm_squared_rejects_complex_residue() {
        // A hand-built non-Hermitian "norm" cannot arise from a KetSeries,
        // so check the guard through GPoly directly.
        let p = GPoly::constant(2, c(1.0, 1e-9));
        assert!(matches!(p.real_coeffs(), Err(Error::ImaginaryResidue(_))));
        let q = GPoly::constant(2, c(1.0, 1e-14));
        assert_eq!(q.real_coeffs().unwrap(), vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn occupation_parse_and_mirror() {
        let o: Occupation = "1021".parse().unwrap();
        assert_eq!(o, Occupation::new(1, 0, 2, 1));
        assert_eq!(o.mirrored(), Occupation::new(1, 2, 0, 1));
        assert_eq!(alloc::string::ToString::to_string(&o), "1021");
        assert!("10a1".parse::<Occupation>().is_err());
        assert!("101".parse::<Occupation>().is_err());
    }

    #[test]
    fn product_truncates_above_storage_order() {
        let g = GPoly::monomial(3, 1, ONE);
        let g3 = &(&g * &g) * &g;
        assert_eq!(g3, GPoly::monomial(3, 3, ONE));
        assert!((&g3 * &g).is_zero());
        assert!(GPoly::monomial(3, 4, ONE).is_zero());
    }

    fn arb_poly(order: usize) -> impl Strategy<Value = GPoly> {
        proptest::collection::vec((-2.0f64..2.0, -2.0f64..2.0), order + 1)
            .prop_map(move |v| GPoly::from_coeffs(order, v.into_iter().map(|(re, im)| c(re, im))))
    }

    fn arb_ket() -> impl Strategy<Value = KetSeries> {
        proptest::collection::vec(
            (
                (0u32..4, 0u32..4, 0u32..4, 0u32..4),
                -1.0f64..1.0,
                -1.0f64..1.0,
            ),
            1..8,
        )
        .prop_map(|v| {
            KetSeries::from_terms(
                0,
                v.into_iter().map(|((a, b, cc, d), re, im)| {
                    (Occupation::new(a, b, cc, d), GPoly::constant(0, c(re, im)))
                }),
            )
        })
    }

    proptest! {
        #[test]
        fn gpoly_ring_laws(a in arb_poly(4), b in arb_poly(4), d in arb_poly(4)) {
            let assoc = (&(&a * &b) * &d).max_abs_diff(&(&a * &(&b * &d)));
            let distr = (&a * &(&b + &d)).max_abs_diff(&(&(&a * &b) + &(&a * &d)));
            let comm = (&a * &b).max_abs_diff(&(&b * &a));
            prop_assert!(assoc < 1e-12);
            prop_assert!(distr < 1e-12);
            prop_assert!(comm < 1e-12);
        }

        #[test]
        fn phase_preserves_norm(k in arb_ket(), theta in -10.0f64..10.0, m in 0usize..4) {
            let before = k.norm_squared().unwrap().coeff(0).re;
            let after = k.apply_phase(Mode::ALL[m], theta).norm_squared().unwrap().coeff(0).re;
            prop_assert!((before - after).abs() < 1e-12);
        }

        #[test]
        fn pair_generator_is_hermitian(u in arb_ket(), v in arb_ket(), i in 0usize..4, j in 0usize..4) {
            prop_assume!(i != j);
            let (mi, mj) = (Mode::ALL[i], Mode::ALL[j]);
            let hv = v.apply_pair_generator(mi, mj).unwrap();
            let hu = u.apply_pair_generator(mi, mj).unwrap();
            let lhs = u.inner(&hv).coeff(0);
            let rhs = hu.inner(&v).coeff(0);
            prop_assert!((lhs - rhs).norm() < 1e-12);
        }
    }
}
