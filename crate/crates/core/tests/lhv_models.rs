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

use std::f64::consts::{PI, TAU};

use pdc_bell_core::bell::{ch_from_counts, symmetry_audit, ChshSettings};
use pdc_bell_core::lhv::{
    fairpost_detected, mc_run, mc_shard, outcome_base, outcome_fairpost, outcome_symmetric,
    shard_count, shard_len, LhvParams, LhvSample, LocalOutcome, Model, Side, SHARD_SIZE,
};
use proptest::prelude::*;

fn overlap(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.1.min(b.1) - a.0.max(b.0)).max(0.0)
}

// Base-model coincidence probability by direct integration: for each hidden
// phase, the r_A-measure of Alice's plus set intersected with Bob's plus set
// (expressed through r_B = 1 - r_A). The integrand jumps where either lobe
// changes sign, so the midpoint rule runs separately between those points.
fn quadrature_joint(p: &LhvParams, alpha: f64, beta: f64, steps: usize) -> f64 {
    let density = |phi: f64| {
        let sa = (phi + PI - alpha).sin();
        let sb = (TAU - phi - beta).sin();
        if sa < 0.0 || sb < 0.0 {
            return 0.0;
        }
        let alice = [(0.0, p.c * sa), (1.0 - p.d, 1.0)];
        let bob = [(1.0 - p.c * sb, 1.0), (0.0, p.d)];
        alice
            .iter()
            .flat_map(|a| bob.iter().map(move |b| overlap(*a, *b)))
            .sum::<f64>()
    };
    // Zeros of sin(phi + pi - alpha) and sin(-phi - beta) on [0, 2pi).
    let mut cuts = vec![0.0, TAU];
    for z in [alpha - PI, alpha, -beta, PI - beta] {
        cuts.push(z.rem_euclid(TAU));
    }
    cuts.sort_by(f64::total_cmp);
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if hi <= lo {
            continue;
        }
        let h = (hi - lo) / steps as f64;
        total += (0..steps)
            .map(|k| density(lo + (k as f64 + 0.5) * h))
            .sum::<f64>()
            * h;
    }
    total / TAU
}

fn quadrature_single(p: &LhvParams, setting: f64, steps: usize) -> f64 {
    let h = TAU / steps as f64;
    (0..steps)
        .map(|k| {
            let s = ((k as f64 + 0.5) * h + PI - setting).sin();
            if s >= 0.0 {
                p.c * s + p.d
            } else {
                0.0
            }
        })
        .sum::<f64>()
        * h
        / TAU
}

fn within_sigma(freq: f64, p: f64, n: u64, k: f64) -> bool {
    let sigma = (p * (1.0 - p) / n as f64).sqrt();
    (freq - p).abs() <= k * sigma.max(1.0 / n as f64)
}

fn phase_grid(beta: f64) -> Vec<(f64, f64)> {
    (0..12).map(|k| (TAU * k as f64 / 12.0, beta)).collect()
}

#[test]
fn quadrature_confirms_single_and_joint_formulas() {
    for (c, d) in [(0.1, 0.2), (0.05, 0.5), (0.3, 0.3), (5.3366e-4, 0.0176)] {
        let p = LhvParams::new(c, d).unwrap();
        for setting in [0.0, 1.3, -2.0] {
            let q = quadrature_single(&p, setting, 200_000);
            assert!((q - p.analytic_single()).abs() < 1e-9, "single c={c} d={d}");
        }
        for (alpha, beta) in [(0.0, 0.0), (0.7, -0.2), (PI, 0.0), (2.0, 2.5), (-1.0, 0.4)] {
            let q = quadrature_joint(&p, alpha, beta, 50_000);
            let a = p.analytic_joint(alpha, beta).unwrap();
            assert!(
                (q - a).abs() < 1e-10,
                "joint c={c} d={d} ({alpha},{beta}): {q} vs {a}"
            );
        }
    }
}

#[test]
fn joint_formula_breaks_when_the_flat_bands_overlap() {
    let p = LhvParams::new(0.1, 0.7).unwrap();
    assert!(p.analytic_joint(0.0, 0.0).is_err());
    let q = quadrature_joint(&p, 0.3, 0.1, 10_000);
    let naive = p.c / PI * (1.0 + 0.4f64.cos());
    assert!(q > naive + 0.1);
}

#[test]
fn base_model_monte_carlo_matches_analytic() {
    let p = LhvParams::new(0.1, 0.2).unwrap();
    let settings = phase_grid(0.3);
    let n = 200_000;
    let t = mc_run(Model::Base, &settings, &p, n, 11).unwrap();
    t.validate().unwrap();
    let nf = n as f64;
    for &(a, b) in &settings {
        let single = p.analytic_single();
        assert!(within_sigma(
            t.alice_count(1, a, b).unwrap() as f64 / nf,
            single,
            n,
            4.0
        ));
        assert!(within_sigma(
            t.bob_count(1, a, b).unwrap() as f64 / nf,
            single,
            n,
            4.0
        ));
        let joint = p.analytic_joint(a, b).unwrap();
        assert!(
            within_sigma(t.count(1, 1, a, b).unwrap() as f64 / nf, joint, n, 4.0),
            "({a},{b})"
        );
        assert_eq!(t.alice_count(-1, a, b).unwrap(), 0);
        assert_eq!(t.bob_count(-1, a, b).unwrap(), 0);
    }
}

#[test]
fn symmetric_model_monte_carlo_matches_analytic() {
    let p = LhvParams::new(0.1, 0.2).unwrap();
    let settings = phase_grid(-0.4);
    let n = 200_000;
    let t = mc_run(Model::Symmetric, &settings, &p, n, 12).unwrap();
    let nf = n as f64;
    for &(a, b) in &settings {
        let single = p.analytic_single();
        assert!(within_sigma(
            t.alice_count(-1, a, b).unwrap() as f64 / nf,
            single,
            n,
            4.0
        ));
        let plus_minus = p.analytic_joint(a, b + PI).unwrap();
        assert!(within_sigma(
            t.count(1, -1, a, b).unwrap() as f64 / nf,
            plus_minus,
            n,
            4.0
        ));
    }
}

#[test]
fn fairpost_model_monte_carlo_matches_analytic() {
    let p = LhvParams::new(0.1, 0.2).unwrap();
    let settings = phase_grid(1.0);
    let n = 200_000;
    let t = mc_run(Model::Fairpost, &settings, &p, n, 13).unwrap();
    let nf = n as f64;
    for &(a, b) in &settings {
        let minus = p.c + p.d - p.analytic_single();
        assert!(within_sigma(
            t.alice_count(-1, a, b).unwrap() as f64 / nf,
            minus,
            n,
            4.0
        ));
        let coinc = t.coincidences_detected(a, b).unwrap() as f64 / nf;
        assert!(within_sigma(
            coinc,
            p.fairpost_coincidence_fraction(),
            n,
            4.0
        ));
    }
}

#[test]
fn symmetric_coincidence_fraction_at_half() {
    let p = LhvParams::new(0.5, 0.5).unwrap();
    let n = 400_000;
    let t = mc_run(Model::Symmetric, &[(0.4, 1.1)], &p, n, 5).unwrap();
    let frac = t.coincidences_detected(0.4, 1.1).unwrap() as f64 / n as f64;
    assert!(within_sigma(frac, 2.0 / PI, n, 4.0), "{frac}");
}

#[test]
fn fairpost_coincidence_fraction_at_half() {
    let p = LhvParams::new(0.5, 0.5).unwrap();
    let n = 100_000;
    let t = mc_run(Model::Fairpost, &[(0.4, 1.1)], &p, n, 6).unwrap();
    assert_eq!(t.coincidences_detected(0.4, 1.1).unwrap(), n);
    assert_eq!(p.fairpost_coincidence_fraction(), 1.0);
}

#[test]
fn alice_counts_ignore_bobs_setting() {
    let p = LhvParams::new(0.2, 0.3).unwrap();
    let settings = [(0.5, 0.0), (0.5, 1.0), (0.5, 2.5)];
    for model in Model::ALL {
        let t = mc_run(model, &settings, &p, 20_000, 3).unwrap();
        for r in [1, -1, 0] {
            let first = t.alice_count(r, 0.5, 0.0).unwrap();
            for &(a, b) in &settings[1..] {
                assert_eq!(t.alice_count(r, a, b).unwrap(), first, "{model}");
            }
        }
    }
}

#[test]
fn symmetry_identities_hold_only_for_the_symmetric_model() {
    let p = LhvParams::new(0.2, 0.3).unwrap();
    let (a, b) = (0.3, -0.9);
    let settings = pdc_bell_core::bell::shifted_settings(a, b).to_vec();
    let sym = mc_run(Model::Symmetric, &settings, &p, 100_000, 21).unwrap();
    assert_eq!(symmetry_audit(&sym, a, b, 0.0).unwrap().relative, [0.0; 3]);
    let fair = mc_run(Model::Fairpost, &settings, &p, 100_000, 21).unwrap();
    let report = symmetry_audit(&fair, a, b, 0.05).unwrap();
    assert!(!report.passes());
    assert!(report.z_scores.iter().any(|z| *z > 10.0));
}

#[test]
fn monte_carlo_statistics_never_violate_ch() {
    let settings = ChshSettings::standard();
    let mut needed = settings.pairs().to_vec();
    needed.push((0.0, 0.0));
    for model in Model::ALL {
        for p in [
            LhvParams::from_g(0.2).unwrap(),
            LhvParams::new(0.3, 0.3).unwrap(),
        ] {
            let t = mc_run(model, &needed, &p, 100_000, 8).unwrap();
            let ch = ch_from_counts(&t, &settings).unwrap();
            assert!(
                ch.value <= 4.0 * ch.sigma,
                "{model}: {} +- {}",
                ch.value,
                ch.sigma
            );
        }
    }
}

#[test]
fn shards_sum_to_the_run() {
    let p = LhvParams::new(0.2, 0.3).unwrap();
    let settings = [(0.0, 0.0)];
    let n = SHARD_SIZE + 1000;
    let run = mc_run(Model::Base, &settings, &p, n, 40).unwrap();
    let mut manual = pdc_bell_core::bell::CountsTable::new(0);
    for k in 0..shard_count(n) {
        manual
            .merge(&mc_shard(Model::Base, &settings, &p, shard_len(n, k), 40 + k).unwrap())
            .unwrap();
    }
    assert_eq!(run, manual);
    assert_ne!(run, mc_run(Model::Base, &settings, &p, n, 41).unwrap());
}

proptest! {
    #[test]
    fn fairpost_detection_is_setting_independent(
        phi in 0.0..TAU, r in 0.0f64..1.0, c in 0.0f64..0.5, d in 0.0f64..0.5, alpha in -10.0f64..10.0,
    ) {
        let p = LhvParams::new(c, d).unwrap();
        let s = LhvSample::new(phi, r).unwrap();
        for side in [Side::A, Side::B] {
            let detected = outcome_fairpost(&s, side, alpha, &p).is_detected();
            prop_assert_eq!(detected, fairpost_detected(&s, side, &p));
        }
    }

    #[test]
    fn shifted_plus_is_minus(phi in 0.0..TAU, r in 0.0f64..1.0, c in 0.0f64..0.5, d in 0.0f64..0.5, alpha in -4.0f64..4.0) {
        let p = LhvParams::new(c, d).unwrap();
        let s = LhvSample::new(phi, r).unwrap();
        for side in [Side::A, Side::B] {
            let shifted = outcome_base(&s, side, alpha + PI, &p);
            let here = outcome_base(&s, side, alpha, &p);
            // The lobes at alpha and alpha + pi only touch where sin vanishes.
            if here == LocalOutcome::Plus && shifted == LocalOutcome::Plus {
                continue;
            }
            let sym = outcome_symmetric(&s, side, alpha, &p);
            prop_assert_eq!(shifted == LocalOutcome::Plus, sym == LocalOutcome::Minus);
            if shifted == LocalOutcome::Plus {
                prop_assert_eq!(outcome_fairpost(&s, side, alpha, &p), LocalOutcome::Minus);
            }
            prop_assert_ne!(here, LocalOutcome::Minus);
        }
    }

    #[test]
    fn derived_variables_are_complementary(phi in 0.0..TAU, r in 0.0f64..1.0) {
        let s = LhvSample::new(phi, r).unwrap();
        prop_assert!((s.phi_a() + s.phi_b() - TAU).abs() < 1e-15);
        prop_assert!((s.r_a() + s.r_b() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn single_formula_is_an_identity(g in 1e-3f64..0.358) {
        let p = LhvParams::from_g(g).unwrap();
        let want = g * g - 8.0 / 3.0 * g.powi(4);
        prop_assert!((p.analytic_single() - want).abs() <= 1e-15 * want.max(1e-300) + 1e-18);
    }
}

#[test]
fn fairpost_minus_does_not_imply_shifted_plus() {
    // Inside the strip c s <= r < c with the shifted lobe too low for plus.
    let p = LhvParams::new(0.4, 0.1).unwrap();
    let alpha = 0.0;
    let s = LhvSample::new(3.0 * PI / 2.0 - 0.3, 0.39).unwrap();
    assert_eq!(
        outcome_fairpost(&s, Side::A, alpha, &p),
        LocalOutcome::Minus
    );
    assert_eq!(
        outcome_base(&s, Side::A, alpha + PI, &p),
        LocalOutcome::None
    );
}
