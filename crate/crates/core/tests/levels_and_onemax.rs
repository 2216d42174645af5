use std::f64::consts::PI;

use geotail::exact_oracle::{exact_lower_tail, exact_upper_tail};
use geotail::fitness_levels::*;
use geotail::onemax_analysis::*;
use geotail::simulator::{replicate, Init, ProcessConfig, DEFAULT_ITERATION_CAP};
use geotail::tail_bounds::{upper_tail_bound, zllh_comparison_bound};
use proptest::prelude::*;

fn partition() -> impl Strategy<Value = LevelPartition> {
    (prop::collection::vec(0.01f64..=1.0, 1..=30), 0usize..10)
        .prop_map(|(p, k)| LevelPartition::new(p, k, true).unwrap())
}

proptest! {
    #[test]
    fn inversion_round_trip(part in partition(), target in 1e-6f64..0.999_999) {
        let d = delta_for_confidence(&part, target, Direction::Upper).unwrap();
        prop_assert!(upper_time_bound(&part, d).unwrap().confidence >= target - 1e-9);
        let d = delta_for_confidence(&part, target, Direction::Lower).unwrap();
        prop_assert!(lower_time_bound(&part, d).unwrap().confidence >= target - 1e-9);
    }

    #[test]
    fn monotone_in_delta(part in partition(), d1 in 0.01f64..200.0, step in 0.01f64..50.0) {
        let d2 = d1 + step;
        let (a, b) = (upper_time_bound(&part, d1).unwrap(), upper_time_bound(&part, d2).unwrap());
        prop_assert!(b.time_bound > a.time_bound);
        prop_assert!(b.confidence >= a.confidence);
        let (a, b) = (lower_time_bound(&part, d1).unwrap(), lower_time_bound(&part, d2).unwrap());
        prop_assert!(b.confidence >= a.confidence);
        prop_assert!(b.time_bound <= a.time_bound);
    }
}

#[test]
fn no_skip_chain_respects_confidence() {
    let parts = [
        vec![0.5, 0.5],
        vec![0.2; 5],
        vec![1.0, 0.6, 0.3, 0.9],
        vec![0.4; 8],
    ];
    for probs in parts {
        let part = LevelPartition::new(probs, 0, true).unwrap();
        let spec = part.spec();
        for delta in [0.5, 1.0, 3.0, 6.0, 12.0] {
            let up = upper_time_bound(&part, delta).unwrap();
            let exceed = exact_upper_tail(&spec, up.time_bound).unwrap();
            assert!(exceed <= 1.0 - up.confidence + 1e-12);

            let lo = lower_time_bound(&part, delta).unwrap();
            let below = if lo.time_bound <= spec.len() as f64 {
                0.0
            } else {
                exact_lower_tail(&spec, lo.time_bound).unwrap()
            };
            assert!(below <= 1.0 - lo.confidence + 1e-12);
        }
    }
}

#[test]
fn onemax_upper_time_bound_example() {
    let part = onemax_partition(100, 50).unwrap();
    let b = upper_time_bound(&part, 100.0).unwrap();
    // 100 * H_50 and sum (100/i)^2 for i <= 50, from a 40-digit reference.
    assert!((b.time_bound - (449.920_533_832_942_5 + 100.0)).abs() < 1e-9);
    assert!((part.spec().s_exact() - 16_251.327_336_215_293).abs() < 1e-8);
    assert!((b.confidence - 0.142_585_307_088_357).abs() < 1e-12);
}

#[test]
fn zllh_onemax_example() {
    let expected = 100.0 * harmonic(50).unwrap();
    let bound = zllh_comparison_bound(expected, 100.0, 2.0 * expected + 200.0).unwrap();
    assert!((bound - (-1.0f64).exp()).abs() < 1e-12);
}

#[test]
fn relaxation_is_valid() {
    for n in (1..=10_000u64).step_by(37).chain([10_000]) {
        let exact = onemax_partition(n, 0).unwrap().spec().s_exact();
        let a = OneMaxAnalysis::new(n).unwrap();
        assert!(exact <= a.s_paper, "n={n}");
        assert_eq!(a.h, onemax_partition(n, 0).unwrap().spec().h());
    }
}

#[test]
fn upper_specialization_continuity() {
    let boundary = PI * PI / 6.0;
    let quad = (-3.0 * boundary * boundary / (2.0 * PI * PI)).exp();
    let lin = (-boundary / 4.0).exp();
    assert!((quad - lin).abs() <= 1e-12 * quad);
    for n in [10u64, 100, 1000] {
        let spec = onemax_partition(n, 0).unwrap().spec();
        let a = OneMaxAnalysis::new(n).unwrap();
        let generic = upper_tail_bound(&spec, boundary * n as f64, Some(a.s_paper), Some(a.h))
            .unwrap()
            .bound;
        assert!((generic - quad).abs() <= 1e-12 * quad);
    }
}

/// Slack factor `c` in `c * n^(2/3) * ln n`. At `n = 1000` the exact
/// expectation sits about 1.5 above the band's upper edge; `c = 0.01` gives
/// roughly 6.9 of slack there.
const SANDWICH_C: f64 = 0.01;

#[test]
fn expectation_sandwich() {
    for n in [1_000u64, 10_000, 100_000] {
        let exact = exact_expected_runtime(n).unwrap();
        let band = expected_runtime_band(n).unwrap();
        let nf = n as f64;
        let slack = SANDWICH_C * nf.powf(2.0 / 3.0) * nf.ln();
        assert!(
            exact >= band.lower - slack && exact <= band.upper + slack,
            "n={n} exact={exact}"
        );
    }
}

#[test]
fn exact_expectation_n10_matches_simulation() {
    let process = ProcessConfig::RlsOnemax {
        n: 10,
        init: Init::Uniform,
    };
    let dist = replicate(&process, 1_000_000, 2024, 8, DEFAULT_ITERATION_CAP).unwrap();
    let exact = exact_expected_runtime(10).unwrap();
    let se = dist.standard_error();
    assert!(
        (dist.mean() - exact).abs() <= 3.0 * se,
        "mean {} exact {exact} se {se}",
        dist.mean()
    );
}
