mod common;

use proptest::prelude::*;
use qsearch::dynamics::{block_success_probability, grover_probability_closed_form, j_max, success_probability};
use qsearch::statevector::{block_address_probability, run_sequence_full};
use qsearch::{SequenceSpec, TargetSpec};

/// `(n, m, tuple, target)` with at most 20 oracle calls.
fn case() -> impl Strategy<Value = (usize, usize, Vec<u32>, usize)> {
    (3usize..=10)
        .prop_flat_map(|n| (Just(n), 2..n, prop::collection::vec(0u32..=4, 1..=8), 0..1usize << n))
        .prop_filter("oracle budget", |(_, _, t, _)| {
            let calls: u32 = t.iter().sum();
            (1..=20).contains(&calls)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn reduced_model_matches_dense_simulation((n, m, tuple, target) in case()) {
        let seq = SequenceSpec::from_tuple(n, Some(m), &tuple).unwrap();
        let amps = common::simulate(n, m, &tuple, target);
        let p = success_probability(&seq).unwrap();
        prop_assert!((p - common::target_probability(&amps, target)).abs() <= 1e-10);
        let pb = block_success_probability(&seq, m).unwrap();
        prop_assert!((pb - common::block_probability(&amps, m, target)).abs() <= 1e-10);

        let t = TargetSpec::new(n, target).unwrap();
        let full = run_sequence_full(&seq, &t).unwrap();
        prop_assert!((full.probability(target) - p).abs() <= 1e-10);
        prop_assert!((block_address_probability(&full, m, &t).unwrap() - pb).abs() <= 1e-10);
    }

    #[test]
    fn every_target_sees_the_same_dynamics((n, m, tuple, a) in case(), b in any::<prop::sample::Index>()) {
        let b = b.index(1 << n);
        let seq = SequenceSpec::from_tuple(n, Some(m), &tuple).unwrap();
        let pa = run_sequence_full(&seq, &TargetSpec::new(n, a).unwrap()).unwrap().probability(a);
        let pb = run_sequence_full(&seq, &TargetSpec::new(n, b).unwrap()).unwrap().probability(b);
        prop_assert!((pa - pb).abs() <= 1e-12);
    }
}

#[test]
fn closed_form_matches_matrix_products() {
    for n in 2..=12 {
        let theta = (2f64.powf(-(n as f64) / 2.0)).asin();
        for j in 0..=j_max(n) {
            let reference = ((2 * j + 1) as f64 * theta).sin().powi(2);
            let p = if j == 0 {
                1.0 / (1u64 << n) as f64
            } else {
                success_probability(&SequenceSpec::grover(n, j as u32)).unwrap()
            };
            assert!((p - reference).abs() <= 1e-10, "n={n} j={j}: {p} vs {reference}");
            assert!((grover_probability_closed_form(n, j) - reference).abs() <= 1e-12);
        }
    }
}

#[test]
fn grover_peak_is_near_quarter_period() {
    for n in 4..=12 {
        let best = (0..=2 * j_max(n))
            .max_by(|&a, &b| grover_probability_closed_form(n, a).total_cmp(&grover_probability_closed_form(n, b)));
        let jm = j_max(n);
        assert!(best.unwrap().abs_diff(jm) <= 1, "n={n}");
    }
}
