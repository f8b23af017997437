mod common;

use std::sync::OnceLock;

use proptest::prelude::*;
use qsearch::optimizer::{
    exhaustive_one_stage, optimize_grover, optimize_one_stage, optimize_two_stage, EnumerationBounds,
};
use qsearch::DepthParams;

fn params(n: usize, alpha: f64) -> DepthParams {
    DepthParams::linear(n, alpha).unwrap()
}

fn rel_close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * b.abs().max(1.0)
}

#[test]
fn grover_sweep_matches_brute_force() {
    for n in 3..=10 {
        for alpha in [0.5, 1.0, 2.0, 10.0] {
            let r = optimize_grover(n, &params(n, alpha)).unwrap();
            let (j, p, d, med) = common::best_grover(n, alpha);
            assert_eq!(
                r.schedule.to_string(),
                format!("S_{}({j},0)", if n < 10 { n.to_string() } else { format!("{{{n}}}") })
            );
            assert!((r.probability - p).abs() < 1e-12);
            assert_eq!(r.single_run_depth, d);
            assert!(rel_close(r.expected_depth, med));
        }
    }
}

#[test]
fn branch_and_bound_agrees_with_enumeration() {
    for (n, alphas) in [(4, &[0.5, 1.0, 2.0, 3.0, 10.0][..]), (5, &[0.7, 1.0, 4.0][..])] {
        for &alpha in alphas {
            let p = params(n, alpha);
            let b = EnumerationBounds::new(n, alpha);
            let fast = optimize_one_stage(n, &p, &b).unwrap();
            let slow = exhaustive_one_stage(n, &p, &b).unwrap();
            assert!(
                rel_close(fast.expected_depth, slow.expected_depth),
                "n={n} alpha={alpha}: {} {} vs {} {}",
                fast.schedule,
                fast.expected_depth,
                slow.schedule,
                slow.expected_depth
            );
        }
    }
}

#[test]
fn reported_numbers_match_reference_simulation() {
    for n in 4..=8 {
        let r = optimize_one_stage(n, &params(n, 1.0), &EnumerationBounds::new(n, 1.0)).unwrap();
        let seq = r.sequence().unwrap();
        let m = seq.local_width().unwrap_or(n);
        let tuple = seq.tuple();
        let amps = common::simulate(n, m, &tuple, 0);
        let p = common::target_probability(&amps, 0);
        assert!((r.probability - p).abs() < 1e-10);
        assert_eq!(r.single_run_depth, common::depth(n, m, &tuple, 1.0));
        assert!(rel_close(r.expected_depth, r.single_run_depth / p));
    }
}

#[test]
fn two_stage_numbers_match_reference_simulation() {
    for n in 4..=8 {
        let r = optimize_two_stage(n, &params(n, 1.0), &EnumerationBounds::new(n, 1.0)).unwrap();
        let plan = r.plan().unwrap();
        let (s1, s2) = (plan.stage1(), plan.stage2());
        let (m1, m2) = (s1.local_width().unwrap_or(n), s2.n());
        let target = (1 << n) - 1;
        let p1 = common::block_probability(&common::simulate(n, m1, &s1.tuple(), target), m2, target);
        let m2_local = s2.local_width().unwrap_or(m2);
        let low = target & ((1 << m2) - 1);
        let p2 = common::target_probability(&common::simulate(m2, m2_local, &s2.tuple(), low), low);
        assert!((r.stages[0].probability - p1).abs() < 1e-10, "n={n}");
        assert!((r.stages[1].probability - p2).abs() < 1e-10, "n={n}");

        let d1 = common::depth(n, m1, &s1.tuple(), 1.0);
        // stage 2 still calls the full oracle
        let d2: f64 = common::ops(&s2.tuple())
            .into_iter()
            .map(|g| common::diffusion(n) + common::diffusion(if g { m2 } else { m2_local }))
            .sum();
        assert_eq!((r.stages[0].depth, r.stages[1].depth), (d1, d2));
        assert!(rel_close(r.expected_depth, (d1 + d2) / (p1 * p2)));
    }
}

fn optimum(n: usize) -> f64 {
    static CACHE: OnceLock<Vec<f64>> = OnceLock::new();
    CACHE.get_or_init(|| {
        (0..=7)
            .map(|n| {
                if n < 4 {
                    return f64::NAN;
                }
                optimize_one_stage(n, &params(n, 1.0), &EnumerationBounds::new(n, 1.0))
                    .unwrap()
                    .expected_depth
            })
            .collect()
    })[n]
}

/// A sequence inside the enumeration bounds at alpha = 1.
fn bounded_sequence() -> impl Strategy<Value = (usize, usize, Vec<u32>)> {
    (4usize..=7)
        .prop_flat_map(|n| (Just(n), 2..n, prop::collection::vec(1u32..=4, 1..=2 * n)))
        .prop_filter_map("outside bounds", |(n, m, tuple)| {
            // the last entry counts locals, and kinds alternate backwards
            let b = EnumerationBounds::new(n, 1.0);
            let globals: u32 = tuple.iter().rev().skip(1).step_by(2).sum();
            let locals: u32 = tuple.iter().rev().step_by(2).sum();
            let blocks = tuple.iter().filter(|&&j| j > 0).count();
            (globals <= b.max_global && locals <= b.max_local_for(globals) && blocks <= b.max_blocks)
                .then_some((n, m, tuple))
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn no_bounded_sequence_beats_the_optimum((n, m, tuple) in bounded_sequence()) {
        let amps = common::simulate(n, m, &tuple, 0);
        let p = common::target_probability(&amps, 0);
        prop_assume!(p > 1e-9);
        let med = common::depth(n, m, &tuple, 1.0) / p;
        prop_assert!(optimum(n) <= med * (1.0 + 1e-9), "{tuple:?} m={m}: {med} < {}", optimum(n));
    }
}
