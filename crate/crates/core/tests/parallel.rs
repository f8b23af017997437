mod common;

use qsearch::parallel::{
    default_partition_threshold, plan_multistage_partition, plan_random_guess, plan_replicated, PlanNote, Role,
    Strategy,
};
use qsearch::DepthParams;

fn params(n: usize) -> DepthParams {
    DepthParams::linear(n, 1.0).unwrap()
}

#[test]
fn replicated_respects_the_cap() {
    for (n, machines, cap) in [(6, 4, 0.2), (7, 2, 0.5), (8, 8, 0.1), (5, 1, 1.0)] {
        let plan = plan_replicated(n, &params(n), machines, cap).unwrap();
        assert_eq!(plan.strategy, Strategy::Replicated);
        assert_eq!(plan.per_machine.len(), machines);
        let task = &plan.per_machine[0];
        assert!(task.probability <= cap + 1e-12);
        let joint = 1.0 - (1.0 - task.probability).powi(machines as i32);
        assert!((plan.success_per_round - joint).abs() < 1e-12);
        assert!((plan.expected_depth - task.depth / joint).abs() < 1e-9 * plan.expected_depth);
    }
}

#[test]
fn replicated_cap_admits_a_known_sequence() {
    // S_{6,4}(1): one local diffusion, p = 0.1181, depth 78
    let amps = common::simulate(6, 4, &[1], 0);
    let p = common::target_probability(&amps, 0);
    assert!((p - 0.1181).abs() < 1e-4);
    let plan = plan_replicated(6, &params(6), 1, 0.2).unwrap();
    let task = &plan.per_machine[0];
    assert!(task.depth / task.probability <= 78.0 / p + 1e-9);
}

#[test]
fn random_guess_covers_distinct_prefixes() {
    let plan = plan_random_guess(8, &params(8), 3, 2).unwrap();
    assert_eq!(plan.per_machine.len(), 3);
    let values: Vec<u64> = plan
        .per_machine
        .iter()
        .map(|t| match t.role {
            Role::Guess { bits: 2, value } => value,
            ref other => panic!("unexpected role {other:?}"),
        })
        .collect();
    assert_eq!(values, [0, 1, 2]);
    let p = plan.per_machine[0].probability;
    assert!((plan.success_per_round - 0.75 * p).abs() < 1e-12);
    assert!(plan.notes.is_empty());

    // more machines than guesses leaves the extra ones idle
    let plan = plan_random_guess(8, &params(8), 10, 2).unwrap();
    assert_eq!(plan.per_machine.len(), 4);

    let plan = plan_random_guess(8, &params(8), 4, 5).unwrap();
    assert_eq!(plan.notes, [PlanNote::SpeedupLost]);
    assert!(plan_random_guess(8, &params(8), 4, 7).is_err());
    assert!(plan_random_guess(8, &params(8), 4, 0).is_err());
}

#[test]
fn random_guess_keeps_the_full_oracle_cost() {
    let plan = plan_random_guess(8, &params(8), 4, 2).unwrap();
    let task = &plan.per_machine[0];
    let seq = &task.sequence;
    assert_eq!(seq.n(), 6);
    let m = seq.local_width().unwrap_or(6);
    let depth: f64 = common::ops(&seq.tuple())
        .into_iter()
        .map(|g| common::diffusion(8) + common::diffusion(if g { 6 } else { m }))
        .sum();
    assert_eq!(task.depth, depth);
}

#[test]
fn partition_slices_reach_the_threshold() {
    for (n, machines) in [(6, 2), (6, 3), (8, 2), (8, 4)] {
        let threshold = default_partition_threshold(n);
        let plan = plan_multistage_partition(n, &params(n), machines, threshold).unwrap();
        let width = n / machines;
        let task = &plan.per_machine[0];
        let m = n - width;
        assert_eq!(task.sequence.local_width().unwrap_or(m), m);
        let amps = common::simulate(n, m, &task.sequence.tuple(), 0);
        let p = common::block_probability(&amps, m, 0);
        assert!((task.probability - p).abs() < 1e-10);
        assert!(p >= threshold - 1e-12, "n={n} machines={machines}: {p}");
        assert!((plan.success_per_round - p.powi(machines as i32)).abs() < 1e-12);
        let slices: Vec<_> = plan
            .per_machine
            .iter()
            .map(|t| match &t.role {
                Role::Part { bits, .. } => bits.clone(),
                other => panic!("unexpected role {other:?}"),
            })
            .collect();
        assert_eq!(slices.last().unwrap().end, n);
        assert!(slices.windows(2).all(|w| w[0].end == w[1].start));
    }
}

#[test]
fn exact_two_qubit_slices() {
    // S_{4,2}(1,2) reveals the top two bits with certainty
    let amps = common::simulate(4, 2, &[1, 2], 0);
    assert!((common::block_probability(&amps, 2, 0) - 1.0).abs() < 1e-12);
    let plan = plan_multistage_partition(4, &params(4), 2, 1.0 - 1e-9).unwrap();
    assert!((plan.per_machine[0].probability - 1.0).abs() < 1e-9);
}

#[test]
fn one_bit_slices_are_flagged() {
    let plan = plan_multistage_partition(4, &params(4), 4, 0.5).unwrap();
    assert_eq!(plan.notes, [PlanNote::DominatedByRandomGuess]);
}

#[test]
fn invalid_inputs_are_rejected() {
    assert!(plan_replicated(6, &params(6), 0, 0.5).is_err());
    assert!(plan_replicated(6, &params(6), 2, 0.0).is_err());
    assert!(plan_multistage_partition(7, &params(7), 2, 0.5).is_err());
    assert!(plan_multistage_partition(6, &params(6), 2, 1.5).is_err());
}
