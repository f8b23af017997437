//! Running one search on several machines.
//!
//! Machines are identical and work in lock step. A round is one execution of
//! every machine's sequence followed by a classical check of the candidates;
//! rounds repeat until the target is confirmed.
//!
//! ```
//! use qsearch::{parallel, DepthParams};
//!
//! let params = DepthParams::linear(6, 1.0).unwrap();
//! let plan = parallel::plan_replicated(6, &params, 4, 0.2).unwrap();
//! assert!(plan.per_machine[0].probability <= 0.2);
//! assert!(plan.success_per_round > plan.per_machine[0].probability);
//! ```

use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::cost::{sequence_depth, DepthParams};
use crate::dynamics::{block_success_probability, success_probability};
use crate::error::{Error, Result};
use crate::optimizer::{
    check_params, found_sequence, frame_problem, one_stage_frames, one_stage_search, EnumerationBounds, OneStageOptions,
};
use crate::search::{self, Line, Measure};
use crate::sequence::{OpKind, SequenceSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// Every machine runs the same low-probability sequence.
    Replicated,
    /// Each machine fixes a different guess for the leading bits and searches the rest.
    RandomGuess,
    /// Machine `k` reveals the `k`-th equal slice of the address.
    MultistagePartition,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::Replicated => "replicated",
            Strategy::RandomGuess => "guess",
            Strategy::MultistagePartition => "partition",
        })
    }
}

impl std::str::FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "replicated" => Ok(Strategy::Replicated),
            "guess" | "random-guess" | "random_guess" => Ok(Strategy::RandomGuess),
            "partition" | "multistage-partition" | "multistage_partition" => Ok(Strategy::MultistagePartition),
            other => Err(Error::InvalidArgument(format!("unknown strategy `{other}`"))),
        }
    }
}

/// What a single machine contributes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Replica,
    /// Leading `bits` address bits fixed to `value`.
    Guess {
        bits: usize,
        value: u64,
    },
    /// Reveals address bits `bits` (0 is the most significant).
    Part {
        index: usize,
        bits: Range<usize>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MachineTask {
    pub role: Role,
    pub sequence: SequenceSpec,
    /// Success probability of this machine's own measurement.
    pub probability: f64,
    pub depth: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanNote {
    /// More than half of the address is guessed, so the quadratic speedup is gone.
    SpeedupLost,
    /// One bit per machine; a one-bit random guess search does this job better.
    DominatedByRandomGuess,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParallelPlan {
    pub strategy: Strategy,
    pub n: usize,
    pub machines: usize,
    /// Busy machines only; a guess plan leaves machines idle once every guess is covered.
    pub per_machine: Vec<MachineTask>,
    pub success_per_round: f64,
    pub expected_rounds: f64,
    /// Depth of one round (the slowest machine).
    pub round_depth: f64,
    pub expected_depth: f64,
    pub notes: Vec<PlanNote>,
}

impl ParallelPlan {
    fn finish(
        strategy: Strategy,
        n: usize,
        machines: usize,
        per_machine: Vec<MachineTask>,
        success_per_round: f64,
        notes: Vec<PlanNote>,
    ) -> Result<Self> {
        if !(success_per_round > 0.0 && success_per_round <= 1.0 + 1e-12) {
            return Err(Error::ZeroProbability(success_per_round));
        }
        let success_per_round = success_per_round.min(1.0);
        let round_depth = per_machine.iter().map(|t| t.depth).fold(0.0, f64::max);
        let expected_rounds = 1.0 / success_per_round;
        Ok(Self {
            strategy,
            n,
            machines,
            per_machine,
            success_per_round,
            expected_rounds,
            round_depth,
            expected_depth: round_depth * expected_rounds,
            notes,
        })
    }
}

/// Chance that at least one of `machines` independent runs succeeds.
pub fn joint_success(p_single: f64, machines: usize) -> f64 {
    1.0 - (1.0 - p_single).powi(machines as i32)
}

fn check_machines(machines: usize) -> Result<()> {
    if machines == 0 {
        return Err(Error::InvalidArgument("need at least one machine".into()));
    }
    Ok(())
}

/// Every machine runs the minimal expected depth sequence among those whose
/// success probability does not exceed `prob_threshold`.
pub fn plan_replicated(n: usize, params: &DepthParams, machines: usize, prob_threshold: f64) -> Result<ParallelPlan> {
    plan_replicated_with(
        n,
        params,
        machines,
        prob_threshold,
        &EnumerationBounds::new(n, params.alpha()),
    )
}

pub fn plan_replicated_with(
    n: usize,
    params: &DepthParams,
    machines: usize,
    prob_threshold: f64,
    bounds: &EnumerationBounds,
) -> Result<ParallelPlan> {
    check_params(n, params)?;
    check_machines(machines)?;
    if n < 3 {
        return Err(Error::InvalidArgument(format!("replicated plans need n >= 3, got {n}")));
    }
    if !(prob_threshold > 0.0 && prob_threshold <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "probability threshold must lie in (0, 1], got {prob_threshold}"
        )));
    }
    let opts = OneStageOptions {
        prob_cap: (prob_threshold < 1.0).then_some(prob_threshold),
        ..OneStageOptions::default()
    };
    let (seq, _) = one_stage_search(n, params, bounds, opts)?
        .ok_or_else(|| Error::Infeasible(format!("no sequence has success probability <= {prob_threshold}")))?;
    let probability = success_probability(&seq)?;
    let depth = sequence_depth(&seq, params)?.total_depth;
    let task = MachineTask {
        role: Role::Replica,
        sequence: seq,
        probability,
        depth,
    };
    ParallelPlan::finish(
        Strategy::Replicated,
        n,
        machines,
        vec![task; machines],
        joint_success(probability, machines),
        vec![],
    )
}

/// Machines take distinct guesses for the leading `guess_bits` bits and run the
/// optimal one-stage search on the remaining `n - guess_bits` qubits. The
/// oracle keeps its full `n`-qubit depth.
pub fn plan_random_guess(n: usize, params: &DepthParams, machines: usize, guess_bits: usize) -> Result<ParallelPlan> {
    check_params(n, params)?;
    check_machines(machines)?;
    if guess_bits < 1 || guess_bits + 2 > n {
        return Err(Error::InvalidArgument(format!(
            "guess bits must lie in [1, {}] for n = {n}, got {guess_bits}",
            n.saturating_sub(2)
        )));
    }
    let rest = n - guess_bits;
    let bounds = EnumerationBounds::new(rest, params.alpha());
    let (seq, _) = one_stage_search(rest, params, &bounds, OneStageOptions::default())?
        .ok_or_else(|| Error::Infeasible(format!("no sequence on {rest} qubits fits the bounds")))?;
    let probability = success_probability(&seq)?;
    let depth = sequence_depth(&seq, params)?.total_depth;
    let guesses = 1u128 << guess_bits;
    let covered = (machines as u128).min(guesses) as u64;
    let per_machine = (0..covered)
        .map(|value| MachineTask {
            role: Role::Guess {
                bits: guess_bits,
                value,
            },
            sequence: seq.clone(),
            probability,
            depth,
        })
        .collect();
    let notes = if 2 * guess_bits > n {
        vec![PlanNote::SpeedupLost]
    } else {
        vec![]
    };
    let success = covered as f64 / guesses as f64 * probability;
    ParallelPlan::finish(Strategy::RandomGuess, n, machines, per_machine, success, notes)
}

/// Default per-part threshold `1 - 2^{-n/2}`.
pub fn default_partition_threshold(n: usize) -> f64 {
    1.0 - 2f64.powf(-(n as f64) / 2.0)
}

/// Splits the address into `machines` equal slices. Each machine runs the
/// sequence with the most local operators (then least depth) whose chance
/// of revealing its slice is at least `prob_threshold`. Relabeling qubits
/// makes every slice the same reduced problem, so all machines share it.
pub fn plan_multistage_partition(
    n: usize,
    params: &DepthParams,
    machines: usize,
    prob_threshold: f64,
) -> Result<ParallelPlan> {
    plan_multistage_partition_with(
        n,
        params,
        machines,
        prob_threshold,
        &EnumerationBounds::new(n, params.alpha()),
    )
}

pub fn plan_multistage_partition_with(
    n: usize,
    params: &DepthParams,
    machines: usize,
    prob_threshold: f64,
    bounds: &EnumerationBounds,
) -> Result<ParallelPlan> {
    check_params(n, params)?;
    check_machines(machines)?;
    if !n.is_multiple_of(machines) {
        return Err(Error::InvalidArgument(format!(
            "{machines} machines do not divide n = {n}"
        )));
    }
    if !(prob_threshold > 0.0 && prob_threshold <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "probability threshold must lie in (0, 1], got {prob_threshold}"
        )));
    }
    let width = n / machines;
    let (seq, probability) = if machines == 1 {
        let mut best: Option<(usize, search::Found)> = None;
        for m in one_stage_frames(n) {
            let problem = frame_problem(n, m, params, bounds, Measure::Target, vec![Line::IDENTITY])?;
            if let Some(found) = search::most_locals(&problem, prob_threshold) {
                if partition_ranks_above(&found, best.as_ref().map(|(_, f)| f)) {
                    best = Some((m, found));
                }
            }
        }
        let (m, found) = best.ok_or_else(|| no_sequence(prob_threshold))?;
        let seq = found_sequence(n, m, &found)?;
        let p = success_probability(&seq)?;
        (seq, p)
    } else {
        let m = n - width;
        let problem = frame_problem(n, m, params, bounds, Measure::Block, vec![Line::IDENTITY])?;
        let found = search::most_locals(&problem, prob_threshold).ok_or_else(|| no_sequence(prob_threshold))?;
        let seq = found_sequence(n, m, &found)?;
        let p = block_success_probability(&seq, m)?;
        (seq, p)
    };
    let depth = sequence_depth(&seq, params)?.total_depth;
    let per_machine = (0..machines)
        .map(|index| MachineTask {
            role: Role::Part {
                index,
                bits: index * width..(index + 1) * width,
            },
            sequence: seq.clone(),
            probability,
            depth,
        })
        .collect();
    let notes = if machines == n && n > 1 {
        vec![PlanNote::DominatedByRandomGuess]
    } else {
        vec![]
    };
    ParallelPlan::finish(
        Strategy::MultistagePartition,
        n,
        machines,
        per_machine,
        probability.powi(machines as i32),
        notes,
    )
}

fn no_sequence(threshold: f64) -> Error {
    Error::Infeasible(format!("no sequence reaches probability {threshold} within the bounds"))
}

fn partition_ranks_above(a: &search::Found, b: Option<&search::Found>) -> bool {
    let Some(b) = b else { return true };
    let locals = |f: &search::Found| -> u32 {
        f.blocks
            .iter()
            .filter(|x| x.kind == OpKind::Local)
            .map(|x| x.count)
            .sum()
    };
    match locals(a).cmp(&locals(b)) {
        std::cmp::Ordering::Greater => true,
        std::cmp::Ordering::Less => false,
        std::cmp::Ordering::Equal => a.depth < b.depth - 1e-9 * b.depth.max(1.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn joint_success_of_four_halves() {
        assert!((joint_success(0.5, 4) - 0.9375).abs() < 1e-15);
    }

    #[test]
    fn guess_leaves_two_qubits() {
        let params = DepthParams::linear(6, 1.0).unwrap();
        let plan = plan_random_guess(6, &params, 16, 4).unwrap();
        assert!((plan.per_machine[0].probability - 1.0).abs() < 1e-12);
        assert!((plan.success_per_round - 1.0).abs() < 1e-12);
        assert_eq!(plan.notes, vec![PlanNote::SpeedupLost]);
        assert!(plan_random_guess(6, &params, 2, 5).is_err());
    }

    #[test]
    fn partition_n4_exact_slice() {
        let params = DepthParams::linear(4, 1.0).unwrap();
        let plan = plan_multistage_partition(4, &params, 2, 0.95).unwrap();
        assert!(plan.per_machine[0].probability >= 0.95);
        assert!(plan.success_per_round >= 0.95f64.powi(2) - 1e-12);
    }
}
