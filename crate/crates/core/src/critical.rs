//! Critical oracle-to-diffusion depth ratios.
//!
//! Every schedule's expected depth is affine in `alpha` over a fixed
//! probability, so `d_G(alpha)` is linear and the optimized MEDs are concave
//! lower envelopes. Below the critical ratio an optimized schedule beats
//! Grover; above it Grover is optimal. The predicate "some schedule beats
//! Grover at `alpha`" is answered by a branch-and-bound run seeded with
//! Grover's MED; each schedule it finds is followed along its own MED line to
//! where Grover catches up, which brackets the crossing in a few probes.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::cost::{DepthParams, GateDepthTable};
use crate::error::{Error, Result};
use crate::optimizer::{
    self, one_stage_search, optimize_grover, two_stage_search, EnumerationBounds, OneStageOptions, OptResult,
    TwoStageOptions,
};
use crate::sequence::{Block, SequenceSpec, TwoStagePlan};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CriticalMode {
    OneStage,
    TwoStage,
}

impl fmt::Display for CriticalMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CriticalMode::OneStage => "one-stage",
            CriticalMode::TwoStage => "two-stage",
        })
    }
}

impl std::str::FromStr for CriticalMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "one-stage" | "one_stage" | "1" => Ok(CriticalMode::OneStage),
            "two-stage" | "two_stage" | "2" => Ok(CriticalMode::TwoStage),
            other => Err(Error::InvalidArgument(format!("unknown mode `{other}`"))),
        }
    }
}

/// How the "beats Grover" predicate searches the schedule space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CriticalSearch {
    /// Branch and bound over every schedule within the enumeration bounds.
    #[default]
    Exhaustive,
    /// Two-stage only: stage 1 restricted to `(G_n G_2)^k`, stage 2 to `G_2`.
    /// The crossing is a lower bound on the exhaustive one and scales to
    /// registers where branch and bound is out of reach.
    Alternating,
}

impl std::str::FromStr for CriticalSearch {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exhaustive" => Ok(CriticalSearch::Exhaustive),
            "alternating" => Ok(CriticalSearch::Alternating),
            other => Err(Error::InvalidArgument(format!("unknown search `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalOptions {
    /// Width of the final bracket around the crossing.
    pub tol: f64,
    /// Smallest ratio probed; the result is absent if Grover already wins here.
    pub floor: f64,
    pub max_iterations: usize,
    /// Block cap for the searches (default `2n`).
    pub max_blocks: Option<usize>,
    /// Stage-2 register width for two-stage schedules; `None` searches every
    /// width. The default is the exact two-qubit second stage.
    pub stage2_width: Option<usize>,
    pub search: CriticalSearch,
}

impl Default for CriticalOptions {
    fn default() -> Self {
        Self {
            tol: 1e-3,
            floor: 1.0,
            max_iterations: 200,
            max_blocks: None,
            stage2_width: Some(2),
            search: CriticalSearch::Exhaustive,
        }
    }
}

impl CriticalOptions {
    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_search(mut self, search: CriticalSearch) -> Self {
        self.search = search;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalResult {
    pub n: usize,
    pub mode: CriticalMode,
    /// `None` when Grover is optimal over the whole probed range.
    pub alpha_c: Option<f64>,
    /// Optimized schedule at `alpha_c - tol`.
    pub witness: Option<OptResult>,
    pub tolerance: f64,
    /// Predicate values at `alpha_c - tol` and `alpha_c + tol`.
    pub bracket: Option<(bool, bool)>,
    pub evaluations: usize,
}

impl CriticalResult {
    pub fn is_absent(&self) -> bool {
        self.alpha_c.is_none()
    }
}

/// Relative margin a schedule must beat Grover by to count as strictly better.
const STRICT_MARGIN: f64 = 1e-12;

fn bounds_for(n: usize, alpha: f64, opts: &CriticalOptions) -> EnumerationBounds {
    let b = EnumerationBounds::new(n, alpha);
    match opts.max_blocks {
        Some(q) => b.with_max_blocks(q),
        None => b,
    }
}

/// Does some schedule of the given kind have a smaller MED than Grover at `alpha`?
pub fn beats_grover(n: usize, mode: CriticalMode, alpha: f64, table: &GateDepthTable) -> Result<bool> {
    beats_grover_opts(n, mode, alpha, table, &CriticalOptions::default())
}

pub fn beats_grover_opts(
    n: usize,
    mode: CriticalMode,
    alpha: f64,
    table: &GateDepthTable,
    opts: &CriticalOptions,
) -> Result<bool> {
    Ok(find_better(n, mode, alpha, table, opts)?.is_some())
}

/// A schedule that beat Grover at some ratio.
enum Winner {
    Sequence(SequenceSpec),
    Plan(TwoStagePlan),
}

impl Winner {
    fn med(&self, params: &DepthParams) -> Result<f64> {
        Ok(match self {
            Winner::Sequence(s) => optimizer::evaluate_sequence(s, params)?.expected_depth,
            Winner::Plan(p) => optimizer::evaluate_plan(p, params)?.expected_depth,
        })
    }
}

fn grover_threshold(n: usize, params: &DepthParams) -> Result<f64> {
    Ok(optimize_grover(n, params)?.expected_depth * (1.0 - STRICT_MARGIN))
}

fn find_better(
    n: usize,
    mode: CriticalMode,
    alpha: f64,
    table: &GateDepthTable,
    opts: &CriticalOptions,
) -> Result<Option<Winner>> {
    let params = DepthParams::new(n, alpha, table.clone())?;
    let threshold = grover_threshold(n, &params)?;
    let bounds = bounds_for(n, alpha, opts);
    if opts.search == CriticalSearch::Alternating {
        let best = best_alternating(n, &params, &bounds)?;
        return Ok((best.expected_depth < threshold)
            .then(|| Winner::Plan(best.plan().expect("alternating plans have two stages").clone())));
    }
    Ok(match mode {
        CriticalMode::OneStage => one_stage_search(
            n,
            &params,
            &bounds,
            OneStageOptions {
                require_local: true,
                initial_bound: Some(threshold),
                stop_below: Some(threshold),
                ..OneStageOptions::default()
            },
        )?
        .map(|(seq, _)| Winner::Sequence(seq)),
        CriticalMode::TwoStage => {
            let restrict = TwoStageOptions {
                m2: opts.stage2_width,
                ..TwoStageOptions::default()
            };
            two_stage_search(n, &params, &bounds, &restrict, false, Some(threshold), true)?
                .map(|w| Winner::Plan(w.plan))
        }
    })
}

/// Largest ratio in `[lo, hi]` at which `winner` still beats Grover, to a
/// relative precision far below the bracket tolerance. The winner's MED is
/// affine in the ratio and Grover's is concave, so the set where it wins is an
/// interval containing `lo`.
fn last_win(winner: &Winner, n: usize, table: &GateDepthTable, lo: f64, hi: f64) -> Result<f64> {
    let wins = |alpha: f64| -> Result<bool> {
        let params = DepthParams::new(n, alpha, table.clone())?;
        Ok(winner.med(&params)? < grover_threshold(n, &params)?)
    };
    if wins(hi)? {
        return Ok(hi);
    }
    let (mut a, mut b) = (lo, hi);
    while b - a > 1e-9 * b {
        let mid = 0.5 * (a + b);
        if wins(mid)? {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(a)
}

/// Best `(G_n G_2)^k | G_2` plan within the global-operator budget.
fn best_alternating(n: usize, params: &DepthParams, bounds: &EnumerationBounds) -> Result<OptResult> {
    let mut best: Option<OptResult> = None;
    for k in 1..=bounds.max_global.max(1) {
        let blocks = (0..k).flat_map(|_| [Block::local(1), Block::global(1)]);
        let stage1 = SequenceSpec::new(n, Some(2), blocks)?;
        let plan = TwoStagePlan::new(2, stage1, SequenceSpec::grover(2, 1))?;
        let r = optimizer::evaluate_plan(&plan, params)?;
        if best.as_ref().is_none_or(|b| r.expected_depth < b.expected_depth) {
            best = Some(r);
        }
    }
    Ok(best.expect("at least one repetition"))
}

fn check_mode(n: usize, mode: CriticalMode, search: CriticalSearch) -> Result<()> {
    if search == CriticalSearch::Alternating && mode != CriticalMode::TwoStage {
        return Err(Error::InvalidArgument(
            "the alternating search only covers two-stage schedules".into(),
        ));
    }
    let min = match mode {
        CriticalMode::OneStage => 3,
        CriticalMode::TwoStage => 4,
    };
    if n < min {
        return Err(Error::InvalidArgument(format!(
            "{mode} critical ratio needs n >= {min}, got {n}"
        )));
    }
    Ok(())
}

/// Critical ratio under the linear Toffoli depth table.
pub fn critical_alpha(n: usize, mode: CriticalMode, tol: f64) -> Result<CriticalResult> {
    critical_alpha_with(
        n,
        mode,
        &GateDepthTable::linear(),
        &CriticalOptions::default().with_tol(tol),
    )
}

pub fn critical_alpha_with(
    n: usize,
    mode: CriticalMode,
    table: &GateDepthTable,
    opts: &CriticalOptions,
) -> Result<CriticalResult> {
    check_mode(n, mode, opts.search)?;
    // NaN counts as non-positive
    let positive = |x: f64| x > 0.0;
    if !positive(opts.tol) || !positive(opts.floor) {
        return Err(Error::InvalidArgument(format!(
            "tolerance and floor must be positive (tol {}, floor {})",
            opts.tol, opts.floor
        )));
    }
    let mut evaluations = 0;
    let mut probe = |alpha: f64| -> Result<Option<Winner>> {
        evaluations += 1;
        find_better(n, mode, alpha, table, opts)
    };

    // Each winner certifies the predicate up to the point where its own MED
    // line crosses Grover's, so the lower end of the bracket jumps there
    // instead of creeping up by halving.
    let mut lo = opts.floor;
    let Some(mut winner) = probe(lo)? else {
        return Ok(CriticalResult {
            n,
            mode,
            alpha_c: None,
            witness: None,
            tolerance: opts.tol,
            bracket: None,
            evaluations,
        });
    };
    let mut hi = f64::INFINITY;
    let mut iterations = 0;
    loop {
        iterations += 1;
        if iterations > opts.max_iterations || !lo.is_finite() {
            return Err(Error::NoConvergence(iterations));
        }
        let cap = if hi.is_finite() { hi } else { 2.0 * lo };
        lo = lo.max(last_win(&winner, n, table, lo, cap)?);
        if hi - lo <= opts.tol {
            break;
        }
        let next = if hi.is_finite() { 0.5 * (lo + hi) } else { 2.0 * lo };
        match probe(next)? {
            Some(w) => {
                lo = next;
                winner = w;
            }
            None => hi = next,
        }
    }
    let alpha_c = 0.5 * (lo + hi);
    let below = (alpha_c - opts.tol).max(opts.floor.min(lo));
    let bracket = (probe(below)?.is_some(), probe(alpha_c + opts.tol)?.is_some());

    let params = DepthParams::new(n, below, table.clone())?;
    let bounds = bounds_for(n, below, opts);
    // Grover's MED bounds the optimum from above wherever the predicate holds
    let grover = optimize_grover(n, &params)?.expected_depth;
    let witness = match mode {
        _ if opts.search == CriticalSearch::Alternating => best_alternating(n, &params, &bounds)?,
        CriticalMode::OneStage => {
            let opts = OneStageOptions {
                initial_bound: Some(grover),
                ..OneStageOptions::default()
            };
            let (seq, nodes) = one_stage_search(n, &params, &bounds, opts)?
                .ok_or_else(|| Error::Infeasible(format!("no schedule beats Grover at alpha = {below}")))?;
            let mut r = optimizer::evaluate_sequence(&seq, &params)?;
            r.nodes = nodes;
            r
        }
        CriticalMode::TwoStage => {
            let restrict = TwoStageOptions {
                m2: opts.stage2_width,
                ..TwoStageOptions::default()
            };
            let winner = two_stage_search(n, &params, &bounds, &restrict, false, Some(grover), false)?
                .ok_or_else(|| Error::Infeasible(format!("no plan beats Grover at alpha = {below}")))?;
            let mut r = optimizer::evaluate_plan(&winner.plan, &params)?;
            r.nodes = winner.nodes;
            r
        }
    };
    Ok(CriticalResult {
        n,
        mode,
        alpha_c: Some(alpha_c),
        witness: Some(witness),
        tolerance: opts.tol,
        bracket: Some(bracket),
        evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn n4_one_stage_crossing() {
        // S_{4,3}(1) against one Grover iteration: 17.92 + 38.4a = 31.735(1 + a)
        let r = critical_alpha(4, CriticalMode::OneStage, 1e-3).unwrap();
        let a = r.alpha_c.unwrap();
        assert!((a - 2.07).abs() < 0.01, "{a}");
        assert_eq!(r.bracket, Some((true, false)));
    }

    #[test]
    fn n4_two_stage_absent() {
        let r = critical_alpha(4, CriticalMode::TwoStage, 1e-3).unwrap();
        assert!(r.is_absent());
    }

    #[test]
    fn alternating_matches_exhaustive() {
        let opts = CriticalOptions::default().with_search(CriticalSearch::Alternating);
        let a = critical_alpha_with(7, CriticalMode::TwoStage, &GateDepthTable::linear(), &opts).unwrap();
        let b = critical_alpha(7, CriticalMode::TwoStage, 1e-3).unwrap();
        assert!((a.alpha_c.unwrap() - b.alpha_c.unwrap()).abs() < 2e-3);
        assert!(critical_alpha_with(7, CriticalMode::OneStage, &GateDepthTable::linear(), &opts).is_err());
    }

    #[test]
    fn small_n_rejected() {
        assert!(critical_alpha(3, CriticalMode::TwoStage, 1e-3).is_err());
        assert!(critical_alpha(5, CriticalMode::OneStage, 0.0).is_err());
    }
}
