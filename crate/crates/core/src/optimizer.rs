//! Minimal expected depth: pure Grover, one-stage and two-stage schedules.
//!
//! ```
//! use qsearch::{optimizer, DepthParams};
//!
//! let params = DepthParams::linear(6, 1.0).unwrap();
//! let grover = optimizer::optimize_grover(6, &params).unwrap();
//! assert_eq!(grover.schedule.to_string(), "S_6(4,0)");
//! assert!((grover.expected_depth - 617.36).abs() < 0.01);
//! ```

use std::cmp::Ordering as CmpOrdering;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cost::{sequence_depth, AffineDepth, DepthParams};
use crate::dynamics::{block_success_probability, grover_probability_closed_form, success_probability, ReducedModel};
use crate::error::{Error, Result};
use crate::search::{self, Found, Line, Measure, Problem, Shared, TIE_TOLERANCE};
use crate::sequence::{Block, SequenceSpec, TwoStagePlan};

/// Fraction of `√N` capping the number of global operators.
pub const GLOBAL_BUDGET_FACTOR: f64 = 0.69;

/// Limits on the sequences the optimizer enumerates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnumerationBounds {
    /// `0.69·√N`.
    pub budget: f64,
    pub alpha: f64,
    pub max_global: u32,
    /// Cap on alternating blocks.
    pub max_blocks: usize,
    /// Optional cap on the total number of oracle calls.
    pub max_oracle_calls: Option<u32>,
}

impl EnumerationBounds {
    pub fn new(n: usize, alpha: f64) -> Self {
        let budget = GLOBAL_BUDGET_FACTOR * 2f64.powf(n as f64 / 2.0);
        Self {
            budget,
            alpha,
            max_global: budget.floor() as u32,
            max_blocks: 2 * n,
            max_oracle_calls: None,
        }
    }

    pub fn with_max_blocks(mut self, q: usize) -> Self {
        self.max_blocks = q;
        self
    }

    pub fn with_max_oracle_calls(mut self, calls: u32) -> Self {
        self.max_oracle_calls = Some(calls);
        self
    }

    /// Largest number of local operators allowed next to `j` globals.
    pub fn max_local_for(&self, j: u32) -> u32 {
        let raw = ((self.budget - j as f64) * (self.alpha + 1.0) / self.alpha).floor();
        let mut cap = if raw > 0.0 { raw.min(u32::MAX as f64) as u32 } else { 0 };
        if let Some(total) = self.max_oracle_calls {
            cap = cap.min(total.saturating_sub(j));
        }
        cap
    }

    fn global_limit(&self) -> u32 {
        match self.max_oracle_calls {
            Some(total) => self.max_global.min(total),
            None => self.max_global,
        }
    }

    fn local_caps(&self) -> Vec<u32> {
        (0..=self.global_limit()).map(|j| self.max_local_for(j)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MedKind {
    Grover,
    OneStage,
    TwoStage,
}

impl fmt::Display for MedKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MedKind::Grover => "grover",
            MedKind::OneStage => "one-stage",
            MedKind::TwoStage => "two-stage",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Schedule {
    Sequence(SequenceSpec),
    TwoStage(TwoStagePlan),
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Schedule::Sequence(s) => s.fmt(f),
            Schedule::TwoStage(p) => p.fmt(f),
        }
    }
}

/// One stage of a schedule with its own probability and depth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageOutcome {
    pub sequence: SequenceSpec,
    /// Target probability for single-stage schedules and the second stage;
    /// block probability for the first of two stages.
    pub probability: f64,
    pub depth: f64,
    pub affine: AffineDepth,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptResult {
    pub schedule: Schedule,
    pub probability: f64,
    pub single_run_depth: f64,
    pub expected_depth: f64,
    pub med_kind: MedKind,
    pub stages: Vec<StageOutcome>,
    /// Search nodes visited (0 for closed-form results).
    pub nodes: u64,
}

impl OptResult {
    pub fn sequence(&self) -> Option<&SequenceSpec> {
        match &self.schedule {
            Schedule::Sequence(s) => Some(s),
            Schedule::TwoStage(_) => None,
        }
    }

    pub fn plan(&self) -> Option<&TwoStagePlan> {
        match &self.schedule {
            Schedule::TwoStage(p) => Some(p),
            Schedule::Sequence(_) => None,
        }
    }

    /// Depth as `diffusion + alpha * oracle_units`, summed over stages.
    pub fn affine(&self) -> AffineDepth {
        self.stages.iter().fold(AffineDepth::default(), |acc, s| acc + s.affine)
    }
}

pub(crate) fn one_stage_result(
    seq: SequenceSpec,
    params: &DepthParams,
    kind: MedKind,
    nodes: u64,
) -> Result<OptResult> {
    let probability = success_probability(&seq)?;
    let depth = sequence_depth(&seq, params)?;
    let expected_depth = crate::cost::expected_depth(depth.total_depth, probability)?;
    Ok(OptResult {
        stages: vec![StageOutcome {
            sequence: seq.clone(),
            probability,
            depth: depth.total_depth,
            affine: depth.affine,
        }],
        schedule: Schedule::Sequence(seq),
        probability,
        single_run_depth: depth.total_depth,
        expected_depth,
        med_kind: kind,
        nodes,
    })
}

pub(crate) fn check_params(n: usize, params: &DepthParams) -> Result<()> {
    if params.n() != n {
        return Err(Error::WidthMismatch(format!(
            "cost model is for n = {}, search asked for n = {n}",
            params.n()
        )));
    }
    Ok(())
}

/// Best number of Grover iterations, from the closed-form probability.
pub fn optimize_grover(n: usize, params: &DepthParams) -> Result<OptResult> {
    check_params(n, params)?;
    if n < 2 {
        return Err(Error::WidthOutOfRange {
            width: n,
            min: 2,
            max: params.table().max_width(),
        });
    }
    let per_iter = params.global_diffusion_depth() as f64 + params.oracle_depth();
    let limit = 2 * crate::dynamics::j_max(n) + 2;
    let mut best: Option<(u64, f64)> = None;
    for j in 1..=limit {
        let value = j as f64 * per_iter / grover_probability_closed_form(n, j);
        let better = match best {
            None => true,
            Some((_, v)) => value < v - TIE_TOLERANCE * v,
        };
        if better {
            best = Some((j, value));
        }
    }
    let (j, _) = best.expect("at least one iteration count");
    one_stage_result(SequenceSpec::grover(n, j as u32), params, MedKind::Grover, 0)
}

fn op_costs(params: &DepthParams, n: usize, m: usize) -> Result<(f64, f64)> {
    let oracle = params.oracle_depth();
    let table = params.table();
    let global = table.diffusion_depth(n)? as f64 + oracle;
    let local = if m < n {
        table.diffusion_depth(m)? as f64 + oracle
    } else {
        f64::INFINITY
    };
    Ok((global, local))
}

/// A reduced frame to search: sequences on `n` qubits with local width `m`
/// (`m == n` means globals only).
pub(crate) fn frame_problem(
    n: usize,
    m: usize,
    params: &DepthParams,
    bounds: &EnumerationBounds,
    measure: Measure,
    envelope: Vec<Line>,
) -> Result<Problem> {
    let (cost_global, cost_local) = op_costs(params, n, m)?;
    Ok(Problem {
        model: ReducedModel::new(n, m)?,
        measure,
        allow_local: m < n,
        cost_global,
        cost_local,
        max_global: bounds.global_limit(),
        local_cap: bounds.local_caps(),
        max_blocks: bounds.max_blocks,
        require_local: false,
        prob_cap: None,
        envelope,
    })
}

pub(crate) fn found_sequence(n: usize, m: usize, found: &Found) -> Result<SequenceSpec> {
    let has_local = found.blocks.iter().any(|b| b.kind == crate::sequence::OpKind::Local);
    SequenceSpec::new(n, if has_local { Some(m) } else { None }, found.blocks.iter().copied())
}

/// Options shared by the one-stage searches.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct OneStageOptions {
    pub require_local: bool,
    pub prob_cap: Option<f64>,
    /// Initial incumbent (a value known to be attainable, or a threshold).
    pub initial_bound: Option<f64>,
    /// Stop as soon as any candidate beats this.
    pub stop_below: Option<f64>,
}

/// One-stage optimum by plain enumeration of every sequence inside `bounds`,
/// with no pruning. Exponential in the budget; useful for cross-checking the
/// branch and bound on small registers.
pub fn exhaustive_one_stage(n: usize, params: &DepthParams, bounds: &EnumerationBounds) -> Result<OptResult> {
    check_params(n, params)?;
    if n < 3 {
        return Err(Error::InvalidArgument(format!(
            "one-stage search needs n >= 3, got {n}"
        )));
    }
    let mut winner: Option<(usize, Found)> = None;
    let mut nodes = 0u64;
    for m in one_stage_frames(n) {
        let problem = frame_problem(n, m, params, bounds, Measure::Target, vec![Line::IDENTITY])?;
        search::enumerate_all(&problem, |path, prob, depth| {
            nodes += 1;
            if path.is_empty() || prob <= 0.0 {
                return;
            }
            let found = Found {
                value: depth / prob,
                prob,
                depth,
                line: 0,
                blocks: search::blocks_of(path),
                oracle_calls: path.len() as u32,
            };
            if search::better(&found, winner.as_ref().map(|(_, f)| f)) {
                winner = Some((m, found));
            }
        });
    }
    let (m, found) = winner.ok_or_else(|| Error::Infeasible("no sequence fits the enumeration bounds".into()))?;
    one_stage_result(found_sequence(n, m, &found)?, params, MedKind::OneStage, nodes)
}

pub(crate) struct FrameWinner {
    pub m: usize,
    pub found: Found,
    pub nodes: u64,
}

/// Runs the frames of a one-stage search in parallel and merges the winners.
pub(crate) fn search_frames(
    n: usize,
    frames: &[usize],
    params: &DepthParams,
    bounds: &EnumerationBounds,
    measure: Measure,
    envelope: &[Line],
    opts: OneStageOptions,
) -> Result<(Option<FrameWinner>, u64)> {
    let problems: Vec<(usize, Problem)> = frames
        .iter()
        .map(|&m| {
            let mut p = frame_problem(n, m, params, bounds, measure, envelope.to_vec())?;
            p.require_local = opts.require_local;
            p.prob_cap = opts.prob_cap;
            Ok((m, p))
        })
        .collect::<Result<_>>()?;
    let shared = Shared::new(opts.initial_bound.unwrap_or(f64::INFINITY), opts.stop_below);
    let outcomes: Vec<(usize, search::Outcome)> = problems
        .par_iter()
        .map(|(m, p)| (*m, search::run(p, &shared)))
        .collect();
    let nodes = outcomes.iter().map(|(_, o)| o.nodes).sum();
    let mut winner: Option<FrameWinner> = None;
    for (m, o) in outcomes {
        if let Some(found) = o.best {
            if search::better(&found, winner.as_ref().map(|w| &w.found)) {
                winner = Some(FrameWinner { m, found, nodes: 0 });
            }
        }
    }
    if let Some(w) = winner.as_mut() {
        w.nodes = nodes;
    }
    Ok((winner, nodes))
}

/// Frames searched for one-stage sequences on `n` qubits: every local width
/// `2..n`, then the globals-only frame.
pub(crate) fn one_stage_frames(n: usize) -> Vec<usize> {
    (2..=n).collect()
}

/// Best pure-Grover value within `bounds`, used to seed the incumbent.
fn grover_seed(
    n: usize,
    params: &DepthParams,
    bounds: &EnumerationBounds,
    measure: Measure,
    envelope: &[Line],
) -> Result<f64> {
    let p = frame_problem(n, n, params, bounds, measure, envelope.to_vec())?;
    let shared = Shared::new(f64::INFINITY, None);
    Ok(search::run(&p, &shared).best.map_or(f64::INFINITY, |f| f.value))
}

pub(crate) fn one_stage_search(
    n: usize,
    params: &DepthParams,
    bounds: &EnumerationBounds,
    opts: OneStageOptions,
) -> Result<Option<(SequenceSpec, u64)>> {
    let line = [Line::IDENTITY];
    let mut opts = opts;
    if opts.initial_bound.is_none() && !opts.require_local && opts.prob_cap.is_none() {
        let seed = grover_seed(n, params, bounds, Measure::Target, &line)?;
        if seed.is_finite() {
            opts.initial_bound = Some(seed * (1.0 + 2.0 * TIE_TOLERANCE));
        }
    }
    let (winner, nodes) = search_frames(n, &one_stage_frames(n), params, bounds, Measure::Target, &line, opts)?;
    winner
        .map(|w| Ok((found_sequence(n, w.m, &w.found)?, nodes)))
        .transpose()
}

/// Exhaustive one-stage search over every local width.
pub fn optimize_one_stage(n: usize, params: &DepthParams, bounds: &EnumerationBounds) -> Result<OptResult> {
    check_params(n, params)?;
    if n < 3 {
        return Err(Error::InvalidArgument(format!(
            "one-stage search needs n >= 3, got {n}"
        )));
    }
    match one_stage_search(n, params, bounds, OneStageOptions::default())? {
        Some((seq, nodes)) => one_stage_result(seq, params, MedKind::OneStage, nodes),
        None => Err(Error::Infeasible("no sequence fits the enumeration bounds".into())),
    }
}

/// Restrictions for the two-stage search beyond the enumeration bounds.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TwoStageOptions {
    /// Only try this stage-2 register width.
    pub m2: Option<usize>,
    /// Oracle-call cap for the first stage.
    pub stage1_max_oracle_calls: Option<u32>,
    /// Oracle-call cap for the second stage.
    pub stage2_max_oracle_calls: Option<u32>,
}

/// Stage-2 candidate for a fixed register width.
#[derive(Debug, Clone)]
struct Stage2 {
    seq: SequenceSpec,
    depth: f64,
    prob: f64,
}

impl Stage2 {
    fn line(&self) -> Line {
        Line {
            offset: self.depth,
            prob: self.prob,
        }
    }
}

struct Stage2Search<'a> {
    m2: usize,
    params: &'a DepthParams,
    bounds: EnumerationBounds,
    nodes: u64,
}

impl Stage2Search<'_> {
    /// `argmin (offset + d₂) / P₂` over all stage-2 sequences.
    fn best_for_offset(&mut self, offset: f64) -> Result<Stage2> {
        let line = [Line { offset, prob: 1.0 }];
        let frames: Vec<usize> = (2..=self.m2).collect();
        let (winner, nodes) = search_frames(
            self.m2,
            &frames,
            self.params,
            &self.bounds,
            Measure::Target,
            &line,
            OneStageOptions::default(),
        )?;
        self.nodes += nodes;
        let w = winner.ok_or_else(|| Error::Infeasible(format!("no stage-2 sequence on {} qubits", self.m2)))?;
        Ok(Stage2 {
            seq: found_sequence(self.m2, w.m, &w.found)?,
            depth: w.found.depth,
            prob: w.found.prob,
        })
    }

    /// Lower envelope of `d ↦ (d + d₂)/P₂` on `[0, upper]`, one stage-2
    /// sequence per piece, found by parametric search.
    fn envelope(&mut self, upper: f64) -> Result<Vec<Stage2>> {
        let left = self.best_for_offset(0.0)?;
        let right = self.best_for_offset(upper)?;
        let mut pieces = vec![left.clone()];
        self.refine(&left, &right, &mut pieces, 0)?;
        if !same_line(&left, &right) {
            pieces.push(right);
        }
        pieces.dedup_by(|a, b| same_line(a, b));
        Ok(pieces)
    }

    fn refine(&mut self, a: &Stage2, b: &Stage2, pieces: &mut Vec<Stage2>, depth: usize) -> Result<()> {
        if same_line(a, b) || (a.prob - b.prob).abs() < 1e-15 || depth > 64 {
            return Ok(());
        }
        // intersection of the two lines
        let x = (b.depth * a.prob - a.depth * b.prob) / (b.prob - a.prob);
        if !(x.is_finite()) || x <= 0.0 {
            return Ok(());
        }
        let at = (x + a.depth) / a.prob;
        let c = self.best_for_offset(x)?;
        let cv = (x + c.depth) / c.prob;
        if cv < at * (1.0 - 1e-12) && !same_line(&c, a) && !same_line(&c, b) {
            self.refine(a, &c, pieces, depth + 1)?;
            pieces.push(c.clone());
            self.refine(&c, b, pieces, depth + 1)?;
        }
        Ok(())
    }
}

fn same_line(a: &Stage2, b: &Stage2) -> bool {
    (a.depth - b.depth).abs() <= 1e-9 * a.depth.max(1.0) && (a.prob - b.prob).abs() <= 1e-12
}

fn stage_bounds(n: usize, alpha: f64, bounds: &EnumerationBounds, cap: Option<u32>) -> EnumerationBounds {
    let mut b = EnumerationBounds::new(n, alpha).with_max_blocks(bounds.max_blocks);
    b.max_oracle_calls = cap.or(bounds.max_oracle_calls);
    b
}

/// Cheap feasible plans used to bound the stage-1 depth range that matters:
/// stage 1 repeats `L^r G` for small `r`.
fn seed_upper(n: usize, m2: usize, params: &DepthParams, bounds: &EnumerationBounds, s2: &Stage2) -> Result<f64> {
    let model = ReducedModel::new(n, m2)?;
    let (cost_global, cost_local) = op_costs(params, n, m2)?;
    let caps = bounds.local_caps();
    let mut best = f64::INFINITY;
    for r in 0..=3u32 {
        let mut amps = model.initial().amps;
        let mut depth = 0.0;
        for k in 1..=bounds.global_limit() {
            let blocks = if r == 0 { 1 } else { 2 * k as usize };
            if r * k > caps[k as usize] || blocks > bounds.max_blocks {
                break;
            }
            for _ in 0..r {
                amps = model.local.apply(amps);
            }
            amps = model.global.apply(amps);
            depth += cost_global + r as f64 * cost_local;
            let p = amps[0] * amps[0] + amps[1] * amps[1];
            if p > 0.0 {
                best = best.min((depth + s2.depth) / (p * s2.prob));
            }
        }
    }
    Ok(best)
}

pub(crate) struct TwoStageWinner {
    pub plan: TwoStagePlan,
    pub nodes: u64,
}

pub(crate) fn two_stage_search(
    n: usize,
    params: &DepthParams,
    bounds: &EnumerationBounds,
    options: &TwoStageOptions,
    require_local: bool,
    threshold: Option<f64>,
    stop_at_threshold: bool,
) -> Result<Option<TwoStageWinner>> {
    let alpha = params.alpha();
    let widths: Vec<usize> = match options.m2 {
        Some(m2) => {
            if m2 < 2 || m2 >= n {
                return Err(Error::InvalidBlockWidth { n, m: m2 });
            }
            vec![m2]
        }
        None => (2..n).collect(),
    };
    let stage1_bounds = stage_bounds(n, alpha, bounds, options.stage1_max_oracle_calls);
    let mut nodes = 0;

    // a feasible plan per width bounds the stage-1 depth range that matters
    let mut upper = threshold.unwrap_or(f64::INFINITY);
    let mut searches = Vec::new();
    for &m2 in &widths {
        let mut s = Stage2Search {
            m2,
            params,
            bounds: stage_bounds(m2, alpha, bounds, options.stage2_max_oracle_calls),
            nodes: 0,
        };
        let base = s.best_for_offset(0.0)?;
        upper = upper.min(seed_upper(n, m2, params, &stage1_bounds, &base)?);
        searches.push(s);
    }
    if !upper.is_finite() {
        return Err(Error::Infeasible(
            "no two-stage plan fits the enumeration bounds".into(),
        ));
    }

    let mut envelopes = Vec::new();
    for s in &mut searches {
        envelopes.push(s.envelope(upper)?);
        nodes += s.nodes;
    }

    let mut initial = upper * (1.0 + 2.0 * TIE_TOLERANCE);
    if let Some(t) = threshold {
        initial = initial.min(t);
    }
    let shared = Shared::new(initial, threshold.filter(|_| stop_at_threshold));
    let problems: Vec<(usize, Problem)> = widths
        .iter()
        .zip(&envelopes)
        .map(|(&m2, env)| {
            let lines = env.iter().map(Stage2::line).collect();
            let mut p = frame_problem(n, m2, params, &stage1_bounds, Measure::Block, lines)?;
            p.require_local = require_local;
            Ok((m2, p))
        })
        .collect::<Result<_>>()?;
    let outcomes: Vec<(usize, search::Outcome)> = problems
        .par_iter()
        .map(|(m2, p)| (*m2, search::run(p, &shared)))
        .collect();
    nodes += outcomes.iter().map(|(_, o)| o.nodes).sum::<u64>();

    let mut best: Option<(Found, TwoStagePlan)> = None;
    for ((m2, outcome), env) in outcomes.into_iter().zip(&envelopes) {
        let Some(found) = outcome.best else { continue };
        let stage1 = found_sequence(n, m2, &found)?;
        let stage2 = env[found.line].seq.clone();
        let plan = TwoStagePlan::new(m2, stage1, stage2)?;
        let replace = match &best {
            None => true,
            Some((f, p)) => compare_plans(&found, &plan, f, p) == CmpOrdering::Less,
        };
        if replace {
            best = Some((found, plan));
        }
    }
    Ok(best.map(|(_, plan)| TwoStageWinner { plan, nodes }))
}

fn plan_key(plan: &TwoStagePlan) -> (u64, usize, Vec<Block>, Vec<Block>) {
    let calls = plan.stage1().operator_counts().oracle_calls + plan.stage2().operator_counts().oracle_calls;
    let blocks = plan.stage1().block_count() + plan.stage2().block_count();
    (
        calls,
        blocks,
        plan.stage1().blocks().to_vec(),
        plan.stage2().blocks().to_vec(),
    )
}

fn compare_plans(fa: &Found, pa: &TwoStagePlan, fb: &Found, pb: &TwoStagePlan) -> CmpOrdering {
    let tol = TIE_TOLERANCE * fa.value.max(fb.value).max(1.0);
    if (fa.value - fb.value).abs() > tol {
        return fa.value.total_cmp(&fb.value);
    }
    plan_key(pa).cmp(&plan_key(pb))
}

/// Exhaustive two-stage search.
pub fn optimize_two_stage(n: usize, params: &DepthParams, bounds: &EnumerationBounds) -> Result<OptResult> {
    optimize_two_stage_with(n, params, bounds, &TwoStageOptions::default())
}

/// Two-stage search with extra restrictions (fixed `m2`, per-stage oracle caps).
pub fn optimize_two_stage_with(
    n: usize,
    params: &DepthParams,
    bounds: &EnumerationBounds,
    options: &TwoStageOptions,
) -> Result<OptResult> {
    check_params(n, params)?;
    if n < 3 {
        return Err(Error::InvalidArgument(format!(
            "two-stage search needs n >= 3, got {n}"
        )));
    }
    let winner = two_stage_search(n, params, bounds, options, false, None, false)?
        .ok_or_else(|| Error::Infeasible("no two-stage plan fits the enumeration bounds".into()))?;
    let mut result = evaluate_plan(&winner.plan, params)?;
    result.nodes = winner.nodes;
    Ok(result)
}

/// Probability, stage depths and expected depth of a given two-stage plan.
pub fn evaluate_plan(plan: &TwoStagePlan, params: &DepthParams) -> Result<OptResult> {
    if plan.n() != params.n() {
        return Err(Error::WidthMismatch(format!(
            "plan acts on {} qubits but the cost model describes {}",
            plan.n(),
            params.n()
        )));
    }
    let p1 = block_success_probability(plan.stage1(), plan.m2())?;
    let p2 = success_probability(plan.stage2())?;
    let d1 = sequence_depth(plan.stage1(), params)?;
    let d2 = sequence_depth(plan.stage2(), params)?;
    let probability = p1 * p2;
    let single_run_depth = d1.total_depth + d2.total_depth;
    Ok(OptResult {
        schedule: Schedule::TwoStage(plan.clone()),
        probability,
        single_run_depth,
        expected_depth: crate::cost::expected_depth(single_run_depth, probability)?,
        med_kind: MedKind::TwoStage,
        stages: vec![
            StageOutcome {
                sequence: plan.stage1().clone(),
                probability: p1,
                depth: d1.total_depth,
                affine: d1.affine,
            },
            StageOutcome {
                sequence: plan.stage2().clone(),
                probability: p2,
                depth: d2.total_depth,
                affine: d2.affine,
            },
        ],
        nodes: 0,
    })
}

/// Evaluates a one-stage sequence under `params`.
pub fn evaluate_sequence(seq: &SequenceSpec, params: &DepthParams) -> Result<OptResult> {
    let kind = if seq.is_pure_grover() {
        MedKind::Grover
    } else {
        MedKind::OneStage
    };
    one_stage_result(seq.clone(), params, kind, 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n: usize, alpha: f64) -> DepthParams {
        DepthParams::linear(n, alpha).unwrap()
    }

    #[test]
    fn grover_examples() {
        let r = optimize_grover(4, &params(4, 1.0)).unwrap();
        assert_eq!(r.schedule.to_string(), "S_4(1,0)");
        assert!((r.expected_depth - 63.47).abs() < 0.01);
        let r = optimize_grover(10, &params(10, 1.0)).unwrap();
        assert_eq!(r.schedule.to_string(), "S_{10}(18,0)");
        assert!((r.expected_depth - 10397.28).abs() < 0.01);
    }

    #[test]
    fn bounds_formulas() {
        let b = EnumerationBounds::new(10, 1.0);
        assert_eq!(b.max_global, 22);
        assert_eq!(b.max_local_for(0), 44);
        assert_eq!(b.max_local_for(6), 32);
        assert_eq!(b.max_blocks, 20);
        let capped = b.with_max_oracle_calls(5);
        assert_eq!(capped.max_local_for(3), 2);
    }

    #[test]
    fn exhaustive_agrees_n5() {
        let p = params(5, 1.0);
        let b = EnumerationBounds::new(5, 1.0);
        let fast = optimize_one_stage(5, &p, &b).unwrap();
        let slow = exhaustive_one_stage(5, &p, &b).unwrap();
        assert_eq!(fast.schedule, slow.schedule);
    }

    #[test]
    fn one_stage_n6() {
        let p = params(6, 1.0);
        let r = optimize_one_stage(6, &p, &EnumerationBounds::new(6, 1.0)).unwrap();
        assert_eq!(r.schedule.to_string(), "S_{6,4}(1,1,2)");
        assert!((r.expected_depth - 476.97).abs() < 0.01);
    }

    #[test]
    fn two_stage_n4() {
        let p = params(4, 1.0);
        let r = optimize_two_stage(4, &p, &EnumerationBounds::new(4, 1.0)).unwrap();
        assert_eq!(r.schedule.to_string(), "S_{4,2}(1,1) | S_2(1,0)");
        assert!((r.expected_depth - 69.25).abs() < 0.01);
    }
}
