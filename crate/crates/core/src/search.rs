//! Branch-and-bound over operator strings in one reduced frame.
//!
//! A node is a prefix of operators; every node is also a candidate sequence.
//! Nodes are scored by `E(depth) / P` where `P` is the target or block
//! probability and `E` is an increasing concave piecewise-linear function
//! (`E(d) = d` for plain expected depth; a stage-2 envelope for two-stage
//! search).
//!
//! The bound relies on three facts about the reduced generators:
//! a global operator moves the angle between the state and the `±|t>` line
//! by at most `2θ`, and the angle to the `{|t>, |ntt>}` plane by at most
//! `2γ`; a local operator is a rotation by `2θ₂` about `|u>`, so it moves the
//! first angle by at most `2θ₂` and leaves the second unchanged.

use std::cmp::Ordering as CmpOrdering;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};

use crate::dynamics::ReducedModel;
use crate::sequence::{Block, OpKind};

/// Relative window inside which two expected depths count as tied.
pub(crate) const TIE_TOLERANCE: f64 = 1e-9;

/// Multiplicative slack on probability upper bounds (rounding in the angles).
const BOUND_SLACK: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Measure {
    /// `|<t|ψ>|²`.
    Target,
    /// Weight of the target's block.
    Block,
}

/// One piece of the depth transform: `d ↦ (d + offset) / prob`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Line {
    pub offset: f64,
    pub prob: f64,
}

impl Line {
    pub const IDENTITY: Line = Line { offset: 0.0, prob: 1.0 };

    fn at(&self, d: f64) -> f64 {
        (d + self.offset) / self.prob
    }
}

/// Lower envelope of lines; returns the value and the index of the minimizing line.
pub(crate) fn envelope_at(lines: &[Line], d: f64) -> (f64, usize) {
    let mut best = (f64::INFINITY, 0);
    for (i, l) in lines.iter().enumerate() {
        let v = l.at(d);
        if v < best.0 {
            best = (v, i);
        }
    }
    best
}

/// Everything that defines one search.
#[derive(Debug, Clone)]
pub(crate) struct Problem {
    pub model: ReducedModel,
    pub measure: Measure,
    pub allow_local: bool,
    pub cost_global: f64,
    pub cost_local: f64,
    pub max_global: u32,
    /// `local_cap[g]`: most locals allowed in a sequence with `g` globals.
    pub local_cap: Vec<u32>,
    pub max_blocks: usize,
    pub require_local: bool,
    pub prob_cap: Option<f64>,
    pub envelope: Vec<Line>,
}

/// A scored candidate.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Found {
    pub value: f64,
    pub prob: f64,
    pub depth: f64,
    pub line: usize,
    pub blocks: Vec<Block>,
    pub oracle_calls: u32,
}

/// Total order used to pick a winner: lower value, and inside the tie window
/// fewer oracle calls, fewer blocks, then the lexicographically smaller block
/// list.
pub(crate) fn compare(a: &Found, b: &Found) -> CmpOrdering {
    let tol = TIE_TOLERANCE * a.value.abs().max(b.value.abs()).max(1.0);
    if (a.value - b.value).abs() > tol {
        return a.value.partial_cmp(&b.value).unwrap_or(CmpOrdering::Equal);
    }
    a.oracle_calls
        .cmp(&b.oracle_calls)
        .then(a.blocks.len().cmp(&b.blocks.len()))
        .then_with(|| a.blocks.cmp(&b.blocks))
}

pub(crate) fn better(candidate: &Found, incumbent: Option<&Found>) -> bool {
    match incumbent {
        None => true,
        Some(inc) => compare(candidate, inc) == CmpOrdering::Less,
    }
}

/// State shared by workers searching in parallel.
#[derive(Debug)]
pub(crate) struct Shared {
    incumbent: AtomicU64,
    stop: AtomicBool,
    /// Stop everything once a candidate scores strictly below this.
    stop_below: Option<f64>,
}

impl Shared {
    pub fn new(initial_bound: f64, stop_below: Option<f64>) -> Self {
        Self {
            incumbent: AtomicU64::new(initial_bound.to_bits()),
            stop: AtomicBool::new(false),
            stop_below,
        }
    }

    pub fn incumbent(&self) -> f64 {
        f64::from_bits(self.incumbent.load(Ordering::Relaxed))
    }

    fn offer(&self, value: f64) {
        // non-negative floats order like their bit patterns
        self.incumbent.fetch_min(value.to_bits(), Ordering::Relaxed);
        if let Some(limit) = self.stop_below {
            if value < limit {
                self.stop.store(true, Ordering::Relaxed);
            }
        }
    }

    pub fn stopped(&self) -> bool {
        self.stop.load(Ordering::Relaxed)
    }
}

pub(crate) struct Outcome {
    pub best: Option<Found>,
    pub nodes: u64,
}

struct Bounds {
    two_theta: f64,
    two_theta2: f64,
    two_gamma: f64,
}

struct Searcher<'a> {
    problem: &'a Problem,
    shared: &'a Shared,
    bounds: Bounds,
    path: Vec<OpKind>,
    best: Option<Found>,
    nodes: u64,
}

fn to_blocks(path: &[OpKind]) -> Vec<Block> {
    let mut blocks: Vec<Block> = Vec::new();
    for &k in path {
        match blocks.last_mut() {
            Some(b) if b.kind == k => b.count += 1,
            _ => blocks.push(Block { kind: k, count: 1 }),
        }
    }
    blocks
}

/// Depth of `dl` locals; zero locals cost nothing even where locals are unavailable.
fn local_cost(p: &Problem, dl: u32) -> f64 {
    if dl == 0 {
        0.0
    } else {
        dl as f64 * p.cost_local
    }
}

impl Searcher<'_> {
    fn probability(&self, a: &[f64; 3]) -> f64 {
        match self.problem.measure {
            Measure::Target => a[0] * a[0],
            Measure::Block => a[0] * a[0] + a[1] * a[1],
        }
    }

    fn incumbent(&self) -> f64 {
        let shared = self.shared.incumbent();
        match &self.best {
            Some(b) => b.value.min(shared),
            None => shared,
        }
    }

    fn consider(&mut self, amps: &[f64; 3], depth: f64, locals: u32) {
        let p = self.problem;
        if p.require_local && locals == 0 {
            return;
        }
        let prob = self.probability(amps);
        if prob <= 0.0 {
            return;
        }
        if let Some(cap) = p.prob_cap {
            if prob > cap + 1e-12 {
                return;
            }
        }
        // every stage must query the oracle at least once
        if self.path.is_empty() {
            return;
        }
        let (e, line) = envelope_at(&p.envelope, depth);
        let value = e / prob;
        let inc = self.incumbent();
        if value > inc + TIE_TOLERANCE * inc.max(1.0) {
            return;
        }
        let found = Found {
            value,
            prob,
            depth,
            line,
            blocks: to_blocks(&self.path),
            oracle_calls: self.path.len() as u32,
        };
        if better(&found, self.best.as_ref()) {
            self.shared.offer(value);
            self.best = Some(found);
        }
    }

    /// Lower bound on the score of every strict extension of this node.
    fn lower_bound(&self, amps: &[f64; 3], depth: f64, g: u32, l: u32) -> f64 {
        let p = self.problem;
        let b = &self.bounds;
        let in_block = (amps[0] * amps[0] + amps[1] * amps[1]).sqrt();
        // angle to the {t, ntt} plane
        let psi = amps[2].abs().atan2(in_block);
        // angle to the ±t line
        let phi = (amps[1] * amps[1] + amps[2] * amps[2]).sqrt().atan2(amps[0].abs());
        let mut best = f64::INFINITY;
        let g_room = p.max_global - g;
        for dg in 0..=g_room {
            let cap = p.local_cap[(g + dg) as usize];
            if cap < l {
                break;
            }
            let l_room = if p.allow_local { cap - l } else { 0 };
            let pu = {
                let a = (psi - b.two_gamma * dg as f64).max(0.0);
                a.cos().powi(2)
            };
            let base = depth + dg as f64 * p.cost_global;
            match p.measure {
                Measure::Block => {
                    // locals never change the block weight
                    let dl = if dg == 0 { 1 } else { 0 };
                    if dl > l_room {
                        continue;
                    }
                    let d = base + local_cost(p, dl);
                    let v = envelope_at(&p.envelope, d).0 / (pu * (1.0 + BOUND_SLACK));
                    best = best.min(v);
                }
                Measure::Target => {
                    let start = if dg == 0 { 1 } else { 0 };
                    let turned = phi - b.two_theta * dg as f64;
                    for dl in start..=l_room {
                        let a = (turned - b.two_theta2 * dl as f64).max(0.0);
                        let pt = a.cos().powi(2);
                        let pmax = pu.min(pt) * (1.0 + BOUND_SLACK);
                        let d = base + local_cost(p, dl);
                        best = best.min(envelope_at(&p.envelope, d).0 / pmax);
                        if pt >= pu {
                            break;
                        }
                    }
                }
            }
            if best <= 0.0 {
                break;
            }
        }
        best
    }

    fn dfs(&mut self, amps: [f64; 3], depth: f64, g: u32, l: u32, blocks: usize) {
        if self.shared.stopped() {
            return;
        }
        self.nodes += 1;
        self.consider(&amps, depth, l);
        let inc = self.incumbent();
        if inc.is_finite() && self.lower_bound(&amps, depth, g, l) > inc + TIE_TOLERANCE * inc.max(1.0) {
            return;
        }
        let p = self.problem;
        let last = self.path.last().copied();
        let opens = |k: OpKind| usize::from(last != Some(k));
        let can_global =
            g < p.max_global && l <= p.local_cap[(g + 1) as usize] && blocks + opens(OpKind::Global) <= p.max_blocks;
        let can_local = p.allow_local && l < p.local_cap[g as usize] && blocks + opens(OpKind::Local) <= p.max_blocks;

        let mut children: [(OpKind, [f64; 3], f64); 2] = [(OpKind::Global, amps, 0.0); 2];
        let mut count = 0;
        if can_global {
            let a = p.model.global.apply(amps);
            children[count] = (OpKind::Global, a, self.probability(&a));
            count += 1;
        }
        if can_local {
            let a = p.model.local.apply(amps);
            children[count] = (OpKind::Local, a, self.probability(&a));
            count += 1;
        }
        // more promising child first
        if count == 2 && children[1].2 > children[0].2 {
            children.swap(0, 1);
        }
        for &(kind, a, _) in &children[..count] {
            let (ng, nl, cost) = match kind {
                OpKind::Global => (g + 1, l, p.cost_global),
                OpKind::Local => (g, l + 1, p.cost_local),
            };
            self.path.push(kind);
            self.dfs(a, depth + cost, ng, nl, blocks + opens(kind));
            self.path.pop();
        }
    }
}

/// Exhaustive branch-and-bound from `|s_n>` in `problem`'s frame.
pub(crate) fn run(problem: &Problem, shared: &Shared) -> Outcome {
    let angles = problem.model.angles;
    let mut s = Searcher {
        problem,
        shared,
        bounds: Bounds {
            two_theta: 2.0 * angles.theta,
            two_theta2: 2.0 * angles.theta2,
            two_gamma: if angles.n == angles.m {
                std::f64::consts::PI
            } else {
                2.0 * angles.gamma
            },
        },
        path: Vec::new(),
        best: None,
        nodes: 0,
    };
    let start = problem.model.initial().amps;
    s.dfs(start, 0.0, 0, 0, 0);
    Outcome {
        best: s.best,
        nodes: s.nodes,
    }
}

/// Plain enumeration of every sequence allowed by `problem` (no pruning).
/// Calls `visit(blocks, probability, depth)` for each node.
pub(crate) fn enumerate_all(problem: &Problem, mut visit: impl FnMut(&[OpKind], f64, f64)) {
    #[allow(clippy::too_many_arguments)]
    fn go(
        p: &Problem,
        amps: [f64; 3],
        depth: f64,
        g: u32,
        l: u32,
        blocks: usize,
        path: &mut Vec<OpKind>,
        visit: &mut dyn FnMut(&[OpKind], f64, f64),
    ) {
        let prob = match p.measure {
            Measure::Target => amps[0] * amps[0],
            Measure::Block => amps[0] * amps[0] + amps[1] * amps[1],
        };
        visit(path, prob, depth);
        let last = path.last().copied();
        let opens = |k: OpKind| usize::from(last != Some(k));
        if g < p.max_global && l <= p.local_cap[(g + 1) as usize] && blocks + opens(OpKind::Global) <= p.max_blocks {
            path.push(OpKind::Global);
            go(
                p,
                p.model.global.apply(amps),
                depth + p.cost_global,
                g + 1,
                l,
                blocks + opens(OpKind::Global),
                path,
                visit,
            );
            path.pop();
        }
        if p.allow_local && l < p.local_cap[g as usize] && blocks + opens(OpKind::Local) <= p.max_blocks {
            path.push(OpKind::Local);
            go(
                p,
                p.model.local.apply(amps),
                depth + p.cost_local,
                g,
                l + 1,
                blocks + opens(OpKind::Local),
                path,
                visit,
            );
            path.pop();
        }
    }
    let mut path = Vec::new();
    go(
        problem,
        problem.model.initial().amps,
        0.0,
        0,
        0,
        0,
        &mut path,
        &mut visit,
    );
}

pub(crate) fn blocks_of(path: &[OpKind]) -> Vec<Block> {
    to_blocks(path)
}

/// Sequences whose probability reaches `threshold`, ranked by most local
/// operators, then least depth, then the usual tie-break.
pub(crate) fn most_locals(problem: &Problem, threshold: f64) -> Option<Found> {
    struct Walk<'a> {
        p: &'a Problem,
        two_gamma: f64,
        threshold: f64,
        path: Vec<OpKind>,
        best: Option<(u32, Found)>,
    }

    impl Walk<'_> {
        fn prob(&self, a: &[f64; 3]) -> f64 {
            match self.p.measure {
                Measure::Target => a[0] * a[0],
                Measure::Block => a[0] * a[0] + a[1] * a[1],
            }
        }

        fn ranks_above(&self, locals: u32, depth: f64, found: &Found) -> bool {
            match &self.best {
                None => true,
                Some((bl, bf)) => {
                    locals > *bl
                        || (locals == *bl
                            && (depth < bf.depth - TIE_TOLERANCE * bf.depth.max(1.0)
                                || ((depth - bf.depth).abs() <= TIE_TOLERANCE * bf.depth.max(1.0)
                                    && compare(found, bf) == CmpOrdering::Less)))
                }
            }
        }

        fn go(&mut self, amps: [f64; 3], depth: f64, g: u32, l: u32, blocks: usize) {
            let p = self.p;
            let prob = self.prob(&amps);
            if !self.path.is_empty() && prob >= self.threshold {
                let found = Found {
                    value: depth / prob,
                    prob,
                    depth,
                    line: 0,
                    blocks: to_blocks(&self.path),
                    oracle_calls: self.path.len() as u32,
                };
                if self.ranks_above(l, depth, &found) {
                    self.best = Some((l, found));
                }
            }
            // the block weight only moves under globals, by at most 2γ each
            let in_block = (amps[0] * amps[0] + amps[1] * amps[1]).sqrt();
            let psi = amps[2].abs().atan2(in_block);
            let reach = (0..=p.max_global - g)
                .filter(|&dg| p.local_cap[(g + dg) as usize] >= l)
                .map(|dg| (psi - self.two_gamma * dg as f64).max(0.0).cos().powi(2))
                .fold(0.0, f64::max);
            if reach * (1.0 + BOUND_SLACK) < self.threshold {
                return;
            }
            if let Some((bl, bf)) = &self.best {
                let most = if p.allow_local { p.local_cap[g as usize] } else { l };
                if most < *bl {
                    return;
                }
                let floor = depth + local_cost(p, *bl - l.min(*bl));
                if most == *bl && floor > bf.depth + TIE_TOLERANCE * bf.depth.max(1.0) {
                    return;
                }
            }
            let last = self.path.last().copied();
            let opens = |k: OpKind| usize::from(last != Some(k));
            if p.allow_local && l < p.local_cap[g as usize] && blocks + opens(OpKind::Local) <= p.max_blocks {
                self.path.push(OpKind::Local);
                self.go(
                    p.model.local.apply(amps),
                    depth + p.cost_local,
                    g,
                    l + 1,
                    blocks + opens(OpKind::Local),
                );
                self.path.pop();
            }
            if g < p.max_global && l <= p.local_cap[(g + 1) as usize] && blocks + opens(OpKind::Global) <= p.max_blocks
            {
                self.path.push(OpKind::Global);
                self.go(
                    p.model.global.apply(amps),
                    depth + p.cost_global,
                    g + 1,
                    l,
                    blocks + opens(OpKind::Global),
                );
                self.path.pop();
            }
        }
    }

    let mut walk = Walk {
        p: problem,
        two_gamma: if problem.model.angles.n == problem.model.angles.m {
            std::f64::consts::PI
        } else {
            2.0 * problem.model.angles.gamma
        },
        threshold,
        path: Vec::new(),
        best: None,
    };
    walk.go(problem.model.initial().amps, 0.0, 0, 0, 0);
    walk.best.map(|(_, f)| f)
}
