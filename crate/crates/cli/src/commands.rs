use qsearch::critical::{critical_alpha_with, CriticalMode, CriticalOptions, CriticalResult};
use qsearch::optimizer::{
    evaluate_plan, evaluate_sequence, optimize_grover, optimize_one_stage, optimize_two_stage_with, EnumerationBounds,
    OptResult, TwoStageOptions,
};
use qsearch::parallel::{self, ParallelPlan, Strategy};
use qsearch::statevector::{block_address_probability, run_sequence_full, run_two_stage_full};
use qsearch::{DepthParams, SequenceSpec, TargetSpec, TwoStagePlan};

use crate::table::{Cell, Table};
use crate::{
    Backend, CriticalArgs, Failure, OptMode, OptimizeArgs, ParallelArgs, SimulateArgs, Tables, TablesArgs, Which,
};

fn bounds(n: usize, alpha: f64, max_blocks: Option<usize>) -> EnumerationBounds {
    let b = EnumerationBounds::new(n, alpha);
    match max_blocks {
        Some(q) => b.with_max_blocks(q),
        None => b,
    }
}

fn check_range(lo: usize, hi: usize, min: usize) -> Result<(), Failure> {
    if lo < min || hi < lo {
        return Err(Failure::Usage(format!(
            "invalid range {lo}..={hi} (need {min} <= n-min <= n-max)"
        )));
    }
    Ok(())
}

struct Row {
    n: usize,
    grover: OptResult,
    one: OptResult,
    two: OptResult,
}

pub fn tables(args: &TablesArgs, tables: &Tables) -> Result<Vec<Table>, Failure> {
    check_range(args.n_min, args.n_max, 4)?;
    let want = |w: Which| args.table == Which::All || args.table == w;
    let alpha = args.alpha;
    let mut out = Vec::new();

    let needs_opt = [Which::Grover, Which::OneStage, Which::TwoStage, Which::Curves]
        .into_iter()
        .any(want);
    let mut rows = Vec::new();
    if needs_opt {
        for n in args.n_min..=args.n_max {
            let params = DepthParams::new(n, alpha, tables.for_width(n))?;
            let b = bounds(n, alpha, args.max_blocks);
            rows.push(Row {
                n,
                grover: optimize_grover(n, &params)?,
                one: if want(Which::OneStage) || want(Which::Curves) {
                    optimize_one_stage(n, &params, &b)?
                } else {
                    optimize_grover(n, &params)?
                },
                two: if want(Which::TwoStage) || want(Which::Curves) {
                    optimize_two_stage_with(n, &params, &b, &TwoStageOptions::default())?
                } else {
                    optimize_grover(n, &params)?
                },
            });
        }
    }

    if want(Which::Grover) {
        let mut t = Table::new(
            "grover",
            &format!("Grover's algorithm, alpha = {alpha}"),
            &[
                ("n", "n"),
                ("sequence", "Optimal sequence"),
                ("probability", "Success probability"),
                ("depth", "Single-run depth"),
                ("med", "d_G"),
            ],
        );
        for r in &rows {
            t.push(one_stage_row(r.n, &r.grover));
        }
        out.push(t);
    }
    if want(Which::OneStage) {
        let mut t = Table::new(
            "one_stage",
            &format!("One-stage search with local diffusion, alpha = {alpha}"),
            &[
                ("n", "n"),
                ("sequence", "Optimal sequence"),
                ("probability", "Success probability"),
                ("depth", "Single-run depth"),
                ("med", "d_1"),
            ],
        );
        for r in &rows {
            t.push(one_stage_row(r.n, &r.one));
        }
        out.push(t);
    }
    if want(Which::TwoStage) {
        let mut t = Table::new(
            "two_stage",
            &format!("Two-stage search, alpha = {alpha}"),
            &[
                ("n", "n"),
                ("stage1", "Stage 1"),
                ("stage2", "Stage 2"),
                ("probability1", "P stage 1"),
                ("probability2", "P stage 2"),
                ("depth1", "Depth stage 1"),
                ("depth2", "Depth stage 2"),
                ("med", "d_2"),
            ],
        );
        for r in &rows {
            let s = &r.two.stages;
            t.push(vec![
                Cell::Int(r.n as u64),
                s[0].sequence.to_string().into(),
                s[1].sequence.to_string().into(),
                Cell::Prob(s[0].probability),
                Cell::Prob(s[1].probability),
                Cell::Real(s[0].depth),
                Cell::Real(s[1].depth),
                Cell::Med(r.two.expected_depth),
            ]);
        }
        out.push(t);
    }
    if want(Which::Critical) {
        let mut t = Table::new(
            "critical",
            "Critical ratios",
            &[("n", "n"), ("alpha_c1", "alpha_c,1"), ("alpha_c2", "alpha_c,2")],
        );
        t.transpose_md = true;
        for n in args.n_min..=args.n_max {
            let table = tables.for_width(n);
            let opts = CriticalOptions::default();
            let one = critical_alpha_with(n, CriticalMode::OneStage, &table, &opts)?;
            let two = critical_alpha_with(n, CriticalMode::TwoStage, &table, &opts)?;
            t.push(vec![Cell::Int(n as u64), ratio_cell(&one), ratio_cell(&two)]);
        }
        out.push(t);
    }
    if want(Which::Curves) {
        let mut t = Table::new(
            "depth_curves",
            &format!("Expected and single-run depths, alpha = {alpha}"),
            &[
                ("n", "n"),
                ("d_g", "d_G"),
                ("d_1", "d_1"),
                ("d_2", "d_2"),
                ("depth_g", "Depth Grover"),
                ("depth_1", "Depth one-stage"),
                ("depth_2_stage1", "Depth stage 1"),
                ("depth_2_stage2", "Depth stage 2"),
            ],
        );
        for r in &rows {
            t.push(vec![
                Cell::Int(r.n as u64),
                Cell::Med(r.grover.expected_depth),
                Cell::Med(r.one.expected_depth),
                Cell::Med(r.two.expected_depth),
                Cell::Real(r.grover.single_run_depth),
                Cell::Real(r.one.single_run_depth),
                Cell::Real(r.two.stages[0].depth),
                Cell::Real(r.two.stages[1].depth),
            ]);
        }
        out.push(t);
    }
    Ok(out)
}

fn one_stage_row(n: usize, r: &OptResult) -> Vec<Cell> {
    vec![
        Cell::Int(n as u64),
        r.schedule.to_string().into(),
        Cell::Prob(r.probability),
        Cell::Real(r.single_run_depth),
        Cell::Med(r.expected_depth),
    ]
}

fn ratio_cell(r: &CriticalResult) -> Cell {
    match r.alpha_c {
        Some(a) => Cell::Real(a),
        None => Cell::Missing,
    }
}

pub fn optimize(args: &OptimizeArgs, tables: &Tables) -> Result<Table, Failure> {
    let n = args.n;
    let params = DepthParams::new(n, args.alpha, tables.for_width(n))?;
    let b = bounds(n, args.alpha, args.max_blocks);
    let r = match args.mode {
        OptMode::Grover => optimize_grover(n, &params)?,
        OptMode::OneStage => optimize_one_stage(n, &params, &b)?,
        OptMode::TwoStage => {
            let opts = TwoStageOptions {
                m2: args.stage2_width,
                ..TwoStageOptions::default()
            };
            optimize_two_stage_with(n, &params, &b, &opts)?
        }
    };
    let mut t = Table::new(
        "optimize",
        &format!("Optimal {} schedule, n = {n}, alpha = {}", r.med_kind, args.alpha),
        &[
            ("n", "n"),
            ("alpha", "alpha"),
            ("kind", "Kind"),
            ("schedule", "Schedule"),
            ("stage_probabilities", "Stage probabilities"),
            ("probability", "Success probability"),
            ("depth", "Single-run depth"),
            ("med", "MED"),
            ("nodes", "Nodes"),
        ],
    );
    let stage_probs = r
        .stages
        .iter()
        .map(|s| format!("{:.6}", s.probability))
        .collect::<Vec<_>>()
        .join(" ");
    t.push(vec![
        Cell::Int(n as u64),
        Cell::Real(args.alpha),
        r.med_kind.to_string().into(),
        r.schedule.to_string().into(),
        stage_probs.into(),
        Cell::Prob(r.probability),
        Cell::Real(r.single_run_depth),
        Cell::Med(r.expected_depth),
        Cell::Int(r.nodes),
    ]);
    Ok(t)
}

fn target_for(n: usize, bits: Option<&str>) -> Result<TargetSpec, Failure> {
    match bits {
        Some(s) => {
            let t: TargetSpec = s.parse()?;
            if t.n() != n {
                return Err(Failure::Usage(format!(
                    "target `{s}` has {} bits, the sequence acts on {n}",
                    t.n()
                )));
            }
            Ok(t)
        }
        None => Ok(TargetSpec::zeros(n)?),
    }
}

pub fn simulate(args: &SimulateArgs, tables: &Tables) -> Result<Table, Failure> {
    let backend = match args.backend {
        Backend::Reduced => "reduced",
        Backend::Full => "full",
    };
    let mut t = Table::new(
        "simulate",
        &format!("Simulation of {} ({backend} backend)", args.sequence.trim()),
        &[
            ("sequence", "Sequence"),
            ("backend", "Backend"),
            ("probability", "Success probability"),
            ("block_probability", "Block probability"),
            ("stage2_probability", "Stage-2 probability"),
            ("oracle_calls", "Oracle calls"),
            ("depth", "Depth"),
            ("med", "Expected depth"),
        ],
    );
    if args.sequence.contains('|') {
        let plan: TwoStagePlan = args.sequence.parse()?;
        let n = plan.n();
        let params = DepthParams::new(n, args.alpha, tables.for_width(n))?;
        let reduced = evaluate_plan(&plan, &params)?;
        let (p1, p2) = match args.backend {
            Backend::Reduced => (reduced.stages[0].probability, reduced.stages[1].probability),
            Backend::Full => run_two_stage_full(&plan, &target_for(n, args.target.as_deref())?)?,
        };
        let calls = plan.stage1().operator_counts().oracle_calls + plan.stage2().operator_counts().oracle_calls;
        t.push(vec![
            plan.to_string().into(),
            backend.into(),
            Cell::Prob(p1 * p2),
            Cell::Prob(p1),
            Cell::Prob(p2),
            Cell::Int(calls),
            Cell::Real(reduced.single_run_depth),
            Cell::Med(reduced.single_run_depth / (p1 * p2)),
        ]);
        return Ok(t);
    }
    let seq: SequenceSpec = args.sequence.parse()?;
    let n = seq.n();
    let params = DepthParams::new(n, args.alpha, tables.for_width(n))?;
    let reduced = evaluate_sequence(&seq, &params)?;
    let (p, block) = match args.backend {
        Backend::Reduced => {
            let block = match seq.local_width() {
                Some(m) => Some(qsearch::dynamics::block_success_probability(&seq, m)?),
                None => None,
            };
            (reduced.probability, block)
        }
        Backend::Full => {
            let target = target_for(n, args.target.as_deref())?;
            let state = run_sequence_full(&seq, &target)?;
            let block = match seq.local_width() {
                Some(m) => Some(block_address_probability(&state, m, &target)?),
                None => None,
            };
            (state.probability(target.index()), block)
        }
    };
    t.push(vec![
        seq.to_string().into(),
        backend.into(),
        Cell::Prob(p),
        block.map_or(Cell::Missing, Cell::Prob),
        Cell::Missing,
        Cell::Int(seq.operator_counts().oracle_calls),
        Cell::Real(reduced.single_run_depth),
        if p > 0.0 {
            Cell::Med(reduced.single_run_depth / p)
        } else {
            Cell::Missing
        },
    ]);
    Ok(t)
}

pub fn critical(args: &CriticalArgs, tables: &Tables) -> Result<Table, Failure> {
    let (lo, hi) = match args.n {
        Some(n) => (n, n),
        None => (args.n_min, args.n_max),
    };
    check_range(lo, hi, 3)?;
    let stage2_width = match args.stage2_width.as_str() {
        "any" => None,
        w => Some(
            w.parse::<usize>()
                .map_err(|_| Failure::Usage(format!("--stage2-width expects an integer or `any`, got `{w}`")))?,
        ),
    };
    let opts = CriticalOptions {
        tol: args.tol,
        floor: args.floor,
        max_blocks: args.max_blocks,
        stage2_width,
        search: args.search,
        ..CriticalOptions::default()
    };
    let mut t = Table::new(
        "critical",
        &format!("Critical ratio, {} schedules", args.mode),
        &[
            ("n", "n"),
            ("mode", "Mode"),
            ("alpha_c", "alpha_c"),
            ("witness", "Witness schedule"),
            ("witness_med", "Witness MED"),
            ("below", "Beats Grover at alpha_c - tol"),
            ("above", "Beats Grover at alpha_c + tol"),
            ("evaluations", "Evaluations"),
        ],
    );
    for n in lo..=hi {
        let r = critical_alpha_with(n, args.mode, &tables.for_width(n), &opts)?;
        let (below, above) = match r.bracket {
            Some((a, b)) => (Cell::Bool(a), Cell::Bool(b)),
            None => (Cell::Missing, Cell::Missing),
        };
        t.push(vec![
            Cell::Int(n as u64),
            args.mode.to_string().into(),
            ratio_cell(&r),
            r.witness
                .as_ref()
                .map_or(Cell::Missing, |w| w.schedule.to_string().into()),
            r.witness
                .as_ref()
                .map_or(Cell::Missing, |w| Cell::Med(w.expected_depth)),
            below,
            above,
            Cell::Int(r.evaluations as u64),
        ]);
    }
    Ok(t)
}

pub fn parallel(args: &ParallelArgs, tables: &Tables) -> Result<Table, Failure> {
    let n = args.n;
    let params = DepthParams::new(n, args.alpha, tables.for_width(n))?;
    let plan: ParallelPlan = match args.strategy {
        Strategy::Replicated => {
            let threshold = args
                .threshold
                .ok_or_else(|| Failure::Usage("the replicated strategy needs --threshold".into()))?;
            parallel::plan_replicated(n, &params, args.machines, threshold)?
        }
        Strategy::RandomGuess => {
            let g = args
                .guess_bits
                .ok_or_else(|| Failure::Usage("the guess strategy needs --guess-bits".into()))?;
            parallel::plan_random_guess(n, &params, args.machines, g)?
        }
        Strategy::MultistagePartition => {
            let threshold = args
                .threshold
                .unwrap_or_else(|| parallel::default_partition_threshold(n));
            parallel::plan_multistage_partition(n, &params, args.machines, threshold)?
        }
    };
    let mut t = Table::new(
        "parallel",
        &format!(
            "{} plan on {} machines, n = {n}, alpha = {}",
            plan.strategy, plan.machines, args.alpha
        ),
        &[
            ("strategy", "Strategy"),
            ("machines", "Machines"),
            ("busy", "Busy machines"),
            ("sequence", "Per-machine sequence"),
            ("machine_probability", "Per-machine probability"),
            ("success_per_round", "Success per round"),
            ("expected_rounds", "Expected rounds"),
            ("round_depth", "Round depth"),
            ("expected_depth", "Expected depth"),
            ("notes", "Notes"),
        ],
    );
    let task = &plan.per_machine[0];
    let notes = plan
        .notes
        .iter()
        .map(|n| match n {
            parallel::PlanNote::SpeedupLost => "speedup-lost",
            parallel::PlanNote::DominatedByRandomGuess => "dominated-by-random-guess",
        })
        .collect::<Vec<_>>()
        .join(" ");
    t.push(vec![
        plan.strategy.to_string().into(),
        Cell::Int(plan.machines as u64),
        Cell::Int(plan.per_machine.len() as u64),
        task.sequence.to_string().into(),
        Cell::Prob(task.probability),
        Cell::Prob(plan.success_per_round),
        Cell::Real(plan.expected_rounds),
        Cell::Real(plan.round_depth),
        Cell::Med(plan.expected_depth),
        notes.into(),
    ]);
    Ok(t)
}
