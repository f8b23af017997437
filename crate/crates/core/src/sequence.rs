//! Operator sequences `S_{n,m}(j_1, ..., j_q)` and two-stage plans.
//!
//! Internally a sequence is a list of blocks in application order: the first
//! block acts first on `|s_n>`. The tuple notation only exists at the text
//! boundary. There the last entry `j_q` always counts local operators, the
//! entries alternate between local and global going leftwards, and the
//! rightmost entry acts first:
//!
//! ```
//! use qsearch::{Block, SequenceSpec};
//!
//! // S_{6,4}(1,1,2) = G_4 G_6 G_4^2: two locals, then one global, then one local.
//! let s: SequenceSpec = "S_{6,4}(1,1,2)".parse().unwrap();
//! assert_eq!(s.blocks(), &[Block::local(2), Block::global(1), Block::local(1)]);
//! assert_eq!(s.to_string(), "S_{6,4}(1,1,2)");
//! ```

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which diffusion follows the oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum OpKind {
    /// `G_n = D_n U_t`.
    Global,
    /// `G_m = D_{n,m} U_t`, reflecting about the mean of each `2^m` block.
    Local,
}

impl OpKind {
    pub fn other(self) -> Self {
        match self {
            OpKind::Global => OpKind::Local,
            OpKind::Local => OpKind::Global,
        }
    }
}

/// A run of `count` identical operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Block {
    pub kind: OpKind,
    pub count: u32,
}

impl Block {
    pub fn global(count: u32) -> Self {
        Self {
            kind: OpKind::Global,
            count,
        }
    }

    pub fn local(count: u32) -> Self {
        Self {
            kind: OpKind::Local,
            count,
        }
    }
}

/// Oracle, global and local operator counts of a sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct OperatorCounts {
    pub oracle_calls: u64,
    pub globals: u64,
    pub locals: u64,
}

/// A normalized sequence of global and local Grover operators on `n` qubits.
///
/// Normalization drops empty blocks and merges neighbours of the same kind,
/// so adjacent blocks always alternate. `local_width` is `Some(m)` exactly
/// when the sequence contains a local operator.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SequenceSpec {
    n: usize,
    local_width: Option<usize>,
    blocks: Vec<Block>,
}

impl SequenceSpec {
    /// Builds and normalizes a sequence. `local_width` is required when any
    /// block is a nonempty local block, and ignored otherwise.
    pub fn new(n: usize, local_width: Option<usize>, blocks: impl IntoIterator<Item = Block>) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidSequence("n must be at least 1".into()));
        }
        let mut normalized: Vec<Block> = Vec::new();
        for b in blocks {
            if b.count == 0 {
                continue;
            }
            match normalized.last_mut() {
                Some(last) if last.kind == b.kind => last.count += b.count,
                _ => normalized.push(b),
            }
        }
        let has_local = normalized.iter().any(|b| b.kind == OpKind::Local);
        let local_width = if has_local {
            match local_width {
                None => return Err(Error::InvalidSequence("local operators need a block width m".into())),
                Some(m) if m < 2 || m >= n => return Err(Error::InvalidBlockWidth { n, m }),
                Some(m) => Some(m),
            }
        } else {
            None
        };
        Ok(Self {
            n,
            local_width,
            blocks: normalized,
        })
    }

    /// `S_n(j, 0) = G_n^j`.
    pub fn grover(n: usize, j: u32) -> Self {
        Self {
            n,
            local_width: None,
            blocks: if j == 0 { vec![] } else { vec![Block::global(j)] },
        }
    }

    pub fn empty(n: usize) -> Self {
        Self::grover(n, 0)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn local_width(&self) -> Option<usize> {
        self.local_width
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn is_pure_grover(&self) -> bool {
        self.local_width.is_none()
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    /// Individual operators in application order.
    pub fn ops(&self) -> impl Iterator<Item = OpKind> + '_ {
        self.blocks
            .iter()
            .flat_map(|b| std::iter::repeat_n(b.kind, b.count as usize))
    }

    pub fn operator_counts(&self) -> OperatorCounts {
        let mut c = OperatorCounts::default();
        for b in &self.blocks {
            match b.kind {
                OpKind::Global => c.globals += b.count as u64,
                OpKind::Local => c.locals += b.count as u64,
            }
        }
        c.oracle_calls = c.globals + c.locals;
        c
    }

    /// The tuple `(j_1, ..., j_q)` of the text notation. Pure Grover
    /// sequences give `(j, 0)`.
    pub fn tuple(&self) -> Vec<u32> {
        let mut rev = Vec::with_capacity(self.blocks.len() + 1);
        let mut expect = OpKind::Local;
        for b in &self.blocks {
            if b.kind != expect {
                rev.push(0);
                expect = expect.other();
            }
            rev.push(b.count);
            expect = expect.other();
        }
        if rev.is_empty() {
            rev.extend([0, 0]);
        }
        rev.reverse();
        rev
    }

    /// Builds a sequence from the tuple notation; see the module docs for the
    /// index convention.
    pub fn from_tuple(n: usize, local_width: Option<usize>, tuple: &[u32]) -> Result<Self> {
        let mut blocks = Vec::with_capacity(tuple.len());
        let mut kind = OpKind::Local;
        for &j in tuple.iter().rev() {
            blocks.push(Block { kind, count: j });
            kind = kind.other();
        }
        Self::new(n, local_width, blocks)
    }
}

/// `parse_paper_notation`: reads `S_{n,m}(j_1,...,j_q)`, `S_{n}(...)` or `S_n(...)`.
pub fn parse_paper_notation(text: &str) -> Result<SequenceSpec> {
    text.parse()
}

/// `format_paper_notation`: the canonical text form.
pub fn format_paper_notation(seq: &SequenceSpec) -> String {
    seq.to_string()
}

pub fn operator_counts(seq: &SequenceSpec) -> OperatorCounts {
    seq.operator_counts()
}

fn parse_err(text: &str, token: &str, reason: impl Into<String>) -> Error {
    Error::Parse {
        text: text.to_string(),
        token: token.to_string(),
        reason: reason.into(),
    }
}

fn parse_width(text: &str, token: &str) -> Result<usize> {
    let t = token.trim();
    t.parse::<usize>()
        .map_err(|_| parse_err(text, t, "expected a non-negative integer width"))
}

impl FromStr for SequenceSpec {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        let rest = compact
            .strip_prefix("S_")
            .ok_or_else(|| parse_err(text, &compact, "sequence must start with `S_`"))?;
        let open = rest.find('(').ok_or_else(|| parse_err(text, rest, "missing `(`"))?;
        let (sub, args) = rest.split_at(open);
        let sub = match sub.strip_prefix('{') {
            Some(inner) => inner
                .strip_suffix('}')
                .ok_or_else(|| parse_err(text, sub, "unbalanced `{`"))?,
            None => sub,
        };
        let (n, m) = match sub.split_once(',') {
            Some((n, m)) => (parse_width(text, n)?, Some(parse_width(text, m)?)),
            None => (parse_width(text, sub)?, None),
        };
        let inner = args
            .strip_prefix('(')
            .and_then(|a| a.strip_suffix(')'))
            .ok_or_else(|| parse_err(text, args, "expected `(j_1,...,j_q)`"))?;
        if inner.is_empty() {
            return Err(parse_err(text, args, "empty tuple"));
        }
        let tuple = inner
            .split(',')
            .map(|tok| {
                tok.parse::<u32>()
                    .map_err(|_| parse_err(text, tok, "expected a non-negative integer count"))
            })
            .collect::<Result<Vec<u32>>>()?;
        let local_nonzero = tuple.iter().rev().step_by(2).any(|&j| j > 0);
        if local_nonzero && m.is_none() {
            let tok = tuple.last().map(|j| j.to_string()).unwrap_or_default();
            return Err(parse_err(
                text,
                &tok,
                "local operators present but no block width m given",
            ));
        }
        if n < 1 {
            return Err(parse_err(text, sub, "n must be at least 1"));
        }
        SequenceSpec::from_tuple(n, m, &tuple).map_err(|e| match e {
            Error::InvalidBlockWidth { n, m } => parse_err(
                text,
                &m.to_string(),
                format!("block width m = {m} must satisfy 2 <= m < n = {n}"),
            ),
            other => other,
        })
    }
}

impl fmt::Display for SequenceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tuple = self.tuple().iter().map(|j| j.to_string()).collect::<Vec<_>>().join(",");
        match self.local_width {
            Some(m) => write!(f, "S_{{{},{}}}({})", self.n, m, tuple),
            None if self.n < 10 => write!(f, "S_{}({})", self.n, tuple),
            None => write!(f, "S_{{{}}}({})", self.n, tuple),
        }
    }
}

/// A two-stage schedule: stage 1 reveals the top `m1` address bits, stage 2
/// searches the remaining `m2` bits inside the revealed block.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwoStagePlan {
    m1: usize,
    m2: usize,
    stage1: SequenceSpec,
    stage2: SequenceSpec,
}

impl TwoStagePlan {
    /// Stage 1 runs on all `n = stage1.n()` qubits with local width `m2`
    /// (if it has locals); stage 2 runs on `m2` qubits.
    pub fn new(m2: usize, stage1: SequenceSpec, stage2: SequenceSpec) -> Result<Self> {
        let n = stage1.n();
        if m2 < 2 || m2 > n {
            return Err(Error::InvalidBlockWidth { n, m: m2 });
        }
        if let Some(w) = stage1.local_width() {
            if w != m2 {
                return Err(Error::WidthMismatch(format!(
                    "stage-1 local width {w} must equal the stage-2 register width {m2}"
                )));
            }
        }
        if stage2.n() != m2 {
            return Err(Error::WidthMismatch(format!(
                "stage-2 sequence acts on {} qubits, expected m2 = {m2}",
                stage2.n()
            )));
        }
        Ok(Self {
            m1: n - m2,
            m2,
            stage1,
            stage2,
        })
    }

    pub fn n(&self) -> usize {
        self.m1 + self.m2
    }

    pub fn m1(&self) -> usize {
        self.m1
    }

    pub fn m2(&self) -> usize {
        self.m2
    }

    /// Local width used inside stage 2, if any.
    pub fn m_prime(&self) -> Option<usize> {
        self.stage2.local_width()
    }

    pub fn stage1(&self) -> &SequenceSpec {
        &self.stage1
    }

    pub fn stage2(&self) -> &SequenceSpec {
        &self.stage2
    }
}

impl fmt::Display for TwoStagePlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} | {}", self.stage1, self.stage2)
    }
}

/// `"S_{4,2}(1,2) | S_2(1,0)"`; the stage-2 width is read off the second sequence.
impl FromStr for TwoStagePlan {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let (a, b) = text.split_once('|').ok_or_else(|| Error::Parse {
            text: text.to_string(),
            token: text.trim().to_string(),
            reason: "expected two stages separated by `|`".into(),
        })?;
        let stage1: SequenceSpec = a.parse()?;
        let stage2: SequenceSpec = b.parse()?;
        TwoStagePlan::new(stage2.n(), stage1, stage2)
    }
}
