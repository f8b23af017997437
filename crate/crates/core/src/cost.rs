//! Circuit-depth cost model.
//!
//! Every operator is priced in gate layers. A diffusion operator on `w`
//! qubits costs the depth of the `w`-qubit generalized Toffoli gate plus two
//! layers of single-qubit gates. The oracle always acts on the whole
//! `n`-qubit register and costs `alpha * d(D_n)`.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sequence::SequenceSpec;

/// Smallest register width the cost table describes (a CNOT).
pub const MIN_WIDTH: usize = 2;

/// Built-in linear-depth Toffoli decomposition, widths 2 through 10.
const LINEAR_TOFFOLI: [u64; 9] = [1, 5, 13, 29, 61, 120, 160, 200, 240];

/// Depth of the `w`-qubit generalized Toffoli gate for each supported width.
///
/// Entries are contiguous from `w = 2` up to [`GateDepthTable::max_width`]
/// and never decrease with `w`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateDepthTable {
    toffoli: Vec<u64>,
}

impl Default for GateDepthTable {
    fn default() -> Self {
        Self::linear()
    }
}

impl GateDepthTable {
    /// The linear-depth decomposition used for all reference tables
    /// (`{1, 5, 13, 29, 61, 120, 160, 200, 240}` for `w = 2..=10`).
    pub fn linear() -> Self {
        Self {
            toffoli: LINEAR_TOFFOLI.to_vec(),
        }
    }

    /// The linear table continued past `w = 10` with its final slope of 40
    /// per qubit, up to `max_width`.
    pub fn linear_extended(max_width: usize) -> Self {
        let mut toffoli = LINEAR_TOFFOLI.to_vec();
        while MIN_WIDTH + toffoli.len() <= max_width {
            let last = toffoli[toffoli.len() - 1];
            let slope = last - toffoli[toffoli.len() - 2];
            toffoli.push(last + slope);
        }
        Self { toffoli }
    }

    /// Builds a table from `(width, toffoli_depth)` pairs in any order.
    pub fn from_entries<I>(entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, u64)>,
    {
        let mut entries: Vec<(usize, u64)> = entries.into_iter().collect();
        entries.sort_by_key(|&(w, _)| w);
        if entries.is_empty() {
            return Err(Error::InvalidTable("no entries".into()));
        }
        let mut toffoli = Vec::with_capacity(entries.len());
        for (i, &(w, d)) in entries.iter().enumerate() {
            let expected = MIN_WIDTH + i;
            if w != expected {
                return Err(Error::InvalidTable(format!(
                    "widths must be contiguous from {MIN_WIDTH}; expected {expected}, found {w}"
                )));
            }
            if let Some(&prev) = toffoli.last() {
                if d < prev {
                    return Err(Error::InvalidTable(format!(
                        "depth must not decrease with width (w = {w}: {d} < {prev})"
                    )));
                }
            }
            toffoli.push(d);
        }
        Ok(Self { toffoli })
    }

    /// Parses the `w,depth` text format: one record per line, no header.
    /// Blank lines and lines starting with `#` are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = || Error::InvalidTable(format!("line {}: expected `w,depth`, got {line:?}", lineno + 1));
            let (w, d) = line.split_once(',').ok_or_else(bad)?;
            let w: usize = w.trim().parse().map_err(|_| bad())?;
            let d: u64 = d.trim().parse().map_err(|_| bad())?;
            entries.push((w, d));
        }
        Self::from_entries(entries)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Serializes to the `w,depth` format accepted by [`GateDepthTable::parse`].
    pub fn to_text(&self) -> String {
        self.entries().map(|(w, d)| format!("{w},{d}\n")).collect()
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, u64)> + '_ {
        self.toffoli.iter().enumerate().map(|(i, &d)| (MIN_WIDTH + i, d))
    }

    pub fn max_width(&self) -> usize {
        MIN_WIDTH + self.toffoli.len() - 1
    }

    pub fn contains(&self, w: usize) -> bool {
        (MIN_WIDTH..=self.max_width()).contains(&w)
    }

    pub fn toffoli_depth(&self, w: usize) -> Result<u64> {
        if !self.contains(w) {
            return Err(Error::WidthOutOfRange {
                width: w,
                min: MIN_WIDTH,
                max: self.max_width(),
            });
        }
        Ok(self.toffoli[w - MIN_WIDTH])
    }

    /// `d(D_w) = d(Λ_{w-1}(X)) + 2`.
    pub fn diffusion_depth(&self, w: usize) -> Result<u64> {
        Ok(self.toffoli_depth(w)? + 2)
    }
}

/// Free-function form of [`GateDepthTable::diffusion_depth`].
pub fn diffusion_depth(table: &GateDepthTable, w: usize) -> Result<u64> {
    table.diffusion_depth(w)
}

/// Cost-model parameters for an `n`-qubit search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepthParams {
    alpha: f64,
    n: usize,
    table: GateDepthTable,
}

impl DepthParams {
    pub fn new(n: usize, alpha: f64, table: GateDepthTable) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::InvalidAlpha(alpha));
        }
        table.diffusion_depth(n)?;
        Ok(Self { alpha, n, table })
    }

    /// Parameters with the built-in linear table.
    pub fn linear(n: usize, alpha: f64) -> Result<Self> {
        Self::new(n, alpha, GateDepthTable::linear())
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn table(&self) -> &GateDepthTable {
        &self.table
    }

    /// Same table and `n`, different ratio.
    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        Self::new(self.n, alpha, self.table.clone())
    }

    /// `d(D_n)` for the full register.
    pub fn global_diffusion_depth(&self) -> u64 {
        // validated in the constructor
        self.table.diffusion_depth(self.n).unwrap_or_default()
    }

    pub fn oracle_depth(&self) -> f64 {
        self.alpha * self.global_diffusion_depth() as f64
    }
}

/// `d(U_t) = alpha * d(D_n)`.
pub fn oracle_depth(params: &DepthParams) -> f64 {
    params.oracle_depth()
}

/// Depth split into a constant diffusion part and a part proportional to
/// alpha: `total = diffusion + alpha * oracle_units`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct AffineDepth {
    pub diffusion: u64,
    pub oracle_units: u64,
}

impl AffineDepth {
    pub fn at(&self, alpha: f64) -> f64 {
        self.diffusion as f64 + alpha * self.oracle_units as f64
    }
}

impl std::ops::Add for AffineDepth {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        Self {
            diffusion: self.diffusion + rhs.diffusion,
            oracle_units: self.oracle_units + rhs.oracle_units,
        }
    }
}

/// Operator counts and total depth of one sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DepthBreakdown {
    pub oracle_calls: u64,
    pub global_diffusions: u64,
    pub local_diffusions: u64,
    /// Width of the local diffusion, if the sequence has any.
    pub local_width: Option<usize>,
    pub affine: AffineDepth,
    pub total_depth: f64,
}

impl fmt::Display for DepthBreakdown {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} oracle calls, {} global + {} local diffusions, depth {}",
            self.oracle_calls, self.global_diffusions, self.local_diffusions, self.total_depth
        )
    }
}

/// Depth of `seq` under `params`.
///
/// `seq.n()` may be smaller than `params.n()`: a second-stage sequence runs
/// on a sub-register, but its oracle still acts on all `params.n()` qubits and
/// keeps the full oracle cost. Its "global" diffusion costs `d(D_{seq.n()})`.
pub fn sequence_depth(seq: &SequenceSpec, params: &DepthParams) -> Result<DepthBreakdown> {
    if seq.n() > params.n() {
        return Err(Error::WidthMismatch(format!(
            "sequence acts on {} qubits but the cost model describes {}",
            seq.n(),
            params.n()
        )));
    }
    let table = params.table();
    let global = table.diffusion_depth(seq.n())?;
    let local = match seq.local_width() {
        Some(m) if m >= seq.n() => {
            return Err(Error::InvalidSequence(format!(
                "local width {m} must be smaller than n = {}",
                seq.n()
            )))
        }
        Some(m) => table.diffusion_depth(m)?,
        None => 0,
    };
    let counts = seq.operator_counts();
    let affine = AffineDepth {
        diffusion: counts.globals * global + counts.locals * local,
        oracle_units: counts.oracle_calls * params.global_diffusion_depth(),
    };
    Ok(DepthBreakdown {
        oracle_calls: counts.oracle_calls,
        global_diffusions: counts.globals,
        local_diffusions: counts.locals,
        local_width: seq.local_width(),
        affine,
        total_depth: affine.at(params.alpha()),
    })
}

/// `depth / success_probability`; zero probability is an error rather than
/// infinity.
pub fn expected_depth(depth: f64, success_probability: f64) -> Result<f64> {
    if !(success_probability > 0.0 && success_probability <= 1.0 + 1e-12) || depth < 0.0 {
        return Err(Error::ZeroProbability(success_probability));
    }
    Ok(depth / success_probability)
}
