//! Brute-force simulation over all `2^n` amplitudes.
//!
//! Used as an independent check on the reduced model. Qubit `k` is bit `k`
//! of the basis index, so the `m` low-order qubits address items inside a
//! block and the local diffusion reflects each contiguous run of `2^m`
//! amplitudes about its own mean.

use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sequence::{OpKind, SequenceSpec, TwoStagePlan};

/// Above this size the per-block reflection runs on the rayon pool.
const PARALLEL_THRESHOLD: usize = 1 << 16;

/// Real amplitudes of an `n`-qubit register.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    n: usize,
    amplitudes: Vec<f64>,
}

/// The marked item.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TargetSpec {
    n: usize,
    index: usize,
}

impl TargetSpec {
    pub fn new(n: usize, index: usize) -> Result<Self> {
        if n == 0 || n > 30 || index >= 1 << n {
            return Err(Error::InvalidTarget(format!("index {index} does not fit in {n} bits")));
        }
        Ok(Self { n, index })
    }

    /// The all-zeros target.
    pub fn zeros(n: usize) -> Result<Self> {
        Self::new(n, 0)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn index(&self) -> usize {
        self.index
    }

    /// The `bits` high-order bits (the block address when `n - bits` is the
    /// block width).
    pub fn high_bits(&self, bits: usize) -> usize {
        self.index >> (self.n - bits)
    }

    /// Restriction to the `bits` low-order qubits.
    pub fn low_part(&self, bits: usize) -> Result<Self> {
        Self::new(bits, self.index & ((1 << bits) - 1))
    }
}

impl FromStr for TargetSpec {
    type Err = Error;

    /// Bit string, most significant qubit first.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() || !s.chars().all(|c| c == '0' || c == '1') {
            return Err(Error::InvalidTarget(format!("{s:?} is not a bit string")));
        }
        let index = usize::from_str_radix(s, 2).map_err(|e| Error::InvalidTarget(format!("{s:?}: {e}")))?;
        Self::new(s.len(), index)
    }
}

impl std::fmt::Display for TargetSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:0width$b}", self.index, width = self.n)
    }
}

impl StateVector {
    /// `|s_n> = H^{⊗n}|0>`.
    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 || n > 30 {
            return Err(Error::InvalidArgument(format!("register width {n} out of range")));
        }
        let dim = 1usize << n;
        Ok(Self {
            n,
            amplitudes: vec![1.0 / (dim as f64).sqrt(); dim],
        })
    }

    /// A single block `high` of width `2^m` filled uniformly; zero elsewhere.
    /// This is `|t_1'> ⊗ |s_m>`.
    pub fn uniform_block(n: usize, m: usize, high: usize) -> Result<Self> {
        if m > n || high >= 1 << (n - m) {
            return Err(Error::InvalidArgument(format!(
                "block {high} of width 2^{m} does not fit in {n} qubits"
            )));
        }
        let mut s = Self::uniform(n)?;
        s.amplitudes.iter_mut().for_each(|a| *a = 0.0);
        let b = 1usize << m;
        let amp = 1.0 / (b as f64).sqrt();
        s.amplitudes[high * b..(high + 1) * b].iter_mut().for_each(|a| *a = amp);
        Ok(s)
    }

    pub fn from_amplitudes(n: usize, amplitudes: Vec<f64>) -> Result<Self> {
        if amplitudes.len() != 1 << n {
            return Err(Error::WidthMismatch(format!(
                "{} amplitudes for {n} qubits",
                amplitudes.len()
            )));
        }
        Ok(Self { n, amplitudes })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a * a).sum()
    }

    pub fn probability(&self, index: usize) -> f64 {
        self.amplitudes[index].powi(2)
    }
}

fn check_target(state: &StateVector, target: &TargetSpec) -> Result<()> {
    if target.n != state.n {
        return Err(Error::WidthMismatch(format!(
            "target has {} bits, register has {}",
            target.n, state.n
        )));
    }
    Ok(())
}

fn reflect_about_mean(chunk: &mut [f64]) {
    let mean = chunk.iter().sum::<f64>() / chunk.len() as f64;
    for a in chunk.iter_mut() {
        *a = 2.0 * mean - *a;
    }
}

/// `U_t = 1 − 2|t><t|`.
pub fn apply_oracle(state: &mut StateVector, target: &TargetSpec) -> Result<()> {
    check_target(state, target)?;
    state.amplitudes[target.index] = -state.amplitudes[target.index];
    Ok(())
}

/// `D_n = 2|s_n><s_n| − 1`: each amplitude becomes `2·mean − a`.
pub fn apply_global_diffusion(state: &mut StateVector) {
    reflect_about_mean(&mut state.amplitudes);
}

/// `D_{n,m} = 1 ⊗ (2|s_m><s_m| − 1)`: reflection about the mean inside each
/// block of `2^m` consecutive amplitudes.
pub fn apply_local_diffusion(state: &mut StateVector, m: usize) -> Result<()> {
    if m < 1 || m > state.n {
        return Err(Error::InvalidBlockWidth { n: state.n, m });
    }
    let b = 1usize << m;
    if state.amplitudes.len() >= PARALLEL_THRESHOLD {
        state.amplitudes.par_chunks_mut(b).for_each(reflect_about_mean);
    } else {
        state.amplitudes.chunks_mut(b).for_each(reflect_about_mean);
    }
    Ok(())
}

/// Applies `seq` to an arbitrary state, treating the sequence's "global"
/// diffusion as acting on the `seq.n()` low-order qubits. For a one-stage
/// sequence `seq.n()` equals the register width.
pub fn apply_sequence_full(state: &mut StateVector, seq: &SequenceSpec, target: &TargetSpec) -> Result<()> {
    check_target(state, target)?;
    if seq.n() > state.n {
        return Err(Error::WidthMismatch(format!(
            "sequence acts on {} qubits, register has {}",
            seq.n(),
            state.n
        )));
    }
    for op in seq.ops() {
        apply_oracle(state, target)?;
        match op {
            OpKind::Global if seq.n() == state.n => apply_global_diffusion(state),
            OpKind::Global => apply_local_diffusion(state, seq.n())?,
            OpKind::Local => {
                let m = seq
                    .local_width()
                    .ok_or_else(|| Error::InvalidSequence("local operator without width".into()))?;
                apply_local_diffusion(state, m)?;
            }
        }
    }
    Ok(())
}

/// Runs `seq` from `|s_n>`.
pub fn run_sequence_full(seq: &SequenceSpec, target: &TargetSpec) -> Result<StateVector> {
    if seq.n() != target.n {
        return Err(Error::WidthMismatch(format!(
            "sequence acts on {} qubits, target has {} bits",
            seq.n(),
            target.n
        )));
    }
    let mut state = StateVector::uniform(seq.n())?;
    apply_sequence_full(&mut state, seq, target)?;
    Ok(state)
}

/// Probability that measuring `qubits` yields `bits` (`bits[i]` is the
/// outcome for `qubits[i]`).
pub fn marginal_probability(state: &StateVector, qubits: &[usize], bits: &[bool]) -> Result<f64> {
    if qubits.len() != bits.len() {
        return Err(Error::InvalidArgument(format!(
            "{} qubits but {} outcome bits",
            qubits.len(),
            bits.len()
        )));
    }
    let mut mask = 0usize;
    let mut want = 0usize;
    for (&q, &b) in qubits.iter().zip(bits) {
        if q >= state.n {
            return Err(Error::InvalidArgument(format!(
                "qubit {q} outside a {}-qubit register",
                state.n
            )));
        }
        mask |= 1 << q;
        if b {
            want |= 1 << q;
        }
    }
    Ok(state
        .amplitudes
        .iter()
        .enumerate()
        .filter(|(i, _)| i & mask == want)
        .map(|(_, a)| a * a)
        .sum())
}

/// Probability of reading the target's block address (the `n - m` high
/// qubits).
pub fn block_address_probability(state: &StateVector, m: usize, target: &TargetSpec) -> Result<f64> {
    check_target(state, target)?;
    let qubits: Vec<usize> = (m..state.n).collect();
    let bits: Vec<bool> = qubits.iter().map(|&q| (target.index >> q) & 1 == 1).collect();
    marginal_probability(state, &qubits, &bits)
}

/// Stage probabilities of a two-stage plan, simulated on the full register.
///
/// Stage 2 starts from `|t_1> ⊗ |s_{m2}>` with the correct block address;
/// its success probability is conditional on stage 1 having succeeded.
pub fn run_two_stage_full(plan: &TwoStagePlan, target: &TargetSpec) -> Result<(f64, f64)> {
    let n = plan.n();
    if target.n != n {
        return Err(Error::WidthMismatch(format!(
            "target has {} bits, plan needs {n}",
            target.n
        )));
    }
    let after1 = run_sequence_full(plan.stage1(), target)?;
    let p1 = block_address_probability(&after1, plan.m2(), target)?;
    let mut stage2 = StateVector::uniform_block(n, plan.m2(), target.high_bits(plan.m1()))?;
    apply_sequence_full(&mut stage2, plan.stage2(), target)?;
    Ok((p1, stage2.probability(target.index)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn seq(s: &str) -> SequenceSpec {
        s.parse().unwrap()
    }

    #[test]
    fn oracle_flips_only_the_target() {
        let mut s = StateVector::uniform(2).unwrap();
        let t: TargetSpec = "00".parse().unwrap();
        apply_oracle(&mut s, &t).unwrap();
        assert_eq!(s.amplitudes(), &[-0.5, 0.5, 0.5, 0.5]);
        apply_oracle(&mut s, &t).unwrap();
        assert_eq!(s.amplitudes(), &[0.5, 0.5, 0.5, 0.5]);
        let mut s6 = StateVector::uniform(6).unwrap();
        let t6 = TargetSpec::new(6, 37).unwrap();
        apply_oracle(&mut s6, &t6).unwrap();
        assert_abs_diff_eq!(s6.amplitudes()[37], -0.125, epsilon = 1e-15);
        assert!(apply_oracle(&mut s6, &t).is_err());
    }

    #[test]
    fn diffusions_fix_uniform_state_and_are_involutions() {
        let u = StateVector::uniform(5).unwrap();
        let mut s = u.clone();
        apply_global_diffusion(&mut s);
        apply_local_diffusion(&mut s, 3).unwrap();
        for (a, b) in s.amplitudes().iter().zip(u.amplitudes()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-15);
        }
        let raw: Vec<f64> = (0..32).map(|i| ((i * 7) % 11) as f64 - 5.0).collect();
        let mut s = StateVector::from_amplitudes(5, raw.clone()).unwrap();
        apply_global_diffusion(&mut s);
        apply_global_diffusion(&mut s);
        apply_local_diffusion(&mut s, 2).unwrap();
        apply_local_diffusion(&mut s, 2).unwrap();
        for (a, b) in s.amplitudes().iter().zip(&raw) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn local_diffusion_preserves_block_means() {
        let raw: Vec<f64> = (0..64).map(|i| (i as f64 * 0.37).sin()).collect();
        let mut s = StateVector::from_amplitudes(6, raw.clone()).unwrap();
        apply_local_diffusion(&mut s, 4).unwrap();
        for (before, after) in raw.chunks(16).zip(s.amplitudes().chunks(16)) {
            let mb: f64 = before.iter().sum();
            let ma: f64 = after.iter().sum();
            assert_abs_diff_eq!(mb, ma, epsilon = 1e-12);
        }
        assert!(apply_local_diffusion(&mut s, 7).is_err());
    }

    #[test]
    fn worked_examples() {
        let t = TargetSpec::zeros(6).unwrap();
        let s = run_sequence_full(&seq("S_6(4,0)"), &t).unwrap();
        assert_abs_diff_eq!(s.probability(0), 0.816, epsilon = 5e-4);
        let s = run_sequence_full(&seq("S_{6,4}(1)"), &t).unwrap();
        assert_abs_diff_eq!(s.probability(0), 0.1181, epsilon = 1e-4);
        let s = run_sequence_full(&seq("S_{6,4}(1,1,2)"), &t).unwrap();
        assert_abs_diff_eq!(s.probability(0), 0.755, epsilon = 5e-4);
        let s = run_sequence_full(&seq("S_{6,4}(1,1)"), &t).unwrap();
        let p = marginal_probability(&s, &[5, 4], &[false, false]).unwrap();
        assert_abs_diff_eq!(p, 0.5604, epsilon = 5e-5);
        assert_abs_diff_eq!(block_address_probability(&s, 4, &t).unwrap(), p, epsilon = 1e-15);
    }

    #[test]
    fn marginal_edge_cases() {
        let s = StateVector::uniform(3).unwrap();
        assert_abs_diff_eq!(marginal_probability(&s, &[], &[]).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(marginal_probability(&s, &[0], &[true]).unwrap(), 0.5, epsilon = 1e-15);
        assert!(marginal_probability(&s, &[0, 1], &[true]).is_err());
        assert!(marginal_probability(&s, &[3], &[true]).is_err());
    }

    #[test]
    fn oracle_expectation_on_uniform_state() {
        for n in 2..8 {
            let mut s = StateVector::uniform(n).unwrap();
            let t = TargetSpec::new(n, (1 << n) - 1).unwrap();
            apply_oracle(&mut s, &t).unwrap();
            assert_abs_diff_eq!(
                s.amplitudes()[t.index()],
                -(0.5f64).powf(n as f64 / 2.0),
                epsilon = 1e-15
            );
        }
    }

    #[test]
    fn result_is_independent_of_target_up_to_relabeling() {
        let sq = seq("S_{5,3}(2,1,1)");
        let sorted = |t: usize| {
            let s = run_sequence_full(&sq, &TargetSpec::new(5, t).unwrap()).unwrap();
            let mut a = s.amplitudes().to_vec();
            a.sort_by(|x, y| x.partial_cmp(y).unwrap());
            (a, s.probability(t))
        };
        let (ref_amps, ref_p) = sorted(0);
        for t in 1..32 {
            let (amps, p) = sorted(t);
            assert_abs_diff_eq!(p, ref_p, epsilon = 1e-14);
            for (a, b) in amps.iter().zip(&ref_amps) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn target_bit_strings() {
        let t: TargetSpec = "0110".parse().unwrap();
        assert_eq!((t.n(), t.index()), (4, 6));
        assert_eq!(t.to_string(), "0110");
        assert_eq!(t.high_bits(2), 1);
        assert_eq!(t.low_part(2).unwrap().index(), 2);
        assert!("01x".parse::<TargetSpec>().is_err());
        assert!("".parse::<TargetSpec>().is_err());
    }

    #[test]
    fn two_stage_full_simulation() {
        let t: TargetSpec = "0110".parse().unwrap();
        let plan = TwoStagePlan::new(2, seq("S_{4,2}(1,2)"), seq("S_2(1,0)")).unwrap();
        let (p1, p2) = run_two_stage_full(&plan, &t).unwrap();
        assert_abs_diff_eq!(p1, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p2, 1.0, epsilon = 1e-12);
        let t6 = TargetSpec::zeros(6).unwrap();
        let plan = TwoStagePlan::new(4, seq("S_{6,4}(1,1)"), seq("S_4(2,0)")).unwrap();
        let (p1, p2) = run_two_stage_full(&plan, &t6).unwrap();
        assert_abs_diff_eq!(p1, 0.5604, epsilon = 5e-5);
        assert_abs_diff_eq!(p2, 0.9084, epsilon = 5e-5);
    }
}
