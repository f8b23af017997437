//! Exact evolution in the three-dimensional invariant subspace.
//!
//! With a single target `t = t_1 ⊗ t_2` and every local diffusion acting on
//! the same `m` low-order qubits, the state only ever lives in
//! `span{|t>, |ntt>, |u>}`: the target, the normalized sum of the other items
//! in the target's block, and the normalized sum of everything outside the
//! block. Global and local Grover operators become real 3×3 orthogonal
//! matrices on that basis.
//!
//! A frame with `m = n` (one block holding the whole database) is accepted
//! for pure Grover runs; then `|u>` carries no amplitude.

use std::f64::consts::FRAC_PI_2;
use std::ops::Mul;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sequence::{OpKind, SequenceSpec};

/// Norm tolerance for reduced states.
pub const NORM_TOLERANCE: f64 = 1e-12;

/// Real 3×3 matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mat3(pub [[f64; 3]; 3]);

impl Mat3 {
    pub const IDENTITY: Mat3 = Mat3([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);

    pub fn transpose(&self) -> Mat3 {
        let a = &self.0;
        Mat3([
            [a[0][0], a[1][0], a[2][0]],
            [a[0][1], a[1][1], a[2][1]],
            [a[0][2], a[1][2], a[2][2]],
        ])
    }

    pub fn apply(&self, v: [f64; 3]) -> [f64; 3] {
        let a = &self.0;
        [
            a[0][0] * v[0] + a[0][1] * v[1] + a[0][2] * v[2],
            a[1][0] * v[0] + a[1][1] * v[1] + a[1][2] * v[2],
            a[2][0] * v[0] + a[2][1] * v[1] + a[2][2] * v[2],
        ]
    }

    pub fn det(&self) -> f64 {
        let a = &self.0;
        a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
            + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
    }

    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1] + self.0[2][2]
    }

    pub fn pow(&self, k: u32) -> Mat3 {
        let mut result = Mat3::IDENTITY;
        let mut base = *self;
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                result = result * base;
            }
            base = base * base;
            k >>= 1;
        }
        result
    }

    /// Largest absolute entry of `self - other`.
    pub fn max_abs_diff(&self, other: &Mat3) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                d = d.max((self.0[i][j] - other.0[i][j]).abs());
            }
        }
        d
    }
}

impl Mul for Mat3 {
    type Output = Mat3;

    fn mul(self, rhs: Mat3) -> Mat3 {
        let mut out = [[0.0; 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x = (0..3).map(|k| self.0[i][k] * rhs.0[k][j]).sum();
            }
        }
        Mat3(out)
    }
}

/// The angles fixing the initial state: `sin θ = 1/√N`, `sin θ₂ = 1/√b`,
/// `sin γ = 1/√K` with `N = 2^n`, `b = 2^m`, `K = 2^{n-m}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Angles {
    pub n: usize,
    pub m: usize,
    pub theta: f64,
    pub theta2: f64,
    pub gamma: f64,
}

fn check_frame(n: usize, m: usize) -> Result<()> {
    // 2^n must stay representable and the block nontrivial
    if m < 1 || m > n || n > 62 {
        return Err(Error::InvalidBlockWidth { n, m });
    }
    Ok(())
}

fn check_local(n: usize, m: usize) -> Result<()> {
    if m < 2 || m >= n || n > 62 {
        return Err(Error::InvalidBlockWidth { n, m });
    }
    Ok(())
}

/// `asin(2^{-k/2})` computed from the integer exponent.
fn inv_sqrt_pow2_angle(k: usize) -> f64 {
    if k == 0 {
        FRAC_PI_2
    } else {
        (0.5f64).powf(k as f64 / 2.0).asin()
    }
}

impl Angles {
    pub fn new(n: usize, m: usize) -> Result<Self> {
        check_frame(n, m)?;
        Ok(Self {
            n,
            m,
            theta: inv_sqrt_pow2_angle(n),
            theta2: inv_sqrt_pow2_angle(m),
            gamma: inv_sqrt_pow2_angle(n - m),
        })
    }

    /// Amplitudes of `|s_n>` on `{|t>, |ntt>, |u>}`.
    pub fn initial_amplitudes(&self) -> [f64; 3] {
        let (sg, cg) = self.gamma.sin_cos();
        let (s2, c2) = self.theta2.sin_cos();
        // the (n - m) = 0 frame has no |u> component at all
        let cg = if self.n == self.m { 0.0 } else { cg };
        [sg * s2, sg * c2, cg]
    }
}

/// Amplitudes on `{|t>, |ntt>, |u>}` for an `n`-qubit register split into
/// blocks of `2^m` items.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedState {
    pub n: usize,
    pub m: usize,
    pub amps: [f64; 3],
}

impl ReducedState {
    pub fn target(&self) -> f64 {
        self.amps[0]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a * a).sum()
    }

    /// `|<t|ψ>|²`.
    pub fn success_probability(&self) -> f64 {
        self.amps[0] * self.amps[0]
    }

    /// Probability that measuring the `n - m` block-address qubits gives the
    /// target's block.
    pub fn block_probability(&self) -> f64 {
        self.amps[0] * self.amps[0] + self.amps[1] * self.amps[1]
    }
}

/// `|s_n>` in the reduced basis. Accepts `2 <= m <= n`; `m = n` is the
/// single-block frame.
pub fn initial_state(n: usize, m: usize) -> Result<ReducedState> {
    if m < 2 {
        return Err(Error::InvalidBlockWidth { n, m });
    }
    let angles = Angles::new(n, m)?;
    Ok(ReducedState {
        n,
        m,
        amps: angles.initial_amplitudes(),
    })
}

/// A reduced Grover operator, an element of O(3).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Generator {
    pub matrix: Mat3,
}

impl Generator {
    /// `‖MᵀM − I‖_max`.
    pub fn orthogonality_defect(&self) -> f64 {
        (self.matrix.transpose() * self.matrix).max_abs_diff(&Mat3::IDENTITY)
    }

    pub fn det(&self) -> f64 {
        self.matrix.det()
    }
}

fn global_matrix(angles: &Angles) -> Mat3 {
    let s = angles.initial_amplitudes();
    let mut out = [[0.0; 3]; 3];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, x) in row.iter_mut().enumerate() {
            let reflect = 2.0 * s[i] * s[j] - if i == j { 1.0 } else { 0.0 };
            // oracle diag(-1, 1, 1) applied first
            *x = if j == 0 { -reflect } else { reflect };
        }
    }
    Mat3(out)
}

fn local_matrix(theta2: f64) -> Mat3 {
    let (s, c) = (2.0 * theta2).sin_cos();
    Mat3([[c, s, 0.0], [-s, c, 0.0], [0.0, 0.0, 1.0]])
}

/// `G_n = D_n U_t` on the reduced basis: `(2 s sᵀ − I) · diag(−1, 1, 1)`.
pub fn global_generator(n: usize, m: usize) -> Result<Generator> {
    check_local(n, m)?;
    Ok(Generator {
        matrix: global_matrix(&Angles::new(n, m)?),
    })
}

/// `G_m = D_{n,m} U_t`: a rotation by `2θ₂` in the `{|t>, |ntt>}` plane.
pub fn local_generator(n: usize, m: usize) -> Result<Generator> {
    check_local(n, m)?;
    Ok(Generator {
        matrix: local_matrix(Angles::new(n, m)?.theta2),
    })
}

/// Precomputed generators for one `(n, m)` frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedModel {
    pub angles: Angles,
    pub global: Mat3,
    pub local: Mat3,
}

impl ReducedModel {
    /// `2 <= m <= n`; with `m = n` only global operators are meaningful.
    pub fn new(n: usize, m: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidBlockWidth { n, m });
        }
        let angles = Angles::new(n, m)?;
        Ok(Self {
            angles,
            global: global_matrix(&angles),
            local: local_matrix(angles.theta2),
        })
    }

    /// The frame a sequence naturally lives in: its own local width, or the
    /// single-block frame for pure Grover sequences.
    pub fn for_sequence(seq: &SequenceSpec) -> Result<Self> {
        Self::new(seq.n(), seq.local_width().unwrap_or(seq.n()))
    }

    pub fn initial(&self) -> ReducedState {
        ReducedState {
            n: self.angles.n,
            m: self.angles.m,
            amps: self.angles.initial_amplitudes(),
        }
    }

    pub fn matrix(&self, kind: OpKind) -> &Mat3 {
        match kind {
            OpKind::Global => &self.global,
            OpKind::Local => &self.local,
        }
    }

    /// Product matrix of a whole sequence (last-applied operator leftmost).
    pub fn sequence_matrix(&self, seq: &SequenceSpec) -> Result<Mat3> {
        self.check(seq)?;
        Ok(seq
            .blocks()
            .iter()
            .fold(Mat3::IDENTITY, |acc, b| self.matrix(b.kind).pow(b.count) * acc))
    }

    fn check(&self, seq: &SequenceSpec) -> Result<()> {
        if seq.n() != self.angles.n {
            return Err(Error::WidthMismatch(format!(
                "sequence acts on {} qubits, state has {}",
                seq.n(),
                self.angles.n
            )));
        }
        if let Some(w) = seq.local_width() {
            if w != self.angles.m {
                return Err(Error::WidthMismatch(format!(
                    "sequence local width {w} differs from the state's block width {}",
                    self.angles.m
                )));
            }
        }
        Ok(())
    }

    pub fn apply(&self, seq: &SequenceSpec, state: ReducedState) -> Result<ReducedState> {
        self.check(seq)?;
        let mut amps = state.amps;
        for op in seq.ops() {
            amps = self.matrix(op).apply(amps);
        }
        Ok(ReducedState { amps, ..state })
    }
}

/// Applies `seq` to `state`, whose `(n, m)` frame must match the sequence.
pub fn apply_sequence(seq: &SequenceSpec, state: ReducedState) -> Result<ReducedState> {
    let model = ReducedModel::new(state.n, state.m)?;
    model.apply(seq, state)
}

/// Runs `seq` from `|s_n>` in the frame of its own local width.
pub fn final_state(seq: &SequenceSpec) -> Result<ReducedState> {
    let model = ReducedModel::for_sequence(seq)?;
    model.apply(seq, model.initial())
}

/// `P = |<t| S |s_n>|²`.
pub fn success_probability(seq: &SequenceSpec) -> Result<f64> {
    Ok(final_state(seq)?.success_probability())
}

/// Probability of reading the target's block address after `seq` when the
/// register is split into blocks of `2^block_bits` items. If `seq` has local
/// operators, `block_bits` must equal their width.
pub fn block_success_probability(seq: &SequenceSpec, block_bits: usize) -> Result<f64> {
    let model = ReducedModel::new(seq.n(), block_bits)?;
    Ok(model.apply(seq, model.initial())?.block_probability())
}

/// `P_n(j) = sin²((2j+1)θ)` with `sin θ = 2^{-n/2}`.
pub fn grover_probability_closed_form(n: usize, j: u64) -> f64 {
    let theta = inv_sqrt_pow2_angle(n);
    ((2 * j + 1) as f64 * theta).sin().powi(2)
}

/// `⌊π√N/4⌋`.
pub fn j_max(n: usize) -> u64 {
    (std::f64::consts::PI * 2f64.powf(n as f64 / 2.0) / 4.0).floor() as u64
}

/// `⌊0.583√N⌋`.
pub fn j_exp(n: usize) -> u64 {
    (0.583 * 2f64.powf(n as f64 / 2.0)).floor() as u64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequence::Block;
    use approx::assert_abs_diff_eq;

    fn seq(s: &str) -> SequenceSpec {
        s.parse().unwrap()
    }

    #[test]
    fn initial_state_examples() {
        let s = initial_state(6, 4).unwrap();
        assert_abs_diff_eq!(s.amps[0], 0.125, epsilon = 1e-15);
        assert_abs_diff_eq!(s.amps[1], 15f64.sqrt() / 8.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.amps[2], 3f64.sqrt() / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(initial_state(4, 2).unwrap().amps[0], 0.25, epsilon = 1e-15);
        // single block: no amplitude outside the target block
        let s = initial_state(2, 2).unwrap();
        assert_eq!(s.amps[2], 0.0);
        assert_abs_diff_eq!(s.norm_sqr(), 1.0, epsilon = 1e-15);
        assert!(initial_state(6, 1).is_err());
        assert!(initial_state(6, 7).is_err());
    }

    #[test]
    fn angle_consistency() {
        for n in 3..=16 {
            for m in 2..n {
                let a = Angles::new(n, m).unwrap();
                let lhs = a.gamma.sin().powi(2) * a.theta2.sin().powi(2);
                assert_abs_diff_eq!(lhs, a.theta.sin().powi(2), epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn generators_are_orthogonal_and_distinct() {
        for n in 3..=12 {
            for m in 2..n {
                let g = global_generator(n, m).unwrap();
                let l = local_generator(n, m).unwrap();
                assert!(g.orthogonality_defect() < 1e-12);
                assert!(l.orthogonality_defect() < 1e-12);
                assert_abs_diff_eq!(g.det().abs(), 1.0, epsilon = 1e-12);
                assert_abs_diff_eq!(l.det(), 1.0, epsilon = 1e-12);
            }
        }
        let g = global_generator(6, 4).unwrap().matrix;
        let l = local_generator(6, 4).unwrap().matrix;
        assert!((g * l).max_abs_diff(&(l * g)) > 1e-3);
        assert!(global_generator(6, 6).is_err());
        assert!(local_generator(6, 6).is_err());
    }

    #[test]
    fn local_power_matches_rotation_by_multiple_angle() {
        let a = Angles::new(7, 3).unwrap();
        let l = local_generator(7, 3).unwrap().matrix;
        for j in 0..6 {
            assert!(l.pow(j).max_abs_diff(&local_matrix(a.theta2 * j as f64)) < 1e-13);
        }
        // b = 4: θ₂ = π/6, third row and column untouched
        let l = local_generator(5, 2).unwrap().matrix;
        assert_abs_diff_eq!(
            Angles::new(5, 2).unwrap().theta2,
            std::f64::consts::PI / 6.0,
            epsilon = 1e-15
        );
        assert_eq!(l.0[2], [0.0, 0.0, 1.0]);
        assert_eq!([l.0[0][2], l.0[1][2]], [0.0, 0.0]);
    }

    #[test]
    fn probabilities_from_worked_examples() {
        let p = |s: &str| success_probability(&seq(s)).unwrap();
        assert_abs_diff_eq!(p("S_6(4,0)"), 0.816, epsilon = 5e-4);
        assert_abs_diff_eq!(p("S_4(3,0)"), 0.961, epsilon = 5e-4);
        assert_abs_diff_eq!(p("S_{6,4}(1)"), 0.1181, epsilon = 1e-4);
        assert_abs_diff_eq!(p("S_{6,4}(1,1,2)"), 0.755, epsilon = 5e-4);
        assert_abs_diff_eq!(p("S_{4,3}(1,1)"), 0.821, epsilon = 5e-4);
        assert_abs_diff_eq!(p("S_{5,4}(1,1,1)"), 0.849, epsilon = 5e-4);
        assert_abs_diff_eq!(p("S_2(1,0)"), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn block_probabilities_from_worked_examples() {
        let p = |s: &str, b| block_success_probability(&seq(s), b).unwrap();
        assert_abs_diff_eq!(p("S_{4,2}(1,1)", 2), 0.953, epsilon = 5e-4);
        assert_abs_diff_eq!(p("S_{4,2}(1,2)", 2), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p("S_6(0,0)", 4), 0.25, epsilon = 1e-15);
        // one local then one global reveals the block with probability 0.5604
        assert_abs_diff_eq!(p("S_{6,4}(1,1)", 4), 0.5604, epsilon = 5e-5);
        // a trailing local cannot move weight between blocks
        assert_abs_diff_eq!(p("S_{6,4}(1,1,0)", 4), p("S_6(1,0)", 4), epsilon = 1e-14);
        assert!(block_success_probability(&seq("S_{6,4}(1,1)"), 3).is_err());
    }

    #[test]
    fn empty_sequence_is_identity() {
        let s0 = initial_state(6, 4).unwrap();
        assert_eq!(apply_sequence(&SequenceSpec::empty(6), s0).unwrap(), s0);
    }

    #[test]
    fn apply_sequence_checks_widths() {
        let s0 = initial_state(6, 4).unwrap();
        assert!(apply_sequence(&seq("S_{6,3}(1)"), s0).is_err());
        assert!(apply_sequence(&seq("S_{5,4}(1)"), s0).is_err());
        let s = SequenceSpec::new(6, Some(4), [Block::local(1), Block::global(2)]).unwrap();
        let out = apply_sequence(&s, s0).unwrap();
        assert_abs_diff_eq!(out.norm_sqr(), 1.0, epsilon = NORM_TOLERANCE);
    }

    #[test]
    fn closed_form_examples() {
        assert_abs_diff_eq!(grover_probability_closed_form(6, 1), 0.1348, epsilon = 5e-5);
        assert_abs_diff_eq!(grover_probability_closed_form(6, 2), 0.3439, epsilon = 5e-5);
        for n in 2..12 {
            assert_abs_diff_eq!(
                grover_probability_closed_form(n, 0),
                1.0 / (1u64 << n) as f64,
                epsilon = 1e-15
            );
        }
    }

    #[test]
    fn sequence_matrix_agrees_with_stepwise_application() {
        let s = seq("S_{8,4}(1,1,2,1,2,1,2)");
        let model = ReducedModel::for_sequence(&s).unwrap();
        let direct = model.apply(&s, model.initial()).unwrap().amps;
        let via_matrix = model.sequence_matrix(&s).unwrap().apply(model.initial().amps);
        for i in 0..3 {
            assert_abs_diff_eq!(direct[i], via_matrix[i], epsilon = 1e-13);
        }
    }
}
