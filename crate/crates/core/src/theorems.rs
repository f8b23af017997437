//! Numerical checks of the two asymptotic constructions behind the critical
//! ratios: the sandwich `G_{n-1} G_n G_{n-1}` repeated on `n` qubits, and
//! `(G_n G_2)^k` followed by an exact two-qubit search.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cost::{DepthParams, GateDepthTable};
use crate::dynamics::{grover_probability_closed_form, j_exp, Mat3, ReducedModel};
use crate::error::{Error, Result};
use crate::optimizer::optimize_grover;

type CVec = [Complex64; 3];

/// Eigen-analysis of the sandwich operator `G_{n-1} G_n G_{n-1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremDiagnostics {
    pub n: usize,
    /// Closed-form matrix in the `{t, ntt, u}` basis.
    pub matrix: Mat3,
    /// Largest entry difference between the closed form and the generator product.
    pub product_error: f64,
    /// `λ0` (real) then `λ+`, `λ-`, computed from the characteristic polynomial.
    pub eigenvalues: [Complex64; 3],
    /// Unit eigenvectors, phase fixed so the `u` component is real and non-negative.
    pub eigenvectors: [[Complex64; 3]; 3],
    /// Rotation angle from `tan γ = Δ / (1 + cos 6θ₂)`.
    pub rotation_angle: f64,
    /// `arg λ+`.
    pub eigen_angle: f64,
    /// `Δ = √(3 − 2cos 6θ₂ − cos² 6θ₂)`.
    pub discriminant: f64,
    /// `P_n(3k) − |<t|S^k|s_n>|²` at `k = max(1, ⌊j_exp / 3⌋)`.
    pub delta_gap: f64,
    /// `|λ0 + 1|`.
    pub lambda0_error: f64,
    /// `max ||λ±| − 1|`.
    pub modulus_error: f64,
    /// `|<t|v0>|`.
    pub target_overlap_v0: f64,
    /// `|<t|v±>|²`.
    pub target_weight_pm: [f64; 2],
    /// `max |<t|v±> − (∓i/√2)|` under the phase convention above.
    pub target_phase_error: f64,
    /// Largest residual `|M v − λ v|` of the closed-form eigenvectors.
    pub closed_form_vector_residual: f64,
    /// `max |V diag(λ) V⁻¹ − M|`.
    pub reconstruction_error: f64,
}

impl TheoremDiagnostics {
    /// Every eigen-check within `tol`.
    pub fn passes(&self, tol: f64) -> bool {
        self.product_error <= tol
            && self.lambda0_error <= tol
            && self.modulus_error <= tol
            && self.target_overlap_v0 <= tol
            && self.target_weight_pm.iter().all(|w| (w - 0.5).abs() <= tol)
            && self.target_phase_error <= tol
            && self.closed_form_vector_residual <= tol
            && self.reconstruction_error <= tol
            && (self.rotation_angle - self.eigen_angle).abs() <= tol
    }
}

/// `G_{n-1} G_n G_{n-1}` in closed form, with `c = cos θ₂`, `s = sin θ₂`,
/// `sin θ₂ = √(2/N)`.
pub fn sandwich_closed_form(theta2: f64) -> Mat3 {
    let (s, c) = theta2.sin_cos();
    let a = c * c - 3.0 * s * s;
    let b = 3.0 * c * c - s * s;
    Mat3([
        [c * c * a * a, c * s * b * a, s * b],
        [-c * s * b * a, -s * s * b * b, c * a],
        [-s * b, c * a, 0.0],
    ])
}

/// `G_n G_2` in closed form, with `sin γ = 2/√N`.
pub fn block_pair_closed_form(gamma: f64) -> Mat3 {
    let (s2, c2) = (2.0 * gamma).sin_cos();
    let r3 = 3f64.sqrt();
    Mat3([
        [0.5 * c2, 0.5 * r3, 0.5 * s2],
        [0.5 * r3 * c2, -0.5, 0.5 * r3 * s2],
        [-s2, 0.0, c2],
    ])
}

fn sandwich_model(n: usize) -> Result<ReducedModel> {
    if n < 3 {
        return Err(Error::InvalidArgument(format!("the sandwich needs n >= 3, got {n}")));
    }
    ReducedModel::new(n, n - 1)
}

fn pair_model(n: usize) -> Result<ReducedModel> {
    if n < 3 {
        return Err(Error::InvalidArgument(format!(
            "a two-qubit block split needs n >= 3, got {n}"
        )));
    }
    ReducedModel::new(n, 2)
}

fn sandwich_product(model: &ReducedModel) -> Mat3 {
    model.local * model.global * model.local
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

#[allow(clippy::needless_range_loop)]
fn sub_lambda(m: &Mat3, lambda: Complex64) -> [[Complex64; 3]; 3] {
    let mut out = [[Complex64::default(); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = c(m.0[i][j]) - if i == j { lambda } else { c(0.0) };
        }
    }
    out
}

fn cross(a: &CVec, b: &CVec) -> CVec {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn norm(v: &CVec) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Null vector of `M − λI` from the best-conditioned pair of rows.
fn eigenvector(m: &Mat3, lambda: Complex64) -> CVec {
    let a = sub_lambda(m, lambda);
    let mut best = [c(0.0); 3];
    let mut best_norm = -1.0;
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        let v = cross(&a[i], &a[j]);
        let nv = norm(&v);
        if nv > best_norm {
            best = v;
            best_norm = nv;
        }
    }
    let mut v = best.map(|z| z / best_norm);
    // phase: make the u component real and non-negative
    if v[2].norm() > 1e-14 {
        let phase = v[2].conj() / v[2].norm();
        v = v.map(|z| z * phase);
    }
    v
}

/// Eigenvalues of a real 3×3 matrix with exactly one real eigenvalue,
/// returned as (real, upper-half-plane, lower-half-plane).
fn eigenvalues(m: &Mat3) -> [Complex64; 3] {
    let a = &m.0;
    let tr = m.trace();
    let minors = a[0][0] * a[1][1] - a[0][1] * a[1][0] + a[0][0] * a[2][2] - a[0][2] * a[2][0] + a[1][1] * a[2][2]
        - a[1][2] * a[2][1];
    let det = m.det();
    let p = |x: f64| ((x - tr) * x + minors) * x - det;
    // Cauchy bound for the real root
    let bound = 1.0 + tr.abs().max(minors.abs()).max(det.abs());
    let (mut lo, mut hi) = (-bound, bound);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (p(lo) < 0.0) == (p(mid) < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let real = 0.5 * (lo + hi);
    // deflate: x² − (tr − real)x + det/real
    let b = tr - real;
    let q = det / real;
    let disc = Complex64::new(b * b - 4.0 * q, 0.0).sqrt();
    let r1 = (c(b) + disc) / 2.0;
    let r2 = (c(b) - disc) / 2.0;
    let (up, down) = if r1.im >= r2.im { (r1, r2) } else { (r2, r1) };
    [c(real), up, down]
}

fn invert(v: &[[Complex64; 3]; 3]) -> Option<[[Complex64; 3]; 3]> {
    let m = v;
    let cof = |r0: usize, r1: usize, c0: usize, c1: usize| m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0];
    let det = m[0][0] * cof(1, 2, 1, 2) - m[0][1] * cof(1, 2, 0, 2) + m[0][2] * cof(1, 2, 0, 1);
    if det.norm() < 1e-300 {
        return None;
    }
    let adj = [
        [cof(1, 2, 1, 2), -cof(0, 2, 1, 2), cof(0, 1, 1, 2)],
        [-cof(1, 2, 0, 2), cof(0, 2, 0, 2), -cof(0, 1, 0, 2)],
        [cof(1, 2, 0, 1), -cof(0, 2, 0, 1), cof(0, 1, 0, 1)],
    ];
    Some(adj.map(|row| row.map(|z| z / det)))
}

/// Eigen-analysis of the sandwich operator for an `n`-qubit register split
/// into two halves.
pub fn sandwich_matrix(n: usize) -> Result<TheoremDiagnostics> {
    let model = sandwich_model(n)?;
    let theta2 = model.angles.theta2;
    let matrix = sandwich_closed_form(theta2);
    let product_error = matrix.max_abs_diff(&sandwich_product(&model));

    let lambdas = eigenvalues(&matrix);
    let vectors = lambdas.map(|l| eigenvector(&matrix, l));

    let cos6 = (6.0 * theta2).cos();
    let discriminant = (3.0 - 2.0 * cos6 - cos6 * cos6).max(0.0).sqrt();
    let rotation_angle = discriminant.atan2(1.0 + cos6);
    let eigen_angle = lambdas[1].arg();

    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    let target_phase_error = (vectors[1][0] - Complex64::new(0.0, -inv_sqrt2))
        .norm()
        .max((vectors[2][0] - Complex64::new(0.0, inv_sqrt2)).norm());

    // closed-form eigenvectors
    let c3 = (3.0 * theta2).cos();
    let v0 = [c(0.0), c(1.0), c(-c3)];
    let side = ((3.0 + cos6) / 2.0).sqrt();
    let vp = [Complex64::new(0.0, -side), c(c3), c(1.0)];
    let vm = [Complex64::new(0.0, side), c(c3), c(1.0)];
    let residual = |v: &CVec, l: Complex64| {
        let a = sub_lambda(&matrix, l);
        let r: CVec = [0, 1, 2].map(|i| (0..3).map(|j| a[i][j] * v[j]).sum());
        norm(&r) / norm(v)
    };
    let closed_form_vector_residual = residual(&v0, lambdas[0])
        .max(residual(&vp, lambdas[1]))
        .max(residual(&vm, lambdas[2]));

    // V diag(λ) V⁻¹
    let mut vmat = [[c(0.0); 3]; 3];
    for (k, v) in vectors.iter().enumerate() {
        for i in 0..3 {
            vmat[i][k] = v[i];
        }
    }
    #[allow(clippy::needless_range_loop)]
    let reconstruction_error = match invert(&vmat) {
        Some(inv) => {
            let mut err: f64 = 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    let z: Complex64 = (0..3).map(|k| vmat[i][k] * lambdas[k] * inv[k][j]).sum();
                    err = err.max((z - c(matrix.0[i][j])).norm());
                }
            }
            err
        }
        None => f64::INFINITY,
    };

    let k = (j_exp(n) / 3).max(1);
    let delta_gap = grover_probability_closed_form(n, 3 * k) - sandwich_power_probability(&model, k);

    Ok(TheoremDiagnostics {
        n,
        matrix,
        product_error,
        eigenvalues: lambdas,
        eigenvectors: vectors,
        rotation_angle,
        eigen_angle,
        discriminant,
        delta_gap,
        lambda0_error: (lambdas[0] + 1.0).norm(),
        modulus_error: (lambdas[1].norm() - 1.0).abs().max((lambdas[2].norm() - 1.0).abs()),
        target_overlap_v0: vectors[0][0].norm(),
        target_weight_pm: [vectors[1][0].norm_sqr(), vectors[2][0].norm_sqr()],
        target_phase_error,
        closed_form_vector_residual,
        reconstruction_error,
    })
}

fn sandwich_power_probability(model: &ReducedModel, k: u64) -> f64 {
    let m = sandwich_product(model);
    let mut v = model.initial().amps;
    for _ in 0..k {
        v = m.apply(v);
    }
    v[0] * v[0]
}

/// Exact probability next to its leading-order approximation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityCheck {
    pub exact: f64,
    pub asymptotic: f64,
}

impl ProbabilityCheck {
    pub fn gap(&self) -> f64 {
        (self.exact - self.asymptotic).abs()
    }
}

/// Target probability after `k` sandwiches against `sin²(3√2·k·θ₂)`.
pub fn theorem1_probability_check(n: usize, k: u64) -> Result<ProbabilityCheck> {
    let model = sandwich_model(n)?;
    let theta2 = model.angles.theta2;
    Ok(ProbabilityCheck {
        exact: sandwich_power_probability(&model, k),
        asymptotic: (3.0 * 2f64.sqrt() * k as f64 * theta2).sin().powi(2),
    })
}

/// Target-block probability after `(G_n G_2)^k` against `sin²(√3·k·γ)`.
pub fn theorem2_probability_check(n: usize, k: u64) -> Result<ProbabilityCheck> {
    let model = pair_model(n)?;
    let m = model.global * model.local;
    let mut v = model.initial().amps;
    for _ in 0..k {
        v = m.apply(v);
    }
    Ok(ProbabilityCheck {
        exact: 1.0 - v[2] * v[2],
        asymptotic: (3f64.sqrt() * k as f64 * model.angles.gamma).sin().powi(2),
    })
}

/// Largest entry difference between the closed form of `G_n G_2` and the
/// generator product.
pub fn block_pair_matrix_error(n: usize) -> Result<f64> {
    let model = pair_model(n)?;
    Ok(block_pair_closed_form(model.angles.gamma).max_abs_diff(&(model.global * model.local)))
}

/// Worst leading-order error over iteration counts up to the first peak of
/// the approximation.
pub fn theorem1_gap(n: usize) -> Result<f64> {
    let theta2 = sandwich_model(n)?.angles.theta2;
    let peak = (std::f64::consts::PI / (6.0 * 2f64.sqrt() * theta2)).floor() as u64;
    (0..=peak)
        .map(|k| theorem1_probability_check(n, k).map(|c| c.gap()))
        .try_fold(0.0, |a: f64, g| Ok(a.max(g?)))
}

/// Worst leading-order error of the block-finding construction up to its first peak.
pub fn theorem2_gap(n: usize) -> Result<f64> {
    let gamma = pair_model(n)?.angles.gamma;
    let peak = (std::f64::consts::PI / (2.0 * 3f64.sqrt() * gamma)).floor() as u64;
    (0..=peak)
        .map(|k| theorem2_probability_check(n, k).map(|c| c.gap()))
        .try_fold(0.0, |a: f64, g| Ok(a.max(g?)))
}

/// Least-squares slope of `ln y` against `x`.
pub fn log_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (sx, sy) = points.iter().fold((0.0, 0.0), |(a, b), &(x, y)| (a + x, b + y.ln()));
    let (mx, my) = (sx / n, sy / n);
    let (num, den) = points.iter().fold((0.0, 0.0), |(a, b), &(x, y)| {
        (a + (x - mx) * (y.ln() - my), b + (x - mx) * (x - mx))
    });
    num / den
}

/// Largest ratio below which some power of the sandwich beats Grover's MED
/// (`None` if it never does for ratios in `[floor, ∞)`).
pub fn sandwich_break_even(n: usize, table: &GateDepthTable) -> Result<Option<f64>> {
    let model = sandwich_model(n)?;
    let dn = table.diffusion_depth(n)? as f64;
    let dm = table.diffusion_depth(n - 1)? as f64;
    let peak = (std::f64::consts::PI / (3.0 * 2f64.sqrt() * model.angles.theta2)).ceil() as u64 + 1;
    let probs: Vec<f64> = (1..=peak).map(|k| sandwich_power_probability(&model, k)).collect();
    let beats = |alpha: f64| -> Result<bool> {
        let grover = optimize_grover(n, &DepthParams::new(n, alpha, table.clone())?)?.expected_depth;
        let per = dn + 2.0 * dm + 3.0 * alpha * dn;
        Ok(probs
            .iter()
            .enumerate()
            .any(|(i, &p)| p > 0.0 && (i + 1) as f64 * per / p < grover * (1.0 - 1e-12)))
    };
    let mut lo = 1e-3;
    if !beats(lo)? {
        return Ok(None);
    }
    let mut hi = 2.0;
    while beats(hi)? {
        lo = hi;
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::NoConvergence(0));
        }
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if beats(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(0.5 * (lo + hi)))
}
