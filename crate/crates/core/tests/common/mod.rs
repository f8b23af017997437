//! Reference implementations used as test oracles. They share no code with
//! the library: a dense simulator driven directly by the tuple notation and
//! depth arithmetic straight from the Toffoli table.

#![allow(dead_code)]

/// Toffoli depths for widths 2..=10.
pub const TOFFOLI: [f64; 9] = [1.0, 5.0, 13.0, 29.0, 61.0, 120.0, 160.0, 200.0, 240.0];

pub fn diffusion(w: usize) -> f64 {
    TOFFOLI[w - 2] + 2.0
}

/// Operators in application order for the tuple `(j_1, ..., j_q)`: `j_q`
/// counts local operators and runs first, and kinds alternate from there.
/// `true` means global.
pub fn ops(tuple: &[u32]) -> Vec<bool> {
    let mut out = Vec::new();
    let mut global = false;
    for &j in tuple.iter().rev() {
        out.extend(std::iter::repeat_n(global, j as usize));
        global = !global;
    }
    out
}

fn reflect(chunk: &mut [f64]) {
    let mean = chunk.iter().sum::<f64>() / chunk.len() as f64;
    for a in chunk {
        *a = 2.0 * mean - *a;
    }
}

/// Runs the tuple on `n` qubits from the uniform state; locals reflect each
/// run of `2^m` consecutive amplitudes.
pub fn simulate(n: usize, m: usize, tuple: &[u32], target: usize) -> Vec<f64> {
    let size = 1usize << n;
    let mut amps = vec![1.0 / (size as f64).sqrt(); size];
    for global in ops(tuple) {
        amps[target] = -amps[target];
        let w = if global { n } else { m };
        amps.chunks_mut(1 << w).for_each(reflect);
    }
    amps
}

pub fn target_probability(amps: &[f64], target: usize) -> f64 {
    amps[target] * amps[target]
}

/// Probability of reading the target's block (all bits above the low `m`).
pub fn block_probability(amps: &[f64], m: usize, target: usize) -> f64 {
    amps.iter()
        .enumerate()
        .filter(|(i, _)| i >> m == target >> m)
        .map(|(_, a)| a * a)
        .sum()
}

/// Depth of the tuple: every operator pays one oracle `alpha * d(D_n)`.
pub fn depth(n: usize, m: usize, tuple: &[u32], alpha: f64) -> f64 {
    ops(tuple)
        .into_iter()
        .map(|global| alpha * diffusion(n) + diffusion(if global { n } else { m }))
        .sum()
}

/// Grover sweep: `(j, probability, depth, expected depth)` minimizing the
/// expected depth, found by brute force over `j`.
pub fn best_grover(n: usize, alpha: f64) -> (u32, f64, f64, f64) {
    let theta = (2f64.powf(-(n as f64) / 2.0)).asin();
    let mut best = (0, 0.0, 0.0, f64::INFINITY);
    for j in 1..=(2u32 << (n / 2)) {
        let p = ((2 * j + 1) as f64 * theta).sin().powi(2);
        let d = j as f64 * (alpha + 1.0) * diffusion(n);
        if d / p < best.3 {
            best = (j, p, d, d / p);
        }
    }
    best
}
