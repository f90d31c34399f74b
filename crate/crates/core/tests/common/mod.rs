//! Dense reference implementations shared by the integration tests. Kept
//! deliberately naive: every entry comes straight from its definition.

#![allow(dead_code)]

use qsearch_core::{AssumptionSet, ProblemInstance};

pub type Dense = Vec<Vec<f64>>;

pub fn parity_sign(bits: u64) -> f64 {
    if bits.count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `W_rs = (-1)^{|r ∩ s|} / √N`.
pub fn dense_w(n: usize) -> Dense {
    let size = 1usize << n;
    let scale = 1.0 / (size as f64).sqrt();
    (0..size)
        .map(|r| (0..size).map(|s| parity_sign((r & s) as u64) * scale).collect())
        .collect()
}

/// `d_k = +1` when `2k <= n`, else `-1`, as a full diagonal.
pub fn dense_d(n: usize) -> Vec<f64> {
    (0..1usize << n)
        .map(|s| if 2 * (s.count_ones() as usize) <= n { 1.0 } else { -1.0 })
        .collect()
}

pub fn matmul(a: &Dense, b: &Dense) -> Dense {
    let n = a.len();
    let m = b[0].len();
    let mut out = vec![vec![0.0; m]; n];
    for i in 0..n {
        for k in 0..b.len() {
            let aik = a[i][k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..m {
                out[i][j] += aik * b[k][j];
            }
        }
    }
    out
}

pub fn transpose(a: &Dense) -> Dense {
    (0..a[0].len()).map(|j| a.iter().map(|row| row[j]).collect()).collect()
}

pub fn mul_vec(a: &Dense, x: &[f64]) -> Vec<f64> {
    a.iter().map(|row| row.iter().zip(x).map(|(p, q)| p * q).sum()).collect()
}

/// `W D W` multiplied out densely.
pub fn dense_u_product(n: usize) -> Dense {
    let w = dense_w(n);
    let d = dense_d(n);
    let wd: Dense = w
        .iter()
        .map(|row| row.iter().zip(&d).map(|(x, s)| x * s).collect())
        .collect();
    matmul(&wd, &w)
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn max_abs_diff_dense(a: &Dense, b: &Dense) -> f64 {
    a.iter().zip(b).map(|(x, y)| max_abs_diff(x, y)).fold(0.0, f64::max)
}

pub fn identity(size: usize) -> Dense {
    (0..size)
        .map(|i| (0..size).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect()
}

/// Consistency by checking every base nogood for containment.
pub fn naive_is_good(problem: &ProblemInstance, s: u64) -> bool {
    problem
        .nogoods()
        .iter()
        .all(|ng| !ng.is_subset_of(AssumptionSet::from_bits(s)))
}

/// Independent full simulation: each step applies the phases from direct
/// subset checks, then dense `U`. Returns `P_soln` for `j = 0..=steps`.
pub fn naive_run(problem: &ProblemInstance, steps: usize, staged: bool) -> Vec<f64> {
    let n = problem.n();
    let l = problem.solution_size();
    let size = 1usize << n;
    let u = dense_u_product(n);
    let good: Vec<bool> = (0..size as u64).map(|s| naive_is_good(problem, s)).collect();
    let soln = |psi: &[f64]| -> f64 {
        (0..size)
            .filter(|&s| good[s] && s.count_ones() as usize == l)
            .map(|s| psi[s] * psi[s])
            .sum()
    };
    let mut psi = vec![0.0; size];
    psi[0] = 1.0;
    let mut out = vec![soln(&psi)];
    for j in 1..=steps {
        let threshold = if staged { l.min(j - 1) } else { 0 };
        for s in 0..size {
            if !good[s] || (s.count_ones() as usize) < threshold {
                psi[s] = -psi[s];
            }
        }
        psi = mul_vec(&u, &psi);
        out.push(soln(&psi));
    }
    out
}

/// Deterministic pseudo-random unit vectors (splitmix64), so test inputs do
/// not depend on the library's own RNG plumbing.
pub fn random_unit_vector(len: usize, seed: u64) -> Vec<f64> {
    let mut state = seed;
    let mut next = || {
        state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
        (z >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
    };
    let v: Vec<f64> = (0..len).map(|_| next()).collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / norm).collect()
}
