//! The problem-independent mixing operator `U = W D W`.
//!
//! `W` is the parity transform over subsets, `W_rs = (-1)^{|r ∩ s|} / √N`,
//! and `D` multiplies every set of size `k` by a sign `d_k`. In the lattice
//! ordering `W` splits into two copies of the transform on one fewer
//! assumption, which gives the usual `O(n 2^n)` butterfly.

use num_bigint::BigInt;
use num_traits::Zero;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::{inv_sqrt_pow2, scale_by_inv_pow2, KrawtchoukTable};

/// Default cap on `n` for full-lattice simulation: 2^24 doubles is 128 MiB.
pub const DEFAULT_MAX_N: usize = 24;

/// Hard ceiling; above this the state alone no longer fits any sane machine.
pub const HARD_MAX_N: usize = 34;

/// Size limits for full-lattice simulation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SimulationLimits {
    pub max_n: usize,
}

impl Default for SimulationLimits {
    fn default() -> Self {
        SimulationLimits { max_n: DEFAULT_MAX_N }
    }
}

impl SimulationLimits {
    /// A raised (or lowered) cap. Anything above the default logs the
    /// memory footprint.
    pub fn with_max_n(max_n: usize) -> Result<Self> {
        if max_n > HARD_MAX_N {
            return Err(Error::InvalidParameter(format!(
                "--max-n {max_n} exceeds the hard limit {HARD_MAX_N}"
            )));
        }
        if max_n > DEFAULT_MAX_N {
            let mib = (1u64 << max_n) * 8 / (1 << 20);
            log::warn!("full-lattice cap raised to n = {max_n}: the state vector alone needs {mib} MiB");
        }
        Ok(SimulationLimits { max_n })
    }

    pub fn check(&self, n: usize) -> Result<()> {
        if n > self.max_n {
            Err(Error::CapExceeded { n, cap: self.max_n })
        } else {
            Ok(())
        }
    }
}

/// Amplitudes over all `2^n` sets, indexed by lattice position.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n: usize,
    amp: Vec<f64>,
}

impl StateVector {
    /// All amplitude on the set at `index`.
    pub fn basis(n: usize, index: usize) -> Self {
        let mut amp = vec![0.0; 1 << n];
        amp[index] = 1.0;
        StateVector { n, amp }
    }

    pub fn from_amplitudes(amp: Vec<f64>) -> Result<Self> {
        let len = amp.len();
        if len == 0 || !len.is_power_of_two() {
            return Err(Error::InvalidState { len });
        }
        Ok(StateVector {
            n: len.trailing_zeros() as usize,
            amp,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.amp.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amp.is_empty()
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amp
    }

    pub fn amplitudes_mut(&mut self) -> &mut [f64] {
        &mut self.amp
    }

    pub fn into_amplitudes(self) -> Vec<f64> {
        self.amp
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amp.iter().map(|a| a * a).sum()
    }
}

/// The size-dependent signs `d_k` of the diagonal operator.
///
/// `d_k = +1` for `k <= n/2` and `-1` above, which maximizes the coupling
/// `u_1` between a set and its immediate supersets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiagonalSigns {
    n: usize,
    d: Vec<i8>,
}

impl DiagonalSigns {
    pub fn new(n: usize) -> Self {
        let d = (0..=n).map(|k| if 2 * k <= n { 1 } else { -1 }).collect();
        DiagonalSigns { n, d }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn sign(&self, k: usize) -> i8 {
        self.d[k]
    }

    pub fn signs(&self) -> &[i8] {
        &self.d
    }
}

const BLOCK: usize = 1 << 12;
const PARALLEL_MIN_LEN: usize = 1 << 15;

/// Unnormalized in-place butterfly; `data.len()` must be a power of two.
pub(crate) fn fwht_unnormalized(data: &mut [f64]) {
    let len = data.len();
    debug_assert!(len.is_power_of_two());
    if len < PARALLEL_MIN_LEN {
        local_stages(data, len);
        return;
    }
    // Stages below BLOCK stay inside one chunk.
    data.par_chunks_mut(BLOCK)
        .for_each(|chunk| local_stages(chunk, BLOCK));
    let mut half = BLOCK;
    while half < len {
        data.par_chunks_mut(2 * half).for_each(|pair| {
            let (lo, hi) = pair.split_at_mut(half);
            lo.par_chunks_mut(BLOCK)
                .zip(hi.par_chunks_mut(BLOCK))
                .for_each(|(a, b)| butterfly(a, b));
        });
        half *= 2;
    }
}

fn local_stages(data: &mut [f64], upto: usize) {
    let mut half = 1;
    while half < upto.min(data.len()) {
        for pair in data.chunks_exact_mut(2 * half) {
            let (lo, hi) = pair.split_at_mut(half);
            butterfly(lo, hi);
        }
        half *= 2;
    }
}

#[inline]
fn butterfly(lo: &mut [f64], hi: &mut [f64]) {
    for (x, y) in lo.iter_mut().zip(hi.iter_mut()) {
        let (a, b) = (*x, *y);
        *x = a + b;
        *y = a - b;
    }
}

/// `W x` on a raw amplitude slice.
pub fn apply_w_slice(data: &mut [f64]) -> Result<()> {
    let len = data.len();
    if len == 0 || !len.is_power_of_two() {
        return Err(Error::InvalidState { len });
    }
    fwht_unnormalized(data);
    let scale = inv_sqrt_pow2(len.trailing_zeros() as usize);
    if len >= PARALLEL_MIN_LEN {
        data.par_iter_mut().for_each(|a| *a *= scale);
    } else {
        data.iter_mut().for_each(|a| *a *= scale);
    }
    Ok(())
}

pub fn apply_w(mut state: StateVector) -> StateVector {
    apply_w_slice(&mut state.amp).expect("StateVector length is a power of two");
    state
}

pub fn apply_d(mut state: StateVector, signs: &DiagonalSigns) -> Result<StateVector> {
    if signs.n != state.n {
        return Err(Error::DimensionMismatch {
            expected: 1 << signs.n,
            actual: state.len(),
        });
    }
    apply_d_slice(&mut state.amp, signs);
    Ok(state)
}

pub(crate) fn apply_d_slice(data: &mut [f64], signs: &DiagonalSigns) {
    for (i, a) in data.iter_mut().enumerate() {
        if signs.d[i.count_ones() as usize] < 0 {
            *a = -*a;
        }
    }
}

/// `U x = W D W x` with the standard signs.
pub fn apply_u(state: StateVector) -> StateVector {
    let signs = DiagonalSigns::new(state.n);
    let mut state = state;
    apply_u_in_place(&mut state.amp, &signs);
    state
}

pub(crate) fn apply_u_in_place(data: &mut [f64], signs: &DiagonalSigns) {
    apply_w_slice(data).expect("power-of-two length");
    apply_d_slice(data, signs);
    apply_w_slice(data).expect("power-of-two length");
}

/// `N u_m = Σ_k d_k S_{km}^{(n)}`, exact.
pub fn matrix_element_numerator(n: usize, m: usize) -> BigInt {
    let table = KrawtchoukTable::new(n);
    numerator_from_table(&table, &DiagonalSigns::new(n), m)
}

fn numerator_from_table(table: &KrawtchoukTable, signs: &DiagonalSigns, m: usize) -> BigInt {
    let mut acc = BigInt::zero();
    for k in 0..=table.n() {
        if signs.sign(k) > 0 {
            acc += table.get(k, m);
        } else {
            acc -= table.get(k, m);
        }
    }
    acc
}

/// `u_m`, the entry of `U` between any two sets at Hamming distance `m`.
pub fn matrix_element(n: usize, m: usize) -> f64 {
    assert!(m <= n, "distance {m} exceeds n = {n}");
    scale_by_inv_pow2(&matrix_element_numerator(n, m), n)
}

/// `u_0, ..., u_n` sharing one Krawtchouk table.
pub fn matrix_elements(n: usize) -> Vec<f64> {
    let table = KrawtchoukTable::new(n);
    let signs = DiagonalSigns::new(n);
    (0..=n)
        .map(|m| scale_by_inv_pow2(&numerator_from_table(&table, &signs, m), n))
        .collect()
}
