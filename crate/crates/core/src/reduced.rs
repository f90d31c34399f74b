//! Symmetry-reduced simulators for the two extreme problems.
//!
//! In the minimum-nogood problem (every set of size `<= L` is good) the
//! amplitude of a set depends only on its size, so the state is `n + 1`
//! numbers. In the maximum-nogood problem (the goods are exactly the subsets
//! of `{1, ..., L}`) it depends on the size and the overlap with that single
//! solution. Both stay tractable at `n ≈ 100`.
//!
//! Reduced amplitudes are per-set values, not class totals: a class of `c`
//! sets with reduced amplitude `ψ` holds probability `c ψ²`.

use num_bigint::BigInt;
use num_traits::ToPrimitive;

use crate::engine::{RunRecord, NORM_TOLERANCE};
use crate::error::{Error, Result};
use crate::lattice::{binomial_f64, inv_sqrt_pow2, scale_by_inv_sqrt_pow2, KrawtchoukTable};
use crate::oracle::PhasePolicy;
use crate::transform::{DiagonalSigns, StateVector};

/// Row-major dense real matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        self.data
            .chunks_exact(self.cols)
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.cols, other.rows);
        let mut out = DenseMatrix::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a == 0.0 {
                    continue;
                }
                let src = &other.data[k * other.cols..(k + 1) * other.cols];
                let dst = &mut out.data[r * other.cols..(r + 1) * other.cols];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += a * s;
                }
            }
        }
        out
    }

    /// `self · diag(d) · other`.
    fn sandwich(&self, d: &[f64], other: &DenseMatrix) -> DenseMatrix {
        let mut scaled = self.clone();
        for r in 0..scaled.rows {
            for c in 0..scaled.cols {
                scaled.data[r * scaled.cols + c] *= d[c];
            }
        }
        scaled.matmul(other)
    }
}

fn size_sign(n: usize, k: usize) -> f64 {
    if 2 * k <= n {
        1.0
    } else {
        -1.0
    }
}

fn check_sizes(n: usize, l: usize) -> Result<()> {
    if n < 1 {
        return Err(Error::InvalidParameter("reduced simulation needs n >= 1".into()));
    }
    if l > n {
        return Err(Error::InvalidParameter(format!("L = {l} exceeds n = {n}")));
    }
    Ok(())
}

/// `W^min_{hk} = S_{kh}^{(n)} / √N`: the summed `W` entries from one set of
/// size `h` to all sets of size `k`.
pub fn wmin_matrix(n: usize) -> DenseMatrix {
    let table = KrawtchoukTable::new(n);
    let mut w = DenseMatrix::zeros(n + 1, n + 1);
    for h in 0..=n {
        for k in 0..=n {
            w.set(h, k, table.scaled(k, h));
        }
    }
    w
}

/// `D^min`: `+1` for sizes up to `n/2`, `-1` above.
pub fn dmin_diagonal(n: usize) -> Vec<f64> {
    (0..=n).map(|k| size_sign(n, k)).collect()
}

/// `V^min = W^min D^min W^min`.
pub fn vmin_matrix(n: usize) -> DenseMatrix {
    let w = wmin_matrix(n);
    w.sandwich(&dmin_diagonal(n), &w)
}

/// Size-indexed state: `psi[h]` is the amplitude of each set of size `h`.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedStateMin {
    n: usize,
    psi: Vec<f64>,
}

impl ReducedStateMin {
    pub fn initial(n: usize) -> Self {
        let mut psi = vec![0.0; n + 1];
        psi[0] = 1.0;
        ReducedStateMin { n, psi }
    }

    pub fn from_amplitudes(psi: Vec<f64>) -> Result<Self> {
        if psi.is_empty() {
            return Err(Error::InvalidParameter("empty reduced state".into()));
        }
        Ok(ReducedStateMin { n: psi.len() - 1, psi })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.psi
    }

    /// Probability held by all sets of size `h`.
    pub fn level_probability(&self, h: usize) -> f64 {
        binomial_f64(self.n, h) * self.psi[h] * self.psi[h]
    }

    /// `Σ_h C(n, h) ψ_h²`.
    pub fn weighted_norm_sqr(&self) -> f64 {
        (0..=self.n).map(|h| self.level_probability(h)).sum()
    }

    /// The full-lattice state this class representative stands for.
    pub fn to_full(&self) -> StateVector {
        let amp = (0..1usize << self.n)
            .map(|i| self.psi[i.count_ones() as usize])
            .collect();
        StateVector::from_amplitudes(amp).expect("power-of-two length")
    }
}

/// Repeated applications of `V^min` for one `n`.
#[derive(Clone, Debug)]
pub struct MinSimulator {
    n: usize,
    v: DenseMatrix,
}

impl MinSimulator {
    pub fn new(n: usize) -> Result<Self> {
        check_sizes(n, 0)?;
        Ok(MinSimulator { n, v: vmin_matrix(n) })
    }

    pub fn apply(&self, state: &ReducedStateMin) -> ReducedStateMin {
        ReducedStateMin { n: self.n, psi: self.v.mul_vec(&state.psi) }
    }

    pub fn run(&self, l: usize, steps: usize, policy: PhasePolicy) -> Result<RunRecord> {
        check_sizes(self.n, l)?;
        let n = self.n;
        let mut state = ReducedStateMin::initial(n);
        let level_profile = |s: &ReducedStateMin| -> Vec<f64> {
            (0..=n).map(|k| if k <= l { s.level_probability(k) } else { 0.0 }).collect()
        };
        let mut p_soln = vec![state.level_probability(l)];
        let mut profile = vec![level_profile(&state)];
        let mut max_norm_error = 0.0f64;
        for j in 1..=steps {
            let threshold = policy.size_threshold(j, l);
            for (k, a) in state.psi.iter_mut().enumerate() {
                if k > l || k < threshold {
                    *a = -*a;
                }
            }
            state = self.apply(&state);
            let deviation = (state.weighted_norm_sqr() - 1.0).abs();
            if !(deviation < NORM_TOLERANCE) {
                return Err(Error::NormDrift { step: j, deviation });
            }
            max_norm_error = max_norm_error.max(deviation);
            p_soln.push(state.level_probability(l));
            profile.push(level_profile(&state));
        }
        Ok(RunRecord::finish(steps, p_soln, Some(profile), max_norm_error))
    }
}

/// Minimum-nogood problem with `n` assumptions and solution size `L`.
pub fn run_min(n: usize, l: usize, steps: usize, policy: PhasePolicy) -> Result<RunRecord> {
    MinSimulator::new(n)?.run(l, steps, policy)
}

/// Valid `(size, overlap)` index pairs in row order of [`wmax_matrix`]:
/// size ascending, then overlap ascending.
pub fn overlap_pairs(n: usize, l: usize) -> Vec<(usize, usize)> {
    let outside = n - l;
    let mut out = Vec::new();
    for k in 0..=n {
        for o in k.saturating_sub(outside)..=k.min(l) {
            out.push((k, o));
        }
    }
    out
}

/// `W^max` over `(size, overlap)` pairs: the summed `W` entries from one set
/// with size `h` and overlap `i` to all sets with size `k` and overlap `o`,
/// `S^{(L)}_{o,i} S^{(n-L)}_{k-o,h-i} / √N`.
///
/// The overlap index is called `i`/`o` here so it does not collide with the
/// step index `j`.
pub fn wmax_matrix(n: usize, l: usize) -> DenseMatrix {
    let inside = KrawtchoukTable::new(l);
    let outside = KrawtchoukTable::new(n - l);
    let pairs = overlap_pairs(n, l);
    let mut w = DenseMatrix::zeros(pairs.len(), pairs.len());
    for (r, &(h, i)) in pairs.iter().enumerate() {
        for (c, &(k, o)) in pairs.iter().enumerate() {
            let exact: BigInt = inside.get(o, i) * outside.get(k - o, h - i);
            w.set(r, c, scale_by_inv_sqrt_pow2(&exact, n));
        }
    }
    w
}

/// `D^max` over [`overlap_pairs`]: the sign depends on the size only.
pub fn dmax_diagonal(n: usize, l: usize) -> Vec<f64> {
    overlap_pairs(n, l).iter().map(|&(k, _)| size_sign(n, k)).collect()
}

/// `V^max = W^max D^max W^max`, dense. Only practical for small `n`;
/// [`MaxSimulator`] applies the same map in factored form.
pub fn vmax_matrix(n: usize, l: usize) -> DenseMatrix {
    let w = wmax_matrix(n, l);
    w.sandwich(&dmax_diagonal(n, l), &w)
}

/// Amplitudes indexed by `(inside, outside)`: the number of members inside
/// and outside the solution `{1, ..., L}`. Size is `inside + outside`,
/// overlap is `inside`.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedStateMax {
    n: usize,
    l: usize,
    psi: Vec<f64>,
}

impl ReducedStateMax {
    pub fn initial(n: usize, l: usize) -> Self {
        let mut psi = vec![0.0; (l + 1) * (n - l + 1)];
        psi[0] = 1.0;
        ReducedStateMax { n, l, psi }
    }

    fn slot(&self, inside: usize, outside: usize) -> usize {
        inside * (self.n - self.l + 1) + outside
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn solution_size(&self) -> usize {
        self.l
    }

    /// Amplitude of each set with size `k` and overlap `o`, if the pair is valid.
    pub fn get(&self, k: usize, o: usize) -> Option<f64> {
        if o > self.l || o > k || k - o > self.n - self.l {
            None
        } else {
            Some(self.psi[self.slot(o, k - o)])
        }
    }

    /// Probability held by all sets with size `k` and overlap `o`.
    pub fn class_probability(&self, k: usize, o: usize) -> f64 {
        self.get(k, o).map_or(0.0, |a| {
            binomial_f64(self.l, o) * binomial_f64(self.n - self.l, k - o) * a * a
        })
    }

    pub fn weighted_norm_sqr(&self) -> f64 {
        overlap_pairs(self.n, self.l)
            .into_iter()
            .map(|(k, o)| self.class_probability(k, o))
            .sum()
    }

    /// Values in [`overlap_pairs`] order.
    pub fn to_pair_vector(&self) -> Vec<f64> {
        overlap_pairs(self.n, self.l)
            .into_iter()
            .map(|(k, o)| self.get(k, o).unwrap())
            .collect()
    }

    pub fn from_pair_vector(n: usize, l: usize, values: &[f64]) -> Result<Self> {
        let pairs = overlap_pairs(n, l);
        if values.len() != pairs.len() {
            return Err(Error::DimensionMismatch { expected: pairs.len(), actual: values.len() });
        }
        let mut s = ReducedStateMax::initial(n, l);
        s.psi[0] = 0.0;
        for (&(k, o), &v) in pairs.iter().zip(values) {
            let slot = s.slot(o, k - o);
            s.psi[slot] = v;
        }
        Ok(s)
    }

    /// The full-lattice state, with the solution taken as `{1, ..., L}`.
    pub fn to_full(&self) -> StateVector {
        let mask = (1usize << self.l) - 1;
        let amp = (0..1usize << self.n)
            .map(|i| {
                let inside = (i & mask).count_ones() as usize;
                let outside = (i & !mask).count_ones() as usize;
                self.psi[self.slot(inside, outside)]
            })
            .collect();
        StateVector::from_amplitudes(amp).expect("power-of-two length")
    }
}

/// Applies `V^max` as two small Krawtchouk factors per `W`, so one step
/// costs `O(L (n - L) n)` instead of `O((L (n - L))²)`.
#[derive(Clone, Debug)]
pub struct MaxSimulator {
    n: usize,
    l: usize,
    // inside[a][a'] = S^{(L)}_{a,a'}, outside[b][b'] = S^{(n-L)}_{b,b'}
    inside: Vec<f64>,
    outside: Vec<f64>,
    signs: DiagonalSigns,
}

impl MaxSimulator {
    pub fn new(n: usize, l: usize) -> Result<Self> {
        check_sizes(n, l)?;
        let exact = |table: &KrawtchoukTable| -> Vec<f64> {
            let m = table.n();
            let mut out = Vec::with_capacity((m + 1) * (m + 1));
            for a in 0..=m {
                for b in 0..=m {
                    out.push(table.get(a, b).to_f64().expect("BigInt to f64 is total"));
                }
            }
            out
        };
        Ok(MaxSimulator {
            n,
            l,
            inside: exact(&KrawtchoukTable::new(l)),
            outside: exact(&KrawtchoukTable::new(n - l)),
            signs: DiagonalSigns::new(n),
        })
    }

    fn apply_w(&self, psi: &[f64]) -> Vec<f64> {
        let a_dim = self.l + 1;
        let b_dim = self.n - self.l + 1;
        let mut tmp = vec![0.0; a_dim * b_dim];
        for a in 0..a_dim {
            let row = &psi[a * b_dim..(a + 1) * b_dim];
            let dst = &mut tmp[a * b_dim..(a + 1) * b_dim];
            for (b, &x) in row.iter().enumerate() {
                if x == 0.0 {
                    continue;
                }
                let coeffs = &self.outside[b * b_dim..(b + 1) * b_dim];
                for (d, c) in dst.iter_mut().zip(coeffs) {
                    *d += c * x;
                }
            }
        }
        let scale = inv_sqrt_pow2(self.n);
        let mut out = vec![0.0; a_dim * b_dim];
        for a in 0..a_dim {
            let src = &tmp[a * b_dim..(a + 1) * b_dim];
            for a2 in 0..a_dim {
                let c = self.inside[a * a_dim + a2] * scale;
                let dst = &mut out[a2 * b_dim..(a2 + 1) * b_dim];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += c * s;
                }
            }
        }
        out
    }

    pub fn apply(&self, state: &ReducedStateMax) -> ReducedStateMax {
        let b_dim = self.n - self.l + 1;
        let mut psi = self.apply_w(&state.psi);
        for (slot, v) in psi.iter_mut().enumerate() {
            let size = slot / b_dim + slot % b_dim;
            if self.signs.sign(size) < 0 {
                *v = -*v;
            }
        }
        ReducedStateMax { n: self.n, l: self.l, psi: self.apply_w(&psi) }
    }

    /// Runs the maximum-nogood problem. The level profile holds, per step,
    /// the probability in goods of each size `k`: `C(L, k) ψ_{k,k}²`.
    pub fn run(&self, steps: usize, policy: PhasePolicy) -> Result<RunRecord> {
        let (n, l) = (self.n, self.l);
        let b_dim = n - l + 1;
        let mut state = ReducedStateMax::initial(n, l);
        let level_profile = |s: &ReducedStateMax| -> Vec<f64> {
            (0..=n).map(|k| if k <= l { s.class_probability(k, k) } else { 0.0 }).collect()
        };
        let solution_probability = |s: &ReducedStateMax| {
            let a = s.psi[s.slot(l, 0)];
            a * a
        };
        let mut p_soln = vec![solution_probability(&state)];
        let mut profile = vec![level_profile(&state)];
        let mut max_norm_error = 0.0f64;
        for j in 1..=steps {
            let threshold = policy.size_threshold(j, l);
            for (slot, a) in state.psi.iter_mut().enumerate() {
                let (inside, outside) = (slot / b_dim, slot % b_dim);
                let size = inside + outside;
                // Nogoods: anything with a member outside the solution.
                if outside > 0 || size < threshold {
                    *a = -*a;
                }
            }
            state = self.apply(&state);
            let deviation = (state.weighted_norm_sqr() - 1.0).abs();
            if !(deviation < NORM_TOLERANCE) {
                return Err(Error::NormDrift { step: j, deviation });
            }
            max_norm_error = max_norm_error.max(deviation);
            p_soln.push(solution_probability(&state));
            profile.push(level_profile(&state));
        }
        Ok(RunRecord::finish(steps, p_soln, Some(profile), max_norm_error))
    }
}

/// Maximum-nogood problem with `n` assumptions and the single solution
/// `{1, ..., L}`.
pub fn run_max(n: usize, l: usize, steps: usize, policy: PhasePolicy) -> Result<RunRecord> {
    MaxSimulator::new(n, l)?.run(steps, policy)
}
