//! Subset-lattice combinatorics.
//!
//! Sets of assumptions are bit masks: assumption `i` (numbered from 1) lives
//! at bit `i - 1`. The integer value of the mask is also the set's position
//! in the lattice ordering, so sets without assumption `n` come before the
//! sets containing it.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// Largest assumption count representable by an [`AssumptionSet`].
pub const MAX_ASSUMPTIONS: usize = 64;

/// A subset of the assumptions `{1, ..., n}`.
#[derive(Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AssumptionSet(u64);

impl AssumptionSet {
    pub const EMPTY: AssumptionSet = AssumptionSet(0);

    pub const fn from_bits(bits: u64) -> Self {
        AssumptionSet(bits)
    }

    /// Builds a set from 1-based assumption numbers. Returns `None` if any
    /// number is zero or exceeds [`MAX_ASSUMPTIONS`].
    pub fn from_assumptions<I>(items: I) -> Option<Self>
    where
        I: IntoIterator<Item = usize>,
    {
        let mut bits = 0u64;
        for i in items {
            if i == 0 || i > MAX_ASSUMPTIONS {
                return None;
            }
            bits |= 1 << (i - 1);
        }
        Some(AssumptionSet(bits))
    }

    /// The set `{1, ..., k}`.
    pub fn prefix(k: usize) -> Self {
        assert!(k <= MAX_ASSUMPTIONS);
        if k == MAX_ASSUMPTIONS {
            AssumptionSet(u64::MAX)
        } else {
            AssumptionSet((1u64 << k) - 1)
        }
    }

    pub const fn bits(self) -> u64 {
        self.0
    }

    /// Position of the set in the lattice ordering.
    pub const fn index(self) -> usize {
        self.0 as usize
    }

    /// Number of assumptions in the set, `|s|`.
    pub const fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub const fn is_empty(self) -> bool {
        self.0 == 0
    }

    /// True when every assumption lies in `{1, ..., n}`.
    pub fn fits(self, n: usize) -> bool {
        n >= MAX_ASSUMPTIONS || self.0 >> n == 0
    }

    pub fn contains(self, assumption: usize) -> bool {
        (1..=MAX_ASSUMPTIONS).contains(&assumption) && self.0 >> (assumption - 1) & 1 == 1
    }

    pub fn with(self, assumption: usize) -> Self {
        AssumptionSet(self.0 | 1 << (assumption - 1))
    }

    pub fn is_subset_of(self, other: AssumptionSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn intersection(self, other: AssumptionSet) -> Self {
        AssumptionSet(self.0 & other.0)
    }

    pub fn union(self, other: AssumptionSet) -> Self {
        AssumptionSet(self.0 | other.0)
    }

    /// `|r| + |s| - 2|r ∩ s|`, the number of assumptions in exactly one set.
    pub fn hamming_distance(self, other: AssumptionSet) -> usize {
        (self.0 ^ other.0).count_ones() as usize
    }

    /// 1-based assumption numbers in increasing order.
    pub fn assumptions(self) -> impl Iterator<Item = usize> {
        let bits = self.0;
        (0..MAX_ASSUMPTIONS)
            .filter(move |b| bits >> b & 1 == 1)
            .map(|b| b + 1)
    }
}

impl fmt::Debug for AssumptionSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.assumptions()).finish()
    }
}

/// Lattice position of `s`.
pub fn set_index(s: AssumptionSet) -> usize {
    s.index()
}

/// Exact binomial coefficient; zero when `b < 0` or `b > a`.
pub fn binomial(a: u64, b: i64) -> BigUint {
    if b < 0 || b as u64 > a {
        return BigUint::zero();
    }
    let b = (b as u64).min(a - b as u64);
    let mut acc = BigUint::one();
    for i in 0..b {
        acc *= a - i;
        acc /= i + 1;
    }
    acc
}

/// Binomial with a possibly negative top argument, treated as zero.
#[cfg(test)]
pub(crate) fn binomial_signed(a: i64, b: i64) -> BigInt {
    if a < 0 {
        BigInt::zero()
    } else {
        BigInt::from(binomial(a as u64, b))
    }
}

/// Binomial coefficient as `f64`, for degeneracy weights.
pub fn binomial_f64(a: usize, b: usize) -> f64 {
    if b > a {
        return 0.0;
    }
    let b = b.min(a - b);
    let mut acc = 1.0f64;
    for i in 0..b {
        acc = acc * (a - i) as f64 / (i + 1) as f64;
    }
    acc.round_if_exact()
}

trait RoundIfExact {
    fn round_if_exact(self) -> Self;
}

impl RoundIfExact for f64 {
    // Below 2^53 the product-quotient recurrence only picks up rounding
    // noise; the true value is an integer.
    fn round_if_exact(self) -> Self {
        if self < 9.007_199_254_740_992e15 {
            self.round()
        } else {
            self
        }
    }
}

/// `S_{km}^{(n)} = Σ_λ (-1)^λ C(m, λ) C(n - m, k - λ)`, the parity sum over
/// all sets `t` of size `k` for two sets at Hamming distance `m`.
pub fn krawtchouk(n: usize, k: usize, m: usize) -> BigInt {
    assert!(k <= n && m <= n, "krawtchouk({n}, {k}, {m}) out of range");
    let mut acc = BigInt::zero();
    for lambda in 0..=m.min(k) {
        let term = BigInt::from(binomial(m as u64, lambda as i64))
            * BigInt::from(binomial((n - m) as u64, (k - lambda) as i64));
        if lambda % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    acc
}

/// All `S_{km}^{(n)}` for `0 <= k, m <= n`, exact.
#[derive(Clone, Debug)]
pub struct KrawtchoukTable {
    n: usize,
    values: Vec<BigInt>,
}

impl KrawtchoukTable {
    pub fn new(n: usize) -> Self {
        let pascal = pascal_rows(n);
        let mut values = Vec::with_capacity((n + 1) * (n + 1));
        for k in 0..=n {
            for m in 0..=n {
                let mut pos = BigUint::zero();
                let mut neg = BigUint::zero();
                // λ ranges over max(0, k - (n - m)) ..= min(m, k).
                let lo = k.saturating_sub(n - m);
                for lambda in lo..=m.min(k) {
                    let term = &pascal[m][lambda] * &pascal[n - m][k - lambda];
                    if lambda % 2 == 0 {
                        pos += term;
                    } else {
                        neg += term;
                    }
                }
                values.push(BigInt::from(pos) - BigInt::from(neg));
            }
        }
        KrawtchoukTable { n, values }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, k: usize, m: usize) -> &BigInt {
        &self.values[k * (self.n + 1) + m]
    }

    /// `S_{km}^{(n)} / √(2^n)` rounded once to `f64`.
    pub fn scaled(&self, k: usize, m: usize) -> f64 {
        scale_by_inv_sqrt_pow2(self.get(k, m), self.n)
    }
}

fn pascal_rows(n: usize) -> Vec<Vec<BigUint>> {
    let mut rows: Vec<Vec<BigUint>> = Vec::with_capacity(n + 1);
    rows.push(vec![BigUint::one()]);
    for a in 1..=n {
        let prev = &rows[a - 1];
        let mut row = Vec::with_capacity(a + 1);
        row.push(BigUint::one());
        for b in 1..a {
            row.push(&prev[b - 1] + &prev[b]);
        }
        row.push(BigUint::one());
        rows.push(row);
    }
    rows
}

/// `1 / √(2^n)`; exact for even `n`, one rounding for odd `n`.
pub fn inv_sqrt_pow2(n: usize) -> f64 {
    let half = (n / 2) as i32;
    let base = 2f64.powi(-half);
    if n % 2 == 1 {
        base * std::f64::consts::FRAC_1_SQRT_2
    } else {
        base
    }
}

/// Converts `x / √(2^n)` to `f64` without forming the quotient in floating
/// point before the integer has been rounded.
pub fn scale_by_inv_sqrt_pow2(x: &BigInt, n: usize) -> f64 {
    let v = x.to_f64().expect("BigInt to f64 is total");
    v * inv_sqrt_pow2(n)
}

/// Converts `x / 2^n` to `f64`.
pub fn scale_by_inv_pow2(x: &BigInt, n: usize) -> f64 {
    let v = x.to_f64().expect("BigInt to f64 is total");
    v * 2f64.powi(-(n as i32))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_order_for_three_assumptions() {
        let order = [
            vec![],
            vec![1],
            vec![2],
            vec![1, 2],
            vec![3],
            vec![1, 3],
            vec![2, 3],
            vec![1, 2, 3],
        ];
        for (i, items) in order.iter().enumerate() {
            let s = AssumptionSet::from_assumptions(items.iter().copied()).unwrap();
            assert_eq!(set_index(s), i);
            assert!(s.fits(3));
            assert_eq!(s.assumptions().collect::<Vec<_>>(), *items);
        }
        assert_eq!(set_index(AssumptionSet::EMPTY), 0);
        assert_eq!(set_index(AssumptionSet::from_assumptions([1, 3]).unwrap()), 5);
    }

    #[test]
    fn rejects_assumption_zero() {
        assert!(AssumptionSet::from_assumptions([0]).is_none());
        assert!(AssumptionSet::from_assumptions([65]).is_none());
        assert!(!AssumptionSet::from_bits(0b1000).fits(3));
    }

    #[test]
    fn binomial_edges() {
        assert_eq!(binomial(4, 2), BigUint::from(6u32));
        assert_eq!(binomial(5, -1), BigUint::zero());
        assert_eq!(binomial(5, 6), BigUint::zero());
        assert_eq!(binomial(0, 0), BigUint::one());
        assert_eq!(binomial_f64(12, 6), 924.0);
        assert_eq!(binomial_f64(3, 5), 0.0);
    }

    #[test]
    fn binomial_beyond_u64_matches_pascal_triangle() {
        // Pascal-triangle oracle, independent of the multiplicative formula.
        let rows = pascal_rows(100);
        let expected: BigUint = "100891344545564193334812497256".parse().unwrap();
        assert_eq!(rows[100][50], expected);
        assert_eq!(binomial(100, 50), expected);
        for b in 0..=100 {
            assert_eq!(binomial(100, b), rows[100][b as usize]);
        }
    }

    #[test]
    fn closed_forms_for_m_zero_and_one() {
        for n in 1..=30usize {
            assert_eq!(krawtchouk(n, 0, 1), BigInt::one());
            for k in 0..=n {
                assert_eq!(krawtchouk(n, k, 0), BigInt::from(binomial(n as u64, k as i64)));
                let expected = binomial_signed(n as i64 - 1, k as i64)
                    - binomial_signed(n as i64 - 1, k as i64 - 1);
                assert_eq!(krawtchouk(n, k, 1), expected);
            }
        }
        assert_eq!(krawtchouk(4, 1, 1), BigInt::from(2));
    }

    #[test]
    fn superset_coupling_sign_pattern() {
        for n in 1..=40usize {
            for k in 0..=n {
                let s = krawtchouk(n, k, 1);
                match (2 * k).cmp(&n) {
                    std::cmp::Ordering::Less => assert!(s > BigInt::zero()),
                    std::cmp::Ordering::Equal => assert!(s.is_zero()),
                    std::cmp::Ordering::Greater => assert!(s < BigInt::zero()),
                }
            }
        }
    }

    #[test]
    fn parity_sum_enumeration_n6_k3_m2() {
        // r = {1}, s = {2}: distance 2. Enumerate all 20 sets t of size 3.
        let r = 0b000001u64;
        let s = 0b000010u64;
        let mut direct = 0i64;
        for t in 0u64..64 {
            if t.count_ones() == 3 {
                let parity = (r & t).count_ones() + (s & t).count_ones();
                direct += if parity % 2 == 0 { 1 } else { -1 };
            }
        }
        assert_eq!(krawtchouk(6, 3, 2), BigInt::from(direct));
        assert_eq!(direct, -4);
    }

    #[test]
    fn table_matches_direct_sum() {
        for n in [1usize, 5, 12, 33] {
            let table = KrawtchoukTable::new(n);
            for k in 0..=n {
                for m in 0..=n {
                    assert_eq!(*table.get(k, m), krawtchouk(n, k, m), "n={n} k={k} m={m}");
                }
            }
        }
    }

    #[test]
    fn power_of_two_scaling() {
        assert_eq!(inv_sqrt_pow2(4), 0.25);
        assert!((inv_sqrt_pow2(3) - 1.0 / 8f64.sqrt()).abs() < 1e-16);
        let x: BigInt = binomial(100, 50).into();
        let v = scale_by_inv_sqrt_pow2(&x, 100);
        assert!((v / (1.008_913_445_455_641_9e29 / 2f64.powi(50)) - 1.0).abs() < 1e-15);
    }
}
