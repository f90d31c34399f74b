use num_bigint::BigInt;
use qsearch_core::lattice::{binomial, krawtchouk};
use qsearch_core::KrawtchoukTable;

fn b(a: usize, k: i64) -> BigInt {
    BigInt::from(binomial(a as u64, k))
}

// Σ over all sets t of size k of (-1)^{|t ∩ {1..m}|}.
fn parity_enumeration(n: usize, k: usize, m: usize) -> i64 {
    let r = (1u64 << m) - 1;
    (0u64..1 << n)
        .filter(|t| t.count_ones() as usize == k)
        .map(|t| if (t & r).count_ones() % 2 == 0 { 1 } else { -1 })
        .sum()
}

#[test]
fn matches_parity_enumeration_up_to_ten() {
    for n in 0..=10 {
        let table = KrawtchoukTable::new(n);
        for k in 0..=n {
            for m in 0..=n {
                let expected = BigInt::from(parity_enumeration(n, k, m));
                assert_eq!(krawtchouk(n, k, m), expected, "direct n={n} k={k} m={m}");
                assert_eq!(table.get(k, m), &expected, "table n={n} k={k} m={m}");
            }
        }
    }
}

#[test]
fn low_order_identities() {
    for n in 1..=60 {
        let table = KrawtchoukTable::new(n);
        assert_eq!(krawtchouk(n, 0, 1), BigInt::from(1));
        for k in 0..=n {
            assert_eq!(table.get(k, 0), &b(n, k as i64));
            assert_eq!(table.get(k, 1), &(b(n - 1, k as i64) - b(n - 1, k as i64 - 1)), "n={n} k={k}");
        }
    }
}

#[test]
fn three_term_recurrence_at_one_hundred() {
    // (k+1) K_{k+1}(x) = (n - 2x) K_k(x) - (n - k + 1) K_{k-1}(x)
    let n = 100usize;
    let table = KrawtchoukTable::new(n);
    for x in 0..=n {
        let mut prev = BigInt::from(1);
        let mut cur = BigInt::from(n as i64 - 2 * x as i64);
        assert_eq!(table.get(0, x), &prev);
        assert_eq!(table.get(1, x), &cur);
        for k in 1..n {
            let next = (BigInt::from(n as i64 - 2 * x as i64) * &cur - BigInt::from((n - k + 1) as i64) * &prev)
                / BigInt::from((k + 1) as i64);
            assert_eq!(table.get(k + 1, x), &next, "k={} x={x}", k + 1);
            prev = cur;
            cur = next;
        }
    }
}

#[test]
fn reciprocity_at_one_hundred() {
    // C(n, m) S_km = C(n, k) S_mk
    let n = 100usize;
    let table = KrawtchoukTable::new(n);
    for k in (0..=n).step_by(7) {
        for m in 0..=n {
            assert_eq!(b(n, m as i64) * table.get(k, m), b(n, k as i64) * table.get(m, k));
        }
    }
    assert_eq!(binomial(100, 50).to_string(), "100891344545564193334812497256");
}
