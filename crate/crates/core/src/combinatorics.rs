//! Exact binomial and multinomial coefficients.
//!
//! Coefficients are represented by their prime factorization (Legendre's
//! formula), so the exponents are exact integers at any size. The exact
//! `BigUint` value is rebuilt from the factorization on demand, and base-2
//! logarithms are taken only at the very end as `sum(e_p * log2(p))`.

use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// Tolerance used to decide whether a float logarithm is close enough to an
/// integer that its ceiling must be settled on the exact value.
const CEIL_GUARD: f64 = 1e-6;

struct PrimeCache {
    limit: usize,
    primes: Arc<Vec<u32>>,
}

fn cache() -> &'static RwLock<PrimeCache> {
    static CACHE: OnceLock<RwLock<PrimeCache>> = OnceLock::new();
    CACHE.get_or_init(|| {
        RwLock::new(PrimeCache {
            limit: 1,
            primes: Arc::new(Vec::new()),
        })
    })
}

fn sieve(limit: usize) -> Vec<u32> {
    let mut composite = vec![false; limit + 1];
    let mut primes = Vec::new();
    for i in 2..=limit {
        if !composite[i] {
            primes.push(i as u32);
            let mut j = i * i;
            while j <= limit {
                composite[j] = true;
                j += i;
            }
        }
    }
    primes
}

/// All primes `<= n` (possibly more; callers stop at `n`).
fn primes_covering(n: usize) -> Arc<Vec<u32>> {
    {
        let c = cache().read().expect("prime cache poisoned");
        if c.limit >= n {
            return Arc::clone(&c.primes);
        }
    }
    let mut c = cache().write().expect("prime cache poisoned");
    if c.limit < n {
        let limit = n.max(1024).next_power_of_two();
        c.primes = Arc::new(sieve(limit));
        c.limit = limit;
    }
    Arc::clone(&c.primes)
}

/// Exponent of prime `p` in `n!`.
fn legendre(n: u64, p: u64) -> u64 {
    let mut e = 0;
    let mut q = n;
    while q > 0 {
        q /= p;
        e += q;
    }
    e
}

/// Prime factorization of a coefficient, as `(prime, exponent)` pairs with
/// nonzero exponents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization {
    pub factors: Vec<(u32, u64)>,
}

impl Factorization {
    /// Factorization of `total! / prod(parts[i]!)`; `parts` must sum to `total`.
    pub fn multinomial(parts: &[u64]) -> Self {
        let total: u64 = parts.iter().sum();
        let primes = primes_covering(total as usize);
        let factors = primes
            .iter()
            .take_while(|&&p| u64::from(p) <= total)
            .filter_map(|&p| {
                let p64 = u64::from(p);
                let e = legendre(total, p64) - parts.iter().map(|&k| legendre(k, p64)).sum::<u64>();
                (e > 0).then_some((p, e))
            })
            .collect();
        Self { factors }
    }

    pub fn binomial(n: u64, k: u64) -> Result<Self> {
        if k > n {
            return Err(Error::domain(format!("binomial: k={k} exceeds n={n}")));
        }
        Ok(Self::multinomial(&[k, n - k]))
    }

    pub fn is_one(&self) -> bool {
        self.factors.is_empty()
    }

    /// Base-2 logarithm of the coefficient.
    pub fn log2(&self) -> f64 {
        // Compensated summation keeps the error far below CEIL_GUARD even for
        // coefficients with millions of bits.
        let mut sum = 0.0f64;
        let mut comp = 0.0f64;
        for &(p, e) in &self.factors {
            let term = e as f64 * f64::from(p).log2() - comp;
            let t = sum + term;
            comp = (t - sum) - term;
            sum = t;
        }
        sum
    }

    /// The exact value, built by a balanced product tree.
    pub fn to_biguint(&self) -> BigUint {
        let mut layer: Vec<BigUint> = self
            .factors
            .iter()
            .map(|&(p, e)| BigUint::from(p).pow(e as u32))
            .collect();
        if layer.is_empty() {
            return BigUint::one();
        }
        while layer.len() > 1 {
            layer = layer
                .chunks(2)
                .map(|pair| match pair {
                    [a, b] => a * b,
                    [a] => a.clone(),
                    _ => unreachable!(),
                })
                .collect();
        }
        layer.pop().unwrap()
    }

    /// `ceil(log2(value))`, exact. Zero for the coefficient 1.
    pub fn ceil_log2(&self) -> u64 {
        if self.is_one() {
            return 0;
        }
        let approx = self.log2();
        let nearest = approx.round();
        if (approx - nearest).abs() > CEIL_GUARD {
            return approx.ceil() as u64;
        }
        ceil_log2_big(&self.to_biguint())
    }
}

/// Exact `C(n, k)`.
pub fn binomial(n: u64, k: u64) -> Result<BigUint> {
    Ok(Factorization::binomial(n, k)?.to_biguint())
}

/// `C(n, k)` as an arbitrary-precision integer, zero when `k > n`.
pub fn binomial_or_zero(n: u64, k: u64) -> BigUint {
    if k > n {
        BigUint::zero()
    } else {
        Factorization::binomial(n, k)
            .expect("k <= n checked")
            .to_biguint()
    }
}

/// `log2 C(n, k)` from the exact factorization.
pub fn log2_binomial(n: u64, k: u64) -> Result<f64> {
    Ok(Factorization::binomial(n, k)?.log2())
}

/// `log2` of the multinomial `sum(parts)! / prod(parts[i]!)`.
pub fn log2_multinomial(parts: &[u64]) -> f64 {
    Factorization::multinomial(parts).log2()
}

/// `ceil(log2 v)` for `v >= 1`.
pub fn ceil_log2_big(v: &BigUint) -> u64 {
    assert!(!v.is_zero(), "ceil_log2 of zero");
    if v.is_one() {
        0
    } else {
        (v - 1u32).bits()
    }
}

/// `log2 v` for an arbitrary-precision `v >= 1`.
pub fn log2_big(v: &BigUint) -> f64 {
    assert!(!v.is_zero(), "log2 of zero");
    let bits = v.bits();
    if bits <= 64 {
        let low = v.iter_u64_digits().next().unwrap_or(0);
        return (low as f64).log2();
    }
    let shift = bits - 64;
    let top = (v >> shift).iter_u64_digits().next().unwrap_or(0);
    shift as f64 + (top as f64).log2()
}

/// Bit length of the Elias-gamma codeword for `x >= 1`.
pub fn elias_gamma_len(x: u64) -> u64 {
    assert!(x >= 1, "Elias gamma is undefined for 0");
    2 * u64::from(63 - x.leading_zeros()) + 1
}

#[cfg(test)]
mod tests {
    use super::*;

    // Pascal's rule on u128, independent of the factorization path.
    fn pascal(n: usize) -> Vec<Vec<u128>> {
        let mut rows = vec![vec![1u128]];
        for i in 1..=n {
            let prev = &rows[i - 1];
            let mut row = vec![1u128; i + 1];
            for j in 1..i {
                row[j] = prev[j - 1] + prev[j];
            }
            rows.push(row);
        }
        rows
    }

    #[test]
    fn matches_pascal_triangle() {
        let rows = pascal(100);
        for n in 0..=100u64 {
            for k in 0..=n {
                let exact = binomial(n, k).unwrap();
                assert_eq!(
                    exact,
                    BigUint::from(rows[n as usize][k as usize]),
                    "C({n},{k})"
                );
            }
        }
    }

    #[test]
    fn row_sums_are_powers_of_two() {
        for n in 0..=40u64 {
            let total: BigUint = (0..=n).map(|k| binomial(n, k).unwrap()).sum();
            assert_eq!(total, BigUint::one() << n);
        }
    }

    #[test]
    fn known_values() {
        assert_eq!(binomial(35, 9).unwrap(), BigUint::from(70_607_460u64));
        assert_eq!(binomial(4, 2).unwrap(), BigUint::from(6u32));
        assert!(binomial(3, 4).is_err());
        assert!(binomial_or_zero(3, 4).is_zero());
        assert!((log2_binomial(35, 9).unwrap() - 26.073_317_283).abs() < 1e-8);
    }

    #[test]
    fn log_matches_big_integer_log() {
        for &(n, k) in &[(1000u64, 500u64), (1000, 100), (4096, 17), (20000, 9999)] {
            let via_factors = log2_binomial(n, k).unwrap();
            let via_big = log2_big(&binomial(n, k).unwrap());
            assert!(
                (via_factors - via_big).abs() < 1e-9 * via_big.max(1.0),
                "C({n},{k})"
            );
        }
    }

    #[test]
    fn multinomial_matches_product_of_binomials() {
        let parts = [3u64, 5, 0, 7];
        let expected = binomial(15, 3).unwrap() * binomial(12, 5).unwrap();
        assert_eq!(Factorization::multinomial(&parts).to_biguint(), expected);
        assert!((log2_multinomial(&[1, 1, 0, 1]) - 6f64.log2()).abs() < 1e-12);
        assert_eq!(log2_multinomial(&[5, 0, 0, 0]), 0.0);
    }

    #[test]
    fn ceil_log2_exact_on_powers_of_two() {
        // C(n, 1) = n hits exact powers of two.
        for n in 1..=300u64 {
            let f = Factorization::binomial(n, 1).unwrap();
            let expected = (n as f64).log2().ceil() as u64;
            assert_eq!(f.ceil_log2(), expected, "n={n}");
        }
        assert_eq!(ceil_log2_big(&BigUint::from(6u32)), 3);
        assert_eq!(ceil_log2_big(&BigUint::from(8u32)), 3);
        assert_eq!(ceil_log2_big(&BigUint::from(9u32)), 4);
    }

    #[test]
    fn gamma_lengths() {
        assert_eq!(elias_gamma_len(1), 1);
        assert_eq!(elias_gamma_len(2), 3);
        assert_eq!(elias_gamma_len(3), 3);
        assert_eq!(elias_gamma_len(8), 7);
        assert_eq!(elias_gamma_len(10), 7);
    }
}
