//! Exact integer helpers: gcd, trial-division factorization, bounded divisor
//! products, and the probability laws the samplers and oracle rely on.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Largest integer `factorize` accepts.
pub const FACTORIZE_LIMIT: u64 = 1_000_000_000;

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

/// Prime factorization as `(prime, exponent)` pairs, primes increasing.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Factorization(Vec<(u64, u32)>);

impl Factorization {
    pub fn pairs(&self) -> &[(u64, u32)] {
        &self.0
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.0.iter().map(|&(p, _)| p)
    }

    pub fn value(&self) -> u64 {
        self.0.iter().map(|&(p, e)| p.pow(e)).product()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

pub fn factorize(n: u64) -> Result<Factorization> {
    if n == 0 || n > FACTORIZE_LIMIT {
        return Err(Error::invalid(format!(
            "factorize expects 1 <= n <= {FACTORIZE_LIMIT}, got {n}"
        )));
    }
    Ok(trial_division(n))
}

fn trial_division(mut n: u64) -> Factorization {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            let mut e = 0;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    Factorization(out)
}

pub fn is_prime(n: u64) -> bool {
    n >= 2 && trial_division(n).0 == [(n, 1)]
}

/// Returns `(p, e)` when `n = p^e` with `e >= 1`.
pub fn as_prime_power(n: u64) -> Option<(u64, u32)> {
    if n < 2 {
        return None;
    }
    match trial_division(n).0.as_slice() {
        [single] => Some(*single),
        _ => None,
    }
}

/// Per-prime exponent limits. Primes without an explicit entry take the
/// default, which is 0 for [`ExponentCaps::new`] and unbounded for
/// [`ExponentCaps::unbounded`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExponentCaps {
    explicit: BTreeMap<u64, u32>,
    default: u32,
}

impl Default for ExponentCaps {
    fn default() -> Self {
        ExponentCaps::new()
    }
}

impl ExponentCaps {
    pub fn new() -> Self {
        ExponentCaps {
            explicit: BTreeMap::new(),
            default: 0,
        }
    }

    pub fn unbounded() -> Self {
        ExponentCaps {
            explicit: BTreeMap::new(),
            default: u32::MAX,
        }
    }

    pub fn with(mut self, prime: u64, max_exponent: u32) -> Self {
        self.explicit.insert(prime, max_exponent);
        self
    }

    pub fn from_pairs(pairs: &[(u64, u32)]) -> Self {
        pairs
            .iter()
            .fold(ExponentCaps::new(), |caps, &(p, e)| caps.with(p, e))
    }

    pub fn get(&self, prime: u64) -> u32 {
        self.explicit.get(&prime).copied().unwrap_or(self.default)
    }

    pub fn explicit(&self) -> impl Iterator<Item = (u64, u32)> + '_ {
        self.explicit.iter().map(|(&p, &e)| (p, e))
    }
}

/// All products `prod p^e` over the primes of `f`, with `e <= caps[p]` and
/// product `<= cap`. Sorted ascending; always contains 1.
pub fn divisor_products(f: &Factorization, caps: &ExponentCaps, cap: u64) -> Vec<u64> {
    let limits: Vec<(u64, u32)> = f.primes().map(|p| (p, caps.get(p))).collect();
    products_with_limits(&limits, cap)
}

/// Products of prime powers `p^e` with `e <= limit` for each `(p, limit)`,
/// bounded by `cap`. Primes must be distinct.
pub(crate) fn products_with_limits(limits: &[(u64, u32)], cap: u64) -> Vec<u64> {
    let mut values = vec![1u64];
    if cap == 0 {
        return Vec::new();
    }
    for &(p, limit) in limits {
        let mut next = Vec::with_capacity(values.len() * 2);
        for &v in &values {
            let mut x = v;
            let mut e = 0;
            loop {
                next.push(x);
                if e == limit {
                    break;
                }
                match x.checked_mul(p) {
                    Some(y) if y <= cap => x = y,
                    _ => break,
                }
                e += 1;
            }
        }
        values = next;
    }
    values.sort_unstable();
    values.dedup();
    values
}

/// Asymptotic probability that two uniform integers have gcd `k`.
pub fn cesaro_pmf(k: u64) -> f64 {
    let k = k as f64;
    6.0 / (PI * PI * k * k)
}

/// Normalizer `C` with `1/C = sum_{i=1..kmax} i^-power`.
pub fn harmonic_norm(kmax: u64, power: f64) -> f64 {
    // Sum smallest terms first.
    let s: f64 = (1..=kmax).rev().map(|i| (i as f64).powf(-power)).sum();
    1.0 / s
}
