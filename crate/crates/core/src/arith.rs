//! Small number-theoretic helpers shared across the crate.

use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::{Int, Rat, C64};

/// Sieve of Eratosthenes up to and including `n`.
pub fn primes_up_to(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for p in 2..=n {
        if !composite[p] {
            out.push(p as u64);
            let mut q = p * p;
            while q <= n {
                composite[q] = true;
                q += p;
            }
        }
    }
    out
}

/// Deterministic primality check by trial division; fine for the desk scales
/// used here.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// Prime factorization `n = prod p^e` by trial division, returned as
/// `(p, e)` pairs in increasing order of `p`.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
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
    out
}

/// Euler's totient.
pub fn euler_phi(n: u64) -> u64 {
    factorize(n)
        .into_iter()
        .map(|(p, e)| (p - 1) * p.pow(e - 1))
        .product()
}

/// Integer square root: the largest `r` with `r * r <= n`.
pub fn isqrt(n: u64) -> u64 {
    if n == 0 {
        return 0;
    }
    let mut r = (n as f64).sqrt() as u64;
    while r > 0 && r * r > n {
        r -= 1;
    }
    while (r + 1).checked_mul(r + 1).is_some_and(|s| s <= n) {
        r += 1;
    }
    r
}

/// `base^exp mod m`, with the intermediate products in 128 bits.
pub fn modpow(base: u64, exp: u32, m: u64) -> u64 {
    debug_assert!(m > 0);
    let m128 = m as u128;
    let mut acc: u128 = 1 % m128;
    let mut b: u128 = (base as u128) % m128;
    let mut e = exp;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % m128;
        }
        b = b * b % m128;
        e >>= 1;
    }
    acc as u64
}

/// p-adic valuation of a nonzero integer.
pub fn valuation_int(n: &Int, p: u64) -> i64 {
    assert!(!n.is_zero(), "valuation of zero");
    let p = Int::from(p);
    let mut n = n.abs();
    let mut v = 0i64;
    loop {
        let (q, r) = n.div_rem(&p);
        if !r.is_zero() {
            return v;
        }
        n = q;
        v += 1;
    }
}

/// p-adic valuation of a nonzero rational.
pub fn valuation(x: &Rat, p: u64) -> i64 {
    valuation_int(x.numer(), p) - valuation_int(x.denom(), p)
}

/// p-adic absolute value `|x|_p = p^{-v_p(x)}` as an exact rational.
pub fn abs_p(x: &Rat, p: u64) -> Rat {
    if x.is_zero() {
        return Rat::zero();
    }
    rat_pow_int(&Rat::from(Int::from(p)), -valuation(x, p))
}

/// Exact integer power of a rational, negative exponents allowed.
pub fn rat_pow_int(x: &Rat, e: i64) -> Rat {
    if e >= 0 {
        num_traits::pow::pow(x.clone(), e as usize)
    } else {
        num_traits::pow::pow(x.clone(), (-e) as usize).recip()
    }
}

/// `e(num/den) = exp(2 pi i num/den)`, evaluated from the exact residue
/// `num mod den` so the angle never drifts for large numerators.
pub fn unit_phase(num: i128, den: i128) -> C64 {
    debug_assert!(den > 0);
    let r = num.rem_euclid(den);
    let angle = 2.0 * std::f64::consts::PI * (r as f64) / (den as f64);
    C64::new(angle.cos(), angle.sin())
}

/// `e(x)` for a rational `x`, reduced to its fractional part first.
pub fn unit_phase_rat(x: &Rat) -> C64 {
    let num = x.numer().mod_floor(x.denom());
    // after mod_floor both fit in i128 for every input this crate produces
    let n = num.to_i128().expect("phase numerator overflow");
    let d = x.denom().to_i128().expect("phase denominator overflow");
    unit_phase(n, d)
}

/// Convert an exact rational to the nearest f64.
pub fn rat_to_f64(x: &Rat) -> f64 {
    x.to_f64().unwrap_or_else(|| {
        // fall back to a quotient of leading digits
        let n = x.numer().to_f64().unwrap_or(f64::MAX);
        let d = x.denom().to_f64().unwrap_or(f64::MAX);
        n / d
    })
}

/// Parse a rational written as `p/q` or as a plain integer.
pub fn parse_rat(s: &str) -> Option<Rat> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: Int = n.trim().parse().ok()?;
        let d: Int = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        Some(Rat::new(n, d))
    } else {
        let n: Int = s.parse().ok()?;
        Some(Rat::from(n))
    }
}

/// Kahan-compensated accumulator for complex sums.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: C64,
    carry: C64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, term: C64) {
        let y = term - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> C64 {
        self.sum
    }
}

pub fn gcd_u64(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}
