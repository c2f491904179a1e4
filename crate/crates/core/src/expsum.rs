//! Brute-force exponential-sum evaluators and bound diagnostics: the
//! multivariate Weyl sums, unit Gauss-sum averages, the smoothed
//! progression-equidistribution residual, and partial sums of Clausen-type
//! and double Dirichlet series.
//!
//! Phases are always computed as exact residues modulo the relevant
//! denominator and converted to an angle with a single trig call, so
//! nothing drifts even for moduli near the 63-bit range.  Bound checks are
//! reported as ratio tables; the implied constants of the inequalities are
//! never asserted, only recorded.

use num_traits::{ToPrimitive, Zero};

use crate::arith::{euler_phi, factorize, gcd_u64, modpow, unit_phase, CompensatedSum};
use crate::{Error, Int, Rat, Result, C64};

/// Cap on the lattice size a single Weyl sum may enumerate.
pub const WEYL_LATTICE_CAP: u128 = 100_000_000;

/// An arithmetic progression constraint `m = residue (mod modulus)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Progression {
    pub modulus: u64,
    pub residue: u64,
}

/// Specification of one multivariate monomial Weyl sum
/// `sum e(y m_1^{u_1} ... m_K^{u_K} / q)` over dyadic boxes
/// `[M_i, 2 M_i)`, optionally restricted to progressions and to pairwise
/// coprime tuples coprime to a fixed `Q`.
#[derive(Clone, Debug)]
pub struct WeylSumSpec {
    /// Monomial exponents, all `>= 1`.
    pub exponents: Vec<u32>,
    /// Dyadic box starts `M_i`; box `i` is `[M_i, 2 M_i)`.
    pub box_starts: Vec<u64>,
    /// Optional progression constraint per variable.
    pub progressions: Option<Vec<Progression>>,
    /// Numerator of the phase fraction.
    pub multiplier: u64,
    /// Denominator of the phase fraction, coprime to `multiplier`.
    pub modulus: u64,
    /// When set, restrict to pairwise coprime tuples with
    /// `gcd(m_i, Q) = 1`.
    pub coprime_to: Option<u64>,
}

impl WeylSumSpec {
    pub fn plain(exponents: Vec<u32>, box_starts: Vec<u64>, multiplier: u64, modulus: u64) -> Self {
        Self {
            exponents,
            box_starts,
            progressions: None,
            multiplier,
            modulus,
            coprime_to: None,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.exponents.is_empty() || self.exponents.len() != self.box_starts.len() {
            return Err(Error::InvalidParameter {
                name: "exponents/box_starts",
                detail: "need one exponent and one box per variable".into(),
            });
        }
        if self.exponents.contains(&0) {
            return Err(Error::InvalidParameter {
                name: "exponents",
                detail: "monomial exponents must be >= 1".into(),
            });
        }
        if self.box_starts.contains(&0) {
            return Err(Error::InvalidParameter {
                name: "box_starts",
                detail: "boxes must start at M >= 1".into(),
            });
        }
        if self.modulus == 0 || gcd_u64(self.multiplier, self.modulus) != 1 {
            return Err(Error::InvalidParameter {
                name: "multiplier/modulus",
                detail: "need q >= 1 and gcd(y, q) = 1".into(),
            });
        }
        if let Some(progs) = &self.progressions {
            if progs.len() != self.exponents.len() {
                return Err(Error::InvalidParameter {
                    name: "progressions",
                    detail: "need one progression per variable".into(),
                });
            }
            if progs.iter().any(|pr| pr.modulus == 0) {
                return Err(Error::InvalidParameter {
                    name: "progressions",
                    detail: "progression modulus must be >= 1".into(),
                });
            }
        }
        let size: u128 = self.box_starts.iter().map(|&m| m as u128).product();
        if size > WEYL_LATTICE_CAP {
            return Err(Error::SizeCapExceeded {
                size,
                cap: WEYL_LATTICE_CAP,
            });
        }
        Ok(())
    }

    /// `K(I) = sum_{i in I} (u_i - 1)` for a variable subset.
    pub fn weyl_complexity(&self, subset: &[usize]) -> u32 {
        subset.iter().map(|&i| self.exponents[i] - 1).sum()
    }

    /// `prod M_i^{u_i}` as a float.
    pub fn monomial_volume(&self) -> f64 {
        self.box_starts
            .iter()
            .zip(&self.exponents)
            .map(|(&m, &u)| (m as f64).powi(u as i32))
            .product()
    }
}

fn values_in_box(start: u64, prog: Option<Progression>) -> Vec<u64> {
    let lo = start;
    let hi = 2 * start; // exclusive
    match prog {
        None => (lo..hi).collect(),
        Some(pr) => (lo..hi)
            .filter(|m| m % pr.modulus == pr.residue % pr.modulus)
            .collect(),
    }
}

/// Evaluate the Weyl sum by direct enumeration with exact modular phases.
pub fn weyl_sum(spec: &WeylSumSpec) -> Result<C64> {
    spec.validate()?;
    let q = spec.modulus;
    let vars: Vec<Vec<u64>> = spec
        .box_starts
        .iter()
        .enumerate()
        .map(|(i, &m)| values_in_box(m, spec.progressions.as_ref().map(|p| p[i])))
        .collect();

    // per-variable powers reduced mod q
    let powers: Vec<Vec<u64>> = vars
        .iter()
        .zip(&spec.exponents)
        .map(|(vals, &u)| vals.iter().map(|&m| modpow(m, u, q)).collect())
        .collect();

    if vars.iter().any(|v| v.is_empty()) {
        return Ok(C64::new(0.0, 0.0)); // a progression emptied a box
    }

    let mut acc = CompensatedSum::new();
    let mut idx = vec![0usize; vars.len()];
    let mut tuple = vec![0u64; vars.len()];
    'outer: loop {
        for (slot, (&i, v)) in tuple.iter_mut().zip(idx.iter().zip(&vars)) {
            *slot = v[i];
        }
        if admissible(&tuple, spec.coprime_to) {
            let mut r: u64 = spec.multiplier % q;
            for (k, &i) in idx.iter().enumerate() {
                r = ((r as u128 * powers[k][i] as u128) % q as u128) as u64;
            }
            acc.add(unit_phase(r as i128, q as i128));
        }
        // odometer increment
        for pos in (0..idx.len()).rev() {
            idx[pos] += 1;
            if idx[pos] < vars[pos].len() {
                continue 'outer;
            }
            idx[pos] = 0;
            if pos == 0 {
                break 'outer;
            }
        }
    }
    Ok(acc.value())
}

fn admissible(tuple: &[u64], coprime_to: Option<u64>) -> bool {
    let Some(q_constraint) = coprime_to else {
        return true;
    };
    for (i, &a) in tuple.iter().enumerate() {
        if gcd_u64(a, q_constraint) != 1 {
            return false;
        }
        for &b in &tuple[i + 1..] {
            if gcd_u64(a, b) != 1 {
                return false;
            }
        }
    }
    true
}

/// Ratio report for the clean Weyl bound: the left side against the
/// `R`-free core `(M_1 ... M_K) / min(q, prod M^u / q)^{eta}`.
#[derive(Clone, Debug)]
pub struct WeylBoundReport {
    pub lhs_abs: f64,
    pub rhs_core: f64,
    pub ratio: f64,
    pub eta: f64,
}

pub fn weyl_bound_report(spec: &WeylSumSpec, eta_probe: f64) -> Result<WeylBoundReport> {
    let lhs_abs = weyl_sum(spec)?.norm();
    let box_product: f64 = spec.box_starts.iter().map(|&m| m as f64).product();
    let q = spec.modulus as f64;
    let quality = q.min(spec.monomial_volume() / q).max(1.0);
    let rhs_core = box_product / quality.powf(eta_probe);
    Ok(WeylBoundReport {
        lhs_abs,
        rhs_core,
        ratio: lhs_abs / rhs_core,
        eta: eta_probe,
    })
}

/// Average of `e(x^u C / N mod Z_N)` over units `x` modulo `N`, with a
/// certified bound from the power-detecting character count:
/// `|sum| <= |H| sqrt(N)` per prime power, where `|H|` is the number of
/// `u`-th roots of unity modulo that prime power.
#[derive(Clone, Debug)]
pub struct GaussAverage {
    pub value: C64,
    /// `prod |H_{p^k}| sqrt(p^k) / phi(N)`: a proven bound on `|value|`.
    pub certified_bound: f64,
    /// Number of solutions of `x^u = 1` over all of `(Z/N)^*`.
    pub unity_count: u64,
}

/// `C` must be a rational whose denominator divides a power of `N` and
/// whose numerator is a unit at every prime of `N`.
pub fn gauss_average(u: u32, n: u64, c: &Rat) -> Result<GaussAverage> {
    if n < 2 || u == 0 {
        return Err(Error::InvalidParameter {
            name: "u/N",
            detail: "need N >= 2 and u >= 1".into(),
        });
    }
    let n_primes = factorize(n);
    // denominator support inside N, numerator coprime to N
    let denom = c.denom();
    let mut d = denom.clone();
    for &(p, _) in &n_primes {
        let bp = Int::from(p);
        while (&d % &bp).is_zero() {
            d /= &bp;
        }
    }
    if d != Int::from(1) {
        return Err(Error::InvalidParameter {
            name: "C",
            detail: "denominator of C must be supported on the primes of N".into(),
        });
    }
    for &(p, _) in &n_primes {
        if (c.numer() % Int::from(p)).is_zero() {
            return Err(Error::InvalidParameter {
                name: "C",
                detail: format!("numerator of C must be a unit at p = {p}"),
            });
        }
    }

    // e(x^u C / N) for integer representatives: the angle is the exact
    // residue of x^u * num(C) modulo den(C) * N
    let den_c = denom.to_u64().ok_or_else(|| Error::InvalidParameter {
        name: "C",
        detail: "denominator too large".into(),
    })?;
    let full_mod = den_c
        .checked_mul(n)
        .ok_or_else(|| Error::InvalidParameter {
            name: "C",
            detail: "denominator * N overflows".into(),
        })?;
    let num_c = {
        let m = Int::from(full_mod);
        let r = ((c.numer() % &m) + &m) % &m;
        r.to_u64().expect("reduced")
    };

    let mut acc = CompensatedSum::new();
    let mut unity = 0u64;
    for x in 1..n {
        if gcd_u64(x, n) != 1 {
            continue;
        }
        let pw = modpow(x, u, full_mod);
        if pw % n == 1 {
            unity += 1;
        }
        let r = ((pw as u128 * num_c as u128) % full_mod as u128) as u64;
        acc.add(unit_phase(r as i128, full_mod as i128));
    }
    let phi = euler_phi(n);
    let value = acc.value() / phi as f64;

    // multiplicative certified bound
    let mut bound = 1.0f64;
    for &(p, k) in &n_primes {
        let pk = p.pow(k);
        let h = count_power_roots(u, pk);
        bound *= h as f64 * (pk as f64).sqrt();
    }
    bound /= phi as f64;

    Ok(GaussAverage {
        value,
        certified_bound: bound,
        unity_count: unity,
    })
}

/// `#{x in (Z/m)^* : x^u = 1}` by enumeration.
pub fn count_power_roots(u: u32, m: u64) -> u64 {
    (1..m)
        .filter(|&x| gcd_u64(x, m) == 1 && modpow(x, u, m) == 1)
        .count() as u64
        + u64::from(m == 1)
}

/// Raw unit sum `sum_{x in (Z/N)^*} e(x^u C/N)` (not averaged), used for
/// the exact prime-power inequality `|sum| <= |H| sqrt(N)`.
pub fn gauss_unit_sum(u: u32, n: u64, c: &Rat) -> Result<C64> {
    let avg = gauss_average(u, n, c)?;
    Ok(avg.value * euler_phi(n) as f64)
}

/// A plateau bump `w` supported on `[1, 10]` with derivative scale `A`:
/// `w(t) = Y S(A(t-1)) S(A(10-t))` where `S` is the standard smoothstep
/// built from `exp(-1/v)`.  `sup |w^(B)| = O(A^B Y)` as required.
#[derive(Clone, Copy, Debug)]
pub struct BumpSpec {
    pub sharpness: u64,
    pub amplitude: f64,
}

impl BumpSpec {
    pub fn eval(&self, t: f64) -> f64 {
        if !(1.0..=10.0).contains(&t) {
            return 0.0;
        }
        let a = self.sharpness as f64;
        self.amplitude * smoothstep(a * (t - 1.0)) * smoothstep(a * (10.0 - t))
    }
}

fn smoothstep(v: f64) -> f64 {
    if v <= 0.0 {
        return 0.0;
    }
    if v >= 1.0 {
        return 1.0;
    }
    let b = (-1.0 / v).exp();
    let c = (-1.0 / (1.0 - v)).exp();
    b / (b + c)
}

/// Left-hand side of the smoothed equidistribution estimate: the weighted
/// count of `m = y (mod q)` coprime to `Q`, minus its expected density, and
/// the reference scale `A Y q` it is measured against.
#[derive(Clone, Debug)]
pub struct PoissonResidual {
    pub lhs: f64,
    pub reference: f64,
    pub ratio: f64,
}

pub fn poisson_residual(
    bump: &BumpSpec,
    m_scale: u64,
    q: u64,
    coprime_q: u64,
    residue: u64,
) -> Result<PoissonResidual> {
    if q == 0 || m_scale == 0 || coprime_q == 0 {
        return Err(Error::InvalidParameter {
            name: "q/M/Q",
            detail: "need q, M, Q >= 1".into(),
        });
    }
    if gcd_u64(residue, q) != 1 {
        return Err(Error::InvalidParameter {
            name: "y",
            detail: "need gcd(y, q) = 1".into(),
        });
    }
    // density of the progression inside the coprime-to-Q integers, as an
    // exact rational: 1 / (q prod_{p | gcd-part} (1 - 1/p)); the admissible
    // residues mod q are those coprime to the primes shared with Q
    let shared: Vec<u64> = factorize(q)
        .into_iter()
        .map(|(p, _)| p)
        .filter(|&p| coprime_q.is_multiple_of(p))
        .collect();
    let mut admissible_count = Rat::from(Int::from(q));
    for &p in &shared {
        admissible_count *= Rat::new(Int::from(p as i64 - 1), Int::from(p));
    }
    let density = admissible_count.recip();

    let lo = m_scale; // w supported on [M, 10M]
    let hi = 10 * m_scale;
    let mut acc = 0.0f64;
    let mut comp = 0.0f64;
    for m in lo..=hi {
        if gcd_u64(m, coprime_q) != 1 {
            continue;
        }
        let w = bump.eval(m as f64 / m_scale as f64);
        if w == 0.0 {
            continue;
        }
        // exact bracket: 1_{m = y mod q} - density
        let indicator = if m % q == residue % q {
            Rat::from(Int::from(1))
        } else {
            Rat::zero()
        };
        let bracket = indicator - &density;
        if bracket.is_zero() {
            continue; // q = 1 collapses exactly
        }
        let term = w * crate::arith::rat_to_f64(&bracket) - comp;
        let t = acc + term;
        comp = (t - acc) - term;
        acc = t;
    }
    let reference = bump.sharpness as f64 * bump.amplitude * q as f64;
    Ok(PoissonResidual {
        lhs: acc.abs(),
        reference,
        ratio: acc.abs() / reference,
    })
}

/// Partial sum `sum_{m <= M} e(m theta) m^{-s}` with compensated
/// accumulation; returns the sum and the magnitude of the last term.
pub fn clausen_partial(theta: &Rat, s: C64, terms: u64) -> Result<(C64, f64)> {
    if terms == 0 {
        return Err(Error::InvalidParameter {
            name: "M",
            detail: "need at least one term".into(),
        });
    }
    let den = theta
        .denom()
        .to_i128()
        .ok_or_else(|| Error::InvalidParameter {
            name: "theta",
            detail: "denominator too large".into(),
        })?;
    let num = {
        let d = theta.denom();
        let r = ((theta.numer() % d) + d) % d;
        r.to_i128().expect("reduced numerator")
    };
    let mut acc = CompensatedSum::new();
    let mut last = 0.0;
    let mut phase_num: i128 = 0;
    for m in 1..=terms {
        phase_num = (phase_num + num) % den;
        let phase = unit_phase(phase_num, den);
        let term = phase * (-s * (m as f64).ln()).exp();
        last = term.norm();
        acc.add(term);
    }
    Ok((acc.value(), last))
}

/// Sieve of `k`-fold divisor functions `tau_k` up to `n`, exact in `u64`.
#[allow(clippy::needless_range_loop)]
pub fn divisor_function_sieve(k: u32, n: usize) -> Vec<u64> {
    let mut tau = vec![1u64; n + 1];
    tau[0] = 0;
    for _ in 1..k {
        // Dirichlet convolution with the constant function 1
        let mut next = vec![0u64; n + 1];
        for d in 1..=n {
            for mult in (d..=n).step_by(d) {
                next[mult] += tau[d];
            }
        }
        next[0] = 0;
        tau = next;
    }
    if k == 0 {
        // tau_0 is the identity for convolution: 1 at n = 1
        let mut t = vec![0u64; n + 1];
        if n >= 1 {
            t[1] = 1;
        }
        return t;
    }
    tau
}

/// Convergence mode of the double series evaluator.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeriesMode {
    /// Require absolute convergence and report a rigorous tail bound.
    Diagnostic,
    /// Accept any exponents and return the raw partial sum (tail = NaN).
    Raw,
}

/// Partial sum `sum_{m <= M, n <= N} e(m/n) tau_i(m) tau_j(n) m^{-s1}
/// n^{-s2}`, with a tail bound from `tau_k(m) <= (2 sqrt m)^{k-1}`.
#[derive(Clone, Debug)]
pub struct DoubleSeriesPartial {
    pub value: C64,
    /// Rigorous bound on the full tail in diagnostic mode, NaN in raw mode.
    pub tail_bound: f64,
}

pub fn double_series_partial(
    i: u32,
    j: u32,
    s1: C64,
    s2: C64,
    m_terms: u64,
    n_terms: u64,
    mode: SeriesMode,
) -> Result<DoubleSeriesPartial> {
    if i == 0 || j == 0 || m_terms == 0 || n_terms == 0 {
        return Err(Error::InvalidParameter {
            name: "i/j/M/N",
            detail: "need i, j >= 1 and nonempty ranges".into(),
        });
    }
    let need1 = (i as f64 + 1.0) / 2.0;
    let need2 = (j as f64 + 1.0) / 2.0;
    if mode == SeriesMode::Diagnostic && (s1.re <= need1.max(1.0) || s2.re <= need2.max(1.0)) {
        return Err(Error::InvalidParameter {
            name: "s1/s2",
            detail: format!(
                "diagnostic mode needs Re(s1) > {} and Re(s2) > {}",
                need1.max(1.0),
                need2.max(1.0)
            ),
        });
    }

    let tau_m = divisor_function_sieve(i, m_terms as usize);
    let tau_n = divisor_function_sieve(j, n_terms as usize);

    let mut acc = CompensatedSum::new();
    for n in 1..=n_terms {
        let wn = tau_n[n as usize] as f64;
        if wn == 0.0 {
            continue;
        }
        let n_factor = (-s2 * (n as f64).ln()).exp() * wn;
        let mut inner = CompensatedSum::new();
        for m in 1..=m_terms {
            let phase = unit_phase((m % n) as i128, n as i128);
            let term = phase * (-s1 * (m as f64).ln()).exp() * tau_m[m as usize] as f64;
            inner.add(term);
        }
        acc.add(n_factor * inner.value());
    }

    let tail_bound = match mode {
        SeriesMode::Raw => f64::NAN,
        SeriesMode::Diagnostic => {
            let tm = crude_tail(i, s1.re, m_terms);
            let tn = crude_tail(j, s2.re, n_terms);
            let fm = crude_full(i, s1.re);
            let fn_ = crude_full(j, s2.re);
            tm * fn_ + fm * tn + tm * tn
        }
    };

    Ok(DoubleSeriesPartial {
        value: acc.value(),
        tail_bound,
    })
}

/// `sum_{m > M} (2 sqrt m)^{k-1} m^{-sigma} <= 2^{k-1}
/// M^{(k-1)/2 - sigma + 1} / (sigma - (k-1)/2 - 1)` by the integral test.
fn crude_tail(k: u32, sigma: f64, from: u64) -> f64 {
    let half = (k as f64 - 1.0) / 2.0;
    let drop = sigma - half - 1.0;
    debug_assert!(drop > 0.0);
    2f64.powi(k as i32 - 1) * (from as f64).powf(-drop) / drop
}

/// Crude bound on the full series `sum_{m >= 1} (2 sqrt m)^{k-1}
/// m^{-sigma}`: the `m = 1` block plus the tail from 1.
fn crude_full(k: u32, sigma: f64) -> f64 {
    2f64.powi(k as i32 - 1) + crude_tail(k, sigma, 1)
}
