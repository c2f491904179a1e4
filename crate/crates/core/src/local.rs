//! Exact evaluation of the p-adic oscillatory height integrals on the split
//! quadric, together with the numerator/denominator bias decompositions and
//! the empirical local-constancy probe.
//!
//! The object computed here is
//!
//! ```text
//! F_p(s, alpha) = int_{G(Q_p): alpha a in Z_p} H_p(s, g)^{-1}
//!                 e(-alpha b mod Z_p) dg,
//! ```
//!
//! with `dg = da db / (|a| (1 - 1/p))` and the max-norm local heights of the
//! split quadric.  Those heights are invariant under the full maximal
//! compact subgroup, so only the trivial multiplicative twist survives and
//! no auxiliary level enters; the integral above is the whole local factor.
//!
//! Stratifying over `m = v_p(a)` and `n = v_p(b)` makes every piece
//! explicit: the `b`-integral over a sphere of radius `p^{-n}` equals
//! `(1 - 1/p) p^{-n}` while the character is trivial there, collapses to
//! `-p^{-n-1}` on the critical sphere, and vanishes beyond it.  The `n`-sum
//! is done in closed form per stratum and the `m`-sum is truncated at a
//! configurable depth with a rigorous geometric tail bound.

use num_traits::Zero;

use crate::arith::{is_prime, unit_phase, valuation};
use crate::surface::{HeightModel, SurfaceModel};
use crate::{Error, Int, Rat, Result, C64};

/// Parameters of one oscillatory integral.
#[derive(Clone, Debug)]
pub struct OscillationQuery {
    /// Complex exponent vector indexed like the divisor list.
    pub s: Vec<C64>,
    /// Twist frequency, a nonzero rational.
    pub alpha: Rat,
    pub p: u64,
    /// Truncation depth of the `v_p(a)` strata.
    pub depth: usize,
}

impl OscillationQuery {
    pub fn new(s: Vec<C64>, alpha: Rat, p: u64) -> Result<Self> {
        if alpha.is_zero() {
            return Err(Error::InvalidParameter {
                name: "alpha",
                detail: "the twist frequency must be nonzero".into(),
            });
        }
        if !is_prime(p) {
            return Err(Error::InvalidParameter {
                name: "p",
                detail: format!("{p} is not prime"),
            });
        }
        Ok(Self {
            s,
            alpha,
            p,
            depth: 40,
        })
    }

    /// `s = d + 2u`, the canonical probe point of the working region.
    pub fn probe_exponents(model: &SurfaceModel) -> Vec<C64> {
        model
            .divisors
            .iter()
            .map(|d| C64::new((d.anticanonical_mult + 2 * d.ord_a) as f64, 0.0))
            .collect()
    }

    /// Margin by which `Re(s)` undershoots the region floor `d + 2u`;
    /// zero when `s` sits on or above it.
    pub fn region_margin(&self, model: &SurfaceModel) -> f64 {
        model
            .divisors
            .iter()
            .zip(&self.s)
            .map(|(d, s)| ((d.anticanonical_mult + 2 * d.ord_a) as f64 - s.re).max(0.0))
            .fold(0.0, f64::max)
    }

    /// Whether some admissible margin `delta < 1` covers `Re(s)`.
    pub fn in_region(&self, model: &SurfaceModel) -> bool {
        self.region_margin(model) < 1.0
    }
}

/// An evaluated oscillatory integral with its truncation bound.
#[derive(Clone, Debug)]
pub struct OscillationValue {
    pub value: C64,
    /// Rigorous bound on the discarded strata.
    pub tail_bound: f64,
    /// Whether `Re(s)` satisfied the working-region floor.
    pub in_region: bool,
    /// Number of `v_p(a)` strata actually summed.
    pub strata: usize,
}

fn require_split_quadric(model: &SurfaceModel, op: &'static str) -> Result<()> {
    match model.height_model {
        Some(HeightModel::SplitQuadric) => Ok(()),
        _ => Err(Error::Unsupported {
            op,
            model: model.name.clone(),
            reason: "oscillatory integrals are only wired up for the split quadric",
        }),
    }
}

/// `p^z` for complex `z`.
fn p_pow(p: u64, z: C64) -> C64 {
    (z * (p as f64).ln()).exp()
}

fn p_powf(p: u64, x: f64) -> f64 {
    (x * (p as f64).ln()).exp()
}

/// `e(x mod Z_p)`: the additive character of the p-primary fractional part.
pub fn additive_character_p(x: &Rat, p: u64) -> C64 {
    if x.is_zero() {
        return C64::new(1.0, 0.0);
    }
    let v = valuation(x, p);
    if v >= 0 {
        return C64::new(1.0, 0.0);
    }
    let j = (-v) as u32;
    let pj = Int::from(p).pow(j);
    // x = num / (den' p^j); find t = num * inverse(den') mod p^j
    let num = x.numer();
    let denp = x.denom() / &pj;
    let inv = mod_inverse(&denp, &pj).expect("denominator prime to p");
    let t = (num * inv) % &pj;
    let t = ((t % &pj) + &pj) % &pj;
    use num_traits::ToPrimitive;
    unit_phase(
        t.to_i128().expect("p^j fits"),
        pj.to_i128().expect("p^j fits"),
    )
}

fn mod_inverse(a: &Int, m: &Int) -> Option<Int> {
    use num_integer::Integer;
    let e = a.extended_gcd(m);
    if e.gcd != Int::from(1) {
        return None;
    }
    let x = e.x % m;
    Some(((x % m) + m) % m)
}

/// Split-quadric stratum value at `m = v_p(a)`: the `n`-sum of the sphere
/// contributions, with the geometric pieces beyond `n = m` and the critical
/// sphere folded in closed form.
///
/// `A_m = p^{-s1 max(m,0) - s2 max(-m,0)} * B_m` with
/// `B_m = (1 - 1/p)p^{-s3 m} T_m + p^{-m-1} - p^{w - s3 (m + w + 1)}` and
/// `T_m = sum_{n=-w}^{m} p^{(s3-1) n}`, where `w = v_p(alpha)`.
fn stratum_value(p: u64, s: &[C64], w: i64, m: i64) -> C64 {
    let s1 = s[0];
    let s2 = s[1];
    let s3 = s[2];
    let inv_p = 1.0 / p as f64;
    debug_assert!(m >= -w);

    // p^{-s3 m} T_m = sum_{n=-w}^{m} p^{-s3 (m - n) - n}, summed with the
    // combined exponent per term so nothing overflows for large Re(s)
    let mut sphere_sum = C64::new(0.0, 0.0);
    for n in -w..=m {
        sphere_sum += p_pow(p, -s3 * (m - n) as f64 - C64::new(n as f64, 0.0));
    }

    let b_m = C64::new(1.0 - inv_p, 0.0) * sphere_sum + C64::new(p_powf(p, -(m as f64) - 1.0), 0.0)
        - p_pow(p, C64::new(w as f64, 0.0) - s3 * (m + w + 1) as f64);

    let height_exp = -s1 * m.max(0) as f64 - s2 * (-m).max(0) as f64;
    p_pow(p, height_exp) * b_m
}

/// Rigorous bound on `sum_{m > cutoff} |A_m|`, from the same closed forms
/// evaluated at the real parts.
fn tail_bound(p: u64, s: &[C64], w: i64, cutoff: i64) -> Result<f64> {
    let sig1 = s[0].re;
    let sig3 = s[2].re;
    let q1 = p_powf(p, -(sig1 + 1.0)); // ratio of the p^{-m-1} piece
    let q2 = p_powf(p, -(sig1 + sig3)); // ratio of the critical-sphere piece
    if q1 >= 1.0 {
        return Err(Error::DivergentStratum {
            name: "s1 + 1",
            value: sig1 + 1.0,
        });
    }
    if q2 >= 1.0 {
        return Err(Error::DivergentStratum {
            name: "s1 + s3",
            value: sig1 + sig3,
        });
    }
    let m0 = cutoff + 1;
    debug_assert!(m0 > 0 && m0 + w > 0);
    let geo = |q: f64, start: i64| -> f64 { q.powi(start as i32) / (1.0 - q) };
    // sum_{m >= start} (m + c) q^m
    let lin_geo = |q: f64, c: f64, start: i64| -> f64 {
        q.powi(start as i32) * ((start as f64 + c) / (1.0 - q) + q / ((1.0 - q) * (1.0 - q)))
    };

    // piece p^{-m-1}
    let piece2 = (1.0 / p as f64) * geo(q1, m0);
    // critical sphere piece
    let piece3 = p_powf(p, w as f64 - sig3 * (w as f64 + 1.0)) * geo(q2, m0);
    // sphere-sum piece: each term of p^{-sig3 m} T_m is at most the larger
    // of its two endpoint values, so
    // p^{-sig3 m} T_m <= (m + w + 1)(p^{-m} + p^{w - sig3 (m + w)})
    let c = (w + 1) as f64;
    let piece1 = (1.0 - 1.0 / p as f64)
        * (lin_geo(q1, c, m0) + p_powf(p, (1.0 - sig3) * w as f64) * lin_geo(q2, c, m0));
    Ok(piece1 + piece2 + piece3)
}

/// Evaluate the oscillatory integral by summing `v_p(a)` strata up to the
/// query depth, with the closed-form `n`-sum inside each stratum.
pub fn oscillatory_integral(
    model: &SurfaceModel,
    q: &OscillationQuery,
) -> Result<OscillationValue> {
    require_split_quadric(model, "oscillatory_integral")?;
    if q.s.len() != model.num_divisors() {
        return Err(Error::InvalidParameter {
            name: "s",
            detail: format!("expected {} exponents", model.num_divisors()),
        });
    }
    let w = valuation(&q.alpha, q.p);
    let required = w.unsigned_abs() as usize + 5;
    if q.depth < required {
        // the twist frequency reaches strata the window cannot see, so the
        // discarded tail would dominate any bias term
        return Err(Error::TruncationInsufficient {
            depth: q.depth,
            required,
        });
    }
    let cutoff = q.depth as i64;
    if cutoff - (-w) > 100_000 {
        return Err(Error::InvalidParameter {
            name: "depth",
            detail: "stratum window too large".into(),
        });
    }

    let mut value = C64::new(0.0, 0.0);
    let mut strata = 0usize;
    for m in -w..=cutoff {
        value += stratum_value(q.p, &q.s, w, m);
        strata += 1;
    }
    let tail = tail_bound(q.p, &q.s, w, cutoff)?;
    Ok(OscillationValue {
        value,
        tail_bound: tail,
        in_region: q.in_region(model),
        strata,
    })
}

/// Decomposition of an oscillatory integral into a predicted main term and
/// the reported residual, with the bound core it is measured against.
#[derive(Clone, Debug)]
pub struct BiasReport {
    /// The full integral.
    pub integral: C64,
    /// Predicted main term.
    pub main_term: C64,
    /// `integral - main_term`.
    pub residual: C64,
    /// The right-hand side of the corresponding bias bound with unit
    /// implied constant and the actual region margin in place of delta.
    pub bound_core: f64,
    /// `|residual| / bound_core`.
    pub ratio: f64,
    pub tail_bound: f64,
}

/// Denominator bias: for `v_p(alpha) = -k < 0` the main term is carried by
/// the special zero divisors,
/// `sum_c sum_{j in J_1^c} e(-c alpha mod Z_p) p^{-k (s_j - d_j + 1)/u_j}`
/// for `u_j | k`, and the residual is measured against
/// `p^{-2k} sum_{j in J_1} (p^{delta-1} + p^{-1/2} 1_{u_j | k}
///  + 1_{k > u_j}) p^{(delta-1) k / u_j}`.
pub fn denominator_bias_residual(model: &SurfaceModel, q: &OscillationQuery) -> Result<BiasReport> {
    let k = -valuation(&q.alpha, q.p);
    if k <= 0 {
        return Err(Error::InvalidParameter {
            name: "alpha",
            detail: format!("denominator bias needs v_p(alpha) < 0, got {}", -k),
        });
    }
    if model.bad_primes.contains(&q.p) {
        return Err(Error::InvalidParameter {
            name: "p",
            detail: format!("{} is a bad prime of {}", q.p, model.name),
        });
    }
    let out = oscillatory_integral(model, q)?;
    let class = model.classify();

    let mut main = C64::new(0.0, 0.0);
    for (c, js) in &class.special_zero {
        for &j in js {
            let d = &model.divisors[j];
            let u = d.ord_a;
            debug_assert!(u > 0);
            if k % u != 0 {
                continue;
            }
            let phase = additive_character_p(&(-c * &q.alpha), q.p);
            let exponent =
                -(q.s[j] - C64::new(d.anticanonical_mult as f64 - 1.0, 0.0)) * (k / u) as f64;
            main += phase * p_pow(q.p, exponent);
        }
    }

    let delta = q.region_margin(model);
    let mut core = 0.0;
    for &j in &class.zeros_of_a {
        let u = model.divisors[j].ord_a;
        let mut factor = p_powf(q.p, delta - 1.0);
        if k % u == 0 {
            factor += p_powf(q.p, -0.5);
        }
        if k > u {
            factor += 1.0;
        }
        core += factor * p_powf(q.p, (delta - 1.0) * k as f64 / u as f64);
    }
    core *= p_powf(q.p, -2.0 * k as f64);

    let residual = out.value - main;
    Ok(BiasReport {
        integral: out.value,
        main_term: main,
        residual,
        bound_core: core,
        ratio: residual.norm() / core,
        tail_bound: out.tail_bound,
    })
}

/// Numerator bias: for `v_p(alpha) = k > 0` the main term is carried by the
/// special pole divisors, `sum_{j in J_2^*} p^{-k (s_j - d_j + 1)/|u_j|}`
/// for `u_j | k`, with residual measured against
/// `p^{2k} sum_{j in J_2} (p^{delta-1} + p^{-1/2} 1 + 1_{k > |u_j|})
///  p^{(delta-1) k / |u_j|}`.
pub fn numerator_bias_residual(model: &SurfaceModel, q: &OscillationQuery) -> Result<BiasReport> {
    let k = valuation(&q.alpha, q.p);
    if k <= 0 {
        return Err(Error::InvalidParameter {
            name: "alpha",
            detail: format!("numerator bias needs v_p(alpha) > 0, got {k}"),
        });
    }
    let out = oscillatory_integral(model, q)?;
    let class = model.classify();

    let mut main = C64::new(0.0, 0.0);
    for &j in &class.special_pole {
        let d = &model.divisors[j];
        let u_abs = d.ord_a.unsigned_abs() as i64;
        if k % u_abs != 0 {
            continue;
        }
        let exponent =
            -(q.s[j] - C64::new(d.anticanonical_mult as f64 - 1.0, 0.0)) * (k / u_abs) as f64;
        main += p_pow(q.p, exponent);
    }

    let delta = q.region_margin(model);
    let mut core = 0.0;
    for &j in &class.poles_of_a {
        let u_abs = model.divisors[j].ord_a.unsigned_abs() as i64;
        let mut factor = p_powf(q.p, delta - 1.0);
        if k % u_abs == 0 {
            factor += p_powf(q.p, -0.5);
        }
        if k > u_abs {
            factor += 1.0;
        }
        core += factor * p_powf(q.p, (delta - 1.0) * k as f64 / u_abs as f64);
    }
    core *= p_powf(q.p, 2.0 * k as f64);

    let residual = out.value - main;
    Ok(BiasReport {
        integral: out.value,
        main_term: main,
        residual,
        bound_core: core,
        ratio: residual.norm() / core,
        tail_bound: out.tail_bound,
    })
}

/// Generic factor: for a p-adic unit `alpha` the integral is `1 + G` with
/// `G` measured against `p^{2(delta - 1)}`.
pub fn generic_residual(model: &SurfaceModel, q: &OscillationQuery) -> Result<BiasReport> {
    if valuation(&q.alpha, q.p) != 0 {
        return Err(Error::InvalidParameter {
            name: "alpha",
            detail: "generic factor needs v_p(alpha) = 0".into(),
        });
    }
    let out = oscillatory_integral(model, q)?;
    let delta = q.region_margin(model);
    let core = p_powf(q.p, 2.0 * (delta - 1.0));
    let main = C64::new(1.0, 0.0);
    let residual = out.value - main;
    Ok(BiasReport {
        integral: out.value,
        main_term: main,
        residual,
        bound_core: core,
        ratio: residual.norm() / core,
        tail_bound: out.tail_bound,
    })
}

/// Dispatch on the sign of `v_p(alpha)`.
pub fn bias_residual(model: &SurfaceModel, q: &OscillationQuery) -> Result<BiasReport> {
    match valuation(&q.alpha, q.p).cmp(&0) {
        std::cmp::Ordering::Less => denominator_bias_residual(model, q),
        std::cmp::Ordering::Greater => numerator_bias_residual(model, q),
        std::cmp::Ordering::Equal => generic_residual(model, q),
    }
}

/// Result of the empirical local-constancy probe.
#[derive(Clone, Debug)]
pub struct ProbeReport {
    /// Smallest exponent `e` such that every sampled
    /// `alpha' = alpha (1 + p^e j)` gave the same residual, or `None` if no
    /// constancy was found up to the cap (which would falsify the expected
    /// local constancy on this model).
    pub constancy_exponent: Option<u32>,
    /// `max(1, -v_p(alpha))`, the modulus exponent the constancy statement
    /// guarantees up to a model constant.
    pub guaranteed_cap: u32,
    pub samples_per_level: usize,
}

/// Probe local constancy of the residual in the twist frequency: scan
/// exponents `e = 1, 2, ...` and test whether the residual is unchanged
/// under `alpha -> alpha (1 + p^e j)` for a small sample of units.
pub fn local_constancy_probe(
    model: &SurfaceModel,
    p: u64,
    alpha: &Rat,
    s: &[C64],
    max_exponent: u32,
) -> Result<ProbeReport> {
    let base_query = OscillationQuery::new(s.to_vec(), alpha.clone(), p)?;
    let base = bias_residual(model, &base_query)?;
    let scale = base.residual.norm().max(1.0);
    let samples = [1i64, 2, 3];

    let mut found = None;
    'levels: for e in 1..=max_exponent {
        let pe = Rat::from(Int::from(p).pow(e));
        for &j in &samples {
            let factor = Rat::from(Int::from(1)) + &pe * Rat::from(Int::from(j));
            if factor.is_zero() {
                continue;
            }
            let alpha_new = alpha * &factor;
            let qn = OscillationQuery::new(s.to_vec(), alpha_new, p)?;
            let rep = bias_residual(model, &qn)?;
            if (rep.residual - base.residual).norm() > 1e-12 * scale {
                continue 'levels;
            }
        }
        found = Some(e);
        break;
    }

    let guaranteed_cap = 1.max(-valuation(alpha, p)) as u32;
    Ok(ProbeReport {
        constancy_exponent: found,
        guaranteed_cap,
        samples_per_level: samples.len(),
    })
}
