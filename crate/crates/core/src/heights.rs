//! Exact local and global height functions for the height-bearing models.
//!
//! The local heights follow the max-norm family: at a finite place every
//! per-divisor factor is an integer power of `p`, and at the real place the
//! projective sum-of-squares norm is used.  With this choice the product of
//! the anticanonical local heights is an exact rational, and for the split
//! quadric it collapses to the closed form
//! `H(a, b) = (a0^2 + a1^2) (c0^2 + c1^2)` with `a = a1/a0` and
//! `c = b/a = c1/c0` in lowest terms.

use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::{abs_p, factorize, rat_pow_int, rat_to_f64, valuation_int};
use crate::surface::{HeightModel, SurfaceModel};
use crate::{Error, Int, Rat, Result};

/// A rational point of the group `G`: a pair `(a, b)` with `a != 0`.
///
/// `BigRational` keeps both entries in lowest terms with positive
/// denominators, which is the canonical representation the invariants
/// assume.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalPoint {
    a: Rat,
    b: Rat,
}

impl RationalPoint {
    pub fn new(a: Rat, b: Rat) -> Result<Self> {
        if a.is_zero() {
            return Err(Error::InvalidParameter {
                name: "a",
                detail: "points of G require a != 0".into(),
            });
        }
        Ok(Self { a, b })
    }

    pub fn from_ints(a_num: i64, a_den: i64, b_num: i64, b_den: i64) -> Result<Self> {
        Self::new(
            Rat::new(Int::from(a_num), Int::from(a_den)),
            Rat::new(Int::from(b_num), Int::from(b_den)),
        )
    }

    pub fn a(&self) -> &Rat {
        &self.a
    }

    pub fn b(&self) -> &Rat {
        &self.b
    }

    /// `c = b / a`, the second coordinate of the `[a : b] = [1 : c]`
    /// reduction used by the closed-form height.
    pub fn slope(&self) -> Rat {
        &self.b / &self.a
    }

    /// Group law `(a, b) * (u1, u2) = (a u1, a u2 + b)`.
    pub fn mul(&self, other: &RationalPoint) -> RationalPoint {
        RationalPoint {
            a: &self.a * &other.a,
            b: &self.a * &other.b + &self.b,
        }
    }
}

/// A place of `Q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Place {
    Finite(u64),
    Archimedean,
}

/// Per-divisor local height values at one place.
#[derive(Clone, Debug)]
pub enum LocalHeights {
    /// Exact powers of `p`, one per divisor.
    Finite { p: u64, values: Vec<Rat> },
    /// Floating values at the real place.
    Archimedean { values: Vec<f64> },
}

impl LocalHeights {
    pub fn len(&self) -> usize {
        match self {
            LocalHeights::Finite { values, .. } => values.len(),
            LocalHeights::Archimedean { values } => values.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The product `prod_j H_j^{e_j}` as a float.
    pub fn weighted_product(&self, exponents: &[f64]) -> f64 {
        match self {
            LocalHeights::Finite { values, .. } => values
                .iter()
                .zip(exponents)
                .map(|(v, e)| rat_to_f64(v).powf(*e))
                .product(),
            LocalHeights::Archimedean { values } => values
                .iter()
                .zip(exponents)
                .map(|(v, e)| v.powf(*e))
                .product(),
        }
    }

    /// Exact product with integer exponents; only valid at finite places.
    pub fn exact_weighted_product(&self, exponents: &[i64]) -> Option<Rat> {
        match self {
            LocalHeights::Finite { values, .. } => {
                let mut acc = Rat::one();
                for (v, e) in values.iter().zip(exponents) {
                    acc *= rat_pow_int(v, *e);
                }
                Some(acc)
            }
            LocalHeights::Archimedean { .. } => None,
        }
    }
}

fn require_height_model(model: &SurfaceModel) -> Result<HeightModel> {
    model
        .height_model
        .ok_or_else(|| Error::NoHeightModel(model.name.clone()))
}

fn max_rat(a: Rat, b: Rat) -> Rat {
    if a >= b {
        a
    } else {
        b
    }
}

/// Local heights at a finite place.
///
/// Split quadric: `(max(1,|a|)/|a|, max(1,|a|), max(1,|b/a|))` for the
/// divisors `(x1=0, x0=0, t0=0)`.  Orbit closure: max-norm heights on the
/// blown-up plane, with the line `a=0` factor forced by the consistency
/// relation `prod_j H_j^{-ord_a(j)} = |a|`.
pub fn local_heights_finite(
    model: &SurfaceModel,
    point: &RationalPoint,
    p: u64,
) -> Result<LocalHeights> {
    let hm = require_height_model(model)?;
    let one = Rat::one();
    let values = match hm {
        HeightModel::SplitQuadric => {
            let abs_a = abs_p(point.a(), p);
            let abs_c = {
                let c = point.slope();
                if c.is_zero() {
                    Rat::zero()
                } else {
                    abs_p(&c, p)
                }
            };
            let h1 = max_rat(one.clone(), abs_a.clone()) / &abs_a;
            let h2 = max_rat(one.clone(), abs_a);
            let h3 = max_rat(one, abs_c);
            vec![h1, h2, h3]
        }
        HeightModel::OrbitClosure { n } => {
            let abs_a = abs_p(point.a(), p);
            let abs_b = if point.b().is_zero() {
                Rat::zero()
            } else {
                abs_p(point.b(), p)
            };
            // |[a : b : 1]| at p
            let m = max_rat(one.clone(), max_rat(abs_a.clone(), abs_b));
            let mut values = Vec::with_capacity(n as usize + 2);
            // line a=0, filled from the consistency relation below
            values.push(Rat::one());
            let mut prod_exceptional = Rat::one();
            for r in 0..n {
                let shift = point.b() - Rat::from(Int::from(r as i64));
                let abs_shift = if shift.is_zero() {
                    Rat::zero()
                } else {
                    abs_p(&shift, p)
                };
                let dist = max_rat(abs_a.clone(), abs_shift);
                let h = &m / &dist;
                prod_exceptional *= &h;
                values.push(h);
            }
            let h_line_c = m.clone();
            // prod_j H_j^{-u_j} = |a| with u = (1, 1, ..., 1, -1)
            let h_line_a = &h_line_c / (&prod_exceptional * &abs_a);
            values[0] = h_line_a;
            values.push(h_line_c);
            values
        }
    };
    Ok(LocalHeights::Finite { p, values })
}

/// Local heights at the real place, using the sum-of-squares norm.
pub fn local_heights_arch(model: &SurfaceModel, point: &RationalPoint) -> Result<LocalHeights> {
    let hm = require_height_model(model)?;
    let a = rat_to_f64(point.a());
    let b = rat_to_f64(point.b());
    let values = match hm {
        HeightModel::SplitQuadric => {
            let norm_a = (1.0 + a * a).sqrt();
            let h1 = norm_a / a.abs();
            let h2 = norm_a;
            let h3 = (a * a + b * b).sqrt() / a.abs();
            vec![h1, h2, h3]
        }
        HeightModel::OrbitClosure { n } => {
            let m = (1.0 + a * a + b * b).sqrt();
            let mut values = Vec::with_capacity(n as usize + 2);
            values.push(1.0);
            let mut prod_exceptional = 1.0;
            for r in 0..n {
                let shift = b - r as f64;
                let h = m / (a * a + shift * shift).sqrt();
                prod_exceptional *= h;
                values.push(h);
            }
            let h_line_c = m;
            values[0] = h_line_c / (prod_exceptional * a.abs());
            values.push(h_line_c);
            values
        }
    };
    Ok(LocalHeights::Archimedean { values })
}

/// Exact anticanonical height on the split quadric:
/// `(a0^2 + a1^2)(c0^2 + c1^2)` in lowest-terms coordinates.
pub fn anticanonical_height(model: &SurfaceModel, point: &RationalPoint) -> Result<Rat> {
    match require_height_model(model)? {
        HeightModel::SplitQuadric => {}
        HeightModel::OrbitClosure { .. } => {
            return Err(Error::Unsupported {
                op: "anticanonical_height",
                model: model.name.clone(),
                reason: "height counting is only wired up for the split quadric",
            })
        }
    }
    let a = point.a();
    let c = point.slope();
    let q1 = a.numer() * a.numer() + a.denom() * a.denom();
    let q2 = c.numer() * c.numer() + c.denom() * c.denom();
    Ok(Rat::from(q1 * q2))
}

/// The primes where some local height factor can differ from 1.
pub fn relevant_primes(model: &SurfaceModel, point: &RationalPoint) -> Result<Vec<u64>> {
    let hm = require_height_model(model)?;
    let mut carrier = point.a().numer() * point.a().denom();
    let absorb = |x: &Rat, carrier: &mut Int| {
        if !x.is_zero() {
            *carrier *= x.numer() * x.denom();
        }
    };
    match hm {
        HeightModel::SplitQuadric => {
            absorb(&point.slope(), &mut carrier);
        }
        HeightModel::OrbitClosure { n } => {
            absorb(point.b(), &mut carrier);
            for r in 0..n {
                let shift = point.b() - Rat::from(Int::from(r as i64));
                absorb(&shift, &mut carrier);
            }
        }
    }
    let mut primes = Vec::new();
    let mut n = carrier.abs();
    if n.is_zero() {
        n = Int::one();
    }
    // trial-divide the carrier; point coordinates stay desk-sized
    if let Some(small) = n.to_u64() {
        primes.extend(factorize(small).into_iter().map(|(p, _)| p));
    } else {
        let mut p = 2u64;
        while !n.is_one() && p < 1_000_000 {
            if valuation_int(&n, p) > 0 {
                primes.push(p);
                let bp = Int::from(p);
                while (&n % &bp).is_zero() {
                    n /= &bp;
                }
            }
            p += if p == 2 { 1 } else { 2 };
        }
        if !n.is_one() {
            // leftover big prime factor
            if let Some(v) = n.to_u64() {
                primes.push(v);
            }
        }
    }
    primes.sort_unstable();
    primes.dedup();
    Ok(primes)
}

/// `H(s, g) = prod_v prod_j H_{D_j, v}^{s_j}` as a float, taking the product
/// over the real place and the finitely many primes where a factor is not 1.
pub fn height_pairing(model: &SurfaceModel, s: &[f64], point: &RationalPoint) -> Result<f64> {
    if s.len() != model.num_divisors() {
        return Err(Error::InvalidParameter {
            name: "s",
            detail: format!(
                "expected {} exponents, got {}",
                model.num_divisors(),
                s.len()
            ),
        });
    }
    let mut acc = local_heights_arch(model, point)?.weighted_product(s);
    for p in relevant_primes(model, point)? {
        acc *= local_heights_finite(model, point, p)?.weighted_product(s);
    }
    Ok(acc)
}

/// Exact finite-place part of the pairing for integer exponents.
pub fn height_pairing_finite_exact(
    model: &SurfaceModel,
    s: &[i64],
    point: &RationalPoint,
) -> Result<Rat> {
    let mut acc = Rat::one();
    for p in relevant_primes(model, point)? {
        let lh = local_heights_finite(model, point, p)?;
        acc *= lh.exact_weighted_product(s).expect("finite place");
    }
    Ok(acc)
}

/// Check `prod_j H_{D_j, v}^{-ord_a(j)} = |a|_v` exactly at a finite place.
pub fn character_consistency_finite(
    model: &SurfaceModel,
    point: &RationalPoint,
    p: u64,
) -> Result<bool> {
    let lh = local_heights_finite(model, point, p)?;
    let neg_u: Vec<i64> = model.divisors.iter().map(|d| -d.ord_a).collect();
    let lhs = lh.exact_weighted_product(&neg_u).expect("finite place");
    Ok(lhs == abs_p(point.a(), p))
}

/// Residual of the same identity at the real place.
pub fn character_consistency_arch(model: &SurfaceModel, point: &RationalPoint) -> Result<f64> {
    let lh = local_heights_arch(model, point)?;
    let neg_u: Vec<f64> = model.divisors.iter().map(|d| -d.ord_a as f64).collect();
    let lhs = lh.weighted_product(&neg_u);
    let abs_a = rat_to_f64(point.a()).abs();
    Ok((lhs - abs_a).abs() / abs_a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::load_model;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn ex1() -> SurfaceModel {
        load_model("ex1", None).unwrap()
    }

    fn rat64(n: i64, d: i64) -> Rat {
        Rat::new(Int::from(n), Int::from(d))
    }

    #[test]
    fn group_law() {
        let g = RationalPoint::from_ints(2, 1, 3, 1).unwrap();
        let h = RationalPoint::from_ints(1, 2, -5, 1).unwrap();
        let gh = g.mul(&h);
        assert_eq!(gh.a(), &rat64(1, 1)); // 2 * 1/2
        assert_eq!(gh.b(), &rat64(-7, 1)); // 2 * (-5) + 3
    }

    #[test]
    fn finite_heights_on_half_three_halves_at_two() {
        // a = 1/2, b = 3/2, p = 2: (1, 2, 1) per direct valuation arithmetic
        let m = ex1();
        let pt = RationalPoint::from_ints(1, 2, 3, 2).unwrap();
        let lh = local_heights_finite(&m, &pt, 2).unwrap();
        match lh {
            LocalHeights::Finite { values, .. } => {
                assert_eq!(values, vec![rat64(1, 1), rat64(2, 1), rat64(1, 1)]);
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn finite_heights_on_unit_point() {
        let m = ex1();
        let pt = RationalPoint::from_ints(1, 1, 0, 1).unwrap();
        for p in [2, 3, 5, 97] {
            let lh = local_heights_finite(&m, &pt, p).unwrap();
            match lh {
                LocalHeights::Finite { values, .. } => {
                    assert!(values.iter().all(|v| v.is_one()));
                }
                _ => unreachable!(),
            }
        }
    }

    #[test]
    fn finite_heights_three_one_at_three() {
        // a = 3, b = 1, p = 3: (3, 1, 3)
        let m = ex1();
        let pt = RationalPoint::from_ints(3, 1, 1, 1).unwrap();
        let lh = local_heights_finite(&m, &pt, 3).unwrap();
        match lh {
            LocalHeights::Finite { values, .. } => {
                assert_eq!(values, vec![rat64(3, 1), rat64(1, 1), rat64(3, 1)]);
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn arch_heights_examples() {
        let m = ex1();
        let pt = RationalPoint::from_ints(1, 1, 0, 1).unwrap();
        match local_heights_arch(&m, &pt).unwrap() {
            LocalHeights::Archimedean { values } => {
                assert_relative_eq!(values[0], 2f64.sqrt(), max_relative = 1e-14);
                assert_relative_eq!(values[1], 2f64.sqrt(), max_relative = 1e-14);
                assert_relative_eq!(values[2], 1.0, max_relative = 1e-14);
            }
            _ => unreachable!(),
        }
        let pt = RationalPoint::from_ints(1, 1, 1, 1).unwrap();
        match local_heights_arch(&m, &pt).unwrap() {
            LocalHeights::Archimedean { values } => {
                for v in values {
                    assert_relative_eq!(v, 2f64.sqrt(), max_relative = 1e-14);
                }
            }
            _ => unreachable!(),
        }
        // H_{D_1, inf} -> 1 as a -> infinity
        let pt = RationalPoint::from_ints(1_000_000, 1, 0, 1).unwrap();
        match local_heights_arch(&m, &pt).unwrap() {
            LocalHeights::Archimedean { values } => {
                assert!((values[0] - 1.0).abs() < 1e-9);
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn anticanonical_closed_form() {
        let m = ex1();
        let cases = [((1, 1, 0, 1), 2), ((1, 1, 1, 1), 4), ((1, 2, 3, 2), 50)];
        for ((an, ad, bn, bd), expect) in cases {
            let pt = RationalPoint::from_ints(an, ad, bn, bd).unwrap();
            assert_eq!(
                anticanonical_height(&m, &pt).unwrap(),
                Rat::from(Int::from(expect))
            );
        }
    }

    #[test]
    fn anticanonical_rejected_off_ex1() {
        let m2 = load_model("ex2", None).unwrap();
        let m3 = load_model("ex3", Some(3)).unwrap();
        let pt = RationalPoint::from_ints(1, 1, 0, 1).unwrap();
        assert!(matches!(
            anticanonical_height(&m2, &pt),
            Err(Error::NoHeightModel(_))
        ));
        assert!(matches!(
            anticanonical_height(&m3, &pt),
            Err(Error::Unsupported { .. })
        ));
        assert!(matches!(
            local_heights_finite(&m2, &pt, 5),
            Err(Error::NoHeightModel(_))
        ));
    }

    #[test]
    fn pairing_matches_closed_form_at_anticanonical_exponents() {
        let m = ex1();
        let pt = RationalPoint::from_ints(1, 2, 3, 2).unwrap();
        let d: Vec<f64> = m.anticanonical_vector().iter().map(|&x| x as f64).collect();
        let h = height_pairing(&m, &d, &pt).unwrap();
        assert_relative_eq!(h, 50.0, max_relative = 1e-12);
        // s = 2d on (1, 1) gives 16
        let pt = RationalPoint::from_ints(1, 1, 1, 1).unwrap();
        let d2: Vec<f64> = d.iter().map(|x| 2.0 * x).collect();
        assert_relative_eq!(
            height_pairing(&m, &d2, &pt).unwrap(),
            16.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn pairing_at_ord_a_exponents_is_one() {
        // s = u makes the global product collapse by the product formula
        let m = ex1();
        let u: Vec<f64> = m.ord_a_vector().iter().map(|&x| x as f64).collect();
        for (an, ad, bn, bd) in [(1i64, 2i64, 3i64, 2i64), (7, 3, -5, 4), (-9, 5, 1, 6)] {
            let pt = RationalPoint::from_ints(an, ad, bn, bd).unwrap();
            let h = height_pairing(&m, &u, &pt).unwrap();
            assert_relative_eq!(h, 1.0, max_relative = 1e-12);
        }
    }

    proptest! {
        #[test]
        fn character_consistency_everywhere(
            an in -40i64..40, ad in 1i64..40,
            bn in -40i64..40, bd in 1i64..40,
            which in 0usize..3
        ) {
            prop_assume!(an != 0);
            let model = match which {
                0 => load_model("ex1", None).unwrap(),
                1 => load_model("ex3", Some(3)).unwrap(),
                _ => load_model("ex3", Some(5)).unwrap(),
            };
            let pt = RationalPoint::from_ints(an, ad, bn, bd).unwrap();
            for p in relevant_primes(&model, &pt).unwrap() {
                prop_assert!(character_consistency_finite(&model, &pt, p).unwrap());
            }
            // an irrelevant prime must give the trivial vector
            prop_assert!(character_consistency_finite(&model, &pt, 101).unwrap());
            prop_assert!(character_consistency_arch(&model, &pt).unwrap() < 1e-10);
        }

        #[test]
        fn anticanonical_equals_place_by_place_product(
            an in -30i64..30, ad in 1i64..30,
            bn in -30i64..30, bd in 1i64..30,
        ) {
            prop_assume!(an != 0);
            let m = load_model("ex1", None).unwrap();
            let pt = RationalPoint::from_ints(an, ad, bn, bd).unwrap();
            let exact = anticanonical_height(&m, &pt).unwrap();
            let d = m.anticanonical_vector();
            let finite = height_pairing_finite_exact(&m, &d, &pt).unwrap();
            let arch = local_heights_arch(&m, &pt).unwrap()
                .weighted_product(&d.iter().map(|&x| x as f64).collect::<Vec<_>>());
            let product = rat_to_f64(&finite) * arch;
            prop_assert!((product - rat_to_f64(&exact)).abs() <= 1e-12 * rat_to_f64(&exact));
        }

        #[test]
        fn height_ignores_sign_convention(
            an in 1i64..50, ad in 1i64..50,
            bn in -50i64..50, bd in 1i64..50,
        ) {
            // replacing (a1, a0) by (-a1, -a0) is the same rational number,
            // so the canonical representation makes the height agree; check
            // the closed form under negating a as a sanity variant
            let m = load_model("ex1", None).unwrap();
            let plus = RationalPoint::from_ints(an, ad, bn, bd).unwrap();
            let minus = RationalPoint::from_ints(-an, ad, -bn, bd).unwrap();
            let hp = anticanonical_height(&m, &plus).unwrap();
            let hm = anticanonical_height(&m, &minus).unwrap();
            prop_assert_eq!(hp, hm);
        }
    }
}
