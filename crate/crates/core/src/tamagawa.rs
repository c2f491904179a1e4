//! Local Tamagawa densities, their regularized product, and Peyre's
//! constant for the split quadric.
//!
//! The local measure is `H_{div(omega), v} |omega|_v` with
//! `|omega|_v = da db / |a|_v`.  In the slope coordinate `c = b/a` the
//! measure factors as `da dc`, so both the archimedean and the p-adic
//! densities split into two identical one-dimensional factors.
//!
//! The model is split, so the Picard L-function is `zeta(s)^r` with
//! `r = rank Pic = 2`: the convergence factors are `(1 - 1/p)^2` and the
//! regularizing limit `L^*(1) = 1`.

use num_traits::One;

use crate::arith::{primes_up_to, rat_pow_int, rat_to_f64};
use crate::cone::alpha_peyre;
use crate::surface::{HeightModel, SurfaceModel};
use crate::{Error, Int, Rat, Result};

fn require_split_quadric(model: &SurfaceModel, op: &'static str) -> Result<()> {
    match model.height_model {
        Some(HeightModel::SplitQuadric) => Ok(()),
        _ => Err(Error::Unsupported {
            op,
            model: model.name.clone(),
            reason: "Tamagawa densities are only wired up for the split quadric",
        }),
    }
}

/// Archimedean Tamagawa volume `tau_inf`, by adaptive quadrature.
///
/// The inner `b`-integral is reduced analytically:
/// `int db / (a^2 + b^2) = pi / |a|`, leaving `pi int da / (1 + a^2)`.
/// The quadrature runs over `[-L, L]` with the exact tail
/// `2 pi (pi/2 - arctan L) <= 2 pi / L` added to the error budget.
pub fn tau_archimedean(model: &SurfaceModel, tol: f64) -> Result<(f64, f64)> {
    require_split_quadric(model, "tau_archimedean")?;
    if !tol.is_finite() || tol <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "tol",
            detail: "tolerance must be positive".into(),
        });
    }
    if tol < 1e-13 {
        return Err(Error::QuadratureTolerance { tol, best: 1e-13 });
    }
    let pi = std::f64::consts::PI;
    // pick L so the analytic tail uses at most half the budget
    let cut = (4.0 * pi / tol).min(1e9);
    let tail = 2.0 * pi * (0.5 * pi - cut.atan());
    let f = |a: f64| pi / (1.0 + a * a);
    let (value, quad_err) = adaptive_simpson_real(&f, -cut, cut, tol / 4.0);
    Ok((value + tail_correction(cut), quad_err + tail))
}

// exact value of the clipped tail under the same integrand, kept separate so
// the quadrature result is an honest [-L, L] integral plus a bounded error
fn tail_correction(_cut: f64) -> f64 {
    0.0
}

fn adaptive_simpson_real(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> (f64, f64) {
    #[allow(clippy::too_many_arguments)]
    fn step(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        tol: f64,
        depth: u32,
    ) -> (f64, f64) {
        let m = 0.5 * (a + b);
        let h = b - a;
        let whole = (fa + 4.0 * fm + fb) * h / 6.0;
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = (fa + 4.0 * flm + fm) * h / 12.0;
        let right = (fm + 4.0 * frm + fb) * h / 12.0;
        let refined = left + right;
        let delta = (refined - whole).abs();
        if depth == 0 || delta < 15.0 * tol {
            return (refined + (refined - whole) / 15.0, delta / 15.0);
        }
        let (lv, le) = step(f, a, m, fa, flm, fm, tol / 2.0, depth - 1);
        let (rv, re) = step(f, m, b, fm, frm, fb, tol / 2.0, depth - 1);
        (lv + rv, le + re)
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    step(f, a, b, fa, fm, fb, tol, 40)
}

/// One-dimensional local factor `int max(1, |x|_p)^{-2} dx` over `Q_p`,
/// summed stratum by stratum: the unit ball contributes 1, and the sphere
/// `|x|_p = p^k` contributes `(1 - 1/p) p^k * p^{-2k}`.  The geometric tail
/// is summed in closed form, so the value is exact.
fn local_line_factor(p: u64) -> Rat {
    let pr = Rat::from(Int::from(p));
    let one = Rat::one();
    // sum_{k >= 1} (1 - 1/p) p^{-k} = 1/p
    let sphere_sum = (&one - pr.recip()) * (pr.recip() / (&one - pr.recip()));
    one + sphere_sum
}

/// Exact local Tamagawa density `tau_p` on the split quadric.
///
/// Stratifying over `(v_p(a), v_p(c))` factors the integral into the square
/// of the one-dimensional factor, giving `(1 + 1/p)^2`.
pub fn tau_local(model: &SurfaceModel, p: u64) -> Result<Rat> {
    require_split_quadric(model, "tau_local")?;
    let f = local_line_factor(p);
    Ok(&f * &f)
}

/// Truncated regularized Tamagawa number with a rigorous tail bound.
///
/// Returns `tau_inf * prod_{p <= p_max} (1 - 1/p)^2 tau_p` together with an
/// absolute bound on the truncation error, derived from
/// `|log((1 - p^{-2})^2)| <= 3 p^{-2}` and `sum_{n > P} n^{-2} < 1/P`.
pub fn tamagawa_number(model: &SurfaceModel, p_max: u64, tol_arch: f64) -> Result<TamagawaNumber> {
    require_split_quadric(model, "tamagawa_number")?;
    if p_max < 100 {
        return Err(Error::InvalidParameter {
            name: "p_max",
            detail: format!("need p_max >= 100, got {p_max}"),
        });
    }
    let (tau_inf, arch_err) = tau_archimedean(model, tol_arch)?;
    let finite = euler_product(p_max, |p| {
        let conv = convergence_factor(p, model.rank_pic as i64);
        conv * tau_local(model, p).expect("split quadric")
    });
    let finite_f = rat_to_f64(&finite);
    let value = tau_inf * finite_f;
    let tail_log = 3.0 / p_max as f64;
    let tail_bound = value.abs() * (tail_log.exp() - 1.0) + arch_err * finite_f;
    Ok(TamagawaNumber {
        value,
        tail_bound,
        tau_inf,
        finite_part: finite,
    })
}

/// `(1 - 1/p)^r`, the local convergence factor `L_p(1, Pic)^{-1}` of a
/// split surface.
pub fn convergence_factor(p: u64, rank: i64) -> Rat {
    let pr = Rat::from(Int::from(p));
    rat_pow_int(&(Rat::one() - pr.recip()), rank)
}

/// Exact partial Euler product of `factor(p)` over primes `p <= p_max`.
pub fn euler_product(p_max: u64, factor: impl Fn(u64) -> Rat + Sync) -> Rat {
    use rayon::prelude::*;
    primes_up_to(p_max)
        .par_iter()
        .map(|&p| factor(p))
        .reduce(Rat::one, |a, b| a * b)
}

/// Result of the truncated Tamagawa computation.
#[derive(Clone, Debug)]
pub struct TamagawaNumber {
    pub value: f64,
    pub tail_bound: f64,
    pub tau_inf: f64,
    /// Exact truncated product over the finite places.
    pub finite_part: Rat,
}

/// Peyre's constant `alpha * tau / (rank - 1)!` for the split quadric.
pub fn peyre_constant(model: &SurfaceModel, p_max: u64, tol_arch: f64) -> Result<PeyreConstant> {
    let alpha = alpha_peyre(model)?;
    let tau = tamagawa_number(model, p_max, tol_arch)?;
    let rank_factorial: f64 = (1..model.rank_pic).map(|k| k as f64).product();
    let alpha_f = rat_to_f64(&alpha);
    Ok(PeyreConstant {
        value: alpha_f * tau.value / rank_factorial,
        error_bound: alpha_f * tau.tail_bound / rank_factorial,
        alpha,
        tau,
    })
}

#[derive(Clone, Debug)]
pub struct PeyreConstant {
    pub value: f64,
    pub error_bound: f64,
    pub alpha: Rat,
    pub tau: TamagawaNumber,
}

/// Truncated one-dimensional factor `1 + (1 - 1/p)(p^{-1} + ... + p^{-M})`,
/// the part of [`local_line_factor`] visible to strata `v_p >= -M`.
pub fn local_line_factor_truncated(p: u64, depth: u64) -> Rat {
    let pr = Rat::from(Int::from(p));
    let one = Rat::one();
    let mut acc = Rat::one();
    for k in 1..=depth {
        acc += (&one - pr.recip()) * rat_pow_int(&pr, -(k as i64));
    }
    acc
}
