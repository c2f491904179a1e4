//! Enumeration of rational points of bounded anticanonical height on the
//! split quadric, and the leading-coefficient fit.
//!
//! The closed-form height `H = (a0^2 + a1^2)(c0^2 + c1^2)` turns the count
//! into a sum over coprime integer pairs: an outer scan over `(a1, a0)` and
//! an inner count of coprime pairs in a disk, memoized on the integer
//! radius.  Everything stays in `u64`/`u128`, so no overflow occurs for any
//! bound this crate can enumerate in reasonable time.

use std::collections::HashMap;
use std::sync::Arc;

use rayon::prelude::*;

use crate::arith::{gcd_u64, isqrt};
use crate::surface::{HeightModel, SurfaceModel};
use crate::{Error, Result};

fn require_split_quadric(model: &SurfaceModel, op: &'static str) -> Result<()> {
    match model.height_model {
        Some(HeightModel::SplitQuadric) => Ok(()),
        Some(_) => Err(Error::Unsupported {
            op,
            model: model.name.clone(),
            reason: "point counting is only implemented on the split quadric",
        }),
        None => Err(Error::NoHeightModel(model.name.clone())),
    }
}

/// Number of coprime pairs `(c1, c0)` with `c0 >= 1`, `c1` of any sign,
/// and `c0^2 + c1^2 <= y`, by direct scan.
///
/// This is the swap-in point for a Farey or Stern-Brocot generator if
/// sharper-than-O(y) inner counting is ever needed.
fn coprime_pairs_in_disk(y: u64) -> u64 {
    if y == 0 {
        return 0;
    }
    let mut total = 1; // (c1, c0) = (0, 1)
    let c0_max = isqrt(y);
    for c0 in 1..=c0_max {
        let c1_max = isqrt(y - c0 * c0);
        let mut row = 0;
        for c1 in 1..=c1_max {
            if gcd_u64(c1, c0) == 1 {
                row += 1;
            }
        }
        total += 2 * row; // +-c1
    }
    total
}

/// Exact sharp count `N(B)` of points of `G(Q)` with anticanonical height
/// at most `B` on the split quadric.
///
/// The outer loop runs over coprime `(a1, a0)` with `a1 >= 1` (signs
/// doubled), the inner disk count is memoized per distinct `floor(B / q1)`.
/// Work is split over `a0` blocks; totals are exact integer sums, so the
/// result is independent of the parallel schedule.
pub fn count_points(model: &SurfaceModel, bound: u64) -> Result<u64> {
    require_split_quadric(model, "count_points")?;
    if bound < 2 {
        return Ok(0);
    }

    // distinct floor values of B / q1 for 2 <= q1 <= B
    let mut distinct = Vec::new();
    let mut q1 = 2u64;
    while q1 <= bound {
        let y = bound / q1;
        distinct.push(y);
        q1 = bound / y + 1; // y >= 1 because q1 <= bound
    }
    distinct.sort_unstable();
    distinct.dedup();

    let disk_cache: HashMap<u64, u64> = distinct
        .par_iter()
        .map(|&y| (y, coprime_pairs_in_disk(y)))
        .collect();
    let disk_cache = Arc::new(disk_cache);

    let a0_max = isqrt(bound - 1);
    let total: u64 = (1..=a0_max)
        .into_par_iter()
        .map(|a0| {
            let mut acc = 0u64;
            let a1_max = isqrt(bound - a0 * a0);
            for a1 in 1..=a1_max {
                if gcd_u64(a1, a0) != 1 {
                    continue;
                }
                let q1 = a0 * a0 + a1 * a1;
                acc += disk_cache[&(bound / q1)];
            }
            acc
        })
        .sum();

    Ok(2 * total) // a1 <-> -a1
}

/// A smooth compactly supported weight on `(0, infinity)`.
#[derive(Clone)]
pub struct SmoothWeight {
    support: (f64, f64),
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl SmoothWeight {
    pub fn new(
        support: (f64, f64),
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        let (lo, hi) = support;
        if !(lo > 0.0 && hi > lo && hi.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "support",
                detail: format!("need 0 < lo < hi < inf, got [{lo}, {hi}]"),
            });
        }
        Ok(Self {
            support,
            f: Arc::new(f),
        })
    }

    /// The standard bump `t -> exp(-1 / (1 - (2t - 3)^2))` supported on
    /// `[1, 2]`, divided by its integral so it has unit mass.
    ///
    /// The normalizing constant is `int_1^2 exp(-1/(1-(2s-3)^2)) ds
    /// = 0.22199690808403971`, half the classical bump mass on `(-1, 1)`.
    pub fn standard_bump() -> Self {
        const MASS: f64 = 0.221_996_908_084_039_7;
        Self::new((1.0, 2.0), move |t| {
            let x = 2.0 * t - 3.0;
            let d = 1.0 - x * x;
            if d <= 0.0 {
                0.0
            } else {
                (-1.0 / d).exp() / MASS
            }
        })
        .expect("valid support")
    }

    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    pub fn eval(&self, t: f64) -> f64 {
        let (lo, hi) = self.support;
        if t <= lo || t >= hi {
            0.0
        } else {
            (self.f)(t)
        }
    }
}

/// Smoothed count `sum_x w(H(x) / B)`: exact height evaluation, float
/// accumulation, enumeration cut at `H <= hi * B`.
pub fn count_smoothed(model: &SurfaceModel, bound: u64, weight: &SmoothWeight) -> Result<f64> {
    require_split_quadric(model, "count_smoothed")?;
    if bound == 0 {
        return Err(Error::InvalidParameter {
            name: "B",
            detail: "need B >= 1".into(),
        });
    }
    let (_, hi) = weight.support;
    let h_max = (hi * bound as f64).ceil() as u64;
    if h_max < 2 {
        return Ok(0.0);
    }

    // histogram over q = c0^2 + c1^2 of the number of coprime pairs with
    // c0 >= 1; the pair with c1 = 0 occurs only at q = 1
    let mut pairs_of_norm = vec![0u32; h_max as usize + 1];
    pairs_of_norm[1] = 1;
    let c0_max = isqrt(h_max);
    for c0 in 1..=c0_max {
        for c1 in 1..=isqrt(h_max - c0 * c0) {
            if gcd_u64(c1, c0) == 1 {
                pairs_of_norm[(c0 * c0 + c1 * c1) as usize] += 2;
            }
        }
    }

    let inv_b = 1.0 / bound as f64;
    let mut total = 0.0f64;
    let mut comp = 0.0f64; // Kahan carry
    for q1 in 2..=h_max {
        // a-pairs have a1 != 0, so the q = 1 histogram entry is skipped
        let outer = pairs_of_norm[q1 as usize] as f64;
        if outer == 0.0 {
            continue;
        }
        for q2 in 1..=(h_max / q1) {
            let inner = pairs_of_norm[q2 as usize] as f64;
            if inner == 0.0 {
                continue;
            }
            let w = weight.eval((q1 * q2) as f64 * inv_b);
            if w != 0.0 {
                let term = outer * inner * w - comp;
                let t = total + term;
                comp = (t - total) - term;
                total = t;
            }
        }
    }
    Ok(total)
}

/// Output of the two-parameter asymptotic fit.
#[derive(Clone, Debug)]
pub struct FitResult {
    /// Coefficient of `B log B`.
    pub c1: f64,
    /// Coefficient of `B`.
    pub c2: f64,
    /// Per-sample relative residuals `(N - fit) / N`.
    pub residuals: Vec<f64>,
}

/// Least-squares fit of `N(B) ~ c1 B log B + c2 B` over the samples.
pub fn asymptotic_fit(samples: &[(u64, f64)]) -> Result<FitResult> {
    if samples.len() < 3 {
        return Err(Error::InvalidParameter {
            name: "samples",
            detail: format!("need at least 3 samples, got {}", samples.len()),
        });
    }
    // normal equations for the 2-column design (B log B, B)
    let (mut s11, mut s12, mut s22, mut r1, mut r2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(b, n) in samples {
        let b = b as f64;
        let x1 = b * b.ln();
        let x2 = b;
        s11 += x1 * x1;
        s12 += x1 * x2;
        s22 += x2 * x2;
        r1 += x1 * n;
        r2 += x2 * n;
    }
    let det = s11 * s22 - s12 * s12;
    let scale = s11 * s22;
    if det.is_nan() || det.abs() <= 1e-12 * scale.max(1.0) {
        return Err(Error::SingularFit(format!(
            "gram determinant {det:e} vanishes; is the B grid degenerate?"
        )));
    }
    let c1 = (r1 * s22 - r2 * s12) / det;
    let c2 = (s11 * r2 - s12 * r1) / det;
    let residuals = samples
        .iter()
        .map(|&(b, n)| {
            let b = b as f64;
            let fit = c1 * b * b.ln() + c2 * b;
            if n != 0.0 {
                (n - fit) / n
            } else {
                n - fit
            }
        })
        .collect();
    Ok(FitResult { c1, c2, residuals })
}
