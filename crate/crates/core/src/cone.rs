//! Rational polyhedral dual-cone machinery.
//!
//! For an index subset `I` of the boundary divisors, the dual cone is
//!
//! ```text
//! L*_I = { k in R^I : k >= 0 componentwise, k . u|_I = 0 },
//! ```
//!
//! where `u = div(a)`.  The cone volume function is the exponential integral
//! `X(z) = int_{L*_I} e^{-k(z|_I)} dk`, a rational function of `z` computed
//! exactly by triangulating the cone and summing `|det| / prod (w . z)` over
//! the simplices.  The Haar measure `dk` is normalized so that the integer
//! dual lattice has covolume `1/gcd(u|_I)`, the normalization that gives the
//! vector `u|_I` unit length in the quotient; for `gcd = 1` this is the
//! usual covolume-one lattice measure.

// exact pivoting code reads better with explicit indices
#![allow(clippy::needless_range_loop)]

use num_traits::{One, Signed, Zero};

use crate::arith::rat_to_f64;
use crate::surface::SurfaceModel;
use crate::{Error, Int, Rat, Result, C64};

/// A dual cone description: the index subset, the restricted `div(a)`
/// vector, the extreme rays, and a cached triangulation.
#[derive(Clone, Debug)]
pub struct ConeSpec {
    /// Indices of `I` inside the ambient divisor list.
    pub index_set: Vec<usize>,
    /// `u|_I`.
    pub u_restricted: Vec<i64>,
    /// Extreme rays as primitive integer vectors in `Z^I` coordinates.
    pub rays: Vec<Vec<i64>>,
    /// gcd of the nonzero entries of `u|_I` (1 when `u|_I = 0`).
    pub gcd_u: u64,
    /// Dimension the cone would have if nondegenerate.
    pub expected_dim: usize,
    /// Simplices of a placing triangulation, as ray indices with the
    /// absolute lattice determinant of each simplex.
    simplices: Vec<(Vec<usize>, Rat)>,
    /// Whether the cone has deficient dimension (volume function is 0).
    pub deficient: bool,
}

/// An evaluated cone volume.
#[derive(Clone, Debug, PartialEq)]
pub struct ConeVolume<T> {
    pub value: Option<T>,
    pub is_pole: bool,
    pub is_identically_zero: bool,
}

impl<T: Zero> ConeVolume<T> {
    fn zero() -> Self {
        ConeVolume {
            value: Some(T::zero()),
            is_pole: false,
            is_identically_zero: true,
        }
    }

    fn pole() -> Self {
        ConeVolume {
            value: None,
            is_pole: true,
            is_identically_zero: false,
        }
    }

    fn finite(v: T) -> Self {
        ConeVolume {
            value: Some(v),
            is_pole: false,
            is_identically_zero: false,
        }
    }
}

const DIM_CAP: usize = 10;

fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    if b == 0 {
        if a >= 0 {
            (a, 1, 0)
        } else {
            (-a, -1, 0)
        }
    } else {
        let (g, x, y) = ext_gcd(b, a.rem_euclid(b));
        (g, y, x - (a.div_euclid(b)) * y)
    }
}

/// Z-basis of the kernel lattice `{ k in Z^n : k . u = 0 }` for `u != 0`,
/// by unimodular column operations bringing `u` to `(g, 0, ..., 0)`.
fn kernel_basis(u: &[i64]) -> Vec<Vec<i128>> {
    let n = u.len();
    let mut v: Vec<i128> = u.iter().map(|&x| x as i128).collect();
    let mut cols: Vec<Vec<i128>> = (0..n)
        .map(|i| (0..n).map(|r| if r == i { 1 } else { 0 }).collect())
        .collect();
    for i in 1..n {
        if v[i] == 0 {
            continue;
        }
        let (g, x, y) = ext_gcd(v[0], v[i]);
        let (a, b) = (v[0] / g, v[i] / g);
        for r in 0..n {
            let c0 = cols[0][r];
            let ci = cols[i][r];
            cols[0][r] = x * c0 + y * ci;
            cols[i][r] = -b * c0 + a * ci;
        }
        v[0] = g;
        v[i] = 0;
    }
    // u . cols[0] = g and u . cols[i] = 0 for i >= 1; the transformation
    // is unimodular, so the trailing columns are a kernel basis
    cols[1..].to_vec()
}

fn rat_i(x: i128) -> Rat {
    Rat::from(Int::from(x))
}

/// Solve the full-column-rank system `B x = r` over the rationals.
fn solve_exact(columns: &[Vec<i128>], rhs: &[i64]) -> Option<Vec<Rat>> {
    let rows = rhs.len();
    let ncols = columns.len();
    let mut m: Vec<Vec<Rat>> = (0..rows)
        .map(|r| {
            let mut row: Vec<Rat> = columns.iter().map(|c| rat_i(c[r])).collect();
            row.push(rat_i(rhs[r] as i128));
            row
        })
        .collect();
    let mut pivot_rows = Vec::new();
    let mut r0 = 0usize;
    for c in 0..ncols {
        let pr = (r0..rows).find(|&r| !m[r][c].is_zero())?;
        m.swap(r0, pr);
        let inv = m[r0][c].clone().recip();
        for x in m[r0].iter_mut() {
            *x *= &inv;
        }
        for r in 0..rows {
            if r != r0 && !m[r][c].is_zero() {
                let f = m[r][c].clone();
                for cc in 0..=ncols {
                    let sub = &f * &m[r0][cc];
                    m[r][cc] -= sub;
                }
            }
        }
        pivot_rows.push(r0);
        r0 += 1;
    }
    // consistency of the remaining rows
    for r in r0..rows {
        if !m[r][ncols].is_zero() {
            return None;
        }
    }
    Some(
        (0..ncols)
            .map(|c| m[pivot_rows[c]][ncols].clone())
            .collect(),
    )
}

fn det_exact(m: &[Vec<Rat>]) -> Rat {
    let n = m.len();
    let mut a: Vec<Vec<Rat>> = m.to_vec();
    let mut det = Rat::one();
    for c in 0..n {
        let Some(pr) = (c..n).find(|&r| !a[r][c].is_zero()) else {
            return Rat::zero();
        };
        if pr != c {
            a.swap(c, pr);
            det = -det;
        }
        det *= &a[c][c];
        let inv = a[c][c].clone().recip();
        for cc in c..n {
            a[c][cc] *= &inv;
        }
        for r in (c + 1)..n {
            if !a[r][c].is_zero() {
                let f = a[r][c].clone();
                for cc in c..n {
                    let sub = &f * &a[c][cc];
                    a[r][cc] -= sub;
                }
            }
        }
    }
    det
}

fn rank_of(vectors: &[Vec<Rat>]) -> usize {
    if vectors.is_empty() {
        return 0;
    }
    let cols = vectors[0].len();
    let mut m: Vec<Vec<Rat>> = vectors.to_vec();
    let mut rank = 0usize;
    for c in 0..cols {
        let Some(pr) = (rank..m.len()).find(|&r| !m[r][c].is_zero()) else {
            continue;
        };
        m.swap(rank, pr);
        let inv = m[rank][c].clone().recip();
        for cc in 0..cols {
            m[rank][cc] *= &inv;
        }
        for r in 0..m.len() {
            if r != rank && !m[r][c].is_zero() {
                let f = m[r][c].clone();
                for cc in 0..cols {
                    let sub = &f * &m[rank][cc];
                    m[r][cc] -= sub;
                }
            }
        }
        rank += 1;
        if rank == m.len() {
            break;
        }
    }
    rank
}

fn primitive(mut v: Vec<i64>) -> Vec<i64> {
    let g = v
        .iter()
        .map(|x| x.unsigned_abs())
        .fold(0u64, crate::arith::gcd_u64);
    if g > 1 {
        for x in v.iter_mut() {
            *x /= g as i64;
        }
    }
    v
}

/// Enumerate the extreme rays of `{ k >= 0 : k . u|_I = 0 }`.
///
/// An extreme ray has minimal support: either a coordinate axis `e_j` with
/// `u_j = 0`, or a two-coordinate combination pairing a positive and a
/// negative entry of `u|_I`.
pub fn dual_cone(index_set: &[usize], u_full: &[i64]) -> Result<ConeSpec> {
    let n = index_set.len();
    if n > DIM_CAP {
        return Err(Error::InvalidParameter {
            name: "index_set",
            detail: format!("|I| = {n} exceeds the supported dimension {DIM_CAP}"),
        });
    }
    let u: Vec<i64> = index_set.iter().map(|&j| u_full[j]).collect();
    let u_is_zero = u.iter().all(|&x| x == 0);

    let mut rays: Vec<Vec<i64>> = Vec::new();
    if u_is_zero {
        for i in 0..n {
            let mut e = vec![0i64; n];
            e[i] = 1;
            rays.push(e);
        }
    } else {
        for i in 0..n {
            if u[i] == 0 {
                let mut e = vec![0i64; n];
                e[i] = 1;
                rays.push(e);
            }
        }
        for j in 0..n {
            if u[j] <= 0 {
                continue;
            }
            for k in 0..n {
                if u[k] >= 0 {
                    continue;
                }
                let mut r = vec![0i64; n];
                r[j] = -u[k];
                r[k] = u[j];
                rays.push(primitive(r));
            }
        }
    }
    rays.sort();
    rays.dedup();

    let gcd_u = u
        .iter()
        .map(|x| x.unsigned_abs())
        .fold(0u64, crate::arith::gcd_u64)
        .max(1);
    let expected_dim = if u_is_zero { n } else { n.saturating_sub(1) };

    // coordinates of the rays in a lattice basis of the kernel
    let (basis, rays_in_basis): (Vec<Vec<i128>>, Vec<Vec<Rat>>) = if u_is_zero {
        let basis: Vec<Vec<i128>> = (0..n)
            .map(|i| (0..n).map(|r| if r == i { 1 } else { 0 }).collect())
            .collect();
        let rb = rays
            .iter()
            .map(|r| r.iter().map(|&x| rat_i(x as i128)).collect())
            .collect();
        (basis, rb)
    } else {
        let basis = kernel_basis(&u);
        let mut rb = Vec::with_capacity(rays.len());
        for r in &rays {
            let coords = solve_exact(&basis, r).expect("ray lies in the kernel lattice");
            debug_assert!(coords.iter().all(|c| c.denom().is_one()));
            rb.push(coords);
        }
        (basis, rb)
    };
    let _ = basis;

    let actual_dim = rank_of(&rays_in_basis);
    let deficient = actual_dim < expected_dim;

    let simplices = if deficient || expected_dim == 0 || rays.is_empty() {
        Vec::new()
    } else {
        triangulate(&rays, &rays_in_basis, expected_dim)
    };

    Ok(ConeSpec {
        index_set: index_set.to_vec(),
        u_restricted: u,
        rays,
        gcd_u,
        expected_dim,
        simplices,
        deficient,
    })
}

/// Placing triangulation with lexicographic insertion order.
///
/// Rays are already sorted lexicographically; each new ray is joined to the
/// boundary facets it sees.  Everything is exact, so orientation tests are
/// sign decisions on rational determinants.
fn triangulate(rays: &[Vec<i64>], coords: &[Vec<Rat>], dim: usize) -> Vec<(Vec<usize>, Rat)> {
    let n = rays.len();
    assert!(n >= dim);

    // initial simplex: first `dim` linearly independent rays in order
    let mut chosen: Vec<usize> = Vec::new();
    for i in 0..n {
        let mut cand: Vec<Vec<Rat>> = chosen.iter().map(|&j| coords[j].clone()).collect();
        cand.push(coords[i].clone());
        if rank_of(&cand) == cand.len() {
            chosen.push(i);
            if chosen.len() == dim {
                break;
            }
        }
    }
    assert_eq!(chosen.len(), dim, "cone is not deficient");

    let mut simplices: Vec<Vec<usize>> = vec![chosen.clone()];
    let remaining: Vec<usize> = (0..n).filter(|i| !chosen.contains(i)).collect();

    for &new_ray in &remaining {
        let boundary = boundary_facets(&simplices, coords, dim);
        let mut added = Vec::new();
        for (facet, outward) in &boundary {
            let vis: Rat = outward
                .iter()
                .zip(&coords[new_ray])
                .map(|(a, b)| a * b)
                .sum();
            if vis.is_positive() {
                let mut s = facet.clone();
                s.push(new_ray);
                s.sort_unstable();
                added.push(s);
            }
        }
        // an extreme ray always sees at least one facet
        assert!(
            !added.is_empty(),
            "placing step found no visible facet for an extreme ray"
        );
        simplices.extend(added);
    }

    simplices
        .into_iter()
        .map(|s| {
            let m: Vec<Vec<Rat>> = s.iter().map(|&i| coords[i].clone()).collect();
            let d = det_exact(&m).abs();
            (s, d)
        })
        .filter(|(_, d)| !d.is_zero())
        .collect()
}

/// Facets of the current triangulation that belong to exactly one simplex,
/// each with its outward normal (in kernel-basis coordinates).
fn boundary_facets(
    simplices: &[Vec<usize>],
    coords: &[Vec<Rat>],
    dim: usize,
) -> Vec<(Vec<usize>, Vec<Rat>)> {
    use std::collections::HashMap;
    let mut count: HashMap<Vec<usize>, (usize, usize)> = HashMap::new();
    for (si, s) in simplices.iter().enumerate() {
        for drop in 0..dim {
            let mut f: Vec<usize> = s.clone();
            f.remove(drop);
            let e = count.entry(f).or_insert((0, si));
            e.0 += 1;
            e.1 = si;
        }
    }
    let mut out = Vec::new();
    for (facet, (c, owner)) in count {
        if c != 1 {
            continue;
        }
        let opposite = simplices[owner]
            .iter()
            .copied()
            .find(|i| !facet.contains(i))
            .expect("facet has an opposite vertex");
        if let Some(normal) = facet_normal(&facet, coords, dim) {
            let side: Rat = normal
                .iter()
                .zip(&coords[opposite])
                .map(|(a, b)| a * b)
                .sum();
            if side.is_zero() {
                continue; // degenerate sliver, skip
            }
            let outward: Vec<Rat> = if side.is_positive() {
                normal.iter().map(|x| -x.clone()).collect()
            } else {
                normal
            };
            out.push((facet, outward));
        }
    }
    out
}

/// A nonzero vector orthogonal to the `dim - 1` facet rays.
fn facet_normal(facet: &[usize], coords: &[Vec<Rat>], dim: usize) -> Option<Vec<Rat>> {
    let rows: Vec<Vec<Rat>> = facet.iter().map(|&i| coords[i].clone()).collect();
    // kernel of the (dim-1) x dim matrix by elimination
    let mut m = rows;
    let mut pivots: Vec<Option<usize>> = vec![None; dim];
    let mut rank = 0usize;
    for c in 0..dim {
        let Some(pr) = (rank..m.len()).find(|&r| !m[r][c].is_zero()) else {
            continue;
        };
        m.swap(rank, pr);
        let inv = m[rank][c].clone().recip();
        for cc in 0..dim {
            m[rank][cc] *= &inv;
        }
        for r in 0..m.len() {
            if r != rank && !m[r][c].is_zero() {
                let f = m[r][c].clone();
                for cc in 0..dim {
                    let sub = &f * &m[rank][cc];
                    m[r][cc] -= sub;
                }
            }
        }
        pivots[c] = Some(rank);
        rank += 1;
        if rank == m.len() {
            break;
        }
    }
    let free = (0..dim).find(|&c| pivots[c].is_none())?;
    let mut normal = vec![Rat::zero(); dim];
    normal[free] = Rat::one();
    for c in 0..dim {
        if let Some(r) = pivots[c] {
            normal[c] = -m[r][free].clone();
        }
    }
    Some(normal)
}

impl ConeSpec {
    pub fn num_rays(&self) -> usize {
        self.rays.len()
    }

    fn measure_scale(&self) -> Rat {
        Rat::new(Int::one(), Int::from(self.gcd_u))
    }

    /// Exact cone volume function at a rational argument indexed by the
    /// ambient divisor set.
    pub fn volume_rational(&self, z_full: &[Rat]) -> ConeVolume<Rat> {
        if self.deficient {
            return ConeVolume::zero();
        }
        let z: Vec<Rat> = self.index_set.iter().map(|&j| z_full[j].clone()).collect();
        if self.index_set.is_empty() {
            return ConeVolume::finite(Rat::one());
        }
        if self.expected_dim == 0 {
            // the cone is the origin; the integral is the point mass
            return ConeVolume::finite(self.measure_scale());
        }
        let mut total = Rat::zero();
        for (simplex, det) in &self.simplices {
            let mut denom = Rat::one();
            for &ri in simplex {
                let pairing: Rat = self.rays[ri]
                    .iter()
                    .zip(&z)
                    .map(|(&r, zc)| rat_i(r as i128) * zc)
                    .sum();
                if pairing.is_zero() {
                    return ConeVolume::pole();
                }
                denom *= pairing;
            }
            total += det / denom;
        }
        ConeVolume::finite(total * self.measure_scale())
    }

    /// Cone volume function at a complex argument.
    pub fn volume_complex(&self, z_full: &[C64]) -> ConeVolume<C64> {
        if self.deficient {
            return ConeVolume::zero();
        }
        let z: Vec<C64> = self.index_set.iter().map(|&j| z_full[j]).collect();
        if self.index_set.is_empty() {
            return ConeVolume::finite(C64::new(1.0, 0.0));
        }
        if self.expected_dim == 0 {
            return ConeVolume::finite(C64::new(rat_to_f64(&self.measure_scale()), 0.0));
        }
        let mut total = C64::new(0.0, 0.0);
        for (simplex, det) in &self.simplices {
            let mut denom = C64::new(1.0, 0.0);
            for &ri in simplex {
                let pairing: C64 = self.rays[ri]
                    .iter()
                    .zip(&z)
                    .map(|(&r, zc)| zc * r as f64)
                    .sum();
                if pairing.norm() == 0.0 {
                    return ConeVolume::pole();
                }
                denom *= pairing;
            }
            total += C64::new(rat_to_f64(det), 0.0) / denom;
        }
        ConeVolume::finite(total * rat_to_f64(&self.measure_scale()))
    }
}

/// Peyre's alpha: the cone volume of the full dual cone at the
/// anticanonical class, exact.
pub fn alpha_peyre(model: &SurfaceModel) -> Result<Rat> {
    let all: Vec<usize> = (0..model.num_divisors()).collect();
    let cone = dual_cone(&all, &model.ord_a_vector())?;
    let z: Vec<Rat> = model
        .anticanonical_vector()
        .iter()
        .map(|&d| Rat::from(Int::from(d)))
        .collect();
    let vol = cone.volume_rational(&z);
    match vol.value {
        Some(v) if !vol.is_pole && v.is_positive() => Ok(v),
        _ => Err(Error::InvalidModel {
            model: model.name.clone(),
            check: "alpha_peyre",
            detail: "anticanonical class hit a pole or a nonpositive volume".into(),
        }),
    }
}

/// Result of a numeric shifted integral.
#[derive(Clone, Copy, Debug)]
pub struct ShiftedIntegral {
    pub value: C64,
    /// Quadrature error estimate plus the modeled tail.
    pub error: f64,
    pub tail: f64,
}

/// Numerically evaluate `(2 pi)^{-1} int_{-T}^{T} g(z0 + i t u) dt` with an
/// adaptive Simpson rule on dyadic windows, plus a `C/T` tail modeled from
/// the assumed `|t|^{-2}` decay of the integrand along the shift line.
pub fn shifted_integral<F>(
    g: F,
    z0: &[C64],
    shift: &[i64],
    t_max: f64,
    tol: f64,
) -> Result<ShiftedIntegral>
where
    F: Fn(&[C64]) -> C64,
{
    if !t_max.is_finite() || t_max <= 1.0 || !tol.is_finite() || tol <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "t_max/tol",
            detail: "need t_max > 1 and tol > 0".into(),
        });
    }
    let eval = |t: f64| -> Result<C64> {
        let z: Vec<C64> = z0
            .iter()
            .zip(shift)
            .map(|(z, &u)| z + C64::new(0.0, t * u as f64))
            .collect();
        let v = g(&z);
        if !v.re.is_finite() || !v.im.is_finite() {
            return Err(Error::InvalidParameter {
                name: "integrand",
                detail: format!("non-finite sample at t = {t}"),
            });
        }
        Ok(v)
    };

    // window edges: [-T, -T/2, ..., -1, 0, 1, ..., T/2, T]
    let mut edges = vec![0.0f64, 1.0];
    let mut e = 1.0;
    while e < t_max {
        e = (e * 2.0).min(t_max);
        edges.push(e);
    }
    let mut windows: Vec<(f64, f64)> = Vec::new();
    for w in edges.windows(2) {
        windows.push((w[0], w[1]));
        windows.push((-w[1], -w[0]));
    }
    let per_window_tol = tol / (windows.len() as f64) * std::f64::consts::TAU / 4.0;

    let mut total = C64::new(0.0, 0.0);
    let mut err_acc = 0.0f64;
    for (a, b) in windows {
        let (v, e) = adaptive_simpson(&eval, a, b, per_window_tol, 24)?;
        total += v;
        err_acc += e;
    }

    // tail model: |g| ~ C / t^2 beyond T, calibrated at the endpoints
    let g_hi = eval(t_max)?.norm();
    let g_lo = eval(-t_max)?.norm();
    let tail = (g_hi + g_lo) * t_max / (2.0 * std::f64::consts::PI) * 2.0;

    let inv_2pi = 1.0 / (2.0 * std::f64::consts::PI);
    Ok(ShiftedIntegral {
        value: total * inv_2pi,
        error: err_acc * inv_2pi + tail,
        tail,
    })
}

fn adaptive_simpson<F>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> Result<(C64, f64)>
where
    F: Fn(f64) -> Result<C64>,
{
    let fa = f(a)?;
    let fb = f(b)?;
    let m = 0.5 * (a + b);
    let fm = f(m)?;
    simpson_step(f, a, b, fa, fm, fb, tol, depth)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F>(
    f: &F,
    a: f64,
    b: f64,
    fa: C64,
    fm: C64,
    fb: C64,
    tol: f64,
    depth: u32,
) -> Result<(C64, f64)>
where
    F: Fn(f64) -> Result<C64>,
{
    let m = 0.5 * (a + b);
    let h = b - a;
    let whole = (fa + fm * 4.0 + fb) * (h / 6.0);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm)?;
    let frm = f(rm)?;
    let left = (fa + flm * 4.0 + fm) * (h / 12.0);
    let right = (fm + frm * 4.0 + fb) * (h / 12.0);
    let refined = left + right;
    let delta = (refined - whole).norm();
    if depth == 0 || delta < 15.0 * tol {
        return Ok((refined + (refined - whole) / 15.0, delta / 15.0));
    }
    let (lv, le) = simpson_step(f, a, m, fa, flm, fm, tol / 2.0, depth - 1)?;
    let (rv, re) = simpson_step(f, m, b, fm, frm, fb, tol / 2.0, depth - 1)?;
    Ok((lv + rv, le + re))
}

/// The canonical integrand `g_I` whose shifted integral reproduces the cone
/// volume: `prod 1/z_j` when `|I \ J_3| != 1`, and `prod 1/(z_j (1 + z_j))`
/// when exactly one index carries a nonzero `u`.
pub fn shift_integrand(model: &SurfaceModel, index_set: &[usize]) -> impl Fn(&[C64]) -> C64 {
    let idx = index_set.to_vec();
    let u = model.ord_a_vector();
    let nonzero = idx.iter().filter(|&&j| u[j] != 0).count();
    let damped = nonzero == 1;
    move |z: &[C64]| {
        let mut acc = C64::new(1.0, 0.0);
        for &j in &idx {
            acc *= z[j];
            if damped {
                acc *= C64::new(1.0, 0.0) + z[j];
            }
        }
        acc.finv()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::load_model;

    use proptest::prelude::*;

    fn rats(v: &[i64]) -> Vec<Rat> {
        v.iter().map(|&x| Rat::from(Int::from(x))).collect()
    }

    fn rats_frac(v: &[(i64, i64)]) -> Vec<Rat> {
        v.iter()
            .map(|&(n, d)| Rat::new(Int::from(n), Int::from(d)))
            .collect()
    }

    #[test]
    fn ex1_full_cone_rays() {
        // solve k1 = k2 >= 0, k3 >= 0 by hand: rays (1,1,0) and (0,0,1)
        let cone = dual_cone(&[0, 1, 2], &[1, -1, 0]).unwrap();
        assert_eq!(cone.rays, vec![vec![0, 0, 1], vec![1, 1, 0]]);
        assert!(!cone.deficient);
    }

    #[test]
    fn same_sign_cone_is_deficient() {
        let cone = dual_cone(&[0, 1], &[1, 2]).unwrap();
        assert!(cone.deficient);
        let v = cone.volume_rational(&rats(&[1, 1]));
        assert!(v.is_identically_zero);
        assert_eq!(v.value.unwrap(), Rat::zero());
    }

    #[test]
    fn empty_index_set_integrates_to_one() {
        let cone = dual_cone(&[], &[1, -1, 0]).unwrap();
        let v = cone.volume_rational(&rats(&[5, 7, 9]));
        assert_eq!(v.value.unwrap(), Rat::one());
        assert!(!v.is_pole && !v.is_identically_zero);
    }

    #[test]
    fn singleton_with_nonzero_u_is_a_point_mass() {
        // L* = {0}; the integral is the point mass 1/|u|
        let cone = dual_cone(&[0], &[-2, 1, 0]).unwrap();
        let v = cone.volume_rational(&rats(&[3, 1, 1]));
        assert_eq!(v.value.unwrap(), Rat::new(Int::from(1), Int::from(2)));
    }

    #[test]
    fn inert_subset_gives_full_orthant() {
        let cone = dual_cone(&[0, 1, 2], &[0, 0, 0]).unwrap();
        assert_eq!(cone.num_rays(), 3);
        // product formula on the orthant
        let v = cone.volume_rational(&rats(&[2, 3, 4])).value.unwrap();
        assert_eq!(v, Rat::new(Int::from(1), Int::from(24)));
    }

    #[test]
    fn ex1_alpha_is_one_quarter() {
        let m = load_model("ex1", None).unwrap();
        let a = alpha_peyre(&m).unwrap();
        assert_eq!(a, Rat::new(Int::from(1), Int::from(4)));
    }

    #[test]
    fn ex3_alpha_closed_form() {
        // rays pair each positive index with the single negative one and
        // form a lattice basis, so alpha = 1 / ((d_a + d_c) * prod (0 + d_c))
        for n in 3..=6u32 {
            let m = load_model("ex3", Some(n)).unwrap();
            let a = alpha_peyre(&m).unwrap();
            let expect = Rat::new(Int::from(1), Int::from(3i64 * (1i64 << n)));
            assert_eq!(a, expect, "n = {n}");
        }
    }

    #[test]
    fn ex2_alpha_is_positive() {
        let m = load_model("ex2", None).unwrap();
        let a = alpha_peyre(&m).unwrap();
        assert!(a.is_positive());
    }

    #[test]
    fn pole_is_flagged() {
        let cone = dual_cone(&[0, 1, 2], &[1, -1, 0]).unwrap();
        let v = cone.volume_rational(&rats(&[1, -1, 1]));
        assert!(v.is_pole);
        assert!(v.value.is_none());
    }

    #[test]
    fn ex1_volume_closed_form() {
        // X(z) = 1 / ((z1 + z2) z3)
        let m = load_model("ex1", None).unwrap();
        let cone = dual_cone(&[0, 1, 2], &m.ord_a_vector()).unwrap();
        let z = rats_frac(&[(3, 10), (7, 10), (1, 2)]);
        let v = cone.volume_rational(&z).value.unwrap();
        assert_eq!(v, Rat::from(Int::from(2)));
    }

    #[test]
    fn shifted_integral_vanishes_for_positive_factors() {
        // (2 pi)^{-1} int dt / ((z1 + it)(1 + z1 + it)) = 0 for Re z1 > 0
        let g = |z: &[C64]| (z[0] * z[1]).finv();
        let z0 = [C64::new(0.4, 0.0), C64::new(1.4, 0.0)];
        let out = shifted_integral(g, &z0, &[1, 1], 2.0e6, 1e-7).unwrap();
        assert!(out.value.norm() < 1e-6, "|S| = {}", out.value.norm());
    }

    #[test]
    fn shifted_integral_matches_cone_volume_on_ex1() {
        let m = load_model("ex1", None).unwrap();
        let cone = dual_cone(&[0, 1, 2], &m.ord_a_vector()).unwrap();
        let g = shift_integrand(&m, &[0, 1, 2]);
        let z0r = rats_frac(&[(3, 10), (7, 10), (1, 2)]);
        let z0: Vec<C64> = z0r.iter().map(|x| C64::new(rat_to_f64(x), 0.0)).collect();
        let out = shifted_integral(&g, &z0, &[1, -1, 0], 1.0e6, 1e-7).unwrap();
        let expect = cone.volume_complex(&z0).value.unwrap();
        assert!(
            (out.value - expect).norm() <= out.error.max(1e-6),
            "S = {}, X = {}, err = {}",
            out.value,
            expect,
            out.error
        );
    }

    #[test]
    fn shifted_integral_within_reported_error_on_a_grid() {
        let m = load_model("ex1", None).unwrap();
        let cone = dual_cone(&[0, 1, 2], &m.ord_a_vector()).unwrap();
        let g = shift_integrand(&m, &[0, 1, 2]);
        let mut seed = 0x853c49e6748fea9bu64;
        for _ in 0..5 {
            let mut z0 = Vec::new();
            for _ in 0..3 {
                seed ^= seed << 13;
                seed ^= seed >> 7;
                seed ^= seed << 17;
                let t = (seed >> 11) as f64 / (1u64 << 53) as f64;
                z0.push(C64::new(0.4 + t, 0.0));
            }
            let out = shifted_integral(&g, &z0, &[1, -1, 0], 1.0e6, 1e-8).unwrap();
            let expect = cone.volume_complex(&z0).value.unwrap();
            assert!(
                (out.value - expect).norm() <= out.error,
                "off by {:.2e} with estimate {:.2e}",
                (out.value - expect).norm(),
                out.error
            );
        }
    }

    #[test]
    fn shifted_integral_vanishes_for_single_nonunit_factor() {
        // I = {1, 2} of ex1 has a single nonzero-u index; g_I carries the
        // damping factors and the shifted integral vanishes
        let m = load_model("ex1", None).unwrap();
        let g = shift_integrand(&m, &[1, 2]);
        let z0 = [
            C64::new(9.9, 0.0), // unused coordinate
            C64::new(0.6, 0.0),
            C64::new(0.8, 0.0),
        ];
        let out = shifted_integral(&g, &z0, &[1, -1, 0], 2.0e6, 1e-7).unwrap();
        assert!(out.value.norm() < 1e-6, "|S| = {}", out.value.norm());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn volume_is_invariant_under_u_translation(
            zn in prop::collection::vec(1i64..40, 3),
            cn in -9i64..9, cd in 1i64..9,
        ) {
            let m = load_model("ex1", None).unwrap();
            let u = m.ord_a_vector();
            let cone = dual_cone(&[0, 1, 2], &u).unwrap();
            let z: Vec<Rat> = zn.iter().map(|&x| Rat::new(Int::from(x), Int::from(5))).collect();
            let c = Rat::new(Int::from(cn), Int::from(cd));
            let z_shift: Vec<Rat> = z.iter().zip(&u)
                .map(|(zj, &uj)| zj + &c * Rat::from(Int::from(uj)))
                .collect();
            let v0 = cone.volume_rational(&z);
            let v1 = cone.volume_rational(&z_shift);
            if !v0.is_pole && !v1.is_pole {
                prop_assert_eq!(v0.value.unwrap(), v1.value.unwrap());
            }
        }

        #[test]
        fn volume_is_homogeneous(
            zn in prop::collection::vec(1i64..40, 7),
            lam_n in 1i64..12,
        ) {
            let m = load_model("ex2", None).unwrap();
            let all: Vec<usize> = (0..7).collect();
            let cone = dual_cone(&all, &m.ord_a_vector()).unwrap();
            let z: Vec<Rat> = zn.iter().map(|&x| Rat::new(Int::from(x), Int::from(3))).collect();
            let lam = Rat::new(Int::from(lam_n), Int::from(2));
            let zs: Vec<Rat> = z.iter().map(|x| x * &lam).collect();
            let v0 = cone.volume_rational(&z);
            let v1 = cone.volume_rational(&zs);
            prop_assume!(!v0.is_pole && !v1.is_pole);
            // dim = |I| - rank(u|_I) = 6
            let scale = crate::arith::rat_pow_int(&lam, -6);
            prop_assert_eq!(v1.value.unwrap(), v0.value.unwrap() * scale);
        }
    }
}
