//! Independent verification of the triangulated cone volumes: the shifted
//! integral of `g_J = prod 1/z_j` reproduces the volume function whenever
//! at least two indices carry a nonzero `ord(a)`, so a quadrature along the
//! shift line cross-checks the double-description, the placing
//! triangulation, and the lattice normalization in one shot — on every
//! built-in model, not just the split quadric.

use manin_core::cone::{dual_cone, shift_integrand, shifted_integral};
use manin_core::surface::load_model;
use manin_core::C64;

fn check_full_cone(model_name: &str, n: Option<u32>, tol: f64) {
    let model = load_model(model_name, n).unwrap();
    let u = model.ord_a_vector();
    let nd = model.num_divisors();
    let all: Vec<usize> = (0..nd).collect();
    let cone = dual_cone(&all, &u).unwrap();

    // an interior point of the shifted convergence region: d + t u > 0
    let d = model.anticanonical_vector();
    let mut z0: Vec<C64> = Vec::with_capacity(nd);
    for j in 0..nd {
        let val = d[j] as f64 + 0.5 * u[j] as f64;
        assert!(val > 0.0, "chosen base point must be interior");
        z0.push(C64::new(val, 0.0));
    }

    let g = shift_integrand(&model, &all);
    let s = shifted_integral(&g, &z0, &u, 300.0, 1e-9).unwrap();
    let x = cone.volume_complex(&z0).value.unwrap();
    assert!(
        (s.value - x).norm() <= tol,
        "{}: S = {}, X = {}, |diff| = {:.3e}",
        model.name,
        s.value,
        x,
        (s.value - x).norm()
    );
}

#[test]
fn ex1_quadrature_matches_volume() {
    // integrand decays like |t|^{-2}: modest T, modest tolerance
    let model = load_model("ex1", None).unwrap();
    let u = model.ord_a_vector();
    let cone = dual_cone(&[0, 1, 2], &u).unwrap();
    let g = shift_integrand(&model, &[0, 1, 2]);
    let z0 = [C64::new(0.5, 0.0), C64::new(1.5, 0.0), C64::new(2.0, 0.0)];
    let s = shifted_integral(&g, &z0, &u, 1.0e6, 1e-8).unwrap();
    let x = cone.volume_complex(&z0).value.unwrap();
    assert!((s.value - x).norm() <= 1e-5);
}

#[test]
fn ex2_quadrature_matches_volume() {
    // seven factors, five with nonzero u: decay |t|^{-6}, tiny tail
    check_full_cone("ex2", None, 1e-7);
}

#[test]
fn ex3_quadrature_matches_volume() {
    // n + 2 factors, all with nonzero u: decay at least |t|^{-5}
    check_full_cone("ex3", Some(3), 1e-7);
    check_full_cone("ex3", Some(4), 1e-7);
}
