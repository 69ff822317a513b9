use std::f64::consts::PI;

use lel_core::special::*;
use proptest::prelude::*;

// −Δ of the kernel functions by hand: Δφ₀ = −64(8−r²)/(8+r²)³,
// Δ(x₁/(8+r²)) = −64x₁/(8+r²)³.
fn laplacian_phi(j: usize, x: [f64; 2]) -> f64 {
    let r2 = x[0] * x[0] + x[1] * x[1];
    let d3 = (8.0 + r2).powi(3);
    match j {
        0 => -64.0 * (8.0 - r2) / d3,
        1 => -64.0 * x[0] / d3,
        _ => -64.0 * x[1] / d3,
    }
}

#[test]
fn kernel_residual_at_random_points() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    for _ in 0..200 {
        let x: [f64; 2] = [rng.gen_range(-20.0..20.0), rng.gen_range(-20.0..20.0)];
        let e_u = eval_bubble(x, 0.0).exp();
        for j in 0..3 {
            let (phi, _) = eval_phi(j, x).unwrap();
            let res = -laplacian_phi(j, x) - e_u * phi;
            assert!(res.abs() <= 1e-10, "j={j} x={x:?} res={res}");
        }
    }
}

#[test]
fn phi_gradients_match_differences() {
    let h = 1e-6;
    for &x in &[[0.3f64, -1.2], [2.0, 0.5], [-4.0, 3.0]] {
        for j in 0..3 {
            let (_, g) = eval_phi(j, x).unwrap();
            let fx = (eval_phi(j, [x[0] + h, x[1]]).unwrap().0 - eval_phi(j, [x[0] - h, x[1]]).unwrap().0) / (2.0 * h);
            let fy = (eval_phi(j, [x[0], x[1] + h]).unwrap().0 - eval_phi(j, [x[0], x[1] - h]).unwrap().0) / (2.0 * h);
            assert!((g[0] - fx).abs() < 1e-8 && (g[1] - fy).abs() < 1e-8);
        }
    }
}

#[test]
fn phi3_series_solves_ode() {
    for k in 1..=100 {
        let r = 6.0 * k as f64 / 100.0;
        let [f, d1, d2] = phi3_series(r).unwrap();
        let res = -d2 - d1 / r + f / (1.0 + r * r / 8.0).powi(2);
        assert!(res.abs() <= 1e-8, "r={r} res={res}");
        assert!(f > 0.0);
    }
}

#[test]
fn phi3_paths_agree() {
    let rs: Vec<f64> = (0..=100).map(|k| 6.0 * k as f64 / 100.0).collect();
    let ode = phi3_ode(&rs).unwrap();
    for (r, (v, _)) in rs.iter().zip(ode) {
        let s = phi3_series(*r).unwrap()[0];
        assert!((s - v).abs() <= 1e-8, "r={r}: series {s} ode {v}");
    }
}

#[test]
fn phi3_secant_matches_hypergeometric_oracle() {
    // ₂F₁(d,1−d;1;z) secant slope against log(1+r²/8) between r = 50 and 200,
    // evaluated with an arbitrary-precision hypergeometric routine
    let v = phi3_ode(&[50.0, 200.0]).unwrap();
    let l = |r: f64| (r * r / 8.0).ln_1p();
    let slope = (v[1].0 - v[0].0) / (l(200.0) - l(50.0));
    assert!((slope - 10.0395047914618).abs() < 1e-7, "slope {slope}");
}

#[test]
fn phi3_flux_tends_to_c0() {
    let c0 = flux_constant::<f64>();
    let v = phi3_ode(&[1e4]).unwrap()[0];
    assert!((1e4 * v.1 / c0 - 1.0).abs() < 1e-5);
}

#[test]
fn psi0_starts_flat() {
    let (v, d) = eval_psi0(0.0).unwrap();
    assert_eq!((v, d), (0.0, 0.0));
}

#[test]
fn psi0_paths_agree() {
    let rs: Vec<f64> = (0..=50).map(|k| 2.5 * k as f64 / 50.0).collect();
    let ode = psi0_ode(&rs).unwrap();
    for (r, (v, _)) in rs.iter().zip(ode) {
        let cf = psi0_closed_form(*r).unwrap();
        assert!((cf - v).abs() <= 1e-6, "r={r}: closed {cf} ode {v}");
    }
}

#[test]
fn psi0_log_slope() {
    let v = psi0_ode(&[1e3, 1e4]).unwrap();
    let slope = (v[1].0 - v[0].0) / 10f64.ln();
    assert!((slope / 12.0 - 1.0).abs() < 0.005, "slope {slope}");
}

#[test]
fn reference_values() {
    let tab = reference_integrals(1.0).unwrap();
    let get = |n: &str| tab.iter().find(|e| e.name == n).unwrap().value;
    let rel = |a: f64, b: f64| (a / b - 1.0).abs();
    assert!(rel(get("int_eU"), 8.0 * PI) < 1e-6);
    assert!(rel(get("int_U_eU_phi0"), 8.0 * PI) < 1e-6);
    assert!(rel(get("int_y1_eU_phi1"), 2.0 * PI) < 1e-6);
    assert!(rel(get("psi0_inner_integral"), -0.75) < 1e-6);
    // ∫e^Uφ₃ = ∫Δφ₃ = 2π lim rφ₃' = 2πC₀
    assert!(rel(get("int_eU_phi3"), 2.0 * PI * flux_constant::<f64>()) < 1e-6);
    assert!(rel(get("flux_laplacian_t_star"), 4.0 * PI * 7.0) < 1e-3);
}

#[test]
fn flux_for_several_theta() {
    for theta in [0.0, 1.0, 2.0] {
        let (f, _) = t_star_flux_limit(theta).unwrap();
        assert!((f / (4.0 * PI * (6.0 + theta)) - 1.0).abs() < 1e-3, "theta={theta}: {f}");
    }
}

#[test]
fn corrections_reduce_to_psi0() {
    let tables = SpecialTables::<f64>::shared();
    let k = CorrectionConstants::new(0.0, 0.0);
    for &r in &[0.0, 0.7, 3.0, 40.0] {
        let cv = correction_profiles(r, &k, tables);
        let (psi, _) = tables.psi0.eval(r);
        assert_eq!(cv.s_star, psi);
        assert_eq!(cv.t_star, psi);
    }
}

fn bubble_mass(theta: f64) -> f64 {
    let opts = lel_core::quadrature::QuadOptions::default();
    lel_core::quadrature::integrate_radial_plane(|r| bubble_radial(r * r, theta).exp(), &opts).unwrap().value
}

#[test]
fn bubble_mass_is_theta_independent() {
    for theta in [0.0, 0.5, 1.0, 2.0] {
        assert!((bubble_mass(theta) / (8.0 * PI) - 1.0).abs() < 1e-6);
    }
}

proptest! {
    #[test]
    fn s_minus_t_identity(r in 0.0f64..50.0, theta in 0.0f64..3.0, sigma in -1.0f64..1.0) {
        let tables = SpecialTables::<f64>::shared();
        let k = CorrectionConstants::new(theta, sigma);
        let cv = correction_profiles(r, &k, tables);
        let (phi3, _) = tables.phi3.eval(r);
        let u = bubble_radial(r * r, 0.0);
        let expect = 2.0 * k.m * phi3 - (theta + sigma) * (u - 1.0) + sigma * theta + sigma * sigma / 2.0;
        prop_assert!((cv.s_star - cv.t_star - expect).abs() <= 1e-12 * (1.0 + expect.abs()));
    }

    #[test]
    fn phi3_positive(r in 0.0f64..1e4) {
        let t = SpecialTables::<f64>::shared();
        prop_assert!(t.phi3.eval(r).0 > 0.0);
    }

    #[test]
    fn bubble_is_radially_decreasing(a in 0.0f64..100.0, b in 0.0f64..100.0, theta in 0.0f64..4.0) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(eval_bubble([lo, 0.0], theta) >= eval_bubble([0.0, hi], theta));
    }
}
