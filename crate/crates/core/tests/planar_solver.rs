use std::f64::consts::PI;
use std::sync::Arc;

use lel_core::greenrobin::{DomainSpec, GreenModel};
use lel_core::planar::*;
use lel_core::radial::{solve_radial_direct, MeshPolicy, NewtonOptions, RadialPair};
use lel_core::special::ExponentPair;

fn disk_grid(h: f64, half: f64) -> Arc<Grid2D<f64>> {
    let boxes = if half > 0.0 { vec![RefineBox { lo: [-half, -half], hi: [half, half] }] } else { vec![] };
    Arc::new(build_grid(&DomainSpec::unit_disk(), h, &boxes).unwrap())
}

fn radial(p: f64) -> RadialPair<f64> {
    solve_radial_direct(p, 0.0, &MeshPolicy::default(), &NewtonOptions::default()).unwrap()
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn node_counts() {
    let g = disk_grid(1.0 / 64.0, 0.0);
    let area = PI * 64.0 * 64.0;
    assert!((g.len() as f64 - area).abs() <= 0.02 * area, "{} nodes", g.len());
    let sq = build_grid(&DomainSpec::rectangle(1.0, 1.0).unwrap(), 1.0 / 64.0, &[]).unwrap();
    assert_eq!(sq.len(), 63 * 63);
}

#[test]
fn interior_rows_sum_to_zero() {
    let g = disk_grid(1.0 / 32.0, 0.25);
    let mut checked = 0;
    for k in 0..g.len() {
        let x = g.point(k);
        if x[0].hypot(x[1]) < 0.8 {
            let s: f64 = g.laplacian.row(k).map(|(_, a)| a).sum();
            assert!(s.abs() < 1e-9 * g.laplacian.get(k, k), "row {k} sums to {s}");
            checked += 1;
        }
    }
    assert!(checked > 1000);
}

#[test]
fn spacing_too_large_is_rejected() {
    assert!(build_grid(&DomainSpec::<f64>::unit_disk(), 0.2, &[]).is_err());
    let boxes = [RefineBox { lo: [0.5, -0.1], hi: [1.2, 0.1] }];
    assert!(build_grid(&DomainSpec::<f64>::unit_disk(), 1.0 / 32.0, &boxes).is_err());
}

#[test]
fn disk_matches_radial_reference() {
    let rad = radial(10.0);
    let g = disk_grid(1.0 / 128.0, 0.5);
    let init = PairField::from_radial(g.clone(), &rad, [0.0, 0.0]);
    let sol = solve_planar(&init, &PlanarOptions::default()).unwrap();
    assert!(sol.iterations <= 5, "{} Newton steps", sol.iterations);
    let worst = (0..g.len())
        .map(|k| {
            let x = g.point(k);
            let r = x[0].hypot(x[1]);
            (sol.v[k] - rad.eval_v(r).0).abs().max((sol.u[k] - rad.eval_u(r).0).abs())
        })
        .fold(0.0, f64::max);
    assert!(worst <= 1e-3, "max nodal difference {worst}");
    assert!(max_diff(&sol.u, &sol.v) <= 1e-8);
    assert!(sol.symmetry_deviation([0.0, 0.0]) <= 10.0 * PlanarOptions::<f64>::default().linear_tol);
    let e = sol.energy();
    assert!(e.is_finite() && e > 0.0);
}

#[test]
fn rectangle_bubble_peaks_at_center() {
    let dom = DomainSpec::rectangle(1.5, 1.0).unwrap();
    let h = 1.0 / 64.0;
    let center = [0.75f64, 0.5];
    let g = Arc::new(build_grid(&dom, h, &[RefineBox { lo: [0.5, 0.25], hi: [1.0, 0.75] }]).unwrap());
    let model = GreenModel::analytic(dom);
    let kr = model.kirchhoff_routh(&[center]).unwrap();
    let ep = ExponentPair::symmetric(8.0).unwrap();
    let init = initial_guess_from_kr(&model, &ep, &kr, g.clone()).unwrap();
    let sol = solve_planar(&init, &PlanarOptions::default()).unwrap();
    let top = g.point(sol.argmax_v());
    assert!((top[0] - center[0]).abs() <= h && (top[1] - center[1]).abs() <= h, "max at {top:?}");
    // exactly one node beats all of its lattice neighbours
    let peaks = g
        .nodes
        .iter()
        .enumerate()
        .filter(|&(k, &(i, j))| {
            let (i, j) = (i as isize, j as isize);
            [(1, 0), (-1, 0), (0, 1), (0, -1), (2, 0), (-2, 0), (0, 2), (0, -2)]
                .iter()
                .all(|&(a, b)| g.lattice_value(&sol.v, i + a, j + b) <= sol.v[k])
        })
        .count();
    assert_eq!(peaks, 1);
    assert!(max_diff(&sol.u, &sol.v) <= 1e-8);
    assert!(sol.energy() > 0.0);
}

fn manufactured_error(h: f64) -> f64 {
    let dom = DomainSpec::rectangle(1.0, 1.0).unwrap();
    let g = Arc::new(build_grid(&dom, h, &[]).unwrap());
    let p = 3.0;
    let ep = ExponentPair::symmetric(p).unwrap();
    let exact: Vec<f64> = g.points().iter().map(|x| (PI * x[0]).sin() * (PI * x[1]).sin()).collect();
    let f: Vec<f64> = exact.iter().map(|&s| 2.0 * PI * PI * s - s.powf(p)).collect();
    let init = PairField::from_fn(g.clone(), ep, |x| {
        let s = (PI * x[0]).sin() * (PI * x[1]).sin();
        (0.5 * s + 1e-3, 1.5 * s + 1e-3)
    });
    let sol = solve_planar_forced(&init, Some((&f, &f)), &PlanarOptions::default()).unwrap();
    max_diff(&sol.u, &exact).max(max_diff(&sol.v, &exact))
}

#[test]
fn manufactured_solution_is_second_order() {
    let (e1, e2) = (manufactured_error(1.0 / 32.0), manufactured_error(1.0 / 64.0));
    let ratio = e1 / e2;
    assert!((3.5..=4.5).contains(&ratio), "errors {e1:e} {e2:e}, ratio {ratio}");
}

#[test]
fn kr_guess_contract() {
    let model = GreenModel::analytic(DomainSpec::unit_disk());
    let kr = model.kirchhoff_routh(&[[0.0, 0.0]]).unwrap();
    let ep = ExponentPair::symmetric(10.0).unwrap();
    let g = disk_grid(1.0 / 64.0, 0.25);
    let guess = initial_guess_from_kr(&model, &ep, &kr, g.clone()).unwrap();
    // v_max from the rate law at Φ = R(0) = 0, evaluated independently
    let p = 10.0f64;
    let pred = 0.5f64.exp() * (1.0 - p.ln() / (p - 1.0) + (3.0 * 2f64.ln() + 2.0) / p);
    let top = guess.v[guess.argmax_v()];
    assert!((top - pred).abs() <= 0.1 * pred, "guess max {top} vs {pred}");
    assert!(guess.u.iter().chain(&guess.v).all(|&x| x >= 1e-12));
    // Dirichlet trace: lattice points outside the domain read as zero
    let edge = (g.nx / 2) as isize;
    assert_eq!(g.lattice_value(&guess.v, edge, -1), 0.0);
    assert_eq!(g.lattice_value(&guess.v, -1, edge), 0.0);
    let sol = solve_planar(&guess, &PlanarOptions::default()).unwrap();
    assert_eq!(sol.damped_steps, 0);
}

#[test]
fn nonpositive_guess_rejected() {
    let g = disk_grid(1.0 / 32.0, 0.0);
    let ep = ExponentPair::symmetric(3.0).unwrap();
    let init = PairField::from_fn(g, ep, |x| (x[0], 0.5));
    assert!(solve_planar(&init, &PlanarOptions::default()).is_err());
}
