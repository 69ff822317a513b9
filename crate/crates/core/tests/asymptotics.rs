use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};

use lel_core::asymptotics::*;
use lel_core::error::Error;
use lel_core::greenrobin::{DomainSpec, GreenModel};
use lel_core::planar::{build_grid, solve_planar, PairField, PlanarOptions};
use lel_core::radial::*;
use lel_core::special::ExponentPair;
use proptest::prelude::*;

const ORIGIN: [f64; 2] = [0.0, 0.0];

fn run(theta: f64) -> &'static [RadialPair<f64>] {
    static RUNS: [OnceLock<Vec<RadialPair<f64>>>; 3] = [OnceLock::new(), OnceLock::new(), OnceLock::new()];
    RUNS[theta as usize].get_or_init(|| {
        continue_radial(&[20.0, 40.0, 80.0, 160.0], theta, &MeshPolicy::default(), &NewtonOptions::default()).unwrap()
    })
}

fn at(theta: f64, p: f64) -> &'static RadialPair<f64> {
    run(theta).iter().find(|s| s.ep.p == p).unwrap()
}

fn diag(s: &RadialPair<f64>) -> BubbleDiagnostics<f64> {
    extract_bubble(s, ORIGIN, 0.5).unwrap()
}

fn disk() -> GreenModel<f64> {
    GreenModel::analytic(DomainSpec::unit_disk())
}

fn strictly_decreasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] < w[0])
}

fn sqrt_e() -> f64 {
    0.5f64.exp()
}

#[test]
fn radial_maximum_at_origin() {
    let s = at(0.0, 40.0);
    let d = diag(s);
    assert!(d.x_n[0].hypot(d.x_n[1]) <= 1e-10);
    assert_eq!(d.v_max, s.v0());
    assert!(d.mu > 0.0);
    let mu = (40.0 * d.v_max.powf(39.0)).powf(-0.5);
    assert!((d.mu - mu).abs() <= 1e-14 * mu);
    assert!(d.mass_v > 0.0 && d.mass_u > 0.0);
    assert_eq!(d.sigma, 0.0);
}

#[test]
fn v_max_against_prediction_at_160() {
    let d = diag(at(0.0, 160.0));
    let pred = predict_rates(&ExponentPair::symmetric(160.0).unwrap(), 0.0);
    assert!((d.v_max - pred.v_max).abs() <= 1e-3, "{} vs {}", d.v_max, pred.v_max);
    assert!((d.v_max - sqrt_e()).abs() <= 0.02);
}

#[test]
fn prediction_examples() {
    let r = predict_rates(&ExponentPair::symmetric(50.0f64).unwrap(), 0.0);
    assert!((r.v_max - 1.6516).abs() < 5e-5, "{}", r.v_max);
    let r = predict_rates(&ExponentPair::symmetric(40.0f64).unwrap(), 0.0);
    assert!((r.mu - 7.58e-6).abs() < 0.005e-6, "{}", r.mu);
}

#[test]
fn rate_report_orders_and_trends() {
    let rows: Vec<RateRow<f64>> = run(0.0).iter().rev().map(|s| RateRow::new(&s.ep, 0.0, &diag(s))).collect();
    let three = RateReport::new(rows[..3].to_vec());
    assert!(three.orders.is_none());
    let report = RateReport::new(rows);
    assert!(report.rows.windows(2).all(|w| w[0].p < w[1].p));
    let orders = report.orders.unwrap();
    assert!(orders.v_max <= -1.5, "fitted order {}", orders.v_max);
    // θ = 0: u ≡ v and the u column repeats the v column
    assert!((orders.u_max - orders.v_max).abs() <= 1e-9);
    let mu_err: Vec<f64> = report.rows.iter().map(|r| r.mu_log_error()).collect();
    assert!(strictly_decreasing(&mu_err), "{mu_err:?}");
    assert!(report.rows.iter().all(|r| r.gap_ratio.is_none()));
}

#[test]
fn gap_law() {
    for theta in [1.0, 2.0] {
        let ratios: Vec<f64> = [40.0, 80.0, 160.0]
            .iter()
            .map(|&p| {
                let s = at(theta, p);
                let d = diag(s);
                assert!(d.v_max >= d.u_at_max);
                gap_law_ratio(&d, &s.ep).unwrap()
            })
            .collect();
        assert!((0.9..=1.1).contains(&ratios[1]), "θ={theta}: ratio {}", ratios[1]);
        let dev: Vec<f64> = ratios.iter().map(|r| (r - 1.0).abs()).collect();
        assert!(strictly_decreasing(&dev), "θ={theta}: {ratios:?}");
    }
}

#[test]
fn gap_ratio_undefined_without_theta() {
    let s = at(0.0, 40.0);
    assert!(matches!(gap_law_ratio(&diag(s), &s.ep), Err(Error::UndefinedRatio(_))));
}

#[test]
fn mass_approaches_limit() {
    let target = 8.0 * PI * sqrt_e();
    let dev: Vec<f64> = run(0.0)
        .iter()
        .map(|s| {
            let d = diag(s);
            assert!((d.mass_u - d.mass_v).abs() <= 1e-12 * d.mass_v);
            (s.ep.p * d.mass_v - target).abs()
        })
        .collect();
    assert!(strictly_decreasing(&dev), "{dev:?}");
}

#[test]
fn energy_equals_nonlinear_integral() {
    // ∫∇u·∇v = ∫v·(−Δu) = ∫v^{p+1}
    let s = at(0.0, 40.0);
    let d = diag(s);
    let iv = Solution::from(s).ball_integral(ORIGIN, 0.999, |_, v| v.powf(41.0)).unwrap();
    assert!((d.energy[0] - 40.0 * iv).abs() <= 1e-4 * d.energy[0], "{} vs {}", d.energy[0], 40.0 * iv);
    assert!((d.energy[1] - d.energy[2]).abs() <= 1e-12 * d.energy[1]);
    let e: Vec<f64> = run(0.0).iter().map(|s| diag(s).energy[0]).collect();
    assert!(e.windows(2).all(|w| w[1] > w[0]) && e[3] < 8.0 * PI * 1f64.exp(), "{e:?}");
}

#[test]
fn profile_error_contracts() {
    let mut scaled = Vec::new();
    for p in [40.0, 80.0, 160.0] {
        let s = at(0.0, p);
        let d = diag(s);
        let pe = profile_error(s, &d, &s.ep, 10.0).unwrap();
        let first = pe.samples.iter().find(|x| x.rho == 0.0).unwrap();
        assert_eq!(first.z, 0.0);
        assert!(first.w.abs() <= 1e-12);
        scaled.push(pe.z_err * p.powf(1.5));
    }
    assert!(scaled.iter().all(|&x| x <= 0.2), "{scaled:?}");

    let s = at(1.0, 80.0);
    let d = diag(s);
    let pe = profile_error(s, &d, &s.ep, 10.0).unwrap();
    // w(0) = −p(v − u)/v at the maximum, −σ up to the gap-law remainder
    assert!((pe.samples[0].w + d.sigma).abs() <= 0.1 * d.sigma);
    for x in &pe.samples {
        // (s* − t*)/p = w_ref − z_ref + σ
        let lhs = ((x.w - x.z) + d.sigma - (x.w_ref - x.z_ref + d.sigma)).abs();
        assert!(lhs <= pe.z_err + pe.w_err + 1e-12);
    }
}

#[test]
fn profile_needs_resolution() {
    let s = at(0.0, 40.0);
    let d = diag(s);
    assert!(matches!(profile_error(s, &d, &s.ep, 1e-3), Err(Error::Resolution(_))));
    assert!(matches!(profile_error(s, &d, &s.ep, 1e12), Err(Error::Domain(_))));
}

#[test]
fn extraction_rejects_rim_maximum() {
    let s = at(0.0, 40.0);
    assert!(matches!(extract_bubble(s, [0.5, 0.0], 0.3), Err(Error::Extraction(_))));
    assert!(matches!(extract_bubble(s, ORIGIN, 1.0), Err(Error::Domain(_))));
}

#[test]
fn pohozaev_at_p10() {
    let s = solve_radial_direct(10.0, 0.0, &MeshPolicy::default(), &NewtonOptions::default()).unwrap();
    let r = pohozaev_check(&s, ORIGIN, 0.5).unwrap();
    assert!(r.p_relative() <= 1e-3, "{}", r.p_relative());
    assert!(r.p_residual == (r.p_lhs - r.p_rhs).abs());
    for i in 0..2 {
        assert!(r.q_lhs[i].abs() <= 1e-6 && r.q_rhs[i].abs() <= 1e-6);
        assert!(r.q_relative()[i] <= 1e-3);
    }
    assert!(matches!(pohozaev_check(&s, [0.6, 0.0], 0.5), Err(Error::Domain(_))));
}

#[test]
fn pohozaev_residual_is_second_order() {
    let ep = ExponentPair::symmetric(10.0).unwrap();
    let mut mesh = MeshPolicy { intervals: 500, grading: 1.2, mu_factor: 1.0 }.mesh_for(&ep).unwrap();
    let mut res = Vec::new();
    for _ in 0..4 {
        let s = solve_radial(&ep, &mesh, RadialInit::Bubble, &NewtonOptions::default()).unwrap();
        res.push(pohozaev_check(&s, ORIGIN, 0.5).unwrap().p_relative());
        mesh = mesh.refined();
    }
    for w in res.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!((1.8..=2.2).contains(&order), "{res:?}");
    }
}

#[test]
fn pohozaev_of_green_function() {
    let model = disk();
    for (x, r) in [(ORIGIN, 0.5), ([0.3, 0.2], 0.05), ([-0.4, 0.1], 0.2)] {
        let (pg, q) = pohozaev_green(&model, x, r).unwrap();
        assert!((pg + 1.0 / (2.0 * PI)).abs() <= 1e-4, "{x:?}: {pg}");
        assert!(q.iter().all(|v| v.is_finite()));
    }
    assert!(pohozaev_green(&model, [1.2, 0.0], 0.1).is_err());
}

#[test]
fn outer_expansion() {
    let model = disk();
    let pts = [[0.4, 0.0], [0.0, 0.6], [-0.8, 0.0]];
    let sup: Vec<f64> = [40.0, 80.0, 160.0]
        .iter()
        .map(|&p| {
            let c = outer_expansion_check(at(0.0, p), &model, &[ORIGIN], &pts).unwrap();
            assert!((c.sup_u - c.sup_v).abs() <= 1e-12);
            c.sup_u
        })
        .collect();
    assert!(sup[1] <= 0.5, "{sup:?}");
    assert!(strictly_decreasing(&sup), "{sup:?}");

    let fit_pts: Vec<[f64; 2]> = (0..30).map(|k| [0.25 + 0.025 * k as f64, 0.0]).collect();
    let fit = outer_coefficient_fit(at(0.0, 160.0), &model, &[ORIGIN], &fit_pts).unwrap();
    let target = 8.0 * PI * sqrt_e();
    assert!((fit / target - 1.0).abs() <= 0.05, "{fit} vs {target}");

    let s = at(0.0, 80.0);
    let edge = Solution::from(s).sample([1.0, 0.0]);
    assert!((80.0 * edge.u).abs() <= 1e-12);
    assert!(matches!(outer_expansion_check(s, &model, &[ORIGIN], &[[0.1, 0.1]]), Err(Error::Domain(_))));
}

#[test]
fn kernel_modes() {
    use GrowthClass::*;
    let expect = [(0, -1, Bounded), (0, 1, Logarithmic), (1, -1, Decaying), (1, 1, Power), (2, -1, Power), (2, 1, Power), (3, -1, Power), (3, 1, Power)];
    let mut dim = 0;
    for (j, sign, class) in expect {
        let m = limit_kernel_modes(j, sign, 0.5).unwrap();
        assert_eq!(m.class, class, "j={j} sign={sign}: slope {}", m.log_slope);
        if m.admissible {
            dim += m.dimension;
        }
    }
    assert_eq!(dim, 4);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn admissible_set_is_four_dimensional(tau in 0.05f64..0.95) {
        let mut dim = 0;
        for j in 0..5 {
            for sign in [-1, 1] {
                let m = limit_kernel_modes(j, sign, tau).unwrap();
                prop_assert_eq!(m.admissible, m.class != GrowthClass::Power);
                if m.admissible {
                    dim += m.dimension;
                }
            }
        }
        prop_assert_eq!(dim, 4);
    }
}

fn bessel_j0(x: f64) -> f64 {
    let (mut term, mut sum) = (1.0, 1.0);
    for k in 1..60 {
        term *= -(x * x / 4.0) / (k * k) as f64;
        sum += term;
    }
    sum
}

fn first_bessel_zero() -> f64 {
    let (mut a, mut b) = (2.0, 3.0);
    for _ in 0..80 {
        let m = 0.5 * (a + b);
        if bessel_j0(a) * bessel_j0(m) <= 0.0 {
            b = m;
        } else {
            a = m;
        }
    }
    0.5 * (a + b)
}

#[test]
fn laplacian_only_probe() {
    let lambda = first_bessel_zero().powi(2);
    assert!((lambda - 5.7832).abs() < 1e-4);
    let op = LinearizedOperator::radial(at(0.0, 40.0), 0).without_potential();
    let (sv, ok) = op.smallest_singular_values(2).unwrap();
    assert!(ok[0]);
    // both blocks carry the same Laplacian
    assert!((sv[0] - sv[1]).abs() <= 1e-8 * sv[0]);
    assert!((sv[0] / lambda - 1.0).abs() <= 0.01, "{} vs {lambda}", sv[0]);
}

#[test]
fn probe_swap_symmetry() {
    let op = LinearizedOperator::radial(at(0.0, 20.0), 0);
    let (a, _) = op.smallest_singular_values(3).unwrap();
    let (b, _) = op.swapped().smallest_singular_values(3).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() <= 1e-8 * x, "{a:?} vs {b:?}");
    }
}

#[test]
fn probe_stays_above_floor() {
    for p in [20.0, 40.0, 80.0] {
        let probe = linearized_probe(at(0.0, p), 3).unwrap();
        assert!(probe.singular_values.windows(2).all(|w| w[0] <= w[1]));
        assert!(probe.singular_values[0] >= 0.1, "p={p}: {:?}", probe.singular_values);
        assert!(probe.converged[0] && probe.nondegenerate);
    }
}

#[test]
fn planar_diagnostics() {
    let rad = solve_radial_direct(5.0, 0.0, &MeshPolicy::default(), &NewtonOptions::default()).unwrap();
    let g = Arc::new(build_grid(&DomainSpec::unit_disk(), 1.0 / 32.0, &[]).unwrap());
    let init = PairField::from_radial(g, &rad, ORIGIN);
    let sol = solve_planar(&init, &PlanarOptions::default()).unwrap();
    let d = extract_bubble(&sol, ORIGIN, 0.5).unwrap();
    assert!(d.x_n[0].hypot(d.x_n[1]) <= 1.0 / 64.0);
    assert!((d.v_max - rad.v0()).abs() <= 0.02, "{} vs {}", d.v_max, rad.v0());
    let r = pohozaev_check(&sol, ORIGIN, 0.5).unwrap();
    assert!(r.p_relative() <= 0.02, "{}", r.p_relative());
    let probe = linearized_probe(&sol, 2).unwrap();
    assert!(probe.modes.iter().all(|&m| m == 0));
    assert!(probe.singular_values.iter().all(|&v| v > 0.0));
}

#[test]
fn diagnostics_are_deterministic() {
    let s = at(1.0, 80.0);
    assert_eq!(diag(s), diag(s));
    assert_eq!(pohozaev_check(s, ORIGIN, 0.5).unwrap(), pohozaev_check(s, ORIGIN, 0.5).unwrap());
    let d = diag(s);
    assert_eq!(profile_error(s, &d, &s.ep, 10.0).unwrap(), profile_error(s, &d, &s.ep, 10.0).unwrap());
    let rerun = continue_radial(&[80.0], 1.0, &MeshPolicy::default(), &NewtonOptions::default()).unwrap();
    assert_eq!(rerun[0].v, solve_radial_direct(80.0, 1.0, &MeshPolicy::default(), &NewtonOptions::default()).unwrap().v);
}
