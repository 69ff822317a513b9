//! One PASS/FAIL line per acceptance criterion, then the module examples
//! whose tolerances are not met at these exponents. Thresholds are the
//! stated ones; anything not met at desk scale reports FAIL with the
//! measured values and the run exits nonzero.

use std::f64::consts::PI;
use std::io::Write;
use std::sync::Arc;
use std::time::Duration;

use lel_core::asymptotics::*;
use lel_core::greenrobin::*;
use lel_core::planar::{build_grid, solve_planar, PairField, PlanarOptions, RefineBox};
use lel_core::radial::*;
use lel_core::special::*;
use lel_core::GreenModelF64;
use lel_verify::{criterion, example, Checks, Verdict};

const ORIGIN: [f64; 2] = [0.0, 0.0];
const SECONDS: fn(u64) -> Duration = Duration::from_secs;

/// Frozen on the default mesh; see the probe test in lel-core.
const SINGULAR_VALUE_FLOOR: f64 = 0.1;

fn rel(a: f64, b: f64) -> f64 {
    (a / b - 1.0).abs()
}

fn decreasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] < w[0])
}

fn diag(s: &RadialPair<f64>) -> BubbleDiagnostics<f64> {
    extract_bubble(s, ORIGIN, 0.5).expect("extraction")
}

fn run(theta: f64, grid: &[f64]) -> Vec<RadialPair<f64>> {
    continue_radial(grid, theta, &MeshPolicy::default(), &NewtonOptions::default()).expect("continuation")
}

fn special_identities(c: &mut Checks) {
    for theta in [0.0, 1.0, 2.0] {
        let tab = match reference_integrals(theta) {
            Ok(t) => t,
            Err(e) => return c.fail(format!("θ={theta}: {e}")),
        };
        let get = |n: &str| tab.iter().find(|e| e.name == n).map_or(f64::NAN, |e| e.value);
        let worst = [
            rel(get("int_eU"), 8.0 * PI),
            rel(get("int_U_eU_phi0"), 8.0 * PI),
            rel(get("int_y1_eU_phi1"), 2.0 * PI),
            rel(get("psi0_inner_integral"), -0.75),
        ]
        .into_iter()
        .fold(0.0, f64::max);
        c.check(worst <= 1e-6, format!("θ={theta}: identities rel {worst:.1e}"));
        let flux = get("flux_laplacian_t_star");
        let e = rel(flux, 4.0 * PI * (6.0 + theta));
        c.check(e <= 1e-3, format!("flux {flux:.5} rel {e:.1e}"));
    }
}

fn profile_paths(c: &mut Checks) {
    let rs: Vec<f64> = (0..=120).map(|k| 6.0 * k as f64 / 120.0).collect();
    let ode = phi3_ode(&rs).expect("φ₃ ode");
    let d = rs.iter().zip(&ode).map(|(&r, v)| (phi3_series(r).expect("series")[0] - v.0).abs()).fold(0.0, f64::max);
    c.check(d <= 1e-8, format!("φ₃ paths {d:.1e}"));

    let half_c0 = flux_constant::<f64>() / 2.0;
    let v = phi3_ode(&[50.0, 200.0]).expect("φ₃ ode");
    let l = |r: f64| (r * r / 8.0).ln_1p();
    let slope = (v[1].0 - v[0].0) / (l(200.0) - l(50.0));
    c.check(rel(slope, half_c0) <= 0.01, format!("φ₃ slope {slope:.5} vs C₀/2 {half_c0:.5} ({:.2}%)", 100.0 * rel(slope, half_c0)));

    let rs: Vec<f64> = (0..=50).map(|k| 2.5 * k as f64 / 50.0).collect();
    let ode = psi0_ode(&rs).expect("ψ₀ ode");
    let d = rs.iter().zip(&ode).map(|(&r, v)| (psi0_closed_form(r).expect("closed form") - v.0).abs()).fold(0.0, f64::max);
    c.check(d <= 1e-6, format!("ψ₀ paths {d:.1e}"));

    let v = psi0_ode(&[1e3, 1e4]).expect("ψ₀ ode");
    let slope = (v[1].0 - v[0].0) / 10f64.ln();
    c.check(rel(slope, 12.0) <= 0.005, format!("ψ₀ slope {slope:.4}"));
}

fn rate_laws(c: &mut Checks) {
    let sols = run(0.0, &[20.0, 40.0, 80.0, 160.0]);
    let report = RateReport::new(sols.iter().map(|s| RateRow::new(&s.ep, 0.0, &diag(s))).collect());
    let order = report.orders.map_or(f64::NAN, |o| o.v_max);
    c.check(order <= -1.5, format!("v(0) error order {order:.3}"));
    let mu: Vec<f64> = report.rows.iter().map(|r| r.mu_log_error()).collect();
    c.check(decreasing(&mu), format!("μ-law defect {:?}", mu.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>()));
    c.check(mu[3] <= 0.02, format!("μ-law defect at p=160 {:.4} ≤ 0.02", mu[3]));
}

fn gap_law(c: &mut Checks) {
    for theta in [1.0, 2.0] {
        let r: Vec<f64> = run(theta, &[40.0, 80.0, 160.0]).iter().map(|s| gap_law_ratio(&diag(s), &s.ep).expect("ratio")).collect();
        c.check((0.9..=1.1).contains(&r[1]), format!("θ={theta}: ratio at p=80 {:.4}", r[1]));
        let dev: Vec<f64> = r.iter().map(|x| (x - 1.0).abs()).collect();
        c.check(decreasing(&dev), format!("|ratio−1| {:.4}/{:.4}/{:.4}", dev[0], dev[1], dev[2]));
    }
}

fn energy_and_outer(c: &mut Checks) {
    let sols = run(0.0, &[80.0, 160.0]);
    let e = diag(&sols[0]).energy[0];
    let target = 8.0 * PI * 1f64.exp();
    c.check(rel(e, target) <= 0.05, format!("p∫∇u·∇v at p=80 {e:.3} vs 8πe {target:.3} ({:.1}%)", 100.0 * (e / target - 1.0)));
    let model = GreenModel::analytic(DomainSpec::unit_disk());
    let pts: Vec<[f64; 2]> = (0..30).map(|k| [0.25 + 0.025 * k as f64, 0.0]).collect();
    let fit = outer_coefficient_fit(&sols[1], &model, &[ORIGIN], &pts).expect("fit");
    let t = 8.0 * PI * 0.5f64.exp();
    c.check(rel(fit, t) <= 0.05, format!("outer coefficient at p=160 {fit:.3} vs 8π√e {t:.3}"));
}

fn pohozaev(c: &mut Checks) {
    let s = solve_radial_direct(10.0, 0.0, &MeshPolicy::default(), &NewtonOptions::default()).expect("p=10");
    let r = pohozaev_check(&s, ORIGIN, 0.5).expect("pohozaev");
    let q = r.q_relative()[0].max(r.q_relative()[1]);
    c.check(r.p_relative() <= 1e-3 && q <= 1e-3, format!("residuals P {:.1e}, Q {q:.1e}", r.p_relative()));

    let ep = ExponentPair::symmetric(10.0).unwrap();
    let mut mesh = MeshPolicy { intervals: 500, grading: 1.2, mu_factor: 1.0 }.mesh_for(&ep).expect("mesh");
    let mut res = Vec::new();
    for _ in 0..4 {
        let s = solve_radial(&ep, &mesh, RadialInit::Bubble, &NewtonOptions::default()).expect("solve");
        res.push(pohozaev_check(&s, ORIGIN, 0.5).expect("pohozaev").p_relative());
        mesh = mesh.refined();
    }
    let orders: Vec<f64> = res.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    c.check(orders.iter().all(|o| (1.8..=2.2).contains(o)), format!("orders {:?}", orders.iter().map(|o| format!("{o:.2}")).collect::<Vec<_>>()));

    let model = GreenModel::analytic(DomainSpec::unit_disk());
    let (pg, _) = pohozaev_green(&model, ORIGIN, 0.5).expect("green");
    c.check((pg + 1.0 / (2.0 * PI)).abs() <= 1e-4, format!("P(G,G) {pg:.8}"));
}

fn kernel(c: &mut Checks) {
    use GrowthClass::*;
    let expect = [(0, -1, Bounded), (0, 1, Logarithmic), (1, -1, Decaying), (1, 1, Power), (2, -1, Power), (2, 1, Power), (3, -1, Power), (3, 1, Power)];
    for tau in [0.1, 0.5, 0.9] {
        let mut dim = 0;
        for (j, sign, class) in expect {
            let m = limit_kernel_modes(j, sign, tau).expect("shoot");
            if m.class != class {
                c.fail(format!("j={j} sign={sign}: {:?}", m.class));
            }
            if m.admissible {
                dim += m.dimension;
            }
        }
        c.check(dim == 4, format!("τ={tau}: admissible dimension {dim}"));
    }
}

fn bessel_j0_zero() -> f64 {
    let j0 = |x: f64| {
        let (mut t, mut s) = (1.0, 1.0);
        for k in 1..60 {
            t *= -(x * x / 4.0) / (k * k) as f64;
            s += t;
        }
        s
    };
    let (mut a, mut b) = (2.0, 3.0);
    for _ in 0..80 {
        let m = 0.5 * (a + b);
        if j0(a) * j0(m) <= 0.0 {
            b = m
        } else {
            a = m
        }
    }
    0.5 * (a + b)
}

fn nondegeneracy(c: &mut Checks) {
    let grid: Vec<f64> = (2..=8).map(|k| 10.0 * k as f64).collect();
    let sols = run(0.0, &grid);
    let mut lowest: Vec<String> = Vec::new();
    let mut ok = true;
    for s in &sols {
        match linearized_probe(s, 2) {
            Ok(pr) => {
                ok &= pr.singular_values[0] >= SINGULAR_VALUE_FLOOR && pr.nondegenerate;
                lowest.push(format!("{:.3}", pr.singular_values[0]));
            }
            Err(e) => {
                ok = false;
                lowest.push(e.to_string());
            }
        }
    }
    c.check(ok, format!("σ_min over p=20..80 {lowest:?} ≥ {SINGULAR_VALUE_FLOOR}"));
    let lambda = bessel_j0_zero().powi(2);
    let (sv, _) = LinearizedOperator::radial(&sols[0], 0).without_potential().smallest_singular_values(1).expect("laplacian");
    c.check(rel(sv[0], lambda) <= 0.01, format!("Laplacian {:.5} vs j₀,₁² {lambda:.5}", sv[0]));
}

fn uniqueness(c: &mut Checks) {
    let ep = ExponentPair::symmetric(40.0).unwrap();
    let mesh = MeshPolicy::default().mesh_for(&ep).expect("mesh");
    let (u, v) = bubble_guess(&ep, &mesh).expect("guess");
    let scaled = |a: f64| (u.iter().map(|x| a * x).collect::<Vec<_>>(), v.iter().map(|x| a * x).collect::<Vec<_>>());
    let ring = |r0: f64| {
        let g: Vec<f64> = mesh.nodes.iter().map(|&r| 2.0 * (-(r - r0).powi(2) / 0.02).exp() * (1.0 - r * r) + 1e-3 * (1.0 - r * r)).collect();
        (g.clone(), g)
    };
    // starts far from the bubble take 100–200 steps of the globalised iteration
    let opts = NewtonOptions { max_iterations: 400, ..NewtonOptions::default() };
    let guesses = [("0.5×", scaled(0.5)), ("1×", scaled(1.0)), ("4×", scaled(4.0)), ("ring 0.3", ring(0.3)), ("ring 0.5", ring(0.5))];
    let mut sols = Vec::new();
    for (name, (gu, gv)) in &guesses {
        match solve_radial(&ep, &mesh, RadialInit::Values(gu, gv), &opts) {
            Ok(s) => sols.push(s),
            Err(f) => c.fail(format!("{name}: {}", f.error)),
        }
    }
    let mut worst: f64 = 0.0;
    for a in &sols {
        for b in &sols {
            let d = a.u.iter().zip(&b.u).chain(a.v.iter().zip(&b.v)).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            worst = worst.max(d);
        }
    }
    c.check(sols.len() == 5 && worst <= 1e-6, format!("{} of 5 converged, pairwise max difference {worst:.1e}", sols.len()));
}

fn cross_validation(c: &mut Checks) {
    let rad = solve_radial_direct(10.0, 0.0, &MeshPolicy::default(), &NewtonOptions::default()).expect("radial");
    let grid = build_grid(&DomainSpec::unit_disk(), 1.0 / 128.0, &[RefineBox { lo: [-0.5, -0.5], hi: [0.5, 0.5] }]).expect("grid");
    let g = Arc::new(grid);
    let init = PairField::from_radial(g.clone(), &rad, ORIGIN);
    match solve_planar(&init, &PlanarOptions::default()) {
        Ok(sol) => {
            let worst = (0..g.len())
                .map(|k| {
                    let x = g.point(k);
                    let r = x[0].hypot(x[1]);
                    (sol.v[k] - rad.eval_v(r).0).abs().max((sol.u[k] - rad.eval_u(r).0).abs())
                })
                .fold(0.0, f64::max);
            c.check(worst <= 1e-3, format!("max nodal difference {worst:.2e} on {} nodes", g.len()));
        }
        Err(e) => c.fail(e.to_string()),
    }
}

fn kirchhoff_routh(c: &mut Checks) {
    let disk: GreenModelF64 = GreenModel::analytic(DomainSpec::unit_disk());
    let res = find_kr_critical(&disk, 1, &random_starts(&disk.domain, 1, 20, 1)).expect("disk k=1");
    match res.points.as_slice() {
        [p] => {
            let d = p.config[0][0].hypot(p.config[0][1]);
            c.check(d <= 1e-8 && p.eigenvalues.iter().all(|&e| e > 0.0), format!("disk k=1 at distance {d:.1e}, eigenvalues {:?}", p.eigenvalues));
        }
        pts => c.fail(format!("disk k=1: {} critical points", pts.len())),
    }
    let rect: GreenModelF64 = GreenModel::analytic(DomainSpec::rectangle(1.6, 1.0).unwrap());
    let res = find_kr_critical(&rect, 1, &random_starts(&rect.domain, 1, 12, 3)).expect("rectangle k=1");
    match res.points.as_slice() {
        [p] => {
            let d = (p.config[0][0] - 0.8).hypot(p.config[0][1] - 0.5);
            c.check(d <= 1e-8, format!("rectangle k=1 at distance {d:.1e} from the centre"));
        }
        pts => c.fail(format!("rectangle k=1: {} critical points", pts.len())),
    }
    let res = find_kr_critical(&disk, 2, &random_starts(&disk.domain, 2, 50, 4)).expect("disk k=2");
    let bad = res.points.iter().filter(|p| p.nondegenerate).count();
    c.check(bad == 0, format!("disk k=2: {bad} nondegenerate interior configurations from 50 starts"));
}

fn mu_at_40(c: &mut Checks) {
    let s = solve_radial_direct(40.0, 0.0, &MeshPolicy::default(), &NewtonOptions::default()).expect("p=40");
    let mu = diag(&s).mu;
    let pred = predict_rates(&s.ep, 0.0).mu;
    c.check(rel(mu, pred) <= 0.05, format!("μ {mu:.4e} vs predicted {pred:.4e} ({:+.1}%)", 100.0 * (mu / pred - 1.0)));
}

fn main() {
    let verdicts: Vec<Verdict> = vec![
        criterion(1, "special-function identities", Some(SECONDS(10)), special_identities),
        criterion(2, "φ₃ and ψ₀ profiles", Some(SECONDS(10)), profile_paths),
        criterion(3, "rate laws for v(0) and μ", Some(SECONDS(120)), rate_laws),
        criterion(4, "gap law", Some(SECONDS(120)), gap_law),
        criterion(5, "energy and outer coefficient", None, energy_and_outer),
        criterion(6, "Pohozaev identities", None, pohozaev),
        criterion(7, "limit kernel structure", Some(SECONDS(10)), kernel),
        criterion(8, "nondegeneracy probe", None, nondegeneracy),
        criterion(9, "uniqueness probe", None, uniqueness),
        criterion(10, "planar against radial", None, cross_validation),
        criterion(11, "Kirchhoff-Routh critical points", None, kirchhoff_routh),
    ];
    let examples = [
        example("μ at p=40 within 5%", mu_at_40),
        example("energy at p=80 within 5%", |c| {
            let s = solve_radial_direct(80.0, 0.0, &MeshPolicy::default(), &NewtonOptions::default()).expect("p=80");
            let e = diag(&s).energy[0];
            c.check(rel(e, 8.0 * PI * 1f64.exp()) <= 0.05, format!("p∫∇u·∇v {e:.3}"));
        }),
    ];
    // write past the test harness so the lines always show
    let mut out = std::io::stdout().lock();
    for v in &verdicts {
        let _ = writeln!(out, "{}", v.line());
    }
    for v in &examples {
        let _ = writeln!(out, "{}", v.line());
    }
    let failed: Vec<&str> = verdicts.iter().filter(|v| !v.passed).map(|v| v.label.trim_start_matches("criterion").trim()).collect();
    let _ = writeln!(out, "acceptance: {} of {} criteria pass", verdicts.len() - failed.len(), verdicts.len());
    if !failed.is_empty() {
        let _ = writeln!(out, "acceptance: failing criteria {}", failed.join(", "));
    }
    if !failed.is_empty() || examples.iter().any(|v| !v.passed) {
        std::process::exit(1);
    }
}
