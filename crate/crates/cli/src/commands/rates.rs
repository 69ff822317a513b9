use std::f64::consts::PI;

use serde::Serialize;

use lel_core::asymptotics::{extract_bubble, FittedOrders, RateReport, RateRow};
use lel_core::special::ExponentPair;

use super::{increasing, planar_solution, radial_sweep, require, ORIGIN};
use crate::config::{RatesConfig, PLANAR_P_MAX};
use crate::failure::Failure;
use crate::output::{num, Run};

/// Search radius around the origin for radial solutions.
const RADIAL_SEARCH: f64 = 0.5;

struct Measured {
    row: RateRow<f64>,
    energy: f64,
}

#[derive(Serialize)]
struct Summary {
    theta: f64,
    rows: usize,
    complete: bool,
    last_good_p: Option<f64>,
    orders: Option<Orders>,
    mu_defects: Vec<f64>,
    energy_limit: f64,
}

#[derive(Serialize)]
struct Orders {
    v_max: f64,
    u_max: f64,
    mu_log: f64,
}

impl From<FittedOrders<f64>> for Orders {
    fn from(o: FittedOrders<f64>) -> Self {
        Self { v_max: o.v_max, u_max: o.u_max, mu_log: o.mu_log }
    }
}

fn same_p(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * b.abs().max(1.0)
}

fn measure_radial(cfg: &RatesConfig) -> Result<(Vec<Measured>, Option<Failure>), Failure> {
    let (sols, failure) = radial_sweep(&cfg.p_grid, cfg.theta, &cfg.mesh, &cfg.newton);
    let mut out = Vec::with_capacity(sols.len());
    for s in &sols {
        let d = extract_bubble(s, ORIGIN, RADIAL_SEARCH)?;
        // R(0) = 0 on the unit disk
        out.push(Measured { row: RateRow::new(&s.ep, 0.0, &d), energy: d.energy[0] });
    }
    Ok((out, failure))
}

fn measure_planar(cfg: &RatesConfig) -> Result<(Vec<Measured>, Option<Failure>), Failure> {
    let mut out = Vec::with_capacity(cfg.p_grid.len());
    for &p in &cfg.p_grid {
        let ep = ExponentPair::with_theta(p, cfg.theta)?;
        let run = match planar_solution(&cfg.domain, &ep, &cfg.grid, Default::default(), &cfg.starts, &cfg.planar_newton) {
            Ok(r) => r,
            Err(Failure::Convergence(m)) => {
                let last = out.last().map_or("none".to_string(), |m: &Measured| m.row.p.to_string());
                return Ok((out, Some(Failure::Convergence(format!("planar solve failed at p={p}, last good p = {last}: {m}")))));
            }
            Err(e) => return Err(e),
        };
        let f = &run.field;
        let peak = f.grid.point(f.argmax_v());
        let d = extract_bubble(f, peak, 0.5 * f.grid.domain.boundary_distance(peak))?;
        out.push(Measured { row: RateRow::new(&ep, run.phi, &d), energy: d.energy[0] });
    }
    Ok((out, None))
}

pub fn rates(cfg: &RatesConfig, run: &mut Run) -> Result<(), Failure> {
    increasing(&cfg.p_grid)?;
    let radial = cfg.domain.is_unit_disk();
    if !radial {
        require(cfg.p_grid.iter().all(|&p| p <= PLANAR_P_MAX), || {
            format!("p > {PLANAR_P_MAX} needs the radial solver (unit disk); got {:?} on {:?}", cfg.p_grid, cfg.domain)
        })?;
    }
    let (measured, failure) = run.step("solve and extract", || if radial { measure_radial(cfg) } else { measure_planar(cfg) })?;
    let rows = measured.iter().map(|m| {
        let r = &m.row;
        vec![
            num(r.p),
            num(r.theta),
            num(r.v_comp),
            num(r.v_pred),
            num(r.u_comp),
            num(r.u_pred),
            num(r.mu_comp),
            num(r.mu_pred),
            r.gap_ratio.map_or(String::new(), num),
            num(m.energy),
        ]
    });
    let header = ["p", "theta", "v_max", "v_pred", "u_max", "u_pred", "mu", "mu_pred", "gap_ratio", "energy"];
    run.write_csv(&cfg.output_file.to_string_lossy(), &header, rows)?;

    let report = RateReport::new(measured.iter().map(|m| m.row.clone()).collect());
    let energy_limit = 8.0 * PI * 1f64.exp();
    let summary = Summary {
        theta: cfg.theta,
        rows: measured.len(),
        complete: failure.is_none(),
        last_good_p: measured.last().map(|m| m.row.p),
        orders: report.orders.map(Orders::from),
        mu_defects: report.rows.iter().map(RateRow::mu_log_error).collect(),
        energy_limit,
    };
    run.write_json(&cfg.summary_file.to_string_lossy(), &summary)?;
    if let Some(f) = failure {
        return Err(f);
    }

    let t = &cfg.thresholds;
    let at = |p: f64| measured.iter().find(|m| same_p(m.row.p, p));
    if let Some(max) = t.v_order_max {
        match &report.orders {
            Some(o) => run.check("v_max order", o.v_max, format!("<= {max}"), o.v_max <= max),
            None => run.note("v_max order", "skipped: fewer than four rows".into()),
        }
    }
    if t.mu_defect_decreasing && summary.mu_defects.len() >= 2 {
        let ok = summary.mu_defects.windows(2).all(|w| w[1] < w[0]);
        let last = *summary.mu_defects.last().unwrap();
        run.check("mu defect decreasing", last, "strictly decreasing in p".into(), ok);
    }
    if let Some(b) = t.mu_defect {
        if let Some(m) = at(b.p) {
            let e = m.row.mu_log_error();
            run.check(&format!("mu defect at p={}", b.p), e, format!("<= {}", b.max), e <= b.max);
        }
    }
    if let Some(b) = t.gap_ratio.filter(|_| cfg.theta != 0.0) {
        if let Some(m) = at(b.p) {
            let g = m.row.gap_ratio.unwrap_or(f64::NAN);
            run.check(&format!("gap ratio at p={}", b.p), g, format!("in [{}, {}]", b.lo, b.hi), (b.lo..=b.hi).contains(&g));
        }
    }
    if let Some(b) = t.energy {
        if let Some(m) = at(b.p) {
            let e = (m.energy / energy_limit - 1.0).abs();
            run.check(&format!("energy at p={}", b.p), m.energy, format!("within {} of 8πe", b.max), e <= b.max);
        }
    }
    Ok(())
}
