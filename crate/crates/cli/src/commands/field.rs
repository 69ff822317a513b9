use std::path::Path;

use serde::{Deserialize, Serialize};

use lel_core::asymptotics::extract_bubble;
use lel_core::radial::{build_mesh, RadialPair};
use lel_core::special::ExponentPair;

use super::{planar_solution, radial_solution, require};
use crate::config::{PlanarConfig, RadialConfig};
use crate::failure::Failure;
use crate::output::{num, Run};

/// What `solve-radial` records next to its table; enough to rebuild the
/// mesh bit for bit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RadialSummary {
    pub table: String,
    pub p: f64,
    pub q: f64,
    pub theta: f64,
    pub intervals: usize,
    pub grading: f64,
    pub inner_scale: f64,
    pub u0: f64,
    pub v0: f64,
    pub mu: f64,
    pub energy: f64,
    pub iterations: usize,
    pub residual: f64,
}

impl RadialSummary {
    fn new(s: &RadialPair<f64>, table: String) -> Self {
        Self {
            table,
            p: s.ep.p,
            q: s.ep.q,
            theta: s.ep.theta,
            intervals: s.mesh.intervals(),
            grading: s.mesh.grading,
            inner_scale: s.mesh.inner_scale,
            u0: s.u0(),
            v0: s.v0(),
            mu: s.mu(),
            energy: s.ep.p * s.gradient_pairing(),
            iterations: s.iterations,
            residual: s.residual,
        }
    }
}

/// Reads a stored radial solution back: the summary at `path` and the table
/// it names, whose radii must equal the rebuilt mesh exactly.
pub fn load_radial(path: &Path) -> Result<RadialPair<f64>, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::io(path, e))?;
    let sum: RadialSummary = serde_json::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    let ep = ExponentPair::with_theta(sum.p, sum.theta)?;
    let mesh = build_mesh(sum.inner_scale, sum.intervals, sum.grading)?;
    let table = path.parent().unwrap_or(Path::new(".")).join(&sum.table);
    let mut reader = csv::Reader::from_path(&table).map_err(|e| Failure::Io(format!("{}: {e}", table.display())))?;
    let (mut u, mut v) = (Vec::new(), Vec::new());
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| Failure::Io(format!("{}: {e}", table.display())))?;
        let field = |k: usize| -> Result<f64, Failure> {
            rec.get(k).and_then(|s| s.parse().ok()).ok_or_else(|| Failure::Config(format!("{}: bad row {}", table.display(), i + 1)))
        };
        require(mesh.nodes.get(i) == Some(&field(0)?), || format!("{}: row {} does not match the rebuilt mesh", table.display(), i + 1))?;
        u.push(field(1)?);
        v.push(field(2)?);
    }
    require(u.len() == mesh.nodes.len(), || format!("{}: {} rows for {} nodes", table.display(), u.len(), mesh.nodes.len()))?;
    Ok(RadialPair { mesh, u, v, ep, residual: sum.residual, iterations: sum.iterations })
}

pub fn solve_radial(cfg: &RadialConfig, run: &mut Run) -> Result<(), Failure> {
    let s = run.step("radial Newton", || radial_solution(cfg.p, cfg.theta, &cfg.mesh, &cfg.newton))?;
    let table = cfg.output_file.to_string_lossy().into_owned();
    let rows = s.mesh.nodes.iter().zip(s.u.iter().zip(&s.v)).map(|(&r, (&u, &v))| vec![num(r), num(u), num(v)]);
    run.write_csv(&table, &["r", "u", "v"], rows)?;
    run.write_json(&cfg.summary_file.to_string_lossy(), &RadialSummary::new(&s, table))
}

#[derive(Debug, Serialize)]
struct PlanarSummary {
    p: f64,
    q: f64,
    theta: f64,
    h: f64,
    nodes: usize,
    iterations: usize,
    damped_steps: usize,
    linear_iterations: usize,
    residual: f64,
    energy: f64,
    guess_center: [f64; 2],
    kirchhoff_routh_value: f64,
    x_n: Option<[f64; 2]>,
    v_max: Option<f64>,
    u_at_max: Option<f64>,
    mu: Option<f64>,
}

pub fn solve_2d(cfg: &PlanarConfig, run: &mut Run) -> Result<(), Failure> {
    let ep = ExponentPair::with_theta(cfg.p, cfg.theta)?;
    let sol = run.step("planar Newton", || planar_solution(&cfg.domain, &ep, &cfg.grid, cfg.guess, &cfg.starts, &cfg.newton))?;
    let f = &sol.field;
    let g = &f.grid;
    let peak = g.point(f.argmax_v());
    let diag = extract_bubble(f, peak, 0.5 * g.domain.boundary_distance(peak));
    if let Err(e) = &diag {
        log::warn!("no bubble diagnostics: {e}");
    }
    let diag = diag.ok();
    let rows = (0..g.len()).map(|k| {
        let x = g.point(k);
        vec![num(x[0]), num(x[1]), num(f.u[k]), num(f.v[k])]
    });
    run.write_csv(&cfg.output_file.to_string_lossy(), &["x1", "x2", "u", "v"], rows)?;
    let summary = PlanarSummary {
        p: ep.p,
        q: ep.q,
        theta: ep.theta,
        h: g.h,
        nodes: g.len(),
        iterations: f.iterations,
        damped_steps: f.damped_steps,
        linear_iterations: f.linear_iterations,
        residual: f.residual,
        energy: f.energy(),
        guess_center: sol.center,
        kirchhoff_routh_value: sol.phi,
        x_n: diag.as_ref().map(|d| d.x_n),
        v_max: diag.as_ref().map(|d| d.v_max),
        u_at_max: diag.as_ref().map(|d| d.u_at_max),
        mu: diag.as_ref().map(|d| d.mu),
    };
    run.write_json(&cfg.summary_file.to_string_lossy(), &summary)
}
