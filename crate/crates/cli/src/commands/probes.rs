use rayon::prelude::*;

use lel_core::asymptotics::{linearized_probe, pohozaev_check};

use super::field::load_radial;
use super::{increasing, radial_solution, radial_sweep, require};
use crate::config::{PohozaevConfig, SpectrumConfig};
use crate::failure::Failure;
use crate::output::{num, Run};

pub fn spectrum(cfg: &SpectrumConfig, run: &mut Run) -> Result<(), Failure> {
    increasing(&cfg.p_grid)?;
    require(cfg.count >= 1, || "count must be at least 1".into())?;
    let (sols, failure) = run.step("continuation", || Ok(radial_sweep(&cfg.p_grid, cfg.theta, &cfg.mesh, &cfg.newton)))?;
    let probes = run.step("singular values", || {
        Ok(sols.par_iter().map(|s| linearized_probe(s, cfg.count)).collect::<Vec<_>>())
    })?;
    let k = cfg.count;
    let mut header = vec!["p".to_string(), "theta".into()];
    header.extend((1..=k).map(|i| format!("sigma_{i}")));
    header.extend((1..=k).map(|i| format!("mode_{i}")));
    header.extend(["laplacian_scale".into(), "nondegenerate".into()]);
    let mut rows = Vec::new();
    let mut error = failure;
    for (s, pr) in sols.iter().zip(&probes) {
        let pr = match pr {
            Ok(pr) => pr,
            Err(e) => {
                error.get_or_insert_with(|| Failure::Convergence(format!("probe at p={}: {e}", s.ep.p)));
                break;
            }
        };
        let mut row = vec![num(s.ep.p), num(s.ep.theta)];
        let pad = |v: Vec<String>| v.into_iter().chain(std::iter::repeat(String::new())).take(k);
        row.extend(pad(pr.singular_values.iter().map(|&x| num(x)).collect()));
        row.extend(pad(pr.modes.iter().map(usize::to_string).collect()));
        row.extend([num(pr.laplacian_scale), pr.nondegenerate.to_string()]);
        rows.push(row);
        if let Some(floor) = cfg.floor {
            let smallest = pr.singular_values[0];
            run.check(&format!("smallest singular value at p={}", s.ep.p), smallest, format!(">= {floor}, nondegenerate"), smallest >= floor && pr.nondegenerate);
        }
    }
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    run.write_csv(&cfg.output_file.to_string_lossy(), &header, rows)?;
    error.map_or(Ok(()), Err)
}

pub fn pohozaev(cfg: &PohozaevConfig, run: &mut Run) -> Result<(), Failure> {
    require(!cfg.radii.is_empty(), || "no radii given".into())?;
    let s = match &cfg.solution {
        Some(path) => run.step("load radial solution", || load_radial(path))?,
        None => run.step("radial Newton", || radial_solution(cfg.p, cfg.theta, &cfg.mesh, &cfg.newton))?,
    };
    let reports = run.step("identities", || {
        cfg.radii.par_iter().map(|&r| Ok(pohozaev_check(&s, cfg.center, r)?)).collect::<Result<Vec<_>, Failure>>()
    })?;
    let header = [
        "radius", "p_lhs", "p_rhs", "p_residual", "p_relative", "q1_lhs", "q1_rhs", "q1_residual", "q1_relative", "q2_lhs", "q2_rhs",
        "q2_residual", "q2_relative",
    ];
    let rows: Vec<Vec<String>> = reports
        .iter()
        .map(|r| {
            let q = r.q_relative();
            let mut row = vec![num(r.radius), num(r.p_lhs), num(r.p_rhs), num(r.p_residual), num(r.p_relative())];
            for (i, rel) in q.into_iter().enumerate() {
                row.extend([num(r.q_lhs[i]), num(r.q_rhs[i]), num(r.q_residual[i]), num(rel)]);
            }
            row
        })
        .collect();
    run.write_csv(&cfg.output_file.to_string_lossy(), &header, rows)?;
    if let Some(tol) = cfg.tolerance {
        for r in &reports {
            let q = r.q_relative();
            let worst = r.p_relative().max(q[0]).max(q[1]);
            run.check(&format!("relative residual at r={}", r.radius), worst, format!("<= {tol}"), worst <= tol);
        }
    }
    Ok(())
}
