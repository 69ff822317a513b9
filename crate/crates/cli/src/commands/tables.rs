use rayon::prelude::*;

use lel_core::greenrobin::{find_kr_critical, random_starts};
use lel_core::special::{correction_profiles, eval_phi, eval_phi3, eval_psi0, reference_integrals, CorrectionConstants, SpecialTables};

use super::require;
use crate::config::{GreenConfig, KrConfig, SpecialConfig};
use crate::failure::Failure;
use crate::output::{num, Run};

pub fn special(cfg: &SpecialConfig, run: &mut Run) -> Result<(), Failure> {
    require(cfg.samples >= 2, || "samples must be at least 2".into())?;
    require(cfg.r_max > 0.0 && cfg.r_max.is_finite(), || "r_max must be positive".into())?;
    let n = cfg.samples;
    let k = CorrectionConstants::new(cfg.theta, cfg.sigma);
    let rows = run.step("profiles", || {
        let tables = SpecialTables::<f64>::shared();
        (0..n)
            .into_par_iter()
            .map(|i| {
                let r = if i + 1 == n { cfg.r_max } else { cfg.r_max * i as f64 / (n - 1) as f64 };
                let x = [r, 0.0];
                let corr = correction_profiles(r, &k, tables);
                Ok(vec![
                    num(r),
                    num(eval_phi(0, x)?.0),
                    num(eval_phi(1, x)?.0),
                    num(eval_phi3(r)?.0),
                    num(eval_psi0(r)?.0),
                    num(corr.s_star),
                    num(corr.t_star),
                ])
            })
            .collect::<Result<Vec<_>, Failure>>()
    })?;
    run.write_csv(&cfg.profiles_file.to_string_lossy(), &["r", "phi0", "phi1_axis", "phi3", "psi0", "s_star", "t_star"], rows)?;

    let table = run.step("reference integrals", || Ok(reference_integrals(cfg.theta)?))?;
    let rows = table.iter().map(|e| vec![e.name.to_string(), num(e.value), num(e.error)]);
    run.write_csv(&cfg.integrals_file.to_string_lossy(), &["name", "value", "error"], rows)
}

pub fn green(cfg: &GreenConfig, run: &mut Run) -> Result<(), Failure> {
    require(cfg.samples >= 2, || "samples must be at least 2".into())?;
    let domain = cfg.domain.build()?;
    let model = cfg.backend.model(domain.clone())?;
    let pole = cfg.pole.unwrap_or_else(|| domain.center());
    domain.check_interior(pole)?;
    let (lo, hi) = domain.bounding_box();
    let n = cfg.samples;
    let at = |i: usize, a: f64, b: f64| if i + 1 == n { b } else { a + (b - a) * i as f64 / (n - 1) as f64 };
    let points: Vec<[f64; 2]> = (0..n)
        .flat_map(|j| (0..n).map(move |i| (i, j)))
        .map(|(i, j)| [at(i, lo[0], hi[0]), at(j, lo[1], hi[1])])
        .filter(|&x| domain.contains(x) && domain.boundary_distance(x) > 0.0 && x != pole)
        .collect();
    let rows = run.step("sample G, H, R", || {
        points
            .par_iter()
            .map(|&x| {
                let g = model.green_eval(x, pole)?.0;
                let h = model.regular_eval(x, pole)?.0;
                let r = model.robin_value(x)?;
                Ok(vec![num(x[0]), num(x[1]), num(g), num(h), num(r)])
            })
            .collect::<Result<Vec<_>, Failure>>()
    })?;
    run.note("pole", format!("({}, {})", pole[0], pole[1]));
    run.write_csv(&cfg.output_file.to_string_lossy(), &["x1", "x2", "G", "H", "R"], rows)
}

pub fn kr(cfg: &KrConfig, run: &mut Run) -> Result<(), Failure> {
    require(cfg.k >= 1, || "k must be at least 1".into())?;
    require(cfg.starts.count >= 1, || "need at least one start".into())?;
    let domain = cfg.domain.build()?;
    let model = cfg.backend.model(domain.clone())?;
    let starts = random_starts(&domain, cfg.k, cfg.starts.count, cfg.starts.seed);
    let search = run.step("multistart Newton", || Ok(find_kr_critical(&model, cfg.k, &starts)?))?;
    run.note("search", search.diagnostic());
    let mut header = vec!["index".to_string(), "value".into(), "gradient_norm".into(), "nondegenerate".into()];
    for i in 1..=cfg.k {
        header.extend([format!("x{i}_1"), format!("x{i}_2")]);
    }
    header.extend((1..=2 * cfg.k).map(|i| format!("lambda_{i}")));
    let rows = search.points.iter().enumerate().map(|(idx, p)| {
        let mut row = vec![idx.to_string(), num(p.value), num(p.gradient_norm()), p.nondegenerate.to_string()];
        row.extend(p.config.iter().flat_map(|x| [num(x[0]), num(x[1])]));
        row.extend(p.eigenvalues.iter().map(|&e| num(e)));
        row
    });
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    run.write_csv(&cfg.output_file.to_string_lossy(), &header, rows)
}
