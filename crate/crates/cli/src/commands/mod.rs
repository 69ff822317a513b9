//! One function per subcommand; each writes its tables through a [`Run`]
//! and records checks there.

mod field;
mod probes;
mod rates;
mod tables;

pub use field::{solve_2d, solve_radial};
pub use probes::{pohozaev, spectrum};
pub use rates::rates;
pub use tables::{green, kr, special};

use std::sync::Arc;

use lel_core::greenrobin::{find_kr_critical, random_starts, GreenModel, KRPoint};
use lel_core::planar::{build_grid, initial_guess_from_kr, solve_planar, PairField, RefineBox};
use lel_core::radial::{continue_to, solve_radial_direct, RadialPair};
use lel_core::special::ExponentPair;

use crate::config::{DomainConfig, GridConfig, GuessKind, MeshConfig, NewtonConfig, PlanarNewtonConfig, StartsConfig};
use crate::failure::Failure;

pub const ORIGIN: [f64; 2] = [0.0, 0.0];

/// Exponent of the fallback start when a direct radial solve fails.
const FALLBACK_P: f64 = 10.0;

fn require(ok: bool, msg: impl FnOnce() -> String) -> Result<(), Failure> {
    if ok {
        Ok(())
    } else {
        Err(Failure::Config(msg()))
    }
}

fn increasing(grid: &[f64]) -> Result<(), Failure> {
    require(!grid.is_empty(), || "p grid is empty".into())?;
    require(grid.windows(2).all(|w| w[1] > w[0]), || format!("p grid {grid:?} is not strictly increasing"))
}

/// Radial solution at one exponent; when the direct solve from the bubble
/// guess fails, continues from `p = 10` instead.
pub fn radial_solution(p: f64, theta: f64, mesh: &MeshConfig, newton: &NewtonConfig) -> Result<RadialPair<f64>, Failure> {
    let (policy, opts) = (mesh.policy(), newton.options());
    match solve_radial_direct(p, theta, &policy, &opts) {
        Ok(s) => Ok(s),
        Err(f) if p > FALLBACK_P && !matches!(Failure::from(f.error.clone()), Failure::Config(_)) => {
            log::warn!("direct solve at p={p} failed ({}); continuing from p={FALLBACK_P}", f.error);
            let base = solve_radial_direct(FALLBACK_P, theta, &policy, &opts)?;
            Ok(continue_to(&base, p, &policy, &opts)?)
        }
        Err(f) => Err(f.into()),
    }
}

/// Radial solutions along `grid` by continuation; on failure, the solutions
/// reached so far and the error naming the last good `p`.
pub fn radial_sweep(
    grid: &[f64],
    theta: f64,
    mesh: &MeshConfig,
    newton: &NewtonConfig,
) -> (Vec<RadialPair<f64>>, Option<Failure>) {
    let (policy, opts) = (mesh.policy(), newton.options());
    let mut out: Vec<RadialPair<f64>> = Vec::with_capacity(grid.len());
    for &p in grid {
        let next = match out.last() {
            None => solve_radial_direct(p, theta, &policy, &opts).map_err(|f| f.error),
            Some(prev) => continue_to(prev, p, &policy, &opts),
        };
        match next {
            Ok(s) => {
                log::info!("p={p}: v(0)={} in {} Newton steps", s.v0(), s.iterations);
                out.push(s);
            }
            Err(e) => {
                let failure = match Failure::from(e) {
                    Failure::Config(m) => Failure::Config(m),
                    other => {
                        let last = out.last().map_or("none".to_string(), |s| s.ep.p.to_string());
                        Failure::Convergence(format!("continuation stopped before p={p}, last good p = {last}: {other}"))
                    }
                };
                return (out, Some(failure));
            }
        }
    }
    (out, None)
}

/// Nondegenerate Kirchhoff-Routh critical point of one bubble with the
/// smallest gradient.
pub fn single_bubble_point(model: &GreenModel<f64>, starts: &StartsConfig) -> Result<KRPoint<f64>, Failure> {
    let search = find_kr_critical(model, 1, &random_starts(&model.domain, 1, starts.count, starts.seed))?;
    log::info!("{}", search.diagnostic());
    search
        .points
        .into_iter()
        .filter(|p| p.nondegenerate)
        .min_by(|a, b| a.gradient_norm().total_cmp(&b.gradient_norm()))
        .ok_or_else(|| Failure::Convergence(format!("no nondegenerate critical point of the Robin function on the {}", model.domain.description)))
}

/// A solved planar field with the bubble centre it was started from and
/// the Kirchhoff-Routh value there.
pub struct PlanarRun {
    pub field: PairField<f64>,
    pub center: [f64; 2],
    pub phi: f64,
}

pub fn planar_solution(
    domain_cfg: &DomainConfig,
    ep: &ExponentPair<f64>,
    grid_cfg: &GridConfig,
    guess: GuessKind,
    starts: &StartsConfig,
    newton: &PlanarNewtonConfig,
) -> Result<PlanarRun, Failure> {
    let domain = domain_cfg.build()?;
    let radial = match guess {
        GuessKind::Auto => domain_cfg.is_unit_disk(),
        GuessKind::Radial => {
            require(domain_cfg.is_unit_disk(), || "the radial guess needs the unit disk".into())?;
            true
        }
        GuessKind::Kr => false,
    };
    let model = GreenModel::analytic(domain.clone());
    let kr = if radial { None } else { Some(single_bubble_point(&model, starts)?) };
    let (center, phi) = match &kr {
        Some(k) => (k.config[0], k.value),
        None => (ORIGIN, model.robin_value(ORIGIN)?),
    };
    let boxes: Vec<RefineBox<f64>> = match (&grid_cfg.refine, grid_cfg.auto_refine) {
        (Some(b), _) => b.iter().map(|&b| b.into()).collect(),
        (None, Some(a)) => vec![RefineBox { lo: [center[0] - a, center[1] - a], hi: [center[0] + a, center[1] + a] }],
        (None, None) => Vec::new(),
    };
    let grid = Arc::new(build_grid(&domain, grid_cfg.h, &boxes)?);
    log::info!("grid: {} nodes, h={}", grid.len(), grid.h);
    let init = match &kr {
        None => {
            let rad = solve_radial_direct(ep.p, ep.theta, &Default::default(), &Default::default())?;
            PairField::from_radial(grid, &rad, ORIGIN)
        }
        Some(k) => initial_guess_from_kr(&model, ep, k, grid)?,
    };
    let field = solve_planar(&init, &newton.options())?;
    Ok(PlanarRun { field, center, phi })
}
