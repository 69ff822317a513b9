//! JSON run configurations. Every field has a default, unknown keys are
//! rejected, and `schema_version` must be [`SCHEMA_VERSION`].

use std::path::{Path, PathBuf};
use std::str::FromStr;

use lel_core::greenrobin::{DomainSpec, GreenModel};
use lel_core::planar::{PlanarOptions, RefineBox};
use lel_core::radial::{MeshPolicy, NewtonOptions};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::failure::Failure;

pub const SCHEMA_VERSION: &str = "1";

fn schema() -> String {
    SCHEMA_VERSION.into()
}

/// Loads `path`, or the defaults when no file is given.
pub fn load<C: DeserializeOwned + Default + Versioned>(path: Option<&Path>) -> Result<C, Failure> {
    let Some(path) = path else {
        return Ok(C::default());
    };
    let text = std::fs::read_to_string(path).map_err(|e| Failure::io(path, e))?;
    let cfg: C = serde_json::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    if cfg.schema_version() != SCHEMA_VERSION {
        return Err(Failure::Config(format!("schema_version {:?} is not supported (expected {SCHEMA_VERSION:?})", cfg.schema_version())));
    }
    Ok(cfg)
}

pub trait Versioned {
    fn schema_version(&self) -> &str;
}

macro_rules! versioned {
    ($($t:ty),*) => {$(
        impl Versioned for $t {
            fn schema_version(&self) -> &str {
                &self.schema_version
            }
        }
    )*};
}

versioned!(SpecialConfig, GreenConfig, KrConfig, RadialConfig, PlanarConfig, RatesConfig, SpectrumConfig, PohozaevConfig);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DomainConfig {
    #[default]
    UnitDisk,
    Rectangle { width: f64, height: f64 },
    Disk { center: [f64; 2], radius: f64 },
}

impl DomainConfig {
    pub fn build(&self) -> Result<DomainSpec<f64>, Failure> {
        Ok(match *self {
            DomainConfig::UnitDisk => DomainSpec::unit_disk(),
            DomainConfig::Rectangle { width, height } => DomainSpec::rectangle(width, height)?,
            DomainConfig::Disk { center, radius } => DomainSpec::scaled_disk(center, radius)?,
        })
    }

    pub fn is_unit_disk(&self) -> bool {
        matches!(self, DomainConfig::UnitDisk)
    }
}

/// `unit-disk`, `rectangle:WxH` or `disk:CX,CY,R`.
impl FromStr for DomainConfig {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let floats = |t: &str, sep: char| -> Result<Vec<f64>, String> {
            t.split(sep).map(|x| x.trim().parse::<f64>().map_err(|e| format!("{x:?}: {e}"))).collect()
        };
        match s.split_once(':') {
            None if s == "unit-disk" => Ok(DomainConfig::UnitDisk),
            Some(("rectangle", dims)) => match floats(dims, 'x')?.as_slice() {
                &[width, height] => Ok(DomainConfig::Rectangle { width, height }),
                _ => Err("expected rectangle:WIDTHxHEIGHT".into()),
            },
            Some(("disk", args)) => match floats(args, ',')?.as_slice() {
                &[cx, cy, radius] => Ok(DomainConfig::Disk { center: [cx, cy], radius }),
                _ => Err("expected disk:CX,CY,R".into()),
            },
            _ => Err(format!("unknown domain {s:?}; use unit-disk, rectangle:WxH or disk:CX,CY,R")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum BackendConfig {
    #[default]
    Analytic,
    /// Harmonic solves on a grid of spacing `h`.
    Numeric { h: f64 },
}

impl BackendConfig {
    pub fn model(&self, domain: DomainSpec<f64>) -> Result<GreenModel<f64>, Failure> {
        Ok(match *self {
            BackendConfig::Analytic => GreenModel::analytic(domain),
            BackendConfig::Numeric { h } => GreenModel::numeric(domain, h)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeshConfig {
    pub intervals: usize,
    pub grading: f64,
    pub mu_factor: f64,
}

impl Default for MeshConfig {
    fn default() -> Self {
        let p = MeshPolicy::<f64>::default();
        Self { intervals: p.intervals, grading: p.grading, mu_factor: p.mu_factor }
    }
}

impl MeshConfig {
    pub fn policy(&self) -> MeshPolicy<f64> {
        MeshPolicy { intervals: self.intervals, grading: self.grading, mu_factor: self.mu_factor }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NewtonConfig {
    pub tol: f64,
    pub max_iterations: usize,
    pub damping_floor: f64,
    pub rescale: bool,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        let o = NewtonOptions::<f64>::default();
        Self { tol: o.tol, max_iterations: o.max_iterations, damping_floor: o.damping_floor, rescale: o.rescale }
    }
}

impl NewtonConfig {
    pub fn options(&self) -> NewtonOptions<f64> {
        NewtonOptions { tol: self.tol, max_iterations: self.max_iterations, damping_floor: self.damping_floor, rescale: self.rescale }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlanarNewtonConfig {
    pub tol: f64,
    pub max_iterations: usize,
    pub damping_floor: f64,
    pub linear_tol: f64,
    pub rescale: bool,
}

impl Default for PlanarNewtonConfig {
    fn default() -> Self {
        let o = PlanarOptions::<f64>::default();
        Self { tol: o.tol, max_iterations: o.max_iterations, damping_floor: o.damping_floor, linear_tol: o.linear_tol, rescale: o.rescale }
    }
}

impl PlanarNewtonConfig {
    pub fn options(&self) -> PlanarOptions<f64> {
        PlanarOptions {
            tol: self.tol,
            max_iterations: self.max_iterations,
            damping_floor: self.damping_floor,
            linear_tol: self.linear_tol,
            rescale: self.rescale,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxConfig {
    pub lo: [f64; 2],
    pub hi: [f64; 2],
}

impl From<BoxConfig> for RefineBox<f64> {
    fn from(b: BoxConfig) -> Self {
        RefineBox { lo: b.lo, hi: b.hi }
    }
}

/// Composite grid for planar solves. Without explicit `refine` boxes, one
/// box of half-width `auto_refine` is placed around the initial bubble
/// (`null` turns that off).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub h: f64,
    pub refine: Option<Vec<BoxConfig>>,
    pub auto_refine: Option<f64>,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { h: 1.0 / 64.0, refine: None, auto_refine: Some(0.25) }
    }
}

/// Multistart settings for Kirchhoff-Routh searches.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StartsConfig {
    pub count: usize,
    pub seed: u64,
}

impl Default for StartsConfig {
    fn default() -> Self {
        Self { count: 20, seed: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpecialConfig {
    pub schema_version: String,
    pub r_max: f64,
    pub samples: usize,
    /// `θ` for `s*`, `t*` and the integral table.
    pub theta: f64,
    /// `σ` in the correction constants.
    pub sigma: f64,
    pub profiles_file: PathBuf,
    pub integrals_file: PathBuf,
}

impl Default for SpecialConfig {
    fn default() -> Self {
        Self {
            schema_version: schema(),
            r_max: 10.0,
            samples: 1001,
            theta: 0.0,
            sigma: 0.0,
            profiles_file: "profiles.csv".into(),
            integrals_file: "integrals.csv".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GreenConfig {
    pub schema_version: String,
    pub domain: DomainConfig,
    pub backend: BackendConfig,
    /// Source point of `G(·, y)` and `H(·, y)`; the domain centre if `null`.
    pub pole: Option<[f64; 2]>,
    /// Lattice points per axis over the bounding box.
    pub samples: usize,
    pub output_file: PathBuf,
}

impl Default for GreenConfig {
    fn default() -> Self {
        Self {
            schema_version: schema(),
            domain: DomainConfig::default(),
            backend: BackendConfig::default(),
            pole: None,
            samples: 41,
            output_file: "green.csv".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KrConfig {
    pub schema_version: String,
    pub domain: DomainConfig,
    pub backend: BackendConfig,
    pub k: usize,
    pub starts: StartsConfig,
    pub output_file: PathBuf,
}

impl Default for KrConfig {
    fn default() -> Self {
        Self {
            schema_version: schema(),
            domain: DomainConfig::default(),
            backend: BackendConfig::default(),
            k: 1,
            starts: StartsConfig::default(),
            output_file: "kr.csv".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadialConfig {
    pub schema_version: String,
    pub p: f64,
    pub theta: f64,
    pub mesh: MeshConfig,
    pub newton: NewtonConfig,
    pub output_file: PathBuf,
    pub summary_file: PathBuf,
}

impl Default for RadialConfig {
    fn default() -> Self {
        Self {
            schema_version: schema(),
            p: 10.0,
            theta: 0.0,
            mesh: MeshConfig::default(),
            newton: NewtonConfig::default(),
            output_file: "radial.csv".into(),
            summary_file: "solution.json".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum GuessKind {
    /// Radial solution on the unit disk, Kirchhoff-Routh bubble elsewhere.
    #[default]
    Auto,
    Radial,
    Kr,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlanarConfig {
    pub schema_version: String,
    pub domain: DomainConfig,
    pub p: f64,
    pub theta: f64,
    pub grid: GridConfig,
    pub guess: GuessKind,
    pub starts: StartsConfig,
    pub newton: PlanarNewtonConfig,
    pub output_file: PathBuf,
    pub summary_file: PathBuf,
}

impl Default for PlanarConfig {
    fn default() -> Self {
        Self {
            schema_version: schema(),
            domain: DomainConfig::default(),
            p: 10.0,
            theta: 0.0,
            grid: GridConfig::default(),
            guess: GuessKind::default(),
            starts: StartsConfig::default(),
            newton: PlanarNewtonConfig::default(),
            output_file: "field.csv".into(),
            summary_file: "summary.json".into(),
        }
    }
}

/// A bound checked at one exponent of the grid; skipped when that `p` is
/// not part of the run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtP {
    pub p: f64,
    pub max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandAtP {
    pub p: f64,
    pub lo: f64,
    pub hi: f64,
}

/// Pass/fail thresholds of `rates`; `null` disables a check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RateThresholds {
    /// Upper bound on the fitted order of `|v_max − v_pred|` (needs four rows).
    pub v_order_max: Option<f64>,
    /// `|log μ − log μ_pred|` strictly decreasing in `p`.
    pub mu_defect_decreasing: bool,
    pub mu_defect: Option<AtP>,
    /// Gap ratio band; only checked when `θ ≠ 0`.
    pub gap_ratio: Option<BandAtP>,
    /// Relative distance of `p∫∇u·∇v` from `8πe`.
    pub energy: Option<AtP>,
}

impl Default for RateThresholds {
    fn default() -> Self {
        Self {
            v_order_max: Some(-1.5),
            mu_defect_decreasing: true,
            mu_defect: Some(AtP { p: 160.0, max: 0.02 }),
            gap_ratio: Some(BandAtP { p: 80.0, lo: 0.9, hi: 1.1 }),
            energy: Some(AtP { p: 80.0, max: 0.05 }),
        }
    }
}

/// Largest `p` solved on the planar grid, where no continuation is done.
pub const PLANAR_P_MAX: f64 = 30.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RatesConfig {
    pub schema_version: String,
    pub domain: DomainConfig,
    pub theta: f64,
    pub p_grid: Vec<f64>,
    pub mesh: MeshConfig,
    pub newton: NewtonConfig,
    /// Planar settings, used off the unit disk.
    pub grid: GridConfig,
    pub starts: StartsConfig,
    pub planar_newton: PlanarNewtonConfig,
    pub thresholds: RateThresholds,
    pub output_file: PathBuf,
    pub summary_file: PathBuf,
}

impl Default for RatesConfig {
    fn default() -> Self {
        Self {
            schema_version: schema(),
            domain: DomainConfig::default(),
            theta: 0.0,
            p_grid: vec![20.0, 40.0, 80.0, 160.0],
            mesh: MeshConfig::default(),
            newton: NewtonConfig::default(),
            grid: GridConfig::default(),
            starts: StartsConfig::default(),
            planar_newton: PlanarNewtonConfig::default(),
            thresholds: RateThresholds::default(),
            output_file: "rates.csv".into(),
            summary_file: "rates.json".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumConfig {
    pub schema_version: String,
    pub theta: f64,
    pub p_grid: Vec<f64>,
    /// Singular values reported per `p`.
    pub count: usize,
    /// Lower bound on the smallest singular value; `null` disables the check.
    pub floor: Option<f64>,
    pub mesh: MeshConfig,
    pub newton: NewtonConfig,
    pub output_file: PathBuf,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        Self {
            schema_version: schema(),
            theta: 0.0,
            p_grid: parse_p_range("20:80").unwrap(),
            count: 4,
            floor: Some(0.1),
            mesh: MeshConfig::default(),
            newton: NewtonConfig::default(),
            output_file: "spectrum.csv".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PohozaevConfig {
    pub schema_version: String,
    /// A `solve-radial` summary; its table is read from the same directory.
    /// When `null` the solution is computed from `p`, `theta`, `mesh`.
    pub solution: Option<PathBuf>,
    pub p: f64,
    pub theta: f64,
    pub mesh: MeshConfig,
    pub newton: NewtonConfig,
    pub center: [f64; 2],
    pub radii: Vec<f64>,
    /// Bound on every relative residual; `null` disables the check.
    pub tolerance: Option<f64>,
    pub output_file: PathBuf,
}

impl Default for PohozaevConfig {
    fn default() -> Self {
        Self {
            schema_version: schema(),
            solution: None,
            p: 10.0,
            theta: 0.0,
            mesh: MeshConfig::default(),
            newton: NewtonConfig::default(),
            center: [0.0, 0.0],
            radii: vec![0.25, 0.5, 0.75],
            tolerance: Some(1e-3),
            output_file: "pohozaev.csv".into(),
        }
    }
}

/// `START:END[:STEP]`, both ends included, step 10 by default.
pub fn parse_p_range(s: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<f64> = s.split(':').map(|x| x.trim().parse::<f64>().map_err(|e| format!("{x:?}: {e}"))).collect::<Result<_, _>>()?;
    let (a, b, step) = match *parts.as_slice() {
        [a] => (a, a, 1.0),
        [a, b] => (a, b, 10.0),
        [a, b, s] => (a, b, s),
        _ => return Err("expected START:END[:STEP]".into()),
    };
    if step <= 0.0 || step.is_nan() || b < a || !a.is_finite() || !b.is_finite() {
        return Err(format!("bad range {s:?}"));
    }
    let n = ((b - a) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| a + step * i as f64).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn domains_parse() {
        assert_eq!("unit-disk".parse::<DomainConfig>().unwrap(), DomainConfig::UnitDisk);
        assert_eq!("rectangle:1.6x1".parse::<DomainConfig>().unwrap(), DomainConfig::Rectangle { width: 1.6, height: 1.0 });
        assert_eq!("disk:0,1,2".parse::<DomainConfig>().unwrap(), DomainConfig::Disk { center: [0.0, 1.0], radius: 2.0 });
        assert!("square".parse::<DomainConfig>().is_err());
        assert!("rectangle:1".parse::<DomainConfig>().is_err());
    }

    #[test]
    fn ranges_parse() {
        assert_eq!(parse_p_range("20:80").unwrap(), vec![20.0, 30.0, 40.0, 50.0, 60.0, 70.0, 80.0]);
        assert_eq!(parse_p_range("20:30:5").unwrap(), vec![20.0, 25.0, 30.0]);
        assert_eq!(parse_p_range("40").unwrap(), vec![40.0]);
        assert!(parse_p_range("80:20").is_err());
        assert!(parse_p_range("20:80:0").is_err());
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(serde_json::from_str::<RatesConfig>(r#"{"theta": 1, "p_gird": [20]}"#).is_err());
        assert!(serde_json::from_str::<KrConfig>(r#"{"domain": {"kind": "rectangle", "width": 1, "height": 1, "depth": 1}}"#).is_err());
        let c: RatesConfig = serde_json::from_str(r#"{"theta": 1, "thresholds": {"energy": null}}"#).unwrap();
        assert_eq!(c.theta, 1.0);
        assert_eq!(c.thresholds.energy, None);
        assert_eq!(c.p_grid, RatesConfig::default().p_grid);
    }

    #[test]
    fn configs_round_trip() {
        let c = PlanarConfig { domain: DomainConfig::Rectangle { width: 1.6, height: 1.0 }, ..Default::default() };
        let text = serde_json::to_string(&c).unwrap();
        assert_eq!(serde_json::from_str::<PlanarConfig>(&text).unwrap(), c);
    }

    #[test]
    fn schema_version_checked() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"schema_version": "0"}"#).unwrap();
        assert!(matches!(load::<SpecialConfig>(Some(&path)), Err(Failure::Config(_))));
        std::fs::write(&path, r#"{"schema_version": "1", "samples": 11}"#).unwrap();
        assert_eq!(load::<SpecialConfig>(Some(&path)).unwrap().samples, 11);
    }
}
