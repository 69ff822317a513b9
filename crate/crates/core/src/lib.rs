//! Numerical laboratory for the planar Lane-Emden system
//! `-Δu = v^p`, `-Δv = u^q` in bounded planar domains with zero Dirichlet data.
//!
//! All numerical code is generic over [`Real`] (`f32` or `f64`). The type
//! aliases at the crate root fix the scalar to `f64`.

pub mod asymptotics;
pub mod error;
pub mod greenrobin;
pub mod linalg;
pub mod ode;
pub mod planar;
pub mod quadrature;
pub mod radial;
pub mod scalar;
pub mod special;

pub use error::{Error, Result};
pub use scalar::Real;

pub type PointF64 = scalar::Point<f64>;
pub type ExponentPairF64 = special::ExponentPair<f64>;
pub type SpecialTablesF64 = special::SpecialTables<f64>;
pub type DomainSpecF64 = greenrobin::DomainSpec<f64>;
pub type GreenModelF64 = greenrobin::GreenModel<f64>;
pub type RobinValueF64 = greenrobin::RobinValue<f64>;
pub type KrPointF64 = greenrobin::KRPoint<f64>;
pub type KrSearchF64 = greenrobin::KrSearch<f64>;
pub type RadialMeshF64 = radial::RadialMesh<f64>;
pub type RadialPairF64 = radial::RadialPair<f64>;
pub type MeshPolicyF64 = radial::MeshPolicy<f64>;
pub type NewtonOptionsF64 = radial::NewtonOptions<f64>;
pub type Grid2DF64 = planar::Grid2D<f64>;
pub type RefineBoxF64 = planar::RefineBox<f64>;
pub type PairFieldF64 = planar::PairField<f64>;
pub type PlanarOptionsF64 = planar::PlanarOptions<f64>;
pub type BubbleDiagnosticsF64 = asymptotics::BubbleDiagnostics<f64>;
pub type RatePredictionF64 = asymptotics::RatePrediction<f64>;
pub type RateRowF64 = asymptotics::RateRow<f64>;
pub type RateReportF64 = asymptotics::RateReport<f64>;
pub type ProfileErrorF64 = asymptotics::ProfileError<f64>;
pub type PohozaevReportF64 = asymptotics::PohozaevReport<f64>;
pub type OuterCheckF64 = asymptotics::OuterCheck<f64>;
pub type SpectralProbeF64 = asymptotics::SpectralProbe<f64>;
pub type ModeReportF64 = asymptotics::ModeReport<f64>;
