//! Numerical laboratory for cone-type Fourier multipliers
//! `(1 - ρ(ξ)/|τ|)_+^δ` built on non-radial homogeneous distance functions.

pub mod caps;
pub mod error;
pub mod geometry;
pub mod kernel;
pub mod linalg;
pub mod operator;
pub mod quadrature;
pub mod regression;
pub mod report;
pub mod special;
pub mod weak;

pub use error::{LabError, Result};
pub use geometry::{DistanceFunction, GaugeKind, SpherePoint, UnitBallData};
pub use operator::{ConeSymbol, SampledField};
