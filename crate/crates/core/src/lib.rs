//! Toric and toroidal degenerations: exact fan and weight combinatorics,
//! model metrics in logarithmic coordinates, and the asymptotics of the
//! Weil–Petersson integrand near the central fibre.
//!
//! The combinatorial layer is exact (`BigInt`/`BigRational`); the numerical
//! layer is generic over [`Real`] (`f32` or `f64`), with `f64` aliases below.

pub mod cli;
pub mod degeneration;
pub mod error;
pub mod fan_pl;
pub mod lattice;
pub mod linalg;
pub mod model_metrics;
pub mod qmat;
pub mod region;
pub mod scalar;
pub mod wp_asymptotics;

pub use degeneration::DegenerationSpec;
pub use error::{Error, Result};
pub use fan_pl::{build_fan, convexify, faces, locate, Cone, Fan, PLWeight};
pub use lattice::{primitivize, smith_normal_form, sublattice_index, IntegerMatrix, LatticeVector};
pub use scalar::Real;

pub type Chart64 = model_metrics::Chart<f64>;
pub type ChartPoint64 = model_metrics::ChartPoint<f64>;
pub type MetricSample64 = model_metrics::MetricSample<f64>;
pub type HorizontalField64 = wp_asymptotics::HorizontalField<f64>;
pub type QuadResult64 = wp_asymptotics::QuadResult<f64>;
pub type WpRatio64 = wp_asymptotics::WpRatio<f64>;
pub type BConstants64 = wp_asymptotics::BConstants<f64>;
