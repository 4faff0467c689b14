//! Chart-level model geometry: log coordinates, potential weights,
//! partition functions, the model metric and the Monge–Ampère defect.

mod chart;
mod metric;
pub mod smooth;

pub use chart::{Chart, ChartPoint, Convention, StratumData};
pub use metric::*;
pub use smooth::HermitianModel;
