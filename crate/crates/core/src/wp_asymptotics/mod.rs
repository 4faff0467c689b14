mod ks;
pub mod quadrature;

pub use ks::{dbar_norm, dbar_norm_exact, ks_field, ks_jacobian, ks_leading, HorizontalField};
pub use quadrature::{integrate_interval, integrate_region, PanelRule, QuadResult};
mod wp;
pub use wp::{
    axis_boundary, b_constants, chart_volume, fit_exponent, fit_k, wp_decay, wp_ratio, AxisBoundary, BConstants,
    WpDecay, WpIntegrand, WpRatio, WpRow,
};
mod glued;
pub use glued::{glued_field_check, shell_norm, stratum_field, GluedReport, GluedRow};
