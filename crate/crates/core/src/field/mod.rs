//! Osculating algebras of polynomial distributions over a chart.

mod chart;
mod format;
mod poly;

pub use chart::{
    dtheta_check, grid, heisenberg_chart, involutive_chart, mixed_fixture, quaternionic_chart, scan_chart,
    ChartField, ChartScan, DThetaCheck, PointReport,
};
pub use format::{parse_chart, write_chart};
pub use poly::{parse_rational, poly_bracket, q_from_f64, q_to_f64, Poly, PolyCovector, PolyVectorField, Q};
