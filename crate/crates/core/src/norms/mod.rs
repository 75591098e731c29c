//! Co-Hofer lengths and distances, C⁰ metrics, energy bounds and Cauchy
//! diagnostics.

pub mod length;
pub mod metric;

pub use length::{
    aco_length, aco_norm, almost_length, co_hofer_length, distance_ah, distance_ch, length_l1inf,
    length_linf, theta_of_field, time_rule, AcoNorm, Flavor, LengthNode, LengthReport,
    QuadratureOptions, ReebTerm,
};
pub use metric::{
    c0_distance, cauchy_report, energy_upper_bound, ensure_cauchy, grid_points, map_distance,
    path_distance, sup_distance, C0Options, C0Report, EnergyBound, SequenceDiagnostics,
};
