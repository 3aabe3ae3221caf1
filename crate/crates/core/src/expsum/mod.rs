//! Exponential sums: `S_N`, `𝓕_N`, multi-phase Weyl sums, complete Gauss
//! sums, and the exact mean-value counts behind the minor-arc reduction.

mod gauss;
mod mean_value;
mod minor;
mod sums;

pub use gauss::{
    gauss_fourier_check, gauss_row, gauss_sum, gauss_sum_multi, gauss_sum_naive, GaussSum,
};
pub use mean_value::{
    grid_mean_value, mean_value_identity_check, power_sum_pair_count, vinogradov_count,
    DEFAULT_TUPLE_CAP,
};
pub use minor::{
    mean_value_integral_estimate, mean_value_integral_xi_averaged, minor_arc_sup_scan, sup_over_xi,
    IntegralDomain, SupConfig, SupScan, XiSampling,
};
pub use sums::{f_n, s_n, s_n_one_sided, weyl_sum, PhaseVector};
