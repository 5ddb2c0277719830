//! Post-processing of correlation series: normalization, second moment,
//! long-time tail fits and series comparison.

mod compare;
mod fit;
mod moments;

pub use compare::{compare_series, ComparisonReport};
pub use fit::{
    default_window, find_extrema, fit_long_time_tail, scale_rates, to_physical_units, Extremum, FitWindow, TailFit,
    TailParams, HIGH_RESIDUAL,
};
pub use moments::{normalize, second_moment};
