//! Empirical measures over Monte Carlo samples and the statistics derived
//! from them.

mod accumulate;
mod diagnostics;
mod empirical;
mod sandwich;
mod tail;

pub use accumulate::{
    accumulate, erosion_area, merge, ns_constant_estimate, unit_ball_volume, window_weight, Accumulator,
    CountReport, DiagnosticParams, EdgeCorrection, NsEstimate, SampleContribution,
};
pub use diagnostics::{small_long_diagnostics, Diagnostics};
pub use empirical::{discrepancy, EmpiricalMeasure, MASS_SCALE, MAX_WEIGHT};
pub use sandwich::{sandwich_check, SandwichReport};
pub use tail::{tail_exponent, TailFit, MIN_TAIL_OBSERVATIONS};
