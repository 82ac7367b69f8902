//! Finite-key secret-key rates, their optimization and threshold search.

mod budget;
mod optimize;
mod rate;
mod threshold;
mod yields;

pub use budget::SecurityBudget;
pub use optimize::{
    optimize_rate, optimize_rate_observed, GridSpec, OptimalParams, Optimum, RateProblem,
};
pub use rate::{
    delta_correction, key_rate, Bound, DeviationRule, LeakPoint, RateBreakdown, RateOptions,
};
pub use threshold::{find_threshold_n0, Threshold, MAX_SIGNALS, RELATIVE_WIDTH, START_SIGNALS};
pub use yields::{test_basis_probability, test_multiplicity, yields, YieldModel, YieldRule};
