//! Distributions and probability computation: seeded product-distribution
//! sampling, exact read-once recurrences, full-enumeration oracles,
//! parallel Monte Carlo, correlation-aware product bounds, error reduction,
//! total-variation distance, and monotone conditioning checks.

mod enumerate;
mod janson;
mod kleitman;
mod mc;
mod recurrence;
mod reduce;
mod sample;
mod tv;

pub use enumerate::{acceptance_census, census_prob, enumerate_prob};
pub use janson::{delta_compute, janson_bounds, DeltaMode, DeltaReport, JansonBound};
pub use kleitman::{kleitman_check, KleitmanReport};
pub use mc::{mc_estimate, McEstimate};
pub use recurrence::{
    bracket_sweep, delta_for_m, readonce_prob, recurrence_csv, recurrence_table, BracketSweep,
    LogProb, RecurrenceLadder, RecurrenceRow, RecurrenceTable, SweepEntry,
};
pub use reduce::{error_reduction_t, simulate_majority_failure};
pub use sample::{rng_for, sample_bit, sample_product, CoinDist};
pub use tv::{tv_distance, TvReport};
