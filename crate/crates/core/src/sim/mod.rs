//! Monte Carlo scenarios.
//!
//! - Scenario 1: analytic versus simulated income of one observer.
//! - Scenario 2: stage-two bid curves over a sweep of time preferences.
//! - Scenario 3: multi-type resale, OBSA versus a greedy combinatorial
//!   auction.
//! - Scenario 4: participation bursts when informed agents can time their
//!   entry.
//!
//! Replications run through [`map_reps`]; each replication owns a stream
//! seeded by [`crate::rng::replication_seed`], and results are aggregated in
//! index order, so sequential and parallel runs are bit-identical.

mod baseline;
mod exec;
mod metrics;
mod scenario1;
mod scenario2;
mod scenario3;
mod scenario4;

pub use baseline::{combinatorial_baseline_round, BaselineAllocation, Demand};
pub use exec::{map_reps, Exec};
pub use metrics::{mean_and_stderr, payment_variance, sample_variance, MetricsReport};
pub use scenario1::{run_scenario1, run_scenario1_with_model, Scenario1Config, Scenario1Row};
pub use scenario2::{run_scenario2, Scenario2Report};
pub use scenario3::{run_scenario3, Scenario3Config, Scenario3Report};
pub use scenario4::{run_scenario4, Scenario4Config, Scenario4Report};
