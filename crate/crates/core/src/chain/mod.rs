//! Markov-chain analytics of the price-matching process.
//!
//! States are payment levels `0..=L` on the bid grid; an observer's payment
//! only moves down. The first-price backbone is a single chain `P`. The
//! second-price backbone adds a primary chain `Q` (bumped agent still in the
//! market) whose departure branches `Z` drop into first-price sub-chains.

mod analysis;
mod matrix;
mod model;

pub use analysis::{
    expected_revenue, expected_state_index, hitting_times, hitting_times_to, leaving_probabilities,
    leaving_probabilities_by_recurrence, max_patience, revenue_lower_bound_first, revenue_path,
    HittingTimes, PatienceCap,
};
pub use matrix::Matrix;
pub use model::{
    build_first_price, build_second_price, second_highest_law, second_highest_law_closed, ChainModel,
};
