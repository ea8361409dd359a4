//! Options-based sequential auctions.
//!
//! A sequence of sealed-bid auctions sells one server type. The winner of a
//! round becomes an observer for its patience window and has its payment
//! matched down to later, lower clearing prices (first-price backbone) or
//! tracked through the bumped agent it stored (second-price backbone). At the
//! end of the window the agent keeps the most profitable subset of its won
//! servers.

mod agent;
mod bundle;
mod engine;
mod matching;
mod round;

pub use agent::{AgentId, Mode, PAgentState};
pub use bundle::{
    select_bundle, AdditiveValue, BundleChoice, BundleValuation, SetFunction, TableValue,
    MAX_BUNDLE,
};
pub use engine::{
    observe_from, simulate_obsa, EpisodeLog, Market, MatchEvent, ObsaConfig, Patience,
    RoundRecord, Settlement,
};
pub use matching::{price_match_first, price_match_second};
pub use round::{run_round, AuctionOutcome, Mechanism};
