//! Simulation and analytics for two-stage cloud resource markets.
//!
//! The first stage sells servers to proxy agents through options-based
//! sequential auctions (OBSA), where a winner keeps watching later rounds and
//! has its payment matched down to lower clearing prices until its patience
//! runs out. The second stage models cloud-of-clouds managers bidding for
//! provider capacity against a flat-price fallback.
//!
//! Modules:
//! - [`dist`]: bid grids, uniform and sampled-Laplace bid laws, Poisson counts.
//! - [`obsa`]: the executable auction engine and the two price-matching rules.
//! - [`chain`]: exact Markov-chain analytics of the price-matching process.
//! - [`hjb`]: stage-two bid curves (closed form and ODE solver).
//! - [`sim`]: Monte Carlo scenarios and the combinatorial baseline.
//! - [`cli`]: configuration files, presets and result emission.

pub mod chain;
pub mod cli;
pub mod dist;
pub mod error;
pub mod hjb;
pub mod obsa;
pub mod rng;
pub mod sim;

pub use error::{Error, Result};
