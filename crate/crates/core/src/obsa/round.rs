use std::collections::HashSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::agent::AgentId;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mechanism {
    FirstPrice,
    SecondPrice,
}

impl Mechanism {
    pub fn label(&self) -> &'static str {
        match self {
            Mechanism::FirstPrice => "first_price",
            Mechanism::SecondPrice => "second_price",
        }
    }
}

/// Result of one sealed-bid round.
///
/// `bumped` is the second-highest bidder; it is absent when fewer than two
/// agents bid, in which case the bumped bid reads as `floor`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuctionOutcome {
    pub time: u64,
    pub winner: Option<(AgentId, f64)>,
    pub bumped: Option<(AgentId, f64)>,
    pub floor: f64,
}

impl AuctionOutcome {
    pub fn winner_id(&self) -> Option<AgentId> {
        self.winner.map(|w| w.0)
    }

    pub fn winner_bid(&self) -> Option<f64> {
        self.winner.map(|w| w.1)
    }

    pub fn bumped_id(&self) -> Option<AgentId> {
        self.bumped.map(|b| b.0)
    }

    pub fn bumped_bid(&self) -> f64 {
        self.bumped.map_or(self.floor, |b| b.1)
    }

    /// Charge basis of the winner, `None` for an empty round.
    pub fn charge(&self, mechanism: Mechanism) -> Option<f64> {
        let (_, bid) = self.winner?;
        Some(match mechanism {
            Mechanism::FirstPrice => bid,
            Mechanism::SecondPrice => self.bumped_bid(),
        })
    }
}

/// Runs one round. Ties for the highest (and second-highest) bid are broken
/// uniformly at random; the random stream is only consumed on ties.
pub fn run_round<R: Rng + ?Sized>(
    time: u64,
    bids: &[(AgentId, f64)],
    floor: f64,
    rng: &mut R,
) -> Result<AuctionOutcome> {
    let mut seen = HashSet::with_capacity(bids.len());
    for (id, bid) in bids {
        if !seen.insert(*id) {
            return Err(Error::DuplicateAgent(id.0));
        }
        if !bid.is_finite() {
            return Err(Error::InvalidParameter { name: "bid", reason: format!("agent {id} bid {bid}") });
        }
    }
    let winner = pick_max(bids, None, rng);
    let bumped = winner.and_then(|w| pick_max(bids, Some(w), rng));
    Ok(AuctionOutcome {
        time,
        winner: winner.map(|i| bids[i]),
        bumped: bumped.map(|i| bids[i]),
        floor,
    })
}

fn pick_max<R: Rng + ?Sized>(bids: &[(AgentId, f64)], skip: Option<usize>, rng: &mut R) -> Option<usize> {
    let mut best = f64::NEG_INFINITY;
    let mut ties: Vec<usize> = Vec::new();
    for (i, (_, b)) in bids.iter().enumerate() {
        if Some(i) == skip {
            continue;
        }
        if *b > best {
            best = *b;
            ties.clear();
            ties.push(i);
        } else if *b == best {
            ties.push(i);
        }
    }
    match ties.len() {
        0 => None,
        1 => Some(ties[0]),
        n => Some(ties[rng.random_range(0..n)]),
    }
}
