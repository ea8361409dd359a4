//! Episode driver for one auction sequence.

use std::collections::BTreeMap;
use std::io::Write;

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use super::agent::{AgentId, PAgentState};
use super::matching::{price_match_first, price_match_second};
use super::round::{run_round, AuctionOutcome, Mechanism};
use crate::dist::BidDistribution;
use crate::error::{Error, Result};
use crate::rng::seeded;

/// Patience of a new winner, in auction rounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Patience {
    Fixed(u64),
    Uniform { min: u64, max: u64 },
}

impl Patience {
    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        match *self {
            Patience::Fixed(d) => d,
            Patience::Uniform { min, max } => rng.random_range(min..=max),
        }
    }
}

/// Market seen by one auction sequence.
#[derive(Debug, Clone)]
pub struct ObsaConfig {
    pub bids: BidDistribution,
    /// Mean number of agents per round.
    pub lambda: f64,
    pub patience: Patience,
    /// Per-round probability that a stored bumped agent stays in the market.
    pub bumped_survival: f64,
    /// Cap on the number of winners that become observers; `None` means all.
    pub max_observers: Option<usize>,
}

impl ObsaConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return Err(Error::InvalidConfig(format!("lambda must be finite and >= 0, got {}", self.lambda)));
        }
        if !(0.0..=1.0).contains(&self.bumped_survival) {
            return Err(Error::InvalidConfig(format!(
                "bumped survival must lie in [0, 1], got {}",
                self.bumped_survival
            )));
        }
        if let Patience::Uniform { min, max } = self.patience {
            if min > max {
                return Err(Error::InvalidConfig(format!("patience range [{min}, {max}] is empty")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchEvent {
    pub agent: AgentId,
    pub payment: f64,
}

/// One line of the episode log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: u64,
    pub participants: usize,
    pub winner: Option<AgentId>,
    pub winner_bid: Option<f64>,
    pub charge: Option<f64>,
    pub matches: Vec<MatchEvent>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Settlement {
    pub agent: AgentId,
    pub t_ent: u64,
    pub initial: f64,
    pub payment: f64,
    pub settled_at: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeLog {
    pub mechanism: Mechanism,
    pub rounds: Vec<RoundRecord>,
    pub settlements: Vec<Settlement>,
    /// Sum of the final payments of every settled observer.
    pub income: f64,
}

impl EpisodeLog {
    /// Writes one JSON object per round.
    pub fn write_lines<W: Write>(&self, mut w: W) -> Result<()> {
        for r in &self.rounds {
            serde_json::to_writer(&mut w, r)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
struct Stored {
    bid: f64,
    refs: usize,
}

/// Agent arrivals for one auction sequence.
///
/// Every round draws `N ~ Poisson(lambda)` bidding slots. Bumped agents
/// stored by some observer stay with probability `bumped_survival` per round
/// and take slots first; the remaining slots go to fresh agents.
#[derive(Debug)]
pub struct Market<'a> {
    cfg: &'a ObsaConfig,
    mechanism: Mechanism,
    poisson: Option<Poisson<f64>>,
    next_id: u64,
    stored: BTreeMap<AgentId, Stored>,
}

impl<'a> Market<'a> {
    pub fn new(cfg: &'a ObsaConfig, mechanism: Mechanism) -> Result<Self> {
        cfg.validate()?;
        let poisson = if cfg.lambda > 0.0 {
            Some(Poisson::new(cfg.lambda).map_err(|e| Error::InvalidConfig(e.to_string()))?)
        } else {
            None
        };
        Ok(Self { cfg, mechanism, poisson, next_id: 0, stored: BTreeMap::new() })
    }

    pub fn fresh_id(&mut self) -> AgentId {
        self.next_id += 1;
        AgentId(self.next_id)
    }

    /// Registers a reference to a bumped agent that keeps bidding `bid`.
    pub fn retain(&mut self, id: AgentId, bid: f64) {
        self.stored.entry(id).or_insert(Stored { bid, refs: 0 }).refs += 1;
    }

    pub fn release(&mut self, id: AgentId) {
        if let Some(s) = self.stored.get_mut(&id) {
            s.refs -= 1;
            if s.refs == 0 {
                self.stored.remove(&id);
            }
        }
    }

    /// A winner leaves with its server.
    pub fn remove(&mut self, id: AgentId) {
        self.stored.remove(&id);
    }

    pub fn stored_count(&self) -> usize {
        self.stored.len()
    }

    /// Survival draws for stored agents, then this round's bids.
    pub fn draw_round<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Vec<(AgentId, f64)> {
        let p = self.cfg.bumped_survival;
        self.stored.retain(|_, _| rng.random_bool(p));
        let n = match &self.poisson {
            Some(d) => d.sample(rng) as usize,
            None => 0,
        };
        let stored: Vec<(AgentId, f64)> = self.stored.iter().map(|(id, s)| (*id, s.bid)).collect();
        let mut bids: Vec<(AgentId, f64)> = if stored.len() <= n {
            stored
        } else {
            let mut pick = rand::seq::index::sample(rng, stored.len(), n).into_vec();
            pick.sort_unstable();
            pick.into_iter().map(|i| stored[i]).collect()
        };
        while bids.len() < n {
            let id = self.fresh_id();
            bids.push((id, self.cfg.bids.sample(rng)));
        }
        bids
    }

    /// Applies this round's outcome to one observer and keeps the stored
    /// pool in step with its memory. Returns the new payment if it changed.
    pub fn apply_matching(&mut self, obs: &mut PAgentState, outcome: &AuctionOutcome) -> Option<f64> {
        let before = (obs.p_cur, obs.id_mem);
        match self.mechanism {
            Mechanism::FirstPrice => match outcome.winner_bid() {
                Some(b_w) => price_match_first(obs, outcome.time, b_w),
                None => obs.p_cur,
            },
            Mechanism::SecondPrice => price_match_second(obs, outcome),
        };
        if obs.id_mem != before.1 {
            if let (Some(new), Some((_, bid))) = (obs.id_mem, outcome.bumped) {
                self.retain(new, bid);
            }
            if let Some(old) = before.1 {
                self.release(old);
            }
        }
        (obs.p_cur != before.0).then_some(obs.p_cur)
    }
}

/// Runs one episode of `horizon` rounds.
///
/// Winners become observers (up to `max_observers`), match prices for their
/// patience window and settle at `t_ent + t_pat`. Observers still watching
/// at the horizon are not settled and contribute no income. The episode stops
/// early once the observer cap is reached and every observer has settled.
pub fn simulate_obsa(cfg: &ObsaConfig, mechanism: Mechanism, horizon: u64, seed: u64) -> Result<EpisodeLog> {
    let mut rng = seeded(seed);
    let mut market = Market::new(cfg, mechanism)?;
    let floor = cfg.bids.grid().v_min();
    let mut observers: Vec<(PAgentState, f64)> = Vec::new();
    let mut created = 0usize;
    let mut log = EpisodeLog { mechanism, rounds: Vec::new(), settlements: Vec::new(), income: 0.0 };
    for t in 0..horizon {
        let capped = cfg.max_observers.is_some_and(|m| created >= m);
        if capped && observers.is_empty() {
            break;
        }
        let bids = market.draw_round(&mut rng);
        let outcome = run_round(t, &bids, floor, &mut rng)?;
        let charge = outcome.charge(mechanism);
        let mut record = RoundRecord {
            round: t,
            participants: bids.len(),
            winner: outcome.winner_id(),
            winner_bid: outcome.winner_bid(),
            charge,
            matches: Vec::new(),
        };
        if let Some((w_id, w_bid)) = outcome.winner {
            market.remove(w_id);
            for (obs, _) in observers.iter_mut() {
                if let Some(p) = market.apply_matching(obs, &outcome) {
                    record.matches.push(MatchEvent { agent: obs.id, payment: p });
                }
            }
            if !capped {
                let t_pat = cfg.patience.draw(&mut rng);
                let charge = charge.expect("winner implies a charge");
                let id_mem = match mechanism {
                    Mechanism::FirstPrice => None,
                    Mechanism::SecondPrice => outcome.bumped_id(),
                };
                if let (Some(id), Some((_, bid))) = (id_mem, outcome.bumped) {
                    market.retain(id, bid);
                }
                observers.push((PAgentState::observer(w_id, w_bid, t, t_pat, charge, id_mem), charge));
                created += 1;
            }
        }
        let mut i = 0;
        while i < observers.len() {
            if observers[i].0.deadline() <= t {
                let (obs, initial) = observers.remove(i);
                if let Some(m) = obs.id_mem {
                    market.release(m);
                }
                log.income += obs.p_cur;
                log.settlements.push(Settlement {
                    agent: obs.id,
                    t_ent: obs.t_ent,
                    initial,
                    payment: obs.p_cur,
                    settled_at: t,
                });
            } else {
                i += 1;
            }
        }
        log.rounds.push(record);
    }
    Ok(log)
}

/// Final payment of a single observer that enters at payment `start` and
/// watches `delta` rounds. Under the second-price backbone with
/// `with_bumped`, the observer stores a bumped agent bidding `start`.
pub fn observe_from<R: Rng + ?Sized>(
    cfg: &ObsaConfig,
    mechanism: Mechanism,
    start: f64,
    with_bumped: bool,
    delta: u64,
    rng: &mut R,
) -> Result<f64> {
    let mut market = Market::new(cfg, mechanism)?;
    let floor = cfg.bids.grid().v_min();
    let me = market.fresh_id();
    let mem = if with_bumped && mechanism == Mechanism::SecondPrice {
        let b = market.fresh_id();
        market.retain(b, start);
        Some(b)
    } else {
        None
    };
    let mut obs = PAgentState::observer(me, start, 0, delta, start, mem);
    for t in 1..=delta {
        let bids = market.draw_round(rng);
        let outcome = run_round(t, &bids, floor, rng)?;
        if let Some(w) = outcome.winner_id() {
            market.remove(w);
        }
        market.apply_matching(&mut obs, &outcome);
    }
    Ok(obs.p_cur)
}
