//! Participation under periodic low-price instants, with and without an
//! incentive for informed agents to time their entry.

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use super::metrics::{sample_variance, MetricsReport};
use crate::dist::BidDistribution;
use crate::error::{Error, Result};
use crate::obsa::{run_round, AgentId, Mechanism};
use crate::rng::{seeded, substream_seed};

#[derive(Debug, Clone)]
pub struct Scenario4Config {
    pub bids: BidDistribution,
    /// Mean arrivals per instant.
    pub mean_arrivals: f64,
    /// Fraction of arrivals that know when prices are low.
    pub informed: f64,
    /// Instants `t` with `t % period == period - 1` are low-price instants.
    pub period: u64,
    pub instants: u64,
    pub seed: u64,
}

impl Scenario4Config {
    fn validate(&self) -> Result<()> {
        if !(self.mean_arrivals.is_finite() && self.mean_arrivals > 0.0) {
            return Err(Error::InvalidConfig("mean arrivals must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.informed) {
            return Err(Error::InvalidConfig(format!("informed fraction {} outside [0, 1]", self.informed)));
        }
        if self.period == 0 {
            return Err(Error::InvalidConfig("period must be at least 1".into()));
        }
        Ok(())
    }

    fn is_trough(&self, t: u64) -> bool {
        t % self.period == self.period - 1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario4Report {
    /// Informed agents defer to the next low-price instant.
    pub baseline: MetricsReport,
    /// Every agent enters on arrival.
    pub obsa: MetricsReport,
    pub baseline_prices: Vec<Option<f64>>,
    pub obsa_prices: Vec<Option<f64>>,
}

struct Arrival {
    id: u64,
    informed: bool,
    /// Bid when entering at an ordinary instant.
    bid: f64,
    /// Bid when entering at a low-price instant: drawn from the lower half
    /// of the support.
    low_bid: f64,
}

/// Emits the participant series and clearing prices of both entry rules on
/// one shared arrival stream. One second-price auction runs per instant and
/// losers leave.
pub fn run_scenario4(cfg: &Scenario4Config) -> Result<Scenario4Report> {
    cfg.validate()?;
    let mut rng = seeded(substream_seed(cfg.seed, "scenario4/trace"));
    let poisson = Poisson::new(cfg.mean_arrivals).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let half = (cfg.bids.grid().len() - 1) / 2;
    let mut next_id = 0u64;
    let trace: Vec<Vec<Arrival>> = (0..cfg.instants)
        .map(|_| {
            let n = poisson.sample(&mut rng) as u64;
            (0..n)
                .map(|_| {
                    let informed = rng.random_bool(cfg.informed);
                    let bid = cfg.bids.sample(&mut rng);
                    let low = loop {
                        let k = cfg.bids.sample_index(&mut rng);
                        if k <= half {
                            break k;
                        }
                    };
                    next_id += 1;
                    Arrival { id: next_id, informed, bid, low_bid: cfg.bids.grid().value(low) }
                })
                .collect()
        })
        .collect();
    let mut auction_rng = seeded(substream_seed(cfg.seed, "scenario4/ties"));
    let (baseline, baseline_prices) = replay(cfg, &trace, true, &mut auction_rng)?;
    let mut auction_rng = seeded(substream_seed(cfg.seed, "scenario4/ties"));
    let (obsa, obsa_prices) = replay(cfg, &trace, false, &mut auction_rng)?;
    Ok(Scenario4Report { baseline, obsa, baseline_prices, obsa_prices })
}

fn replay<R: Rng>(cfg: &Scenario4Config, trace: &[Vec<Arrival>], defer: bool, rng: &mut R) -> Result<(MetricsReport, Vec<Option<f64>>)> {
    let floor = cfg.bids.grid().v_min();
    let mut queue: Vec<Vec<&Arrival>> = vec![Vec::new(); trace.len()];
    for (t, arrivals) in trace.iter().enumerate() {
        for a in arrivals {
            let wait = if defer && a.informed { cfg.period - 1 - t as u64 % cfg.period } else { 0 };
            if let Some(slot) = queue.get_mut(t + wait as usize) {
                slot.push(a);
            }
        }
    }
    let mut participants = Vec::with_capacity(trace.len());
    let mut prices = Vec::with_capacity(trace.len());
    let mut payments = Vec::new();
    for (t, entrants) in queue.iter().enumerate() {
        let low = cfg.is_trough(t as u64);
        let bids: Vec<(AgentId, f64)> = entrants.iter().map(|a| (AgentId(a.id), if low { a.low_bid } else { a.bid })).collect();
        let outcome = run_round(t as u64, &bids, floor, rng)?;
        let charge = outcome.charge(Mechanism::SecondPrice);
        payments.extend(charge);
        participants.push(bids.len() as u64);
        prices.push(charge);
    }
    let report = MetricsReport {
        mean_income: payments.iter().sum(),
        income_variance: sample_variance(&payments).unwrap_or(0.0),
        total_winners: payments.len() as u64,
        total_sold: payments.len() as u64,
        participants,
        payments: vec![payments],
    };
    Ok((report, prices))
}
