//! Multi-type resale: per-type second-price OBSA against the greedy
//! combinatorial baseline on one shared exogenous trace.

use std::collections::{BTreeMap, HashMap};

use rand::seq::index::sample;
use rand::Rng;
use rand_distr::{Binomial, Distribution, Poisson};
use serde::{Deserialize, Serialize};

use super::baseline::{combinatorial_baseline_round, Demand};
use super::metrics::{sample_variance, MetricsReport};
use crate::dist::BidDistribution;
use crate::error::{Error, Result};
use crate::obsa::{price_match_second, select_bundle, AdditiveValue, AgentId, AuctionOutcome, BundleValuation, PAgentState};
use crate::rng::{seeded, substream_seed};

#[derive(Debug, Clone)]
pub struct Scenario3Config {
    /// Per-type customer values are drawn from this law.
    pub bids: BidDistribution,
    pub types: usize,
    /// Servers of each type offered per minute before availability thinning.
    pub capacity: u32,
    /// Per-type availability rates are uniform on this interval.
    pub availability: (f64, f64),
    /// Bundle sizes are uniform on these integers, clipped to `types`.
    pub bundle_sizes: (usize, usize),
    /// Mean customer arrivals per minute.
    pub arrival_rate: f64,
    pub minutes: u64,
    pub seed: u64,
}

impl Scenario3Config {
    fn validate(&self) -> Result<()> {
        let (lo, hi) = self.availability;
        let (smin, smax) = self.bundle_sizes;
        if self.types == 0 || self.types > 64 {
            return Err(Error::InvalidConfig("types must be in 1..=64".into()));
        }
        if !(0.0..=1.0).contains(&lo) || !(lo..=1.0).contains(&hi) {
            return Err(Error::InvalidConfig(format!("availability interval [{lo}, {hi}] not inside [0, 1]")));
        }
        if smin == 0 || smin > smax || smin > self.types {
            return Err(Error::InvalidConfig(format!("bundle sizes [{smin}, {smax}] invalid for {} types", self.types)));
        }
        if !(self.arrival_rate.is_finite() && self.arrival_rate >= 0.0) {
            return Err(Error::InvalidConfig("arrival rate must be finite and nonnegative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario3Report {
    pub obsa: MetricsReport,
    pub baseline: MetricsReport,
    /// Sampled per-type availability rates.
    pub rates: Vec<f64>,
}

#[derive(Debug, Clone)]
struct Customer {
    id: u64,
    types: Vec<usize>,
    /// Value of each requested type, aligned with `types`.
    values: Vec<f64>,
    /// Uniform tie-break key among equal bids.
    key: u64,
}

impl Customer {
    fn value_of(&self, k: usize) -> f64 {
        self.values[self.types.iter().position(|&t| t == k).expect("requested type")]
    }
}

struct Minute {
    arrivals: Vec<Customer>,
    available: Vec<u32>,
}

fn draw_trace(cfg: &Scenario3Config) -> Result<(Vec<f64>, Vec<Minute>)> {
    let mut rng = seeded(substream_seed(cfg.seed, "scenario3/trace"));
    let (lo, hi) = cfg.availability;
    let rates: Vec<f64> = (0..cfg.types).map(|_| lo + (hi - lo) * rng.random::<f64>()).collect();
    let binomials = rates
        .iter()
        .map(|&r| Binomial::new(u64::from(cfg.capacity), r).map_err(|e| Error::InvalidConfig(e.to_string())))
        .collect::<Result<Vec<_>>>()?;
    let arrivals = if cfg.arrival_rate > 0.0 {
        Some(Poisson::new(cfg.arrival_rate).map_err(|e| Error::InvalidConfig(e.to_string()))?)
    } else {
        None
    };
    let smax = cfg.bundle_sizes.1.min(cfg.types);
    let mut next_id = 0u64;
    let mut trace = Vec::with_capacity(cfg.minutes as usize);
    for _ in 0..cfg.minutes {
        let available = binomials.iter().map(|b| b.sample(&mut rng) as u32).collect();
        let n = arrivals.as_ref().map_or(0, |p| p.sample(&mut rng) as u64);
        let mut list = Vec::with_capacity(n as usize);
        for _ in 0..n {
            let size = rng.random_range(cfg.bundle_sizes.0..=smax);
            let mut types = sample(&mut rng, cfg.types, size).into_vec();
            types.sort_unstable();
            let values = types.iter().map(|_| cfg.bids.sample(&mut rng)).collect();
            list.push(Customer { id: next_id, types, values, key: rng.random() });
            next_id += 1;
        }
        trace.push(Minute { arrivals: list, available });
    }
    Ok((rates, trace))
}

/// Runs both mechanisms on the same arrivals, bundles, values and
/// availability.
pub fn run_scenario3(cfg: &Scenario3Config) -> Result<Scenario3Report> {
    cfg.validate()?;
    let (rates, trace) = draw_trace(cfg)?;
    let floor = cfg.bids.grid().v_min();
    Ok(Scenario3Report {
        obsa: run_obsa(cfg, &trace, floor, Scan::Indexed)?,
        baseline: run_baseline(cfg, &trace),
        rates,
    })
}

fn run_baseline(cfg: &Scenario3Config, trace: &[Minute]) -> MetricsReport {
    let mut waiting: Vec<Customer> = Vec::new();
    let mut payments = Vec::new();
    let mut participants = Vec::with_capacity(trace.len());
    let mut sold = 0u64;
    for minute in trace {
        waiting.extend(minute.arrivals.iter().cloned());
        participants.push(waiting.len() as u64);
        let demands: Vec<Demand> = waiting
            .iter()
            .map(|c| Demand { agent: c.id, bundle: c.types.iter().map(|&t| (t, 1)).collect(), bid: c.values.iter().sum() })
            .collect();
        let alloc = combinatorial_baseline_round(&demands, &minute.available);
        for (u, a) in alloc.used.iter().zip(&minute.available) {
            assert!(u <= a && *a <= cfg.capacity, "baseline exceeded capacity");
        }
        let won: HashMap<u64, f64> = alloc.winners.iter().copied().collect();
        waiting.retain(|c| match won.get(&c.id) {
            Some(&bid) => {
                payments.push(bid);
                sold += c.types.len() as u64;
                false
            }
            None => true,
        });
    }
    let winners = payments.len() as u64;
    report(payments, winners, sold, participants)
}

fn report(payments: Vec<f64>, winners: u64, sold: u64, participants: Vec<u64>) -> MetricsReport {
    MetricsReport {
        mean_income: payments.iter().sum(),
        income_variance: sample_variance(&payments).unwrap_or(0.0),
        total_winners: winners,
        total_sold: sold,
        participants,
        payments: vec![payments],
    }
}

/// How observers are scanned for price matching. `Indexed` visits only the
/// observers whose state can change; `Naive` offers every auction to every
/// observer of the type and exists to cross-check the index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Scan {
    Indexed,
    #[cfg_attr(not(test), allow(dead_code))]
    Naive,
}

struct Holder {
    customer: Customer,
    /// Observer state per won type.
    won: BTreeMap<usize, PAgentState>,
}

/// Observers of one server type.
///
/// A stored bumped agent that is still waiting bids exactly the observer's
/// current price, so no other winner can undercut it: such observers only
/// move when that agent wins (`by_mem`). Observers without a live memory move
/// whenever a winner bids below their price (`free`, keyed by price bits,
/// which order like the nonnegative prices).
#[derive(Default)]
struct TypeBook {
    waiting: Vec<u64>,
    by_mem: HashMap<u64, Vec<u64>>,
    free: BTreeMap<u64, Vec<u64>>,
    /// Every observer ever filed; kept only for the naive scan.
    all: Vec<u64>,
}

fn run_obsa(cfg: &Scenario3Config, trace: &[Minute], floor: f64, scan: Scan) -> Result<MetricsReport> {
    let horizon = trace.len() as u64;
    let mut holders: HashMap<u64, Holder> = HashMap::new();
    let mut books: Vec<TypeBook> = (0..cfg.types).map(|_| TypeBook::default()).collect();
    let mut payments = Vec::new();
    let mut participants = Vec::with_capacity(trace.len());
    let (mut winners, mut sold) = (0u64, 0u64);
    for (t, minute) in trace.iter().enumerate() {
        let t = t as u64;
        for c in &minute.arrivals {
            for &k in &c.types {
                books[k].waiting.push(c.id);
            }
            holders.insert(c.id, Holder { customer: c.clone(), won: BTreeMap::new() });
        }
        participants.push(holders.values().filter(|h| h.won.len() < h.customer.types.len()).count() as u64);
        for (k, book) in books.iter_mut().enumerate() {
            let mut entries: Vec<(f64, u64, u64)> = book
                .waiting
                .drain(..)
                .map(|id| {
                    let c = &holders[&id].customer;
                    (c.value_of(k), c.key, id)
                })
                .collect();
            entries.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
            let units = (minute.available[k] as usize).min(entries.len());
            assert!(units as u32 <= minute.available[k] && minute.available[k] <= cfg.capacity, "OBSA exceeded capacity");
            for j in 0..units {
                let (b_w, _, w) = entries[j];
                let bumped = entries.get(j + 1).map(|e| (AgentId(e.2), e.0));
                let outcome = AuctionOutcome { time: t, winner: Some((AgentId(w), b_w)), bumped, floor };
                match scan {
                    Scan::Indexed => match_indexed(book, &mut holders, k, &outcome),
                    Scan::Naive => {
                        for o in &book.all {
                            if let Some(s) = holders.get_mut(o).and_then(|h| h.won.get_mut(&k)) {
                                price_match_second(s, &outcome);
                            }
                        }
                    }
                }
                let state = PAgentState::observer(AgentId(w), b_w, t, horizon, outcome.bumped_bid(), outcome.bumped_id());
                file_observer(book, w, &state, None);
                if scan == Scan::Naive {
                    book.all.push(w);
                }
                holders.get_mut(&w).expect("winner is a holder").won.insert(k, state);
            }
            book.waiting = entries[units..].iter().map(|e| e.2).collect();
        }
        let done: Vec<u64> = holders.iter().filter(|(_, h)| h.won.len() == h.customer.types.len()).map(|(&id, _)| id).collect();
        for id in sorted_ids(done) {
            let h = holders.remove(&id).expect("listed holder");
            let (kept, paid) = settle(&h)?;
            winners += 1;
            sold += kept;
            payments.extend(paid);
        }
    }
    for id in sorted_ids(holders.keys().copied().collect()) {
        let (kept, paid) = settle(&holders[&id])?;
        sold += kept;
        payments.extend(paid);
    }
    Ok(report(payments, winners, sold, participants))
}

fn sorted_ids(mut ids: Vec<u64>) -> Vec<u64> {
    ids.sort_unstable();
    ids
}

/// Offers `outcome` to the observers it can affect and refiles them.
fn match_indexed(book: &mut TypeBook, holders: &mut HashMap<u64, Holder>, k: usize, outcome: &AuctionOutcome) {
    let (AgentId(w), b_w) = outcome.winner.expect("indexed matching needs a winner");
    let mut touched: Vec<(u64, Option<u64>)> = book.by_mem.remove(&w).unwrap_or_default().into_iter().map(|o| (o, Some(w))).collect();
    let above: Vec<u64> = book.free.range(b_w.to_bits() + 1..).map(|(&p, _)| p).collect();
    for p in above {
        touched.extend(book.free.remove(&p).expect("listed price").into_iter().map(|o| (o, None)));
    }
    for (o, via) in touched {
        let Some(state) = holders.get_mut(&o).and_then(|h| h.won.get_mut(&k)) else {
            continue;
        };
        price_match_second(state, outcome);
        file_observer(book, o, state, via);
    }
}

/// Files an observer under its live memory, or under its price when the
/// memory is empty or is the agent that just left the type's market.
fn file_observer(book: &mut TypeBook, o: u64, state: &PAgentState, departed: Option<u64>) {
    match state.id_mem {
        Some(AgentId(m)) if Some(m) != departed => book.by_mem.entry(m).or_default().push(o),
        _ => book.free.entry(state.p_cur.to_bits()).or_default().push(o),
    }
}

/// Keeps the surplus-maximizing subset of won servers; returns the count
/// kept and their payments.
fn settle(h: &Holder) -> Result<(u64, Vec<f64>)> {
    let types: Vec<usize> = h.won.keys().copied().collect();
    let bv = BundleValuation {
        servers: types.iter().map(|&k| k as u64).collect(),
        value: AdditiveValue(types.iter().map(|&k| h.customer.value_of(k)).collect()),
        payments: types.iter().map(|k| h.won[k].p_cur).collect(),
    };
    let choice = select_bundle(&bv)?;
    let paid = types.iter().enumerate().filter(|(i, _)| choice.mask >> i & 1 == 1).map(|(_, k)| h.won[k].p_cur).collect();
    Ok((choice.kept.len() as u64, paid))
}
