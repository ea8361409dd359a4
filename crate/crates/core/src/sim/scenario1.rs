//! Analytic versus simulated income of a single observer.

use serde::{Deserialize, Serialize};

use super::exec::{map_reps, Exec};
use super::metrics::{mean_and_stderr, sample_variance, MetricsReport};
use crate::chain::{expected_revenue, ChainModel};
use crate::dist::BidDistribution;
use crate::error::{Error, Result};
use crate::obsa::{simulate_obsa, Mechanism, ObsaConfig, Patience};
use crate::rng::{replication_seed, substream_seed};

/// Rounds an episode may wait for its first winner before it is dropped.
const MAX_WAIT: u64 = 10_000;

#[derive(Debug, Clone)]
pub struct Scenario1Config {
    pub bids: BidDistribution,
    pub lambdas: Vec<f64>,
    pub deltas: Vec<u64>,
    /// Survival probability of a stored bumped agent (second price only).
    pub p_b: f64,
    pub reps: u64,
    pub seed: u64,
    pub exec: Exec,
}

impl Scenario1Config {
    fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(Error::InvalidConfig("reps must be at least 1".into()));
        }
        if self.lambdas.is_empty() || self.deltas.is_empty() {
            return Err(Error::InvalidConfig("lambda and delta sweeps must be nonempty".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario1Row {
    pub lambda: f64,
    pub delta: u64,
    pub analytic: f64,
    pub simulated: f64,
    pub stderr: f64,
    /// Variance of the observer's final payment.
    pub obsa_variance: Option<f64>,
    /// Variance of the pay-your-bid payment the same winner would owe
    /// without options.
    pub baseline_variance: Option<f64>,
    /// Replications in which no winner appeared within the wait limit.
    pub dropped: u64,
    pub report: MetricsReport,
}

/// Runs the sweep against freshly built chain models.
pub fn run_scenario1(cfg: &Scenario1Config, mechanism: Mechanism) -> Result<Vec<Scenario1Row>> {
    cfg.validate()?;
    let mut rows = Vec::new();
    for &lambda in &cfg.lambdas {
        let model = ChainModel::build(&cfg.bids, lambda, cfg.p_b)?;
        rows.extend(run_scenario1_with_model(cfg, mechanism, &model)?);
    }
    Ok(rows)
}

/// Runs every delta of the sweep at `model.lambda` against a given model.
///
/// Each replication admits one observer with patience `delta` and records
/// its final payment.
pub fn run_scenario1_with_model(cfg: &Scenario1Config, mechanism: Mechanism, model: &ChainModel) -> Result<Vec<Scenario1Row>> {
    cfg.validate()?;
    if model.grid != *cfg.bids.grid() {
        return Err(Error::GridMismatch);
    }
    let mut rows = Vec::new();
    for &delta in &cfg.deltas {
        let obsa = ObsaConfig {
            bids: cfg.bids.clone(),
            lambda: model.lambda,
            patience: Patience::Fixed(delta),
            bumped_survival: cfg.p_b,
            max_observers: Some(1),
        };
        obsa.validate()?;
        let label = format!("scenario1/{}/{}/{}", mechanism.label(), model.lambda, delta);
        let base = substream_seed(cfg.seed, &label);
        let outcomes = map_reps(cfg.exec, cfg.reps, |i| {
            simulate_obsa(&obsa, mechanism, delta + 1 + MAX_WAIT, replication_seed(base, i)).map(|log| {
                let first_bid = log.rounds.iter().find_map(|r| r.winner_bid);
                log.settlements.first().map(|s| (s.payment, first_bid.expect("settled observer won a round")))
            })
        });
        let mut payments = Vec::new();
        let mut baseline = Vec::new();
        let mut per_rep = Vec::new();
        let mut dropped = 0;
        for o in outcomes {
            match o? {
                Some((p, b)) => {
                    payments.push(p);
                    baseline.push(b);
                    per_rep.push(vec![p]);
                }
                None => dropped += 1,
            }
        }
        let (simulated, stderr) = mean_and_stderr(&payments);
        let obsa_variance = sample_variance(&payments);
        let report = MetricsReport {
            mean_income: simulated,
            income_variance: obsa_variance.unwrap_or(0.0),
            total_winners: payments.len() as u64,
            total_sold: payments.len() as u64,
            participants: Vec::new(),
            payments: per_rep,
        };
        rows.push(Scenario1Row {
            lambda: model.lambda,
            delta,
            analytic: expected_revenue(model, mechanism, delta),
            simulated,
            stderr,
            obsa_variance,
            baseline_variance: sample_variance(&baseline),
            dropped,
            report,
        });
    }
    Ok(rows)
}
