//! Greedy sequential combinatorial auction used as the comparison baseline.

use serde::{Deserialize, Serialize};

/// A bundle request: `(type, units)` pairs and one bid for the whole bundle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Demand {
    pub agent: u64,
    pub bundle: Vec<(usize, u32)>,
    pub bid: f64,
}

impl Demand {
    pub fn units(&self) -> u32 {
        self.bundle.iter().map(|(_, c)| c).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct BaselineAllocation {
    /// `(agent, payment)` in allocation order; winners pay their bid.
    pub winners: Vec<(u64, f64)>,
    pub used: Vec<u32>,
}

/// Allocates in decreasing bid per requested unit, ties to the smaller agent
/// id, skipping demands that no longer fit. Demands that exceed a type's
/// total capacity, or request nothing, are skipped outright.
pub fn combinatorial_baseline_round(demands: &[Demand], capacities: &[u32]) -> BaselineAllocation {
    let mut order: Vec<usize> = (0..demands.len())
        .filter(|&i| {
            let d = &demands[i];
            d.units() > 0 && d.bundle.iter().all(|&(t, c)| t < capacities.len() && c <= capacities[t])
        })
        .collect();
    let density = |i: usize| demands[i].bid / demands[i].units() as f64;
    order.sort_by(|&a, &b| {
        density(b).total_cmp(&density(a)).then(demands[a].agent.cmp(&demands[b].agent))
    });
    let mut left = capacities.to_vec();
    let mut winners = Vec::new();
    for i in order {
        let d = &demands[i];
        let mut need = vec![0u32; left.len()];
        for &(t, c) in &d.bundle {
            need[t] += c;
        }
        if need.iter().zip(&left).all(|(n, l)| n <= l) {
            left.iter_mut().zip(&need).for_each(|(l, n)| *l -= n);
            winners.push((d.agent, d.bid));
        }
    }
    let used = capacities.iter().zip(&left).map(|(c, l)| c - l).collect();
    BaselineAllocation { winners, used }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn demand(agent: u64, bundle: Vec<(usize, u32)>, bid: f64) -> Demand {
        Demand { agent, bundle, bid }
    }

    #[test]
    fn single_feasible_demand() {
        let a = combinatorial_baseline_round(&[demand(1, vec![(0, 2)], 50.0)], &[3]);
        assert_eq!(a.winners, vec![(1, 50.0)]);
        assert_eq!(a.used, vec![2]);
    }

    #[test]
    fn higher_density_wins() {
        let a = combinatorial_baseline_round(&[demand(1, vec![(0, 1)], 40.0), demand(2, vec![(0, 1)], 60.0)], &[1]);
        assert_eq!(a.winners, vec![(2, 60.0)]);
    }

    #[test]
    fn ties_go_to_smaller_id() {
        let a = combinatorial_baseline_round(&[demand(9, vec![(0, 1)], 60.0), demand(4, vec![(0, 1)], 60.0)], &[1]);
        assert_eq!(a.winners, vec![(4, 60.0)]);
    }

    #[test]
    fn infeasible_demands_skipped() {
        let a = combinatorial_baseline_round(
            &[demand(1, vec![(0, 5)], 1000.0), demand(2, vec![(3, 1)], 10.0), demand(3, vec![], 5.0), demand(4, vec![(0, 1)], 1.0)],
            &[2],
        );
        assert_eq!(a.winners, vec![(4, 1.0)]);
    }

    fn optimum(demands: &[Demand], caps: &[u32]) -> f64 {
        let n = demands.len();
        let mut best: f64 = 0.0;
        for mask in 0u32..(1 << n) {
            let mut used = vec![0u32; caps.len()];
            let mut w = 0.0;
            for (i, d) in demands.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    w += d.bid;
                    for &(t, c) in &d.bundle {
                        used[t] += c;
                    }
                }
            }
            if used.iter().zip(caps).all(|(u, c)| u <= c) {
                best = best.max(w);
            }
        }
        best
    }

    #[test]
    fn density_order_has_no_half_guarantee() {
        let d = [demand(1, vec![(0, 1)], 1.1), demand(2, vec![(0, 3)], 3.0)];
        let a = combinatorial_baseline_round(&d, &[3]);
        assert_eq!(a.winners, vec![(1, 1.1)]);
        assert!(1.1 / optimum(&d, &[3]) < 0.5);
    }

    #[test]
    fn greedy_is_feasible_and_bounded_by_optimum() {
        let mut rng = crate::rng::seeded(17);
        for _ in 0..2000 {
            let types = rng.random_range(1..=3usize);
            let caps: Vec<u32> = (0..types).map(|_| rng.random_range(1..=4)).collect();
            let n = rng.random_range(1..=8u64);
            let demands: Vec<Demand> = (0..n)
                .map(|agent| {
                    let mut bundle = Vec::new();
                    for t in 0..types {
                        if rng.random_bool(0.6) {
                            bundle.push((t, rng.random_range(1..=2)));
                        }
                    }
                    let bundle = if bundle.is_empty() { vec![(0, 1)] } else { bundle };
                    demand(agent, bundle, rng.random_range(1..=100) as f64)
                })
                .collect();
            let alloc = combinatorial_baseline_round(&demands, &caps);
            for (t, &u) in alloc.used.iter().enumerate() {
                assert!(u <= caps[t]);
            }
            let greedy: f64 = alloc.winners.iter().map(|w| w.1).sum();
            let opt = optimum(&demands, &caps);
            assert!(greedy <= opt + 1e-9);
            let any_fits = demands.iter().any(|d| d.bundle.iter().all(|&(t, c)| c <= caps[t]));
            assert_eq!(greedy > 0.0, any_fits);
        }
    }
}
