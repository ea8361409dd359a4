//! Leaving probabilities, revenue, lower bounds and hitting times.

use super::matrix::Matrix;
use super::model::ChainModel;
use crate::error::{Error, Result};
use crate::obsa::Mechanism;

fn entering(model: &ChainModel, mechanism: Mechanism) -> &[f64] {
    match mechanism {
        Mechanism::FirstPrice => &model.pi0,
        Mechanism::SecondPrice => &model.big_pi0,
    }
}

/// `Theta`, the law of the final state given the entering state after
/// `delta` rounds.
///
/// First price: `P^delta`. Second price:
/// `Q^delta + sum_{k=1..delta} Q^{delta-k} Z P^{k-1}`, read off the
/// top row of the block power `[[Q, Z], [0, P]]^delta`, which is computed by
/// binary exponentiation on the block triple `(Q^a, B_a, P^a)` with
/// `B_{a+b} = Q^a B_b + B_a P^b`.
pub fn leaving_probabilities(model: &ChainModel, mechanism: Mechanism, delta: u64) -> Matrix {
    match mechanism {
        Mechanism::FirstPrice => model.p.pow_lower(delta),
        Mechanism::SecondPrice => {
            let n = model.states();
            let compose = |(qa, ba, pa): &(Matrix, Matrix, Matrix), (qb, bb, pb): &(Matrix, Matrix, Matrix)| {
                (qa.mul_lower(qb), qa.mul_lower(bb).add(&ba.mul_lower(pb)), pa.mul_lower(pb))
            };
            let mut acc = (Matrix::identity(n), Matrix::zeros(n), Matrix::identity(n));
            let mut base = (model.q.clone(), model.z.clone(), model.p.clone());
            let mut e = delta;
            while e > 0 {
                if e & 1 == 1 {
                    acc = compose(&acc, &base);
                }
                e >>= 1;
                if e > 0 {
                    base = compose(&base, &base);
                }
            }
            acc.0.add(&acc.1)
        }
    }
}

/// Same as [`leaving_probabilities`], by stepping one round at a time:
/// `Theta_d = P Theta_{d-1}` or `Theta_d = Q Theta_{d-1} + Z P^{d-1}`.
pub fn leaving_probabilities_by_recurrence(model: &ChainModel, mechanism: Mechanism, delta: u64) -> Matrix {
    let n = model.states();
    let mut theta = Matrix::identity(n);
    let mut p_pow = Matrix::identity(n);
    for _ in 0..delta {
        theta = match mechanism {
            Mechanism::FirstPrice => model.p.mul(&theta),
            Mechanism::SecondPrice => model.q.mul(&theta).add(&model.z.mul(&p_pow)),
        };
        p_pow = p_pow.mul(&model.p);
    }
    theta
}

fn weighted(model: &ChainModel, mechanism: Mechanism, delta: u64, weight: impl Fn(usize) -> f64) -> f64 {
    let theta = leaving_probabilities(model, mechanism, delta);
    let out = theta.left_mul(entering(model, mechanism));
    out.iter().enumerate().map(|(j, x)| weight(j) * x).sum()
}

/// Expected payment of one observer, in money units:
/// `sum_i e_i sum_j (v_min + j delta) Theta_ij`.
pub fn expected_revenue(model: &ChainModel, mechanism: Mechanism, delta: u64) -> f64 {
    weighted(model, mechanism, delta, |j| model.money(j))
}

/// Expected final state index; the revenue without the money offset.
pub fn expected_state_index(model: &ChainModel, mechanism: Mechanism, delta: u64) -> f64 {
    weighted(model, mechanism, delta, |j| j as f64)
}

/// Expected revenue for every patience `0..=max_delta`, by propagating the
/// entering vector one round at a time.
pub fn revenue_path(model: &ChainModel, mechanism: Mechanism, max_delta: u64) -> Vec<f64> {
    let money: Vec<f64> = (0..model.states()).map(|j| model.money(j)).collect();
    let value = |v: &[f64]| v.iter().zip(&money).map(|(a, b)| a * b).sum::<f64>();
    let mut out = Vec::with_capacity(max_delta as usize + 1);
    match mechanism {
        Mechanism::FirstPrice => {
            let mut v = model.pi0.clone();
            out.push(value(&v));
            for _ in 0..max_delta {
                v = model.p.left_mul(&v);
                out.push(value(&v));
            }
        }
        Mechanism::SecondPrice => {
            let mut primary = model.big_pi0.clone();
            let mut sub = vec![0.0; model.states()];
            out.push(value(&primary));
            for _ in 0..max_delta {
                let from_primary = model.z.left_mul(&primary);
                sub = model.p.left_mul(&sub);
                sub.iter_mut().zip(&from_primary).for_each(|(s, f)| *s += f);
                primary = model.q.left_mul(&primary);
                out.push(value(&primary) + value(&sub));
            }
        }
    }
    out
}

/// Lower bound on the first-price revenue keeping only paths with at most
/// `order` downward jumps in `delta` rounds.
///
/// Order 1 is `sum_i pi_i [(v_min + i delta) p_ii^Delta + sum_{j<i}
/// (v_min + j delta) p_ij sum_{k=1..Delta} p_jj^{Delta-k} p_ii^{k-1}]`;
/// order 2 adds the two-jump paths `i -> r -> j`. Dropped paths carry
/// nonnegative weight, so the bound never exceeds [`expected_revenue`].
pub fn revenue_lower_bound_first(model: &ChainModel, delta: u64, order: usize) -> Result<f64> {
    if order == 0 {
        return Err(Error::InvalidParameter { name: "order", reason: "must be at least 1".into() });
    }
    let n = model.states();
    let p = &model.p;
    let diag: Vec<f64> = (0..n).map(|i| p[(i, i)]).collect();
    // layers[m] = mass that has made exactly m jumps so far.
    let mut layers = vec![model.pi0.clone()];
    layers.extend((0..order).map(|_| vec![0.0; n]));
    for _ in 0..delta {
        for m in (0..=order).rev() {
            let mut next: Vec<f64> = layers[m].iter().zip(&diag).map(|(a, d)| a * d).collect();
            if m > 0 {
                let prev = &layers[m - 1];
                for (i, &a) in prev.iter().enumerate() {
                    if a == 0.0 {
                        continue;
                    }
                    for (j, slot) in next.iter_mut().enumerate().take(i) {
                        *slot += a * p[(i, j)];
                    }
                }
            }
            layers[m] = next;
        }
    }
    Ok(layers
        .iter()
        .map(|v| v.iter().enumerate().map(|(j, x)| model.money(j) * x).sum::<f64>())
        .sum())
}

/// Mean hitting times of a target state.
#[derive(Debug, Clone, PartialEq)]
pub struct HittingTimes {
    pub mechanism: Mechanism,
    pub target: usize,
    /// First-price chain (also the second-price sub-chains).
    pub k: Vec<f64>,
    /// Second-price primary chain; `None` under the first-price backbone.
    pub rho: Option<Vec<f64>>,
    /// Expected absorption time from the entering vector.
    pub p0: f64,
}

impl HittingTimes {
    /// Max-norm residual of the triangular systems over rows with finite
    /// solutions.
    pub fn residual(&self, model: &ChainModel) -> f64 {
        let n = model.states();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            if !self.k[i].is_finite() {
                continue;
            }
            let r = if i == self.target {
                self.k[i]
            } else {
                let s: f64 = (0..i).map(|j| model.p[(i, j)] * self.k[j]).sum();
                (1.0 - model.p[(i, i)]) * self.k[i] - s - 1.0
            };
            worst = worst.max(r.abs());
        }
        if let Some(rho) = &self.rho {
            for i in 0..n {
                if !rho[i].is_finite() || !(0..=i).all(|j| self.k[j].is_finite() || model.z[(i, j)] == 0.0) {
                    continue;
                }
                let r = if i == self.target {
                    rho[i]
                } else {
                    let sq: f64 = (0..i).map(|j| model.q[(i, j)] * rho[j]).sum();
                    let sz: f64 = (0..=i).filter(|&j| model.z[(i, j)] != 0.0).map(|j| model.z[(i, j)] * self.k[j]).sum();
                    (1.0 - model.q[(i, i)]) * rho[i] - sq - sz - 1.0
                };
                worst = worst.max(r.abs());
            }
        }
        worst
    }
}

/// Mean hitting times of state 0.
pub fn hitting_times(model: &ChainModel, mechanism: Mechanism) -> HittingTimes {
    hitting_times_to(model, mechanism, 0)
}

/// Mean hitting times of `target` by forward substitution. States that may
/// never reach the target (a zero pivot, or positive mass on a state that
/// cannot) get an infinite time.
pub fn hitting_times_to(model: &ChainModel, mechanism: Mechanism, target: usize) -> HittingTimes {
    let n = model.states();
    let k = solve_lower(n, target, |i, j| model.p[(i, j)], |_| 0.0, |_| true);
    let rho = match mechanism {
        Mechanism::FirstPrice => None,
        Mechanism::SecondPrice => {
            let extra = |i: usize| -> f64 {
                (0..=i)
                    .filter(|&j| model.z[(i, j)] != 0.0)
                    .map(|j| model.z[(i, j)] * k[j])
                    .sum()
            };
            Some(solve_lower(n, target, |i, j| model.q[(i, j)], extra, |i| extra(i).is_finite()))
        }
    };
    let times = rho.as_ref().unwrap_or(&k);
    let p0 = entering(model, mechanism)
        .iter()
        .zip(times)
        .filter(|(e, _)| **e != 0.0)
        .map(|(e, t)| e * t)
        .sum();
    HittingTimes { mechanism, target, k, rho, p0 }
}

fn solve_lower(
    n: usize,
    target: usize,
    a: impl Fn(usize, usize) -> f64,
    extra: impl Fn(usize) -> f64,
    extra_finite: impl Fn(usize) -> bool,
) -> Vec<f64> {
    let mut x = vec![f64::INFINITY; n];
    for i in 0..n {
        if i < target {
            continue;
        }
        if i == target {
            x[i] = 0.0;
            continue;
        }
        let pivot = 1.0 - a(i, i);
        if pivot <= 0.0 || !extra_finite(i) {
            continue;
        }
        let mut num = 1.0 + extra(i);
        let mut finite = true;
        for (j, xj) in x.iter().enumerate().take(i) {
            let c = a(i, j);
            if c == 0.0 {
                continue;
            }
            if !xj.is_finite() {
                finite = false;
                break;
            }
            num += c * xj;
        }
        if finite {
            x[i] = num / pivot;
        }
    }
    x
}

/// Cap on patience `floor(P0 / m)`; `infeasible` flags a zero cap.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PatienceCap {
    pub value: u64,
    pub infeasible: bool,
}

pub fn max_patience(p0: f64, m: i64) -> Result<PatienceCap> {
    if m < 1 {
        return Err(Error::InvalidParameter { name: "m", reason: format!("must be at least 1, got {m}") });
    }
    if !p0.is_finite() || p0 < 0.0 {
        return Err(Error::InvalidParameter { name: "P0", reason: format!("must be finite and >= 0, got {p0}") });
    }
    let value = (p0 / m as f64).floor() as u64;
    Ok(PatienceCap { value, infeasible: value == 0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{BidDistribution, BidGrid};
    use rand::Rng;

    fn model(steps: usize, lambda: f64, p_b: f64) -> ChainModel {
        let d = BidDistribution::uniform(BidGrid::from_steps(48.0, 1.0, steps).unwrap());
        ChainModel::build(&d, lambda, p_b).unwrap()
    }

    #[test]
    fn zero_patience_is_identity() {
        let m = model(4, 2.0, 0.5);
        for mech in [Mechanism::FirstPrice, Mechanism::SecondPrice] {
            assert_eq!(leaving_probabilities(&m, mech, 0), Matrix::identity(5));
            let e = entering(&m, mech);
            let direct: f64 = e.iter().enumerate().map(|(i, x)| (48.0 + i as f64) * x).sum();
            assert!((expected_revenue(&m, mech, 0) - direct).abs() < 1e-12);
        }
        assert_eq!(leaving_probabilities(&m, Mechanism::FirstPrice, 1), m.p);
    }

    #[test]
    fn squaring_matches_recurrence() {
        let m = model(8, 3.0, 0.4);
        for mech in [Mechanism::FirstPrice, Mechanism::SecondPrice] {
            for delta in [1u64, 2, 3, 7, 12] {
                let a = leaving_probabilities(&m, mech, delta);
                let b = leaving_probabilities_by_recurrence(&m, mech, delta);
                assert!(a.max_abs_diff(&b) < 1e-13, "{mech:?} {delta}");
                assert!(a.row_sums().iter().all(|s| (s - 1.0).abs() < 1e-10));
                assert!(a.is_lower_triangular());
            }
        }
    }

    #[test]
    fn second_price_one_step_is_q_plus_z() {
        let m = model(5, 2.0, 0.5);
        let theta = leaving_probabilities(&m, Mechanism::SecondPrice, 1);
        assert!(theta.max_abs_diff(&m.q.add(&m.z)) < 1e-15);
    }

    /// Enumerates every Delta-step path of the two-layer chain: layer 0 is
    /// the primary chain, layer 1 the first-price sub-chains.
    fn two_layer_paths(m: &ChainModel, i: usize, delta: u64) -> Vec<f64> {
        fn go(m: &ChainModel, layer: u8, s: usize, left: u64, w: f64, out: &mut [f64]) {
            if w == 0.0 {
                return;
            }
            if left == 0 {
                out[s] += w;
                return;
            }
            for t in 0..=s {
                if layer == 0 {
                    go(m, 0, t, left - 1, w * m.q[(s, t)], out);
                    go(m, 1, t, left - 1, w * m.z[(s, t)], out);
                } else {
                    go(m, 1, t, left - 1, w * m.p[(s, t)], out);
                }
            }
        }
        let mut out = vec![0.0; m.states()];
        go(m, 0, i, delta, 1.0, &mut out);
        out
    }

    #[test]
    fn decomposition_matches_two_layer_paths() {
        for (steps, delta) in [(3usize, 4u64), (5, 3)] {
            let m = model(steps, 1.5, 0.6);
            let theta = leaving_probabilities(&m, Mechanism::SecondPrice, delta);
            for i in 0..=steps {
                let brute = two_layer_paths(&m, i, delta);
                for j in 0..=steps {
                    assert!((theta[(i, j)] - brute[j]).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn revenue_path_matches_powers() {
        let m = model(10, 4.0, 0.5);
        for mech in [Mechanism::FirstPrice, Mechanism::SecondPrice] {
            let path = revenue_path(&m, mech, 9);
            for (d, r) in path.iter().enumerate() {
                assert!((r - expected_revenue(&m, mech, d as u64)).abs() < 1e-10);
            }
            assert!(path.windows(2).all(|w| w[1] <= w[0] + 1e-12));
        }
    }

    /// Independent expansion: zero-jump term plus the one-jump geometric
    /// sums, and the two-jump triple sum for order 2.
    fn hand_bound(m: &ChainModel, delta: u64, order: usize) -> f64 {
        let p = &m.p;
        let v = |j: usize| 48.0 + j as f64;
        let mut total = 0.0;
        for i in 0..m.states() {
            let pi = m.pi0[i];
            let pii = p[(i, i)];
            let mut t = v(i) * pii.powi(delta as i32);
            for j in 0..i {
                let pjj = p[(j, j)];
                let ratio = pii / pjj;
                let geo = if (ratio - 1.0).abs() < 1e-15 {
                    delta as f64 * pjj.powi(delta as i32 - 1)
                } else {
                    pjj.powi(delta as i32 - 1) * (1.0 - ratio.powi(delta as i32)) / (1.0 - ratio)
                };
                t += v(j) * p[(i, j)] * geo;
                if order >= 2 && delta >= 2 {
                    for r in j + 1..i {
                        let mut s = 0.0;
                        for k in 0..=delta - 2 {
                            for c in 0..=delta - 2 - k {
                                s += pii.powi(k as i32) * p[(r, r)].powi(c as i32) * pjj.powi((delta - 2 - k - c) as i32);
                            }
                        }
                        t += v(j) * p[(i, r)] * p[(r, j)] * s;
                    }
                }
            }
            total += pi * t;
        }
        total
    }

    #[test]
    fn bound_matches_hand_expansion() {
        let m = model(3, 2.0, 0.5);
        for order in [1, 2] {
            let a = revenue_lower_bound_first(&m, 2, order).unwrap();
            let b = hand_bound(&m, 2, order);
            assert!((a - b).abs() < 1e-12, "order {order}: {a} vs {b}");
        }
        let m = model(7, 5.0, 0.5);
        for delta in [1, 3, 6] {
            for order in [1, 2] {
                let a = revenue_lower_bound_first(&m, delta, order).unwrap();
                let b = hand_bound(&m, delta, order);
                assert!((a - b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn bounds_are_ordered() {
        let m = model(20, 3.0, 0.5);
        for delta in 1..6 {
            let b1 = revenue_lower_bound_first(&m, delta, 1).unwrap();
            let b2 = revenue_lower_bound_first(&m, delta, 2).unwrap();
            let exact = expected_revenue(&m, Mechanism::FirstPrice, delta);
            assert!(b1 <= b2 + 1e-12 && b2 <= exact + 1e-12);
            let full = revenue_lower_bound_first(&m, delta, delta as usize).unwrap();
            assert!((full - exact).abs() < 1e-9);
        }
        assert!(revenue_lower_bound_first(&m, 1, 0).is_err());
    }

    #[test]
    fn hitting_times_solve_the_system() {
        let m = model(6, 2.0, 0.5);
        for mech in [Mechanism::FirstPrice, Mechanism::SecondPrice] {
            let h = hitting_times(&m, mech);
            assert_eq!(h.k[0], 0.0);
            assert!(h.residual(&m) < 1e-10);
            assert!(h.k.iter().all(|&x| x.is_finite() && x >= 0.0));
            assert!(h.p0 > 0.0);
        }
    }

    #[test]
    fn stuck_state_is_infinite() {
        let m = model(4, 0.0, 0.5);
        let h = hitting_times(&m, Mechanism::FirstPrice);
        assert_eq!(h.k[0], 0.0);
        assert!(h.k[1..].iter().all(|x| x.is_infinite()));
        let h2 = hitting_times(&m, Mechanism::SecondPrice);
        assert!(h2.rho.unwrap()[1..].iter().all(|x| x.is_infinite()));
    }

    #[test]
    fn other_targets() {
        let m = model(4, 2.0, 0.5);
        let h = hitting_times_to(&m, Mechanism::FirstPrice, 2);
        assert!(h.k[0].is_infinite() && h.k[1].is_infinite());
        assert_eq!(h.k[2], 0.0);
        assert!(h.k[3].is_infinite());
    }

    #[test]
    fn hitting_times_match_trajectories() {
        let m = model(3, 2.0, 0.5);
        let h = hitting_times(&m, Mechanism::FirstPrice);
        let mut rng = crate::rng::seeded(5);
        let n = 200_000u32;
        for start in 1..=3usize {
            let (mut sum, mut sq) = (0.0, 0.0);
            for _ in 0..n {
                let mut s = start;
                let mut steps = 0u64;
                while s != 0 {
                    let u: f64 = rng.random();
                    let mut acc = 0.0;
                    let mut next = s;
                    for t in 0..=s {
                        acc += m.p[(s, t)];
                        if u < acc {
                            next = t;
                            break;
                        }
                    }
                    s = next;
                    steps += 1;
                }
                sum += steps as f64;
                sq += (steps * steps) as f64;
            }
            let mean = sum / n as f64;
            let se = ((sq / n as f64 - mean * mean) / n as f64).sqrt();
            assert!((mean - h.k[start]).abs() < 3.0 * se, "state {start}: {mean} vs {}", h.k[start]);
        }
    }

    #[test]
    fn patience_cap() {
        assert_eq!(max_patience(10.9, 2).unwrap(), PatienceCap { value: 5, infeasible: false });
        assert_eq!(max_patience(10.9, 1).unwrap().value, 10);
        assert_eq!(max_patience(10.9, 11).unwrap(), PatienceCap { value: 0, infeasible: true });
        assert!(max_patience(10.9, 0).is_err());
        assert!(max_patience(f64::INFINITY, 2).is_err());
    }
}
