//! Transition matrices and entering vectors.

use std::io::Write;

use super::matrix::Matrix;
use crate::dist::{max_bid_pmf, BidDistribution, BidGrid, ParticipationModel};
use crate::error::{Error, Result};

/// Both chains for one market: `P` and `pi0` for the first-price backbone,
/// `Q`, `Z` and `big_pi0` for the second-price backbone.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainModel {
    pub grid: BidGrid,
    pub lambda: f64,
    pub p_b: f64,
    pub p: Matrix,
    pub q: Matrix,
    pub z: Matrix,
    pub pi0: Vec<f64>,
    pub big_pi0: Vec<f64>,
}

impl ChainModel {
    pub fn build(d: &BidDistribution, lambda: f64, p_b: f64) -> Result<Self> {
        let (p, pi0) = build_first_price(d, lambda)?;
        let (q, z, big_pi0) = build_second_price(d, lambda, p_b)?;
        Ok(Self { grid: *d.grid(), lambda, p_b, p, q, z, pi0, big_pi0 })
    }

    pub fn states(&self) -> usize {
        self.grid.len()
    }

    /// Payment in money units of state `j`.
    pub fn money(&self, j: usize) -> f64 {
        self.grid.value(j)
    }

    /// Text dump: a header line per block followed by comma-separated rows.
    pub fn write_dump<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(
            w,
            "# v_min={} delta={} L={} lambda={} p_b={}",
            self.grid.v_min(),
            self.grid.delta(),
            self.grid.steps(),
            self.lambda,
            self.p_b
        )?;
        for (name, m) in [("P", &self.p), ("Q", &self.q), ("Z", &self.z)] {
            writeln!(w, "[{name}]")?;
            for i in 0..m.dim() {
                writeln!(w, "{}", join(m.row(i)))?;
            }
        }
        writeln!(w, "[pi0]")?;
        writeln!(w, "{}", join(&self.pi0))?;
        writeln!(w, "[Pi0]")?;
        writeln!(w, "{}", join(&self.big_pi0))?;
        Ok(())
    }
}

fn join(xs: &[f64]) -> String {
    xs.iter().map(|x| format!("{x:e}")).collect::<Vec<_>>().join(",")
}

fn participation(lambda: f64) -> Result<ParticipationModel> {
    ParticipationModel::new(lambda)
}

/// First-price chain: `p_xy` for `y < x` is the probability that the round's
/// highest bid sits at `y`; the diagonal closes each row (higher winning
/// bids and empty rounds leave the payment unchanged). The entering vector
/// is the highest-bid law given at least one bidder; it is all zeros when
/// `lambda = 0`.
pub fn build_first_price(d: &BidDistribution, lambda: f64) -> Result<(Matrix, Vec<f64>)> {
    let pm = participation(lambda)?;
    let n = d.grid().len();
    let law: Vec<f64> = (0..n).map(|y| max_bid_pmf(d, &pm, y, 1)).collect();
    let mut p = Matrix::zeros(n);
    for x in 0..n {
        let mut off = 0.0;
        for (y, &l) in law.iter().enumerate().take(x) {
            p[(x, y)] = l;
            off += l;
        }
        p[(x, x)] = 1.0 - off;
    }
    let any = -(-lambda).exp_m1();
    let pi0 = if lambda > 0.0 { law.iter().map(|l| l / any).collect() } else { vec![0.0; n] };
    Ok((p, pi0))
}

/// Second-price chains.
///
/// With probability `p_b` the stored bumped agent bids again at the
/// observer's current payment, against `N - 1` fresh agents; if it wins, the
/// payment drops to the best of the others (`v_min` if there are none). With
/// probability `1 - p_b` it has left and the round is a first-price step
/// into a sub-chain. Diagonals close the rows of `Q + Z`.
pub fn build_second_price(d: &BidDistribution, lambda: f64, p_b: f64) -> Result<(Matrix, Matrix, Vec<f64>)> {
    if !(0.0..=1.0).contains(&p_b) {
        return Err(Error::InvalidParameter { name: "p_b", reason: format!("must lie in [0, 1], got {p_b}") });
    }
    let pm = participation(lambda)?;
    let n = d.grid().len();
    let top = pm.truncation();
    let max_law: Vec<f64> = (0..n).map(|y| max_bid_pmf(d, &pm, y, 1)).collect();
    // Highest of N - 1 fresh bids, mixed over N >= 1.
    let others: Vec<f64> = (0..n)
        .map(|y| {
            let hi = d.cdf(y as i64);
            let lo = d.cdf(y as i64 - 1);
            let mut s: f64 = (2..=top)
                .map(|k| pm.pmf(k) * (hi.powi(k as i32 - 1) - lo.powi(k as i32 - 1)))
                .sum();
            if y == 0 {
                s += pm.pmf(1);
            }
            s
        })
        .collect();
    let mut q = Matrix::zeros(n);
    let mut z = Matrix::zeros(n);
    for x in 0..n {
        let (mut qs, mut zs) = (0.0, 0.0);
        for y in 0..x {
            q[(x, y)] = p_b * others[y];
            z[(x, y)] = (1.0 - p_b) * max_law[y];
            qs += q[(x, y)];
            zs += z[(x, y)];
        }
        q[(x, x)] = p_b - qs;
        z[(x, x)] = (1.0 - p_b) - zs;
    }
    let big_pi0 = if lambda > 0.0 {
        let any = -(-lambda).exp_m1();
        let mut v: Vec<f64> = (0..n).map(|k| second_highest_law(d, &pm, k)).collect();
        v[0] += pm.pmf(1);
        v.iter_mut().for_each(|x| *x /= any);
        v
    } else {
        vec![0.0; n]
    };
    Ok((q, z, big_pi0))
}

/// Probability, summed over `N >= 2` agents, that the second-highest bid
/// sits at `k`: exactly one bid above `k` with the best of the rest at `k`,
/// or at least two bids at `k` with all others below. Truncated Poisson sum
/// with the inner binomial sum taken in log space.
pub fn second_highest_law(d: &BidDistribution, pm: &ParticipationModel, k: usize) -> f64 {
    let lambda = pm.lambda;
    if lambda == 0.0 {
        return 0.0;
    }
    let hi = d.cdf(k as i64);
    let lo = d.cdf(k as i64 - 1);
    let p = d.pmf(k);
    let above = 1.0 - hi;
    let top = pm.truncation();
    let ln_lambda = lambda.ln();
    let mut total = 0.0;
    for n in 2..=top {
        let nf = n as f64;
        let ln_fact = crate::dist::ln_factorial(n);
        // e^{-lambda} lambda^N / (N - 1)!
        let w1 = (-lambda + nf * ln_lambda - ln_fact + nf.ln()).exp();
        let first = w1 * above * (hi.powi(n as i32 - 1) - lo.powi(n as i32 - 1));
        let mut inner = 0.0;
        if p > 0.0 {
            for m in 2..=n {
                let rest = n - m;
                if rest > 0 && lo == 0.0 {
                    continue;
                }
                let ln_rest = if rest == 0 { 0.0 } else { rest as f64 * lo.ln() };
                let ln_binom = ln_fact - crate::dist::ln_factorial(m) - crate::dist::ln_factorial(rest);
                inner += (ln_binom + m as f64 * p.ln() + ln_rest).exp();
            }
        }
        let w2 = (-lambda + nf * ln_lambda - ln_fact).exp();
        total += first + w2 * inner;
    }
    total
}

/// Closed form of [`second_highest_law`] from the Poisson generating
/// function: `lambda (1 - F) e^{-lambda} (e^{lambda F} - e^{lambda F_-})
/// + e^{-lambda} (e^{lambda F} - e^{lambda F_-}) - lambda p e^{-lambda (1 - F_-)}`.
pub fn second_highest_law_closed(d: &BidDistribution, pm: &ParticipationModel, k: usize) -> f64 {
    let lambda = pm.lambda;
    let hi = d.cdf(k as i64);
    let lo = d.cdf(k as i64 - 1);
    let p = d.pmf(k);
    let jump = (lambda * (lo - 1.0)).exp() * (lambda * (hi - lo)).exp_m1();
    lambda * (1.0 - hi) * jump + jump - lambda * p * (lambda * (lo - 1.0)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{max_bid_pmf_summed, SampledLaplaceParams};

    fn uniform(steps: usize) -> BidDistribution {
        BidDistribution::uniform(BidGrid::from_steps(48.0, 1.0, steps).unwrap())
    }

    fn table1_laplace() -> BidDistribution {
        let g = BidGrid::new(48.0, 312.0, 1.0).unwrap();
        BidDistribution::sampled_laplace(SampledLaplaceParams::new(g, 70.0, 50.0).unwrap()).unwrap()
    }

    fn stochastic(m: &Matrix) -> bool {
        m.row_sums().iter().all(|s| (s - 1.0).abs() < 1e-9)
    }

    #[test]
    fn no_agents_gives_identity() {
        let (p, pi0) = build_first_price(&uniform(5), 0.0).unwrap();
        assert_eq!(p, Matrix::identity(6));
        assert!(pi0.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn first_price_uniform_closed_form() {
        let d = BidDistribution::uniform(BidGrid::new(48.0, 312.0, 1.0).unwrap());
        let lambda: f64 = 10.0;
        let (p, pi0) = build_first_price(&d, lambda).unwrap();
        assert!(p.is_lower_triangular() && stochastic(&p));
        for (x, y) in [(264usize, 0usize), (264, 263), (100, 37), (5, 4)] {
            let yf = y as f64;
            let expect = (-lambda).exp() * (((yf + 1.0) * lambda / 265.0).exp() - (yf * lambda / 265.0).exp());
            assert!((p[(x, y)] - expect).abs() < 1e-14);
        }
        assert!((pi0.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn first_price_laplace_uses_shifted_cdf() {
        let d = table1_laplace();
        let lambda: f64 = 5.0;
        let (p, _) = build_first_price(&d, lambda).unwrap();
        for y in [0usize, 10, 22, 23, 200] {
            let expect = (-lambda).exp() * ((lambda * d.cdf(y as i64)).exp() - (lambda * d.cdf(y as i64 - 1)).exp());
            assert!((p[(y + 1, y)] - expect).abs() < 1e-14);
        }
    }

    #[test]
    fn second_price_structure() {
        for d in [uniform(6), table1_laplace()] {
            for lambda in [0.5, 5.0, 20.0] {
                for p_b in [0.0, 0.5, 1.0] {
                    let (q, z, pi) = build_second_price(&d, lambda, p_b).unwrap();
                    assert!(q.is_lower_triangular() && z.is_lower_triangular());
                    assert!(stochastic(&q.add(&z)));
                    assert!((pi.iter().sum::<f64>() - 1.0).abs() < 1e-9);
                    assert!(pi.iter().all(|&x| x >= 0.0));
                    if p_b == 1.0 {
                        assert!(z.row_sums().iter().all(|&s| s.abs() < 1e-15));
                        assert!(stochastic(&q));
                    }
                    if p_b == 0.0 {
                        assert!(q.row_sums().iter().all(|&s| s.abs() < 1e-15));
                        let (p, _) = build_first_price(&d, lambda).unwrap();
                        assert!(z.max_abs_diff(&p) < 1e-15);
                    }
                }
            }
        }
        assert!(build_second_price(&uniform(3), 1.0, 1.5).is_err());
    }

    #[test]
    fn departure_branches_match_highest_bid_law() {
        let d = uniform(6);
        let pm = ParticipationModel::new(2.0).unwrap();
        let (_, z, _) = build_second_price(&d, 2.0, 0.3).unwrap();
        for x in 1..7 {
            for y in 0..x {
                assert!((z[(x, y)] - 0.7 * max_bid_pmf_summed(&d, &pm, y, 1)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn second_highest_law_closed_form_agrees() {
        for d in [uniform(6), uniform(264), table1_laplace()] {
            for lambda in [0.7, 5.0, 20.0] {
                let pm = ParticipationModel::new(lambda).unwrap();
                let mut total = 0.0;
                for k in 0..d.grid().len() {
                    let a = second_highest_law(&d, &pm, k);
                    let b = second_highest_law_closed(&d, &pm, k);
                    assert!((a - b).abs() < 1e-10, "lambda {lambda} k {k}: {a} vs {b}");
                    total += a;
                }
                let two_or_more = 1.0 - pm.pmf(0) - pm.pmf(1);
                assert!((total - two_or_more).abs() < 1e-10);
            }
        }
    }

    /// Enumerates every bid tuple for N = 2..N*, grouped by multiset of grid
    /// values with multinomial weights, and reads off the second-highest bid.
    fn enumerate_second_highest(d: &BidDistribution, lambda: f64) -> Vec<f64> {
        fn walk(v: usize, left: u32, counts: &mut Vec<u32>, pmf: &[f64], weight: f64, ln_n: f64, law: &mut [f64]) {
            if v == 0 {
                counts[0] = left;
                let w = weight * pmf[0].powi(left as i32) * (ln_n - crate::dist::ln_factorial(left as u64)).exp();
                let mut seen = 0u32;
                for k in (0..counts.len()).rev() {
                    seen += counts[k];
                    if seen >= 2 {
                        law[k] += w;
                        break;
                    }
                }
                return;
            }
            for c in 0..=left {
                counts[v] = c;
                let w = weight * pmf[v].powi(c as i32) / (crate::dist::ln_factorial(c as u64)).exp();
                walk(v - 1, left - c, counts, pmf, w, ln_n, law);
            }
            counts[v] = 0;
        }
        let pm = ParticipationModel::new(lambda).unwrap();
        let pmf = d.pmf_table().to_vec();
        let mut law = vec![0.0; pmf.len()];
        for n in 2..=pm.truncation() {
            let mut counts = vec![0u32; pmf.len()];
            walk(pmf.len() - 1, n as u32, &mut counts, &pmf, pm.pmf(n), crate::dist::ln_factorial(n), &mut law);
        }
        law
    }

    #[test]
    fn second_highest_law_matches_enumeration() {
        for (steps, lambda) in [(6usize, 3.0), (4, 1.0), (3, 2.0), (1, 0.5)] {
            let d = uniform(steps);
            let pm = ParticipationModel::new(lambda).unwrap();
            let law = enumerate_second_highest(&d, lambda);
            for k in 0..=steps {
                let a = second_highest_law(&d, &pm, k);
                assert!((a - law[k]).abs() < 1e-12, "L {steps} k {k}: {a} vs {}", law[k]);
            }
        }
    }

    #[test]
    fn dump_has_every_block() {
        let m = ChainModel::build(&uniform(3), 2.0, 0.5).unwrap();
        let mut buf = Vec::new();
        m.write_dump(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        for tag in ["[P]", "[Q]", "[Z]", "[pi0]", "[Pi0]"] {
            assert!(text.contains(tag));
        }
        assert_eq!(text.lines().count(), 1 + 3 * 5 + 4);
    }
}
