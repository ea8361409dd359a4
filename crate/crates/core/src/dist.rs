//! Bid and participation laws on a quantized bid grid.
//!
//! Bids live on `v_min + k * delta` for `k = 0..=L`. Two bid laws are
//! supported: discrete uniform and the concatenated sampled Laplace law
//! (a Laplace density sampled on the grid and renormalized). The number of
//! agents in an auction is Poisson with mean `lambda`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tail mass left out of every truncated Poisson sum.
pub const POISSON_TAIL: f64 = 1e-12;

/// Quantized bid support `v_min, v_min + delta, ..., v_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BidGrid {
    v_min: f64,
    delta: f64,
    steps: usize,
}

impl BidGrid {
    /// Builds a grid from its end points; `v_max - v_min` must be an integer
    /// multiple of `delta`.
    pub fn new(v_min: f64, v_max: f64, delta: f64) -> Result<Self> {
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(Error::InvalidGrid(format!("delta must be positive, got {delta}")));
        }
        if !v_min.is_finite() || !v_max.is_finite() || v_max <= v_min {
            return Err(Error::InvalidGrid(format!(
                "need v_min < v_max, got [{v_min}, {v_max}]"
            )));
        }
        let span = (v_max - v_min) / delta;
        let steps = span.round();
        if (span - steps).abs() > 1e-9 * span.max(1.0) {
            return Err(Error::InvalidGrid(format!(
                "v_max - v_min = {} is not a multiple of delta = {delta}",
                v_max - v_min
            )));
        }
        Self::from_steps(v_min, delta, steps as usize)
    }

    pub fn from_steps(v_min: f64, delta: f64, steps: usize) -> Result<Self> {
        if steps < 1 {
            return Err(Error::InvalidGrid("grid needs at least one step".into()));
        }
        if !(delta > 0.0) || !delta.is_finite() || !v_min.is_finite() {
            return Err(Error::InvalidGrid(format!("bad grid origin/step ({v_min}, {delta})")));
        }
        Ok(Self { v_min, delta, steps })
    }

    pub fn v_min(&self) -> f64 {
        self.v_min
    }

    pub fn v_max(&self) -> f64 {
        self.value(self.steps)
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Number of steps `L`; the grid has `L + 1` points.
    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn len(&self) -> usize {
        self.steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn value(&self, k: usize) -> f64 {
        self.v_min + k as f64 * self.delta
    }

    /// Grid index of `value`, if it sits on the grid.
    pub fn index_of(&self, value: f64) -> Option<usize> {
        let x = (value - self.v_min) / self.delta;
        let k = x.round();
        if k < 0.0 || k > self.steps as f64 || (x - k).abs() > 1e-9 {
            None
        } else {
            Some(k as usize)
        }
    }
}

/// Parameters of a concatenated sampled Laplace law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampledLaplaceParams {
    pub grid: BidGrid,
    pub mu: f64,
    pub w: f64,
    pub beta: usize,
}

impl SampledLaplaceParams {
    /// `mu` must be a grid point.
    pub fn new(grid: BidGrid, mu: f64, w: f64) -> Result<Self> {
        if !(w > 0.0) || !w.is_finite() {
            return Err(Error::InvalidDistribution(format!("scale w must be positive, got {w}")));
        }
        let beta = grid.index_of(mu).ok_or_else(|| {
            Error::InvalidDistribution(format!(
                "location mu = {mu} is not a point of the grid [{}, {}] step {}",
                grid.v_min(),
                grid.v_max(),
                grid.delta()
            ))
        })?;
        Ok(Self { grid, mu, w, beta })
    }

    fn check(&self) -> Result<()> {
        if !(self.w > 0.0) || !self.w.is_finite() {
            return Err(Error::InvalidDistribution(format!("scale w must be positive, got {}", self.w)));
        }
        if self.beta > self.grid.steps() {
            return Err(Error::InvalidDistribution(format!(
                "beta = {} exceeds L = {}",
                self.beta,
                self.grid.steps()
            )));
        }
        Ok(())
    }
}

/// Normalizer `Gamma` of the sampled Laplace law, in closed form (two
/// geometric series around the location plus the central term).
pub fn laplace_normalizer(p: &SampledLaplaceParams) -> Result<f64> {
    p.check()?;
    let d = p.grid.delta() / p.w;
    let beta = p.beta as f64;
    let upper = (p.grid.steps() - p.beta) as f64;
    let scale = 1.0 / (2.0 * p.w);
    // Sum_{m=1..beta} e^{-m d} and Sum_{m=1..K-beta} e^{-m d}.
    let below = (-d * beta).exp() * (1.0 - (d * beta).exp()) / (1.0 - d.exp());
    let above = (-d).exp() * (1.0 - (-d * upper).exp()) / (1.0 - (-d).exp());
    Ok(scale * below + scale * above + scale)
}

/// Probability of grid index `k` under the sampled Laplace law.
pub fn laplace_pmf(p: &SampledLaplaceParams, k: usize) -> Result<f64> {
    if k > p.grid.steps() {
        return Err(Error::IndexOutOfRange { index: k as i64, max: p.grid.steps() });
    }
    let gamma = laplace_normalizer(p)?;
    let x = p.grid.value(k);
    Ok((-(x - p.mu).abs() / p.w).exp() / (2.0 * p.w * gamma))
}

/// Closed-form cdf `P(Y <= v_min + k delta)`; `k` may fall off the grid.
pub fn laplace_cdf(p: &SampledLaplaceParams, k: i64) -> f64 {
    let steps = p.grid.steps() as i64;
    if k < 0 {
        return 0.0;
    }
    if k > steps {
        return 1.0;
    }
    let gamma = match laplace_normalizer(p) {
        Ok(g) => g,
        Err(_) => return f64::NAN,
    };
    let d = p.grid.delta() / p.w;
    let beta = p.beta as i64;
    let front = 1.0 / (2.0 * p.w * gamma);
    let lead = ((p.grid.v_min() - p.mu) / p.w).exp();
    if k < beta {
        return front * lead * (1.0 - (d * (k + 1) as f64).exp()) / (1.0 - d.exp());
    }
    let left = lead * (1.0 - (d * beta as f64).exp()) / (1.0 - d.exp());
    if k == beta {
        return front * (left + 1.0);
    }
    let right = (-d).exp() * (1.0 - (-d * (k - beta) as f64).exp()) / (1.0 - (-d).exp());
    (front * (left + 1.0 + right)).min(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BidLaw {
    Uniform,
    SampledLaplace { mu: f64, w: f64 },
}

/// A bid law on a grid with its pmf and cdf tabulated.
#[derive(Debug, Clone, PartialEq)]
pub struct BidDistribution {
    grid: BidGrid,
    law: BidLaw,
    laplace: Option<SampledLaplaceParams>,
    pmf: Vec<f64>,
    cdf: Vec<f64>,
}

impl BidDistribution {
    pub fn uniform(grid: BidGrid) -> Self {
        let n = grid.len();
        let pmf = vec![1.0 / n as f64; n];
        let cdf = (0..n).map(|k| (k + 1) as f64 / n as f64).collect();
        Self { grid, law: BidLaw::Uniform, laplace: None, pmf, cdf }
    }

    pub fn sampled_laplace(params: SampledLaplaceParams) -> Result<Self> {
        params.check()?;
        let grid = params.grid;
        let pmf = (0..grid.len())
            .map(|k| laplace_pmf(&params, k))
            .collect::<Result<Vec<_>>>()?;
        let mut cdf = (0..grid.len())
            .map(|k| laplace_cdf(&params, k as i64))
            .collect::<Vec<_>>();
        cdf[grid.steps()] = 1.0;
        Ok(Self {
            grid,
            law: BidLaw::SampledLaplace { mu: params.mu, w: params.w },
            laplace: Some(params),
            pmf,
            cdf,
        })
    }

    pub fn from_law(grid: BidGrid, law: BidLaw) -> Result<Self> {
        match law {
            BidLaw::Uniform => Ok(Self::uniform(grid)),
            BidLaw::SampledLaplace { mu, w } => {
                Self::sampled_laplace(SampledLaplaceParams::new(grid, mu, w)?)
            }
        }
    }

    pub fn grid(&self) -> &BidGrid {
        &self.grid
    }

    pub fn law(&self) -> BidLaw {
        self.law
    }

    pub fn laplace(&self) -> Option<&SampledLaplaceParams> {
        self.laplace.as_ref()
    }

    pub fn pmf(&self, k: usize) -> f64 {
        self.pmf.get(k).copied().unwrap_or(0.0)
    }

    pub fn pmf_table(&self) -> &[f64] {
        &self.pmf
    }

    /// `P(bid index <= k)` with the usual conventions off the grid.
    pub fn cdf(&self, k: i64) -> f64 {
        if k < 0 {
            0.0
        } else if k as usize >= self.grid.len() {
            1.0
        } else {
            self.cdf[k as usize]
        }
    }

    /// Draws a grid index.
    pub fn sample_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        match self.law {
            BidLaw::Uniform => rng.random_range(0..self.grid.len()),
            BidLaw::SampledLaplace { .. } => {
                let u: f64 = rng.random();
                self.cdf.partition_point(|&c| c <= u).min(self.grid.steps())
            }
        }
    }

    /// Draws a bid in money units.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.grid.value(self.sample_index(rng))
    }
}

/// Poisson number of agents per auction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParticipationModel {
    pub lambda: f64,
}

impl ParticipationModel {
    pub fn new(lambda: f64) -> Result<Self> {
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidParameter {
                name: "lambda",
                reason: format!("must be a finite nonnegative mean, got {lambda}"),
            });
        }
        Ok(Self { lambda })
    }

    pub fn pmf(&self, n: u64) -> f64 {
        poisson_pmf(self.lambda, n)
    }

    /// Smallest `N*` with `P(N > N*) < POISSON_TAIL`.
    pub fn truncation(&self) -> u64 {
        poisson_truncation(self.lambda, POISSON_TAIL)
    }
}

pub fn ln_factorial(n: u64) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// `e^{-lambda} lambda^n / n!`, evaluated in log space.
pub fn poisson_pmf(lambda: f64, n: u64) -> f64 {
    if lambda == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    (-lambda + n as f64 * lambda.ln() - ln_factorial(n)).exp()
}

pub fn poisson_truncation(lambda: f64, tail: f64) -> u64 {
    if lambda == 0.0 {
        return 0;
    }
    // Walk the pmf recursively; past the mode the tail is bounded by a
    // geometric series with ratio lambda / (n + 1).
    let mut n = 0u64;
    let mut p = (-lambda).exp();
    let mut log_p = -lambda;
    let mut cum = 0.0;
    loop {
        cum += p;
        let next = n + 1;
        let ratio = lambda / (next as f64 + 1.0);
        log_p += lambda.ln() - (next as f64).ln();
        let p_next = log_p.exp();
        if next as f64 > lambda && ratio < 1.0 {
            let bound = p_next / (1.0 - ratio);
            if bound < tail {
                return n;
            }
        } else if 1.0 - cum < tail * 1e-3 && next as f64 > lambda {
            return n;
        }
        n = next;
        p = p_next;
    }
}

/// Law of the highest of a Poisson number of i.i.d. bids, evaluated at grid
/// index `y`, restricted to auctions with at least `min_bidders` agents:
/// `sum_{N >= min} P(N) [F(y)^N - F(y-1)^N]`.
///
/// Closed form: the Poisson generating function gives
/// `e^{-lambda}(e^{lambda F(y)} - e^{lambda F(y-1)})`, and the single-bidder
/// term `lambda e^{-lambda} f(y)` is removed when two bidders are required.
pub fn max_bid_pmf(d: &BidDistribution, pm: &ParticipationModel, y: usize, min_bidders: u32) -> f64 {
    let lambda = pm.lambda;
    if lambda == 0.0 || y > d.grid().steps() {
        return 0.0;
    }
    let hi = d.cdf(y as i64);
    let lo = d.cdf(y as i64 - 1);
    // e^{lambda(lo - 1)} (e^{lambda (hi - lo)} - 1)
    let mut p = (lambda * (lo - 1.0)).exp() * (lambda * (hi - lo)).exp_m1();
    match min_bidders {
        0 | 1 => {}
        2 => p -= lambda * (-lambda).exp() * (hi - lo),
        m => {
            for n in 1..m as u64 {
                p -= poisson_pmf(lambda, n) * (hi.powi(n as i32) - lo.powi(n as i32));
            }
        }
    }
    p.max(0.0)
}

/// The same law as [`max_bid_pmf`], by direct truncated summation over N.
pub fn max_bid_pmf_summed(d: &BidDistribution, pm: &ParticipationModel, y: usize, min_bidders: u32) -> f64 {
    let hi = d.cdf(y as i64);
    let lo = d.cdf(y as i64 - 1);
    let top = pm.truncation();
    (u64::from(min_bidders.max(1))..=top)
        .map(|n| pm.pmf(n) * (hi.powi(n as i32) - lo.powi(n as i32)))
        .sum()
}

/// Probability that fewer than `min_bidders` agents show up.
pub fn no_outcome_probability(pm: &ParticipationModel, min_bidders: u32) -> f64 {
    (0..u64::from(min_bidders.max(1))).map(|n| pm.pmf(n)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn table1_grid() -> BidGrid {
        BidGrid::new(48.0, 312.0, 1.0).unwrap()
    }

    fn table1_laplace() -> SampledLaplaceParams {
        SampledLaplaceParams::new(table1_grid(), 70.0, 50.0).unwrap()
    }

    #[test]
    fn grid_rejects_non_multiple_span() {
        assert!(BidGrid::new(0.0, 10.5, 1.0).is_err());
        assert!(BidGrid::new(0.0, 10.0, 0.0).is_err());
        assert!(BidGrid::new(5.0, 5.0, 1.0).is_err());
        let g = BidGrid::new(0.0, 1.0, 0.1).unwrap();
        assert_eq!(g.steps(), 10);
        assert_eq!(g.index_of(0.3), Some(3));
        assert_eq!(g.index_of(0.35), None);
    }

    #[test]
    fn laplace_rejects_bad_params() {
        let g = table1_grid();
        assert!(SampledLaplaceParams::new(g, 70.5, 50.0).is_err());
        assert!(SampledLaplaceParams::new(g, 70.0, 0.0).is_err());
        assert!(SampledLaplaceParams::new(g, 400.0, 10.0).is_err());
        let mut p = table1_laplace();
        p.beta = 999;
        assert!(laplace_normalizer(&p).is_err());
        p.beta = 22;
        p.w = -1.0;
        assert!(laplace_normalizer(&p).is_err());
    }

    #[test]
    fn normalizer_matches_direct_summation() {
        let p = table1_laplace();
        assert_eq!(p.beta, 22);
        let brute: f64 = (48..=312)
            .map(|x| (-((x as f64) - 70.0).abs() / 50.0).exp() / 100.0)
            .sum();
        let gamma = laplace_normalizer(&p).unwrap();
        assert!((gamma - brute).abs() < 1e-12 * brute, "{gamma} vs {brute}");
    }

    #[test]
    fn normalizer_symmetric_terms_equal() {
        let g = BidGrid::from_steps(0.0, 2.0, 40).unwrap();
        let p = SampledLaplaceParams::new(g, 40.0, 7.0).unwrap();
        assert_eq!(p.beta, 20);
        let d = g.delta() / p.w;
        let b = p.beta as f64;
        let below = (-d * b).exp() * (1.0 - (d * b).exp()) / (1.0 - d.exp());
        let above = (-d).exp() * (1.0 - (-d * (40.0 - b)).exp()) / (1.0 - (-d).exp());
        assert!((below - above).abs() < 1e-12);
    }

    #[test]
    fn normalizer_edge_locations() {
        let g = BidGrid::from_steps(10.0, 1.0, 12).unwrap();
        for mu in [10.0, 22.0] {
            let p = SampledLaplaceParams::new(g, mu, 3.0).unwrap();
            let total: f64 = (0..=12).map(|k| laplace_pmf(&p, k).unwrap()).sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn laplace_pmf_shape() {
        let p = table1_laplace();
        let pmf: Vec<f64> = (0..=264).map(|k| laplace_pmf(&p, k).unwrap()).collect();
        let total: f64 = pmf.iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
        let argmax = pmf
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        assert_eq!(argmax, p.beta);
        for j in 1..=22 {
            let (a, b) = (pmf[22 + j], pmf[22 - j]);
            assert!((a - b).abs() < 1e-15, "j = {j}");
        }
        assert!(laplace_pmf(&p, 265).is_err());
    }

    #[test]
    fn laplace_cdf_branches() {
        let p = table1_laplace();
        assert_eq!(laplace_cdf(&p, -1), 0.0);
        assert_eq!(laplace_cdf(&p, -50), 0.0);
        assert_eq!(laplace_cdf(&p, 265), 1.0);
        let mut running = 0.0;
        for k in 0..=264 {
            running += laplace_pmf(&p, k as usize).unwrap();
            let c = laplace_cdf(&p, k);
            assert!((c - running).abs() < 1e-12, "k = {k}: {c} vs {running}");
        }
    }

    #[test]
    fn distribution_tables_are_proper() {
        for d in [
            BidDistribution::uniform(table1_grid()),
            BidDistribution::sampled_laplace(table1_laplace()).unwrap(),
        ] {
            let total: f64 = d.pmf_table().iter().sum();
            assert!((total - 1.0).abs() < 1e-12);
            for k in 0..264 {
                assert!(d.cdf(k + 1) >= d.cdf(k));
            }
            assert_eq!(d.cdf(264), 1.0);
        }
    }

    #[test]
    fn poisson_pmf_edges() {
        assert_eq!(poisson_pmf(0.0, 0), 1.0);
        assert_eq!(poisson_pmf(0.0, 3), 0.0);
        let direct = (-93.0f64 + 93.0 * 93.0f64.ln() - statrs::function::gamma::ln_gamma(94.0)).exp();
        let ours = poisson_pmf(93.0, 93);
        assert!(((ours - direct) / direct).abs() < 1e-12, "{ours} vs {direct}");
    }

    #[test]
    fn truncation_bounds_tail() {
        for lambda in [0.5, 2.0, 10.0, 20.0, 93.0] {
            let top = poisson_truncation(lambda, POISSON_TAIL);
            let head: f64 = (0..=top).map(|n| poisson_pmf(lambda, n)).sum();
            assert!(1.0 - head < 1e-11, "lambda {lambda}: tail {}", 1.0 - head);
        }
        assert_eq!(poisson_truncation(0.0, POISSON_TAIL), 0);
    }

    #[test]
    fn max_bid_with_no_agents_is_zero() {
        let d = BidDistribution::uniform(table1_grid());
        let pm = ParticipationModel::new(0.0).unwrap();
        for y in 0..=264 {
            assert_eq!(max_bid_pmf(&d, &pm, y, 1), 0.0);
        }
    }

    #[test]
    fn max_bid_uniform_closed_form() {
        let g = table1_grid();
        let d = BidDistribution::uniform(g);
        let lambda = 10.0;
        let pm = ParticipationModel::new(lambda).unwrap();
        let n = 265.0;
        for y in [0usize, 1, 50, 200, 264] {
            let yf = y as f64;
            let expect = (-lambda).exp() * (((yf + 1.0) * lambda / n).exp() - (yf * lambda / n).exp());
            let got = max_bid_pmf(&d, &pm, y, 1);
            assert!((got - expect).abs() < 1e-14, "y = {y}");
        }
    }

    #[test]
    fn max_bid_closed_form_matches_summation() {
        let grids = [table1_grid(), BidGrid::from_steps(0.0, 1.0, 5).unwrap()];
        for g in grids {
            let mut dists = vec![BidDistribution::uniform(g)];
            if g.steps() == 264 {
                dists.push(BidDistribution::sampled_laplace(table1_laplace()).unwrap());
            }
            for d in &dists {
                for lambda in [0.3, 5.0, 20.0] {
                    let pm = ParticipationModel::new(lambda).unwrap();
                    for min in [1, 2] {
                        let mut total = no_outcome_probability(&pm, min);
                        for y in 0..=g.steps() {
                            let a = max_bid_pmf(d, &pm, y, min);
                            let b = max_bid_pmf_summed(d, &pm, y, min);
                            assert!((a - b).abs() < 1e-10, "lambda {lambda} min {min} y {y}");
                            total += a;
                        }
                        assert!((total - 1.0).abs() < 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn max_bid_laplace_matches_unnormalized_form() {
        // e^{-lambda}[e^{lambda S(y) / (2 w Gamma)} - e^{lambda S(y-1) / (2 w Gamma)}]
        // with S the running sum of unnormalized Laplace weights.
        let p = table1_laplace();
        let d = BidDistribution::sampled_laplace(p).unwrap();
        let gamma = laplace_normalizer(&p).unwrap();
        let lambda = 7.0;
        let pm = ParticipationModel::new(lambda).unwrap();
        let mut s_prev = 0.0;
        for y in 0..=264usize {
            let s = s_prev + (-((48 + y) as f64 - 70.0).abs() / 50.0).exp();
            let expect = (-lambda).exp()
                * ((lambda * s / (100.0 * gamma)).exp() - (lambda * s_prev / (100.0 * gamma)).exp());
            let got = max_bid_pmf(&d, &pm, y, 1);
            assert!((got - expect).abs() < 1e-12, "y = {y}");
            s_prev = s;
        }
    }

    #[test]
    fn max_bid_matches_monte_carlo() {
        let g = BidGrid::from_steps(0.0, 1.0, 6).unwrap();
        let p = SampledLaplaceParams::new(g, 2.0, 1.5).unwrap();
        let d = BidDistribution::sampled_laplace(p).unwrap();
        let lambda = 2.5;
        let pm = ParticipationModel::new(lambda).unwrap();
        let pois = rand_distr::Poisson::new(lambda).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let draws = 1_000_000;
        let mut counts = [0u64; 7];
        for _ in 0..draws {
            let n: f64 = rand_distr::Distribution::sample(&pois, &mut rng);
            let mut best: Option<usize> = None;
            for _ in 0..n as u64 {
                let b = d.sample_index(&mut rng);
                best = Some(best.map_or(b, |m| m.max(b)));
            }
            if let Some(m) = best {
                counts[m] += 1;
            }
        }
        for y in 0..=6 {
            let p_hat = counts[y] as f64 / draws as f64;
            let p = max_bid_pmf(&d, &pm, y, 1);
            let se = (p * (1.0 - p) / draws as f64).sqrt();
            assert!((p_hat - p).abs() < 3.0 * se.max(1e-9), "y {y}: {p_hat} vs {p}");
        }
    }

    proptest::proptest! {
        #[test]
        fn sampled_laplace_is_a_distribution(steps in 1usize..60, beta_frac in 0.0f64..=1.0, w in 0.2f64..80.0, delta in 0.1f64..5.0) {
            let g = BidGrid::from_steps(3.0, delta, steps).unwrap();
            let beta = ((steps as f64) * beta_frac).round() as usize;
            let p = SampledLaplaceParams::new(g, g.value(beta), w).unwrap();
            let d = BidDistribution::sampled_laplace(p).unwrap();
            let total: f64 = d.pmf_table().iter().sum();
            proptest::prop_assert!((total - 1.0).abs() < 1e-12);
            let mut run = 0.0;
            for k in 0..=steps {
                run += d.pmf(k);
                proptest::prop_assert!((laplace_cdf(&p, k as i64) - run).abs() < 1e-12);
            }
        }
    }
}
