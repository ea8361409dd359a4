//! Stage-two bid curves of a cloud-of-clouds manager buying provider capacity.
//!
//! A manager with residual participation time `r` bids
//! `b(r) = e^{-gamma r} u - D(r)` and falls back to the flat price `varpi`
//! when the window closes, so `b(0) = varpi` and `D(0) = u - varpi`.
//! Under first-price payments the curve is `varpi e^{-gamma r}`. Under
//! second-price payments with reciprocal bid and offer laws the curve solves
//! a first-order ODE, integrated here with fixed-step RK4.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StageTwoParams {
    pub u: f64,
    pub gamma: f64,
    pub varpi: f64,
    pub mu_active: f64,
    pub lambda_a: f64,
    pub lambda_ccn: f64,
    pub lambda_cp: f64,
    pub tp: f64,
    pub a: f64,
    pub z: f64,
    pub q: f64,
}

impl StageTwoParams {
    pub const DEFAULT_VARPI: f64 = 312.0;
    pub const DEFAULT_TP: f64 = 20.0;
    pub const DEFAULT_GAMMA: f64 = 0.1;

    /// Table 2 market with the defaults for the unspecified `varpi`, `Tp`,
    /// `gamma` and `q = a`.
    pub fn table2() -> Self {
        Self {
            u: 5.0,
            gamma: Self::DEFAULT_GAMMA,
            varpi: Self::DEFAULT_VARPI,
            mu_active: 0.6,
            lambda_a: 0.2,
            lambda_ccn: 0.5,
            lambda_cp: 0.75,
            tp: Self::DEFAULT_TP,
            a: 0.01,
            z: 104.0,
            q: 0.01,
        }
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |name: &'static str, reason: String| Err(Error::InvalidParameter { name, reason });
        let fields = [
            self.u,
            self.gamma,
            self.varpi,
            self.mu_active,
            self.lambda_a,
            self.lambda_ccn,
            self.lambda_cp,
            self.tp,
            self.a,
            self.z,
            self.q,
        ];
        if fields.iter().any(|x| !x.is_finite()) {
            return bad("stage-two parameters", "all values must be finite".into());
        }
        if !(0.0 < self.a && self.a < self.z && self.z < self.varpi) {
            return bad("a, z, varpi", format!("need 0 < a < z < varpi, got {} {} {}", self.a, self.z, self.varpi));
        }
        if !(0.0 < self.q && self.q < self.z) {
            return bad("q", format!("need 0 < q < z, got {}", self.q));
        }
        if self.gamma < 0.0 {
            return bad("gamma", format!("must be >= 0, got {}", self.gamma));
        }
        if self.lambda_a < 0.0 || self.lambda_ccn < 0.0 || self.lambda_cp < 0.0 {
            return bad("lambda", "arrival means must be >= 0".into());
        }
        if !(0.0..=1.0).contains(&self.mu_active) {
            return bad("mu_active", format!("must lie in [0, 1], got {}", self.mu_active));
        }
        if self.tp <= 0.0 {
            return bad("tp", format!("must be > 0, got {}", self.tp));
        }
        Ok(())
    }

    fn bid_law(&self) -> ReciprocalLaw {
        ReciprocalLaw { lo: self.a, hi: self.z }
    }

    fn offer_law(&self) -> ReciprocalLaw {
        ReciprocalLaw { lo: self.q, hi: self.z }
    }
}

/// Law on `[lo, hi]` with density proportional to `1/x`. Evaluated past
/// `hi` by analytic continuation of the same formulas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReciprocalLaw {
    pub lo: f64,
    pub hi: f64,
}

impl ReciprocalLaw {
    pub fn span(&self) -> f64 {
        self.hi.ln() - self.lo.ln()
    }

    pub fn cdf(&self, x: f64) -> f64 {
        (x.ln() - self.lo.ln()) / self.span()
    }

    pub fn pdf(&self, x: f64) -> f64 {
        1.0 / (x * self.span())
    }
}

pub fn first_price_bid(p: &StageTwoParams, r: f64) -> Result<f64> {
    check_r(p, r)?;
    Ok(p.varpi * (-p.gamma * r).exp())
}

pub fn first_price_utility(p: &StageTwoParams, r: f64) -> Result<f64> {
    check_r(p, r)?;
    Ok((p.u - p.varpi) * (-p.gamma * r).exp())
}

fn check_r(p: &StageTwoParams, r: f64) -> Result<()> {
    if !(0.0..=p.tp).contains(&r) {
        return Err(Error::InvalidParameter { name: "r", reason: format!("must lie in [0, {}], got {r}", p.tp) });
    }
    Ok(())
}

/// Constants of `y' + c1 y^c2 + c3 y^c4 + c5 y^c6 + c7 y = -gamma u e^{-gamma r}
/// + kappa (1 - h y^beta)`.
///
/// With `Lb = ln z - ln a`, `Lo = ln z - ln q`, `alpha = lambda_ccn / Lb`,
/// `beta = lambda_cp / Lo`, `A = e^{-lambda_ccn} a^{-alpha}` and
/// `h = e^{-lambda_cp} q^{-beta}`, the second-price integro-differential
/// equation reduces to `c1 = mu lambda_A A h (lambda_ccn / (lambda_ccn + Lb) - 1)`,
/// `c2 = alpha + beta + 1`, `c3 = 0`, `c4 = beta + 1`,
/// `c5 = mu lambda_A A (1 - lambda_ccn / (lambda_ccn + Lb))`,
/// `c6 = alpha + 1`, `c7 = gamma`. `kappa` collects the lower limit
/// `b(T) = a` of the payment integral and vanishes as `a -> 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OdeConstants {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub c5: f64,
    pub c6: f64,
    pub c7: f64,
    pub kappa: f64,
    pub h: f64,
    pub beta: f64,
}

pub fn ode_constants(p: &StageTwoParams) -> Result<OdeConstants> {
    p.validate()?;
    let lb = p.bid_law().span();
    let lo = p.offer_law().span();
    if lb <= 0.0 || lo <= 0.0 {
        return Err(Error::InvalidParameter { name: "z", reason: "support logs are degenerate".into() });
    }
    let ml = p.mu_active * p.lambda_a;
    let alpha = p.lambda_ccn / lb;
    let beta = p.lambda_cp / lo;
    let big_a = (-p.lambda_ccn - alpha * p.a.ln()).exp();
    let h = (-p.lambda_cp - beta * p.q.ln()).exp();
    let share = p.lambda_ccn / (p.lambda_ccn + lb);
    let kappa = ml * ((-p.lambda_ccn).exp() * p.a - share * big_a * p.a.powf(alpha + 1.0));
    Ok(OdeConstants {
        c1: ml * big_a * h * (share - 1.0),
        c2: alpha + beta + 1.0,
        c3: 0.0,
        c4: beta + 1.0,
        c5: ml * big_a * (1.0 - share),
        c6: alpha + 1.0,
        c7: p.gamma,
        kappa,
        h,
        beta,
    })
}

fn rhs(p: &StageTwoParams, k: &OdeConstants, r: f64, y: f64) -> f64 {
    let y = y.max(0.0);
    -p.gamma * p.u * (-p.gamma * r).exp()
        - k.c1 * y.powf(k.c2)
        - k.c3 * y.powf(k.c4)
        - k.c5 * y.powf(k.c6)
        - k.c7 * y
        + k.kappa * (1.0 - k.h * y.powf(k.beta))
}

/// Bid curve sampled at `r = i * step`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BidCurve {
    pub step: f64,
    pub values: Vec<f64>,
    pub params: StageTwoParams,
    /// First residual time at which the solution crossed zero; the curve is
    /// held at 0 from there on.
    pub clamped_at: Option<f64>,
}

impl BidCurve {
    pub fn from_values(params: StageTwoParams, step: f64, values: Vec<f64>) -> Self {
        Self { step, values, params, clamped_at: None }
    }

    pub fn r(&self, i: usize) -> f64 {
        i as f64 * self.step
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Two-column text `r b(r)`.
    pub fn write_columns<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "r,bid")?;
        for (i, b) in self.values.iter().enumerate() {
            writeln!(w, "{},{}", self.r(i), b)?;
        }
        Ok(())
    }
}

fn grid_steps(p: &StageTwoParams, h: f64) -> Result<usize> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidParameter { name: "h", reason: format!("must be > 0, got {h}") });
    }
    let n = (p.tp / h).round();
    if n < 1.0 || (n * h - p.tp).abs() > 1e-9 * p.tp {
        return Err(Error::InvalidParameter { name: "h", reason: format!("{h} does not divide Tp = {}", p.tp) });
    }
    Ok(n as usize)
}

/// Integrates the second-price ODE from `y(0) = varpi` to `r = Tp` with
/// classical RK4.
pub fn solve_second_price_curve(p: &StageTwoParams, h: f64) -> Result<BidCurve> {
    let k = ode_constants(p)?;
    let n = grid_steps(p, h)?;
    let mut values = Vec::with_capacity(n + 1);
    values.push(p.varpi);
    let mut y = p.varpi;
    let mut clamped_at = None;
    for i in 0..n {
        let r = i as f64 * h;
        if clamped_at.is_some() {
            values.push(0.0);
            continue;
        }
        let k1 = rhs(p, &k, r, y);
        let k2 = rhs(p, &k, r + h / 2.0, y + h / 2.0 * k1);
        let k3 = rhs(p, &k, r + h / 2.0, y + h / 2.0 * k2);
        let k4 = rhs(p, &k, r + h, y + h * k3);
        y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        let r_next = (i + 1) as f64 * h;
        if !y.is_finite() {
            return Err(Error::NonFinite { r: r_next });
        }
        if y > p.varpi * (1.0 + 1e-12) {
            return Err(Error::CurveOutOfRange { r: r_next, value: y });
        }
        if y < 0.0 {
            log::warn!("bid curve crossed zero at r = {r_next}; holding it at 0");
            clamped_at = Some(r_next);
            y = 0.0;
        }
        values.push(y);
    }
    Ok(BidCurve { step: h, values, params: *p, clamped_at })
}

/// `(varpi - gamma u r) e^{-gamma r}`, the curve when no auction is ever
/// held (`mu lambda_A = 0`).
pub fn reduced_closed_form(p: &StageTwoParams, r: f64) -> f64 {
    (p.varpi - p.gamma * p.u * r) * (-p.gamma * r).exp()
}

/// `D_i = e^{-gamma r_i} u - b_i`.
pub fn expected_utility_curve(p: &StageTwoParams, curve: &BidCurve) -> Vec<f64> {
    curve
        .values
        .iter()
        .enumerate()
        .map(|(i, b)| (-p.gamma * curve.r(i)).exp() * p.u - b)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub r: f64,
    pub value: f64,
    /// The derivative used a one-sided difference (curve end point).
    pub one_sided: bool,
}

/// Fourth-order differences: centered in the interior, skewed next to the
/// ends, one-sided at the ends.
fn derivative(v: &[f64], h: f64, i: usize) -> (f64, bool) {
    let n = v.len() - 1;
    let d = 12.0 * h;
    if i == 0 {
        ((-25.0 * v[0] + 48.0 * v[1] - 36.0 * v[2] + 16.0 * v[3] - 3.0 * v[4]) / d, true)
    } else if i == n {
        ((25.0 * v[n] - 48.0 * v[n - 1] + 36.0 * v[n - 2] - 16.0 * v[n - 3] + 3.0 * v[n - 4]) / d, true)
    } else if i == 1 {
        ((-3.0 * v[0] - 10.0 * v[1] + 18.0 * v[2] - 6.0 * v[3] + v[4]) / d, false)
    } else if i == n - 1 {
        ((3.0 * v[n] + 10.0 * v[n - 1] - 18.0 * v[n - 2] + 6.0 * v[n - 3] - v[n - 4]) / d, false)
    } else {
        ((-v[i + 2] + 8.0 * v[i + 1] - 8.0 * v[i - 1] + v[i - 2]) / d, false)
    }
}

/// Payment integrand `e^{lambda_ccn (F(x) - 1)} x F'(x)`.
fn payment_density(p: &StageTwoParams, x: f64) -> f64 {
    let f = p.bid_law();
    (p.lambda_ccn * (f.cdf(x) - 1.0)).exp() * x * f.pdf(x)
}

/// `int_a^{b_i} payment_density` for every curve point: a fine geometric
/// trapezoid from `a` to the curve's last value, then trapezoids between
/// consecutive curve values.
fn payment_integrals(curve: &BidCurve) -> Vec<f64> {
    let p = &curve.params;
    let v = &curve.values;
    let n = v.len() - 1;
    let end = v[n];
    let mut base = 0.0;
    if end > p.a {
        let m = 20_000;
        let ratio = (end / p.a).powf(1.0 / m as f64);
        let mut x0 = p.a;
        let mut g0 = payment_density(p, x0);
        for k in 1..=m {
            let x1 = if k == m { end } else { x0 * ratio };
            let g1 = payment_density(p, x1);
            base += 0.5 * (g0 + g1) * (x1 - x0);
            x0 = x1;
            g0 = g1;
        }
    }
    let mut out = vec![0.0; n + 1];
    out[n] = base;
    for i in (0..n).rev() {
        out[i] = out[i + 1] + 0.5 * (payment_density(p, v[i]) + payment_density(p, v[i + 1])) * (v[i] - v[i + 1]);
    }
    out
}

fn residual_at(curve: &BidCurve, integrals: &[f64], i: usize) -> Residual {
    let p = &curve.params;
    let v = &curve.values;
    let b = v[i];
    let r = curve.r(i);
    let (db, one_sided) = derivative(v, curve.step, i);
    let ml = p.mu_active * p.lambda_a;
    let win = (p.lambda_ccn * (p.bid_law().cdf(b) - 1.0)).exp();
    let supply = 1.0 - (p.lambda_cp * (p.offer_law().cdf(b) - 1.0)).exp();
    let value = b * (-p.gamma - ml * win * supply) - db
        + ml * p.lambda_ccn * supply * integrals[i]
        + ml * supply * (-p.lambda_ccn).exp() * p.a
        - p.gamma * p.u * (-p.gamma * r).exp();
    Residual { r, value, one_sided }
}

/// Residual of the second-price integro-differential equation at grid
/// point `r`, with `b'` by finite differences and the payment integral by
/// trapezoids along the curve.
pub fn integro_diff_residual(curve: &BidCurve, r: f64) -> Result<Residual> {
    if curve.len() < 5 {
        return Err(Error::InvalidParameter { name: "curve", reason: "needs at least 5 points".into() });
    }
    let x = r / curve.step;
    let i = x.round();
    if i < 0.0 || i as usize >= curve.len() || (x - i).abs() > 1e-9 {
        return Err(Error::InvalidParameter { name: "r", reason: format!("{r} is not a grid point of the curve") });
    }
    Ok(residual_at(curve, &payment_integrals(curve), i as usize))
}

/// Largest absolute residual over interior grid points.
pub fn max_interior_residual(curve: &BidCurve) -> f64 {
    let integrals = payment_integrals(curve);
    (1..curve.len() - 1)
        .map(|i| residual_at(curve, &integrals, i).value.abs())
        .fold(0.0, f64::max)
}
