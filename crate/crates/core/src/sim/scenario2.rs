//! Stage-two bid curves over a sweep of time preferences.

use crate::error::{Error, Result};
use crate::hjb::{solve_second_price_curve, BidCurve, StageTwoParams};

#[derive(Debug, Clone)]
pub struct Scenario2Report {
    /// One curve per gamma, in the order given.
    pub curves: Vec<BidCurve>,
    /// Every curve is nonincreasing in r.
    pub decreasing: bool,
    /// For each pair with gamma1 < gamma2, the gamma2 curve lies at or below
    /// the gamma1 curve at every grid point.
    pub ordered: bool,
}

/// Solves the stage-two ODE for each gamma on a shared step `h`.
pub fn run_scenario2(base: &StageTwoParams, gammas: &[f64], h: f64) -> Result<Scenario2Report> {
    if gammas.is_empty() {
        return Err(Error::InvalidConfig("gamma sweep must be nonempty".into()));
    }
    let curves = gammas
        .iter()
        .map(|&gamma| {
            solve_second_price_curve(&base.with_gamma(gamma), h).map_err(|e| Error::Sweep { gamma, source: Box::new(e) })
        })
        .collect::<Result<Vec<_>>>()?;
    let decreasing = curves.iter().all(|c| c.values.windows(2).all(|w| w[1] <= w[0]));
    let mut ordered = true;
    for (i, a) in curves.iter().enumerate() {
        for b in &curves[i + 1..] {
            let (lo, hi) = if a.params.gamma < b.params.gamma { (a, b) } else { (b, a) };
            ordered &= hi.values.iter().zip(&lo.values).all(|(h, l)| h <= l);
        }
    }
    Ok(Scenario2Report { curves, decreasing, ordered })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table2_sweep_is_decreasing_and_ordered() {
        let p = StageTwoParams::table2();
        let rep = run_scenario2(&p, &[0.05, 0.1, 0.2], p.tp / 400.0).unwrap();
        assert!(rep.decreasing && rep.ordered);
        for c in &rep.curves {
            assert_eq!(c.values[0], p.varpi);
        }
    }

    #[test]
    fn small_gamma_first_price_curve_is_flat() {
        let p = StageTwoParams::table2().with_gamma(1e-9);
        let b = crate::hjb::first_price_bid(&p, p.tp).unwrap();
        assert!((p.varpi - b) / p.varpi < 1e-7, "{b}");
    }

    #[test]
    fn small_gamma_second_price_curve_rises_and_is_rejected() {
        let p = StageTwoParams::table2();
        let err = run_scenario2(&p, &[1e-6], p.tp / 200.0).unwrap_err();
        assert!(matches!(err, Error::Sweep { source, .. } if matches!(*source, Error::CurveOutOfRange { .. })));
    }

    #[test]
    fn failures_carry_gamma() {
        let p = StageTwoParams::table2();
        assert!(matches!(run_scenario2(&p, &[0.1], 0.3), Err(Error::Sweep { gamma, .. }) if gamma == 0.1));
    }
}
