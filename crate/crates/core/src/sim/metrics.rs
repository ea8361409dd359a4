use serde::{Deserialize, Serialize};

/// Aggregate outcome of one scenario run.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MetricsReport {
    pub mean_income: f64,
    pub income_variance: f64,
    pub total_winners: u64,
    pub total_sold: u64,
    /// Participant count per time instant, when the scenario has a clock.
    pub participants: Vec<u64>,
    /// Final winner payments, one list per replication.
    pub payments: Vec<Vec<f64>>,
}

impl MetricsReport {
    pub fn all_payments(&self) -> Vec<f64> {
        self.payments.iter().flatten().copied().collect()
    }
}

/// Unbiased sample variance; `None` below two observations.
pub fn sample_variance(xs: &[f64]) -> Option<f64> {
    if xs.len() < 2 {
        return None;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    Some(xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0))
}

/// Sample variance of every winner payment in the report.
pub fn payment_variance(report: &MetricsReport) -> Option<f64> {
    sample_variance(&report.all_payments())
}

/// Mean and standard error of the mean.
pub fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    let se = sample_variance(xs).map_or(0.0, |v| (v / xs.len() as f64).sqrt());
    (mean, se)
}
