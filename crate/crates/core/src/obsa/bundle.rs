//! End-of-patience bundle selection over the servers an agent has won.

use crate::error::{Error, Result};

/// Largest won set handled by exhaustive enumeration.
pub const MAX_BUNDLE: usize = 20;

/// Customer value of a subset of won servers, addressed by bit mask.
/// `value(0)` must be 0.
pub trait SetFunction {
    fn len(&self) -> usize;
    fn value(&self, mask: u32) -> f64;
    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Sum of per-server values.
#[derive(Debug, Clone, PartialEq)]
pub struct AdditiveValue(pub Vec<f64>);

impl SetFunction for AdditiveValue {
    fn len(&self) -> usize {
        self.0.len()
    }

    fn value(&self, mask: u32) -> f64 {
        self.0
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, v)| v)
            .sum()
    }
}

/// Arbitrary set function given as a table indexed by mask.
#[derive(Debug, Clone, PartialEq)]
pub struct TableValue {
    n: usize,
    table: Vec<f64>,
}

impl TableValue {
    pub fn new(n: usize, table: Vec<f64>) -> Result<Self> {
        if n > MAX_BUNDLE {
            return Err(Error::BundleTooLarge(n));
        }
        if table.len() != 1usize << n {
            return Err(Error::InvalidParameter {
                name: "table",
                reason: format!("expected {} entries, got {}", 1usize << n, table.len()),
            });
        }
        if table[0] != 0.0 {
            return Err(Error::InvalidParameter { name: "table", reason: "value of the empty set must be 0".into() });
        }
        Ok(Self { n, table })
    }
}

impl SetFunction for TableValue {
    fn len(&self) -> usize {
        self.n
    }

    fn value(&self, mask: u32) -> f64 {
        self.table[mask as usize]
    }
}

/// Won servers with the customer's valuation and the final matched payment
/// of each server.
#[derive(Debug, Clone, PartialEq)]
pub struct BundleValuation<V> {
    pub servers: Vec<u64>,
    pub value: V,
    pub payments: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BundleChoice {
    pub mask: u32,
    /// Kept server descriptors; the rest are returned without charge.
    pub kept: Vec<u64>,
    pub surplus: f64,
}

/// Keeps the subset maximizing value minus payments. Ties go to the larger
/// subset, then to the smaller mask.
pub fn select_bundle<V: SetFunction>(bv: &BundleValuation<V>) -> Result<BundleChoice> {
    let n = bv.value.len();
    if n > MAX_BUNDLE {
        return Err(Error::BundleTooLarge(n));
    }
    if bv.servers.len() != n || bv.payments.len() != n {
        return Err(Error::InvalidParameter {
            name: "bundle",
            reason: format!(
                "{} servers, {} payments, valuation over {n}",
                bv.servers.len(),
                bv.payments.len()
            ),
        });
    }
    let mut best_mask = 0u32;
    let mut best = 0.0;
    for m in 1u32..(1u32 << n) {
        let paid: f64 = (0..n).filter(|i| m >> i & 1 == 1).map(|i| bv.payments[i]).sum();
        let s = bv.value.value(m) - paid;
        if s > best || (s == best && m.count_ones() > best_mask.count_ones()) {
            best = s;
            best_mask = m;
        }
    }
    let kept = (0..n).filter(|i| best_mask >> i & 1 == 1).map(|i| bv.servers[i]).collect();
    Ok(BundleChoice { mask: best_mask, kept, surplus: best })
}
