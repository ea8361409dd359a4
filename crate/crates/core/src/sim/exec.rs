use serde::{Deserialize, Serialize};

/// How independent replications are executed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Exec {
    Sequential,
    /// Data-parallel over replications; falls back to sequential when the
    /// `parallel` feature is off.
    #[default]
    Parallel,
}

/// Evaluates `f(0..n)` and returns the results in index order.
pub fn map_reps<T, F>(exec: Exec, n: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    match exec {
        Exec::Sequential => (0..n).map(f).collect(),
        Exec::Parallel => parallel(n, f),
    }
}

#[cfg(feature = "parallel")]
fn parallel<T: Send, F: Fn(u64) -> T + Sync + Send>(n: u64, f: F) -> Vec<T> {
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn parallel<T: Send, F: Fn(u64) -> T + Sync + Send>(n: u64, f: F) -> Vec<T> {
    (0..n).map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree_in_order() {
        let f = |i: u64| crate::rng::replication_seed(3, i);
        assert_eq!(map_reps(Exec::Sequential, 1000, f), map_reps(Exec::Parallel, 1000, f));
    }
}
