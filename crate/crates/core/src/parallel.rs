//! Sequential or data-parallel execution of independent trials.

use serde::{Deserialize, Serialize};

/// How independent trials are scheduled. Results do not depend on the choice.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Execution {
    Sequential,
    /// Rayon work stealing; falls back to sequential without the `parallel` feature.
    #[default]
    Parallel,
}

impl std::str::FromStr for Execution {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "sequential" => Ok(Self::Sequential),
            "parallel" => Ok(Self::Parallel),
            other => Err(format!("unknown execution mode {other:?} (sequential|parallel)")),
        }
    }
}

/// Maps `0..count` through `map` and folds with an associative, commutative `combine`.
pub fn map_reduce<T, I, M, C>(execution: Execution, count: u64, identity: I, map: M, combine: C) -> T
where
    T: Send,
    I: Fn() -> T + Sync + Send,
    M: Fn(u64) -> T + Sync + Send,
    C: Fn(T, T) -> T + Sync + Send,
{
    match execution {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..count).into_par_iter().map(map).reduce(identity, combine)
        }
        _ => (0..count).map(map).fold(identity(), combine),
    }
}

/// `map` over `0..count`, results in index order.
pub fn map_collect<T, M>(execution: Execution, count: u64, map: M) -> Vec<T>
where
    T: Send,
    M: Fn(u64) -> T + Sync + Send,
{
    match execution {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..count).into_par_iter().map(map).collect()
        }
        _ => (0..count).map(map).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree() {
        let f = |i: u64| i * i % 7;
        let a = map_reduce(Execution::Sequential, 10_000, || 0u64, f, |x, y| x + y);
        let b = map_reduce(Execution::Parallel, 10_000, || 0u64, f, |x, y| x + y);
        assert_eq!(a, b);
        assert_eq!(map_collect(Execution::Parallel, 100, f), map_collect(Execution::Sequential, 100, f));
    }
}
