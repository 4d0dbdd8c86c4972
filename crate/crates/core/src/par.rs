//! Execution strategy switch. With the `parallel` feature, heavy loops run on the rayon pool;
//! without it, or when `Execution::Sequential` is requested, they run on the calling thread.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// Whether parallel execution is both requested and compiled in.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// Maps `f` over `items`, preserving order.
pub fn map<T, U, F>(exec: Execution, items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if exec.is_parallel() && items.len() > 1 {
            use rayon::prelude::*;
            return items.par_iter().map(f).collect();
        }
    }
    let _ = exec;
    items.iter().map(f).collect()
}

/// Maps `f` over `items` and concatenates the results in order.
pub fn flat_map<T, U, F>(exec: Execution, items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> Vec<U> + Sync + Send,
{
    map(exec, items, f).into_iter().flatten().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_strategies_agree() {
        let items: Vec<u64> = (0..1000).collect();
        let a = map(Execution::Sequential, &items, |x| x * x);
        let b = map(Execution::Parallel, &items, |x| x * x);
        assert_eq!(a, b);
        let c = flat_map(Execution::Parallel, &items, |&x| vec![x; (x % 3) as usize]);
        let d = flat_map(Execution::Sequential, &items, |&x| {
            vec![x; (x % 3) as usize]
        });
        assert_eq!(c, d);
    }
}
