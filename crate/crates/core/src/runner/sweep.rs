use crate::error::Result;

use super::scenario::Scenario;
use super::single::{retention, RunControls, SweepResult};

/// How independent sweep points are scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    /// One task per point on the rayon pool (sequential without the
    /// `parallel` feature).
    Parallel,
    Sequential,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

/// `items.map(f)` with results in input order.
pub fn map_points<T, R, F>(items: &[T], exec: Execution, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            items.par_iter().map(f).collect()
        }
        _ => items.iter().map(f).collect(),
    }
}

/// Retention probability at every point.
pub fn sweep(points: &[Scenario], ctl: &RunControls, exec: Execution) -> Vec<Result<SweepResult>> {
    map_points(points, exec, |s| retention(s, ctl))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        let xs: Vec<u64> = (0..200).collect();
        let par = map_points(&xs, Execution::Parallel, |x| x * x);
        let seq = map_points(&xs, Execution::Sequential, |x| x * x);
        assert_eq!(par, seq);
        assert_eq!(par[17], 289);
    }
}
