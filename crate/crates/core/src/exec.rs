#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// How data-parallel loops are executed.
///
/// `Parallel` runs on the rayon global pool when the `parallel` feature is
/// enabled and silently degrades to `Sequential` otherwise. Both paths return
/// identical results: parallel maps preserve order and the reductions used
/// here (minimum with smallest-index tie-breaking) are order independent.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// True when this execution mode will actually use more than one thread.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }

    pub(crate) fn map<T, U, F>(self, items: &[T], f: F) -> Vec<U>
    where
        T: Sync,
        U: Send,
        F: Fn(usize, &T) -> U + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self == Execution::Parallel {
            return items.par_iter().enumerate().map(|(i, t)| f(i, t)).collect();
        }
        items.iter().enumerate().map(|(i, t)| f(i, t)).collect()
    }

    /// Minimum of `f` over `0..n` together with its argmin. Ties go to the
    /// smallest index; NaN values are never selected.
    pub(crate) fn argmin_range<F>(self, n: usize, f: F) -> Option<(usize, f64)>
    where
        F: Fn(usize) -> f64 + Sync + Send,
    {
        fn better(a: Option<(usize, f64)>, b: Option<(usize, f64)>) -> Option<(usize, f64)> {
            match (a, b) {
                (None, b) => b,
                (a, None) => a,
                (Some(a), Some(b)) => {
                    if b.1 < a.1 || (b.1 == a.1 && b.0 < a.0) {
                        Some(b)
                    } else {
                        Some(a)
                    }
                }
            }
        }
        let lift = |i: usize| {
            let v = f(i);
            if v.is_nan() {
                None
            } else {
                Some((i, v))
            }
        };

        #[cfg(feature = "parallel")]
        if self == Execution::Parallel {
            return (0..n)
                .into_par_iter()
                .map(lift)
                .reduce(|| None, better);
        }
        (0..n).map(lift).fold(None, better)
    }
}
