//! Index-parallel map used by the k-sweeps.
//!
//! With the `parallel` feature (default) [`Schedule::Parallel`] runs on the
//! current rayon pool; without it every schedule is sequential. Results are
//! always returned in index order, so downstream reductions see identical
//! inputs whatever the worker count.

/// How a sweep distributes its independent items.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Schedule {
    Sequential,
    #[default]
    Parallel,
}

pub fn map_indexed<T, F>(count: usize, schedule: Schedule, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match schedule {
        Schedule::Sequential => (0..count).map(f).collect(),
        Schedule::Parallel => parallel_map(count, f),
    }
}

#[cfg(feature = "parallel")]
fn parallel_map<T, F>(count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..count).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn parallel_map<T, F>(count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..count).map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_schedules_preserve_order() {
        let seq = map_indexed(1000, Schedule::Sequential, |i| i * i);
        let par = map_indexed(1000, Schedule::Parallel, |i| i * i);
        assert_eq!(seq, par);
        assert_eq!(seq[31], 961);
    }
}
