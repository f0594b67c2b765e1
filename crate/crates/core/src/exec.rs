//! Execution policy for the data-parallel loops.
//!
//! Every parallel region in the crate is a loop over a fixed number of
//! independent tasks (workers, matrix row chunks, preconditioner blocks).
//! `ExecPolicy` decides whether those tasks run on the rayon pool or on the
//! calling thread. Results are collected in task order, so sequential and
//! parallel execution produce bitwise identical output.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// How independent tasks are driven.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Execution {
    /// One task after another on the calling thread.
    Sequential,
    /// Tasks run on the rayon thread pool. Without the `parallel` feature
    /// this degrades to sequential execution.
    #[default]
    Parallel,
}

/// Worker count plus execution mode, carried by partitions and solvers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExecPolicy {
    pub workers: usize,
    pub mode: Execution,
}

impl ExecPolicy {
    pub fn sequential() -> Self {
        ExecPolicy { workers: 1, mode: Execution::Sequential }
    }

    pub fn parallel(workers: usize) -> Self {
        ExecPolicy { workers: workers.max(1), mode: Execution::Parallel }
    }

    /// Run `tasks` closures indexed 0..tasks, collecting results in index order.
    pub(crate) fn run<T, F>(&self, tasks: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.mode == Execution::Parallel && tasks > 1 {
            return (0..tasks).into_par_iter().map(f).collect();
        }
        (0..tasks).map(f).collect()
    }

    /// Split `len` items into one contiguous range per worker, first ranges
    /// one longer when the division is uneven.
    pub(crate) fn chunk_ranges(&self, len: usize) -> Vec<std::ops::Range<usize>> {
        split_ranges(len, self.workers)
    }
}

impl Default for ExecPolicy {
    fn default() -> Self {
        ExecPolicy { workers: 1, mode: Execution::default() }
    }
}

/// Contiguous near-equal ranges covering 0..len.
pub(crate) fn split_ranges(len: usize, parts: usize) -> Vec<std::ops::Range<usize>> {
    let parts = parts.max(1).min(len.max(1));
    let base = len / parts;
    let extra = len % parts;
    let mut out = Vec::with_capacity(parts);
    let mut start = 0;
    for p in 0..parts {
        let size = base + usize::from(p < extra);
        out.push(start..start + size);
        start += size;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges_cover_and_balance() {
        let r = split_ranges(10, 3);
        assert_eq!(r, vec![0..4, 4..7, 7..10]);
        let r = split_ranges(4, 8);
        assert_eq!(r.len(), 4);
    }

    #[test]
    fn run_is_ordered() {
        let out = ExecPolicy::parallel(4).run(16, |i| i * i);
        assert_eq!(out, (0..16).map(|i| i * i).collect::<Vec<_>>());
    }
}
