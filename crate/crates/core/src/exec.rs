//! Execution lanes for data-parallel sweeps.
//!
//! Scans map an evaluation over a flat list of sample points.  With the
//! default `parallel` feature the work is spread over a rayon pool; without
//! it the same call degrades to a sequential loop.  Both lanes preserve input
//! order in the output, so results are deterministic either way.  `seq_map`
//! is always sequential, kept as the comparison baseline for benchmarks.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Map `f` over `items`, in parallel when the `parallel` feature is enabled.
/// Output order matches input order in both lanes.
pub fn par_map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(&f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(&f).collect()
    }
}

/// Always-sequential map with the same signature as [`par_map`]; the
/// benchmark baseline.
pub fn seq_map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    F: Fn(&T) -> U,
{
    items.iter().map(f).collect()
}

/// Request a global worker count for the parallel lane.  Returns true when
/// the request took effect; false when the pool was already built or the
/// parallel lane is compiled out (the sequential lane ignores thread counts).
pub fn set_threads(n: usize) -> bool {
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .is_ok()
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = n;
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_lanes_preserve_order() {
        let items: Vec<i64> = (0..1000).collect();
        let sq = |x: &i64| x * x;
        let a = par_map(&items, sq);
        let b = seq_map(&items, sq);
        assert_eq!(a, b);
        assert_eq!(a[37], 37 * 37);
    }
}
