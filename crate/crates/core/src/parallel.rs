//! Deterministic chunked scans with private accumulators.

/// Splits `0..n` into at most `parts` contiguous ranges.
fn partition(n: usize, parts: usize) -> Vec<std::ops::Range<usize>> {
    let parts = parts.clamp(1, n.max(1));
    let chunk = n.div_ceil(parts).max(1);
    (0..n).step_by(chunk).map(|s| s..(s + chunk).min(n)).collect()
}

/// Runs `work` over partitions of the items, each into a private delta
/// buffer of length `len`, and sums the buffers in partition order.
pub(crate) fn scan_partitioned<F>(cells: usize, threads: usize, len: usize, work: F) -> Vec<i64>
where
    F: Fn(std::ops::Range<usize>, &mut [i64]) + Sync,
{
    let ranges = partition(cells, threads);
    if ranges.len() <= 1 {
        let mut delta = vec![0i64; len];
        work(0..cells, &mut delta);
        return delta;
    }
    let partials: Vec<Vec<i64>> = std::thread::scope(|scope| {
        let handles: Vec<_> = ranges
            .into_iter()
            .map(|range| {
                let work = &work;
                scope.spawn(move || {
                    let mut delta = vec![0i64; len];
                    work(range, &mut delta);
                    delta
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("scan worker panicked"))
            .collect()
    });
    let mut total = vec![0i64; len];
    for part in &partials {
        for (acc, v) in total.iter_mut().zip(part) {
            *acc += v;
        }
    }
    total
}
