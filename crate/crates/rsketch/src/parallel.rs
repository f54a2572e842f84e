//! Scoped-thread helpers whose output never depends on the worker count beyond
//! floating-point re-association in the merge.

use std::thread;

use rsketch_core::{LshEnsembleSpec, Projection, RepresenterSketch, WeightedPoint};

use crate::error::Result;

/// Builds one partial sketch per contiguous partition of `points` and merges
/// them in partition order.
pub fn build_sketch(
    points: &[WeightedPoint],
    spec: LshEnsembleSpec,
    projection: Option<Projection>,
    threads: usize,
) -> Result<RepresenterSketch> {
    let mut sketch = RepresenterSketch::with_projection(spec, projection)?;
    let threads = threads.max(1).min(points.len().max(1));
    if threads == 1 {
        sketch.extend(points)?;
        return Ok(sketch);
    }
    let chunk = points.len().div_ceil(threads);
    let template = sketch.clone();
    let partials: Vec<rsketch_core::Result<RepresenterSketch>> = thread::scope(|s| {
        let handles: Vec<_> = points
            .chunks(chunk)
            .map(|part| {
                let mut local = template.clone();
                s.spawn(move || local.extend(part).map(|()| local))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("sketch worker panicked")).collect()
    });
    for part in partials {
        sketch.merge_from(&part?)?;
    }
    Ok(sketch)
}

/// `items.map(f)` over contiguous chunks on up to `threads` workers, preserving order.
pub fn map<T, U, F>(items: &[T], threads: usize, f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync,
{
    let threads = threads.max(1).min(items.len().max(1));
    if threads == 1 {
        return items.iter().map(f).collect();
    }
    let chunk = items.len().div_ceil(threads);
    let f = &f;
    thread::scope(|s| {
        let handles: Vec<_> = items
            .chunks(chunk)
            .map(|part| s.spawn(move || part.iter().map(f).collect::<Vec<U>>()))
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("worker panicked"))
            .collect()
    })
}

/// Worker count for `--threads 0`.
pub fn available_threads() -> usize {
    thread::available_parallelism().map_or(1, |n| n.get())
}
