//! Engine-wide tuning knobs.
//!
//! Parallel operators bucket work by key hash into this many partitions.
//! Results are canonically sorted after the parallel phase, so every setting
//! produces identical output; the knob only shifts scheduling.

use std::sync::atomic::{AtomicUsize, Ordering};

static PARTITIONS: AtomicUsize = AtomicUsize::new(0);

/// Current partition count. Defaults to the rayon thread count.
pub fn partitions() -> usize {
    match PARTITIONS.load(Ordering::Relaxed) {
        0 => rayon::current_num_threads().max(1),
        n => n,
    }
}

/// Overrides the partition count; `0` restores the default.
pub fn set_partitions(n: usize) {
    PARTITIONS.store(n, Ordering::Relaxed);
}
