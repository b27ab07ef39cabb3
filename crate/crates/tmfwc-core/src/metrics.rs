//! Per-thread operation counters for the extraction-cost comparison.
//!
//! `transform_calls` counts every frequency-domain transform applied to
//! signal data (both the FFT path and the direct-evaluation oracle). The
//! TMFWC extraction path never increments it; the MFCC path increments it
//! once per frame. MAC counts are accumulated in bulk by instrumented
//! loops so the hot paths stay branch-free.
//!
//! Counters are thread-local: the benchmark pins extraction to a single
//! thread, so its totals are complete, and concurrent work elsewhere
//! cannot perturb a measurement in progress.

use std::cell::Cell;

thread_local! {
    static TRANSFORM_CALLS: Cell<u64> = const { Cell::new(0) };
    static MAC_COUNT: Cell<u64> = const { Cell::new(0) };
}

/// Record one frequency-domain transform of signal data.
pub fn record_transform() {
    TRANSFORM_CALLS.with(|c| c.set(c.get() + 1));
}

/// Record `n` multiply-accumulate operations.
pub fn record_macs(n: u64) {
    MAC_COUNT.with(|c| c.set(c.get() + n));
}

/// Number of transforms on this thread since the last [`reset`].
pub fn transform_calls() -> u64 {
    TRANSFORM_CALLS.with(Cell::get)
}

/// Multiply-accumulate count on this thread since the last [`reset`].
pub fn mac_count() -> u64 {
    MAC_COUNT.with(Cell::get)
}

/// Zero both counters on this thread.
pub fn reset() {
    TRANSFORM_CALLS.with(|c| c.set(0));
    MAC_COUNT.with(|c| c.set(0));
}

/// Snapshot of both counters, taken together.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OpCounts {
    pub transform_calls: u64,
    pub macs: u64,
}

/// Read both counters at once.
pub fn snapshot() -> OpCounts {
    OpCounts { transform_calls: transform_calls(), macs: mac_count() }
}
