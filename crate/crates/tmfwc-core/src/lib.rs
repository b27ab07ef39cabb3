//! Time-domain mel-frequency wavelet coefficient (TMFWC) extraction with
//! classic MFCC and discrete-wavelet baselines, an echo-state-network
//! classifier, and a benchmark harness for comparing extraction cost.
//!
//! The pipeline is: WAV ingestion ([`audio`]) -> feature extraction
//! ([`tmfwc`], [`mfcc`], [`wavelet`]) -> reservoir classification
//! ([`reservoir`]) -> experiment protocol and reporting ([`eval`]).
//!
//! TMFWC synthesizes per-channel sine/cosine kernels from mel-filter
//! (frequency, weight) component tables, convolves audio against them in
//! the time domain, takes the pointwise magnitude of the quadrature pair,
//! and max-pools the envelope. No frequency-domain transform runs on that
//! path; [`metrics`] counts transform invocations so the claim is checkable.

pub mod audio;
pub mod eval;
pub mod features;
pub mod metrics;
pub mod mfcc;
pub mod reservoir;
pub mod tmfwc;
pub mod wavelet;

pub use audio::AudioBuffer;
pub use features::FeatureMatrix;
