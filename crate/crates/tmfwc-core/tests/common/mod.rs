//! Shared test oracles. The inverse wavelet transform lives here, in test
//! code only: reconstruction checks must stay independent of the library's
//! analysis path.

use tmfwc_core::wavelet::{WaveletDecomposition, WaveletFamily};

/// Adjoint of one periodic analysis step. For even lengths the periodic
/// analysis operator is orthogonal, so the adjoint is its exact inverse:
/// scatter each coefficient back through its filter taps.
pub fn idwt_single_level_periodic(
    approx: &[f64],
    detail: &[f64],
    family: WaveletFamily,
    out_len: usize,
) -> Vec<f64> {
    let h = family.lowpass();
    let g = family.highpass();
    let mut out = vec![0.0; out_len];
    for (i, (&a, &d)) in approx.iter().zip(detail).enumerate() {
        for k in 0..h.len() {
            let idx = (2 * i + k) % out_len;
            out[idx] += a * h[k] + d * g[k];
        }
    }
    out
}

/// Invert the full cascade from coarsest to finest level.
pub fn idwt_multilevel_periodic(
    dec: &WaveletDecomposition,
    family: WaveletFamily,
    original_len: usize,
) -> Vec<f64> {
    let mut sizes = vec![original_len];
    for j in 0..dec.details.len() {
        sizes.push(sizes[j].div_ceil(2));
    }
    let mut current = dec.approx.clone();
    for (level, detail) in dec.details.iter().enumerate().rev() {
        current = idwt_single_level_periodic(&current, detail, family, sizes[level]);
    }
    current
}
