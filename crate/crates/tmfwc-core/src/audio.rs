//! WAV ingestion, normalization, and framing/windowing primitives.
//!
//! Only RIFF/WAVE containers with 16-bit PCM or 32-bit IEEE-float samples
//! are accepted, mono or stereo. Stereo is averaged to mono. 16-bit PCM
//! is scaled by 2^15 so samples land in [-1, 1]; no per-utterance gain
//! normalization happens at this layer. Resampling is out of scope —
//! mismatched sample rates are an error at pipeline level.

use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum AudioError {
    #[error("i/o failure reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed container: {0}")]
    MalformedContainer(String),
    #[error("unsupported encoding: {0}")]
    UnsupportedEncoding(String),
    #[error("empty audio: file contains zero samples")]
    EmptyAudio,
    #[error("invalid framing: {0}")]
    InvalidFraming(String),
}

/// Mono PCM samples normalized to [-1, 1] plus their sample rate.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioBuffer {
    samples: Vec<f64>,
    sample_rate_hz: u32,
}

impl AudioBuffer {
    /// Wrap raw samples. Panics on an empty sample vector or zero rate;
    /// callers constructing buffers programmatically own that contract.
    pub fn new(samples: Vec<f64>, sample_rate_hz: u32) -> Self {
        assert!(!samples.is_empty(), "AudioBuffer requires at least one sample");
        assert!(sample_rate_hz > 0, "sample rate must be positive");
        Self { samples, sample_rate_hz }
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate_hz(&self) -> u32 {
        self.sample_rate_hz
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Duration in seconds.
    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate_hz as f64
    }
}

/// Window shapes for framing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum WindowKind {
    Rectangular,
    Hamming,
    Hanning,
}

impl WindowKind {
    /// Window coefficient at index `n` of a length-`len` window.
    pub fn coefficient(self, n: usize, len: usize) -> f64 {
        match self {
            WindowKind::Rectangular => 1.0,
            WindowKind::Hamming => {
                0.54 - 0.46 * (2.0 * std::f64::consts::PI * n as f64 / (len - 1) as f64).cos()
            }
            WindowKind::Hanning => {
                0.5 * (1.0 - (2.0 * std::f64::consts::PI * n as f64 / (len - 1) as f64).cos())
            }
        }
    }
}

/// Fixed-length overlapping sample windows cut from a signal.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSequence {
    pub frames: Vec<Vec<f64>>,
    pub frame_len: usize,
    pub hop_len: usize,
    pub window_kind: WindowKind,
}

// ---------------------------------------------------------------------------
// WAV reading / writing
// ---------------------------------------------------------------------------

fn read_u16(bytes: &[u8], at: usize) -> Result<u16, AudioError> {
    bytes
        .get(at..at + 2)
        .map(|b| u16::from_le_bytes(b.try_into().unwrap()))
        .ok_or_else(|| AudioError::MalformedContainer("truncated chunk".into()))
}

fn read_u32(bytes: &[u8], at: usize) -> Result<u32, AudioError> {
    bytes
        .get(at..at + 4)
        .map(|b| u32::from_le_bytes(b.try_into().unwrap()))
        .ok_or_else(|| AudioError::MalformedContainer("truncated chunk".into()))
}

/// Load a RIFF/WAVE file as a normalized mono buffer.
///
/// Stereo channels are averaged; 16-bit PCM divides by 2^15; float data
/// is taken as-is but clamped to [-1, 1].
pub fn load_wav(path: &Path) -> Result<AudioBuffer, AudioError> {
    let bytes = std::fs::read(path)
        .map_err(|source| AudioError::Io { path: path.display().to_string(), source })?;
    decode_wav(&bytes)
}

/// Decode a RIFF/WAVE byte stream. See [`load_wav`].
pub fn decode_wav(bytes: &[u8]) -> Result<AudioBuffer, AudioError> {
    if bytes.len() < 12 || &bytes[0..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return Err(AudioError::MalformedContainer("missing RIFF/WAVE signature".into()));
    }

    let mut fmt: Option<(u16, u16, u32, u16)> = None; // (format, channels, rate, bits)
    let mut data: Option<&[u8]> = None;

    let mut pos = 12;
    while pos + 8 <= bytes.len() {
        let id = &bytes[pos..pos + 4];
        let size = read_u32(bytes, pos + 4)? as usize;
        let body_start = pos + 8;
        let body_end = body_start.checked_add(size).filter(|&e| e <= bytes.len());
        let Some(body_end) = body_end else {
            return Err(AudioError::MalformedContainer("chunk overruns file".into()));
        };
        match id {
            b"fmt " => {
                if size < 16 {
                    return Err(AudioError::MalformedContainer("fmt chunk too short".into()));
                }
                let format = read_u16(bytes, body_start)?;
                let channels = read_u16(bytes, body_start + 2)?;
                let rate = read_u32(bytes, body_start + 4)?;
                let bits = read_u16(bytes, body_start + 14)?;
                fmt = Some((format, channels, rate, bits));
            }
            b"data" => data = Some(&bytes[body_start..body_end]),
            _ => {} // skip LIST, fact, cue, ...
        }
        // chunks are word-aligned
        pos = body_end + (size & 1);
    }

    let (format, channels, rate, bits) =
        fmt.ok_or_else(|| AudioError::MalformedContainer("no fmt chunk".into()))?;
    let data = data.ok_or_else(|| AudioError::MalformedContainer("no data chunk".into()))?;

    if channels == 0 || channels > 2 {
        return Err(AudioError::UnsupportedEncoding(format!(
            "{channels} channels (only mono/stereo)"
        )));
    }
    if rate == 0 {
        return Err(AudioError::MalformedContainer("zero sample rate".into()));
    }

    let interleaved: Vec<f64> = match (format, bits) {
        // PCM16
        (1, 16) => data
            .chunks_exact(2)
            .map(|c| i16::from_le_bytes(c.try_into().unwrap()) as f64 / 32768.0)
            .collect(),
        // IEEE float32
        (3, 32) => data
            .chunks_exact(4)
            .map(|c| (f32::from_le_bytes(c.try_into().unwrap()) as f64).clamp(-1.0, 1.0))
            .collect(),
        _ => {
            return Err(AudioError::UnsupportedEncoding(format!(
                "format tag {format} with {bits} bits (need PCM16 or float32)"
            )));
        }
    };

    let ch = channels as usize;
    let mono: Vec<f64> =
        interleaved.chunks_exact(ch).map(|frame| frame.iter().sum::<f64>() / ch as f64).collect();

    if mono.is_empty() {
        return Err(AudioError::EmptyAudio);
    }
    Ok(AudioBuffer::new(mono, rate))
}

/// Write a mono buffer as 16-bit PCM WAV. Samples are clamped to [-1, 1]
/// and scaled by 2^15 (saturating at i16 bounds).
pub fn write_wav_pcm16(path: &Path, buf: &AudioBuffer) -> Result<(), AudioError> {
    let n = buf.len();
    let data_size = (n * 2) as u32;
    let mut out = Vec::with_capacity(44 + n * 2);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(36 + data_size).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes()); // PCM
    out.extend_from_slice(&1u16.to_le_bytes()); // mono
    out.extend_from_slice(&buf.sample_rate_hz().to_le_bytes());
    out.extend_from_slice(&(buf.sample_rate_hz() * 2).to_le_bytes());
    out.extend_from_slice(&2u16.to_le_bytes()); // block align
    out.extend_from_slice(&16u16.to_le_bytes()); // bits
    out.extend_from_slice(b"data");
    out.extend_from_slice(&data_size.to_le_bytes());
    for &s in buf.samples() {
        let v = (s.clamp(-1.0, 1.0) * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
        out.extend_from_slice(&v.to_le_bytes());
    }
    std::fs::write(path, out)
        .map_err(|source| AudioError::Io { path: path.display().to_string(), source })
}

// ---------------------------------------------------------------------------
// Framing and windowing
// ---------------------------------------------------------------------------

/// Cut `buf` into frames of `frame_ms` advanced by `hop_ms`. Frame `i`
/// starts at sample `i * hop_len`; the final partial frame is zero-padded.
/// Signals shorter than one frame yield a single padded frame.
pub fn frame_signal(
    buf: &AudioBuffer,
    frame_ms: f64,
    hop_ms: f64,
) -> Result<FrameSequence, AudioError> {
    if !(frame_ms >= hop_ms && hop_ms > 0.0) {
        return Err(AudioError::InvalidFraming(format!(
            "need frame_ms >= hop_ms > 0, got frame {frame_ms} ms, hop {hop_ms} ms"
        )));
    }
    let fs = buf.sample_rate_hz() as f64;
    let frame_len = (frame_ms * fs / 1000.0).round() as usize;
    let hop_len = (hop_ms * fs / 1000.0).round() as usize;
    if frame_len == 0 || hop_len == 0 {
        return Err(AudioError::InvalidFraming("frame/hop shorter than one sample".into()));
    }

    let len = buf.len();
    let count = if len >= frame_len { (len - frame_len).div_ceil(hop_len) + 1 } else { 1 };

    let samples = buf.samples();
    let mut frames = Vec::with_capacity(count);
    for i in 0..count {
        let start = i * hop_len;
        let mut frame = vec![0.0; frame_len];
        let end = (start + frame_len).min(len);
        if start < len {
            frame[..end - start].copy_from_slice(&samples[start..end]);
        }
        frames.push(frame);
    }

    Ok(FrameSequence { frames, frame_len, hop_len, window_kind: WindowKind::Rectangular })
}

/// Multiply every frame pointwise by the chosen window.
pub fn apply_window(fs: &FrameSequence, kind: WindowKind) -> Result<FrameSequence, AudioError> {
    if kind != WindowKind::Rectangular && fs.frame_len < 2 {
        return Err(AudioError::InvalidFraming("tapered windows need frame_len >= 2".into()));
    }
    let coeffs: Vec<f64> = (0..fs.frame_len).map(|n| kind.coefficient(n, fs.frame_len)).collect();
    let frames =
        fs.frames.iter().map(|f| f.iter().zip(&coeffs).map(|(x, w)| x * w).collect()).collect();
    Ok(FrameSequence { frames, frame_len: fs.frame_len, hop_len: fs.hop_len, window_kind: kind })
}
