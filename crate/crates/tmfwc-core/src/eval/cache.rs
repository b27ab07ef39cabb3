//! Disk cache of extracted features: binary FeatureMatrix dumps keyed by
//! a content hash of (wav bytes, canonical extractor config).
//!
//! The `TMFWC_CACHE_DIR` environment variable overrides any directory the
//! caller passes.

use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::features::FeatureMatrix;

use super::{EvalError, ExtractorConfig};

#[derive(Debug, Clone)]
pub struct FeatureCache {
    dir: PathBuf,
}

impl FeatureCache {
    /// Open (creating) a cache directory, honoring `TMFWC_CACHE_DIR`.
    pub fn open(dir: &Path) -> Result<Self, EvalError> {
        let dir = match std::env::var_os("TMFWC_CACHE_DIR") {
            Some(env_dir) => PathBuf::from(env_dir),
            None => dir.to_path_buf(),
        };
        std::fs::create_dir_all(&dir)?;
        Ok(Self { dir })
    }

    /// Open exactly the given directory, ignoring the environment.
    pub fn open_at(dir: &Path) -> Result<Self, EvalError> {
        std::fs::create_dir_all(dir)?;
        Ok(Self { dir: dir.to_path_buf() })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// sha256 over the wav bytes and the canonical config JSON.
    pub fn key(wav_bytes: &[u8], cfg: &ExtractorConfig) -> String {
        let mut hasher = Sha256::new();
        hasher.update(wav_bytes);
        hasher.update(cfg.canonical_json().as_bytes());
        let digest = hasher.finalize();
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    fn entry_path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.fm"))
    }

    pub fn get(&self, key: &str) -> Option<FeatureMatrix> {
        FeatureMatrix::read_binary_file(&self.entry_path(key)).ok()
    }

    pub fn put(&self, key: &str, features: &FeatureMatrix) -> Result<(), EvalError> {
        features.write_binary_file(&self.entry_path(key))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cache_round_trips_and_keys_differ_by_config() {
        let dir = tempfile::tempdir().unwrap();
        let cache = FeatureCache::open_at(dir.path()).unwrap();
        let cfg = ExtractorConfig::default();
        let key = FeatureCache::key(b"some wav bytes", &cfg);
        assert!(cache.get(&key).is_none());
        let m = FeatureMatrix::from_rows_data(2, 2, vec![1.0, 2.0, 3.0, 4.0]);
        cache.put(&key, &m).unwrap();
        assert_eq!(cache.get(&key), Some(m));

        let other = ExtractorConfig { sample_rate_hz: 16000, ..ExtractorConfig::default() };
        assert_ne!(key, FeatureCache::key(b"some wav bytes", &other));
        assert_ne!(key, FeatureCache::key(b"other bytes", &cfg));
    }
}
