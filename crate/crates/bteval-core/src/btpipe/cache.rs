use std::fs;
use std::path::PathBuf;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Content-addressed on-disk cache for adapter calls.
///
/// Keys hash the adapter's identity string together with the input bytes,
/// so changing the adapter (different endpoint, different mock table)
/// invalidates its entries without touching anything else. Entries live at
/// `<root>/<stage>/<key>`; writes go through a temp file and rename so a
/// crashed run never leaves a half-written entry behind.
pub struct AdapterCache {
    root: PathBuf,
}

impl AdapterCache {
    pub fn open(root: impl Into<PathBuf>) -> Result<AdapterCache> {
        let root = root.into();
        fs::create_dir_all(&root).map_err(|e| Error::io(&root, e))?;
        Ok(AdapterCache { root })
    }

    pub fn key(adapter_identity: &str, input: &[u8]) -> String {
        let mut hasher = Sha256::new();
        hasher.update(adapter_identity.as_bytes());
        hasher.update([0u8]);
        hasher.update(input);
        hex(&hasher.finalize())
    }

    pub fn get(&self, stage: &str, key: &str) -> Result<Option<Vec<u8>>> {
        let path = self.entry_path(stage, key);
        match fs::read(&path) {
            Ok(data) => Ok(Some(data)),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(Error::io(path, e)),
        }
    }

    pub fn put(&self, stage: &str, key: &str, data: &[u8]) -> Result<()> {
        let dir = self.root.join(stage);
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        let path = self.entry_path(stage, key);
        let tmp = dir.join(format!(".{key}.tmp-{}", std::process::id()));
        fs::write(&tmp, data).map_err(|e| Error::io(&tmp, e))?;
        fs::rename(&tmp, &path).map_err(|e| Error::io(&path, e))
    }

    fn entry_path(&self, stage: &str, key: &str) -> PathBuf {
        self.root.join(stage).join(key)
    }
}

fn hex(bytes: &[u8]) -> String {
    let mut out = String::with_capacity(bytes.len() * 2);
    for b in bytes {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keys_depend_on_identity_and_input() {
        let k1 = AdapterCache::key("tts:a", b"hello");
        let k2 = AdapterCache::key("tts:b", b"hello");
        let k3 = AdapterCache::key("tts:a", b"hullo");
        assert_ne!(k1, k2);
        assert_ne!(k1, k3);
        assert_eq!(k1, AdapterCache::key("tts:a", b"hello"));
        assert_eq!(k1.len(), 64);
        // identity/input boundary cannot be shifted
        assert_ne!(AdapterCache::key("a", b"bc"), AdapterCache::key("ab", b"c"));
    }

    #[test]
    fn round_trips_and_misses() {
        let dir = tempfile::tempdir().unwrap();
        let cache = AdapterCache::open(dir.path().join("cache")).unwrap();
        let key = AdapterCache::key("asr:x", b"audio-bytes");
        assert_eq!(cache.get("asr", &key).unwrap(), None);
        cache.put("asr", &key, b"transcribed text").unwrap();
        assert_eq!(
            cache.get("asr", &key).unwrap().as_deref(),
            Some(b"transcribed text".as_slice())
        );
        // overwrites are allowed and atomic
        cache.put("asr", &key, b"newer text").unwrap();
        assert_eq!(cache.get("asr", &key).unwrap().as_deref(), Some(b"newer text".as_slice()));
    }

    #[test]
    fn stages_are_disjoint() {
        let dir = tempfile::tempdir().unwrap();
        let cache = AdapterCache::open(dir.path()).unwrap();
        let key = AdapterCache::key("id", b"input");
        cache.put("tts", &key, b"a").unwrap();
        assert_eq!(cache.get("asr", &key).unwrap(), None);
    }
}
