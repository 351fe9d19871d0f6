//! The `--config` TOML file: one `[tts]`/`[asr]`/`[nlu]` table per stage
//! plus an optional `[run]` table with pipeline settings.
//!
//! ```toml
//! [tts]
//! kind = "mock-identity"
//!
//! [asr]
//! kind = "mock-file"
//! table = "tables/asr.json"
//!
//! [nlu]
//! kind = "http"
//! endpoint = "http://localhost:9000/nlu"
//!
//! [run]
//! max_parallel_requests = 4
//! cache_dir = "bt-cache"
//!
//! [run.normalization]
//! lowercase = true
//! ```
//!
//! Relative paths (mock tables, the cache directory) resolve against the
//! config file's own directory, so a config travels with its fixtures.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use bteval_core::btpipe::{
    AsrAdapter, HttpAsr, HttpConfig, HttpNlu, HttpTts, MockAsr, MockNlu, MockTts, NluAdapter,
    RunConfig, TtsAdapter,
};

use crate::error::CliError;

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum AdapterSpec {
    /// A live endpoint speaking the toolkit's JSON wire format.
    Http(HttpConfig),
    /// A lookup-table file; see the mock adapter docs for each schema.
    MockFile { table: PathBuf },
    /// Echo mode: TTS emits the text's bytes, ASR decodes them back.
    MockIdentity,
}

impl AdapterSpec {
    fn resolve(&mut self, base: &Path) {
        if let AdapterSpec::MockFile { table } = self {
            *table = resolve(base, table);
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub tts: AdapterSpec,
    pub asr: AdapterSpec,
    pub nlu: AdapterSpec,
    #[serde(default)]
    pub run: RunConfig,
}

fn resolve(base: &Path, path: &Path) -> PathBuf {
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        base.join(path)
    }
}

pub fn load_pipeline_config(path: &Path) -> Result<PipelineConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut config: PipelineConfig = toml::from_str(&text)
        .map_err(|e| CliError::config(format!("bad config {}: {e}", path.display())))?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    config.tts.resolve(base);
    config.asr.resolve(base);
    config.nlu.resolve(base);
    if let Some(dir) = config.run.cache_dir.take() {
        config.run.cache_dir = Some(resolve(base, &dir));
    }
    Ok(config)
}

pub fn build_tts(spec: &AdapterSpec) -> Result<Box<dyn TtsAdapter>, CliError> {
    Ok(match spec {
        AdapterSpec::Http(config) => Box::new(HttpTts::new(config.clone())),
        AdapterSpec::MockFile { table } => Box::new(MockTts::from_file(table)?),
        AdapterSpec::MockIdentity => Box::new(MockTts::identity()),
    })
}

pub fn build_asr(spec: &AdapterSpec) -> Result<Box<dyn AsrAdapter>, CliError> {
    Ok(match spec {
        AdapterSpec::Http(config) => Box::new(HttpAsr::new(config.clone())),
        AdapterSpec::MockFile { table } => Box::new(MockAsr::from_file(table)?),
        AdapterSpec::MockIdentity => Box::new(MockAsr::identity()),
    })
}

pub fn build_nlu(spec: &AdapterSpec) -> Result<Box<dyn NluAdapter>, CliError> {
    Ok(match spec {
        AdapterSpec::Http(config) => Box::new(HttpNlu::new(config.clone())),
        AdapterSpec::MockFile { table } => Box::new(MockNlu::from_file(table)?),
        AdapterSpec::MockIdentity => {
            return Err(CliError::config(
                "the nlu adapter has no identity mode; use kind = \"http\" or \"mock-file\"",
            ))
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relative_paths_resolve_against_the_config_directory() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("pipeline.toml");
        fs::write(
            &path,
            "[tts]\nkind = \"mock-identity\"\n\n\
             [asr]\nkind = \"mock-file\"\ntable = \"tables/asr.json\"\n\n\
             [nlu]\nkind = \"http\"\nendpoint = \"http://localhost:1/nlu\"\n\n\
             [run]\ncache_dir = \"cache\"\n",
        )
        .unwrap();

        let config = load_pipeline_config(&path).unwrap();
        match &config.asr {
            AdapterSpec::MockFile { table } => {
                assert_eq!(table, &dir.path().join("tables/asr.json"));
            }
            other => panic!("expected mock-file, got {other:?}"),
        }
        assert_eq!(config.run.cache_dir, Some(dir.path().join("cache")));
        // untouched settings keep their defaults
        assert_eq!(config.run.retry_limit, RunConfig::default().retry_limit);
    }

    #[test]
    fn unknown_top_level_keys_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("pipeline.toml");
        fs::write(
            &path,
            "[tts]\nkind = \"mock-identity\"\n[asr]\nkind = \"mock-identity\"\n\
             [nlu]\nkind = \"mock-identity\"\n[surprise]\nx = 1\n",
        )
        .unwrap();
        let err = load_pipeline_config(&path).unwrap_err();
        assert_eq!(err.kind, "config");
        assert!(err.message.contains("surprise"), "{}", err.message);
    }

    #[test]
    fn nlu_identity_mode_is_rejected() {
        match build_nlu(&AdapterSpec::MockIdentity) {
            Err(err) => assert_eq!(err.kind, "config"),
            Ok(_) => panic!("identity NLU must be rejected"),
        }
    }
}
