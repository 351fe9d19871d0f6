//! The back-transcription loop: text -> TTS -> ASR -> NLU.
//!
//! [`back_transcribe`] drives a corpus through pluggable speech adapters
//! and fills in each sample's `hypothesis`, `before` and `after` fields.
//! Adapter calls are cached on disk (keyed by adapter identity + input),
//! so interrupted runs resume without re-spending synthesis or recognition
//! work, and reruns are free. Per-sample adapter failures do not abort the
//! run; they are collected in the [`RunReport`].

mod cache;
mod http;
mod mock;
mod wer;

pub use cache::AdapterCache;
pub use http::{HttpAsr, HttpConfig, HttpNlu, HttpTts};
pub use mock::{MockAsr, MockNlu, MockTts};
pub use wer::{token_edit_distance, word_error_rate, WerResult};

use std::fmt;
use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::{normalize_text, Corpus, NluOutcome, NormalizationPolicy, Task};
use crate::error::{Error, Result};

/// Text-to-speech: turns an utterance into audio bytes.
pub trait TtsAdapter: Send + Sync {
    /// Stable string naming this adapter *and* its configuration; cache
    /// keys include it, so it must change when behaviour would.
    fn identity(&self) -> String;
    fn synthesize(&self, text: &str) -> Result<Vec<u8>>;
}

/// Speech recognition: turns audio bytes back into text.
pub trait AsrAdapter: Send + Sync {
    fn identity(&self) -> String;
    fn transcribe(&self, audio: &[u8]) -> Result<String>;
}

/// Natural-language understanding: predicts an outcome for a task.
pub trait NluAdapter: Send + Sync {
    fn identity(&self) -> String;
    fn interpret(&self, text: &str, task: Task) -> Result<NluOutcome>;
}

/// Settings for one back-transcription run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    /// Worker threads calling adapters concurrently. 1 = sequential.
    pub max_parallel_requests: usize,
    /// Extra attempts per adapter call after the first fails.
    pub retry_limit: u32,
    /// Where to cache adapter responses; `None` disables caching.
    pub cache_dir: Option<PathBuf>,
    /// Applied to ASR output before storing it as the hypothesis, and the
    /// policy under which the output corpus is (re-)normalized.
    pub normalization: NormalizationPolicy,
    /// Send the raw ASR text to NLU instead of the normalized hypothesis.
    /// Off by default so the NLU model sees exactly the stored hypothesis.
    pub nlu_on_raw_hypothesis: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            max_parallel_requests: 1,
            retry_limit: 0,
            cache_dir: None,
            normalization: NormalizationPolicy::default(),
            nlu_on_raw_hypothesis: false,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_parallel_requests == 0 {
            return Err(Error::Config("max_parallel_requests must be at least 1".into()));
        }
        Ok(())
    }

    fn digest(&self) -> String {
        let json = serde_json::to_vec(self).expect("config always serializes");
        let digest = Sha256::digest(&json);
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Pipeline stage names, for failure attribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Tts,
    Asr,
    NluBefore,
    NluAfter,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Tts => "tts",
            Stage::Asr => "asr",
            Stage::NluBefore => "nlu-before",
            Stage::NluAfter => "nlu-after",
        })
    }
}

/// One sample the pipeline could not finish, and why.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleFailure {
    pub id: String,
    pub stage: Stage,
    pub message: String,
}

/// How many times each adapter was actually invoked (cache hits excluded).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdapterCalls {
    pub tts: usize,
    pub asr: usize,
    pub nlu: usize,
}

/// Everything needed to audit or reproduce a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub tts_identity: String,
    pub asr_identity: String,
    pub nlu_identity: String,
    pub config_digest: String,
    pub started_at: String,
    pub finished_at: String,
    pub total: usize,
    pub completed: usize,
    pub failures: Vec<SampleFailure>,
    pub adapter_calls: AdapterCalls,
}

struct StageOutput {
    hypothesis: String,
    before: NluOutcome,
    after: NluOutcome,
}

struct Runner<'a> {
    tts: &'a dyn TtsAdapter,
    asr: &'a dyn AsrAdapter,
    nlu: &'a dyn NluAdapter,
    config: &'a RunConfig,
    cache: Option<AdapterCache>,
    tts_calls: AtomicUsize,
    asr_calls: AtomicUsize,
    nlu_calls: AtomicUsize,
}

impl Runner<'_> {
    fn cached_call(
        &self,
        stage: &str,
        identity: &str,
        input: &[u8],
        counter: &AtomicUsize,
        call: impl Fn() -> Result<Vec<u8>>,
    ) -> Result<Vec<u8>> {
        let key = AdapterCache::key(identity, input);
        if let Some(cache) = &self.cache {
            if let Some(hit) = cache.get(stage, &key)? {
                return Ok(hit);
            }
        }
        let mut attempt = 0u32;
        let data = loop {
            counter.fetch_add(1, Ordering::Relaxed);
            match call() {
                Ok(data) => break data,
                Err(_) if attempt < self.config.retry_limit => attempt += 1,
                Err(e) => return Err(e),
            }
        };
        if let Some(cache) = &self.cache {
            cache.put(stage, &key, &data)?;
        }
        Ok(data)
    }

    fn nlu_outcome(&self, text: &str, task: Task) -> Result<NluOutcome> {
        let mut input = Vec::with_capacity(text.len() + 8);
        input.extend_from_slice(task.label().as_bytes());
        input.push(0);
        input.extend_from_slice(text.as_bytes());
        let bytes = self.cached_call("nlu", &self.nlu.identity(), &input, &self.nlu_calls, || {
            let outcome = self.nlu.interpret(text, task)?;
            Ok(serde_json::to_vec(&outcome).expect("outcomes always serialize"))
        })?;
        serde_json::from_slice(&bytes).map_err(|e| Error::Adapter {
            adapter: "nlu-cache".to_string(),
            message: format!("cached outcome did not parse: {e}"),
        })
    }

    fn process(&self, reference: &str, task: Task) -> std::result::Result<StageOutput, (Stage, String)> {
        let audio = self
            .cached_call("tts", &self.tts.identity(), reference.as_bytes(), &self.tts_calls, || {
                self.tts.synthesize(reference)
            })
            .map_err(|e| (Stage::Tts, e.to_string()))?;

        let raw_bytes = self
            .cached_call("asr", &self.asr.identity(), &audio, &self.asr_calls, || {
                self.asr.transcribe(&audio).map(String::into_bytes)
            })
            .map_err(|e| (Stage::Asr, e.to_string()))?;
        let raw_hypothesis = String::from_utf8(raw_bytes)
            .map_err(|e| (Stage::Asr, format!("transcription is not UTF-8: {e}")))?;
        let hypothesis = normalize_text(&raw_hypothesis, &self.config.normalization);

        let before = self
            .nlu_outcome(reference, task)
            .map_err(|e| (Stage::NluBefore, e.to_string()))?;
        let after_input =
            if self.config.nlu_on_raw_hypothesis { &raw_hypothesis } else { &hypothesis };
        let after = self
            .nlu_outcome(after_input, task)
            .map_err(|e| (Stage::NluAfter, e.to_string()))?;

        Ok(StageOutput { hypothesis, before, after })
    }
}

/// Runs the corpus through TTS -> ASR -> NLU and returns the evaluated
/// corpus plus a run report.
///
/// For each sample: the reference is synthesized, the audio transcribed,
/// the transcription normalized (the *normalized* text becomes the stored
/// hypothesis), and the NLU adapter queried on both sides. Samples whose
/// adapters fail keep their input fields and appear in
/// [`RunReport::failures`]; everything else is filled in. Output order
/// matches input order regardless of `max_parallel_requests`, and the
/// output corpus is normalized under the run's policy.
pub fn back_transcribe(
    corpus: &Corpus,
    tts: &dyn TtsAdapter,
    asr: &dyn AsrAdapter,
    nlu: &dyn NluAdapter,
    config: &RunConfig,
) -> Result<(Corpus, RunReport)> {
    config.validate()?;
    let started_at = chrono::Utc::now().to_rfc3339();

    let cache = config
        .cache_dir
        .as_ref()
        .map(|dir| AdapterCache::open(dir.clone()))
        .transpose()?;
    let runner = Runner {
        tts,
        asr,
        nlu,
        config,
        cache,
        tts_calls: AtomicUsize::new(0),
        asr_calls: AtomicUsize::new(0),
        nlu_calls: AtomicUsize::new(0),
    };

    let samples = corpus.samples();
    let n = samples.len();
    type StageOutcome = std::result::Result<StageOutput, (Stage, String)>;
    let results: Mutex<Vec<Option<StageOutcome>>> = Mutex::new((0..n).map(|_| None).collect());
    let next = AtomicUsize::new(0);

    let workers = config.max_parallel_requests.min(n.max(1));
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let idx = next.fetch_add(1, Ordering::Relaxed);
                if idx >= n {
                    break;
                }
                let sample = &samples[idx];
                let outcome = runner.process(&sample.reference, sample.expected.task());
                results.lock().expect("no panics while holding the lock")[idx] = Some(outcome);
            });
        }
    });

    let mut out = samples.to_vec();
    let mut failures = Vec::new();
    let results = results.into_inner().expect("workers are done");
    for (sample, result) in out.iter_mut().zip(results) {
        match result.expect("every index was processed") {
            Ok(output) => {
                sample.hypothesis = Some(output.hypothesis);
                sample.before = Some(output.before);
                sample.after = Some(output.after);
            }
            Err((stage, message)) => failures.push(SampleFailure {
                id: sample.id.clone(),
                stage,
                message,
            }),
        }
    }

    let completed = n - failures.len();
    let report = RunReport {
        tts_identity: tts.identity(),
        asr_identity: asr.identity(),
        nlu_identity: nlu.identity(),
        config_digest: config.digest(),
        started_at,
        finished_at: chrono::Utc::now().to_rfc3339(),
        total: n,
        completed,
        failures,
        adapter_calls: AdapterCalls {
            tts: runner.tts_calls.into_inner(),
            asr: runner.asr_calls.into_inner(),
            nlu: runner.nlu_calls.into_inner(),
        },
    };
    let corpus = Corpus::from_samples(out, &config.normalization)?;
    Ok((corpus, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Sample;

    fn intent_corpus(rows: &[(&str, &str, &str)]) -> Corpus {
        let samples = rows
            .iter()
            .map(|(id, text, label)| Sample::new(*id, *text, NluOutcome::intent(*label)))
            .collect();
        Corpus::from_samples(samples, &NormalizationPolicy::default()).unwrap()
    }

    /// TTS/ASR/NLU fixture where "set an alarm" round-trips to
    /// "set and alarm" and everything else echoes back unchanged.
    fn adapters() -> (MockTts, MockAsr, MockNlu) {
        let tts = MockTts::from_pairs([
            ("set an alarm".to_string(), b"audio-0".to_vec()),
            ("play jazz".to_string(), b"audio-1".to_vec()),
        ]);
        let asr = MockAsr::from_pairs([
            (b"audio-0".to_vec(), "Set AND alarm".to_string()),
            (b"audio-1".to_vec(), "play jazz".to_string()),
        ]);
        let nlu = MockNlu::from_intent_pairs([
            ("set an alarm".to_string(), "alarm_set".to_string()),
            ("set and alarm".to_string(), "alarm_set".to_string()),
            ("play jazz".to_string(), "play_music".to_string()),
        ]);
        (tts, asr, nlu)
    }

    #[test]
    fn fills_in_hypothesis_and_outcomes() {
        let corpus = intent_corpus(&[("a", "set an alarm", "alarm_set"), ("b", "play jazz", "play_music")]);
        let (tts, asr, nlu) = adapters();
        let (out, report) = back_transcribe(&corpus, &tts, &asr, &nlu, &RunConfig::default()).unwrap();

        let a = out.get("a").unwrap();
        // ASR output is normalized before storage
        assert_eq!(a.hypothesis.as_deref(), Some("set and alarm"));
        assert_eq!(a.before, Some(NluOutcome::intent("alarm_set")));
        assert_eq!(a.after, Some(NluOutcome::intent("alarm_set")));
        assert_eq!(a.text_changed(), Some(true));

        let b = out.get("b").unwrap();
        assert_eq!(b.text_changed(), Some(false));

        assert_eq!(report.total, 2);
        assert_eq!(report.completed, 2);
        assert!(report.failures.is_empty());
        assert_eq!(report.adapter_calls.tts, 2);
        assert_eq!(report.adapter_calls.asr, 2);
        // 2 before + 2 after, "play jazz" queried twice (no cache to dedup)
        assert_eq!(report.adapter_calls.nlu, 4);
        assert_eq!(report.tts_identity, tts.identity());
    }

    #[test]
    fn failures_are_recorded_not_fatal() {
        let corpus = intent_corpus(&[("a", "set an alarm", "alarm_set"), ("x", "unknown text", "nope")]);
        let (tts, asr, nlu) = adapters();
        let (out, report) = back_transcribe(&corpus, &tts, &asr, &nlu, &RunConfig::default()).unwrap();

        assert_eq!(report.completed, 1);
        assert_eq!(report.failures.len(), 1);
        assert_eq!(report.failures[0].id, "x");
        assert_eq!(report.failures[0].stage, Stage::Tts);
        // the failed sample keeps its input state
        assert_eq!(out.get("x").unwrap().hypothesis, None);
        assert!(out.get("a").unwrap().is_evaluated());
    }

    #[test]
    fn cache_makes_reruns_free() {
        let dir = tempfile::tempdir().unwrap();
        let corpus = intent_corpus(&[("a", "set an alarm", "alarm_set"), ("b", "play jazz", "play_music")]);
        let (tts, asr, nlu) = adapters();
        let config = RunConfig {
            cache_dir: Some(dir.path().join("cache")),
            ..RunConfig::default()
        };

        let (out1, report1) = back_transcribe(&corpus, &tts, &asr, &nlu, &config).unwrap();
        assert_eq!(report1.adapter_calls.tts, 2);
        // "play jazz" after-hit comes from the cache written by its before-call
        assert_eq!(report1.adapter_calls.nlu, 3);

        let (out2, report2) = back_transcribe(&corpus, &tts, &asr, &nlu, &config).unwrap();
        assert_eq!(report2.adapter_calls, AdapterCalls::default());
        assert_eq!(out1, out2);
    }

    #[test]
    fn parallel_runs_match_sequential_runs() {
        let rows: Vec<(String, String, String)> = (0..40)
            .map(|i| (format!("s{i}"), format!("utterance number {i}"), format!("label{}", i % 5)))
            .collect();
        let refs: Vec<(&str, &str, &str)> =
            rows.iter().map(|(a, b, c)| (a.as_str(), b.as_str(), c.as_str())).collect();
        let corpus = intent_corpus(&refs);

        let tts = MockTts::identity();
        let asr = MockAsr::identity();
        let nlu = MockNlu::from_intent_pairs(
            rows.iter().map(|(_, text, label)| (text.clone(), label.clone())),
        );

        let sequential =
            back_transcribe(&corpus, &tts, &asr, &nlu, &RunConfig::default()).unwrap().0;
        let parallel = back_transcribe(
            &corpus,
            &tts,
            &asr,
            &nlu,
            &RunConfig { max_parallel_requests: 8, ..RunConfig::default() },
        )
        .unwrap()
        .0;
        assert_eq!(sequential, parallel);
    }

    #[test]
    fn retries_spend_extra_attempts() {
        // an ASR that fails on the first call for each audio
        struct Flaky {
            failures: Mutex<std::collections::HashSet<Vec<u8>>>,
        }
        impl AsrAdapter for Flaky {
            fn identity(&self) -> String {
                "flaky-asr".to_string()
            }
            fn transcribe(&self, audio: &[u8]) -> Result<String> {
                let mut seen = self.failures.lock().unwrap();
                if seen.insert(audio.to_vec()) {
                    return Err(Error::Adapter {
                        adapter: "flaky-asr".to_string(),
                        message: "transient".to_string(),
                    });
                }
                Ok(String::from_utf8(audio.to_vec()).unwrap())
            }
        }

        let corpus = intent_corpus(&[("a", "play jazz", "play_music")]);
        let tts = MockTts::identity();
        let asr = Flaky { failures: Mutex::new(Default::default()) };
        let nlu = MockNlu::from_intent_pairs([("play jazz".to_string(), "play_music".to_string())]);

        // no retries: the sample fails at the ASR stage
        let (_, report) = back_transcribe(&corpus, &tts, &asr, &nlu, &RunConfig::default()).unwrap();
        assert_eq!(report.failures.len(), 1);
        assert_eq!(report.failures[0].stage, Stage::Asr);

        // one retry: recovers
        let asr = Flaky { failures: Mutex::new(Default::default()) };
        let (out, report) =
            back_transcribe(&corpus, &tts, &asr, &nlu, &RunConfig { retry_limit: 1, ..Default::default() })
                .unwrap();
        assert!(report.failures.is_empty());
        assert_eq!(report.adapter_calls.asr, 2);
        assert!(out.get("a").unwrap().is_evaluated());
    }

    #[test]
    fn zero_parallelism_is_rejected() {
        let corpus = intent_corpus(&[]);
        let (tts, asr, nlu) = adapters();
        let config = RunConfig { max_parallel_requests: 0, ..RunConfig::default() };
        assert!(matches!(
            back_transcribe(&corpus, &tts, &asr, &nlu, &config),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn empty_corpus_runs_clean() {
        let corpus = intent_corpus(&[]);
        let (tts, asr, nlu) = adapters();
        let (out, report) = back_transcribe(&corpus, &tts, &asr, &nlu, &RunConfig::default()).unwrap();
        assert!(out.is_empty());
        assert_eq!(report.total, 0);
        assert_eq!(report.adapter_calls, AdapterCalls::default());
    }

    #[test]
    fn report_round_trips_through_json() {
        let corpus = intent_corpus(&[("a", "play jazz", "play_music")]);
        let (tts, asr, nlu) = adapters();
        let (_, report) = back_transcribe(&corpus, &tts, &asr, &nlu, &RunConfig::default()).unwrap();
        let json = serde_json::to_string_pretty(&report).unwrap();
        let back: RunReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, report);
    }
}
