use std::collections::HashMap;
use std::fs;
use std::path::Path;

use base64::Engine;
use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::btpipe::{AsrAdapter, NluAdapter, TtsAdapter};
use crate::corpus::{NluOutcome, SlotPair, Task};
use crate::error::{Error, Result};

const B64: base64::engine::GeneralPurpose = base64::engine::general_purpose::STANDARD;

fn fingerprint(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

fn adapter_error(adapter: &str, message: impl Into<String>) -> Error {
    Error::Adapter { adapter: adapter.to_string(), message: message.into() }
}

/// Table- or identity-backed TTS stand-in for hermetic runs and tests.
///
/// Table files are JSON objects mapping input text to base64 audio bytes:
/// `{"set an alarm": "cGNtOi4uLg=="}`. Identity mode "synthesizes" the
/// text's own bytes, which pairs with [`MockAsr::identity`] for loops that
/// echo the input back.
pub struct MockTts {
    table: Option<HashMap<String, Vec<u8>>>,
    identity: String,
}

impl MockTts {
    pub fn identity() -> Self {
        MockTts { table: None, identity: "mock-tts:identity".to_string() }
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let raw = fs::read(path).map_err(|e| Error::io(path, e))?;
        let table: HashMap<String, String> = serde_json::from_slice(&raw)
            .map_err(|e| adapter_error("mock-tts", format!("bad table {}: {e}", path.display())))?;
        let decoded = table
            .into_iter()
            .map(|(text, b64)| {
                let audio = B64.decode(b64.as_bytes()).map_err(|e| {
                    adapter_error("mock-tts", format!("entry {text:?} is not base64: {e}"))
                })?;
                Ok((text, audio))
            })
            .collect::<Result<HashMap<_, _>>>()?;
        Ok(MockTts {
            table: Some(decoded),
            identity: format!("mock-tts:{}", fingerprint(&raw)),
        })
    }

    pub fn from_pairs<I: IntoIterator<Item = (String, Vec<u8>)>>(pairs: I) -> Self {
        let table: HashMap<String, Vec<u8>> = pairs.into_iter().collect();
        let mut listing: Vec<&String> = table.keys().collect();
        listing.sort();
        let joined = listing.iter().map(|s| s.as_str()).collect::<Vec<_>>().join("\n");
        MockTts {
            identity: format!("mock-tts:{}", fingerprint(joined.as_bytes())),
            table: Some(table),
        }
    }
}

impl TtsAdapter for MockTts {
    fn identity(&self) -> String {
        self.identity.clone()
    }

    fn synthesize(&self, text: &str) -> Result<Vec<u8>> {
        match &self.table {
            None => Ok(text.as_bytes().to_vec()),
            Some(table) => table
                .get(text)
                .cloned()
                .ok_or_else(|| adapter_error("mock-tts", format!("no table entry for text {text:?}"))),
        }
    }
}

/// Table- or identity-backed ASR stand-in.
///
/// Table files map base64 audio bytes to the transcription to return:
/// `{"cGNtOi4uLg==": "set and alarm"}`. Identity mode decodes the audio
/// bytes as UTF-8 text.
pub struct MockAsr {
    table: Option<HashMap<String, String>>,
    identity: String,
}

impl MockAsr {
    pub fn identity() -> Self {
        MockAsr { table: None, identity: "mock-asr:identity".to_string() }
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let raw = fs::read(path).map_err(|e| Error::io(path, e))?;
        let table: HashMap<String, String> = serde_json::from_slice(&raw)
            .map_err(|e| adapter_error("mock-asr", format!("bad table {}: {e}", path.display())))?;
        Ok(MockAsr {
            table: Some(table),
            identity: format!("mock-asr:{}", fingerprint(&raw)),
        })
    }

    /// Builds a table from `(audio, text)` pairs.
    pub fn from_pairs<I: IntoIterator<Item = (Vec<u8>, String)>>(pairs: I) -> Self {
        let table: HashMap<String, String> =
            pairs.into_iter().map(|(audio, text)| (B64.encode(&audio), text)).collect();
        let mut listing: Vec<(&String, &String)> = table.iter().collect();
        listing.sort();
        let joined = listing
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join("\n");
        MockAsr {
            identity: format!("mock-asr:{}", fingerprint(joined.as_bytes())),
            table: Some(table),
        }
    }
}

impl AsrAdapter for MockAsr {
    fn identity(&self) -> String {
        self.identity.clone()
    }

    fn transcribe(&self, audio: &[u8]) -> Result<String> {
        match &self.table {
            None => String::from_utf8(audio.to_vec())
                .map_err(|_| adapter_error("mock-asr", "identity mode got non-UTF-8 audio")),
            Some(table) => {
                let key = B64.encode(audio);
                table.get(&key).cloned().ok_or_else(|| {
                    adapter_error("mock-asr", format!("no table entry for audio ({} bytes)", audio.len()))
                })
            }
        }
    }
}

#[derive(Deserialize, Default)]
struct NluTableFile {
    #[serde(default)]
    domain: HashMap<String, String>,
    #[serde(default)]
    intent: HashMap<String, String>,
    #[serde(default)]
    slots: HashMap<String, Vec<SlotPair>>,
}

/// Table-backed NLU stand-in; there is no identity mode, because outcomes
/// cannot be conjured from text.
///
/// Table files carry one map per task:
/// `{"intent": {"set an alarm": "alarm_set"}, "slots": {"at nine": [{"name": "time", "value": "nine"}]}}`.
pub struct MockNlu {
    domain: HashMap<String, String>,
    intent: HashMap<String, String>,
    slots: HashMap<String, Vec<SlotPair>>,
    identity: String,
}

impl MockNlu {
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let raw = fs::read(path).map_err(|e| Error::io(path, e))?;
        let table: NluTableFile = serde_json::from_slice(&raw)
            .map_err(|e| adapter_error("mock-nlu", format!("bad table {}: {e}", path.display())))?;
        Ok(MockNlu {
            domain: table.domain,
            intent: table.intent,
            slots: table.slots,
            identity: format!("mock-nlu:{}", fingerprint(&raw)),
        })
    }

    /// Builds an intent-task table from `(text, label)` pairs.
    pub fn from_intent_pairs<I: IntoIterator<Item = (String, String)>>(pairs: I) -> Self {
        let intent: HashMap<String, String> = pairs.into_iter().collect();
        let mut listing: Vec<(&String, &String)> = intent.iter().collect();
        listing.sort();
        let joined = listing
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join("\n");
        MockNlu {
            identity: format!("mock-nlu:{}", fingerprint(joined.as_bytes())),
            domain: HashMap::new(),
            intent,
            slots: HashMap::new(),
        }
    }
}

impl NluAdapter for MockNlu {
    fn identity(&self) -> String {
        self.identity.clone()
    }

    fn interpret(&self, text: &str, task: Task) -> Result<NluOutcome> {
        let miss = || adapter_error("mock-nlu", format!("no {task} table entry for text {text:?}"));
        match task {
            Task::Domain => self.domain.get(text).map(NluOutcome::domain).ok_or_else(miss),
            Task::Intent => self.intent.get(text).map(NluOutcome::intent).ok_or_else(miss),
            Task::Slots => self
                .slots
                .get(text)
                .map(|pairs| NluOutcome::slots(pairs.iter().cloned()))
                .ok_or_else(miss),
        }
    }
}
