use std::time::Duration;

use base64::Engine;
use serde::{Deserialize, Serialize};

use crate::btpipe::{AsrAdapter, NluAdapter, TtsAdapter};
use crate::corpus::{NluOutcome, Task};
use crate::error::{Error, Result};

const B64: base64::engine::GeneralPurpose = base64::engine::general_purpose::STANDARD;

/// Connection settings shared by the three HTTP adapters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HttpConfig {
    pub endpoint: String,
    #[serde(default)]
    pub bearer_token: Option<String>,
    #[serde(default = "default_timeout_secs")]
    pub timeout_secs: u64,
}

fn default_timeout_secs() -> u64 {
    30
}

impl HttpConfig {
    pub fn new(endpoint: impl Into<String>) -> Self {
        HttpConfig {
            endpoint: endpoint.into(),
            bearer_token: None,
            timeout_secs: default_timeout_secs(),
        }
    }
}

fn agent(config: &HttpConfig) -> ureq::Agent {
    ureq::Agent::new_with_config(
        ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(config.timeout_secs)))
            .build(),
    )
}

fn post_json<Req: Serialize, Resp: for<'de> Deserialize<'de>>(
    adapter: &str,
    config: &HttpConfig,
    agent: &ureq::Agent,
    body: &Req,
) -> Result<Resp> {
    // serialized by hand so the wire bytes are compact JSON regardless of
    // the HTTP client's formatting choices
    let payload = serde_json::to_vec(body).expect("requests always serialize");
    let mut request = agent
        .post(&config.endpoint)
        .header("content-type", "application/json");
    if let Some(token) = &config.bearer_token {
        request = request.header("authorization", format!("Bearer {token}"));
    }
    let mut response = request.send(&payload[..]).map_err(|e| Error::Adapter {
        adapter: adapter.to_string(),
        message: format!("POST {} failed: {e}", config.endpoint),
    })?;
    let text = response.body_mut().read_to_string().map_err(|e| Error::Adapter {
        adapter: adapter.to_string(),
        message: format!("bad response from {}: {e}", config.endpoint),
    })?;
    serde_json::from_str(&text).map_err(|e| Error::Adapter {
        adapter: adapter.to_string(),
        message: format!("bad response from {}: {e}", config.endpoint),
    })
}

#[derive(Serialize)]
struct TtsRequest<'a> {
    text: &'a str,
}

#[derive(Deserialize)]
struct TtsResponse {
    audio_b64: String,
    #[allow(dead_code)]
    format: String,
}

/// TTS over HTTP: `POST {"text"}` returns `{"audio_b64", "format"}`.
pub struct HttpTts {
    config: HttpConfig,
    agent: ureq::Agent,
}

impl HttpTts {
    pub fn new(config: HttpConfig) -> Self {
        let agent = agent(&config);
        HttpTts { config, agent }
    }
}

impl TtsAdapter for HttpTts {
    fn identity(&self) -> String {
        format!("http-tts:{}", self.config.endpoint)
    }

    fn synthesize(&self, text: &str) -> Result<Vec<u8>> {
        let response: TtsResponse =
            post_json("http-tts", &self.config, &self.agent, &TtsRequest { text })?;
        B64.decode(response.audio_b64.as_bytes()).map_err(|e| Error::Adapter {
            adapter: "http-tts".to_string(),
            message: format!("audio_b64 did not decode: {e}"),
        })
    }
}

#[derive(Serialize)]
struct AsrRequest<'a> {
    audio_b64: String,
    format: &'a str,
}

#[derive(Deserialize)]
struct AsrResponse {
    text: String,
}

/// ASR over HTTP: `POST {"audio_b64", "format"}` returns `{"text"}`.
pub struct HttpAsr {
    config: HttpConfig,
    agent: ureq::Agent,
}

impl HttpAsr {
    pub fn new(config: HttpConfig) -> Self {
        let agent = agent(&config);
        HttpAsr { config, agent }
    }
}

impl AsrAdapter for HttpAsr {
    fn identity(&self) -> String {
        format!("http-asr:{}", self.config.endpoint)
    }

    fn transcribe(&self, audio: &[u8]) -> Result<String> {
        let request = AsrRequest { audio_b64: B64.encode(audio), format: "wav" };
        let response: AsrResponse = post_json("http-asr", &self.config, &self.agent, &request)?;
        Ok(response.text)
    }
}

#[derive(Serialize)]
struct NluRequest<'a> {
    text: &'a str,
    task: Task,
}

/// NLU over HTTP: `POST {"text", "task"}` returns an outcome object
/// (`{"task": "intent", "label": ...}` or the slots equivalent).
pub struct HttpNlu {
    config: HttpConfig,
    agent: ureq::Agent,
}

impl HttpNlu {
    pub fn new(config: HttpConfig) -> Self {
        let agent = agent(&config);
        HttpNlu { config, agent }
    }
}

impl NluAdapter for HttpNlu {
    fn identity(&self) -> String {
        format!("http-nlu:{}", self.config.endpoint)
    }

    fn interpret(&self, text: &str, task: Task) -> Result<NluOutcome> {
        let outcome: NluOutcome =
            post_json("http-nlu", &self.config, &self.agent, &NluRequest { text, task })?;
        if outcome.task() != task {
            return Err(Error::Adapter {
                adapter: "http-nlu".to_string(),
                message: format!("asked for a {task} outcome, got {}", outcome.task()),
            });
        }
        Ok(outcome)
    }
}
