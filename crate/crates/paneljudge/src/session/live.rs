//! Chat-completion HTTP backends for live targets, judges, and blind
//! scorers. All tests stay offline; only message assembly and reply parsing
//! are unit-tested here.

use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::context::compose_judge_context;
use super::runtime::{ChatMessage, JudgeBackend, JudgeContext, TargetClient, TranscriptScorer};
use super::types::{ConversationTurn, SessionError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndpointConfig {
    /// Base URL without the `/chat/completions` suffix.
    pub base_url: String,
    pub model: String,
    /// Name of the environment variable holding the bearer token.
    pub api_key_env: String,
    pub temperature: Option<f64>,
    pub timeout_secs: u64,
    pub retries: u32,
}

impl Default for EndpointConfig {
    fn default() -> Self {
        EndpointConfig {
            base_url: "http://localhost:8000/v1".into(),
            model: "default".into(),
            api_key_env: "PANELJUDGE_API_KEY".into(),
            temperature: None,
            timeout_secs: 120,
            retries: 2,
        }
    }
}

/// Minimal blocking chat-completion client with bounded retry on transport
/// errors, 429, and 5xx.
pub struct ChatClient {
    cfg: EndpointConfig,
    api_key: Option<String>,
    http: reqwest::blocking::Client,
}

impl ChatClient {
    pub fn new(cfg: EndpointConfig) -> Result<Self, SessionError> {
        let http = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(cfg.timeout_secs))
            .build()
            .map_err(|e| SessionError::Http(e.to_string()))?;
        let api_key = std::env::var(&cfg.api_key_env).ok();
        Ok(ChatClient { cfg, api_key, http })
    }

    pub fn model(&self) -> &str {
        &self.cfg.model
    }

    fn attempt(&self, system: Option<&str>, messages: &[ChatMessage]) -> Result<String, SessionError> {
        let mut body_messages = Vec::with_capacity(messages.len() + 1);
        if let Some(system) = system {
            body_messages.push(json!({"role": "system", "content": system}));
        }
        for m in messages {
            body_messages.push(json!({"role": m.role, "content": m.content}));
        }
        let mut body = json!({
            "model": self.cfg.model,
            "messages": body_messages,
        });
        if let Some(t) = self.cfg.temperature {
            body["temperature"] = json!(t);
        }
        let url = format!("{}/chat/completions", self.cfg.base_url.trim_end_matches('/'));
        let mut req = self.http.post(&url).json(&body);
        if let Some(key) = &self.api_key {
            req = req.bearer_auth(key);
        }
        let resp = req.send().map_err(|e| SessionError::Http(e.to_string()))?;
        let status = resp.status();
        if !status.is_success() {
            return Err(SessionError::Http(format!(
                "{url} returned {status}: {}",
                resp.text().unwrap_or_default()
            )));
        }
        let value: serde_json::Value = resp
            .json()
            .map_err(|e| SessionError::Http(e.to_string()))?;
        extract_content(&value)
    }

    pub fn chat(
        &self,
        system: Option<&str>,
        messages: &[ChatMessage],
    ) -> Result<String, SessionError> {
        let mut last = None;
        for attempt in 0..=self.cfg.retries {
            if attempt > 0 {
                std::thread::sleep(Duration::from_millis(250 * attempt as u64));
            }
            match self.attempt(system, messages) {
                Ok(content) => return Ok(content),
                Err(e) => last = Some(e),
            }
        }
        Err(last.expect("at least one attempt"))
    }
}

fn extract_content(value: &serde_json::Value) -> Result<String, SessionError> {
    value["choices"][0]["message"]["content"]
        .as_str()
        .map(str::to_string)
        .ok_or_else(|| {
            SessionError::Http(format!(
                "response missing choices[0].message.content: {value}"
            ))
        })
}

/// Live system-under-test. Temperature 0.7 unless overridden.
pub struct LiveTarget {
    client: ChatClient,
    system_prompt: String,
}

impl LiveTarget {
    pub fn new(mut cfg: EndpointConfig, system_prompt: Option<String>) -> Result<Self, SessionError> {
        if cfg.temperature.is_none() {
            cfg.temperature = Some(0.7);
        }
        Ok(LiveTarget {
            client: ChatClient::new(cfg)?,
            system_prompt: system_prompt
                .unwrap_or_else(|| "You are a helpful assistant.".to_string()),
        })
    }
}

impl TargetClient for LiveTarget {
    fn name(&self) -> &str {
        "live-target"
    }

    fn respond(
        &mut self,
        _task_id: &str,
        _turn: usize,
        history: &[ChatMessage],
    ) -> Result<String, SessionError> {
        self.client
            .chat(Some(&self.system_prompt), history)
            .map_err(|e| SessionError::TargetBackend {
                backend: "live-target".into(),
                message: e.to_string(),
            })
    }
}

/// Conversation from the judge's perspective: its own messages as
/// `assistant`, target responses as `user`, ending with the response that
/// needs a verdict.
fn judge_conversation(
    turns: &[ConversationTurn],
    pending_message: &str,
    latest_response: &str,
) -> Vec<ChatMessage> {
    let mut msgs = Vec::with_capacity(turns.len() * 2 + 2);
    for t in turns {
        msgs.push(ChatMessage::assistant(t.judge_message.clone()));
        msgs.push(ChatMessage::user(t.target_response.clone()));
    }
    msgs.push(ChatMessage::assistant(pending_message.to_string()));
    msgs.push(ChatMessage::user(latest_response.to_string()));
    msgs
}

/// Live judge model. Uses the backend's default sampling settings unless the
/// endpoint config pins a temperature.
pub struct LiveJudge {
    client: ChatClient,
}

impl LiveJudge {
    pub fn new(cfg: EndpointConfig) -> Result<Self, SessionError> {
        Ok(LiveJudge {
            client: ChatClient::new(cfg)?,
        })
    }

    fn err(&self, e: SessionError) -> SessionError {
        SessionError::JudgeBackend {
            backend: "live-judge".into(),
            message: e.to_string(),
        }
    }
}

impl JudgeBackend for LiveJudge {
    fn name(&self) -> &str {
        "live-judge"
    }

    fn open(&mut self, ctx: &JudgeContext) -> Result<String, SessionError> {
        let system = compose_judge_context(ctx.persona, ctx.task, ctx.diary, ctx.state, ctx.condition);
        let msgs = vec![ChatMessage::user(
            "Send your first message to the assistant now. Reply with the message text only; no diary block yet.",
        )];
        let raw = self.client.chat(Some(&system), &msgs).map_err(|e| self.err(e))?;
        // Some models open with a diary block anyway; keep only the message.
        match super::diary::extract_diary_block(&raw) {
            Ok((_, remainder)) if !remainder.trim().is_empty() => Ok(remainder),
            _ => Ok(raw),
        }
    }

    fn step(&mut self, ctx: &JudgeContext, latest_response: &str) -> Result<String, SessionError> {
        let system = compose_judge_context(ctx.persona, ctx.task, ctx.diary, ctx.state, ctx.condition);
        let msgs = judge_conversation(ctx.turns, ctx.pending_message, latest_response);
        self.client.chat(Some(&system), &msgs).map_err(|e| self.err(e))
    }
}

/// Renders a visible transcript for post-hoc scoring.
pub fn render_transcript(turns: &[ConversationTurn]) -> String {
    let mut out = String::new();
    for t in turns {
        out.push_str(&format!("User: {}\n", t.judge_message));
        out.push_str(&format!("Assistant: {}\n", t.target_response));
    }
    out
}

fn parse_score_reply(raw: &str) -> Result<f64, SessionError> {
    for line in raw.lines() {
        if let Some(rest) = line.trim().strip_prefix("score:") {
            return rest
                .trim()
                .parse::<f64>()
                .map_err(|_| SessionError::Scorer(format!("unparseable score line '{line}'")));
        }
    }
    Err(SessionError::Scorer(format!(
        "no 'score:' line in reply: {raw:.80}"
    )))
}

/// Live holistic scorer; receives the rendered transcript and nothing else.
pub struct LiveScorer {
    client: ChatClient,
}

impl LiveScorer {
    pub fn new(cfg: EndpointConfig) -> Result<Self, SessionError> {
        Ok(LiveScorer {
            client: ChatClient::new(cfg)?,
        })
    }
}

impl TranscriptScorer for LiveScorer {
    fn name(&self) -> &str {
        "live-scorer"
    }

    fn score_transcript(&mut self, turns: &[ConversationTurn]) -> Result<f64, SessionError> {
        let system = "You rate conversation transcripts. Read the transcript and reply with a single line 'score: <value between 0 and 1>' reflecting overall response quality.";
        let msgs = vec![ChatMessage::user(render_transcript(turns))];
        let raw = self
            .client
            .chat(Some(system), &msgs)
            .map_err(|e| SessionError::Scorer(e.to_string()))?;
        parse_score_reply(&raw)
    }
}
