//! Dual-role judge sessions: the conversation loop, the diary protocol,
//! context composition, and target/judge backends.

pub mod context;
pub mod diary;
pub mod live;
pub mod runtime;
pub mod types;

pub use context::compose_judge_context;
pub use diary::{parse_diary, parse_judge_reply, render_diary_body, render_judge_reply, DiaryDraft};
pub use live::{ChatClient, EndpointConfig, LiveJudge, LiveScorer, LiveTarget};
pub use runtime::{
    blind_rescore, run_session, ChatMessage, FixedScorer, JudgeBackend, JudgeContext,
    ScriptedJudge, ScriptedTarget, SessionConfig, TargetClient, TranscriptScorer,
};
pub use types::{
    session_score, Condition, ConversationTurn, DiaryEntry, Insight, IssueCategory, Polarity,
    SessionError, SessionRecord, Severity, TerminationReason, SCHEMA_VERSION,
};
