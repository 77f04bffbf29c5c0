//! The dual-role session loop: one agent converses with a target system while
//! privately scoring every response in its diary.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::diary::{parse_judge_reply, DiaryDraft};
use super::types::{
    Condition, ConversationTurn, DiaryEntry, SessionError, SessionRecord, TerminationReason,
    SCHEMA_VERSION,
};
use crate::emotion::{init_state, update_state, EmotionConfig, EmotionTrajectory, EmotionalState};
use crate::persona::{PersonaSpec, TaskSpec};

/// One visible chat message. Roles follow the target's perspective: judge
/// messages are `user`, target responses are `assistant`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: String,
    pub content: String,
}

impl ChatMessage {
    pub fn user(content: impl Into<String>) -> Self {
        ChatMessage {
            role: "user".into(),
            content: content.into(),
        }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        ChatMessage {
            role: "assistant".into(),
            content: content.into(),
        }
    }
}

/// The system under evaluation. Sees only the visible conversation; diary
/// entries and emotional state never reach it.
pub trait TargetClient {
    fn name(&self) -> &str;
    /// `history` ends with the judge's newest message as a `user` turn.
    fn respond(
        &mut self,
        task_id: &str,
        turn: usize,
        history: &[ChatMessage],
    ) -> Result<String, SessionError>;
}

/// Read-only view the judge backend receives each call.
pub struct JudgeContext<'a> {
    pub persona: &'a PersonaSpec,
    pub task: &'a TaskSpec,
    pub condition: Condition,
    /// Completed exchanges.
    pub turns: &'a [ConversationTurn],
    pub diary: &'a [DiaryEntry],
    pub state: &'a EmotionalState,
    /// The judge message awaiting a verdict (empty during `open`).
    pub pending_message: &'a str,
}

/// The evaluating agent. `open` produces the first message to the target;
/// `step` sees the target's latest response and returns raw text containing
/// the fenced diary block plus (optionally) the next message.
pub trait JudgeBackend {
    fn name(&self) -> &str;
    fn open(&mut self, ctx: &JudgeContext) -> Result<String, SessionError>;
    fn step(&mut self, ctx: &JudgeContext, latest_response: &str)
        -> Result<String, SessionError>;
}

/// Post-hoc holistic scorer that sees the visible transcript and nothing
/// else.
pub trait TranscriptScorer {
    fn name(&self) -> &str;
    fn score_transcript(&mut self, turns: &[ConversationTurn]) -> Result<f64, SessionError>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionConfig {
    pub run_label: String,
    pub condition: Condition,
    /// Session ends when patience drops below this.
    pub patience_floor: f64,
    /// Transport-level retries per backend call.
    pub max_retries: u32,
    pub emotion: EmotionConfig,
}

impl Default for SessionConfig {
    fn default() -> Self {
        SessionConfig {
            run_label: "default".into(),
            condition: Condition::Structured,
            patience_floor: 0.1,
            max_retries: 2,
            emotion: EmotionConfig::default(),
        }
    }
}

fn with_retries<T>(
    max_retries: u32,
    mut call: impl FnMut() -> Result<T, SessionError>,
) -> Result<T, SessionError> {
    let mut attempt = 0;
    loop {
        match call() {
            Ok(v) => return Ok(v),
            Err(e) if attempt < max_retries => {
                attempt += 1;
                let _ = e;
            }
            Err(e) => return Err(e),
        }
    }
}

/// Visible history the target receives: completed turns plus the judge's
/// pending message.
fn target_history(turns: &[ConversationTurn], pending: &str) -> Vec<ChatMessage> {
    let mut msgs = Vec::with_capacity(turns.len() * 2 + 1);
    for t in turns {
        msgs.push(ChatMessage::user(t.judge_message.clone()));
        msgs.push(ChatMessage::assistant(t.target_response.clone()));
    }
    msgs.push(ChatMessage::user(pending.to_string()));
    msgs
}

struct SessionState {
    turns: Vec<ConversationTurn>,
    diary: Vec<DiaryEntry>,
    trajectory: EmotionTrajectory,
    state: EmotionalState,
    goal_achieved: bool,
}

fn build_record(
    persona: &PersonaSpec,
    task: &TaskSpec,
    config: &SessionConfig,
    seed: u64,
    judge_name: &str,
    target_name: &str,
    s: SessionState,
    termination: TerminationReason,
    failure: Option<String>,
) -> SessionRecord {
    let final_score = if s.diary.is_empty() {
        0.0
    } else {
        s.diary.iter().map(|e| e.q).sum::<f64>() / s.diary.len() as f64
    };
    SessionRecord {
        schema_version: SCHEMA_VERSION,
        session_id: format!(
            "{}/{}/p{:02}/{}",
            config.run_label,
            task.id,
            persona.id,
            config.condition.as_str()
        ),
        run_label: config.run_label.clone(),
        task_id: task.id.clone(),
        persona_id: persona.id,
        condition: config.condition,
        turns: s.turns,
        diary: s.diary,
        trajectory: s.trajectory,
        final_score,
        goal_achieved: s.goal_achieved,
        termination,
        failure,
        seed,
        judge_backend: judge_name.to_string(),
        target_backend: target_name.to_string(),
    }
}

/// Runs one complete session. Backend or parse failures do not abort: the
/// partial record is returned with `termination = failed` and the failure
/// message set, keeping `|diary| = |turns|`.
pub fn run_session(
    persona: &PersonaSpec,
    task: &TaskSpec,
    target: &mut dyn TargetClient,
    judge: &mut dyn JudgeBackend,
    config: &SessionConfig,
    seed: u64,
) -> SessionRecord {
    let initial = init_state(&persona.profile);
    let mut s = SessionState {
        turns: Vec::new(),
        diary: Vec::new(),
        trajectory: EmotionTrajectory::new(initial),
        state: initial,
        goal_achieved: false,
    };
    let judge_name = judge.name().to_string();
    let target_name = target.name().to_string();
    let fail = |s: SessionState, msg: String| {
        build_record(
            persona,
            task,
            config,
            seed,
            &judge_name,
            &target_name,
            s,
            TerminationReason::Failed,
            Some(msg),
        )
    };

    let mut msg = {
        let ctx = JudgeContext {
            persona,
            task,
            condition: config.condition,
            turns: &s.turns,
            diary: &s.diary,
            state: &s.state,
            pending_message: "",
        };
        match with_retries(config.max_retries, || judge.open(&ctx)) {
            Ok(m) if !m.trim().is_empty() => m,
            Ok(_) => return fail(s, "judge opened with an empty message".into()),
            Err(e) => return fail(s, e.to_string()),
        }
    };

    let termination = loop {
        let turn_index = s.turns.len() + 1;
        let history = target_history(&s.turns, &msg);
        let response = match with_retries(config.max_retries, || {
            target.respond(&task.id, turn_index, &history)
        }) {
            Ok(r) if !r.trim().is_empty() => r,
            Ok(_) => return fail(s, format!("target returned empty text at turn {turn_index}")),
            Err(e) => return fail(s, e.to_string()),
        };

        let parsed: Result<(DiaryDraft, String), SessionError> = (|| {
            let ctx = JudgeContext {
                persona,
                task,
                condition: config.condition,
                turns: &s.turns,
                diary: &s.diary,
                state: &s.state,
                pending_message: &msg,
            };
            let raw = with_retries(config.max_retries, || judge.step(&ctx, &response))?;
            match parse_judge_reply(&raw) {
                Ok(ok) => Ok(ok),
                // One retry on malformed output, then give up.
                Err(_) => {
                    let raw = with_retries(config.max_retries, || judge.step(&ctx, &response))?;
                    parse_judge_reply(&raw)
                }
            }
        })();
        let (draft, next_message) = match parsed {
            Ok(v) => v,
            Err(e) => return fail(s, format!("turn {turn_index}: {e}")),
        };

        let q_prev_mean = if s.diary.is_empty() {
            draft.q
        } else {
            s.diary.iter().map(|e| e.q).sum::<f64>() / s.diary.len() as f64
        };
        let new_state = match update_state(
            &s.state,
            &persona.profile,
            draft.q,
            q_prev_mean,
            &config.emotion,
        ) {
            Ok(st) => st,
            Err(e) => return fail(s, format!("turn {turn_index}: {e}")),
        };
        s.state = new_state;
        s.trajectory.push(new_state);
        s.turns.push(ConversationTurn {
            index: turn_index,
            judge_message: msg.clone(),
            target_response: response,
        });
        s.diary.push(DiaryEntry {
            turn: turn_index,
            q: draft.q,
            rationale: draft.rationale,
            insights: draft.insights,
            emotion: new_state,
        });
        s.goal_achieved |= draft.goal_met;

        if draft.goal_met {
            break TerminationReason::GoalMet;
        }
        if s.state.patience < config.patience_floor {
            break TerminationReason::PatienceExhausted;
        }
        if turn_index as u32 >= task.max_turns {
            break TerminationReason::MaxTurns;
        }
        match next_message {
            m if m.trim().is_empty() => {
                // The judge closed the conversation without declaring the
                // goal met; recorded as goal_met termination with the goal
                // flag still false.
                break TerminationReason::GoalMet;
            }
            m => msg = m,
        }
    };

    build_record(
        persona,
        task,
        config,
        seed,
        &judge_name,
        &target_name,
        s,
        termination,
        None,
    )
}

/// Re-scores a finished session from its visible transcript alone. The
/// scorer never receives persona, expertise, diary, or the original scores.
pub fn blind_rescore(
    record: &SessionRecord,
    scorer: &mut dyn TranscriptScorer,
) -> Result<f64, SessionError> {
    if record.turns.is_empty() {
        return Err(SessionError::EmptyTranscript);
    }
    let score = scorer.score_transcript(&record.turns)?;
    if !(0.0..=1.0).contains(&score) || !score.is_finite() {
        return Err(SessionError::Scorer(format!(
            "scorer returned {score}, outside [0, 1]"
        )));
    }
    Ok(score)
}

// ---------------------------------------------------------------------------
// Scripted backends
// ---------------------------------------------------------------------------

/// Deterministic canned target: responses keyed by (task id, turn).
pub struct ScriptedTarget {
    script: BTreeMap<(String, usize), String>,
}

impl ScriptedTarget {
    pub fn new(entries: impl IntoIterator<Item = ((String, usize), String)>) -> Self {
        ScriptedTarget {
            script: entries.into_iter().collect(),
        }
    }

    /// JSON shape: {"task-id": {"1": "response", "2": "..."}}.
    pub fn from_json(json: &str) -> Result<Self, SessionError> {
        let raw: BTreeMap<String, BTreeMap<String, String>> =
            serde_json::from_str(json).map_err(|e| SessionError::Script(e.to_string()))?;
        let mut script = BTreeMap::new();
        for (task, turns) in raw {
            for (turn, text) in turns {
                let turn: usize = turn
                    .parse()
                    .map_err(|_| SessionError::Script(format!("non-numeric turn key '{turn}'")))?;
                script.insert((task.clone(), turn), text);
            }
        }
        Ok(ScriptedTarget { script })
    }
}

impl TargetClient for ScriptedTarget {
    fn name(&self) -> &str {
        "scripted-target"
    }

    fn respond(
        &mut self,
        task_id: &str,
        turn: usize,
        _history: &[ChatMessage],
    ) -> Result<String, SessionError> {
        self.script
            .get(&(task_id.to_string(), turn))
            .cloned()
            .ok_or_else(|| SessionError::ScriptMiss {
                task: task_id.to_string(),
                turn,
            })
    }
}

/// Deterministic canned judge: replays raw judge outputs. The opening message
/// is keyed by turn 0; each evaluation reply by the turn it scores.
pub struct ScriptedJudge {
    script: BTreeMap<(String, usize), String>,
}

impl ScriptedJudge {
    pub fn new(entries: impl IntoIterator<Item = ((String, usize), String)>) -> Self {
        ScriptedJudge {
            script: entries.into_iter().collect(),
        }
    }

    /// JSON shape: {"task-id": {"0": "opening message", "1": "raw reply", ...}}.
    pub fn from_json(json: &str) -> Result<Self, SessionError> {
        let target = ScriptedTarget::from_json(json)?;
        Ok(ScriptedJudge {
            script: target.script,
        })
    }
}

impl JudgeBackend for ScriptedJudge {
    fn name(&self) -> &str {
        "scripted-judge"
    }

    fn open(&mut self, ctx: &JudgeContext) -> Result<String, SessionError> {
        self.script
            .get(&(ctx.task.id.clone(), 0))
            .cloned()
            .ok_or_else(|| SessionError::ScriptMiss {
                task: ctx.task.id.clone(),
                turn: 0,
            })
    }

    fn step(&mut self, ctx: &JudgeContext, _latest: &str) -> Result<String, SessionError> {
        let turn = ctx.turns.len() + 1;
        self.script
            .get(&(ctx.task.id.clone(), turn))
            .cloned()
            .ok_or_else(|| SessionError::ScriptMiss {
                task: ctx.task.id.clone(),
                turn,
            })
    }
}

/// Test scorer returning a fixed value.
pub struct FixedScorer(pub f64);

impl TranscriptScorer for FixedScorer {
    fn name(&self) -> &str {
        "fixed-scorer"
    }

    fn score_transcript(&mut self, _turns: &[ConversationTurn]) -> Result<f64, SessionError> {
        Ok(self.0)
    }
}
