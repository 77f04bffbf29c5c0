//! Session domain types shared by the runtime, the synthetic backends, and
//! the analysis layers.

use crate::emotion::{EmotionTrajectory, EmotionalState};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum SessionError {
    #[error("empty diary: session produced no scored turns")]
    EmptyDiary,
    #[error("diary parse failed: {0}")]
    DiaryParse(String),
    #[error("diary q {0} outside [0, 1]")]
    QualityRange(f64),
    #[error("unknown insight category '{0}'")]
    UnknownCategory(String),
    #[error("unknown severity '{0}'")]
    UnknownSeverity(String),
    #[error("unknown polarity '{0}'")]
    UnknownPolarity(String),
    #[error("judge backend '{backend}' failed: {message}")]
    JudgeBackend { backend: String, message: String },
    #[error("target backend '{backend}' failed: {message}")]
    TargetBackend { backend: String, message: String },
    #[error("scorer backend failed: {0}")]
    Scorer(String),
    #[error("script has no entry for task '{task}' turn {turn}")]
    ScriptMiss { task: String, turn: usize },
    #[error("script file error: {0}")]
    Script(String),
    #[error("transcript is empty")]
    EmptyTranscript,
    #[error("emotion update failed: {0}")]
    Emotion(#[from] crate::emotion::EmotionError),
    #[error("record invalid: {0}")]
    InvalidRecord(String),
    #[error("http error: {0}")]
    Http(String),
}

/// Five-way issue vocabulary used in diary insights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IssueCategory {
    Functionality,
    Accuracy,
    Helpfulness,
    Clarity,
    Safety,
}

impl IssueCategory {
    pub const ALL: [IssueCategory; 5] = [
        IssueCategory::Functionality,
        IssueCategory::Accuracy,
        IssueCategory::Helpfulness,
        IssueCategory::Clarity,
        IssueCategory::Safety,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            IssueCategory::Functionality => "functionality",
            IssueCategory::Accuracy => "accuracy",
            IssueCategory::Helpfulness => "helpfulness",
            IssueCategory::Clarity => "clarity",
            IssueCategory::Safety => "safety",
        }
    }

    pub fn parse(s: &str) -> Result<Self, SessionError> {
        match s.trim() {
            "functionality" => Ok(IssueCategory::Functionality),
            "accuracy" => Ok(IssueCategory::Accuracy),
            "helpfulness" => Ok(IssueCategory::Helpfulness),
            "clarity" => Ok(IssueCategory::Clarity),
            "safety" => Ok(IssueCategory::Safety),
            other => Err(SessionError::UnknownCategory(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Low,
    Medium,
    High,
}

impl Severity {
    pub fn as_str(&self) -> &'static str {
        match self {
            Severity::Low => "low",
            Severity::Medium => "medium",
            Severity::High => "high",
        }
    }

    pub fn parse(s: &str) -> Result<Self, SessionError> {
        match s.trim() {
            "low" => Ok(Severity::Low),
            "medium" => Ok(Severity::Medium),
            "high" => Ok(Severity::High),
            other => Err(SessionError::UnknownSeverity(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Polarity {
    Issue,
    Strength,
}

impl Polarity {
    pub fn as_str(&self) -> &'static str {
        match self {
            Polarity::Issue => "issue",
            Polarity::Strength => "strength",
        }
    }

    pub fn parse(s: &str) -> Result<Self, SessionError> {
        match s.trim() {
            "issue" => Ok(Polarity::Issue),
            "strength" => Ok(Polarity::Strength),
            other => Err(SessionError::UnknownPolarity(other.to_string())),
        }
    }
}

/// One observation recorded in a diary entry.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Insight {
    pub polarity: Polarity,
    pub category: IssueCategory,
    pub severity: Severity,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConversationTurn {
    /// 1-based, consecutive.
    pub index: usize,
    pub judge_message: String,
    pub target_response: String,
}

/// Private per-turn evaluation record, invisible to the target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiaryEntry {
    pub turn: usize,
    /// Response quality in [0, 1].
    pub q: f64,
    pub rationale: String,
    pub insights: Vec<Insight>,
    /// Emotional state after this turn's update.
    pub emotion: EmotionalState,
}

/// Persona-context ablation arm for a session.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    Structured,
    Simple,
    None,
    Repeated,
}

impl Condition {
    pub const ALL: [Condition; 4] = [
        Condition::Structured,
        Condition::Simple,
        Condition::None,
        Condition::Repeated,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Condition::Structured => "structured",
            Condition::Simple => "simple",
            Condition::None => "none",
            Condition::Repeated => "repeated",
        }
    }
}

/// Why a session stopped. `Failed` marks partial records persisted after an
/// unrecoverable backend or parse error; the record's `failure` field carries
/// the message and analysis layers skip such records.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminationReason {
    MaxTurns,
    PatienceExhausted,
    GoalMet,
    Failed,
}

impl TerminationReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            TerminationReason::MaxTurns => "max_turns",
            TerminationReason::PatienceExhausted => "patience_exhausted",
            TerminationReason::GoalMet => "goal_met",
            TerminationReason::Failed => "failed",
        }
    }
}

/// Complete persisted outcome of one judge session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionRecord {
    pub schema_version: u32,
    pub session_id: String,
    pub run_label: String,
    pub task_id: String,
    pub persona_id: u32,
    pub condition: Condition,
    pub turns: Vec<ConversationTurn>,
    pub diary: Vec<DiaryEntry>,
    pub trajectory: EmotionTrajectory,
    /// Mean of per-turn q values; 0.0 for failed records with no turns.
    pub final_score: f64,
    pub goal_achieved: bool,
    pub termination: TerminationReason,
    pub failure: Option<String>,
    pub seed: u64,
    pub judge_backend: String,
    pub target_backend: String,
}

impl SessionRecord {
    pub fn is_failed(&self) -> bool {
        self.failure.is_some()
    }

    /// Structural validation used by the store before persisting.
    pub fn validate(&self) -> Result<(), SessionError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(SessionError::InvalidRecord(format!(
                "schema_version {} (expected {})",
                self.schema_version, SCHEMA_VERSION
            )));
        }
        if self.diary.len() != self.turns.len() {
            return Err(SessionError::InvalidRecord(format!(
                "diary length {} != turns length {}",
                self.diary.len(),
                self.turns.len()
            )));
        }
        for (i, t) in self.turns.iter().enumerate() {
            if t.index != i + 1 {
                return Err(SessionError::InvalidRecord(format!(
                    "turn index {} at position {}",
                    t.index, i
                )));
            }
            if t.judge_message.is_empty() || t.target_response.is_empty() {
                return Err(SessionError::InvalidRecord(format!(
                    "empty message text at turn {}",
                    t.index
                )));
            }
        }
        for e in &self.diary {
            if !(0.0..=1.0).contains(&e.q) || !e.q.is_finite() {
                return Err(SessionError::InvalidRecord(format!(
                    "diary q {} at turn {} outside [0, 1]",
                    e.q, e.turn
                )));
            }
            e.emotion
                .validate()
                .map_err(|err| SessionError::InvalidRecord(err.to_string()))?;
        }
        if !self.turns.is_empty() {
            let mean =
                self.diary.iter().map(|e| e.q).sum::<f64>() / self.diary.len() as f64;
            if (self.final_score - mean).abs() > 1e-9 {
                return Err(SessionError::InvalidRecord(format!(
                    "final_score {} is not the mean of diary q values {}",
                    self.final_score, mean
                )));
            }
        }
        if self.failure.is_none() && self.termination == TerminationReason::Failed {
            return Err(SessionError::InvalidRecord(
                "termination failed without a failure message".into(),
            ));
        }
        if self.failure.is_some() && self.termination != TerminationReason::Failed {
            return Err(SessionError::InvalidRecord(
                "failure message without failed termination".into(),
            ));
        }
        Ok(())
    }

    /// Issue-polarity insights across all turns.
    pub fn issues(&self) -> impl Iterator<Item = &Insight> {
        self.diary
            .iter()
            .flat_map(|e| e.insights.iter())
            .filter(|i| i.polarity == Polarity::Issue)
    }

    pub fn insight_count(&self) -> usize {
        self.diary.iter().map(|e| e.insights.len()).sum()
    }
}

/// Mean per-turn quality of a completed session.
pub fn session_score(record: &SessionRecord) -> Result<f64, SessionError> {
    if record.diary.is_empty() {
        return Err(SessionError::EmptyDiary);
    }
    Ok(record.diary.iter().map(|e| e.q).sum::<f64>() / record.diary.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::emotion::{init_state, EmotionTrajectory};

    fn record_with_qs(qs: &[f64]) -> SessionRecord {
        let state = init_state(&crate::persona::BigFiveProfile {
            openness: 0.5,
            conscientiousness: 0.5,
            extraversion: 0.5,
            agreeableness: 0.5,
            neuroticism: 0.5,
        });
        let turns: Vec<ConversationTurn> = qs
            .iter()
            .enumerate()
            .map(|(i, _)| ConversationTurn {
                index: i + 1,
                judge_message: format!("probe {}", i + 1),
                target_response: format!("answer {}", i + 1),
            })
            .collect();
        let diary: Vec<DiaryEntry> = qs
            .iter()
            .enumerate()
            .map(|(i, q)| DiaryEntry {
                turn: i + 1,
                q: *q,
                rationale: "ok".into(),
                insights: vec![],
                emotion: state,
            })
            .collect();
        let final_score = if qs.is_empty() {
            0.0
        } else {
            qs.iter().sum::<f64>() / qs.len() as f64
        };
        SessionRecord {
            schema_version: SCHEMA_VERSION,
            session_id: "lbl/t/p/c".into(),
            run_label: "lbl".into(),
            task_id: "t".into(),
            persona_id: 1,
            condition: Condition::Structured,
            turns,
            diary,
            trajectory: EmotionTrajectory::new(state),
            final_score,
            goal_achieved: false,
            termination: TerminationReason::MaxTurns,
            failure: None,
            seed: 0,
            judge_backend: "test".into(),
            target_backend: "test".into(),
        }
    }

    #[test]
    fn session_score_is_mean_of_qs() {
        let r = record_with_qs(&[0.8, 0.6]);
        assert_eq!(session_score(&r).unwrap(), 0.7);
        let r = record_with_qs(&[0.91]);
        assert_eq!(session_score(&r).unwrap(), 0.91);
        let r = record_with_qs(&[0.3, 0.3, 0.3]);
        assert!((session_score(&r).unwrap() - 0.3).abs() < 1e-12);
    }

    #[test]
    fn empty_diary_errors() {
        let r = record_with_qs(&[]);
        assert!(matches!(session_score(&r), Err(SessionError::EmptyDiary)));
    }

    #[test]
    fn validate_catches_q_out_of_range() {
        let mut r = record_with_qs(&[0.5]);
        r.diary[0].q = 1.2;
        r.final_score = 1.2;
        assert!(r.validate().is_err());
    }

    #[test]
    fn validate_catches_diary_turn_mismatch() {
        let mut r = record_with_qs(&[0.5, 0.6]);
        r.diary.pop();
        assert!(r.validate().is_err());
    }

    #[test]
    fn validate_catches_score_drift() {
        let mut r = record_with_qs(&[0.5, 0.7]);
        r.final_score = 0.9;
        assert!(r.validate().is_err());
    }

    #[test]
    fn vocabulary_round_trips() {
        for c in IssueCategory::ALL {
            assert_eq!(IssueCategory::parse(c.as_str()).unwrap(), c);
        }
        for s in [Severity::Low, Severity::Medium, Severity::High] {
            assert_eq!(Severity::parse(s.as_str()).unwrap(), s);
        }
        for p in [Polarity::Issue, Polarity::Strength] {
            assert_eq!(Polarity::parse(p.as_str()).unwrap(), p);
        }
        assert!(IssueCategory::parse("speed").is_err());
        assert!(Severity::parse("catastrophic").is_err());
    }

    #[test]
    fn record_serde_round_trip() {
        let r = record_with_qs(&[0.4, 0.9]);
        let line = serde_json::to_string(&r).unwrap();
        let back: SessionRecord = serde_json::from_str(&line).unwrap();
        assert_eq!(r, back);
    }

    #[test]
    fn severity_orders_low_to_high() {
        assert!(Severity::Low < Severity::Medium);
        assert!(Severity::Medium < Severity::High);
    }
}
