//! The judge output protocol: one fenced ```diary block per turn holding
//! key-value lines, with any text outside the fence read as the judge's next
//! message to the target.
//!
//! ```text
//! q: 0.4
//! rationale: misses the stated rollback constraint
//! insight: issue | accuracy | high | recovery steps reference a removed console path
//! goal: unmet
//! ```

use super::types::{Insight, IssueCategory, Polarity, SessionError, Severity};

pub const DIARY_FENCE_OPEN: &str = "```diary";
pub const DIARY_FENCE_CLOSE: &str = "```";

/// Parsed diary fields before the runtime attaches turn index and emotional
/// snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct DiaryDraft {
    pub q: f64,
    pub rationale: String,
    pub insights: Vec<Insight>,
    pub goal_met: bool,
}

/// Splits raw judge output into (diary block body, remaining text). The
/// remainder is the judge's next conversational message.
pub fn extract_diary_block(raw: &str) -> Result<(String, String), SessionError> {
    let open = raw
        .find(DIARY_FENCE_OPEN)
        .ok_or_else(|| SessionError::DiaryParse("no ```diary block found".into()))?;
    let body_start = open + DIARY_FENCE_OPEN.len();
    let close_rel = raw[body_start..]
        .find(DIARY_FENCE_CLOSE)
        .ok_or_else(|| SessionError::DiaryParse("unterminated ```diary block".into()))?;
    let body = raw[body_start..body_start + close_rel].trim().to_string();
    let before = raw[..open].trim();
    let after = raw[body_start + close_rel + DIARY_FENCE_CLOSE.len()..].trim();
    let remainder = match (before.is_empty(), after.is_empty()) {
        (true, true) => String::new(),
        (false, true) => before.to_string(),
        (true, false) => after.to_string(),
        (false, false) => format!("{before}\n{after}"),
    };
    Ok((body, remainder))
}

fn parse_insight_line(value: &str) -> Result<Insight, SessionError> {
    let parts: Vec<&str> = value.splitn(4, '|').collect();
    if parts.len() != 4 {
        return Err(SessionError::DiaryParse(format!(
            "insight line needs 'polarity | category | severity | text', got '{value}'"
        )));
    }
    let text = parts[3].trim();
    if text.is_empty() {
        return Err(SessionError::DiaryParse("insight text is empty".into()));
    }
    Ok(Insight {
        polarity: Polarity::parse(parts[0])?,
        category: IssueCategory::parse(parts[1])?,
        severity: Severity::parse(parts[2])?,
        text: text.to_string(),
    })
}

/// Parses the body of a diary block (the text between the fences). Requires
/// `q` and `rationale`; `insight` lines and a `goal` line are optional.
/// Unrecognized keys are ignored so minor backend chatter does not fail the
/// session; bad values for known keys do.
pub fn parse_diary(raw: &str) -> Result<DiaryDraft, SessionError> {
    if raw.trim().is_empty() {
        return Err(SessionError::DiaryParse("empty diary output".into()));
    }
    let mut q: Option<f64> = None;
    let mut rationale: Option<String> = None;
    let mut insights = Vec::new();
    let mut goal_met = false;
    for line in raw.lines() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once(':') else {
            continue;
        };
        let value = value.trim();
        match key.trim() {
            "q" => {
                let parsed: f64 = value.parse().map_err(|_| {
                    SessionError::DiaryParse(format!("unparseable q value '{value}'"))
                })?;
                if !(0.0..=1.0).contains(&parsed) || !parsed.is_finite() {
                    return Err(SessionError::QualityRange(parsed));
                }
                q = Some(parsed);
            }
            "rationale" => {
                if value.is_empty() {
                    return Err(SessionError::DiaryParse("empty rationale".into()));
                }
                rationale = Some(value.to_string());
            }
            "insight" => insights.push(parse_insight_line(value)?),
            "goal" => {
                goal_met = match value {
                    "met" => true,
                    "unmet" => false,
                    other => {
                        return Err(SessionError::DiaryParse(format!(
                            "goal must be 'met' or 'unmet', got '{other}'"
                        )))
                    }
                };
            }
            _ => {}
        }
    }
    let q = q.ok_or_else(|| SessionError::DiaryParse("missing q line".into()))?;
    let rationale =
        rationale.ok_or_else(|| SessionError::DiaryParse("missing rationale line".into()))?;
    Ok(DiaryDraft {
        q,
        rationale,
        insights,
        goal_met,
    })
}

/// Parses a full raw judge reply: extracts the fenced block, parses it, and
/// returns the draft plus the judge's next message (empty when the judge
/// wrote nothing outside the fence).
pub fn parse_judge_reply(raw: &str) -> Result<(DiaryDraft, String), SessionError> {
    let (body, remainder) = extract_diary_block(raw)?;
    let draft = parse_diary(&body)?;
    Ok((draft, remainder))
}

/// Renders a diary block body; `render_judge_reply` wraps it in the fence and
/// prepends the next message. Inverse of the parser for valid drafts.
pub fn render_diary_body(draft: &DiaryDraft) -> String {
    let mut out = String::new();
    out.push_str(&format!("q: {:.4}\n", draft.q));
    out.push_str(&format!("rationale: {}\n", draft.rationale));
    for i in &draft.insights {
        out.push_str(&format!(
            "insight: {} | {} | {} | {}\n",
            i.polarity.as_str(),
            i.category.as_str(),
            i.severity.as_str(),
            i.text
        ));
    }
    out.push_str(&format!(
        "goal: {}\n",
        if draft.goal_met { "met" } else { "unmet" }
    ));
    out
}

pub fn render_judge_reply(draft: &DiaryDraft, next_message: &str) -> String {
    let mut out = String::new();
    if !next_message.is_empty() {
        out.push_str(next_message);
        out.push('\n');
    }
    out.push_str(DIARY_FENCE_OPEN);
    out.push('\n');
    out.push_str(&render_diary_body(draft));
    out.push_str(DIARY_FENCE_CLOSE);
    out.push('\n');
    out
}
