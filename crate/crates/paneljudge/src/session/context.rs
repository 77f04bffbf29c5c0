//! Builds the judge-side context document for a turn: persona narrative,
//! current emotional state, and the accumulated private diary. The target
//! never sees any of this.

use super::types::{Condition, DiaryEntry, Polarity};
use crate::emotion::EmotionalState;
use crate::persona::{PersonaSpec, TaskSpec};

/// Deterministic context document for the judge backend. `structured` carries
/// the full persona, trait profile, emotional state, and one diary summary
/// line per completed turn; `simple` reduces the persona to a single line;
/// `none` drops persona material entirely; `repeated` renders like
/// `structured` (the repetition of a single persona is orchestrated by the
/// caller, not by the prompt).
pub fn compose_judge_context(
    persona: &PersonaSpec,
    task: &TaskSpec,
    diary: &[DiaryEntry],
    state: &EmotionalState,
    condition: Condition,
) -> String {
    let mut doc = String::new();
    match condition {
        Condition::Structured | Condition::Repeated => {
            doc.push_str("## Who you are\n");
            doc.push_str(&format!(
                "You are {} ({} years old, {}), with {} expertise. Domains you know well: {}.\n",
                persona.background,
                persona.age,
                persona.region.as_str(),
                persona.expertise.as_str(),
                persona
                    .domain_tags
                    .iter()
                    .map(|d| d.as_str())
                    .collect::<Vec<_>>()
                    .join(", "),
            ));
            let p = &persona.profile;
            doc.push_str(&format!(
                "Personality (0-1): openness {:.2}, conscientiousness {:.2}, extraversion {:.2}, agreeableness {:.2}, neuroticism {:.2}.\n",
                p.openness, p.conscientiousness, p.extraversion, p.agreeableness, p.neuroticism,
            ));
            doc.push_str("\n## How you feel right now\n");
            doc.push_str(&format!(
                "trust {:.3}, frustration {:.3}, engagement {:.3}, patience {:.3}, fatigue {:.3}\n",
                state.trust, state.frustration, state.engagement, state.patience, state.fatigue,
            ));
            doc.push_str("\n## Your private diary so far\n");
            if diary.is_empty() {
                doc.push_str("(no entries yet)\n");
            } else {
                for e in diary {
                    let issues = e
                        .insights
                        .iter()
                        .filter(|i| i.polarity == Polarity::Issue)
                        .count();
                    doc.push_str(&format!(
                        "turn {}: q={:.4}, {} issue(s) noted; {}\n",
                        e.turn, e.q, issues, e.rationale,
                    ));
                }
            }
            doc.push('\n');
        }
        Condition::Simple => {
            doc.push_str(&format!(
                "You are {}, judging responses about {}.\n\n",
                persona.background,
                task.domain.as_str(),
            ));
        }
        Condition::None => {}
    }
    doc.push_str("## Your task\n");
    doc.push_str(&format!(
        "Converse with the assistant about: {}\nDomain: {}. Complexity: {}. You have at most {} turns.\n",
        task.goal,
        task.domain.as_str(),
        task.complexity.as_str(),
        task.max_turns,
    ));
    doc.push_str(
        "\nAfter every assistant response, privately evaluate it. Reply with your next message to the assistant (omit it if you are done), followed by exactly one fenced block:\n```diary\nq: <score 0-1>\nrationale: <one line>\ninsight: <issue|strength> | <functionality|accuracy|helpfulness|clarity|safety> | <low|medium|high> | <one observation>\ngoal: <met|unmet>\n```\nThe assistant never sees the fenced block.\n",
    );
    doc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::emotion::init_state;
    use crate::persona::{builtin_catalog, builtin_pool};
    use crate::session::types::{DiaryEntry, Insight, IssueCategory, Severity};

    fn fixture() -> (PersonaSpec, TaskSpec, EmotionalState) {
        let pool = builtin_pool();
        let catalog = builtin_catalog();
        let persona = pool[0].clone();
        let task = catalog[0].clone();
        let state = init_state(&persona.profile);
        (persona, task, state)
    }

    fn entry(turn: usize, q: f64) -> DiaryEntry {
        DiaryEntry {
            turn,
            q,
            rationale: format!("assessment {turn}"),
            insights: vec![Insight {
                polarity: Polarity::Issue,
                category: IssueCategory::Clarity,
                severity: Severity::Low,
                text: format!("observation {turn}"),
            }],
            emotion: init_state(&builtin_pool()[0].profile),
        }
    }

    #[test]
    fn none_condition_contains_no_persona_fields() {
        let (persona, task, state) = fixture();
        let doc = compose_judge_context(&persona, &task, &[], &state, Condition::None);
        assert!(!doc.contains(&persona.background));
        assert!(!doc.contains("Personality"));
        assert!(!doc.contains("frustration"));
        assert!(doc.contains(&task.goal));
    }

    #[test]
    fn simple_condition_is_one_line_persona() {
        let (persona, task, state) = fixture();
        let doc = compose_judge_context(&persona, &task, &[], &state, Condition::Simple);
        assert!(doc.contains(&persona.background));
        assert!(!doc.contains("Personality"));
        assert!(!doc.contains("diary so far"));
    }

    #[test]
    fn structured_includes_per_turn_diary_summaries() {
        let (persona, task, state) = fixture();
        let diary = vec![entry(1, 0.8), entry(2, 0.6), entry(3, 0.7)];
        let doc =
            compose_judge_context(&persona, &task, &diary, &state, Condition::Structured);
        assert!(doc.contains("turn 1: q=0.8000"));
        assert!(doc.contains("turn 2: q=0.6000"));
        assert!(doc.contains("turn 3: q=0.7000"));
        assert!(doc.contains("Personality"));
        assert!(doc.contains(&persona.background));
    }

    #[test]
    fn repeated_renders_like_structured() {
        let (persona, task, state) = fixture();
        let a = compose_judge_context(&persona, &task, &[], &state, Condition::Structured);
        let b = compose_judge_context(&persona, &task, &[], &state, Condition::Repeated);
        assert_eq!(a, b);
    }

    #[test]
    fn deterministic_for_same_inputs() {
        let (persona, task, state) = fixture();
        let diary = vec![entry(1, 0.55)];
        let a = compose_judge_context(&persona, &task, &diary, &state, Condition::Structured);
        let b = compose_judge_context(&persona, &task, &diary, &state, Condition::Structured);
        assert_eq!(a, b);
    }
}
