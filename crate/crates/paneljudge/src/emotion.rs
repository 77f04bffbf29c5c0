//! Persona-modulated emotional state carried across session turns.
//!
//! All five dimensions live in [0, 1] and are updated once per turn from the
//! turn's quality score `q`. Trait coupling: neuroticism scales frustration
//! growth, agreeableness shapes trust (slow to give, quick to withdraw),
//! conscientiousness slows fatigue. Engagement tracks the quality trend only
//! and is deliberately independent of every trait.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::persona::BigFiveProfile;

#[derive(Debug, Error)]
pub enum EmotionError {
    #[error("quality score {0} is outside [0, 1]")]
    QualityRange(f64),
    #[error("previous-quality mean {0} is outside [0, 1]")]
    PrevMeanRange(f64),
    #[error("state field {field} = {value} is outside [0, 1]")]
    StateRange { field: &'static str, value: f64 },
    #[error("trajectory holds no states")]
    EmptyTrajectory,
}

/// Update rates. Field values are the shipped defaults.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmotionConfig {
    /// Base rate applied to the frustration and trust deltas.
    pub base_rate: f64,
    pub engagement_rate: f64,
    pub patience_rate: f64,
    pub fatigue_rate: f64,
}

impl Default for EmotionConfig {
    fn default() -> Self {
        EmotionConfig {
            base_rate: 0.4,
            engagement_rate: 0.2,
            patience_rate: 0.15,
            fatigue_rate: 0.02,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmotionalState {
    pub trust: f64,
    pub frustration: f64,
    pub engagement: f64,
    pub patience: f64,
    pub fatigue: f64,
}

impl EmotionalState {
    fn fields(&self) -> [(&'static str, f64); 5] {
        [
            ("trust", self.trust),
            ("frustration", self.frustration),
            ("engagement", self.engagement),
            ("patience", self.patience),
            ("fatigue", self.fatigue),
        ]
    }

    pub fn validate(&self) -> Result<(), EmotionError> {
        for (field, value) in self.fields() {
            if !(0.0..=1.0).contains(&value) || !value.is_finite() {
                return Err(EmotionError::StateRange { field, value });
            }
        }
        Ok(())
    }
}

/// Session-start state. The same for every persona: traits shape how the
/// state moves, not where it starts.
pub fn init_state(_profile: &BigFiveProfile) -> EmotionalState {
    EmotionalState {
        trust: 0.5,
        frustration: 0.0,
        engagement: 0.7,
        patience: 0.8,
        fatigue: 0.0,
    }
}

fn clamp(v: f64) -> f64 {
    v.clamp(0.0, 1.0)
}

/// Advance the state by one turn.
///
/// `q` is the turn's quality score, `q_prev_mean` the mean quality of all
/// prior turns (callers pass `q` itself on the first turn, leaving engagement
/// unchanged). The patience decay reads the incoming frustration, not the
/// updated one.
pub fn update_state(
    state: &EmotionalState,
    profile: &BigFiveProfile,
    q: f64,
    q_prev_mean: f64,
    cfg: &EmotionConfig,
) -> Result<EmotionalState, EmotionError> {
    if !(0.0..=1.0).contains(&q) || !q.is_finite() {
        return Err(EmotionError::QualityRange(q));
    }
    if !(0.0..=1.0).contains(&q_prev_mean) || !q_prev_mean.is_finite() {
        return Err(EmotionError::PrevMeanRange(q_prev_mean));
    }
    state.validate()?;

    let n = profile.neuroticism;
    let a = profile.agreeableness;
    let c = profile.conscientiousness;

    let frustration = clamp(state.frustration + cfg.base_rate * (0.5 + n) * (0.5 - q));
    let trust = if q >= 0.5 {
        clamp(state.trust + cfg.base_rate * (q - 0.5) * (0.5 + a))
    } else {
        clamp(state.trust - cfg.base_rate * (0.5 - q) * (1.5 - a))
    };
    let engagement = clamp(state.engagement + cfg.engagement_rate * (q - q_prev_mean));
    let patience = clamp(state.patience - cfg.patience_rate * (1.0 - q) * (1.0 + state.frustration));
    let fatigue = clamp(state.fatigue + cfg.fatigue_rate * (2.0 - c));

    Ok(EmotionalState {
        trust,
        frustration,
        engagement,
        patience,
        fatigue,
    })
}

/// Per-session emotional record: the fixed starting state plus one state per
/// completed turn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmotionTrajectory {
    pub initial: EmotionalState,
    pub per_turn: Vec<EmotionalState>,
}

impl EmotionTrajectory {
    pub fn new(initial: EmotionalState) -> Self {
        EmotionTrajectory {
            initial,
            per_turn: Vec::new(),
        }
    }

    pub fn push(&mut self, state: EmotionalState) {
        self.per_turn.push(state);
    }

    pub fn turns(&self) -> usize {
        self.per_turn.len()
    }

    pub fn last(&self) -> &EmotionalState {
        self.per_turn.last().unwrap_or(&self.initial)
    }

    fn all_states(&self) -> Vec<&EmotionalState> {
        std::iter::once(&self.initial)
            .chain(self.per_turn.iter())
            .collect()
    }

    /// Summary over the whole trajectory including the initial state; never
    /// fails because the initial state is always present.
    pub fn summary(&self) -> TrajectorySummary {
        trajectory_stats(&self.all_states()).expect("initial state is always present")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySummary {
    pub peak_frustration: f64,
    /// Final trust minus initial trust.
    pub trust_gain: f64,
    pub mean_engagement: f64,
    pub final_patience: f64,
}

/// Summary statistics over an ordered state sequence (first = session start).
pub fn trajectory_stats(states: &[&EmotionalState]) -> Result<TrajectorySummary, EmotionError> {
    let first = states.first().ok_or(EmotionError::EmptyTrajectory)?;
    let last = states.last().unwrap();
    let peak_frustration = states
        .iter()
        .map(|s| s.frustration)
        .fold(f64::NEG_INFINITY, f64::max);
    let mean_engagement =
        states.iter().map(|s| s.engagement).sum::<f64>() / states.len() as f64;
    Ok(TrajectorySummary {
        peak_frustration,
        trust_gain: last.trust - first.trust,
        mean_engagement,
        final_patience: last.patience,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::persona::builtin_pool;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn profile(o: f64, c: f64, e: f64, a: f64, n: f64) -> BigFiveProfile {
        BigFiveProfile {
            openness: o,
            conscientiousness: c,
            extraversion: e,
            agreeableness: a,
            neuroticism: n,
        }
    }

    fn mid_profile() -> BigFiveProfile {
        profile(0.5, 0.5, 0.5, 0.5, 0.5)
    }

    #[test]
    fn init_is_fixed() {
        let s = init_state(&mid_profile());
        assert_eq!(
            s,
            EmotionalState {
                trust: 0.5,
                frustration: 0.0,
                engagement: 0.7,
                patience: 0.8,
                fatigue: 0.0
            }
        );
        // Trait-independent.
        assert_eq!(s, init_state(&profile(0.9, 0.1, 0.9, 0.1, 0.9)));
    }

    #[test]
    fn zero_quality_raises_frustration() {
        let p = mid_profile();
        let cfg = EmotionConfig::default();
        let s = update_state(&init_state(&p), &p, 0.0, 0.0, &cfg).unwrap();
        // 0.4 * (0.5 + 0.5) * (0.5 - 0.0) = 0.2
        assert_abs_diff_eq!(s.frustration, 0.2, epsilon = 1e-12);
    }

    #[test]
    fn neutral_quality_leaves_trust_and_frustration() {
        let p = mid_profile();
        let cfg = EmotionConfig::default();
        let s0 = init_state(&p);
        let s = update_state(&s0, &p, 0.5, 0.5, &cfg).unwrap();
        assert_abs_diff_eq!(s.frustration, s0.frustration, epsilon = 1e-12);
        assert_abs_diff_eq!(s.trust, s0.trust, epsilon = 1e-12);
        assert_abs_diff_eq!(s.engagement, s0.engagement, epsilon = 1e-12);
    }

    #[test]
    fn high_agreeableness_trust_gain() {
        let p = profile(0.5, 0.5, 0.5, 1.0, 0.5);
        let cfg = EmotionConfig::default();
        let s = update_state(&init_state(&p), &p, 1.0, 1.0, &cfg).unwrap();
        // 0.5 + 0.4 * 0.5 * 1.5 = 0.8
        assert_abs_diff_eq!(s.trust, 0.8, epsilon = 1e-12);
    }

    #[test]
    fn frustration_saturates_at_one() {
        let p = profile(0.5, 0.5, 0.5, 0.5, 1.0);
        let cfg = EmotionConfig::default();
        let mut s = init_state(&p);
        for _ in 0..10 {
            s = update_state(&s, &p, 0.0, 0.0, &cfg).unwrap();
        }
        assert_abs_diff_eq!(s.frustration, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn patience_reads_incoming_frustration() {
        // q = 0 each turn with N = 0.5: frustration 0.0 -> 0.2 -> 0.4 while
        // patience decays by 0.15 * (1 + old frustration) per turn.
        let p = mid_profile();
        let cfg = EmotionConfig::default();
        let mut s = init_state(&p);
        s = update_state(&s, &p, 0.0, 0.0, &cfg).unwrap();
        assert_abs_diff_eq!(s.patience, 0.8 - 0.15, epsilon = 1e-12);
        s = update_state(&s, &p, 0.0, 0.0, &cfg).unwrap();
        assert_abs_diff_eq!(s.patience, 0.65 - 0.15 * 1.2, epsilon = 1e-12);
    }

    #[test]
    fn rejects_out_of_range_quality() {
        let p = mid_profile();
        let cfg = EmotionConfig::default();
        let err = update_state(&init_state(&p), &p, 1.5, 0.5, &cfg).unwrap_err();
        assert!(matches!(err, EmotionError::QualityRange(_)));
        let err = update_state(&init_state(&p), &p, 0.5, -0.1, &cfg).unwrap_err();
        assert!(matches!(err, EmotionError::PrevMeanRange(_)));
    }

    #[test]
    fn summary_of_fresh_trajectory() {
        let traj = EmotionTrajectory::new(init_state(&mid_profile()));
        let s = traj.summary();
        assert_abs_diff_eq!(s.peak_frustration, 0.0);
        assert_abs_diff_eq!(s.trust_gain, 0.0);
        assert_abs_diff_eq!(s.mean_engagement, 0.7);
        assert_abs_diff_eq!(s.final_patience, 0.8);
    }

    #[test]
    fn summary_tracks_gain_and_peak() {
        let p = profile(0.5, 0.5, 0.5, 1.0, 0.5);
        let cfg = EmotionConfig::default();
        let mut traj = EmotionTrajectory::new(init_state(&p));
        let s1 = update_state(&traj.initial, &p, 1.0, 1.0, &cfg).unwrap();
        traj.push(s1);
        let s = traj.summary();
        assert_abs_diff_eq!(s.trust_gain, 0.3, epsilon = 1e-12);
        assert_abs_diff_eq!(s.peak_frustration, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn empty_stats_is_an_error() {
        assert!(matches!(
            trajectory_stats(&[]),
            Err(EmotionError::EmptyTrajectory)
        ));
    }

    #[test]
    fn constant_states_give_zero_gain() {
        let s = EmotionalState {
            trust: 0.4,
            frustration: 0.3,
            engagement: 0.6,
            patience: 0.5,
            fatigue: 0.2,
        };
        let states = [&s, &s, &s];
        let out = trajectory_stats(&states).unwrap();
        assert_abs_diff_eq!(out.trust_gain, 0.0);
        assert_abs_diff_eq!(out.peak_frustration, 0.3);
        assert_abs_diff_eq!(out.mean_engagement, 0.6);
    }

    /// Mixed-quality trace used for trait-ordering checks: net-negative
    /// stretches early, partial recovery late. No state clamps under it.
    fn mixed_trace() -> Vec<f64> {
        vec![0.7, 0.2, 0.3, 0.8, 0.25, 0.35, 0.75, 0.3, 0.6, 0.4]
    }

    fn run_trace(p: &BigFiveProfile, qs: &[f64]) -> EmotionTrajectory {
        let cfg = EmotionConfig::default();
        let mut traj = EmotionTrajectory::new(init_state(p));
        let mut seen: Vec<f64> = Vec::new();
        for &q in qs {
            let prev_mean = if seen.is_empty() {
                q
            } else {
                seen.iter().sum::<f64>() / seen.len() as f64
            };
            let next = update_state(traj.last(), p, q, prev_mean, &cfg).unwrap();
            traj.push(next);
            seen.push(q);
        }
        traj
    }

    #[test]
    fn neuroticism_orders_peak_frustration_across_pool() {
        let qs = mixed_trace();
        let pool = builtin_pool();
        let mut by_n: Vec<(f64, f64)> = pool
            .iter()
            .map(|p| {
                (
                    p.profile.neuroticism,
                    run_trace(&p.profile, &qs).summary().peak_frustration,
                )
            })
            .collect();
        by_n.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        for w in by_n.windows(2) {
            assert!(w[0].1 <= w[1].1 + 1e-12, "peak frustration tracks N");
        }
    }

    #[test]
    fn agreeableness_orders_trust_gain_across_pool() {
        let qs = mixed_trace();
        let pool = builtin_pool();
        let mut by_a: Vec<(f64, f64)> = pool
            .iter()
            .map(|p| {
                (
                    p.profile.agreeableness,
                    run_trace(&p.profile, &qs).summary().trust_gain,
                )
            })
            .collect();
        by_a.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        for w in by_a.windows(2) {
            assert!(w[0].1 <= w[1].1 + 1e-12, "trust gain tracks A");
        }
    }

    proptest! {
        #[test]
        fn states_stay_in_bounds(
            traits in proptest::collection::vec(0.0f64..=1.0, 5),
            qs in proptest::collection::vec(0.0f64..=1.0, 1..30),
        ) {
            let p = profile(traits[0], traits[1], traits[2], traits[3], traits[4]);
            let traj = run_trace(&p, &qs);
            for s in std::iter::once(&traj.initial).chain(traj.per_turn.iter()) {
                s.validate().unwrap();
            }
        }

        #[test]
        fn fatigue_never_decreases(
            c in 0.0f64..=1.0,
            qs in proptest::collection::vec(0.0f64..=1.0, 1..30),
        ) {
            let p = profile(0.5, c, 0.5, 0.5, 0.5);
            let traj = run_trace(&p, &qs);
            let mut prev = traj.initial.fatigue;
            for s in &traj.per_turn {
                prop_assert!(s.fatigue >= prev - 1e-12);
                prev = s.fatigue;
            }
        }

        #[test]
        fn frustration_responds_monotonically_to_quality(
            q1 in 0.0f64..=1.0,
            q2 in 0.0f64..=1.0,
            n in 0.0f64..=1.0,
        ) {
            let p = profile(0.5, 0.5, 0.5, 0.5, n);
            let cfg = EmotionConfig::default();
            let s0 = init_state(&p);
            let (lo, hi) = if q1 <= q2 { (q1, q2) } else { (q2, q1) };
            let f_lo = update_state(&s0, &p, lo, lo, &cfg).unwrap().frustration;
            let f_hi = update_state(&s0, &p, hi, hi, &cfg).unwrap().frustration;
            prop_assert!(f_lo >= f_hi - 1e-12, "worse quality never lowers frustration");
        }
    }
}
