//! Panel-scaling analyses over a session store: reliability and discovery
//! curves, their dissociation, variance decomposition inputs, expertise
//! gradients, run-to-run stability, ablation tables, the human-comparison
//! report, and trait-emotion validation.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dedup::{
    threshold_sweep, unique_findings, DedupError, Embedder, FindingSet, SweepTable,
};
use crate::persona::{
    find_persona, global_ranking, rank_panel, select_panel, Complexity, Domain, Expertise,
    PersonaError, PersonaSpec, TaskSpec,
};
use crate::session::{Condition, SessionRecord};
use crate::stats::{
    cohen_d, correlation, fit_scaling_models, icc_single_from_components, icc2k_with_ci,
    ks_two_sample, paired_t, variance_components, welch_t, BootstrapConfig, CorrelationMethod,
    ModelFamily, ModelFit, StatResult, StatsError, ScoreMatrix,
};

pub const CANONICAL_SIZES: [usize; 10] = [1, 2, 3, 4, 5, 8, 12, 16, 24, 32];

#[derive(Debug, Error)]
pub enum ScalingError {
    #[error("no score for task {task} judge {judge}")]
    MissingCell { task: String, judge: u32 },
    #[error("panel sizes empty or not strictly increasing")]
    BadSizes,
    #[error("panel size {0} exceeds the {1} judges available")]
    SizeOutOfRange(usize, usize),
    #[error("no sessions under run label {0}")]
    EmptyRun(String),
    #[error("insight corpus is empty")]
    NoInsights,
    #[error("curves cover different sizes")]
    CurveSizeMismatch,
    #[error("runs cover different (task, judge) grids")]
    GridMismatch,
    #[error("human csv: {0}")]
    HumanCsv(String),
    #[error("human score {0} outside [0,1]")]
    ScoreRange(f64),
    #[error("unknown task id {0}")]
    UnknownTask(String),
    #[error("need at least 3 agents with sessions, have {0}")]
    TooFewAgents(usize),
    #[error("no tasks with at least 2 human sessions")]
    NoComparableTasks,
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Dedup(#[from] DedupError),
    #[error(transparent)]
    Persona(#[from] PersonaError),
}

fn check_sizes(sizes: &[usize], available: usize) -> Result<(), ScalingError> {
    if sizes.is_empty() || sizes.windows(2).any(|w| w[0] >= w[1]) || sizes[0] == 0 {
        return Err(ScalingError::BadSizes);
    }
    let max = *sizes.last().unwrap();
    if max > available {
        return Err(ScalingError::SizeOutOfRange(max, available));
    }
    Ok(())
}

/// Structured, non-failed sessions under one run label. Score matrices and
/// curves deliberately exclude ablation conditions; those have their own
/// analysis.
pub fn run_slice<'a>(records: &'a [SessionRecord], run_label: &str) -> Vec<&'a SessionRecord> {
    records
        .iter()
        .filter(|r| {
            r.run_label == run_label && r.condition == Condition::Structured && !r.is_failed()
        })
        .collect()
}

fn score_map(sessions: &[&SessionRecord]) -> BTreeMap<(String, u32), f64> {
    let mut map = BTreeMap::new();
    for s in sessions {
        map.insert((s.task_id.clone(), s.persona_id), s.final_score);
    }
    map
}

/// Task-by-judge matrix of final session scores for one run. The grid must
/// be complete; the first missing cell is named.
pub fn build_score_matrix(
    records: &[SessionRecord],
    run_label: &str,
) -> Result<ScoreMatrix, ScalingError> {
    let sessions = run_slice(records, run_label);
    if sessions.is_empty() {
        return Err(ScalingError::EmptyRun(run_label.to_string()));
    }
    let tasks: BTreeSet<String> = sessions.iter().map(|s| s.task_id.clone()).collect();
    let judges: BTreeSet<u32> = sessions.iter().map(|s| s.persona_id).collect();
    let map = score_map(&sessions);
    matrix_for(&map, &tasks.into_iter().collect::<Vec<_>>(), &judges.into_iter().collect::<Vec<_>>())
}

fn matrix_for(
    map: &BTreeMap<(String, u32), f64>,
    tasks: &[String],
    judges: &[u32],
) -> Result<ScoreMatrix, ScalingError> {
    let mut values = Vec::with_capacity(tasks.len() * judges.len());
    for t in tasks {
        for j in judges {
            let v = map
                .get(&(t.clone(), *j))
                .ok_or_else(|| ScalingError::MissingCell {
                    task: t.clone(),
                    judge: *j,
                })?;
            values.push(*v);
        }
    }
    Ok(ScoreMatrix::new(
        tasks.to_vec(),
        judges.iter().map(|j| j.to_string()).collect(),
        values,
    )?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingCurve {
    pub sizes: Vec<usize>,
    pub values: Vec<f64>,
    /// Bootstrap interval where available (absent at N = 1).
    pub ci: Vec<Option<(f64, f64)>>,
    /// All four families, best AIC first.
    pub fits: Vec<ModelFit>,
    /// value(N) / value(max size).
    pub saturation: Vec<f64>,
}

impl ScalingCurve {
    pub fn value_at(&self, size: usize) -> Option<f64> {
        self.sizes
            .iter()
            .position(|s| *s == size)
            .map(|i| self.values[i])
    }

    pub fn saturation_at(&self, size: usize) -> Option<f64> {
        self.sizes
            .iter()
            .position(|s| *s == size)
            .map(|i| self.saturation[i])
    }

    pub fn best_family(&self) -> ModelFamily {
        self.fits[0].family
    }

    pub fn fit_for(&self, family: ModelFamily) -> Option<&ModelFit> {
        self.fits.iter().find(|f| f.family == family)
    }
}

fn finish_curve(
    sizes: Vec<usize>,
    values: Vec<f64>,
    ci: Vec<Option<(f64, f64)>>,
) -> Result<ScalingCurve, ScalingError> {
    let points: Vec<(f64, f64)> = sizes
        .iter()
        .zip(&values)
        .map(|(s, v)| (*s as f64, *v))
        .collect();
    let fits = fit_scaling_models(&points)?;
    let last = *values.last().unwrap();
    let saturation = values.iter().map(|v| v / last).collect();
    Ok(ScalingCurve {
        sizes,
        values,
        ci,
        fits,
        saturation,
    })
}

/// Panel-score reliability at each size. Panels are prefixes of one global
/// fitness ranking, so the size-32 panel is the full judge-labeled matrix
/// and its value equals the full-matrix intraclass correlation exactly.
/// Size 1 reports the single-rater reliability from the full decomposition
/// (a one-column panel has no rater pairs to agree).
pub fn icc_curve(
    records: &[SessionRecord],
    pool: &[PersonaSpec],
    catalog: &[TaskSpec],
    run_label: &str,
    sizes: &[usize],
    bootstrap: &BootstrapConfig,
) -> Result<ScalingCurve, ScalingError> {
    let sessions = run_slice(records, run_label);
    if sessions.is_empty() {
        return Err(ScalingError::EmptyRun(run_label.to_string()));
    }
    let map = score_map(&sessions);
    let tasks: Vec<String> = sessions
        .iter()
        .map(|s| s.task_id.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let present: BTreeSet<u32> = sessions.iter().map(|s| s.persona_id).collect();
    let ranking = global_ranking(pool, catalog)?;
    let ranked: Vec<u32> = ranking
        .ranked
        .iter()
        .map(|(id, _)| *id)
        .filter(|id| present.contains(id))
        .collect();
    check_sizes(sizes, ranked.len())?;

    let full = matrix_for(&map, &tasks, &ranked)?;
    let full_components = variance_components(&full)?;

    let mut values = Vec::with_capacity(sizes.len());
    let mut ci = Vec::with_capacity(sizes.len());
    for &n in sizes {
        if n == 1 {
            values.push(icc_single_from_components(&full_components));
            ci.push(None);
            continue;
        }
        // Membership comes from the ranking; column order is canonical so
        // the full-size value is bit-identical to the standalone matrix.
        let mut panel: Vec<u32> = ranked[..n].to_vec();
        panel.sort_unstable();
        let sub = matrix_for(&map, &tasks, &panel)?;
        let icc = icc2k_with_ci(&sub, bootstrap)?;
        values.push(icc.value);
        ci.push(icc.ci_low.zip(icc.ci_high));
    }
    finish_curve(sizes.to_vec(), values, ci)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscoveryCurve {
    pub curve: ScalingCurve,
    pub theta: f64,
    /// Unique counts at theta 0.60 (more merging) per size.
    pub band_low: Vec<f64>,
    /// Unique counts at theta 0.70 (less merging) per size.
    pub band_high: Vec<f64>,
    /// Fraction of high-severity clusters per size.
    pub high_impact_share: Vec<f64>,
}

impl DiscoveryCurve {
    pub fn power_exponent(&self) -> Option<f64> {
        self.curve.fit_for(ModelFamily::PowerLaw).map(|f| f.b)
    }
}

/// Per-task fitness-ranked nested panels at each size, pooled across tasks.
fn nested_panel_sessions<'a>(
    sessions: &[&'a SessionRecord],
    pool: &[PersonaSpec],
    catalog: &[TaskSpec],
    sizes: &[usize],
) -> Result<Vec<(usize, Vec<&'a SessionRecord>)>, ScalingError> {
    let mut by_task: BTreeMap<&str, Vec<&SessionRecord>> = BTreeMap::new();
    for s in sessions {
        by_task.entry(s.task_id.as_str()).or_default().push(s);
    }
    let mut nested = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let mut subset: Vec<&SessionRecord> = Vec::new();
        for (task_id, task_sessions) in &by_task {
            let task = catalog
                .iter()
                .find(|t| t.id == *task_id)
                .ok_or_else(|| ScalingError::UnknownTask(task_id.to_string()))?;
            let ranking = rank_panel(pool, task)?;
            let panel = select_panel(&ranking, n.min(ranking.ranked.len()))?;
            for s in task_sessions {
                if panel.contains(&s.persona_id) {
                    subset.push(s);
                }
            }
        }
        nested.push((n, subset));
    }
    Ok(nested)
}

/// Unique deduplicated findings per panel size, with the 0.60-0.70 threshold
/// band attached.
pub fn discovery_curve(
    records: &[SessionRecord],
    pool: &[PersonaSpec],
    catalog: &[TaskSpec],
    run_label: &str,
    sizes: &[usize],
    theta: f64,
    embedder: &mut dyn Embedder,
) -> Result<DiscoveryCurve, ScalingError> {
    let sessions = run_slice(records, run_label);
    if sessions.is_empty() {
        return Err(ScalingError::EmptyRun(run_label.to_string()));
    }
    let judges: BTreeSet<u32> = sessions.iter().map(|s| s.persona_id).collect();
    check_sizes(sizes, judges.len())?;
    let nested = nested_panel_sessions(&sessions, pool, catalog, sizes)?;

    let mut values = Vec::with_capacity(sizes.len());
    let mut shares = Vec::with_capacity(sizes.len());
    for (_, subset) in &nested {
        let set: FindingSet = unique_findings(subset, theta, embedder)?;
        values.push(set.unique_count as f64);
        shares.push(set.high_impact_share);
    }

    let band: SweepTable = threshold_sweep(&nested, &[0.60, 0.70], embedder)?;
    let band_low = band.rows[0].counts.iter().map(|(_, u)| *u as f64).collect();
    let band_high = band.rows[1].counts.iter().map(|(_, u)| *u as f64).collect();

    let ci = vec![None; sizes.len()];
    let curve = finish_curve(sizes.to_vec(), values, ci)?;
    Ok(DiscoveryCurve {
        curve,
        theta,
        band_low,
        band_high,
        high_impact_share: shares,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DissociationReport {
    pub sizes: Vec<usize>,
    pub score_saturation: Vec<f64>,
    pub discovery_saturation: Vec<f64>,
    /// score_saturation - discovery_saturation per size.
    pub gap: Vec<f64>,
    pub high_impact_share: Vec<f64>,
}

impl DissociationReport {
    pub fn gap_at(&self, size: usize) -> Option<f64> {
        self.sizes.iter().position(|s| *s == size).map(|i| self.gap[i])
    }
}

/// Reliability saturates early, discovery keeps climbing; the per-size gap
/// between the two saturation ratios quantifies that split.
pub fn dissociation_report(
    icc: &ScalingCurve,
    disc: &DiscoveryCurve,
) -> Result<DissociationReport, ScalingError> {
    if icc.sizes != disc.curve.sizes {
        return Err(ScalingError::CurveSizeMismatch);
    }
    let gap = icc
        .saturation
        .iter()
        .zip(&disc.curve.saturation)
        .map(|(a, b)| a - b)
        .collect();
    Ok(DissociationReport {
        sizes: icc.sizes.clone(),
        score_saturation: icc.saturation.clone(),
        discovery_saturation: disc.curve.saturation.clone(),
        gap,
        high_impact_share: disc.high_impact_share.clone(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpertiseRow {
    pub level: Expertise,
    pub sessions: usize,
    pub real_time_mean: f64,
    /// Persona-blind transcript re-score, where supplied.
    pub blind_mean: Option<f64>,
    /// Distinct issue categories among this level's deduplicated clusters.
    pub category_breadth: usize,
    pub unique_findings: usize,
    pub high_impact_share: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpertiseReport {
    pub rows: Vec<ExpertiseRow>,
    /// Expert vs novice standardized difference, real-time scores.
    pub d_real_time: Option<StatResult>,
    /// Same contrast on blind scores.
    pub d_blind: Option<StatResult>,
    /// (complexity, mean blind - mean real-time) pairs.
    pub gap_by_complexity: Vec<(String, f64)>,
    pub warnings: Vec<String>,
}

/// Expertise gradient table. `blind` maps session ids to persona-blind
/// transcript scores; sessions without one are skipped in blind columns.
pub fn expertise_analysis(
    records: &[SessionRecord],
    pool: &[PersonaSpec],
    catalog: &[TaskSpec],
    run_label: &str,
    blind: &BTreeMap<String, f64>,
    theta: f64,
    embedder: &mut dyn Embedder,
) -> Result<ExpertiseReport, ScalingError> {
    let sessions = run_slice(records, run_label);
    if sessions.is_empty() {
        return Err(ScalingError::EmptyRun(run_label.to_string()));
    }
    let mut warnings = Vec::new();
    let mut by_level: BTreeMap<Expertise, Vec<&SessionRecord>> = BTreeMap::new();
    for s in &sessions {
        match find_persona(pool, s.persona_id) {
            Some(p) => by_level.entry(p.expertise).or_default().push(s),
            None => warnings.push(format!(
                "session {} names persona {} not in pool; skipped",
                s.session_id, s.persona_id
            )),
        }
    }

    let mut rows = Vec::new();
    let mut level_scores: BTreeMap<Expertise, Vec<f64>> = BTreeMap::new();
    let mut level_blind: BTreeMap<Expertise, Vec<f64>> = BTreeMap::new();
    for level in [Expertise::Expert, Expertise::Intermediate, Expertise::Novice] {
        let Some(list) = by_level.get(&level) else {
            warnings.push(format!("no sessions at level {}", level.as_str()));
            continue;
        };
        if list.len() < 2 {
            warnings.push(format!(
                "only {} session(s) at level {}; excluded",
                list.len(),
                level.as_str()
            ));
            continue;
        }
        let scores: Vec<f64> = list.iter().map(|s| s.final_score).collect();
        let blind_scores: Vec<f64> = list
            .iter()
            .filter_map(|s| blind.get(&s.session_id).copied())
            .collect();
        let findings = unique_findings(list, theta, embedder);
        let (breadth, unique, share) = match findings {
            Ok(set) => {
                let cats: BTreeSet<_> = set.clusters.iter().map(|c| c.category).collect();
                (cats.len(), set.unique_count, set.high_impact_share)
            }
            Err(DedupError::EmptyCorpus) => (0, 0, 0.0),
            Err(e) => return Err(e.into()),
        };
        rows.push(ExpertiseRow {
            level,
            sessions: list.len(),
            real_time_mean: mean(&scores),
            blind_mean: if blind_scores.is_empty() {
                None
            } else {
                Some(mean(&blind_scores))
            },
            category_breadth: breadth,
            unique_findings: unique,
            high_impact_share: share,
        });
        level_scores.insert(level, scores);
        level_blind.insert(level, blind_scores);
    }

    let contrast = |m: &BTreeMap<Expertise, Vec<f64>>| -> Option<StatResult> {
        let e = m.get(&Expertise::Expert)?;
        let n = m.get(&Expertise::Novice)?;
        if e.len() < 2 || n.len() < 2 {
            return None;
        }
        cohen_d(e, n).ok()
    };
    let d_real_time = contrast(&level_scores);
    let d_blind = contrast(&level_blind);

    let mut gap_by_complexity = Vec::new();
    for tier in [Complexity::Simple, Complexity::Medium, Complexity::Complex] {
        let tier_tasks: BTreeSet<&str> = catalog
            .iter()
            .filter(|t| t.complexity == tier)
            .map(|t| t.id.as_str())
            .collect();
        let mut real = Vec::new();
        let mut post = Vec::new();
        for s in &sessions {
            if tier_tasks.contains(s.task_id.as_str()) {
                if let Some(b) = blind.get(&s.session_id) {
                    real.push(s.final_score);
                    post.push(*b);
                }
            }
        }
        if !real.is_empty() {
            gap_by_complexity.push((tier.as_str().to_string(), mean(&post) - mean(&real)));
        }
    }

    Ok(ExpertiseReport {
        rows,
        d_real_time,
        d_blind,
        gap_by_complexity,
        warnings,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    /// Pearson r between the two runs' per-judge scores.
    pub per_judge_r: StatResult,
    pub judges: usize,
    /// (panel size, |panel mean A - panel mean B|), nested panels.
    pub delta_by_size: Vec<(usize, f64)>,
    pub mean_a: f64,
    pub mean_b: f64,
}

/// Cross-run reproducibility: how strongly a judge's score in one run
/// predicts its score in a re-run, and how far panel means drift.
pub fn stability_analysis(
    records: &[SessionRecord],
    pool: &[PersonaSpec],
    catalog: &[TaskSpec],
    label_a: &str,
    label_b: &str,
    sizes: &[usize],
) -> Result<StabilityReport, ScalingError> {
    let a = run_slice(records, label_a);
    let b = run_slice(records, label_b);
    if a.is_empty() {
        return Err(ScalingError::EmptyRun(label_a.to_string()));
    }
    if b.is_empty() {
        return Err(ScalingError::EmptyRun(label_b.to_string()));
    }
    let map_a = score_map(&a);
    let map_b = score_map(&b);
    if map_a.keys().collect::<Vec<_>>() != map_b.keys().collect::<Vec<_>>() {
        return Err(ScalingError::GridMismatch);
    }

    // Per-judge mean over the shared grid.
    let mut per_judge: BTreeMap<u32, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for ((_, judge), v) in &map_a {
        per_judge.entry(*judge).or_default().0.push(*v);
    }
    for ((_, judge), v) in &map_b {
        per_judge.entry(*judge).or_default().1.push(*v);
    }
    let judges: Vec<u32> = per_judge.keys().copied().collect();
    let xs: Vec<f64> = judges.iter().map(|j| mean(&per_judge[j].0)).collect();
    let ys: Vec<f64> = judges.iter().map(|j| mean(&per_judge[j].1)).collect();
    let per_judge_r = correlation(&xs, &ys, CorrelationMethod::Pearson)?;

    let ranking = global_ranking(pool, catalog)?;
    let ranked: Vec<u32> = ranking
        .ranked
        .iter()
        .map(|(id, _)| *id)
        .filter(|id| per_judge.contains_key(id))
        .collect();
    let mut delta_by_size = Vec::new();
    for &n in sizes {
        if n > ranked.len() {
            continue;
        }
        let panel = &ranked[..n];
        let pa: Vec<f64> = panel.iter().flat_map(|j| per_judge[j].0.clone()).collect();
        let pb: Vec<f64> = panel.iter().flat_map(|j| per_judge[j].1.clone()).collect();
        delta_by_size.push((n, (mean(&pa) - mean(&pb)).abs()));
    }

    Ok(StabilityReport {
        per_judge_r,
        judges: judges.len(),
        delta_by_size,
        mean_a: mean(&xs),
        mean_b: mean(&ys),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub condition: Condition,
    pub sessions: usize,
    /// Sample standard deviation of final scores.
    pub score_sd: f64,
    pub mean_insights: f64,
    /// Expert vs novice contrast within the condition, where both exist.
    pub expertise_d: Option<StatResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationReport {
    pub rows: Vec<AblationRow>,
    pub warnings: Vec<String>,
}

pub fn ablation_analysis(
    records: &[SessionRecord],
    pool: &[PersonaSpec],
    run_label: &str,
) -> Result<AblationReport, ScalingError> {
    let sessions: Vec<&SessionRecord> = records
        .iter()
        .filter(|r| r.run_label == run_label && !r.is_failed())
        .collect();
    if sessions.is_empty() {
        return Err(ScalingError::EmptyRun(run_label.to_string()));
    }
    let mut rows = Vec::new();
    let mut warnings = Vec::new();
    for condition in Condition::ALL {
        let group: Vec<&&SessionRecord> = sessions
            .iter()
            .filter(|s| s.condition == condition)
            .collect();
        if group.is_empty() {
            warnings.push(format!("condition {} has no sessions", condition.as_str()));
            continue;
        }
        let scores: Vec<f64> = group.iter().map(|s| s.final_score).collect();
        let insights: Vec<f64> = group.iter().map(|s| s.insight_count() as f64).collect();
        let mut expert = Vec::new();
        let mut novice = Vec::new();
        for s in &group {
            match find_persona(pool, s.persona_id).map(|p| p.expertise) {
                Some(Expertise::Expert) => expert.push(s.final_score),
                Some(Expertise::Novice) => novice.push(s.final_score),
                _ => {}
            }
        }
        let expertise_d = if expert.len() >= 2 && novice.len() >= 2 {
            cohen_d(&expert, &novice).ok()
        } else {
            None
        };
        rows.push(AblationRow {
            condition,
            sessions: group.len(),
            score_sd: sample_sd(&scores),
            mean_insights: mean(&insights),
            expertise_d,
        });
    }
    Ok(AblationReport { rows, warnings })
}

// ---------------------------------------------------------------------------
// Human comparison
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HumanSessionRecord {
    pub participant_id: String,
    pub task_id: String,
    pub domain: Domain,
    pub score: f64,
    pub turns: u32,
    #[serde(default)]
    pub expertise: Option<String>,
}

/// Reads human sessions from CSV with header
/// `participant_id,task_id,domain,score,turns` (optional `expertise`).
pub fn load_human_csv<R: std::io::Read>(
    reader: R,
    catalog: &[TaskSpec],
) -> Result<Vec<HumanSessionRecord>, ScalingError> {
    let mut rdr = csv::Reader::from_reader(reader);
    let mut out = Vec::new();
    for row in rdr.deserialize::<HumanSessionRecord>() {
        let rec = row.map_err(|e| ScalingError::HumanCsv(e.to_string()))?;
        if !(0.0..=1.0).contains(&rec.score) || !rec.score.is_finite() {
            return Err(ScalingError::ScoreRange(rec.score));
        }
        if !catalog.iter().any(|t| t.id == rec.task_id) {
            return Err(ScalingError::UnknownTask(rec.task_id));
        }
        out.push(rec);
    }
    Ok(out)
}

/// Mean absolute difference over all ordered pairs, self-pairs included, so
/// two identical score multisets produce identical within- and cross-group
/// values.
fn mean_abs_pairs(a: &[f64], b: &[f64]) -> f64 {
    let mut total = 0.0;
    for x in a {
        for y in b {
            total += (x - y).abs();
        }
    }
    total / (a.len() * b.len()) as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuringRow {
    pub task_id: String,
    pub humans: usize,
    pub agents: usize,
    pub hh_diff: f64,
    pub ha_diff: f64,
    pub welch: StatResult,
    pub p_bonferroni: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainKs {
    pub domain: Domain,
    pub humans: usize,
    pub agents: usize,
    pub ks: StatResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuringReport {
    pub rows: Vec<TuringRow>,
    /// Paired t over per-task (hh - ha) differences.
    pub paired: StatResult,
    pub overall_d: StatResult,
    pub per_domain_ks: Vec<DomainKs>,
    /// Tasks dropped for having fewer than 2 human sessions.
    pub excluded_tasks: Vec<String>,
}

/// Statistical indistinguishability check between human and agent scoring.
pub fn turing_analysis(
    humans: &[HumanSessionRecord],
    agents: &[SessionRecord],
    catalog: &[TaskSpec],
) -> Result<TuringReport, ScalingError> {
    for h in humans {
        if !catalog.iter().any(|t| t.id == h.task_id) {
            return Err(ScalingError::UnknownTask(h.task_id.clone()));
        }
    }
    let mut human_by_task: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for h in humans {
        human_by_task.entry(h.task_id.as_str()).or_default().push(h.score);
    }
    let mut agent_by_task: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for a in agents.iter().filter(|a| !a.is_failed()) {
        agent_by_task
            .entry(a.task_id.as_str())
            .or_default()
            .push(a.final_score);
    }

    let mut rows = Vec::new();
    let mut excluded = Vec::new();
    let mut diffs = Vec::new();
    for (task, h) in &human_by_task {
        let Some(a) = agent_by_task.get(task) else {
            excluded.push(task.to_string());
            continue;
        };
        if h.len() < 2 {
            excluded.push(task.to_string());
            continue;
        }
        let hh = mean_abs_pairs(h, h);
        let ha = mean_abs_pairs(h, a);
        diffs.push(hh - ha);
        let welch = welch_t(h, a)?;
        rows.push(TuringRow {
            task_id: task.to_string(),
            humans: h.len(),
            agents: a.len(),
            hh_diff: hh,
            ha_diff: ha,
            p_bonferroni: None,
            welch,
        });
    }
    if rows.is_empty() {
        return Err(ScalingError::NoComparableTasks);
    }
    let m = rows.len();
    for row in rows.iter_mut() {
        row.p_bonferroni = row.welch.p.map(|p| crate::stats::bonferroni(p, m));
    }

    let paired = paired_t(&diffs)?;
    let all_h: Vec<f64> = humans.iter().map(|h| h.score).collect();
    let all_a: Vec<f64> = agents
        .iter()
        .filter(|a| !a.is_failed())
        .map(|a| a.final_score)
        .collect();
    let overall_d = cohen_d(&all_h, &all_a)?;

    let task_domain: BTreeMap<&str, Domain> =
        catalog.iter().map(|t| (t.id.as_str(), t.domain)).collect();
    let mut per_domain_ks = Vec::new();
    for domain in Domain::ALL {
        let h: Vec<f64> = humans
            .iter()
            .filter(|r| r.domain == domain)
            .map(|r| r.score)
            .collect();
        let a: Vec<f64> = agents
            .iter()
            .filter(|r| !r.is_failed() && task_domain.get(r.task_id.as_str()) == Some(&domain))
            .map(|r| r.final_score)
            .collect();
        if h.is_empty() || a.is_empty() {
            continue;
        }
        per_domain_ks.push(DomainKs {
            domain,
            humans: h.len(),
            agents: a.len(),
            ks: ks_two_sample(&h, &a)?,
        });
    }

    Ok(TuringReport {
        rows,
        paired,
        overall_d,
        per_domain_ks,
        excluded_tasks: excluded,
    })
}

// ---------------------------------------------------------------------------
// Trait-emotion validation
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraitCorrelation {
    pub trait_name: String,
    pub metric: String,
    pub r: f64,
    pub p: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmotionValidation {
    pub agents: usize,
    pub rows: Vec<TraitCorrelation>,
    /// Spearman rho between per-session peak frustration and goal
    /// achievement (0/1); expected negative.
    pub frustration_goal_rho: f64,
    pub frustration_goal_p: Option<f64>,
}

/// Correlates per-agent emotional aggregates against the traits that drive
/// them, validating the emotion rules end to end on stored sessions.
pub fn personality_emotion_validation(
    records: &[SessionRecord],
    pool: &[PersonaSpec],
) -> Result<EmotionValidation, ScalingError> {
    let mut per_agent: BTreeMap<u32, Vec<&SessionRecord>> = BTreeMap::new();
    for r in records.iter().filter(|r| !r.is_failed()) {
        per_agent.entry(r.persona_id).or_default().push(r);
    }
    per_agent.retain(|id, _| find_persona(pool, *id).is_some());
    if per_agent.len() < 3 {
        return Err(ScalingError::TooFewAgents(per_agent.len()));
    }

    let mut a_trait = Vec::new();
    let mut n_trait = Vec::new();
    let mut e_trait = Vec::new();
    let mut trust_gain = Vec::new();
    let mut peak_frustration = Vec::new();
    let mut engagement = Vec::new();
    for (id, sessions) in &per_agent {
        let p = find_persona(pool, *id).expect("retained above");
        let summaries: Vec<_> = sessions.iter().map(|s| s.trajectory.summary()).collect();
        a_trait.push(p.profile.agreeableness);
        n_trait.push(p.profile.neuroticism);
        e_trait.push(p.profile.extraversion);
        trust_gain.push(mean(&summaries.iter().map(|s| s.trust_gain).collect::<Vec<_>>()));
        peak_frustration.push(mean(
            &summaries.iter().map(|s| s.peak_frustration).collect::<Vec<_>>(),
        ));
        engagement.push(mean(
            &summaries.iter().map(|s| s.mean_engagement).collect::<Vec<_>>(),
        ));
    }

    let mut rows = Vec::new();
    for (trait_name, xs, metric, ys) in [
        ("agreeableness", &a_trait, "trust_gain", &trust_gain),
        ("neuroticism", &n_trait, "peak_frustration", &peak_frustration),
        ("extraversion", &e_trait, "mean_engagement", &engagement),
    ] {
        let r = correlation(xs, ys, CorrelationMethod::Pearson)?;
        rows.push(TraitCorrelation {
            trait_name: trait_name.to_string(),
            metric: metric.to_string(),
            r: r.value,
            p: r.p,
        });
    }

    let mut fr = Vec::new();
    let mut goal = Vec::new();
    for sessions in per_agent.values() {
        for s in sessions {
            fr.push(s.trajectory.summary().peak_frustration);
            goal.push(if s.goal_achieved { 1.0 } else { 0.0 });
        }
    }
    let rho = correlation(&fr, &goal, CorrelationMethod::Spearman)?;

    Ok(EmotionValidation {
        agents: per_agent.len(),
        rows,
        frustration_goal_rho: rho.value,
        frustration_goal_p: rho.p,
    })
}

// ---------------------------------------------------------------------------
// Published reference values
// ---------------------------------------------------------------------------

/// Externally reported values from the source experiments, shipped for
/// side-by-side display. This artifact cannot regenerate them (they require
/// the original human raters and frontier-model targets), so
/// `reproduced_here` is always false.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceFixtures {
    pub reproduced_here: bool,
    pub human_human_gap: f64,
    pub human_agent_gap: f64,
    pub agent_agent_gap: f64,
    pub turing_t: f64,
    pub turing_df: f64,
    pub stability_r: f64,
    pub stability_delta: f64,
    pub judge_share_pct: f64,
    pub task_share_pct: f64,
    pub residual_share_pct: f64,
    /// Real-time means by level: expert, intermediate, novice.
    pub real_time_means: [f64; 3],
    pub post_hoc_means: [f64; 3],
    pub category_breadth_ratio: f64,
    pub structured_sd: f64,
    pub simple_sd: f64,
    pub structured_insights: f64,
    pub simple_insights: f64,
    pub trust_agreeableness_r: f64,
    pub frustration_neuroticism_r: f64,
    pub engagement_extraversion_r: f64,
    pub engagement_extraversion_p: f64,
    pub score_saturation_at_8: f64,
    pub discovery_saturation_at_8: f64,
    pub discovery_exponent_range: (f64, f64),
    pub log_fit_r_squared: f64,
}

pub fn reference_fixtures() -> ReferenceFixtures {
    ReferenceFixtures {
        reproduced_here: false,
        human_human_gap: 0.201,
        human_agent_gap: 0.188,
        agent_agent_gap: 0.143,
        turing_t: -0.91,
        turing_df: 14.0,
        stability_r: 0.003,
        stability_delta: 0.03,
        judge_share_pct: 0.3,
        task_share_pct: 29.0,
        residual_share_pct: 70.6,
        real_time_means: [0.807, 0.832, 0.837],
        post_hoc_means: [0.909, 0.931, 0.934],
        category_breadth_ratio: 1.9,
        structured_sd: 0.087,
        simple_sd: 0.160,
        structured_insights: 13.2,
        simple_insights: 9.0,
        trust_agreeableness_r: 0.754,
        frustration_neuroticism_r: 0.756,
        engagement_extraversion_r: 0.057,
        engagement_extraversion_p: 0.757,
        score_saturation_at_8: 0.82,
        discovery_saturation_at_8: 0.42,
        discovery_exponent_range: (0.62, 0.76),
        log_fit_r_squared: 0.974,
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn sample_sd(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dedup::HashedBagEmbedder;
    use crate::persona::{builtin_catalog, builtin_pool};
    use crate::session::blind_rescore;
    use crate::stats::icc2k;
    use crate::synthetic::{
        gen_world, run_synthetic_experiment, SyntheticBlindScorer, SyntheticWorldConfig,
        MAIN_RUN, STABILITY_RUN_A, STABILITY_RUN_B, ABLATION_RUN,
    };
    use std::sync::OnceLock;

    // The shared fixture pins the root seed the default experiment ships
    // with; curve-shape assertions are statements about that seeded run.
    const FIXTURE_SEED: u64 = 11;

    fn store() -> &'static Vec<SessionRecord> {
        static STORE: OnceLock<Vec<SessionRecord>> = OnceLock::new();
        STORE.get_or_init(|| {
            run_synthetic_experiment(
                &SyntheticWorldConfig::default(),
                &builtin_pool(),
                &builtin_catalog(),
                FIXTURE_SEED,
            )
            .unwrap()
        })
    }

    fn quick_bootstrap() -> BootstrapConfig {
        BootstrapConfig {
            resamples: 200,
            ..BootstrapConfig::default()
        }
    }

    #[test]
    fn score_matrix_covers_full_grid() {
        let m = build_score_matrix(store(), MAIN_RUN).unwrap();
        let c = variance_components(&m).unwrap();
        assert_eq!(c.n_tasks, 15);
        assert_eq!(c.n_judges, 32);
    }

    #[test]
    fn missing_cell_is_named() {
        let partial: Vec<SessionRecord> = store()
            .iter()
            .filter(|r| {
                r.run_label == MAIN_RUN
                    && !(r.task_id == "dev-info-simple" && r.persona_id == 7)
            })
            .cloned()
            .collect();
        let err = build_score_matrix(&partial, MAIN_RUN).unwrap_err();
        match err {
            ScalingError::MissingCell { task, judge } => {
                assert_eq!(task, "dev-info-simple");
                assert_eq!(judge, 7);
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn icc_curve_endpoint_equals_full_matrix() {
        let curve = icc_curve(
            store(),
            &builtin_pool(),
            &builtin_catalog(),
            MAIN_RUN,
            &CANONICAL_SIZES,
            &quick_bootstrap(),
        )
        .unwrap();
        let full = build_score_matrix(store(), MAIN_RUN).unwrap();
        let direct = icc2k(&full).unwrap();
        assert_eq!(curve.value_at(32).unwrap(), direct.value);
        assert_eq!(*curve.saturation.last().unwrap(), 1.0);
    }

    #[test]
    fn icc_curve_rises_and_prefers_log_family() {
        let curve = icc_curve(
            store(),
            &builtin_pool(),
            &builtin_catalog(),
            MAIN_RUN,
            &CANONICAL_SIZES,
            &quick_bootstrap(),
        )
        .unwrap();
        for w in curve.values.windows(2) {
            assert!(w[1] >= w[0], "ICC must not decrease: {:?}", curve.values);
        }
        assert_eq!(curve.best_family(), ModelFamily::Logarithmic);
        assert!(curve.fits[0].r_squared > 0.9);
        for s in &curve.saturation {
            assert!(*s > 0.0 && *s <= 1.0);
        }
    }

    #[test]
    fn noiseless_world_gives_perfect_agreement() {
        let cfg = SyntheticWorldConfig {
            breadth: [0.0, 0.0, 0.0],
            sigma_res: 0.0,
            sigma_path: 0.0,
            sigma_judge: 0.0,
            strength_prob: 0.0,
            hardness_penalty: 0.0,
            include_stability: false,
            include_ablation: false,
            ..SyntheticWorldConfig::default()
        };
        let records =
            run_synthetic_experiment(&cfg, &builtin_pool(), &builtin_catalog(), 1).unwrap();
        let curve = icc_curve(
            &records,
            &builtin_pool(),
            &builtin_catalog(),
            MAIN_RUN,
            &[2, 8, 32],
            &quick_bootstrap(),
        )
        .unwrap();
        for v in &curve.values {
            assert!((v - 1.0).abs() < 1e-9, "perfect matrix must give 1: {v}");
        }
    }

    #[test]
    fn discovery_curve_monotone_and_sublinear() {
        let mut embedder = HashedBagEmbedder::default();
        let disc = discovery_curve(
            store(),
            &builtin_pool(),
            &builtin_catalog(),
            MAIN_RUN,
            &CANONICAL_SIZES,
            0.65,
            &mut embedder,
        )
        .unwrap();
        for w in disc.curve.values.windows(2) {
            assert!(w[1] >= w[0], "U must not decrease: {:?}", disc.curve.values);
        }
        let b = disc.power_exponent().unwrap();
        assert!(b > 0.4 && b < 0.95, "exponent out of range: {b}");
        // Band: fewer clusters at 0.60, more at 0.70.
        for i in 0..disc.curve.values.len() {
            assert!(disc.band_low[i] <= disc.curve.values[i]);
            assert!(disc.band_high[i] >= disc.curve.values[i]);
        }
    }

    #[test]
    fn identical_insights_make_discovery_flat() {
        let cfg = SyntheticWorldConfig {
            finding_count: 1,
            detection_scale: 5.0,
            strength_prob: 0.0,
            include_stability: false,
            include_ablation: false,
            ..SyntheticWorldConfig::default()
        };
        let records =
            run_synthetic_experiment(&cfg, &builtin_pool(), &builtin_catalog(), 2).unwrap();
        let mut embedder = HashedBagEmbedder::default();
        let disc = discovery_curve(
            &records,
            &builtin_pool(),
            &builtin_catalog(),
            MAIN_RUN,
            &[1, 4, 16, 32],
            0.65,
            &mut embedder,
        )
        .unwrap();
        assert!(disc.curve.values.iter().all(|u| *u == 1.0));
        let b = disc.power_exponent().unwrap();
        assert!(b.abs() < 1e-9, "flat curve must fit b = 0, got {b}");
    }

    #[test]
    fn dissociation_gap_is_positive_at_eight() {
        let mut embedder = HashedBagEmbedder::default();
        let icc = icc_curve(
            store(),
            &builtin_pool(),
            &builtin_catalog(),
            MAIN_RUN,
            &CANONICAL_SIZES,
            &quick_bootstrap(),
        )
        .unwrap();
        let disc = discovery_curve(
            store(),
            &builtin_pool(),
            &builtin_catalog(),
            MAIN_RUN,
            &CANONICAL_SIZES,
            0.65,
            &mut embedder,
        )
        .unwrap();
        let report = dissociation_report(&icc, &disc).unwrap();
        let gap = report.gap_at(8).unwrap();
        assert!(gap > 0.15, "dissociation gap at 8 too small: {gap}");
    }

    #[test]
    fn decomposition_is_residual_dominant() {
        let m = build_score_matrix(store(), MAIN_RUN).unwrap();
        let c = variance_components(&m).unwrap();
        assert!(c.judge_share < 5.0, "judge share {}", c.judge_share);
        assert!(
            c.task_share >= 10.0 && c.task_share <= 45.0,
            "task share {}",
            c.task_share
        );
        assert!(c.residual_share > 50.0, "residual share {}", c.residual_share);
    }

    fn blind_map(records: &[SessionRecord]) -> BTreeMap<String, f64> {
        let world = gen_world(&SyntheticWorldConfig::default(), FIXTURE_SEED).unwrap();
        let mut scorer = SyntheticBlindScorer::new(&world);
        records
            .iter()
            .filter(|r| r.run_label == MAIN_RUN && !r.is_failed())
            .map(|r| {
                let score = blind_rescore(r, &mut scorer).unwrap();
                (r.session_id.clone(), score)
            })
            .collect()
    }

    #[test]
    fn expertise_gradient_matches_construction() {
        let blind = blind_map(store());
        let mut embedder = HashedBagEmbedder::default();
        let report = expertise_analysis(
            store(),
            &builtin_pool(),
            &builtin_catalog(),
            MAIN_RUN,
            &blind,
            0.65,
            &mut embedder,
        )
        .unwrap();
        assert_eq!(report.rows.len(), 3);
        let row = |level: Expertise| report.rows.iter().find(|r| r.level == level).unwrap();
        let expert = row(Expertise::Expert);
        let novice = row(Expertise::Novice);
        // Experts score harder in real time yet surface more breadth.
        assert!(expert.real_time_mean < novice.real_time_mean);
        assert!(expert.category_breadth >= novice.category_breadth);
        assert!(expert.unique_findings > novice.unique_findings);
        // Blind re-scores run higher than live ones.
        for r in &report.rows {
            assert!(r.blind_mean.unwrap() > r.real_time_mean);
        }
        assert!(report.d_real_time.is_some());
        assert!(report.d_blind.is_some());
        assert_eq!(report.gap_by_complexity.len(), 3);
        for (_, gap) in &report.gap_by_complexity {
            assert!(*gap > 0.0);
        }
    }

    #[test]
    fn stability_runs_decorrelate() {
        let report = stability_analysis(
            store(),
            &builtin_pool(),
            &builtin_catalog(),
            STABILITY_RUN_A,
            STABILITY_RUN_B,
            &CANONICAL_SIZES,
        )
        .unwrap();
        assert_eq!(report.judges, 32);
        assert!(
            report.per_judge_r.value.abs() < 0.2,
            "cross-run r too high: {}",
            report.per_judge_r.value
        );
        let delta32 = report
            .delta_by_size
            .iter()
            .find(|(n, _)| *n == 32)
            .map(|(_, d)| *d)
            .unwrap();
        assert!(delta32 < 0.05, "panel mean drift too large: {delta32}");
    }

    #[test]
    fn identical_runs_correlate_perfectly() {
        let report = stability_analysis(
            store(),
            &builtin_pool(),
            &builtin_catalog(),
            STABILITY_RUN_A,
            STABILITY_RUN_A,
            &[1, 8, 32],
        )
        .unwrap();
        assert!((report.per_judge_r.value - 1.0).abs() < 1e-12);
        for (_, d) in &report.delta_by_size {
            assert_eq!(*d, 0.0);
        }
    }

    #[test]
    fn mismatched_grids_are_rejected() {
        let err = stability_analysis(
            store(),
            &builtin_pool(),
            &builtin_catalog(),
            STABILITY_RUN_A,
            MAIN_RUN,
            &[8],
        )
        .unwrap_err();
        assert!(matches!(err, ScalingError::GridMismatch));
    }

    #[test]
    fn ablation_structured_is_steadiest() {
        let report = ablation_analysis(store(), &builtin_pool(), ABLATION_RUN).unwrap();
        assert_eq!(report.rows.len(), 4);
        assert!(report.warnings.is_empty());
        let sd = |c: Condition| {
            report
                .rows
                .iter()
                .find(|r| r.condition == c)
                .unwrap()
                .score_sd
        };
        for other in [Condition::Simple, Condition::None, Condition::Repeated] {
            assert!(
                sd(Condition::Structured) < sd(other),
                "structured sd {} vs {} sd {}",
                sd(Condition::Structured),
                other.as_str(),
                sd(other)
            );
        }
        // Persona-stripped conditions surface fewer insights.
        let ins = |c: Condition| {
            report
                .rows
                .iter()
                .find(|r| r.condition == c)
                .unwrap()
                .mean_insights
        };
        assert!(ins(Condition::Structured) > ins(Condition::None));
    }

    #[test]
    fn ablation_missing_condition_warns() {
        let filtered: Vec<SessionRecord> = store()
            .iter()
            .filter(|r| !(r.run_label == ABLATION_RUN && r.condition == Condition::Repeated))
            .cloned()
            .collect();
        let report = ablation_analysis(&filtered, &builtin_pool(), ABLATION_RUN).unwrap();
        assert_eq!(report.rows.len(), 3);
        assert_eq!(report.warnings.len(), 1);
        assert!(report.warnings[0].contains("repeated"));
    }

    fn humans_from_agents(records: &[SessionRecord], offset: f64) -> Vec<HumanSessionRecord> {
        let catalog = builtin_catalog();
        records
            .iter()
            .filter(|r| r.run_label == MAIN_RUN && !r.is_failed())
            .map(|r| {
                let task = catalog.iter().find(|t| t.id == r.task_id).unwrap();
                HumanSessionRecord {
                    participant_id: format!("h{}", r.persona_id),
                    task_id: r.task_id.clone(),
                    domain: task.domain,
                    score: (r.final_score + offset).clamp(0.0, 1.0),
                    turns: r.turns.len() as u32,
                    expertise: None,
                }
            })
            .collect()
    }

    #[test]
    fn cloned_scores_are_indistinguishable() {
        let agents: Vec<SessionRecord> = store()
            .iter()
            .filter(|r| r.run_label == MAIN_RUN)
            .cloned()
            .collect();
        let humans = humans_from_agents(&agents, 0.0);
        let report = turing_analysis(&humans, &agents, &builtin_catalog()).unwrap();
        assert_eq!(report.rows.len(), 15);
        for row in &report.rows {
            assert!((row.hh_diff - row.ha_diff).abs() < 1e-12);
            assert!((row.welch.value).abs() < 1e-9);
            assert_eq!(row.welch.p, Some(1.0));
        }
        assert_eq!(report.paired.value, 0.0);
        assert_eq!(report.paired.p, Some(1.0));
        assert!(report.overall_d.value.abs() < 1e-12);
        for ks in &report.per_domain_ks {
            assert_eq!(ks.ks.value, 0.0);
        }
    }

    #[test]
    fn offset_scores_are_detected() {
        let agents: Vec<SessionRecord> = store()
            .iter()
            .filter(|r| r.run_label == MAIN_RUN)
            .cloned()
            .collect();
        let humans = humans_from_agents(&agents, 0.2);
        let report = turing_analysis(&humans, &agents, &builtin_catalog()).unwrap();
        // Cross-group distances exceed within-group ones everywhere.
        for row in &report.rows {
            assert!(row.ha_diff > row.hh_diff);
        }
        assert!(report.paired.p.unwrap() < 0.01);
        assert!(report.overall_d.value > 1.0);
    }

    #[test]
    fn pair_distance_is_symmetric() {
        let a = [0.1, 0.5, 0.9];
        let b = [0.2, 0.4];
        assert_eq!(mean_abs_pairs(&a, &b), mean_abs_pairs(&b, &a));
        // Hand value: |.1-.2|+|.1-.4|+|.5-.2|+|.5-.4|+|.9-.2|+|.9-.4| = 2.0
        assert!((mean_abs_pairs(&a, &b) - 2.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn human_csv_round_trip_and_validation() {
        let catalog = builtin_catalog();
        let good = "participant_id,task_id,domain,score,turns\n\
                    p1,saas-info-simple,saas_it,0.8,3\n\
                    p2,dev-howto-medium,developer,0.55,7\n";
        let rows = load_human_csv(good.as_bytes(), &catalog).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].domain, Domain::SaasIt);
        assert_eq!(rows[1].turns, 7);

        let bad_score = "participant_id,task_id,domain,score,turns\n\
                         p1,saas-info-simple,saas_it,1.2,3\n";
        assert!(matches!(
            load_human_csv(bad_score.as_bytes(), &catalog),
            Err(ScalingError::ScoreRange(_))
        ));

        let bad_task = "participant_id,task_id,domain,score,turns\n\
                        p1,unknown-task,saas_it,0.5,3\n";
        assert!(matches!(
            load_human_csv(bad_task.as_bytes(), &catalog),
            Err(ScalingError::UnknownTask(_))
        ));
    }

    #[test]
    fn trait_correlations_recover_emotion_rules() {
        let report = personality_emotion_validation(store(), &builtin_pool()).unwrap();
        assert_eq!(report.agents, 32);
        let r_for = |name: &str| {
            report
                .rows
                .iter()
                .find(|row| row.trait_name == name)
                .unwrap()
                .r
        };
        // Store sessions mix each trait with realized turn quality, so these
        // correlations are directional rather than strong; the trait-isolated
        // fixed-trace checks live with the emotion rules.
        assert!(
            r_for("agreeableness") > 0.15,
            "trust gain should track agreeableness: {}",
            r_for("agreeableness")
        );
        assert!(
            r_for("neuroticism") > 0.15,
            "peak frustration should track neuroticism: {}",
            r_for("neuroticism")
        );
        assert!(
            report.frustration_goal_rho < 0.0,
            "frustration should oppose goal achievement: {}",
            report.frustration_goal_rho
        );
    }

    #[test]
    fn too_few_agents_is_an_error() {
        let two: Vec<SessionRecord> = store()
            .iter()
            .filter(|r| r.persona_id <= 2)
            .cloned()
            .collect();
        assert!(matches!(
            personality_emotion_validation(&two, &builtin_pool()),
            Err(ScalingError::TooFewAgents(2))
        ));
    }

    #[test]
    fn reference_fixtures_are_labeled_external() {
        let f = reference_fixtures();
        assert!(!f.reproduced_here);
        assert_eq!(f.human_human_gap, 0.201);
        assert_eq!(f.agent_agent_gap, 0.143);
        assert_eq!(f.residual_share_pct, 70.6);
        assert_eq!(f.real_time_means[0], 0.807);
    }

    #[test]
    fn panel_prefix_nesting_holds() {
        let pool = builtin_pool();
        let catalog = builtin_catalog();
        let global = global_ranking(&pool, &catalog).unwrap();
        let mut last: Vec<u32> = Vec::new();
        for &n in &CANONICAL_SIZES {
            let panel = select_panel(&global, n).unwrap();
            assert_eq!(&panel[..last.len()], &last[..], "global panels must nest");
            last = panel;
        }
        for task in &catalog {
            let ranking = rank_panel(&pool, task).unwrap();
            let mut last: Vec<u32> = Vec::new();
            for &n in &CANONICAL_SIZES {
                let panel = select_panel(&ranking, n).unwrap();
                assert_eq!(&panel[..last.len()], &last[..], "task panels must nest");
                last = panel;
            }
        }
    }
}
