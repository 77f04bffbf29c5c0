//! Judge pool, task catalog, and fitness-based panel selection.
//!
//! A pool is a fixed roster of judge personas (Big Five profile, expertise
//! level, domain tags). Panels for a task are prefixes of a deterministic
//! fitness ranking, so a size-4 panel is always contained in a size-8 panel.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Weight of the task-domain match term in the fitness score.
const W_DOMAIN: f64 = 0.5;
/// Weight of the expertise term.
const W_EXPERTISE: f64 = 0.3;
/// Weight of the conscientiousness/complexity term.
const W_PROFILE: f64 = 0.2;

#[derive(Debug, Error)]
pub enum PersonaError {
    #[error("pool document is not valid JSON: {0}")]
    PoolJson(#[source] serde_json::Error),
    #[error("catalog document is not valid JSON: {0}")]
    CatalogJson(#[source] serde_json::Error),
    #[error("pool is empty")]
    EmptyPool,
    #[error("catalog is empty")]
    EmptyCatalog,
    #[error("persona row {row} (id {id}): field {field} = {value} is outside [0, 1]")]
    TraitRange {
        row: usize,
        id: u32,
        field: &'static str,
        value: f64,
    },
    #[error("persona row {row}: duplicate persona id {id}")]
    DuplicateId { row: usize, id: u32 },
    #[error("persona row {row} (id {id}): domain_tags must be non-empty")]
    EmptyDomainTags { row: usize, id: u32 },
    #[error("task row {row} ({id}): duplicate task id")]
    DuplicateTaskId { row: usize, id: String },
    #[error("task row {row} ({id}): max_turns {got} does not match the {tier} tier cap {want}")]
    TurnCapMismatch {
        row: usize,
        id: String,
        tier: &'static str,
        got: u32,
        want: u32,
    },
    #[error("task row {row} ({id}): complexity_weight {got} does not match the {tier} tier weight {want}")]
    WeightMismatch {
        row: usize,
        id: String,
        tier: &'static str,
        got: f64,
        want: f64,
    },
    #[error("panel size {n} is invalid for a pool of {pool} personas")]
    PanelSize { n: usize, pool: usize },
    #[error("unknown task id {0}")]
    UnknownTask(String),
}

/// Service domain a task belongs to and a persona can be tagged with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    SaasIt,
    Developer,
    Ecommerce,
    Education,
    Healthcare,
}

impl Domain {
    pub const ALL: [Domain; 5] = [
        Domain::SaasIt,
        Domain::Developer,
        Domain::Ecommerce,
        Domain::Education,
        Domain::Healthcare,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Domain::SaasIt => "saas_it",
            Domain::Developer => "developer",
            Domain::Ecommerce => "ecommerce",
            Domain::Education => "education",
            Domain::Healthcare => "healthcare",
        }
    }
}

/// Task complexity tier. Fixes the turn cap and the weight that shifts the
/// profile term of fitness from a neutral constant toward conscientiousness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Complexity {
    Simple,
    Medium,
    Complex,
}

impl Complexity {
    pub fn max_turns(&self) -> u32 {
        match self {
            Complexity::Simple => 4,
            Complexity::Medium => 10,
            Complexity::Complex => 20,
        }
    }

    /// Weight lambda of conscientiousness in the fitness profile term.
    pub fn weight(&self) -> f64 {
        match self {
            Complexity::Simple => 0.2,
            Complexity::Medium => 0.6,
            Complexity::Complex => 1.0,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Complexity::Simple => "simple",
            Complexity::Medium => "medium",
            Complexity::Complex => "complex",
        }
    }
}

/// Self-reported familiarity with the task domain class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expertise {
    Expert,
    Intermediate,
    Novice,
}

impl Expertise {
    /// Fitness weight of the expertise level.
    pub fn weight(&self) -> f64 {
        match self {
            Expertise::Expert => 1.0,
            Expertise::Intermediate => 0.6,
            Expertise::Novice => 0.3,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Expertise::Expert => "expert",
            Expertise::Intermediate => "intermediate",
            Expertise::Novice => "novice",
        }
    }
}

/// Geographic region of a persona. Nine values; summaries may collapse them
/// to the five coarse groups returned by [`Region::coarse_group`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    NorthAmerica,
    WesternEurope,
    NorthernEurope,
    EasternEurope,
    EastAsia,
    SouthAsia,
    SoutheastAsia,
    LatinAmerica,
    Africa,
}

impl Region {
    pub fn as_str(&self) -> &'static str {
        match self {
            Region::NorthAmerica => "north_america",
            Region::WesternEurope => "western_europe",
            Region::NorthernEurope => "northern_europe",
            Region::EasternEurope => "eastern_europe",
            Region::EastAsia => "east_asia",
            Region::SouthAsia => "south_asia",
            Region::SoutheastAsia => "southeast_asia",
            Region::LatinAmerica => "latin_america",
            Region::Africa => "africa",
        }
    }

    pub fn coarse_group(&self) -> &'static str {
        match self {
            Region::NorthAmerica => "US",
            Region::WesternEurope | Region::NorthernEurope | Region::EasternEurope => "EU",
            Region::EastAsia | Region::SouthAsia | Region::SoutheastAsia => "Asia",
            Region::LatinAmerica => "Latam",
            Region::Africa => "Africa",
        }
    }
}

/// Big Five trait vector, every dimension in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BigFiveProfile {
    pub openness: f64,
    pub conscientiousness: f64,
    pub extraversion: f64,
    pub agreeableness: f64,
    pub neuroticism: f64,
}

impl BigFiveProfile {
    fn fields(&self) -> [(&'static str, f64); 5] {
        [
            ("openness", self.openness),
            ("conscientiousness", self.conscientiousness),
            ("extraversion", self.extraversion),
            ("agreeableness", self.agreeableness),
            ("neuroticism", self.neuroticism),
        ]
    }
}

/// One judge persona.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PersonaSpec {
    pub id: u32,
    pub background: String,
    pub age: u32,
    pub region: Region,
    pub expertise: Expertise,
    pub profile: BigFiveProfile,
    pub domain_tags: BTreeSet<Domain>,
}

/// One catalog task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub id: String,
    pub domain: Domain,
    pub complexity: Complexity,
    pub max_turns: u32,
    pub complexity_weight: f64,
    pub goal: String,
}

#[derive(Debug, Deserialize)]
struct PoolDocument {
    #[allow(dead_code)]
    version: u32,
    personas: Vec<PersonaSpec>,
}

#[derive(Debug, Deserialize)]
struct CatalogDocument {
    #[allow(dead_code)]
    version: u32,
    tasks: Vec<TaskSpec>,
}

/// Fitness ranking of a whole pool for one task: non-increasing scores,
/// ties broken by ascending persona id, every persona exactly once.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PanelRanking {
    pub task_id: String,
    /// (persona id, fitness), best first.
    pub ranked: Vec<(u32, f64)>,
}

/// Parse and validate a pool document.
pub fn load_pool(json: &str) -> Result<Vec<PersonaSpec>, PersonaError> {
    let doc: PoolDocument = serde_json::from_str(json).map_err(PersonaError::PoolJson)?;
    if doc.personas.is_empty() {
        return Err(PersonaError::EmptyPool);
    }
    let mut seen = BTreeSet::new();
    for (idx, p) in doc.personas.iter().enumerate() {
        let row = idx + 1;
        if !seen.insert(p.id) {
            return Err(PersonaError::DuplicateId { row, id: p.id });
        }
        for (field, value) in p.profile.fields() {
            if !(0.0..=1.0).contains(&value) || !value.is_finite() {
                return Err(PersonaError::TraitRange {
                    row,
                    id: p.id,
                    field,
                    value,
                });
            }
        }
        if p.domain_tags.is_empty() {
            return Err(PersonaError::EmptyDomainTags { row, id: p.id });
        }
    }
    Ok(doc.personas)
}

/// Parse and validate a task catalog document. Turn caps and complexity
/// weights must match the tier constants.
pub fn load_catalog(json: &str) -> Result<Vec<TaskSpec>, PersonaError> {
    let doc: CatalogDocument = serde_json::from_str(json).map_err(PersonaError::CatalogJson)?;
    if doc.tasks.is_empty() {
        return Err(PersonaError::EmptyCatalog);
    }
    let mut seen = BTreeSet::new();
    for (idx, t) in doc.tasks.iter().enumerate() {
        let row = idx + 1;
        if !seen.insert(t.id.clone()) {
            return Err(PersonaError::DuplicateTaskId {
                row,
                id: t.id.clone(),
            });
        }
        if t.max_turns != t.complexity.max_turns() {
            return Err(PersonaError::TurnCapMismatch {
                row,
                id: t.id.clone(),
                tier: t.complexity.as_str(),
                got: t.max_turns,
                want: t.complexity.max_turns(),
            });
        }
        if (t.complexity_weight - t.complexity.weight()).abs() > 1e-12 {
            return Err(PersonaError::WeightMismatch {
                row,
                id: t.id.clone(),
                tier: t.complexity.as_str(),
                got: t.complexity_weight,
                want: t.complexity.weight(),
            });
        }
    }
    Ok(doc.tasks)
}

const POOL_JSON: &str = include_str!("../data/personas.json");
const CATALOG_JSON: &str = include_str!("../data/tasks.json");

/// The shipped 32-persona pool.
pub fn builtin_pool() -> Vec<PersonaSpec> {
    load_pool(POOL_JSON).expect("shipped pool is valid")
}

/// The shipped 15-task catalog (5 domains x 3 tiers).
pub fn builtin_catalog() -> Vec<TaskSpec> {
    load_catalog(CATALOG_JSON).expect("shipped catalog is valid")
}

/// Fitness of a persona for a task:
/// 0.5 * domain_match + 0.3 * expertise_weight + 0.2 * (lambda * C + (1 - lambda) * 0.5)
/// where lambda is the tier's complexity weight and C is conscientiousness.
pub fn fitness_score(persona: &PersonaSpec, task: &TaskSpec) -> f64 {
    let domain_match = if persona.domain_tags.contains(&task.domain) {
        1.0
    } else {
        0.0
    };
    let lambda = task.complexity.weight();
    let profile_term = lambda * persona.profile.conscientiousness + (1.0 - lambda) * 0.5;
    W_DOMAIN * domain_match + W_EXPERTISE * persona.expertise.weight() + W_PROFILE * profile_term
}

/// Rank the whole pool for a task: fitness descending, ties by ascending id.
pub fn rank_panel(pool: &[PersonaSpec], task: &TaskSpec) -> Result<PanelRanking, PersonaError> {
    if pool.is_empty() {
        return Err(PersonaError::EmptyPool);
    }
    let mut ranked: Vec<(u32, f64)> = pool
        .iter()
        .map(|p| (p.id, fitness_score(p, task)))
        .collect();
    ranked.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    Ok(PanelRanking {
        task_id: task.id.clone(),
        ranked,
    })
}

/// First `n` persona ids of a ranking. Panels nest: the size-n panel is a
/// prefix of every larger panel from the same ranking.
pub fn select_panel(ranking: &PanelRanking, n: usize) -> Result<Vec<u32>, PersonaError> {
    if n == 0 || n > ranking.ranked.len() {
        return Err(PersonaError::PanelSize {
            n,
            pool: ranking.ranked.len(),
        });
    }
    Ok(ranking.ranked[..n].iter().map(|(id, _)| *id).collect())
}

/// Pool ranking by mean fitness across a whole catalog (ties by id).
/// Used where one panel ordering must be shared by every task, e.g. when a
/// task-by-judge score matrix needs a consistent judge set per column.
pub fn global_ranking(pool: &[PersonaSpec], catalog: &[TaskSpec]) -> Result<PanelRanking, PersonaError> {
    if pool.is_empty() {
        return Err(PersonaError::EmptyPool);
    }
    if catalog.is_empty() {
        return Err(PersonaError::EmptyCatalog);
    }
    let mut ranked: Vec<(u32, f64)> = pool
        .iter()
        .map(|p| {
            let mean = catalog.iter().map(|t| fitness_score(p, t)).sum::<f64>()
                / catalog.len() as f64;
            (p.id, mean)
        })
        .collect();
    ranked.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    Ok(PanelRanking {
        task_id: String::from("*"),
        ranked,
    })
}

pub fn find_task<'a>(catalog: &'a [TaskSpec], id: &str) -> Result<&'a TaskSpec, PersonaError> {
    catalog
        .iter()
        .find(|t| t.id == id)
        .ok_or_else(|| PersonaError::UnknownTask(id.to_string()))
}

pub fn find_persona(pool: &[PersonaSpec], id: u32) -> Option<&PersonaSpec> {
    pool.iter().find(|p| p.id == id)
}
