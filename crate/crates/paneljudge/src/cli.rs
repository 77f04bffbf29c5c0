//! Command-line surface: session execution, synthetic simulation, and the
//! analysis/report emitters.
//!
//! Exit codes: 0 success, 1 any runtime failure (missing input files
//! included), 2 usage errors (clap).

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::mpsc;
use std::sync::atomic::{AtomicUsize, Ordering};

use clap::{Args, Parser, Subcommand};

use crate::config::{BackendKind, ConfigError, RunConfig};
use crate::dedup::{threshold_sweep, DedupError, HashedBagEmbedder, SweepTable};
use crate::persona::{PersonaError, PersonaSpec, TaskSpec};
use crate::scaling::{
    ablation_analysis, build_score_matrix, discovery_curve, dissociation_report,
    expertise_analysis, icc_curve, load_human_csv, personality_emotion_validation,
    reference_fixtures, run_slice, stability_analysis, turing_analysis, AblationReport,
    DiscoveryCurve, DissociationReport, EmotionValidation, ExpertiseReport, ScalingCurve,
    ScalingError, StabilityReport, TuringReport,
};
use crate::session::{
    blind_rescore, run_session, LiveJudge, LiveTarget, ScriptedJudge, ScriptedTarget,
    SessionConfig, SessionError, SessionRecord,
};
use crate::stats::{variance_components, BootstrapConfig, StatsError, VarianceComponents};
use crate::store::{SessionStore, StoreError};
use crate::synthetic::{
    gen_world, run_synthetic_experiment, session_seed, SyntheticBlindScorer, SynthError,
    ABLATION_RUN, STABILITY_RUN_A, STABILITY_RUN_B,
};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("input file does not exist: {0}")]
    MissingInput(PathBuf),
    #[error("io ({path}): {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Scaling(#[from] ScalingError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Dedup(#[from] DedupError),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error(transparent)]
    Persona(#[from] PersonaError),
    #[error(transparent)]
    Session(#[from] SessionError),
    #[error("{0}")]
    Other(String),
}

#[derive(Parser)]
#[command(
    name = "paneljudge",
    about = "Persona-conditioned judge panels: run sessions, simulate synthetic experiments, and analyze scaling behavior",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    command: CommandKind,
}

#[derive(Args)]
struct CommonArgs {
    /// RunConfig JSON; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Root seed; overrides the config value. Recorded in artifact headers.
    #[arg(long)]
    seed: Option<u64>,
    /// Run label to read or write; overrides the config value.
    #[arg(long)]
    run_label: Option<String>,
}

#[derive(Subcommand)]
enum CommandKind {
    /// Execute one session per (task, persona) pair using the configured
    /// backend, appending to the store.
    Run {
        #[command(flatten)]
        common: CommonArgs,
        /// Store file to append to (created if absent).
        #[arg(long)]
        store: PathBuf,
    },
    /// Generate the full seeded synthetic experiment (main grid, stability
    /// pair, ablation arms) into a fresh store. Byte-reproducible per seed.
    Simulate {
        #[command(flatten)]
        common: CommonArgs,
        /// Output store file; must not already contain records.
        #[arg(long)]
        store: PathBuf,
    },
    /// Reliability curve, discovery curve, dissociation, variance
    /// decomposition, expertise gradient, and stability outputs.
    Analyze {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        store: PathBuf,
        /// Output directory for CSV/JSON artifacts.
        #[arg(long)]
        out: PathBuf,
        /// Dedup threshold; overrides the config value.
        #[arg(long)]
        theta: Option<f64>,
    },
    /// Threshold sweep over the deduplicated finding counts.
    Dedup {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        store: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Persona-context ablation table.
    Ablate {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        store: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Human-vs-agent indistinguishability report.
    Turing {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        store: PathBuf,
        /// Human sessions CSV: participant_id,task_id,domain,score,turns.
        #[arg(long)]
        human: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Markdown summary plus every CSV/JSON plot series.
    Report {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        store: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        theta: Option<f64>,
    },
}

/// Parses argv and dispatches; the process exit code.
pub fn main_entry() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        // clap exits 2 on usage errors, 0 for --help/--version.
        Err(e) => e.exit(),
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {err}");
            let mut source = std::error::Error::source(&err);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            1
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        CommandKind::Run { common, store } => cmd_run(&common, &store),
        CommandKind::Simulate { common, store } => cmd_simulate(&common, &store),
        CommandKind::Analyze {
            common,
            store,
            out,
            theta,
        } => cmd_analyze(&common, &store, &out, theta),
        CommandKind::Dedup { common, store, out } => cmd_dedup(&common, &store, &out),
        CommandKind::Ablate { common, store, out } => cmd_ablate(&common, &store, &out),
        CommandKind::Turing {
            common,
            store,
            human,
            out,
        } => cmd_turing(&common, &store, &human, &out),
        CommandKind::Report {
            common,
            store,
            out,
            theta,
        } => cmd_report(&common, &store, &out, theta),
    }
}

struct Loaded {
    config: RunConfig,
    pool: Vec<PersonaSpec>,
    catalog: Vec<TaskSpec>,
    seed: u64,
    run_label: String,
}

fn load_common(common: &CommonArgs) -> Result<Loaded, CliError> {
    let mut config = match &common.config {
        Some(path) => {
            if !path.exists() {
                return Err(CliError::MissingInput(path.clone()));
            }
            RunConfig::from_file(path)?
        }
        None => RunConfig::default(),
    };
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    if let Some(label) = &common.run_label {
        config.run_label = label.clone();
    }
    let pool = config.load_pool()?;
    let catalog = config.load_catalog()?;
    config.validate(pool.len())?;
    Ok(Loaded {
        seed: config.seed,
        run_label: config.run_label.clone(),
        config,
        pool,
        catalog,
    })
}

fn open_input_store(path: &Path) -> Result<SessionStore, CliError> {
    if !path.exists() {
        return Err(CliError::MissingInput(path.to_path_buf()));
    }
    let store = SessionStore::open(path)?;
    if let Some(note) = store.quarantined() {
        eprintln!(
            "warning: removed partial final line {} ({} bytes) to {}",
            note.line,
            note.bytes,
            note.path.display()
        );
    }
    Ok(store)
}

fn ensure_dir(path: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_artifact(path: &Path, content: &str) -> Result<(), CliError> {
    std::fs::write(path, content).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    println!("wrote {}", path.display());
    Ok(())
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

// ---------------------------------------------------------------------------
// run
// ---------------------------------------------------------------------------

enum Backends {
    Synthetic(Box<crate::synthetic::SyntheticWorld>),
    Scripted { judge: String, target: String },
    Live,
}

fn cmd_run(common: &CommonArgs, store_path: &Path) -> Result<(), CliError> {
    let loaded = load_common(common)?;
    let config = &loaded.config;
    let mut store = SessionStore::open(store_path)?;

    let backends = match config.backend {
        BackendKind::Synthetic => {
            Backends::Synthetic(Box::new(gen_world(&config.synthetic, config.seed)?))
        }
        BackendKind::Scripted => {
            let read = |p: &PathBuf| {
                std::fs::read_to_string(p).map_err(|source| CliError::Io {
                    path: p.clone(),
                    source,
                })
            };
            Backends::Scripted {
                judge: read(config.judge_script.as_ref().expect("validated"))?,
                target: read(config.target_script.as_ref().expect("validated"))?,
            }
        }
        BackendKind::Live => Backends::Live,
    };

    let jobs: Vec<(&TaskSpec, &PersonaSpec)> = loaded
        .catalog
        .iter()
        .flat_map(|t| loaded.pool.iter().map(move |p| (t, p)))
        .collect();
    let total = jobs.len();
    println!(
        "running {} sessions ({} backend, {} workers) under label '{}'",
        total,
        config.backend.as_str(),
        config.workers,
        loaded.run_label
    );

    let session_config = SessionConfig {
        run_label: loaded.run_label.clone(),
        condition: config.condition,
        ..SessionConfig::default()
    };
    let execute = |task: &TaskSpec, persona: &PersonaSpec| -> Result<SessionRecord, CliError> {
        let seed = session_seed(
            config.seed,
            &loaded.run_label,
            &task.id,
            persona.id,
            config.condition,
        );
        match &backends {
            Backends::Synthetic(world) => Ok(crate::synthetic::synth_session_labeled(
                world,
                persona,
                task,
                config.condition,
                &loaded.run_label,
                seed,
            )),
            Backends::Scripted { judge, target } => {
                let mut judge = ScriptedJudge::from_json(judge)?;
                let mut target = ScriptedTarget::from_json(target)?;
                Ok(run_session(
                    persona,
                    task,
                    &mut target,
                    &mut judge,
                    &session_config,
                    seed,
                ))
            }
            Backends::Live => {
                let mut judge = LiveJudge::new(config.endpoint.clone())?;
                let target_cfg = config
                    .target_endpoint
                    .clone()
                    .unwrap_or_else(|| config.endpoint.clone());
                let mut target = LiveTarget::new(target_cfg, None)?;
                Ok(run_session(
                    persona,
                    task,
                    &mut target,
                    &mut judge,
                    &session_config,
                    seed,
                ))
            }
        }
    };

    if config.workers <= 1 {
        for (task, persona) in &jobs {
            let record = execute(task, persona)?;
            store.append(&record)?;
        }
    } else {
        // Workers pull jobs off a shared cursor; a single appender drains
        // the channel so the store sees strictly serialized writes.
        let cursor = AtomicUsize::new(0);
        let (tx, rx) = mpsc::channel::<Result<SessionRecord, CliError>>();
        std::thread::scope(|scope| {
            for _ in 0..config.workers.min(total) {
                let tx = tx.clone();
                let jobs = &jobs;
                let cursor = &cursor;
                let execute = &execute;
                scope.spawn(move || loop {
                    let i = cursor.fetch_add(1, Ordering::Relaxed);
                    let Some((task, persona)) = jobs.get(i) else {
                        break;
                    };
                    if tx.send(execute(task, persona)).is_err() {
                        break;
                    }
                });
            }
            drop(tx);
            for result in rx {
                store.append(&result?)?;
            }
            Ok::<(), CliError>(())
        })?;
    }
    store.sync()?;
    println!("store now holds {} records", store.len());
    Ok(())
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

fn cmd_simulate(common: &CommonArgs, store_path: &Path) -> Result<(), CliError> {
    let loaded = load_common(common)?;
    let mut store = SessionStore::open(store_path)?;
    if !store.is_empty() {
        return Err(CliError::Other(format!(
            "store {} already holds {} records; simulate writes a fresh store",
            store_path.display(),
            store.len()
        )));
    }
    let records = run_synthetic_experiment(
        &loaded.config.synthetic,
        &loaded.pool,
        &loaded.catalog,
        loaded.seed,
    )?;
    let n = store.append_all(&records)?;
    store.sync()?;
    println!(
        "simulated {} sessions (seed {}) into {}",
        n,
        loaded.seed,
        store_path.display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// analysis bundle shared by analyze/report
// ---------------------------------------------------------------------------

struct Analysis {
    seed: u64,
    run_label: String,
    theta: f64,
    icc: ScalingCurve,
    discovery: DiscoveryCurve,
    dissociation: DissociationReport,
    components: VarianceComponents,
    expertise: ExpertiseReport,
    stability: Option<StabilityReport>,
    ablation: Option<AblationReport>,
    emotion: EmotionValidation,
}

fn compute_analysis(
    loaded: &Loaded,
    store: &SessionStore,
    theta_override: Option<f64>,
) -> Result<Analysis, CliError> {
    let records = store.records();
    let theta = theta_override.unwrap_or(loaded.config.theta);
    let sizes: Vec<usize> = loaded
        .config
        .panel_sizes
        .iter()
        .copied()
        .filter(|n| *n <= loaded.pool.len())
        .collect();
    let bootstrap = BootstrapConfig {
        seed: loaded.seed,
        ..BootstrapConfig::default()
    };

    let icc = icc_curve(
        records,
        &loaded.pool,
        &loaded.catalog,
        &loaded.run_label,
        &sizes,
        &bootstrap,
    )?;
    let mut embedder = HashedBagEmbedder::default();
    let discovery = discovery_curve(
        records,
        &loaded.pool,
        &loaded.catalog,
        &loaded.run_label,
        &sizes,
        theta,
        &mut embedder,
    )?;
    let dissociation = dissociation_report(&icc, &discovery)?;
    let matrix = build_score_matrix(records, &loaded.run_label)?;
    let components = variance_components(&matrix)?;

    // Persona-blind re-scores come from the synthetic referee when the whole
    // store is synthetic; a live store has no blind channel here.
    let mut blind = BTreeMap::new();
    if records.iter().all(|r| r.judge_backend == "synthetic-judge") {
        let world = gen_world(&loaded.config.synthetic, loaded.seed)?;
        let mut scorer = SyntheticBlindScorer::new(&world);
        for r in run_slice(records, &loaded.run_label) {
            blind.insert(r.session_id.clone(), blind_rescore(r, &mut scorer)?);
        }
    }
    let expertise = expertise_analysis(
        records,
        &loaded.pool,
        &loaded.catalog,
        &loaded.run_label,
        &blind,
        theta,
        &mut embedder,
    )?;

    let has = |label: &str| records.iter().any(|r| r.run_label == label);
    let stability = if has(STABILITY_RUN_A) && has(STABILITY_RUN_B) {
        Some(stability_analysis(
            records,
            &loaded.pool,
            &loaded.catalog,
            STABILITY_RUN_A,
            STABILITY_RUN_B,
            &sizes,
        )?)
    } else {
        None
    };
    let ablation = if has(ABLATION_RUN) {
        Some(ablation_analysis(records, &loaded.pool, ABLATION_RUN)?)
    } else {
        None
    };
    let emotion = personality_emotion_validation(records, &loaded.pool)?;

    Ok(Analysis {
        seed: loaded.seed,
        run_label: loaded.run_label.clone(),
        theta,
        icc,
        discovery,
        dissociation,
        components,
        expertise,
        stability,
        ablation,
        emotion,
    })
}

fn icc_curve_csv(a: &Analysis) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# root_seed={}", a.seed);
    let _ = writeln!(s, "# run_label={}", a.run_label);
    let _ = writeln!(s, "size,icc,ci_low,ci_high,saturation");
    for (i, n) in a.icc.sizes.iter().enumerate() {
        let (lo, hi) = match a.icc.ci[i] {
            Some((lo, hi)) => (Some(lo), Some(hi)),
            None => (None, None),
        };
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            n,
            a.icc.values[i],
            opt(lo),
            opt(hi),
            a.icc.saturation[i]
        );
    }
    s
}

fn discovery_curve_csv(a: &Analysis) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# root_seed={}", a.seed);
    let _ = writeln!(s, "# run_label={}", a.run_label);
    let _ = writeln!(s, "# theta={}", a.theta);
    let _ = writeln!(s, "# band=0.60,0.70");
    let _ = writeln!(
        s,
        "size,unique_findings,band_low,band_high,high_impact_share,saturation"
    );
    for (i, n) in a.discovery.curve.sizes.iter().enumerate() {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            n,
            a.discovery.curve.values[i],
            a.discovery.band_low[i],
            a.discovery.band_high[i],
            a.discovery.high_impact_share[i],
            a.discovery.curve.saturation[i]
        );
    }
    s
}

fn dissociation_csv(a: &Analysis) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# root_seed={}", a.seed);
    let _ = writeln!(
        s,
        "size,score_saturation,discovery_saturation,gap,high_impact_share"
    );
    for (i, n) in a.dissociation.sizes.iter().enumerate() {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            n,
            a.dissociation.score_saturation[i],
            a.dissociation.discovery_saturation[i],
            a.dissociation.gap[i],
            a.dissociation.high_impact_share[i]
        );
    }
    s
}

fn expertise_csv(a: &Analysis) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# root_seed={}", a.seed);
    if let Some(d) = &a.expertise.d_real_time {
        let _ = writeln!(s, "# d_real_time={}", d.value);
    }
    if let Some(d) = &a.expertise.d_blind {
        let _ = writeln!(s, "# d_blind={}", d.value);
    }
    for (tier, gap) in &a.expertise.gap_by_complexity {
        let _ = writeln!(s, "# blind_minus_real_{tier}={gap}");
    }
    let _ = writeln!(
        s,
        "level,sessions,real_time_mean,blind_mean,category_breadth,unique_findings,high_impact_share"
    );
    for row in &a.expertise.rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            row.level.as_str(),
            row.sessions,
            row.real_time_mean,
            opt(row.blind_mean),
            row.category_breadth,
            row.unique_findings,
            row.high_impact_share
        );
    }
    s
}

fn models_json(a: &Analysis) -> String {
    let value = serde_json::json!({
        "root_seed": a.seed,
        "run_label": a.run_label,
        "icc_fits": a.icc.fits,
        "discovery_theta": a.theta,
        "discovery_fits": a.discovery.curve.fits,
    });
    serde_json::to_string_pretty(&value).expect("serializes") + "\n"
}

fn decomposition_json(a: &Analysis) -> String {
    let value = serde_json::json!({
        "root_seed": a.seed,
        "run_label": a.run_label,
        "components": a.components,
    });
    serde_json::to_string_pretty(&value).expect("serializes") + "\n"
}

fn stability_json(a: &Analysis, report: &StabilityReport) -> String {
    let value = serde_json::json!({
        "root_seed": a.seed,
        "run_a": STABILITY_RUN_A,
        "run_b": STABILITY_RUN_B,
        "report": report,
    });
    serde_json::to_string_pretty(&value).expect("serializes") + "\n"
}

fn write_analysis(a: &Analysis, out: &Path) -> Result<(), CliError> {
    ensure_dir(out)?;
    write_artifact(&out.join("icc_curve.csv"), &icc_curve_csv(a))?;
    write_artifact(&out.join("discovery_curve.csv"), &discovery_curve_csv(a))?;
    write_artifact(&out.join("dissociation.csv"), &dissociation_csv(a))?;
    write_artifact(&out.join("decomposition.json"), &decomposition_json(a))?;
    write_artifact(&out.join("model_fits.json"), &models_json(a))?;
    write_artifact(&out.join("expertise.csv"), &expertise_csv(a))?;
    if let Some(stability) = &a.stability {
        write_artifact(&out.join("stability.json"), &stability_json(a, stability))?;
    }
    Ok(())
}

fn cmd_analyze(
    common: &CommonArgs,
    store_path: &Path,
    out: &Path,
    theta: Option<f64>,
) -> Result<(), CliError> {
    let loaded = load_common(common)?;
    let store = open_input_store(store_path)?;
    let a = compute_analysis(&loaded, &store, theta)?;
    write_analysis(&a, out)?;
    println!(
        "icc(32-panel endpoint)={:.4}, best family={}, discovery exponent={:.3}, gap@8={:.3}",
        a.icc.values.last().unwrap(),
        a.icc.best_family().as_str(),
        a.discovery.power_exponent().unwrap_or(f64::NAN),
        a.dissociation.gap_at(8).unwrap_or(f64::NAN),
    );
    println!(
        "variance shares: judge {:.1}%, task {:.1}%, residual {:.1}%",
        a.components.judge_share, a.components.task_share, a.components.residual_share
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// dedup sweep
// ---------------------------------------------------------------------------

fn sweep_csv(seed: u64, run_label: &str, table: &SweepTable) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# root_seed={seed}");
    let _ = writeln!(s, "# run_label={run_label}");
    let _ = writeln!(s, "theta,size,unique_findings,exponent");
    for row in &table.rows {
        for (size, count) in &row.counts {
            let _ = writeln!(
                s,
                "{},{},{},{}",
                row.theta,
                size,
                count,
                opt(row.exponent)
            );
        }
    }
    s
}

fn nested_for_sweep<'a>(
    loaded: &Loaded,
    records: &'a [SessionRecord],
) -> Result<Vec<(usize, Vec<&'a SessionRecord>)>, CliError> {
    let sessions = run_slice(records, &loaded.run_label);
    let mut by_task: BTreeMap<&str, Vec<&SessionRecord>> = BTreeMap::new();
    for s in &sessions {
        by_task.entry(s.task_id.as_str()).or_default().push(s);
    }
    let mut nested = Vec::new();
    for &n in &loaded.config.panel_sizes {
        if n > loaded.pool.len() {
            continue;
        }
        let mut subset: Vec<&SessionRecord> = Vec::new();
        for (task_id, list) in &by_task {
            let task = loaded
                .catalog
                .iter()
                .find(|t| t.id == *task_id)
                .ok_or_else(|| ScalingError::UnknownTask(task_id.to_string()))?;
            let ranking = crate::persona::rank_panel(&loaded.pool, task)?;
            let panel = crate::persona::select_panel(&ranking, n.min(ranking.ranked.len()))?;
            for s in list {
                if panel.contains(&s.persona_id) {
                    subset.push(s);
                }
            }
        }
        nested.push((n, subset));
    }
    Ok(nested)
}

fn cmd_dedup(common: &CommonArgs, store_path: &Path, out: &Path) -> Result<(), CliError> {
    let loaded = load_common(common)?;
    let store = open_input_store(store_path)?;
    let nested = nested_for_sweep(&loaded, store.records())?;
    let mut embedder = HashedBagEmbedder::default();
    let table = threshold_sweep(&nested, &loaded.config.sweep_thetas, &mut embedder)?;
    ensure_dir(out)?;
    write_artifact(
        &out.join("sweep.csv"),
        &sweep_csv(loaded.seed, &loaded.run_label, &table),
    )?;
    for row in &table.rows {
        println!(
            "theta={:.2}: max unique={}, exponent={}",
            row.theta,
            row.counts.last().map(|(_, u)| *u).unwrap_or(0),
            opt(row.exponent)
        );
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// ablate
// ---------------------------------------------------------------------------

fn ablation_csv(seed: u64, report: &AblationReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# root_seed={seed}");
    for w in &report.warnings {
        let _ = writeln!(s, "# warning: {w}");
    }
    let _ = writeln!(s, "condition,sessions,score_sd,mean_insights,expertise_d");
    for row in &report.rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            row.condition.as_str(),
            row.sessions,
            row.score_sd,
            row.mean_insights,
            opt(row.expertise_d.as_ref().map(|d| d.value))
        );
    }
    s
}

fn cmd_ablate(common: &CommonArgs, store_path: &Path, out: &Path) -> Result<(), CliError> {
    let loaded = load_common(common)?;
    let store = open_input_store(store_path)?;
    let label = common
        .run_label
        .clone()
        .unwrap_or_else(|| ABLATION_RUN.to_string());
    let report = ablation_analysis(store.records(), &loaded.pool, &label)?;
    ensure_dir(out)?;
    write_artifact(&out.join("ablation.csv"), &ablation_csv(loaded.seed, &report))?;
    for row in &report.rows {
        println!(
            "{}: n={}, sd={:.4}, insights/session={:.1}",
            row.condition.as_str(),
            row.sessions,
            row.score_sd,
            row.mean_insights
        );
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// turing
// ---------------------------------------------------------------------------

fn turing_json(seed: u64, report: &TuringReport) -> String {
    let value = serde_json::json!({
        "root_seed": seed,
        "report": report,
    });
    serde_json::to_string_pretty(&value).expect("serializes") + "\n"
}

fn cmd_turing(
    common: &CommonArgs,
    store_path: &Path,
    human: &Path,
    out: &Path,
) -> Result<(), CliError> {
    let loaded = load_common(common)?;
    let store = open_input_store(store_path)?;
    if !human.exists() {
        return Err(CliError::MissingInput(human.to_path_buf()));
    }
    let file = std::fs::File::open(human).map_err(|source| CliError::Io {
        path: human.to_path_buf(),
        source,
    })?;
    let humans = load_human_csv(file, &loaded.catalog)?;
    let agents: Vec<SessionRecord> = store
        .records()
        .iter()
        .filter(|r| r.run_label == loaded.run_label)
        .cloned()
        .collect();
    let report = turing_analysis(&humans, &agents, &loaded.catalog)?;
    ensure_dir(out)?;
    write_artifact(&out.join("turing.json"), &turing_json(loaded.seed, &report))?;
    println!(
        "paired t={:.4} (p={}), overall d={:.4}, tasks={}",
        report.paired.value,
        opt(report.paired.p),
        report.overall_d.value,
        report.rows.len()
    );
    for row in &report.rows {
        println!(
            "  {}: hh={:.4} ha={:.4} welch_t={:.3} p_bonf={}",
            row.task_id,
            row.hh_diff,
            row.ha_diff,
            row.welch.value,
            opt(row.p_bonferroni)
        );
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// report
// ---------------------------------------------------------------------------

fn report_markdown(a: &Analysis, store: &SessionStore) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# Panel scaling report\n");
    let _ = writeln!(s, "- root seed: {}", a.seed);
    let _ = writeln!(s, "- run label: {}", a.run_label);
    let _ = writeln!(s, "- records in store: {}", store.len());
    let _ = writeln!(s, "- dedup threshold: {}\n", a.theta);

    let _ = writeln!(s, "## Reliability vs panel size\n");
    let _ = writeln!(s, "| N | ICC(2,k) | 95% CI | saturation |");
    let _ = writeln!(s, "|---|----------|--------|------------|");
    for (i, n) in a.icc.sizes.iter().enumerate() {
        let ci = match a.icc.ci[i] {
            Some((lo, hi)) => format!("[{lo:.3}, {hi:.3}]"),
            None => "-".into(),
        };
        let _ = writeln!(
            s,
            "| {} | {:.4} | {} | {:.3} |",
            n, a.icc.values[i], ci, a.icc.saturation[i]
        );
    }
    let best = &a.icc.fits[0];
    let _ = writeln!(
        s,
        "\nBest fit: {} (a={:.4}, b={:.4}, R²={:.4}, AIC={:.2}).\n",
        best.family.as_str(),
        best.a,
        best.b,
        best.r_squared,
        best.aic
    );

    let _ = writeln!(s, "## Unique findings vs panel size\n");
    let _ = writeln!(
        s,
        "| N | unique (θ={}) | band 0.60 | band 0.70 | high-impact share |",
        a.theta
    );
    let _ = writeln!(s, "|---|--------|------|------|------|");
    for (i, n) in a.discovery.curve.sizes.iter().enumerate() {
        let _ = writeln!(
            s,
            "| {} | {} | {} | {} | {:.3} |",
            n,
            a.discovery.curve.values[i],
            a.discovery.band_low[i],
            a.discovery.band_high[i],
            a.discovery.high_impact_share[i]
        );
    }
    if let Some(b) = a.discovery.power_exponent() {
        let _ = writeln!(s, "\nPower-law exponent at θ={}: b = {:.3}.\n", a.theta, b);
    }

    let _ = writeln!(s, "## Dissociation\n");
    let _ = writeln!(
        s,
        "Score saturation minus discovery saturation, per panel size:\n"
    );
    let _ = writeln!(s, "| N | score sat. | discovery sat. | gap |");
    let _ = writeln!(s, "|---|-----------|----------------|-----|");
    for (i, n) in a.dissociation.sizes.iter().enumerate() {
        let _ = writeln!(
            s,
            "| {} | {:.3} | {:.3} | {:.3} |",
            n,
            a.dissociation.score_saturation[i],
            a.dissociation.discovery_saturation[i],
            a.dissociation.gap[i]
        );
    }
    if let Some(gap) = a.dissociation.gap_at(8) {
        let _ = writeln!(s, "\nGap at N=8: {gap:.3}.\n");
    }

    let _ = writeln!(s, "## Variance decomposition\n");
    let _ = writeln!(
        s,
        "judge {:.1}%, task {:.1}%, residual {:.1}% (n={} tasks x {} judges)\n",
        a.components.judge_share,
        a.components.task_share,
        a.components.residual_share,
        a.components.n_tasks,
        a.components.n_judges
    );

    let _ = writeln!(s, "## Expertise gradient\n");
    let _ = writeln!(
        s,
        "| level | sessions | real-time mean | blind mean | breadth | unique | high-impact |"
    );
    let _ = writeln!(s, "|-------|----------|----------------|------------|---------|--------|-------------|");
    for row in &a.expertise.rows {
        let _ = writeln!(
            s,
            "| {} | {} | {:.4} | {} | {} | {} | {:.3} |",
            row.level.as_str(),
            row.sessions,
            row.real_time_mean,
            row.blind_mean
                .map(|b| format!("{b:.4}"))
                .unwrap_or_else(|| "-".into()),
            row.category_breadth,
            row.unique_findings,
            row.high_impact_share
        );
    }
    if let Some(d) = &a.expertise.d_real_time {
        let _ = writeln!(s, "\nExpert vs novice (real-time): d = {:.3}.", d.value);
    }
    if let Some(d) = &a.expertise.d_blind {
        let _ = writeln!(s, "Expert vs novice (blind): d = {:.3}.", d.value);
    }
    let _ = writeln!(s);

    if let Some(st) = &a.stability {
        let _ = writeln!(s, "## Cross-run stability\n");
        let _ = writeln!(
            s,
            "Per-judge cross-run r = {:.4} over {} judges; panel-mean drift:\n",
            st.per_judge_r.value, st.judges
        );
        let _ = writeln!(s, "| N | abs drift |");
        let _ = writeln!(s, "|---|-----------|");
        for (n, d) in &st.delta_by_size {
            let _ = writeln!(s, "| {n} | {d:.4} |");
        }
        let _ = writeln!(s);
    }

    if let Some(ab) = &a.ablation {
        let _ = writeln!(s, "## Persona-context ablation\n");
        let _ = writeln!(s, "| condition | sessions | score SD | insights/session |");
        let _ = writeln!(s, "|-----------|----------|----------|------------------|");
        for row in &ab.rows {
            let _ = writeln!(
                s,
                "| {} | {} | {:.4} | {:.2} |",
                row.condition.as_str(),
                row.sessions,
                row.score_sd,
                row.mean_insights
            );
        }
        let _ = writeln!(s);
    }

    let _ = writeln!(s, "## Trait-emotion validation\n");
    for row in &a.emotion.rows {
        let _ = writeln!(
            s,
            "- {} vs {}: r = {:.3}{}",
            row.trait_name,
            row.metric,
            row.r,
            row.p
                .map(|p| format!(" (p = {p:.3})"))
                .unwrap_or_default()
        );
    }
    let _ = writeln!(
        s,
        "- peak frustration vs goal achievement: rho = {:.3}\n",
        a.emotion.frustration_goal_rho
    );

    let f = reference_fixtures();
    let _ = writeln!(s, "## External reference values\n");
    let _ = writeln!(
        s,
        "Reported by the source experiments; this artifact does not reproduce \
         them (reproduced_here = {}). Shown for side-by-side reading only.\n",
        f.reproduced_here
    );
    let _ = writeln!(s, "| quantity | reference |");
    let _ = writeln!(s, "|----------|-----------|");
    let _ = writeln!(s, "| human-human gap | {} |", f.human_human_gap);
    let _ = writeln!(s, "| human-agent gap | {} |", f.human_agent_gap);
    let _ = writeln!(s, "| agent-agent gap | {} |", f.agent_agent_gap);
    let _ = writeln!(s, "| paired t (df={}) | {} |", f.turing_df, f.turing_t);
    let _ = writeln!(s, "| stability r | {} |", f.stability_r);
    let _ = writeln!(s, "| stability Δ | {} |", f.stability_delta);
    let _ = writeln!(
        s,
        "| variance shares (judge/task/residual) | {}/{}/{}% |",
        f.judge_share_pct, f.task_share_pct, f.residual_share_pct
    );
    let _ = writeln!(
        s,
        "| real-time means (E/I/N) | {}/{}/{} |",
        f.real_time_means[0], f.real_time_means[1], f.real_time_means[2]
    );
    let _ = writeln!(
        s,
        "| post-hoc means (E/I/N) | {}/{}/{} |",
        f.post_hoc_means[0], f.post_hoc_means[1], f.post_hoc_means[2]
    );
    let _ = writeln!(s, "| breadth ratio | {} |", f.category_breadth_ratio);
    let _ = writeln!(
        s,
        "| score saturation at 8 | {} |",
        f.score_saturation_at_8
    );
    let _ = writeln!(
        s,
        "| discovery saturation at 8 | {} |",
        f.discovery_saturation_at_8
    );
    let _ = writeln!(
        s,
        "| discovery exponent range | {}-{} |",
        f.discovery_exponent_range.0, f.discovery_exponent_range.1
    );
    let _ = writeln!(s, "| log-fit R² | {} |", f.log_fit_r_squared);
    s
}

fn cmd_report(
    common: &CommonArgs,
    store_path: &Path,
    out: &Path,
    theta: Option<f64>,
) -> Result<(), CliError> {
    let loaded = load_common(common)?;
    let store = open_input_store(store_path)?;
    let a = compute_analysis(&loaded, &store, theta)?;
    write_analysis(&a, out)?;
    let nested = nested_for_sweep(&loaded, store.records())?;
    let mut embedder = HashedBagEmbedder::default();
    let table = threshold_sweep(&nested, &loaded.config.sweep_thetas, &mut embedder)?;
    write_artifact(
        &out.join("sweep.csv"),
        &sweep_csv(loaded.seed, &loaded.run_label, &table),
    )?;
    write_artifact(&out.join("report.md"), &report_markdown(&a, &store))?;
    Ok(())
}

// Used by integration tests to exercise dispatch without spawning processes.
#[doc(hidden)]
pub fn try_main_from<I, T>(args: I) -> Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| CliError::Other(e.to_string()))?;
    dispatch(cli)
}
