//! Surveys root seeds against the shape gates the default experiment is
//! expected to satisfy: monotone reliability with a logarithmic best fit,
//! a sublinear discovery exponent at every sweep threshold, the size-8
//! dissociation gap, the variance-share bounds, and cross-run stability.
//! Run it after touching the generator to re-pick the seed `simulate`
//! ships with.
//!
//! Usage: cargo run --example seed_survey [-- lo [hi]]

use paneljudge::dedup::{default_sweep_thetas, threshold_sweep, HashedBagEmbedder};
use paneljudge::persona::{builtin_catalog, builtin_pool};
use paneljudge::scaling::{
    build_score_matrix, discovery_curve, dissociation_report, icc_curve, run_slice,
    stability_analysis, CANONICAL_SIZES,
};
use paneljudge::stats::{variance_components, BootstrapConfig, ModelFamily};
use paneljudge::synthetic::{
    run_synthetic_experiment, SyntheticWorldConfig, MAIN_RUN, STABILITY_RUN_A, STABILITY_RUN_B,
};

fn main() {
    let pool = builtin_pool();
    let catalog = builtin_catalog();
    let args: Vec<u64> = std::env::args().skip(1).filter_map(|s| s.parse().ok()).collect();
    let (lo, hi) = match args.as_slice() {
        [a] => (*a, *a),
        [a, b] => (*a, *b),
        _ => (0, 0),
    };
    let bs = BootstrapConfig {
        resamples: 200,
        ..BootstrapConfig::default()
    };
    for seed in lo..=hi {
        let records =
            run_synthetic_experiment(&SyntheticWorldConfig::default(), &pool, &catalog, seed)
                .unwrap();
        let curve =
            icc_curve(&records, &pool, &catalog, MAIN_RUN, &CANONICAL_SIZES, &bs).unwrap();
        let monotone = curve.values.windows(2).all(|w| w[1] >= w[0]);
        let log_first = curve.best_family() == ModelFamily::Logarithmic;
        let r2 = curve.fits[0].r_squared;

        let mut emb = HashedBagEmbedder::default();
        let disc = discovery_curve(
            &records,
            &pool,
            &catalog,
            MAIN_RUN,
            &CANONICAL_SIZES,
            0.65,
            &mut emb,
        )
        .unwrap();
        let b = disc.power_exponent().unwrap();

        // Exponent at every sweep threshold.
        let sessions = run_slice(&records, MAIN_RUN);
        let mut by_task: std::collections::BTreeMap<&str, Vec<&paneljudge::session::SessionRecord>> =
            std::collections::BTreeMap::new();
        for s in &sessions {
            by_task.entry(s.task_id.as_str()).or_default().push(s);
        }
        let mut nested = Vec::new();
        for &n in &CANONICAL_SIZES {
            let mut subset = Vec::new();
            for (task_id, list) in &by_task {
                let task = catalog.iter().find(|t| t.id == *task_id).unwrap();
                let ranking = paneljudge::persona::rank_panel(&pool, task).unwrap();
                let panel = paneljudge::persona::select_panel(&ranking, n).unwrap();
                for s in list {
                    if panel.contains(&s.persona_id) {
                        subset.push(*s);
                    }
                }
            }
            nested.push((n, subset));
        }
        let sweep = threshold_sweep(&nested, &default_sweep_thetas(), &mut emb).unwrap();
        let sweep_bs: Vec<f64> = sweep.rows.iter().map(|r| r.exponent.unwrap()).collect();
        let sweep_ok = sweep_bs.iter().all(|e| *e < 1.0);

        let gap = dissociation_report(&curve, &disc)
            .unwrap()
            .gap_at(8)
            .unwrap();

        let m = build_score_matrix(&records, MAIN_RUN).unwrap();
        let c = variance_components(&m).unwrap();

        let stab = stability_analysis(
            &records,
            &pool,
            &catalog,
            STABILITY_RUN_A,
            STABILITY_RUN_B,
            &CANONICAL_SIZES,
        )
        .unwrap();
        let r = stab.per_judge_r.value;
        let d32 = stab
            .delta_by_size
            .iter()
            .find(|(n, _)| *n == 32)
            .map(|(_, d)| *d)
            .unwrap();

        let pass = monotone
            && log_first
            && r2 > 0.9
            && b > 0.4
            && b < 0.95
            && sweep_ok
            && gap > 0.15
            && c.judge_share < 5.0
            && (10.0..=45.0).contains(&c.task_share)
            && c.residual_share > 50.0
            && r.abs() < 0.2
            && d32 < 0.05;
        println!(
            "seed {seed:>2} {} mono={} log={} r2={:.3} b={:.3} sweep_max_b={:.3} gap8={:.3} shares j/t/r={:.1}/{:.1}/{:.1} stab_r={:+.3} d32={:.3}",
            if pass { "PASS" } else { "fail" },
            monotone as u8,
            log_first as u8,
            r2,
            b,
            sweep_bs.iter().cloned().fold(f64::MIN, f64::max),
            gap,
            c.judge_share,
            c.task_share,
            c.residual_share,
            r,
            d32
        );
    }
}
