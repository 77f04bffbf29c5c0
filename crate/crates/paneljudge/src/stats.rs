//! Closed-form statistics: two-way random-effects reliability, variance
//! decomposition, scaling-model fits, effect sizes, and rank tests.
//!
//! Everything here is deterministic; the only randomness is the seeded
//! bootstrap used for ICC confidence intervals.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, FisherSnedecor, StudentsT};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("score matrix needs at least 2 rows and 2 columns, got {rows}x{cols}")]
    MatrixShape { rows: usize, cols: usize },
    #[error("score matrix data length {len} does not match {rows}x{cols}")]
    MatrixData { len: usize, rows: usize, cols: usize },
    #[error("score matrix cell ({row}, {col}) is not finite")]
    NonFiniteCell { row: usize, col: usize },
    #[error("need at least {need} points, got {got}")]
    TooFewPoints { need: usize, got: usize },
    #[error("need at least 2 distinct x values")]
    DegenerateX,
    #[error("non-positive size {0} is invalid for logarithmic and power fits")]
    NonPositiveSize(f64),
    #[error("non-positive value {0} is invalid for a power-law fit")]
    NonPositiveValue(f64),
    #[error("need at least 2 groups, got {0}")]
    TooFewGroups(usize),
    #[error("group {0} is empty")]
    EmptyGroup(usize),
    #[error("samples must each hold at least {need} values")]
    TooFewSamples { need: usize },
    #[error("sample lengths differ: {a} vs {b}")]
    LengthMismatch { a: usize, b: usize },
    #[error("zero variance: {0}")]
    ZeroVariance(&'static str),
    #[error("input contains a non-finite value")]
    NonFinite,
}

/// Complete tasks-by-judges score grid, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreMatrix {
    task_ids: Vec<String>,
    judge_ids: Vec<String>,
    values: Vec<f64>,
}

impl ScoreMatrix {
    pub fn new(
        task_ids: Vec<String>,
        judge_ids: Vec<String>,
        values: Vec<f64>,
    ) -> Result<Self, StatsError> {
        let (n, k) = (task_ids.len(), judge_ids.len());
        if n < 2 || k < 2 {
            return Err(StatsError::MatrixShape { rows: n, cols: k });
        }
        if values.len() != n * k {
            return Err(StatsError::MatrixData {
                len: values.len(),
                rows: n,
                cols: k,
            });
        }
        for (i, v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(StatsError::NonFiniteCell {
                    row: i / k,
                    col: i % k,
                });
            }
        }
        Ok(ScoreMatrix {
            task_ids,
            judge_ids,
            values,
        })
    }

    pub fn n_tasks(&self) -> usize {
        self.task_ids.len()
    }

    pub fn n_judges(&self) -> usize {
        self.judge_ids.len()
    }

    pub fn task_ids(&self) -> &[String] {
        &self.task_ids
    }

    pub fn judge_ids(&self) -> &[String] {
        &self.judge_ids
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.n_judges() + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        let k = self.n_judges();
        &self.values[row * k..(row + 1) * k]
    }

    /// New matrix from a row-index resample (used by the bootstrap).
    fn resample_rows(&self, rows: &[usize]) -> ScoreMatrix {
        let k = self.n_judges();
        let mut values = Vec::with_capacity(rows.len() * k);
        let mut task_ids = Vec::with_capacity(rows.len());
        for (i, &r) in rows.iter().enumerate() {
            task_ids.push(format!("{}#{}", self.task_ids[r], i));
            values.extend_from_slice(self.row(r));
        }
        ScoreMatrix {
            task_ids,
            judge_ids: self.judge_ids.clone(),
            values,
        }
    }
}

/// Mean squares and variance components of the two-way model
/// (tasks and judges both random, one observation per cell).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceComponents {
    pub n_tasks: usize,
    pub n_judges: usize,
    pub ms_task: f64,
    pub ms_judge: f64,
    pub ms_residual: f64,
    /// Clamped at zero.
    pub task_var: f64,
    /// Clamped at zero.
    pub judge_var: f64,
    pub residual_var: f64,
    /// Unclamped estimates, kept for diagnostics.
    pub task_var_raw: f64,
    pub judge_var_raw: f64,
    /// Percentage shares of the clamped components; zero when all components
    /// vanish (constant matrix).
    pub task_share: f64,
    pub judge_share: f64,
    pub residual_share: f64,
}

/// Two-way mean squares and clamped variance components.
pub fn variance_components(m: &ScoreMatrix) -> Result<VarianceComponents, StatsError> {
    let n = m.n_tasks();
    let k = m.n_judges();
    let nf = n as f64;
    let kf = k as f64;

    let grand: f64 = m.values.iter().sum::<f64>() / (nf * kf);
    let row_means: Vec<f64> = (0..n)
        .map(|i| m.row(i).iter().sum::<f64>() / kf)
        .collect();
    let col_means: Vec<f64> = (0..k)
        .map(|j| (0..n).map(|i| m.get(i, j)).sum::<f64>() / nf)
        .collect();

    let ss_task: f64 = kf * row_means.iter().map(|r| (r - grand).powi(2)).sum::<f64>();
    let ss_judge: f64 = nf * col_means.iter().map(|c| (c - grand).powi(2)).sum::<f64>();
    let ss_total: f64 = m.values.iter().map(|v| (v - grand).powi(2)).sum();
    // Residual by subtraction; floating error can leave a tiny negative.
    let ss_residual = (ss_total - ss_task - ss_judge).max(0.0);

    let ms_task = ss_task / (nf - 1.0);
    let ms_judge = ss_judge / (kf - 1.0);
    let ms_residual = ss_residual / ((nf - 1.0) * (kf - 1.0));

    let task_var_raw = (ms_task - ms_residual) / kf;
    let judge_var_raw = (ms_judge - ms_residual) / nf;
    let task_var = task_var_raw.max(0.0);
    let judge_var = judge_var_raw.max(0.0);
    let residual_var = ms_residual;

    let total = task_var + judge_var + residual_var;
    let (task_share, judge_share, residual_share) = if total > 0.0 {
        (
            100.0 * task_var / total,
            100.0 * judge_var / total,
            100.0 * residual_var / total,
        )
    } else {
        (0.0, 0.0, 0.0)
    };

    Ok(VarianceComponents {
        n_tasks: n,
        n_judges: k,
        ms_task,
        ms_judge,
        ms_residual,
        task_var,
        judge_var,
        residual_var,
        task_var_raw,
        judge_var_raw,
        task_share,
        judge_share,
        residual_share,
    })
}

/// Qualitative reliability band for an ICC value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgreementBand {
    Poor,
    Moderate,
    Good,
    Excellent,
}

impl AgreementBand {
    pub fn from_value(icc: f64) -> Self {
        if icc < 0.5 {
            AgreementBand::Poor
        } else if icc < 0.75 {
            AgreementBand::Moderate
        } else if icc < 0.9 {
            AgreementBand::Good
        } else {
            AgreementBand::Excellent
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            AgreementBand::Poor => "poor",
            AgreementBand::Moderate => "moderate",
            AgreementBand::Good => "good",
            AgreementBand::Excellent => "excellent",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    pub resamples: usize,
    pub seed: u64,
    /// Two-sided confidence level, e.g. 0.95.
    pub confidence: f64,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        BootstrapConfig {
            resamples: 2000,
            seed: 0,
            confidence: 0.95,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IccResult {
    pub value: f64,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
    pub band: AgreementBand,
    /// True when every variance component is zero (constant matrix); the
    /// value is reported as 0 in that case.
    pub degenerate: bool,
    pub components: VarianceComponents,
}

fn icc2k_from_components(c: &VarianceComponents) -> (f64, bool) {
    let k = c.n_judges as f64;
    let denom = k * c.task_var + c.judge_var + c.residual_var;
    if denom == 0.0 {
        (0.0, true)
    } else {
        (k * c.task_var / denom, false)
    }
}

/// Single-judge reliability from the same components: the share of total
/// variance carried by the task effect.
pub fn icc_single_from_components(c: &VarianceComponents) -> f64 {
    let denom = c.task_var + c.judge_var + c.residual_var;
    if denom == 0.0 {
        0.0
    } else {
        c.task_var / denom
    }
}

/// Average-score reliability ICC(2,k) of a complete tasks-by-judges matrix,
/// equal to (MSR - MSE) / (MSR + (MSC - MSE)/n) with the variance components
/// clamped at zero, which keeps the value in [0, 1].
pub fn icc2k(m: &ScoreMatrix) -> Result<IccResult, StatsError> {
    let components = variance_components(m)?;
    let (value, degenerate) = icc2k_from_components(&components);
    Ok(IccResult {
        value,
        ci_low: None,
        ci_high: None,
        band: AgreementBand::from_value(value),
        degenerate,
        components,
    })
}

/// Linear-interpolation quantile of a sorted slice.
fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        let frac = pos - lo as f64;
        sorted[lo] * (1.0 - frac) + sorted[hi] * frac
    }
}

/// ICC(2,k) with a seeded percentile bootstrap over tasks.
pub fn icc2k_with_ci(m: &ScoreMatrix, cfg: &BootstrapConfig) -> Result<IccResult, StatsError> {
    let mut result = icc2k(m)?;
    let n = m.n_tasks();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut values = Vec::with_capacity(cfg.resamples);
    let mut rows = vec![0usize; n];
    for _ in 0..cfg.resamples {
        for r in rows.iter_mut() {
            *r = rng.random_range(0..n);
        }
        let resampled = m.resample_rows(&rows);
        values.push(icc2k(&resampled)?.value);
    }
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let alpha = (1.0 - cfg.confidence) / 2.0;
    result.ci_low = Some(quantile_sorted(&values, alpha));
    result.ci_high = Some(quantile_sorted(&values, 1.0 - alpha));
    Ok(result)
}

// ---------------------------------------------------------------------------
// Scaling-model fits
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelFamily {
    Logarithmic,
    Linear,
    PowerLaw,
    Hyperbolic,
}

impl ModelFamily {
    pub fn as_str(&self) -> &'static str {
        match self {
            ModelFamily::Logarithmic => "logarithmic",
            ModelFamily::Linear => "linear",
            ModelFamily::PowerLaw => "power_law",
            ModelFamily::Hyperbolic => "hyperbolic",
        }
    }
}

/// One fitted curve family. `b` is unused by the one-parameter hyperbolic
/// family and reported as 0 there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelFit {
    pub family: ModelFamily,
    pub a: f64,
    pub b: f64,
    pub n_params: usize,
    /// Residual sum of squares in the original value space.
    pub rss: f64,
    /// 1 - RSS/TSS in the original value space.
    pub r_squared: f64,
    pub aic: f64,
}

impl ModelFit {
    pub fn predict(&self, x: f64) -> f64 {
        match self.family {
            ModelFamily::Logarithmic => self.a + self.b * x.ln(),
            ModelFamily::Linear => self.a + self.b * x,
            ModelFamily::PowerLaw => self.a * x.powf(self.b),
            ModelFamily::Hyperbolic => 1.0 - self.a / x,
        }
    }
}

const RSS_FLOOR: f64 = 1e-300;

fn aic(rss: f64, m: usize, p: usize) -> f64 {
    let m = m as f64;
    (m * (rss.max(RSS_FLOOR) / m).ln()) + 2.0 * p as f64
}

/// Ordinary least squares for y = a + b x. Returns (a, b).
fn linreg(xs: &[f64], ys: &[f64]) -> Result<(f64, f64), StatsError> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(StatsError::DegenerateX);
    }
    let sxy: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (x - mx) * (y - my))
        .sum();
    let b = sxy / sxx;
    Ok((my - b * mx, b))
}

fn rss_r2(points: &[(f64, f64)], predict: impl Fn(f64) -> f64) -> (f64, f64) {
    let my = points.iter().map(|(_, y)| y).sum::<f64>() / points.len() as f64;
    let rss: f64 = points.iter().map(|(x, y)| (y - predict(*x)).powi(2)).sum();
    let tss: f64 = points.iter().map(|(_, y)| (y - my).powi(2)).sum();
    let r2 = if tss > 0.0 {
        1.0 - rss / tss
    } else if rss <= 1e-24 {
        1.0
    } else {
        0.0
    };
    (rss, r2)
}

fn check_points(points: &[(f64, f64)], need: usize) -> Result<(), StatsError> {
    if points.len() < need {
        return Err(StatsError::TooFewPoints {
            need,
            got: points.len(),
        });
    }
    if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    let first = points[0].0;
    if points.iter().all(|(x, _)| *x == first) {
        return Err(StatsError::DegenerateX);
    }
    Ok(())
}

/// Fit the four scaling families (logarithmic, linear, power, hyperbolic)
/// and rank them by ascending AIC. RSS, R-squared, and AIC are all computed
/// in the original value space so the families are comparable. The power
/// family is skipped when any value is non-positive, since its coefficients
/// come from a log-log regression.
pub fn fit_scaling_models(points: &[(f64, f64)]) -> Result<Vec<ModelFit>, StatsError> {
    check_points(points, 3)?;
    if let Some((x, _)) = points.iter().find(|(x, _)| *x <= 0.0) {
        return Err(StatsError::NonPositiveSize(*x));
    }
    let m = points.len();
    let xs: Vec<f64> = points.iter().map(|(x, _)| *x).collect();
    let ys: Vec<f64> = points.iter().map(|(_, y)| *y).collect();
    let ln_xs: Vec<f64> = xs.iter().map(|x| x.ln()).collect();

    let mut fits = Vec::with_capacity(4);

    let (a, b) = linreg(&ln_xs, &ys)?;
    let (rss, r2) = rss_r2(points, |x| a + b * x.ln());
    fits.push(ModelFit {
        family: ModelFamily::Logarithmic,
        a,
        b,
        n_params: 2,
        rss,
        r_squared: r2,
        aic: aic(rss, m, 2),
    });

    let (a, b) = linreg(&xs, &ys)?;
    let (rss, r2) = rss_r2(points, |x| a + b * x);
    fits.push(ModelFit {
        family: ModelFamily::Linear,
        a,
        b,
        n_params: 2,
        rss,
        r_squared: r2,
        aic: aic(rss, m, 2),
    });

    if ys.iter().all(|y| *y > 0.0) {
        let ln_ys: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
        let (ln_a, b) = linreg(&ln_xs, &ln_ys)?;
        let a = ln_a.exp();
        let (rss, r2) = rss_r2(points, |x| a * x.powf(b));
        fits.push(ModelFit {
            family: ModelFamily::PowerLaw,
            a,
            b,
            n_params: 2,
            rss,
            r_squared: r2,
            aic: aic(rss, m, 2),
        });
    }

    // One-parameter hyperbolic saturation v = 1 - a/x; least squares gives
    // a = sum((1-v)/x) / sum(1/x^2).
    let num: f64 = points.iter().map(|(x, y)| (1.0 - y) / x).sum();
    let den: f64 = points.iter().map(|(x, _)| 1.0 / (x * x)).sum();
    let a = num / den;
    let (rss, r2) = rss_r2(points, |x| 1.0 - a / x);
    fits.push(ModelFit {
        family: ModelFamily::Hyperbolic,
        a,
        b: 0.0,
        n_params: 1,
        rss,
        r_squared: r2,
        aic: aic(rss, m, 1),
    });

    fits.sort_by(|p, q| p.aic.partial_cmp(&q.aic).unwrap());
    Ok(fits)
}

/// Least-squares power law y = a * x^b via log-log regression. All sizes and
/// values must be positive.
pub fn fit_power_law(points: &[(f64, f64)]) -> Result<ModelFit, StatsError> {
    check_points(points, 2)?;
    if let Some((x, _)) = points.iter().find(|(x, _)| *x <= 0.0) {
        return Err(StatsError::NonPositiveSize(*x));
    }
    if let Some((_, y)) = points.iter().find(|(_, y)| *y <= 0.0) {
        return Err(StatsError::NonPositiveValue(*y));
    }
    let ln_xs: Vec<f64> = points.iter().map(|(x, _)| x.ln()).collect();
    let ln_ys: Vec<f64> = points.iter().map(|(_, y)| y.ln()).collect();
    let (ln_a, b) = linreg(&ln_xs, &ln_ys)?;
    let a = ln_a.exp();
    let (rss, r2) = rss_r2(points, |x| a * x.powf(b));
    Ok(ModelFit {
        family: ModelFamily::PowerLaw,
        a,
        b,
        n_params: 2,
        rss,
        r_squared: r2,
        aic: aic(rss, points.len(), 2),
    })
}

// ---------------------------------------------------------------------------
// Effect sizes and hypothesis tests
// ---------------------------------------------------------------------------

/// Named statistic with optional degrees of freedom and two-sided p-value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatResult {
    pub name: String,
    pub value: f64,
    pub df: Option<f64>,
    pub df2: Option<f64>,
    pub p: Option<f64>,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased (n-1) sample variance.
fn sample_var(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64
}

fn check_finite(xs: &[f64]) -> Result<(), StatsError> {
    if xs.iter().any(|x| !x.is_finite()) {
        Err(StatsError::NonFinite)
    } else {
        Ok(())
    }
}

/// Treats rounding dust from mean subtraction as zero spread.
fn near_zero_spread(spread: f64, location: f64) -> bool {
    spread <= 1e-12 * location.abs().max(1.0)
}

fn t_two_sided_p(t: f64, df: f64) -> f64 {
    if !t.is_finite() {
        return 0.0;
    }
    let dist = StudentsT::new(0.0, 1.0, df).expect("valid dof");
    2.0 * (1.0 - dist.cdf(t.abs()))
}

/// Effect size omega-squared from a one-way layout, clamped at zero, with the
/// ANOVA F-test p-value attached.
pub fn omega_squared(groups: &[Vec<f64>]) -> Result<StatResult, StatsError> {
    if groups.len() < 2 {
        return Err(StatsError::TooFewGroups(groups.len()));
    }
    for (i, g) in groups.iter().enumerate() {
        if g.is_empty() {
            return Err(StatsError::EmptyGroup(i));
        }
        check_finite(g)?;
    }
    let total_n: usize = groups.iter().map(|g| g.len()).sum();
    let g_count = groups.len();
    if total_n <= g_count {
        return Err(StatsError::TooFewSamples { need: g_count + 1 });
    }
    let grand = groups.iter().flatten().sum::<f64>() / total_n as f64;
    let ss_between: f64 = groups
        .iter()
        .map(|g| g.len() as f64 * (mean(g) - grand).powi(2))
        .sum();
    let ss_within: f64 = groups
        .iter()
        .map(|g| {
            let m = mean(g);
            g.iter().map(|x| (x - m).powi(2)).sum::<f64>()
        })
        .sum();
    let ss_total = ss_between + ss_within;
    let df_between = (g_count - 1) as f64;
    let df_within = (total_n - g_count) as f64;
    let ms_within = ss_within / df_within;

    let value = if ss_total + ms_within > 0.0 {
        ((ss_between - df_between * ms_within) / (ss_total + ms_within)).max(0.0)
    } else {
        0.0
    };

    let p = if ms_within > 0.0 {
        let f = (ss_between / df_between) / ms_within;
        let dist = FisherSnedecor::new(df_between, df_within).expect("valid dof");
        1.0 - dist.cdf(f)
    } else if ss_between > 0.0 {
        0.0
    } else {
        1.0
    };

    Ok(StatResult {
        name: "omega_squared".into(),
        value,
        df: Some(df_between),
        df2: Some(df_within),
        p: Some(p),
    })
}

/// Cohen's d with the pooled (n-1) standard deviation.
pub fn cohen_d(a: &[f64], b: &[f64]) -> Result<StatResult, StatsError> {
    if a.len() < 2 || b.len() < 2 {
        return Err(StatsError::TooFewSamples { need: 2 });
    }
    check_finite(a)?;
    check_finite(b)?;
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let pooled = (((na - 1.0) * sample_var(a) + (nb - 1.0) * sample_var(b)) / (na + nb - 2.0))
        .sqrt();
    if near_zero_spread(pooled, mean(a).abs().max(mean(b).abs())) {
        return Err(StatsError::ZeroVariance("pooled standard deviation"));
    }
    Ok(StatResult {
        name: "cohen_d".into(),
        value: (mean(a) - mean(b)) / pooled,
        df: None,
        df2: None,
        p: None,
    })
}

/// One-sample t-test of paired differences against zero. All-zero
/// differences give t = 0, p = 1; zero variance around a non-zero mean is an
/// error.
pub fn paired_t(diffs: &[f64]) -> Result<StatResult, StatsError> {
    if diffs.len() < 2 {
        return Err(StatsError::TooFewSamples { need: 2 });
    }
    check_finite(diffs)?;
    let m = diffs.len() as f64;
    let mu = mean(diffs);
    let sd = sample_var(diffs).sqrt();
    let df = m - 1.0;
    if near_zero_spread(sd, mu) {
        if mu.abs() <= 1e-12 {
            return Ok(StatResult {
                name: "paired_t".into(),
                value: 0.0,
                df: Some(df),
                df2: None,
                p: Some(1.0),
            });
        }
        return Err(StatsError::ZeroVariance(
            "paired differences are constant and non-zero",
        ));
    }
    let t = mu / (sd / m.sqrt());
    Ok(StatResult {
        name: "paired_t".into(),
        value: t,
        df: Some(df),
        df2: None,
        p: Some(t_two_sided_p(t, df)),
    })
}

/// Welch's two-sample t-test with the Welch-Satterthwaite degrees of freedom.
pub fn welch_t(a: &[f64], b: &[f64]) -> Result<StatResult, StatsError> {
    if a.len() < 2 || b.len() < 2 {
        return Err(StatsError::TooFewSamples { need: 2 });
    }
    check_finite(a)?;
    check_finite(b)?;
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (va, vb) = (sample_var(a), sample_var(b));
    let se2 = va / na + vb / nb;
    if near_zero_spread(se2.sqrt(), mean(a).abs().max(mean(b).abs())) {
        if (mean(a) - mean(b)).abs() <= 1e-12 {
            return Ok(StatResult {
                name: "welch_t".into(),
                value: 0.0,
                df: Some(na + nb - 2.0),
                df2: None,
                p: Some(1.0),
            });
        }
        return Err(StatsError::ZeroVariance(
            "both groups constant with different means",
        ));
    }
    let t = (mean(a) - mean(b)) / se2.sqrt();
    let df = se2.powi(2)
        / ((va / na).powi(2) / (na - 1.0) + (vb / nb).powi(2) / (nb - 1.0));
    Ok(StatResult {
        name: "welch_t".into(),
        value: t,
        df: Some(df),
        df2: None,
        p: Some(t_two_sided_p(t, df)),
    })
}

/// Bonferroni correction: p * m capped at 1.
pub fn bonferroni(p: f64, m: usize) -> f64 {
    (p * m as f64).min(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrelationMethod {
    Pearson,
    Spearman,
}

/// Average ranks, ties sharing the mean of their rank run (1-based).
fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&i, &j| xs[i].partial_cmp(&xs[j]).unwrap());
    let mut ranks = vec![0.0; xs.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && xs[order[j + 1]] == xs[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    ranks
}

fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64, StatsError> {
    let mx = mean(xs);
    let my = mean(ys);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 || syy == 0.0 {
        return Err(StatsError::ZeroVariance("correlation input"));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Ok(sxy / (sxx * syy).sqrt())
}

/// Pearson r or Spearman rho (average ranks for ties), with the t
/// approximation for the two-sided p-value.
pub fn correlation(
    xs: &[f64],
    ys: &[f64],
    method: CorrelationMethod,
) -> Result<StatResult, StatsError> {
    if xs.len() != ys.len() {
        return Err(StatsError::LengthMismatch {
            a: xs.len(),
            b: ys.len(),
        });
    }
    if xs.len() < 3 {
        return Err(StatsError::TooFewSamples { need: 3 });
    }
    check_finite(xs)?;
    check_finite(ys)?;
    let (r, name) = match method {
        CorrelationMethod::Pearson => (pearson(xs, ys)?, "pearson_r"),
        CorrelationMethod::Spearman => (
            pearson(&average_ranks(xs), &average_ranks(ys))?,
            "spearman_rho",
        ),
    };
    let df = (xs.len() - 2) as f64;
    let p = if (1.0 - r * r) <= 0.0 {
        0.0
    } else {
        let t = r * (df / (1.0 - r * r)).sqrt();
        t_two_sided_p(t, df)
    };
    Ok(StatResult {
        name: name.into(),
        value: r,
        df: Some(df),
        df2: None,
        p: Some(p),
    })
}

/// Asymptotic Kolmogorov tail probability Q(lambda).
fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda <= 1e-8 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for j in 1..=100 {
        let term = (-2.0 * (j as f64).powi(2) * lambda * lambda).exp();
        sum += sign * term;
        sign = -sign;
        if term < 1e-12 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Two-sample Kolmogorov-Smirnov test. D is the supremum ECDF gap; the
/// p-value uses the asymptotic Kolmogorov distribution with effective sample
/// size n1*n2/(n1+n2).
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<StatResult, StatsError> {
    if a.is_empty() || b.is_empty() {
        return Err(StatsError::TooFewSamples { need: 1 });
    }
    check_finite(a)?;
    check_finite(b)?;
    let mut sa = a.to_vec();
    let mut sb = b.to_vec();
    sa.sort_by(|x, y| x.partial_cmp(y).unwrap());
    sb.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let (na, nb) = (sa.len(), sb.len());
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < na && j < nb {
        let x = sa[i].min(sb[j]);
        while i < na && sa[i] <= x {
            i += 1;
        }
        while j < nb && sb[j] <= x {
            j += 1;
        }
        let diff = (i as f64 / na as f64 - j as f64 / nb as f64).abs();
        d = d.max(diff);
    }
    let ne = (na * nb) as f64 / (na + nb) as f64;
    let p = kolmogorov_q(ne.sqrt() * d);
    Ok(StatResult {
        name: "ks_d".into(),
        value: d,
        df: None,
        df2: None,
        p: Some(p),
    })
}
