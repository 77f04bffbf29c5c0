//! Semantic deduplication: embeds insight texts, clusters them with
//! average-linkage agglomeration under a cosine threshold, and produces
//! unique-finding sets and threshold sweeps.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::session::{IssueCategory, Polarity, SessionRecord, Severity};
use crate::stats::{fit_power_law, ModelFit};

#[derive(Debug, Error)]
pub enum DedupError {
    #[error("threshold {0} outside (0, 1)")]
    ThetaRange(f64),
    #[error("sweep threshold {0} outside [0.50, 0.80]")]
    SweepTheta(f64),
    #[error("no insights to cluster")]
    EmptyCorpus,
    #[error("embedding failed for texts at indices {0:?}")]
    EmbedFailure(Vec<usize>),
    #[error("embedder returned dimension {got}, expected {want}")]
    DimensionMismatch { got: usize, want: usize },
    #[error("vector {index} has norm {norm}, expected 1")]
    NotNormalized { index: usize, norm: f64 },
    #[error("vector count {vectors} does not match item count {items}")]
    CountMismatch { vectors: usize, items: usize },
    #[error("embedding cache io: {0}")]
    CacheIo(String),
    #[error("embedding endpoint: {0}")]
    Endpoint(String),
}

/// 64-bit FNV-1a. Stable across platforms and toolchains; used for feature
/// hashing and for deriving per-session seeds elsewhere in the crate.
pub fn fnv1a_64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        hash ^= *b as u64;
        hash = hash.wrapping_mul(0x100_0000_01b3);
    }
    hash
}

/// Unit-norm embedding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingVector(Vec<f32>);

impl EmbeddingVector {
    /// Normalizes and wraps; zero vectors are rejected by the caller since
    /// the failing index matters there.
    fn from_raw(mut v: Vec<f32>) -> Option<Self> {
        let norm = v.iter().map(|x| (*x as f64) * (*x as f64)).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return None;
        }
        for x in v.iter_mut() {
            *x = (*x as f64 / norm) as f32;
        }
        Some(EmbeddingVector(v))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|x| (*x as f64) * (*x as f64)).sum::<f64>().sqrt()
    }
}

/// Cosine similarity of two unit vectors (their dot product).
pub fn cosine(a: &EmbeddingVector, b: &EmbeddingVector) -> f64 {
    a.0.iter()
        .zip(&b.0)
        .map(|(x, y)| *x as f64 * *y as f64)
        .sum()
}

pub trait Embedder {
    fn name(&self) -> &str;
    fn dim(&self) -> usize;
    /// One raw (pre-normalization) vector per text; empty texts produce zero
    /// vectors which the caller reports as failures by index.
    fn embed_raw(&mut self, texts: &[&str]) -> Result<Vec<Vec<f32>>, DedupError>;
}

/// Deterministic test embedder: signed hashed token bag projected to a fixed
/// dimension. Tokens are lowercase alphanumeric runs; each token adds +/-1 to
/// the slot picked by its 64-bit hash, sign from the hash's top bit, and the
/// result is L2-normalized. Texts with no shared token embed orthogonally
/// unless their tokens collide in the table.
pub struct HashedBagEmbedder {
    dim: usize,
}

pub const DEFAULT_EMBED_DIM: usize = 256;

impl Default for HashedBagEmbedder {
    fn default() -> Self {
        HashedBagEmbedder {
            dim: DEFAULT_EMBED_DIM,
        }
    }
}

impl HashedBagEmbedder {
    pub fn with_dim(dim: usize) -> Self {
        HashedBagEmbedder { dim }
    }
}

pub fn tokenize(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(|t| t.to_lowercase())
}

impl Embedder for HashedBagEmbedder {
    fn name(&self) -> &str {
        "hashed-bag"
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn embed_raw(&mut self, texts: &[&str]) -> Result<Vec<Vec<f32>>, DedupError> {
        Ok(texts
            .iter()
            .map(|text| {
                let mut v = vec![0.0f32; self.dim];
                for tok in tokenize(text) {
                    let h = fnv1a_64(tok.as_bytes());
                    let idx = (h % self.dim as u64) as usize;
                    let sign = if h >> 63 == 0 { 1.0 } else { -1.0 };
                    v[idx] += sign;
                }
                v
            })
            .collect())
    }
}

/// Embeds and normalizes, reporting every failed index at once.
pub fn embed_insights(
    texts: &[&str],
    embedder: &mut dyn Embedder,
) -> Result<Vec<EmbeddingVector>, DedupError> {
    if texts.is_empty() {
        return Err(DedupError::EmptyCorpus);
    }
    let raw = embedder.embed_raw(texts)?;
    if raw.len() != texts.len() {
        return Err(DedupError::CountMismatch {
            vectors: raw.len(),
            items: texts.len(),
        });
    }
    let want = embedder.dim();
    let mut out = Vec::with_capacity(raw.len());
    let mut failed = Vec::new();
    for (i, v) in raw.into_iter().enumerate() {
        if v.len() != want {
            return Err(DedupError::DimensionMismatch { got: v.len(), want });
        }
        match EmbeddingVector::from_raw(v) {
            Some(e) => out.push(e),
            None => failed.push(i),
        }
    }
    if !failed.is_empty() {
        return Err(DedupError::EmbedFailure(failed));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Average-linkage agglomeration
// ---------------------------------------------------------------------------

/// Dense symmetric similarity matrix over n items.
pub struct SimMatrix {
    n: usize,
    data: Vec<f32>,
}

impl SimMatrix {
    pub fn from_vectors(vectors: &[EmbeddingVector]) -> SimMatrix {
        let n = vectors.len();
        let mut data = vec![0.0f32; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
            for j in (i + 1)..n {
                let s = cosine(&vectors[i], &vectors[j]) as f32;
                data[i * n + j] = s;
                data[j * n + i] = s;
            }
        }
        SimMatrix { n, data }
    }

    /// Submatrix over a subset of item indices (in the order given).
    pub fn subset(&self, indices: &[usize]) -> SimMatrix {
        let m = indices.len();
        let mut data = vec![0.0f32; m * m];
        for (a, &i) in indices.iter().enumerate() {
            for (b, &j) in indices.iter().enumerate() {
                data[a * m + b] = self.data[i * self.n + j];
            }
        }
        SimMatrix { n: m, data }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f32 {
        self.data[i * self.n + j]
    }
}

/// Full average-linkage merge tree. Built once per corpus; any threshold in
/// (0, 1) can then be applied as a cut. Average linkage is reducible, so the
/// merge similarities never increase along the sequence and cutting at theta
/// is identical to stopping the greedy agglomeration at theta.
pub struct Dendrogram {
    n: usize,
    /// (item in cluster a, item in cluster b, average-linkage similarity),
    /// in merge order.
    merges: Vec<(usize, usize, f32)>,
}

impl Dendrogram {
    /// Nearest-neighbor-chain agglomeration with the Lance-Williams average
    /// update. Ties break toward the smallest original member id.
    pub fn build(sims: &SimMatrix) -> Dendrogram {
        let n = sims.len();
        let mut sim = sims.data.clone();
        let mut size = vec![1usize; n];
        // Smallest original member id of the cluster in each slot.
        let canon: Vec<usize> = (0..n).collect();
        let mut alive = vec![true; n];
        let mut alive_count = n;
        let mut merges = Vec::with_capacity(n.saturating_sub(1));
        let mut chain: Vec<usize> = Vec::new();

        let at = |sim: &[f32], i: usize, j: usize| sim[i * n + j];

        while alive_count > 1 {
            if chain.is_empty() {
                let first = (0..n)
                    .filter(|&s| alive[s])
                    .min_by_key(|&s| canon[s])
                    .expect("alive cluster exists");
                chain.push(first);
            }
            loop {
                let a = *chain.last().unwrap();
                // Nearest alive neighbor: max similarity, ties to smallest
                // canonical member id.
                let mut best: Option<usize> = None;
                for s in 0..n {
                    if !alive[s] || s == a {
                        continue;
                    }
                    best = match best {
                        None => Some(s),
                        Some(b) => {
                            let (sa, sb) = (at(&sim, a, s), at(&sim, a, b));
                            if sa > sb || (sa == sb && canon[s] < canon[b]) {
                                Some(s)
                            } else {
                                Some(b)
                            }
                        }
                    };
                }
                let b = best.expect("at least two alive clusters");
                if chain.len() >= 2 && chain[chain.len() - 2] == b {
                    // Reciprocal nearest neighbors: merge a and b.
                    chain.pop();
                    chain.pop();
                    let s_ab = at(&sim, a, b);
                    let (keep, drop) = if canon[a] < canon[b] { (a, b) } else { (b, a) };
                    merges.push((canon[keep], canon[drop], s_ab));
                    let (ka, kb) = (size[keep] as f32, size[drop] as f32);
                    for c in 0..n {
                        if !alive[c] || c == keep || c == drop {
                            continue;
                        }
                        let merged =
                            (ka * at(&sim, keep, c) + kb * at(&sim, drop, c)) / (ka + kb);
                        sim[keep * n + c] = merged;
                        sim[c * n + keep] = merged;
                    }
                    size[keep] += size[drop];
                    alive[drop] = false;
                    alive_count -= 1;
                    break;
                }
                chain.push(b);
            }
        }
        Dendrogram { n, merges }
    }

    /// Partition after stopping all merges below `theta`. Members are sorted
    /// within each cluster; clusters ordered by smallest member.
    pub fn cut(&self, theta: f64) -> Vec<Vec<usize>> {
        let mut parent: Vec<usize> = (0..self.n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for &(a, b, s) in &self.merges {
            if s as f64 >= theta {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                if ra != rb {
                    // Root at the smaller id for stable output.
                    let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
                    parent[hi] = lo;
                }
            }
        }
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for i in 0..self.n {
            let r = find(&mut parent, i);
            groups.entry(r).or_default().push(i);
        }
        groups.into_values().collect()
    }
}

/// Convenience: cluster unit vectors at one threshold.
pub fn cluster_members(
    vectors: &[EmbeddingVector],
    theta: f64,
) -> Result<Vec<Vec<usize>>, DedupError> {
    if !(0.0..1.0).contains(&theta) || theta <= 0.0 {
        return Err(DedupError::ThetaRange(theta));
    }
    if vectors.is_empty() {
        return Err(DedupError::EmptyCorpus);
    }
    let sims = SimMatrix::from_vectors(vectors);
    Ok(Dendrogram::build(&sims).cut(theta))
}

// ---------------------------------------------------------------------------
// Finding sets over session corpora
// ---------------------------------------------------------------------------

/// One pooled insight with its provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusInsight {
    pub session_id: String,
    pub text: String,
    pub category: IssueCategory,
    pub severity: Severity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FindingCluster {
    /// Indices into the pooled corpus, ascending.
    pub members: Vec<usize>,
    /// Medoid text: the member closest to the cluster centroid, ties to the
    /// smallest index.
    pub representative: String,
    /// Majority category; ties prefer the candidate holding the most severe
    /// member, then the lexicographically smaller name.
    pub category: IssueCategory,
    /// Maximum severity over members.
    pub severity: Severity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FindingSet {
    pub theta: f64,
    pub clusters: Vec<FindingCluster>,
    pub unique_count: usize,
    /// Fraction of clusters whose severity is high.
    pub high_impact_share: f64,
}

fn majority_category(items: &[&CorpusInsight]) -> IssueCategory {
    let mut per: BTreeMap<IssueCategory, (usize, Severity)> = BTreeMap::new();
    for it in items {
        let e = per.entry(it.category).or_insert((0, Severity::Low));
        e.0 += 1;
        e.1 = e.1.max(it.severity);
    }
    per.into_iter()
        .max_by(|(ca, (na, sa)), (cb, (nb, sb))| {
            na.cmp(nb)
                .then(sa.cmp(sb))
                // Higher count and severity win; for a full tie the smaller
                // name must win, so reverse the name ordering here.
                .then(cb.as_str().cmp(ca.as_str()))
        })
        .map(|(c, _)| c)
        .expect("non-empty cluster")
}

fn medoid(members: &[usize], vectors: &[EmbeddingVector]) -> usize {
    let dim = vectors[members[0]].dim();
    let mut centroid = vec![0.0f64; dim];
    for &m in members {
        for (c, x) in centroid.iter_mut().zip(vectors[m].as_slice()) {
            *c += *x as f64;
        }
    }
    let mut best = members[0];
    let mut best_sim = f64::NEG_INFINITY;
    for &m in members {
        let sim: f64 = centroid
            .iter()
            .zip(vectors[m].as_slice())
            .map(|(c, x)| c * *x as f64)
            .sum();
        if sim > best_sim + 1e-12 {
            best = m;
            best_sim = sim;
        }
    }
    best
}

/// Assembles finding clusters from a partition over the pooled corpus.
pub fn build_clusters(
    items: &[CorpusInsight],
    vectors: &[EmbeddingVector],
    partition: Vec<Vec<usize>>,
) -> Result<Vec<FindingCluster>, DedupError> {
    if vectors.len() != items.len() {
        return Err(DedupError::CountMismatch {
            vectors: vectors.len(),
            items: items.len(),
        });
    }
    Ok(partition
        .into_iter()
        .map(|members| {
            let refs: Vec<&CorpusInsight> = members.iter().map(|&m| &items[m]).collect();
            let severity = refs.iter().map(|i| i.severity).max().expect("non-empty");
            let category = majority_category(&refs);
            let representative = items[medoid(&members, vectors)].text.clone();
            FindingCluster {
                members,
                representative,
                category,
                severity,
            }
        })
        .collect())
}

/// Pools insights from sessions in order. Failed sessions are skipped;
/// strength-polarity insights are skipped unless requested.
pub fn pool_insights(sessions: &[&SessionRecord], include_strengths: bool) -> Vec<CorpusInsight> {
    let mut out = Vec::new();
    for s in sessions {
        if s.is_failed() {
            continue;
        }
        for e in &s.diary {
            for i in &e.insights {
                if i.polarity == Polarity::Strength && !include_strengths {
                    continue;
                }
                out.push(CorpusInsight {
                    session_id: s.session_id.clone(),
                    text: i.text.clone(),
                    category: i.category,
                    severity: i.severity,
                });
            }
        }
    }
    out
}

fn finding_set_from_partition(
    items: &[CorpusInsight],
    vectors: &[EmbeddingVector],
    partition: Vec<Vec<usize>>,
    theta: f64,
) -> Result<FindingSet, DedupError> {
    let clusters = build_clusters(items, vectors, partition)?;
    let high = clusters
        .iter()
        .filter(|c| c.severity == Severity::High)
        .count();
    Ok(FindingSet {
        theta,
        unique_count: clusters.len(),
        high_impact_share: high as f64 / clusters.len() as f64,
        clusters,
    })
}

/// Deduplicates the issue insights pooled across `sessions` at threshold
/// `theta` (default operating point 0.65).
pub fn unique_findings(
    sessions: &[&SessionRecord],
    theta: f64,
    embedder: &mut dyn Embedder,
) -> Result<FindingSet, DedupError> {
    unique_findings_with_options(sessions, theta, embedder, false)
}

pub fn unique_findings_with_options(
    sessions: &[&SessionRecord],
    theta: f64,
    embedder: &mut dyn Embedder,
    include_strengths: bool,
) -> Result<FindingSet, DedupError> {
    if !(0.0..1.0).contains(&theta) || theta <= 0.0 {
        return Err(DedupError::ThetaRange(theta));
    }
    let items = pool_insights(sessions, include_strengths);
    if items.is_empty() {
        return Err(DedupError::EmptyCorpus);
    }
    let texts: Vec<&str> = items.iter().map(|i| i.text.as_str()).collect();
    let vectors = embed_insights(&texts, embedder)?;
    let partition = cluster_members(&vectors, theta)?;
    finding_set_from_partition(&items, &vectors, partition, theta)
}

pub const DEFAULT_THETA: f64 = 0.65;
pub const SWEEP_MIN: f64 = 0.50;
pub const SWEEP_MAX: f64 = 0.80;
pub const BAND_LOW: f64 = 0.60;
pub const BAND_HIGH: f64 = 0.70;

pub fn default_sweep_thetas() -> Vec<f64> {
    vec![0.50, 0.55, 0.60, 0.65, 0.70, 0.75, 0.80]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub theta: f64,
    /// (panel size, unique findings), ascending in size.
    pub counts: Vec<(usize, usize)>,
    /// Power-law exponent of counts vs size; absent when the fit is not
    /// defined (fewer than two sizes).
    pub exponent: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
}

/// Threshold sweep over nested per-size session subsets. Every theta must
/// stay within [0.50, 0.80]. The corpus is embedded once over the largest
/// subset; each size reuses its dendrogram across all thresholds.
pub fn threshold_sweep(
    nested: &[(usize, Vec<&SessionRecord>)],
    thetas: &[f64],
    embedder: &mut dyn Embedder,
) -> Result<SweepTable, DedupError> {
    for &t in thetas {
        if !(SWEEP_MIN..=SWEEP_MAX).contains(&t) {
            return Err(DedupError::SweepTheta(t));
        }
    }
    if nested.is_empty() || thetas.is_empty() {
        return Err(DedupError::EmptyCorpus);
    }
    // The largest subset's pool is the union for nested panels; subsets are
    // matched into it by (session, position) so embeddings are shared.
    let largest = nested
        .iter()
        .max_by_key(|(_, sessions)| sessions.len())
        .expect("non-empty");
    let union_items = pool_insights(&largest.1, false);
    if union_items.is_empty() {
        return Err(DedupError::EmptyCorpus);
    }
    let texts: Vec<&str> = union_items.iter().map(|i| i.text.as_str()).collect();
    let vectors = embed_insights(&texts, embedder)?;
    let sims = SimMatrix::from_vectors(&vectors);
    let mut offsets: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (idx, item) in union_items.iter().enumerate() {
        offsets.entry(item.session_id.as_str()).or_default().push(idx);
    }

    // Per size: indices into the union corpus, then one dendrogram.
    let mut per_size: Vec<(usize, Vec<usize>, Dendrogram)> = Vec::new();
    for (size, sessions) in nested {
        let mut indices = Vec::new();
        for s in sessions {
            if let Some(list) = offsets.get(s.session_id.as_str()) {
                indices.extend_from_slice(list);
            }
        }
        indices.sort_unstable();
        if indices.is_empty() {
            return Err(DedupError::EmptyCorpus);
        }
        let sub = sims.subset(&indices);
        per_size.push((*size, indices, Dendrogram::build(&sub)));
    }
    per_size.sort_by_key(|(size, _, _)| *size);

    let mut rows = Vec::with_capacity(thetas.len());
    for &theta in thetas {
        let mut counts = Vec::with_capacity(per_size.len());
        for (size, _indices, dendro) in &per_size {
            counts.push((*size, dendro.cut(theta).len()));
        }
        let points: Vec<(f64, f64)> = counts
            .iter()
            .map(|(n, u)| (*n as f64, *u as f64))
            .collect();
        let exponent = if points.len() >= 2 {
            fit_power_law(&points).ok().map(|f: ModelFit| f.b)
        } else {
            None
        };
        rows.push(SweepRow {
            theta,
            counts,
            exponent,
        });
    }
    Ok(SweepTable { rows })
}

// ---------------------------------------------------------------------------
// Live embedding client with on-disk cache
// ---------------------------------------------------------------------------

/// Content-addressed embedding cache: sha256(text) -> raw vector.
pub struct EmbeddingCache {
    path: PathBuf,
    map: BTreeMap<String, Vec<f32>>,
}

impl EmbeddingCache {
    pub fn open(path: PathBuf) -> Result<Self, DedupError> {
        let map = if path.exists() {
            let data = std::fs::read_to_string(&path)
                .map_err(|e| DedupError::CacheIo(e.to_string()))?;
            serde_json::from_str(&data).map_err(|e| DedupError::CacheIo(e.to_string()))?
        } else {
            BTreeMap::new()
        };
        Ok(EmbeddingCache { path, map })
    }

    pub fn key(text: &str) -> String {
        let mut h = Sha256::new();
        h.update(text.as_bytes());
        h.finalize()
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub fn get(&self, text: &str) -> Option<&Vec<f32>> {
        self.map.get(&Self::key(text))
    }

    pub fn put(&mut self, text: &str, v: Vec<f32>) {
        self.map.insert(Self::key(text), v);
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn save(&self) -> Result<(), DedupError> {
        let data =
            serde_json::to_string(&self.map).map_err(|e| DedupError::CacheIo(e.to_string()))?;
        std::fs::write(&self.path, data).map_err(|e| DedupError::CacheIo(e.to_string()))
    }
}

/// Batch embedding endpoint client. Unseen texts are fetched in one request
/// per call and written through the cache.
pub struct LiveEmbedder {
    base_url: String,
    model: String,
    api_key: Option<String>,
    dim: usize,
    cache: Option<EmbeddingCache>,
    http: reqwest::blocking::Client,
}

impl LiveEmbedder {
    pub fn new(
        base_url: String,
        model: String,
        api_key_env: &str,
        dim: usize,
        cache: Option<EmbeddingCache>,
    ) -> Result<Self, DedupError> {
        let http = reqwest::blocking::Client::builder()
            .timeout(std::time::Duration::from_secs(120))
            .build()
            .map_err(|e| DedupError::Endpoint(e.to_string()))?;
        Ok(LiveEmbedder {
            base_url,
            model,
            api_key: std::env::var(api_key_env).ok(),
            dim,
            cache,
            http,
        })
    }

    fn fetch(&self, texts: &[&str]) -> Result<Vec<Vec<f32>>, DedupError> {
        let url = format!("{}/embeddings", self.base_url.trim_end_matches('/'));
        let body = serde_json::json!({"model": self.model, "input": texts});
        let mut req = self.http.post(&url).json(&body);
        if let Some(key) = &self.api_key {
            req = req.bearer_auth(key);
        }
        let resp = req.send().map_err(|e| DedupError::Endpoint(e.to_string()))?;
        if !resp.status().is_success() {
            return Err(DedupError::Endpoint(format!(
                "{url} returned {}",
                resp.status()
            )));
        }
        let value: serde_json::Value =
            resp.json().map_err(|e| DedupError::Endpoint(e.to_string()))?;
        let data = value["data"]
            .as_array()
            .ok_or_else(|| DedupError::Endpoint("response missing data array".into()))?;
        data.iter()
            .map(|row| {
                row["embedding"]
                    .as_array()
                    .ok_or_else(|| DedupError::Endpoint("row missing embedding".into()))
                    .map(|xs| xs.iter().filter_map(|x| x.as_f64()).map(|x| x as f32).collect())
            })
            .collect()
    }
}

impl Embedder for LiveEmbedder {
    fn name(&self) -> &str {
        "live-embedder"
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn embed_raw(&mut self, texts: &[&str]) -> Result<Vec<Vec<f32>>, DedupError> {
        let mut out: Vec<Option<Vec<f32>>> = vec![None; texts.len()];
        let mut missing: Vec<usize> = Vec::new();
        for (i, t) in texts.iter().enumerate() {
            match self.cache.as_ref().and_then(|c| c.get(t)) {
                Some(v) => out[i] = Some(v.clone()),
                None => missing.push(i),
            }
        }
        if !missing.is_empty() {
            let batch: Vec<&str> = missing.iter().map(|&i| texts[i]).collect();
            let fetched = self.fetch(&batch)?;
            if fetched.len() != batch.len() {
                return Err(DedupError::Endpoint(format!(
                    "asked for {} embeddings, got {}",
                    batch.len(),
                    fetched.len()
                )));
            }
            for (&i, v) in missing.iter().zip(fetched) {
                if let Some(cache) = self.cache.as_mut() {
                    cache.put(texts[i], v.clone());
                }
                out[i] = Some(v);
            }
            if let Some(cache) = self.cache.as_ref() {
                cache.save()?;
            }
        }
        Ok(out.into_iter().map(|v| v.expect("filled")).collect())
    }
}
