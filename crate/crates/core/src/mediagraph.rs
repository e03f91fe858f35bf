//! Media–sentence matrices and fragmentation statistics: the bipartisan
//! min-cut fraction, global and local outlet similarity, and K-means
//! clustering scored by silhouette.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::io::Write;
use std::ops::RangeInclusive;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quotematch::{QuoteCounts, QuoteIndex};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Count,
    PositiveContext,
    NegativeContext,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::Count, Mode::PositiveContext, Mode::NegativeContext];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Count => "count",
            Mode::PositiveContext => "positive_context",
            Mode::NegativeContext => "negative_context",
        }
    }

    fn value(self, c: &QuoteCounts) -> f64 {
        match self {
            Mode::Count => c.quote_count as f64,
            Mode::PositiveContext => c.pos_context as f64,
            Mode::NegativeContext => c.neg_context as f64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Party {
    Democratic,
    Republican,
}

/// Speaker → party. Speakers mapped to anything else (independents) get no tag.
pub fn load_party_map(path: &Path) -> Result<HashMap<String, Party>> {
    let s = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_party_map(&s).map_err(|m| Error::parse(path, 1, m))
}

pub fn parse_party_map(s: &str) -> std::result::Result<HashMap<String, Party>, String> {
    let raw: BTreeMap<String, String> = serde_json::from_str(s).map_err(|e| e.to_string())?;
    Ok(raw
        .into_iter()
        .filter_map(|(speaker, p)| match p.to_lowercase().as_str() {
            "democratic" | "democrat" | "d" => Some((speaker, Party::Democratic)),
            "republican" | "r" => Some((speaker, Party::Republican)),
            _ => None,
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GraphConfig {
    pub min_quotes: u64,
    pub neighbors: usize,
    pub k_min: usize,
    pub k_max: usize,
    pub seed: u64,
}

impl Default for GraphConfig {
    fn default() -> Self {
        GraphConfig { min_quotes: 10, neighbors: 3, k_min: 2, k_max: 10, seed: 0 }
    }
}

impl GraphConfig {
    pub fn validate(&self) -> Result<()> {
        if self.neighbors < 1 {
            return Err(Error::InvalidInput("neighbors must be at least 1".into()));
        }
        if self.k_min < 2 || self.k_max < self.k_min {
            return Err(Error::InvalidInput("K range must satisfy 2 <= k_min <= k_max".into()));
        }
        Ok(())
    }
}

/// Outlets × sentences, each row of unit ℓ2 norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MediaMatrix {
    pub mode: Mode,
    pub outlets: Vec<String>,
    pub sentences: Vec<String>,
    pub party: Vec<Option<Party>>,
    pub values: Vec<Vec<f64>>,
}

impl MediaMatrix {
    /// Build from explicit rows, normalizing and dropping zero rows.
    pub fn from_rows(
        mode: Mode,
        outlets: Vec<String>,
        sentences: Vec<String>,
        party: Vec<Option<Party>>,
        rows: Vec<Vec<f64>>,
    ) -> Result<MediaMatrix> {
        let mut m = MediaMatrix { mode, outlets: vec![], sentences, party, values: vec![] };
        for (o, row) in outlets.into_iter().zip(rows) {
            if row.len() != m.sentences.len() || row.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
                return Err(Error::InvalidInput(format!("bad row for outlet {o}")));
            }
            let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 0.0 {
                m.outlets.push(o);
                m.values.push(row.iter().map(|v| v / norm).collect());
            }
        }
        if m.outlets.is_empty() {
            return Err(Error::Degenerate("no outlets with nonzero weight".into()));
        }
        Ok(m)
    }

    pub fn len(&self) -> usize {
        self.outlets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outlets.is_empty()
    }
}

/// Outlets with fewer than `min_quotes` quotes over `sentences` are removed
/// before normalization. `sentences` fixes the columns and their party tags.
pub fn build_matrix(index: &QuoteIndex, mode: Mode, sentences: &[(String, Option<Party>)], min_quotes: u64) -> Result<MediaMatrix> {
    let col: HashMap<&str, usize> = sentences.iter().enumerate().map(|(i, (s, _))| (s.as_str(), i)).collect();
    let mut rows: BTreeMap<&str, (u64, Vec<f64>)> = BTreeMap::new();
    for (s, outlet, c) in index.cells() {
        let Some(&j) = col.get(s) else { continue };
        let e = rows.entry(outlet).or_insert_with(|| (0, vec![0.0; sentences.len()]));
        e.0 += c.quote_count;
        e.1[j] += mode.value(&c);
    }
    let (outlets, values): (Vec<String>, Vec<Vec<f64>>) = rows
        .into_iter()
        .filter(|(_, (q, _))| *q >= min_quotes)
        .map(|(o, (_, r))| (o.to_string(), r))
        .unzip();
    if outlets.is_empty() {
        return Err(Error::Degenerate(format!("no outlet has at least {min_quotes} quotes")));
    }
    MediaMatrix::from_rows(
        mode,
        outlets,
        sentences.iter().map(|(s, _)| s.clone()).collect(),
        sentences.iter().map(|(_, p)| *p).collect(),
        values,
    )
}

/// Edmonds–Karp on an undirected capacitated graph. Returns the max-flow
/// value and the nodes on the source side of a minimum cut.
pub fn max_flow(n: usize, edges: &[(usize, usize, f64)], s: usize, t: usize) -> (f64, Vec<bool>) {
    const EPS: f64 = 1e-15;
    let mut cap = vec![vec![0.0f64; n]; n];
    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for &(u, v, c) in edges {
        cap[u][v] += c;
        cap[v][u] += c;
        adj[u].insert(v);
        adj[v].insert(u);
    }
    let bfs = |cap: &Vec<Vec<f64>>| -> Vec<Option<usize>> {
        let mut prev = vec![None; n];
        prev[s] = Some(s);
        let mut q = VecDeque::from([s]);
        while let Some(u) = q.pop_front() {
            for &v in &adj[u] {
                if prev[v].is_none() && cap[u][v] > EPS {
                    prev[v] = Some(u);
                    q.push_back(v);
                }
            }
        }
        prev
    };
    let mut flow = 0.0;
    loop {
        let prev = bfs(&cap);
        if prev[t].is_none() {
            let side = prev.iter().map(Option::is_some).collect();
            return (flow, side);
        }
        let mut bottleneck = f64::INFINITY;
        let mut v = t;
        while v != s {
            let u = prev[v].unwrap();
            bottleneck = bottleneck.min(cap[u][v]);
            v = u;
        }
        let mut v = t;
        while v != s {
            let u = prev[v].unwrap();
            cap[u][v] -= bottleneck;
            cap[v][u] += bottleneck;
            v = u;
        }
        flow += bottleneck;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinCut {
    pub fraction: f64,
    pub cut_weight: f64,
    pub total_weight: f64,
    /// Outlets left with the Democratic terminal.
    pub democratic_side: Vec<String>,
    pub republican_side: Vec<String>,
}

/// Per-outlet (weight to Democratic sentences, weight to Republican ones).
pub fn party_weights(m: &MediaMatrix) -> Vec<(f64, f64)> {
    m.values
        .iter()
        .map(|row| {
            row.iter().zip(&m.party).fold((0.0, 0.0), |(d, r), (v, p)| match p {
                Some(Party::Democratic) => (d + v, r),
                Some(Party::Republican) => (d, r + v),
                None => (d, r),
            })
        })
        .collect()
}

/// Fraction of edge weight in the minimum cut separating Democratic from
/// Republican sentences, each party's sentences contracted to one terminal.
pub fn mincut_fraction(m: &MediaMatrix) -> Result<MinCut> {
    let w = party_weights(m);
    let (dem, rep) = w.iter().fold((0.0, 0.0), |(a, b), (d, r)| (a + d, b + r));
    if dem <= 0.0 || rep <= 0.0 {
        return Err(Error::Degenerate("min-cut needs weight on both parties".into()));
    }
    // node 0 = Democratic terminal, 1 = Republican terminal, 2.. = outlets
    let mut edges = Vec::new();
    for (i, &(d, r)) in w.iter().enumerate() {
        if d > 0.0 {
            edges.push((0, i + 2, d));
        }
        if r > 0.0 {
            edges.push((i + 2, 1, r));
        }
    }
    let (cut, side) = max_flow(w.len() + 2, &edges, 0, 1);
    let total = dem + rep;
    let (mut democratic_side, mut republican_side) = (vec![], vec![]);
    for (i, o) in m.outlets.iter().enumerate() {
        if side[i + 2] {
            democratic_side.push(o.clone());
        } else {
            republican_side.push(o.clone());
        }
    }
    Ok(MinCut { fraction: cut / total, cut_weight: cut, total_weight: total, democratic_side, republican_side })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Cosine similarity between two outlets; rows are unit length.
pub fn similarity(m: &MediaMatrix, i: usize, j: usize) -> f64 {
    dot(&m.values[i], &m.values[j])
}

/// Mean cosine similarity over all unordered outlet pairs.
pub fn global_mean_similarity(m: &MediaMatrix) -> Result<f64> {
    let n = m.len();
    if n < 2 {
        return Err(Error::Degenerate("need at least two outlets".into()));
    }
    let mut sum = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            sum += similarity(m, i, j);
        }
    }
    Ok(sum / (n * (n - 1) / 2) as f64)
}

/// Mean over outlets of the average similarity to their `k` most similar
/// peers; ties broken by outlet label.
pub fn local_similarity(m: &MediaMatrix, k: usize) -> Result<f64> {
    let n = m.len();
    if k == 0 || n <= k {
        return Err(Error::Degenerate(format!("need more than K = {k} outlets, have {n}")));
    }
    let mut total = 0.0;
    for i in 0..n {
        let mut sims: Vec<(f64, &str)> = (0..n)
            .filter(|&j| j != i)
            .map(|j| (similarity(m, i, j), m.outlets[j].as_str()))
            .collect();
        sims.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(b.1)));
        total += sims[..k].iter().map(|s| s.0).sum::<f64>() / k as f64;
    }
    Ok(total / n as f64)
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Lloyd's algorithm from a seeded farthest-point start.
pub fn kmeans(points: &[Vec<f64>], k: usize, seed: u64) -> Vec<usize> {
    let n = points.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centers: Vec<Vec<f64>> = vec![points[rng.gen_range(0..n)].clone()];
    while centers.len() < k {
        let far = (0..n)
            .map(|i| (i, centers.iter().map(|c| dist(&points[i], c)).fold(f64::INFINITY, f64::min)))
            .fold((0, f64::NEG_INFINITY), |b, x| if x.1 > b.1 { x } else { b })
            .0;
        centers.push(points[far].clone());
    }
    let nearest = |p: &[f64], centers: &[Vec<f64>]| {
        (0..centers.len())
            .map(|c| (c, dist(p, &centers[c])))
            .fold((0, f64::INFINITY), |b, x| if x.1 < b.1 { x } else { b })
            .0
    };
    let mut assign: Vec<usize> = points.iter().map(|p| nearest(p, &centers)).collect();
    for _ in 0..300 {
        for (c, center) in centers.iter_mut().enumerate() {
            let members: Vec<&Vec<f64>> = points.iter().zip(&assign).filter(|(_, &a)| a == c).map(|(p, _)| p).collect();
            if members.is_empty() {
                continue;
            }
            for (d, v) in center.iter_mut().enumerate() {
                *v = members.iter().map(|p| p[d]).sum::<f64>() / members.len() as f64;
            }
        }
        let next: Vec<usize> = points.iter().map(|p| nearest(p, &centers)).collect();
        if next == assign {
            break;
        }
        assign = next;
    }
    assign
}

/// Mean silhouette; singleton clusters and zero-spread points score 0.
pub fn silhouette(points: &[Vec<f64>], assign: &[usize]) -> f64 {
    let n = points.len();
    let k = assign.iter().max().map_or(0, |m| m + 1);
    let mut sizes = vec![0usize; k];
    for &a in assign {
        sizes[a] += 1;
    }
    let mut total = 0.0;
    for i in 0..n {
        if sizes[assign[i]] <= 1 {
            continue;
        }
        let mut sums = vec![0.0; k];
        for j in 0..n {
            if j != i {
                sums[assign[j]] += dist(&points[i], &points[j]);
            }
        }
        let a = sums[assign[i]] / (sizes[assign[i]] - 1) as f64;
        let b = (0..k)
            .filter(|&c| c != assign[i] && sizes[c] > 0)
            .map(|c| sums[c] / sizes[c] as f64)
            .fold(f64::INFINITY, f64::min);
        if !b.is_finite() {
            continue;
        }
        let denom = a.max(b);
        if denom > 0.0 {
            total += (b - a) / denom;
        }
    }
    total / n as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clustering {
    pub per_k: Vec<(usize, f64)>,
    pub best_k: usize,
    pub best_silhouette: f64,
    pub assignment: Vec<usize>,
}

/// Silhouette for each K in range with 2 ≤ K < M; best K maximizes it,
/// ties going to the smaller K.
pub fn kmeans_silhouette(m: &MediaMatrix, ks: RangeInclusive<usize>, seed: u64) -> Result<Clustering> {
    let n = m.len();
    let valid: Vec<usize> = ks.filter(|&k| k >= 2 && k < n).collect();
    if valid.is_empty() {
        return Err(Error::Degenerate(format!("no valid K for {n} outlets")));
    }
    let mut best: Option<Clustering> = None;
    let mut per_k = Vec::new();
    for k in valid {
        let assign = kmeans(&m.values, k, seed);
        let s = silhouette(&m.values, &assign);
        per_k.push((k, s));
        if best.as_ref().map_or(true, |b| s > b.best_silhouette) {
            best = Some(Clustering { per_k: vec![], best_k: k, best_silhouette: s, assignment: assign });
        }
    }
    let mut best = best.unwrap();
    best.per_k = per_k;
    Ok(best)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FragmentationRow {
    pub election_year: i32,
    pub mode: Mode,
    pub n_outlets: usize,
    pub n_sentences: usize,
    pub mincut_fraction: Option<f64>,
    pub global_mean: Option<f64>,
    pub local_similarity: Option<f64>,
    pub best_k: Option<usize>,
    pub silhouette: Option<f64>,
}

/// All statistics for one election and mode. The min-cut uses only the
/// party-tagged columns of `general`; clustering uses `pooled`.
pub fn fragmentation(
    index: &QuoteIndex,
    year: i32,
    mode: Mode,
    general: &[(String, Option<Party>)],
    pooled: &[(String, Option<Party>)],
    cfg: &GraphConfig,
) -> (FragmentationRow, Option<MinCut>) {
    let cut = build_matrix(index, mode, general, cfg.min_quotes)
        .and_then(|m| mincut_fraction(&m))
        .map_err(|e| log::info!("{year} {}: no min-cut: {e}", mode.as_str()))
        .ok();
    let mut row = FragmentationRow {
        election_year: year,
        mode,
        n_outlets: 0,
        n_sentences: 0,
        mincut_fraction: cut.as_ref().map(|c| c.fraction),
        global_mean: None,
        local_similarity: None,
        best_k: None,
        silhouette: None,
    };
    if let Ok(m) = build_matrix(index, mode, pooled, cfg.min_quotes) {
        row.n_outlets = m.len();
        row.n_sentences = m.sentences.len();
        row.global_mean = global_mean_similarity(&m).ok();
        row.local_similarity = local_similarity(&m, cfg.neighbors).ok();
        if let Ok(c) = kmeans_silhouette(&m, cfg.k_min..=cfg.k_max, cfg.seed) {
            row.best_k = Some(c.best_k);
            row.silhouette = Some(c.best_silhouette);
        }
    }
    (row, cut)
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_fragmentation_csv<W: Write>(rows: &[FragmentationRow], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let err = |e: csv::Error| Error::InvalidInput(e.to_string());
    out.write_record([
        "election_year",
        "mode",
        "n_outlets",
        "n_sentences",
        "mincut_fraction",
        "global_mean",
        "local_similarity",
        "best_k",
        "silhouette",
    ])
    .map_err(err)?;
    let f = |v: Option<f64>| opt(v.map(|x| format!("{x:.6}")));
    for r in rows {
        out.write_record([
            r.election_year.to_string(),
            r.mode.as_str().to_string(),
            r.n_outlets.to_string(),
            r.n_sentences.to_string(),
            f(r.mincut_fraction),
            f(r.global_mean),
            f(r.local_similarity),
            opt(r.best_k),
            f(r.silhouette),
        ])
        .map_err(err)?;
    }
    out.flush().map_err(|e| Error::io("fragmentation report", e))?;
    Ok(())
}
