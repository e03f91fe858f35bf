//! Highlight labeling and construction of controlled sentence pairs.
//!
//! A highlight is a sentence among the most-quoted `t` percent of its debate.
//! Every highlight is paired with a non-highlighted sentence by the same
//! speaker, from a nearby turn and of similar length, so the pair differs in
//! how much the media quoted it rather than in who said it or when.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::io::{BufRead, Write};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Debate, DebateType, Sentence};
use crate::error::{Error, Result};
use crate::quotematch::QuoteIndex;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PairConfig {
    /// Highlight percentile threshold, in (0, 10].
    pub t: f64,
    pub turn_radius: usize,
    /// Allowed relative token-length difference of the negative.
    pub length_tolerance: f64,
    pub train_fraction: f64,
    pub seed: u64,
}

impl Default for PairConfig {
    fn default() -> Self {
        PairConfig {
            t: 10.0,
            turn_radius: 3,
            length_tolerance: 0.3,
            train_fraction: 0.8,
            seed: 0,
        }
    }
}

impl PairConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.t > 0.0 && self.t <= 10.0) {
            return Err(Error::InvalidInput(format!("t = {} not in (0, 10]", self.t)));
        }
        if self.turn_radius < 1 {
            return Err(Error::InvalidInput("turn_radius must be at least 1".into()));
        }
        if !(self.length_tolerance >= 0.0 && self.length_tolerance < 1.0) {
            return Err(Error::InvalidInput("length_tolerance must be in [0, 1)".into()));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::InvalidInput("train_fraction must be in (0, 1)".into()));
        }
        Ok(())
    }
}

/// Sentences ordered by quote count (descending), then transcript position.
fn ranked<'a>(debate: &'a Debate, index: &QuoteIndex) -> Vec<(&'a Sentence, u64)> {
    let totals = index.totals();
    let mut v: Vec<(usize, &Sentence, u64)> = debate
        .sentences()
        .enumerate()
        .map(|(pos, s)| (pos, s, totals.get(s.id.as_str()).copied().unwrap_or(0)))
        .collect();
    v.sort_by(|a, b| b.2.cmp(&a.2).then(a.0.cmp(&b.0)));
    v.into_iter().map(|(_, s, c)| (s, c)).collect()
}

/// Number of sentences in the top `t` percent.
fn top_k(n: usize, t: f64) -> usize {
    // guard against 0.1 * 100 style rounding before the ceiling
    ((t / 100.0 * n as f64) - 1e-9).ceil().max(0.0) as usize
}

/// Highlighted sentences with their 1-based quote rank.
pub fn highlight_ranks(debate: &Debate, index: &QuoteIndex, t: f64) -> Vec<(String, usize, u64)> {
    let k = top_k(debate.sentence_count(), t);
    let out: Vec<(String, usize, u64)> = ranked(debate, index)
        .into_iter()
        .take(k)
        .take_while(|&(_, c)| c >= 1)
        .enumerate()
        .map(|(i, (s, c))| (s.id.clone(), i + 1, c))
        .collect();
    if out.is_empty() {
        log::warn!("debate {} has no quoted sentences; no highlights", debate.id);
    }
    out
}

/// Sentences among the most quoted `t` percent of the debate (with at least
/// one quote). Ties at the boundary go to the earlier sentence.
pub fn label_highlights(debate: &Debate, index: &QuoteIndex, t: f64) -> BTreeSet<String> {
    highlight_ranks(debate, index, t).into_iter().map(|(id, _, _)| id).collect()
}

/// Smallest integer percentile x in 1..=10 whose top-x% set contains `rank`.
pub fn percentile_of_rank(rank: usize, n: usize) -> u32 {
    (1..=10u32)
        .find(|&x| rank <= top_k(n, x as f64))
        .unwrap_or(11)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairMember {
    pub sentence_id: String,
    pub text: String,
    pub tokens: Vec<String>,
    pub turn_index: usize,
    pub sentence_index: usize,
    pub quote_count: u64,
}

impl PairMember {
    fn new(s: &Sentence, quote_count: u64) -> Self {
        PairMember {
            sentence_id: s.id.clone(),
            text: s.text.clone(),
            tokens: s.tokens.clone(),
            turn_index: s.turn_index,
            sentence_index: s.sentence_index,
            quote_count,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairLabel {
    FirstIsHighlight,
    SecondIsHighlight,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pair {
    pub id: String,
    pub debate_id: String,
    pub debate_type: DebateType,
    pub election_year: i32,
    pub speaker: String,
    pub first: PairMember,
    pub second: PairMember,
    pub label: PairLabel,
    pub highlight_quote_count: u64,
    /// Smallest x in 1..=10 such that the highlight is in the top x percent.
    pub highlight_percentile: u32,
}

impl Pair {
    pub fn first_is_highlight(&self) -> bool {
        self.label == PairLabel::FirstIsHighlight
    }

    pub fn highlight(&self) -> &PairMember {
        if self.first_is_highlight() {
            &self.first
        } else {
            &self.second
        }
    }

    pub fn non_highlight(&self) -> &PairMember {
        if self.first_is_highlight() {
            &self.second
        } else {
            &self.first
        }
    }

    /// The same pair with its members in the other order.
    pub fn swapped(&self) -> Pair {
        let mut p = self.clone();
        std::mem::swap(&mut p.first, &mut p.second);
        p.label = match self.label {
            PairLabel::FirstIsHighlight => PairLabel::SecondIsHighlight,
            PairLabel::SecondIsHighlight => PairLabel::FirstIsHighlight,
        };
        p
    }
}

fn length_ok(highlight_len: usize, candidate_len: usize, tol: f64) -> bool {
    let h = highlight_len as f64;
    let c = candidate_len as f64;
    candidate_len > 0 && c >= (1.0 - tol) * h - 1e-9 && c <= (1.0 + tol) * h + 1e-9
}

/// Random stream for one debate, independent of how debates are scheduled.
pub fn debate_rng(seed: u64, debate_id: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ crate::stable_hash(debate_id))
}

/// Pair each highlight with a same-speaker, similar-length, non-highlighted
/// sentence within `turn_radius` turns. Highlights are served in rank order;
/// each negative is used at most once.
pub fn build_pairs(debate: &Debate, index: &QuoteIndex, cfg: &PairConfig) -> Vec<Pair> {
    let n = debate.sentence_count();
    let ranks = highlight_ranks(debate, index, cfg.t);
    let highlight_ids: HashSet<&str> = ranks.iter().map(|(id, _, _)| id.as_str()).collect();
    let totals = index.totals();
    let count = |s: &Sentence| totals.get(s.id.as_str()).copied().unwrap_or(0);
    let lookup = debate.sentence_lookup();
    let position: HashMap<&str, usize> = debate.sentences().enumerate().map(|(i, s)| (s.id.as_str(), i)).collect();

    let mut rng = debate_rng(cfg.seed, &debate.id);
    let mut used: HashSet<&str> = HashSet::new();
    let mut pairs = Vec::new();
    for (id, rank, hcount) in &ranks {
        let (ti, si) = lookup[id.as_str()];
        let h = &debate.turns[ti].sentences[si];
        let speaker = &debate.turns[ti].speaker;
        let lo = ti.saturating_sub(cfg.turn_radius);
        let hi = (ti + cfg.turn_radius).min(debate.turns.len() - 1);
        let best = (lo..=hi)
            .filter(|&t| &debate.turns[t].speaker == speaker)
            .flat_map(|t| debate.turns[t].sentences.iter())
            .filter(|s| {
                s.id != h.id
                    && !highlight_ids.contains(s.id.as_str())
                    && !used.contains(s.id.as_str())
                    && length_ok(h.tokens.len(), s.tokens.len(), cfg.length_tolerance)
            })
            .min_by_key(|s| {
                (
                    count(s),
                    s.tokens.len().abs_diff(h.tokens.len()),
                    s.turn_index.abs_diff(ti),
                    position[s.id.as_str()],
                )
            });
        let Some(neg) = best else {
            log::debug!("highlight {id} has no eligible negative; skipped");
            continue;
        };
        used.insert(neg.id.as_str());
        let hm = PairMember::new(h, *hcount);
        let nm = PairMember::new(neg, count(neg));
        let first_is_highlight: bool = rng.gen_bool(0.5);
        let (first, second, label) = if first_is_highlight {
            (hm, nm, PairLabel::FirstIsHighlight)
        } else {
            (nm, hm, PairLabel::SecondIsHighlight)
        };
        pairs.push(Pair {
            id: format!("{}#{}", debate.id, pairs.len()),
            debate_id: debate.id.clone(),
            debate_type: debate.debate_type,
            election_year: debate.election_year,
            speaker: speaker.clone(),
            first,
            second,
            label,
            highlight_quote_count: *hcount,
            highlight_percentile: percentile_of_rank(*rank, n),
        });
    }
    pairs
}

/// Check every pair invariant against the debate it came from.
pub fn check_pair(pair: &Pair, debate: &Debate, highlights: &BTreeSet<String>, cfg: &PairConfig) -> std::result::Result<(), String> {
    if pair.debate_id != debate.id {
        return Err("debate mismatch".into());
    }
    let lookup = debate.sentence_lookup();
    let find = |m: &PairMember| -> std::result::Result<&Sentence, String> {
        let &(t, s) = lookup
            .get(m.sentence_id.as_str())
            .ok_or_else(|| format!("unknown sentence {}", m.sentence_id))?;
        Ok(&debate.turns[t].sentences[s])
    };
    let a = find(&pair.first)?;
    let b = find(&pair.second)?;
    if a.id == b.id {
        return Err("pair members are the same sentence".into());
    }
    let sa = debate.speaker_of(a);
    if sa != debate.speaker_of(b) || sa != pair.speaker {
        return Err("speakers differ".into());
    }
    if a.turn_index.abs_diff(b.turn_index) > cfg.turn_radius {
        return Err("turn distance exceeds radius".into());
    }
    let (h, n) = if pair.first_is_highlight() { (a, b) } else { (b, a) };
    if !length_ok(h.tokens.len(), n.tokens.len(), cfg.length_tolerance) {
        return Err("length ratio outside tolerance".into());
    }
    if !highlights.contains(&h.id) || highlights.contains(&n.id) {
        return Err("exactly one member must be a highlight".into());
    }
    Ok(())
}

/// Seeded shuffle, then the first `floor(train_fraction * n)` pairs train.
pub fn split_train_test(pairs: &[Pair], cfg: &PairConfig) -> (Vec<Pair>, Vec<Pair>) {
    let mut order: Vec<usize> = (0..pairs.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(cfg.seed));
    let n_train = (pairs.len() as f64 * cfg.train_fraction + 1e-9).floor() as usize;
    let train = order[..n_train].iter().map(|&i| pairs[i].clone()).collect();
    let test = order[n_train..].iter().map(|&i| pairs[i].clone()).collect();
    (train, test)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

/// One line of the pairs file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairRecord {
    #[serde(flatten)]
    pub pair: Pair,
    pub split: Split,
    pub config: PairConfig,
}

pub fn write_pairs<W: Write>(records: &[PairRecord], mut w: W) -> Result<()> {
    for r in records {
        let line = serde_json::to_string(r).map_err(|e| Error::InvalidInput(e.to_string()))?;
        writeln!(w, "{line}").map_err(|e| Error::io("pairs", e))?;
    }
    Ok(())
}

pub fn read_pairs<R: BufRead>(r: R) -> Result<Vec<PairRecord>> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line.map_err(|e| Error::io("pairs", e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| Error::parse("pairs", i + 1, e.to_string()))?);
    }
    Ok(out)
}
