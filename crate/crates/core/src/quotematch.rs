//! Quotation extraction and alignment of quotations to debate turns.
//!
//! A quotation is any span of an article enclosed in double quotes. It becomes
//! a quote when it aligns to a single debate turn: the containment score of a
//! token window is the size of the multiset intersection between the window
//! and the quotation, divided by the quotation length. The best window over
//! all turns wins if its score reaches the acceptance threshold.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{Article, Debate};
use crate::error::{Error, Result};
use crate::features::{count_lexicon, LexiconSet, Stopwords};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MatchConfig {
    /// Acceptance threshold on the containment score, in (0, 1].
    pub theta: f64,
    /// Minimum quotation length in tokens.
    pub min_len: usize,
    /// Context tokens taken on each side of a quotation.
    pub context_window: usize,
    /// Extra window length allowed beyond the quotation length, as a fraction
    /// of it. Absorbs ellipses and dropped words. 0 gives equal-length windows.
    pub window_slack: f64,
}

impl Default for MatchConfig {
    fn default() -> Self {
        MatchConfig {
            theta: 0.8,
            min_len: 5,
            context_window: 15,
            window_slack: 0.25,
        }
    }
}

impl MatchConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.theta > 0.0 && self.theta <= 1.0) {
            return Err(Error::InvalidInput(format!("theta {} not in (0, 1]", self.theta)));
        }
        if self.min_len == 0 {
            return Err(Error::InvalidInput("min_len must be positive".into()));
        }
        if !(self.window_slack >= 0.0 && self.window_slack.is_finite()) {
            return Err(Error::InvalidInput("window_slack must be nonnegative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Quotation {
    pub article_id: String,
    pub outlet: String,
    /// Token offsets `[start, end)` in the article.
    pub span: (usize, usize),
    pub tokens: Vec<String>,
    pub context_before: Vec<String>,
    pub context_after: Vec<String>,
}

fn is_open_quote(c: char) -> bool {
    matches!(c, '"' | '\u{201C}' | '\u{201E}')
}

fn is_close_quote(c: char) -> bool {
    matches!(c, '"' | '\u{201D}')
}

/// Byte ranges of the text between balanced double quotes.
fn quoted_byte_spans(body: &str) -> Vec<(usize, usize)> {
    let mut spans = Vec::new();
    let mut open: Option<usize> = None;
    for (i, c) in body.char_indices() {
        match open {
            None if is_open_quote(c) => open = Some(i + c.len_utf8()),
            None => {}
            Some(start) => {
                if c == '\u{201C}' || c == '\u{201E}' {
                    // a fresh opening mark: the earlier one was never closed
                    open = Some(i + c.len_utf8());
                } else if is_close_quote(c) {
                    spans.push((start, i));
                    open = None;
                }
            }
        }
    }
    spans
}

/// Token index range covered by a byte range.
fn token_range(offsets: &[(usize, usize)], bytes: (usize, usize)) -> (usize, usize) {
    let start = offsets.partition_point(|&(s, _)| s < bytes.0);
    let end = offsets.partition_point(|&(_, e)| e <= bytes.1);
    (start, end.max(start))
}

/// Extract quotations of at least `min_len` tokens with `context_window`
/// unquoted tokens of context on each side.
pub fn extract_quotations(article: &Article, min_len: usize, context_window: usize) -> Vec<Quotation> {
    let ranges: Vec<(usize, usize)> = quoted_byte_spans(&article.body)
        .into_iter()
        .map(|b| token_range(&article.offsets, b))
        .collect();
    let mut inside = vec![false; article.tokens.len()];
    for &(s, e) in &ranges {
        inside[s..e].iter_mut().for_each(|x| *x = true);
    }
    ranges
        .into_iter()
        .filter(|&(s, e)| e - s >= min_len)
        .map(|(s, e)| {
            let mut before: Vec<String> = (0..s)
                .rev()
                .filter(|&i| !inside[i])
                .take(context_window)
                .map(|i| article.tokens[i].clone())
                .collect();
            before.reverse();
            let after = (e..article.tokens.len())
                .filter(|&i| !inside[i])
                .take(context_window)
                .map(|i| article.tokens[i].clone())
                .collect();
            Quotation {
                article_id: article.id.clone(),
                outlet: article.outlet.clone(),
                span: (s, e),
                tokens: article.tokens[s..e].to_vec(),
                context_before: before,
                context_after: after,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuoteMatch {
    pub article_id: String,
    pub outlet: String,
    pub span: (usize, usize),
    pub debate_id: String,
    pub turn_index: usize,
    pub matched_sentence_ids: Vec<String>,
    pub overlap_score: f64,
}

/// Best window for a quotation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Alignment {
    pub turn_index: usize,
    pub start: usize,
    pub len: usize,
    /// Multiset intersection size.
    pub overlap: usize,
    pub score: f64,
}

/// Flattened token view of a debate, reusable across quotations.
pub struct Matcher<'a> {
    debate: &'a Debate,
    turns: Vec<Vec<&'a str>>,
    /// Sentence index of every token position, per turn.
    sentence_of: Vec<Vec<usize>>,
    stopwords: Stopwords,
}

impl<'a> Matcher<'a> {
    pub fn new(debate: &'a Debate) -> Self {
        let mut turns = Vec::with_capacity(debate.turns.len());
        let mut sentence_of = Vec::with_capacity(debate.turns.len());
        for t in &debate.turns {
            turns.push(t.tokens().collect());
            sentence_of.push(
                t.sentences
                    .iter()
                    .enumerate()
                    .flat_map(|(k, s)| std::iter::repeat(k).take(s.tokens.len()))
                    .collect(),
            );
        }
        Matcher {
            debate,
            turns,
            sentence_of,
            stopwords: Stopwords::embedded(),
        }
    }

    /// Best-scoring window over all turns. Ties go to the earliest turn, then
    /// the earliest start, then the shortest window.
    pub fn align<S: AsRef<str>>(&self, quotation: &[S], slack: f64) -> Option<Alignment> {
        let mut best: Option<Alignment> = None;
        for t in 0..self.turns.len() {
            if let Some(a) = self.align_turn(quotation, t, slack) {
                if best.map_or(true, |b| a.overlap > b.overlap) {
                    best = Some(a);
                }
            }
        }
        best
    }

    /// Best window within one turn.
    pub fn align_turn<S: AsRef<str>>(&self, quotation: &[S], turn: usize, slack: f64) -> Option<Alignment> {
        align_tokens(quotation, &self.turns[turn], slack).map(|(start, len, overlap)| Alignment {
            turn_index: turn,
            start,
            len,
            overlap,
            score: overlap as f64 / quotation.len() as f64,
        })
    }

    pub fn match_quotation(&self, q: &Quotation, theta: f64, slack: f64) -> Option<QuoteMatch> {
        if q.tokens.is_empty() {
            return None;
        }
        let best = self.align(&q.tokens, slack)?;
        if best.score < theta {
            if best.score >= theta - 0.15 {
                self.log_multi_turn(q, best, theta, slack);
            }
            return None;
        }
        Some(QuoteMatch {
            article_id: q.article_id.clone(),
            outlet: q.outlet.clone(),
            span: q.span,
            debate_id: self.debate.id.clone(),
            turn_index: best.turn_index,
            matched_sentence_ids: self.credited_sentences(&q.tokens, best),
            overlap_score: best.score,
        })
    }

    /// Sentences contributing at least one matched content token to the window;
    /// falls back to any matched token when only function words matched.
    fn credited_sentences<S: AsRef<str>>(&self, quotation: &[S], a: Alignment) -> Vec<String> {
        let mut remaining: HashMap<&str, usize> = HashMap::new();
        for t in quotation {
            *remaining.entry(t.as_ref()).or_default() += 1;
        }
        let tokens = &self.turns[a.turn_index][a.start..a.start + a.len];
        let owners = &self.sentence_of[a.turn_index][a.start..a.start + a.len];
        let mut content = BTreeSet::new();
        let mut any = BTreeSet::new();
        for (tok, &sent) in tokens.iter().zip(owners) {
            if let Some(r) = remaining.get_mut(tok) {
                if *r > 0 {
                    *r -= 1;
                    any.insert(sent);
                    if self.stopwords.is_content(tok) {
                        content.insert(sent);
                    }
                }
            }
        }
        let chosen = if content.is_empty() { any } else { content };
        let turn = &self.debate.turns[a.turn_index];
        chosen.into_iter().map(|k| turn.sentences[k].id.clone()).collect()
    }

    fn log_multi_turn(&self, q: &Quotation, best: Alignment, theta: f64, slack: f64) {
        let t = best.turn_index;
        for (a, b) in [(t.wrapping_sub(1), t), (t, t + 1)] {
            if a >= self.turns.len() || b >= self.turns.len() {
                continue;
            }
            let joined: Vec<&str> = self.turns[a].iter().chain(&self.turns[b]).copied().collect();
            if let Some((_, _, overlap)) = align_tokens(&q.tokens, &joined, slack) {
                let score = overlap as f64 / q.tokens.len() as f64;
                if score >= theta {
                    log::debug!(
                        "quotation {}@{:?} would match across turns {a}-{b} of {} (score {score:.3}); single-turn rule rejects it",
                        q.article_id,
                        q.span,
                        self.debate.id
                    );
                }
            }
        }
    }
}

/// Best window of `hay` for `needle`: (start, len, overlap). Windows have the
/// needle's length plus up to `ceil(slack * len)` extra tokens, clipped to the
/// haystack; a haystack shorter than the needle is one window.
fn align_tokens<S: AsRef<str>>(needle: &[S], hay: &[&str], slack: f64) -> Option<(usize, usize, usize)> {
    let l = needle.len();
    if l == 0 || hay.is_empty() {
        return None;
    }
    let mut ids: HashMap<&str, usize> = HashMap::new();
    let mut need: Vec<usize> = Vec::new();
    for t in needle {
        let next = ids.len();
        let id = *ids.entry(t.as_ref()).or_insert(next);
        if id == need.len() {
            need.push(0);
        }
        need[id] += 1;
    }
    let coded: Vec<Option<usize>> = hay.iter().map(|t| ids.get(t).copied()).collect();
    let base = l.min(hay.len());
    let extra = (slack * l as f64).ceil() as usize;
    let mut have = vec![0usize; need.len()];
    let mut overlap = 0usize;

    let add = |have: &mut Vec<usize>, overlap: &mut usize, c: Option<usize>| {
        if let Some(id) = c {
            if have[id] < need[id] {
                *overlap += 1;
            }
            have[id] += 1;
        }
    };
    let remove = |have: &mut Vec<usize>, overlap: &mut usize, c: Option<usize>| {
        if let Some(id) = c {
            have[id] -= 1;
            if have[id] < need[id] {
                *overlap -= 1;
            }
        }
    };

    for &c in &coded[..base] {
        add(&mut have, &mut overlap, c);
    }
    let mut best: Option<(usize, usize, usize)> = None;
    for start in 0..=hay.len() - base {
        if start > 0 {
            remove(&mut have, &mut overlap, coded[start - 1]);
            add(&mut have, &mut overlap, coded[start + base - 1]);
        }
        if best.map_or(true, |b| overlap > b.2) {
            best = Some((start, base, overlap));
        }
        // longer windows from the same start
        let stop = (start + base + extra).min(hay.len());
        let mut ext = overlap;
        for (k, &c) in coded[start + base..stop].iter().enumerate() {
            add(&mut have, &mut ext, c);
            if best.map_or(true, |b| ext > b.2) {
                best = Some((start, base + k + 1, ext));
            }
        }
        for &c in &coded[start + base..stop] {
            remove(&mut have, &mut ext, c);
        }
    }
    best
}

pub fn match_quotation(q: &Quotation, debate: &Debate, cfg: &MatchConfig) -> Option<QuoteMatch> {
    Matcher::new(debate).match_quotation(q, cfg.theta, cfg.window_slack)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuoteCounts {
    pub quote_count: u64,
    pub pos_context: u64,
    pub neg_context: u64,
}

impl std::ops::AddAssign for QuoteCounts {
    fn add_assign(&mut self, o: Self) {
        self.quote_count += o.quote_count;
        self.pos_context += o.pos_context;
        self.neg_context += o.neg_context;
    }
}

/// Quote counts and context sentiment per (sentence, outlet).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct QuoteIndex {
    cells: BTreeMap<(String, String), QuoteCounts>,
}

#[derive(Debug, Serialize, Deserialize)]
struct IndexRow {
    sentence_id: String,
    outlet: String,
    quote_count: u64,
    pos_context: u64,
    neg_context: u64,
}

impl QuoteIndex {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, sentence_id: &str, outlet: &str, counts: QuoteCounts) {
        *self
            .cells
            .entry((sentence_id.to_string(), outlet.to_string()))
            .or_default() += counts;
    }

    /// Cell-wise sum.
    pub fn merge(&mut self, other: &QuoteIndex) {
        for ((s, o), c) in &other.cells {
            self.add(s, o, *c);
        }
    }

    pub fn merged<'a>(parts: impl IntoIterator<Item = &'a QuoteIndex>) -> QuoteIndex {
        let mut out = QuoteIndex::new();
        for p in parts {
            out.merge(p);
        }
        out
    }

    pub fn get(&self, sentence_id: &str, outlet: &str) -> QuoteCounts {
        self.cells
            .get(&(sentence_id.to_string(), outlet.to_string()))
            .copied()
            .unwrap_or_default()
    }

    /// Sum of quote counts over outlets.
    pub fn total_count(&self, sentence_id: &str) -> u64 {
        self.cells
            .range((sentence_id.to_string(), String::new())..)
            .take_while(|((s, _), _)| s == sentence_id)
            .map(|(_, c)| c.quote_count)
            .sum()
    }

    pub fn totals(&self) -> BTreeMap<&str, u64> {
        let mut out: BTreeMap<&str, u64> = BTreeMap::new();
        for ((s, _), c) in &self.cells {
            *out.entry(s.as_str()).or_default() += c.quote_count;
        }
        out
    }

    pub fn cells(&self) -> impl Iterator<Item = (&str, &str, QuoteCounts)> {
        self.cells.iter().map(|((s, o), c)| (s.as_str(), o.as_str(), *c))
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Restrict to sentences whose id starts with `debate_id:`.
    pub fn for_debate(&self, debate_id: &str) -> QuoteIndex {
        let prefix = format!("{debate_id}:");
        QuoteIndex {
            cells: self
                .cells
                .iter()
                .filter(|((s, _), _)| s.starts_with(&prefix))
                .map(|(k, v)| (k.clone(), *v))
                .collect(),
        }
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        for ((s, o), c) in &self.cells {
            wr.serialize(IndexRow {
                sentence_id: s.clone(),
                outlet: o.clone(),
                quote_count: c.quote_count,
                pos_context: c.pos_context,
                neg_context: c.neg_context,
            })
            .map_err(|e| Error::InvalidInput(e.to_string()))?;
        }
        wr.flush().map_err(|e| Error::InvalidInput(e.to_string()))?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rd = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(r);
        let mut idx = QuoteIndex::new();
        for (i, row) in rd.deserialize::<IndexRow>().enumerate() {
            let row = row.map_err(|e| Error::parse("quote index", i + 2, e.to_string()))?;
            idx.add(
                &row.sentence_id,
                &row.outlet,
                QuoteCounts {
                    quote_count: row.quote_count,
                    pos_context: row.pos_context,
                    neg_context: row.neg_context,
                },
            );
        }
        Ok(idx)
    }
}

#[derive(Debug, Clone, Default)]
pub struct MatchOutcome {
    pub index: QuoteIndex,
    pub matches: Vec<QuoteMatch>,
    pub quotations: usize,
}

fn index_article(matcher: &Matcher<'_>, article: &Article, lexicons: &LexiconSet, cfg: &MatchConfig) -> MatchOutcome {
    let quotations = extract_quotations(article, cfg.min_len, cfg.context_window);
    let mut out = MatchOutcome {
        quotations: quotations.len(),
        ..Default::default()
    };
    for q in &quotations {
        let Some(m) = matcher.match_quotation(q, cfg.theta, cfg.window_slack) else {
            continue;
        };
        let context: Vec<&str> = q
            .context_before
            .iter()
            .chain(&q.context_after)
            .map(String::as_str)
            .collect();
        let counts = QuoteCounts {
            quote_count: 1,
            pos_context: count_lexicon(&context, &lexicons.positive) as u64,
            neg_context: count_lexicon(&context, &lexicons.negative) as u64,
        };
        for s in &m.matched_sentence_ids {
            out.index.add(s, &q.outlet, counts);
        }
        out.matches.push(m);
    }
    out
}

/// Match every article about `debate` and accumulate the quote index. Articles
/// about other debates are ignored.
pub fn build_quote_index(debate: &Debate, articles: &[Article], lexicons: &LexiconSet, cfg: &MatchConfig) -> MatchOutcome {
    let matcher = Matcher::new(debate);
    let parts: Vec<MatchOutcome> = articles
        .par_iter()
        .filter(|a| a.debate_id == debate.id)
        .map(|a| index_article(&matcher, a, lexicons, cfg))
        .collect();
    let mut out = MatchOutcome::default();
    for p in parts {
        out.index.merge(&p.index);
        out.matches.extend(p.matches);
        out.quotations += p.quotations;
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatcherReport<K> {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub true_positives: usize,
    pub false_positives: Vec<K>,
    pub false_negatives: Vec<K>,
}

/// Set-based precision, recall and F1. Undefined ratios are reported as 0.
pub fn matcher_eval<K: Ord + Clone>(gold: &BTreeSet<K>, predicted: &BTreeSet<K>) -> MatcherReport<K> {
    let tp = gold.intersection(predicted).count();
    let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
    let precision = ratio(tp, predicted.len());
    let recall = ratio(tp, gold.len());
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    MatcherReport {
        precision,
        recall,
        f1,
        true_positives: tp,
        false_positives: predicted.difference(gold).cloned().collect(),
        false_negatives: gold.difference(predicted).cloned().collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::debate;
    use chrono::NaiveDate;
    use proptest::prelude::*;

    fn article(id: &str, outlet: &str, body: &str) -> Article {
        Article::new(id, outlet, NaiveDate::from_ymd_opt(2016, 3, 7).unwrap(), "d", body)
    }

    /// Multiset intersection size by sorting and merging.
    fn intersect(needle: &[&str], window: &[&str]) -> usize {
        let mut q: Vec<&str> = needle.to_vec();
        let mut w: Vec<&str> = window.to_vec();
        q.sort();
        w.sort();
        let (mut i, mut j, mut n) = (0, 0, 0);
        while i < q.len() && j < w.len() {
            match q[i].cmp(w[j]) {
                std::cmp::Ordering::Equal => {
                    n += 1;
                    i += 1;
                    j += 1;
                }
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
            }
        }
        n
    }

    /// Brute force over every window length allowed by `slack`.
    fn brute(needle: &[&str], hay: &[&str], slack: f64) -> usize {
        let base = needle.len().min(hay.len());
        let extra = (slack * needle.len() as f64).ceil() as usize;
        let mut best = 0;
        for len in base..=(base + extra).min(hay.len()) {
            for start in 0..=hay.len() - len {
                best = best.max(intersect(needle, &hay[start..start + len]));
            }
        }
        best
    }

    #[test]
    fn extraction_thresholds() {
        let a = article("a", "Times", "He said \"we will fight for every single worker\" last night.");
        let qs = extract_quotations(&a, 5, 15);
        assert_eq!(qs.len(), 1);
        assert_eq!(qs[0].tokens.len(), 7);
        assert_eq!(qs[0].context_before, vec!["he", "said"]);
        assert_eq!(qs[0].context_after, vec!["last", "night"]);

        let scare = article("b", "Times", "The so-called \"tax relief\" was debated.");
        assert!(extract_quotations(&scare, 5, 15).is_empty());

        let open = article("c", "Times", "He said \u{201C}we will fight for every single worker in America.");
        assert!(extract_quotations(&open, 5, 15).is_empty());
        let odd = article("c2", "Times", "He said \"we will fight for every single worker in America.");
        assert!(extract_quotations(&odd, 5, 15).is_empty());
    }

    #[test]
    fn curly_quotes_and_context_skip_quoted_tokens() {
        let a = article(
            "a",
            "Post",
            "Bad night. \u{201C}Terrible awful\u{201D} she wrote, \u{201C}we must rebuild the whole economy now\u{201D} and more.",
        );
        let qs = extract_quotations(&a, 5, 3);
        assert_eq!(qs.len(), 1);
        assert_eq!(qs[0].context_before, vec!["night", "she", "wrote"]);
        assert_eq!(qs[0].context_after, vec!["and", "more"]);
    }

    fn fixture() -> Debate {
        debate(
            "d",
            &[
                ("MOD", "Senator, your response to the question on trade policy tonight."),
                (
                    "SANDERS",
                    "Thank you. We need a trade policy that works for working families across this great nation. That is my view.",
                ),
                ("CLINTON", "I disagree with the senator on several important points about trade."),
            ],
        )
    }

    #[test]
    fn exact_sentence_scores_one() {
        let d = fixture();
        let q = extract_quotations(
            &article("a", "T", "\"We need a trade policy that works for working families across this great nation.\""),
            5,
            15,
        );
        let m = match_quotation(&q[0], &d, &MatchConfig::default()).unwrap();
        assert_eq!(m.overlap_score, 1.0);
        assert_eq!(m.turn_index, 1);
        assert_eq!(m.matched_sentence_ids, vec!["d:1:1"]);
    }

    #[test]
    fn one_altered_word_scores_point_nine() {
        let d = fixture();
        let body = "\"trade policy that works for hardworking families across this great\"";
        let q = &extract_quotations(&article("a", "T", body), 5, 15)[0];
        assert_eq!(q.tokens.len(), 10);
        let hay: Vec<&str> = d.turns[1].tokens().collect();
        let oracle = brute(&q.tokens.iter().map(String::as_str).collect::<Vec<_>>(), &hay, 0.0);
        assert_eq!(oracle, 9);
        let cfg = MatchConfig { window_slack: 0.0, ..MatchConfig::default() };
        let m = match_quotation(q, &d, &cfg).unwrap();
        assert_eq!(m.overlap_score, 0.9);
        let m = match_quotation(q, &d, &MatchConfig::default()).unwrap();
        assert_eq!(m.overlap_score, 0.9);
    }

    #[test]
    fn weak_overlap_does_not_match() {
        let d = fixture();
        let body = "\"trade policy works blue green red orange purple yellow pink\"";
        let q = &extract_quotations(&article("a", "T", body), 5, 15)[0];
        assert_eq!(q.tokens.len(), 10);
        let matcher = Matcher::new(&d);
        assert_eq!(matcher.align(&q.tokens, 0.0).unwrap().overlap, 3);
        assert!(match_quotation(q, &d, &MatchConfig::default()).is_none());
    }

    #[test]
    fn quote_index_context_and_additivity() {
        let d = fixture();
        let lex = LexiconSet::embedded();
        let cfg = MatchConfig::default();
        let quote = "\u{201C}We need a trade policy that works for working families\u{201D}";
        let a1 = article("a1", "Times", &format!("A terrible and awful night. {quote} he said."));
        let a2 = article("a2", "Post", &format!("{quote} said Sanders."));

        let one = build_quote_index(&d, std::slice::from_ref(&a1), &lex, &cfg);
        assert_eq!(one.index.get("d:1:1", "Times").neg_context, 2);
        assert_eq!(one.index.get("d:1:1", "Times").quote_count, 1);

        let none = build_quote_index(&d, &[], &lex, &cfg);
        assert!(none.index.is_empty());
        assert_eq!(none.index.total_count("d:1:1"), 0);

        let both = build_quote_index(&d, &[a1.clone(), a2.clone()], &lex, &cfg);
        assert_eq!(both.index.total_count("d:1:1"), 2);
        let two = build_quote_index(&d, std::slice::from_ref(&a2), &lex, &cfg);
        assert_eq!(QuoteIndex::merged([&one.index, &two.index]), both.index);
    }

    #[test]
    fn index_csv_round_trip() {
        let mut idx = QuoteIndex::new();
        idx.add("d:0:1", "Times", QuoteCounts { quote_count: 2, pos_context: 1, neg_context: 0 });
        idx.add("d:0:1", "Post", QuoteCounts { quote_count: 1, pos_context: 0, neg_context: 3 });
        let mut buf = Vec::new();
        idx.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("sentence_id,outlet,quote_count,pos_context,neg_context"));
        assert_eq!(QuoteIndex::read_csv(&buf[..]).unwrap(), idx);
        assert_eq!(idx.total_count("d:0:1"), 3);
    }

    #[test]
    fn eval_conventions() {
        let gold: BTreeSet<u32> = [1, 2, 3, 4].into();
        let r = matcher_eval(&gold, &gold);
        assert_eq!((r.precision, r.recall, r.f1), (1.0, 1.0, 1.0));
        let r = matcher_eval(&gold, &BTreeSet::new());
        assert_eq!((r.precision, r.recall, r.f1), (0.0, 0.0, 0.0));
        let r = matcher_eval(&gold, &[1, 2].into());
        assert_eq!((r.precision, r.recall), (1.0, 0.5));
        assert!((r.f1 - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(r.false_negatives, vec![3, 4]);
    }

    proptest! {
        #[test]
        fn alignment_matches_brute_force(
            needle in proptest::collection::vec("[a-d]", 1..7),
            hay in proptest::collection::vec("[a-e]", 1..14),
            slack in prop_oneof![Just(0.0), Just(0.25), Just(0.5)],
        ) {
            let n: Vec<&str> = needle.iter().map(String::as_str).collect();
            let h: Vec<&str> = hay.iter().map(String::as_str).collect();
            let (start, len, overlap) = align_tokens(&n, &h, slack).unwrap();
            prop_assert_eq!(overlap, brute(&n, &h, slack));
            prop_assert_eq!(intersect(&n, &h[start..start + len]), overlap);
        }

        #[test]
        fn score_ignores_quotation_order(
            needle in proptest::collection::vec("[a-d]", 1..7),
            hay in proptest::collection::vec("[a-e]", 1..14),
            seed in any::<u64>(),
        ) {
            use rand::{seq::SliceRandom, SeedableRng};
            let h: Vec<&str> = hay.iter().map(String::as_str).collect();
            let mut shuffled = needle.clone();
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            prop_assert_eq!(align_tokens(&needle, &h, 0.0).map(|a| a.2), align_tokens(&shuffled, &h, 0.0).map(|a| a.2));
        }

        #[test]
        fn raising_theta_never_adds_matches(words in proptest::collection::vec("[a-f]", 5..12), t1 in 0.05f64..1.0, t2 in 0.05f64..1.0) {
            let d = debate("d", &[("A", "a b c d e f a b."), ("B", "c c d d e e f f.")]);
            let q = Quotation {
                article_id: "x".into(), outlet: "o".into(), span: (0, words.len()),
                tokens: words, context_before: vec![], context_after: vec![],
            };
            let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
            let m = Matcher::new(&d);
            if m.match_quotation(&q, hi, 0.25).is_some() {
                prop_assert!(m.match_quotation(&q, lo, 0.25).is_some());
            }
        }
    }
}
