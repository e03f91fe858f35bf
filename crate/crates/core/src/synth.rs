//! Synthetic debates and news coverage with known ground truth.
//!
//! Candidate sentences are built from a fixed budget of content words plus
//! function-word filler. "Hot" sentences are longer (more filler), carry more
//! negative words, and avoid the vocabulary of the speaker's previous turn.
//! In planted mode only hot sentences draw many quotes; in null mode quotes
//! fall on sentences chosen independently of their text.
//!
//! Word budgets are arranged so that features other than the planted ones
//! have the same distribution for highlights and their paired sentences:
//! all content words within a turn are distinct, fresh words are never
//! reused within a window of turns, and a turn echoes words drawn uniformly
//! from the speaker's previous turn.

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::{Duration, NaiveDate};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::corpus::{debates_from_records, write_articles, write_transcript, Article, Debate, DebateType, SpeakerRole, TurnRecord};
use crate::error::{Error, Result};
use crate::features::{LexiconSet, Stopwords};
use crate::quotematch::{QuoteCounts, QuoteIndex};

/// Content words per candidate sentence.
const CONTENT_WORDS: usize = 8;
/// Echoed words per ordinary sentence from the speaker's previous turn.
const ECHO_WORDS: usize = 3;
/// Fresh words are not reused within this many turns.
const FRESH_WINDOW: usize = 8;
const MODERATOR: &str = "MODERATOR";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Signal {
    /// Quotes concentrate on hot sentences.
    Planted,
    /// Quotes land on sentences chosen independently of the text.
    Null,
}

#[derive(Debug, Clone)]
pub struct SynthConfig {
    pub debates: usize,
    /// Each block is a moderator turn and four candidate turns.
    pub blocks_per_debate: usize,
    pub hot_rate: f64,
    /// Share of sentences drawing many quotes in null mode.
    pub quoted_rate: f64,
    pub signal: Signal,
    /// Extra weight for hot sentences' words when later turns echo; above
    /// zero, highlights also resemble the turns that follow them.
    pub post_echo_bias: f64,
    pub outlets: usize,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            debates: 20,
            blocks_per_debate: 60,
            hot_rate: 0.13,
            quoted_rate: 0.13,
            signal: Signal::Planted,
            post_echo_bias: 0.0,
            outlets: 12,
            seed: 7,
        }
    }
}

/// Word pools for the generator, all disjoint from the lexicons except the
/// sentiment pools.
#[derive(Debug, Clone)]
pub struct Vocabulary {
    pub topic: Vec<String>,
    pub news: Vec<String>,
    pub negative: Vec<String>,
    pub positive: Vec<String>,
    pub filler: Vec<String>,
}

fn is_superlative_like(w: &str) -> bool {
    w.ends_with("est") || ["most", "least", "best", "worst"].contains(&w)
}

impl Vocabulary {
    pub fn build(lexicons: &LexiconSet, stopwords: &Stopwords, seed: u64) -> Vocabulary {
        let all = lexicons.all();
        let entry_words: HashSet<&str> = all.iter().flat_map(|l| l.entry_words()).collect();
        let hit = |w: &str| all.iter().any(|l| l.contains_token(w));
        let neutral = |w: &str| !hit(w) && !entry_words.contains(w) && !is_superlative_like(w) && !stopwords.contains(w);

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let consonants = b"bdfgklmnprstvz";
        let vowels = b"aeiou";
        let mut seen = HashSet::new();
        let mut pseudo = |syllables: usize, n: usize, rng: &mut ChaCha8Rng| {
            let mut out = Vec::with_capacity(n);
            while out.len() < n {
                let w: String = (0..syllables)
                    .flat_map(|_| {
                        [
                            consonants[rng.gen_range(0..consonants.len())] as char,
                            vowels[rng.gen_range(0..vowels.len())] as char,
                        ]
                    })
                    .collect();
                if neutral(&w) && seen.insert(w.clone()) {
                    out.push(w);
                }
            }
            out
        };
        let topic = pseudo(3, 6000, &mut rng);
        let news = pseudo(4, 1500, &mut rng);

        let pool = |lex: &crate::features::Lexicon, others: &[&crate::features::Lexicon]| -> Vec<String> {
            let mut words: Vec<String> = lex
                .sample_words()
                .into_iter()
                .filter(|w| {
                    w.len() >= 3
                        && w.bytes().all(|b| b.is_ascii_lowercase())
                        && lex.contains_token(w)
                        && !stopwords.contains(w)
                        && !is_superlative_like(w)
                        && !others.iter().any(|o| o.contains_token(w) || o.entry_words().any(|e| e == *w))
                })
                .map(str::to_string)
                .collect();
            words.sort();
            words.dedup();
            words
        };
        let others_of = |skip: &str| -> Vec<&crate::features::Lexicon> { all.iter().copied().filter(|l| l.name != skip).collect() };
        let negative = pool(&lexicons.negative, &others_of(&lexicons.negative.name));
        let positive = pool(&lexicons.positive, &others_of(&lexicons.positive.name));

        let mut filler: Vec<String> = STOPWORD_CANDIDATES
            .iter()
            .filter(|w| stopwords.contains(w) && !hit(w) && !entry_words.contains(*w) && !is_superlative_like(w))
            .map(|w| w.to_string())
            .collect();
        filler.sort();
        Vocabulary { topic, news, negative, positive, filler }
    }
}

/// Plain function words; the generator keeps those that are stopwords and
/// match no lexicon.
const STOPWORD_CANDIDATES: &[&str] = &[
    "the", "of", "and", "to", "in", "for", "on", "with", "at", "by", "from", "as", "is", "was", "are", "were", "be",
    "been", "this", "that", "these", "those", "there", "here", "then", "than", "which", "who", "what", "when", "where",
    "has", "had", "have", "do", "does", "did", "into", "over", "under", "again", "once", "so", "too", "very", "just",
    "also", "only", "own", "same", "such", "both", "each", "other", "any", "all", "or", "if", "because", "until", "while",
    "up", "down", "out", "off", "through", "during", "before", "after", "above", "below", "between", "against",
];

#[derive(Debug, Clone, Copy)]
struct Cast {
    debate_type: DebateType,
    speakers: [&'static str; 2],
}

const CASTS: [Cast; 4] = [
    Cast { debate_type: DebateType::General, speakers: ["CLINTON", "TRUMP"] },
    Cast { debate_type: DebateType::Vice, speakers: ["KAINE", "PENCE"] },
    Cast { debate_type: DebateType::Democratic, speakers: ["SANDERS", "CLINTON"] },
    Cast { debate_type: DebateType::Republican, speakers: ["TRUMP", "CRUZ"] },
];

/// Speaker → party for every synthetic candidate.
pub fn party_map() -> BTreeMap<String, String> {
    [
        ("CLINTON", "democratic"),
        ("SANDERS", "democratic"),
        ("KAINE", "democratic"),
        ("TRUMP", "republican"),
        ("CRUZ", "republican"),
        ("PENCE", "republican"),
    ]
    .into_iter()
    .map(|(a, b)| (a.to_string(), b.to_string()))
    .collect()
}

fn capitalize(words: &[String]) -> String {
    let mut s = words.join(" ");
    if let Some(c) = s.get(..1) {
        let up = c.to_uppercase();
        s.replace_range(..1, &up);
    }
    s
}

/// Draws words not used in the recent window or the current turn.
struct FreshPicker {
    recent: VecDeque<HashSet<String>>,
    current: HashSet<String>,
}

impl FreshPicker {
    fn new() -> Self {
        FreshPicker { recent: VecDeque::new(), current: HashSet::new() }
    }

    fn blocked(&self, w: &str) -> bool {
        self.current.contains(w) || self.recent.iter().any(|s| s.contains(w))
    }

    fn pick(&mut self, pool: &[String], rng: &mut ChaCha8Rng) -> String {
        for _ in 0..10_000 {
            let w = &pool[rng.gen_range(0..pool.len())];
            if !self.blocked(w) {
                self.current.insert(w.clone());
                return w.clone();
            }
        }
        panic!("word pool exhausted; the fresh-word window is too large for the vocabulary");
    }

    /// Register words that entered the turn some other way (echoes).
    fn claim(&mut self, w: &str) {
        self.current.insert(w.to_string());
    }

    fn end_turn(&mut self) {
        self.recent.push_back(std::mem::take(&mut self.current));
        if self.recent.len() > FRESH_WINDOW {
            self.recent.pop_front();
        }
    }
}

#[derive(Debug, Clone)]
struct GenSentence {
    text: String,
    hot: bool,
    /// Words a later turn may echo, with the sentence's hot flag.
    echoable: Vec<String>,
}

struct TurnGen<'a> {
    vocab: &'a Vocabulary,
    cfg: &'a SynthConfig,
    fresh: FreshPicker,
}

impl TurnGen<'_> {
    fn sentence(&mut self, hot: bool, echoes: Vec<String>, rng: &mut ChaCha8Rng) -> GenSentence {
        let vocab = self.vocab;
        let k_neg = if hot { rng.gen_range(1..=3) } else { usize::from(rng.gen_bool(0.15)) };
        let k_pos = usize::from(rng.gen_bool(0.3));
        let mut content: Vec<String> = echoes.clone();
        let mut echoable = echoes;
        for _ in 0..k_neg.min(CONTENT_WORDS - content.len()) {
            let w = self.fresh.pick(&vocab.negative, rng);
            echoable.push(w.clone());
            content.push(w);
        }
        for _ in 0..k_pos.min(CONTENT_WORDS - content.len()) {
            content.push(self.fresh.pick(&vocab.positive, rng));
        }
        while content.len() < CONTENT_WORDS {
            let w = self.fresh.pick(&vocab.topic, rng);
            echoable.push(w.clone());
            content.push(w);
        }
        let n_fill = if hot { rng.gen_range(7..=8) } else { rng.gen_range(3..=5) };
        let mut fill: Vec<String> = (0..n_fill).map(|_| vocab.filler[rng.gen_range(0..vocab.filler.len())].clone()).collect();
        if rng.gen_bool(0.3) {
            fill[0] = "we".into();
        }
        if rng.gen_bool(0.3) {
            fill[1] = "a".into();
        }
        let mut words: Vec<String> = content.iter().cloned().chain(fill).collect();
        words.shuffle(rng);
        // end on a content word so the period is never read as an abbreviation
        if let Some(pos) = words.iter().rposition(|w| content.contains(w)) {
            let last = words.len() - 1;
            words.swap(pos, last);
        }
        GenSentence {
            text: format!("{}.", capitalize(&words)),
            hot,
            echoable,
        }
    }

    fn moderator(&mut self, rng: &mut ChaCha8Rng) -> Vec<String> {
        (0..rng.gen_range(1..=2))
            .map(|_| {
                let mut words: Vec<String> = (0..6).map(|_| self.fresh.pick(&self.vocab.topic, rng)).collect();
                let last = words.pop().unwrap();
                words.extend((0..3).map(|_| self.vocab.filler[rng.gen_range(0..self.vocab.filler.len())].clone()));
                words.shuffle(rng);
                words.push(last);
                format!("{}.", capitalize(&words))
            })
            .collect()
    }

    /// Sample `n` distinct echo words, hot sources weighted up by the bias.
    fn echo_words(&self, source: &[(String, bool)], n: usize, rng: &mut ChaCha8Rng) -> Vec<String> {
        let mut pool: Vec<(String, f64)> = source
            .iter()
            .map(|(w, hot)| (w.clone(), if *hot { 1.0 + self.cfg.post_echo_bias } else { 1.0 }))
            .collect();
        let mut out = Vec::new();
        while out.len() < n && !pool.is_empty() {
            let total: f64 = pool.iter().map(|p| p.1).sum();
            let mut r = rng.gen::<f64>() * total;
            let mut idx = pool.len() - 1;
            for (i, p) in pool.iter().enumerate() {
                if r < p.1 {
                    idx = i;
                    break;
                }
                r -= p.1;
            }
            out.push(pool.swap_remove(idx).0);
        }
        out
    }

    fn candidate_turn(
        &mut self,
        prev_self: Option<&Vec<(String, bool)>>,
        prev_other_hot: &[(String, bool)],
        rng: &mut ChaCha8Rng,
    ) -> Vec<GenSentence> {
        let n = rng.gen_range(3..=6);
        let hot: Vec<bool> = (0..n).map(|_| rng.gen_bool(self.cfg.hot_rate)).collect();
        let normal = hot.iter().filter(|h| !**h).count();
        let mut echo_pool = match prev_self {
            Some(src) => self.echo_words(src, normal * ECHO_WORDS, rng),
            None => vec![],
        };
        let mut other_pool = if self.cfg.post_echo_bias > 0.0 {
            self.echo_words(prev_other_hot, normal, rng)
        } else {
            vec![]
        };
        for w in echo_pool.iter().chain(&other_pool) {
            self.fresh.claim(w);
        }
        hot.into_iter()
            .map(|h| {
                let mut echoes = Vec::new();
                if !h {
                    for _ in 0..ECHO_WORDS {
                        if let Some(w) = echo_pool.pop() {
                            echoes.push(w);
                        }
                    }
                    if let Some(w) = other_pool.pop() {
                        echoes.push(w);
                    }
                }
                self.sentence(h, echoes, rng)
            })
            .collect()
    }
}

/// A generated corpus with its ground truth.
#[derive(Debug, Clone)]
pub struct SynthCorpus {
    pub debates: Vec<Debate>,
    pub articles: Vec<Article>,
    /// Sentences generated in the hot style.
    pub hot: BTreeSet<String>,
    /// Intended quote count per quoted sentence.
    pub quote_counts: BTreeMap<String, u64>,
    pub party_map: BTreeMap<String, String>,
}

impl SynthCorpus {
    /// The quote index the articles are meant to produce, built directly.
    pub fn direct_index(&self) -> QuoteIndex {
        let mut idx = QuoteIndex::new();
        for (s, &c) in &self.quote_counts {
            idx.add(s, "direct", QuoteCounts { quote_count: c, ..Default::default() });
        }
        idx
    }

    /// Write `transcripts.jsonl`, `articles.jsonl` and `party_map.json`.
    pub fn write(&self, dir: &Path) -> Result<(PathBuf, PathBuf, PathBuf)> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let t = dir.join("transcripts.jsonl");
        let a = dir.join("articles.jsonl");
        let p = dir.join("party_map.json");
        let mut buf = Vec::new();
        for d in &self.debates {
            write_transcript(d, &mut buf).map_err(|e| Error::io(&t, e))?;
        }
        std::fs::write(&t, buf).map_err(|e| Error::io(&t, e))?;
        let mut buf = Vec::new();
        write_articles(&self.articles, &mut buf).map_err(|e| Error::io(&a, e))?;
        std::fs::write(&a, buf).map_err(|e| Error::io(&a, e))?;
        let json = serde_json::to_string_pretty(&self.party_map).map_err(|e| Error::InvalidInput(e.to_string()))?;
        let mut f = std::fs::File::create(&p).map_err(|e| Error::io(&p, e))?;
        writeln!(f, "{json}").map_err(|e| Error::io(&p, e))?;
        Ok((t, a, p))
    }
}

fn debate_meta(i: usize) -> (String, i32, Cast, NaiveDate) {
    let cast = CASTS[i % 4];
    let year = 2000 + 4 * ((i / 4) % 5) as i32;
    let date = NaiveDate::from_ymd_opt(year, 9 + (i % 3) as u32, 1 + (i % 27) as u32).expect("valid date");
    (format!("{year}-{}-{i:03}", cast.debate_type.as_str()), year, cast, date)
}

struct QuoteEvent {
    sentence_text: String,
    speaker: String,
}

fn poisson(rng: &mut ChaCha8Rng, mean: f64) -> u64 {
    Poisson::new(mean).map(|p| p.sample(rng) as u64).unwrap_or(0)
}

/// Generate debates and, when `with_articles`, news articles quoting them.
pub fn generate(cfg: &SynthConfig, with_articles: bool) -> Result<SynthCorpus> {
    let lexicons = LexiconSet::embedded();
    let stopwords = Stopwords::embedded();
    let vocab = Vocabulary::build(&lexicons, &stopwords, cfg.seed);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let outlets: Vec<(String, f64)> = (0..cfg.outlets)
        .map(|i| (format!("Outlet{:02}", i + 1), 0.15 + 0.7 * i as f64 / (cfg.outlets.max(2) - 1) as f64))
        .collect();
    let parties = party_map();

    let mut corpus = SynthCorpus {
        debates: vec![],
        articles: vec![],
        hot: BTreeSet::new(),
        quote_counts: BTreeMap::new(),
        party_map: parties.clone(),
    };
    for i in 0..cfg.debates {
        let (id, year, cast, date) = debate_meta(i);
        let mut gen = TurnGen { vocab: &vocab, cfg, fresh: FreshPicker::new() };
        let mut records = Vec::new();
        let mut meta: Vec<Vec<bool>> = Vec::new();
        let mut last_turn: [Option<Vec<(String, bool)>>; 2] = [None, None];
        let mut prev_turn_hot: Vec<(String, bool)> = vec![];
        let record = |speaker: &str, role: SpeakerRole, text: String| TurnRecord {
            debate_id: id.clone(),
            election_year: year,
            debate_type: cast.debate_type,
            date,
            speaker: speaker.to_string(),
            speaker_role: role,
            text,
        };
        for b in 0..cfg.blocks_per_debate {
            let mod_sentences = gen.moderator(&mut rng);
            meta.push(vec![false; mod_sentences.len()]);
            records.push(record(MODERATOR, SpeakerRole::Moderator, mod_sentences.join(" ")));
            gen.fresh.end_turn();
            prev_turn_hot.clear();
            let first = b % 2;
            for k in 0..4 {
                let who = (first + k) % 2;
                let sentences = gen.candidate_turn(last_turn[who].as_ref(), &prev_turn_hot, &mut rng);
                gen.fresh.end_turn();
                let words: Vec<(String, bool)> = sentences
                    .iter()
                    .flat_map(|s| s.echoable.iter().map(move |w| (w.clone(), s.hot)))
                    .collect();
                prev_turn_hot = words.iter().filter(|(_, h)| *h).cloned().collect();
                last_turn[who] = Some(words);
                meta.push(sentences.iter().map(|s| s.hot).collect());
                let text = sentences.iter().map(|s| s.text.as_str()).collect::<Vec<_>>().join(" ");
                records.push(record(cast.speakers[who], SpeakerRole::Candidate, text));
            }
        }
        let n_records = records.len();
        let (mut debates, warnings) = debates_from_records("synthetic", records.into_iter().enumerate().map(|(k, r)| (k + 1, r)).collect())?;
        let debate = debates.remove(0);
        if !warnings.is_empty() || debate.turns.len() != n_records {
            return Err(Error::Degenerate(format!("synthetic debate {id} did not round-trip through ingest")));
        }
        for (turn, flags) in debate.turns.iter().zip(&meta) {
            if turn.sentences.len() != flags.len() {
                return Err(Error::Degenerate(format!("segmentation mismatch in {id} turn {}", turn.index)));
            }
        }

        let mut events = Vec::new();
        for (turn, flags) in debate.turns.iter().zip(&meta) {
            if turn.speaker == MODERATOR {
                continue;
            }
            for (s, &hot) in turn.sentences.iter().zip(flags) {
                if hot {
                    corpus.hot.insert(s.id.clone());
                }
                let quoted_style = match cfg.signal {
                    Signal::Planted => hot,
                    Signal::Null => rng.gen_bool(cfg.quoted_rate),
                };
                let count = if quoted_style { 3 + poisson(&mut rng, 3.0) } else { u64::from(rng.gen_bool(0.08)) };
                if count > 0 {
                    corpus.quote_counts.insert(s.id.clone(), count);
                    for _ in 0..count {
                        events.push(QuoteEvent { sentence_text: s.text.clone(), speaker: turn.speaker.clone() });
                    }
                }
            }
        }
        if with_articles {
            let arts = write_coverage(&debate, events, &outlets, &parties, &vocab, &mut rng);
            corpus.articles.extend(arts);
        }
        corpus.debates.push(debate);
    }
    Ok(corpus)
}

fn news_words(vocab: &Vocabulary, n: usize, rng: &mut ChaCha8Rng) -> Vec<String> {
    (0..n).map(|_| vocab.news[rng.gen_range(0..vocab.news.len())].clone()).collect()
}

/// Spread quote events over outlets (by party lean) and articles.
fn write_coverage(
    debate: &Debate,
    events: Vec<QuoteEvent>,
    outlets: &[(String, f64)],
    parties: &BTreeMap<String, String>,
    vocab: &Vocabulary,
    rng: &mut ChaCha8Rng,
) -> Vec<Article> {
    let mut by_outlet: Vec<Vec<QuoteEvent>> = (0..outlets.len()).map(|_| vec![]).collect();
    for e in events {
        let dem = parties.get(&e.speaker).map(String::as_str) == Some("democratic");
        let weights: Vec<f64> = outlets.iter().map(|(_, lean)| if dem { *lean } else { 1.0 - lean }).collect();
        let total: f64 = weights.iter().sum();
        let mut r = rng.gen::<f64>() * total;
        let mut pick = outlets.len() - 1;
        for (i, w) in weights.iter().enumerate() {
            if r < *w {
                pick = i;
                break;
            }
            r -= w;
        }
        by_outlet[pick].push(e);
    }
    let mut articles = Vec::new();
    for ((outlet, _), mut evs) in outlets.iter().zip(by_outlet) {
        evs.shuffle(rng);
        let mut k = 0;
        while !evs.is_empty() {
            let take = rng.gen_range(1..=4).min(evs.len());
            let chunk: Vec<QuoteEvent> = evs.drain(..take).collect();
            let mut parts = Vec::new();
            for e in chunk {
                let mut before = news_words(vocab, rng.gen_range(4..=6), rng);
                if rng.gen_bool(0.3) {
                    before.push(vocab.positive[rng.gen_range(0..vocab.positive.len())].clone());
                }
                if rng.gen_bool(0.3) {
                    before.push(vocab.negative[rng.gen_range(0..vocab.negative.len())].clone());
                }
                before.shuffle(rng);
                let words: Vec<&str> = e.sentence_text.trim_end_matches('.').split(' ').collect();
                let quote = if words.len() >= 10 && rng.gen_bool(0.2) {
                    let len = rng.gen_range(8..words.len());
                    let start = rng.gen_range(0..=words.len() - len);
                    words[start..start + len].join(" ")
                } else {
                    words.join(" ")
                };
                let after = news_words(vocab, rng.gen_range(2..=4), rng);
                parts.push(format!("{} \u{201C}{}\u{201D} {}.", capitalize(&before), quote, after.join(" ")));
            }
            articles.push(Article::new(
                &format!("{}-{}-{k:03}", debate.id, outlet.to_lowercase()),
                outlet,
                debate.date + Duration::days(rng.gen_range(0..=3)),
                &debate.id,
                &parts.join(" "),
            ));
            k += 1;
        }
    }
    articles
}

/// A debate, single-quotation articles (true and decoy), and the gold
/// (article id, sentence id) links.
#[derive(Debug, Clone)]
pub struct MatcherBench {
    pub debate: Debate,
    pub articles: Vec<Article>,
    pub gold: BTreeSet<(String, String)>,
}

/// `n_true` quotations copied from debate sentences with up to
/// `max_edit_frac` of their tokens substituted or deleted, plus `n_decoy`
/// quotations of text the debate never contains.
pub fn matcher_benchmark(n_true: usize, n_decoy: usize, max_edit_frac: f64, seed: u64) -> Result<MatcherBench> {
    let cfg = SynthConfig { debates: 1, blocks_per_debate: 40, seed, ..Default::default() };
    let corpus = generate(&cfg, false)?;
    let debate = corpus.debates.into_iter().next().expect("one debate");
    let lexicons = LexiconSet::embedded();
    let vocab = Vocabulary::build(&lexicons, &Stopwords::embedded(), seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9);
    let candidates: Vec<&crate::corpus::Sentence> = debate
        .turns
        .iter()
        .filter(|t| t.speaker != MODERATOR)
        .flat_map(|t| t.sentences.iter())
        .collect();
    let used: HashSet<&str> = debate.sentences().flat_map(|s| s.tokens.iter().map(String::as_str)).collect();
    let unused_topic: Vec<String> = vocab.topic.iter().filter(|w| !used.contains(w.as_str())).cloned().collect();

    let mut articles = Vec::new();
    let mut gold = BTreeSet::new();
    let date = debate.date + Duration::days(1);
    for i in 0..n_true {
        let s = candidates[rng.gen_range(0..candidates.len())];
        let mut words: Vec<String> = s.text.trim_end_matches('.').split(' ').map(str::to_string).collect();
        let budget = (max_edit_frac * words.len() as f64).floor() as usize;
        for _ in 0..rng.gen_range(0..=budget) {
            let at = rng.gen_range(0..words.len());
            if rng.gen_bool(0.5) {
                words[at] = vocab.news[rng.gen_range(0..vocab.news.len())].clone();
            } else {
                words.remove(at);
            }
        }
        let id = format!("true-{i:04}");
        let body = format!("{} \u{201C}{}\u{201D} {}.", capitalize(&news_words(&vocab, 5, &mut rng)), words.join(" "), news_words(&vocab, 3, &mut rng).join(" "));
        articles.push(Article::new(&id, "Bench", date, &debate.id, &body));
        gold.insert((id, s.id.clone()));
    }
    for i in 0..n_decoy {
        let mut words: Vec<String> = (0..CONTENT_WORDS).map(|_| unused_topic[rng.gen_range(0..unused_topic.len())].clone()).collect();
        words.extend((0..rng.gen_range(3..=5)).map(|_| vocab.filler[rng.gen_range(0..vocab.filler.len())].clone()));
        words.shuffle(&mut rng);
        let body = format!("{} \u{201C}{}\u{201D} {}.", capitalize(&news_words(&vocab, 5, &mut rng)), words.join(" "), news_words(&vocab, 3, &mut rng).join(" "));
        articles.push(Article::new(&format!("decoy-{i:04}"), "Bench", date, &debate.id, &body));
    }
    Ok(MatcherBench { debate, articles, gold })
}

/// The two Sanders sentences from neighboring turns of a 2016 Democratic
/// primary debate: the first quoted 23 times, the second never.
pub const FLINT_HIGHLIGHT: &str = "Do I consider myself part of the casino capitalist process by which so few have so much and so many have so little by which Wall Street's greed and recklessness wrecked this economy?";
pub const FLINT_OTHER: &str = "So what we need to do is support small and medium-sized businesses, the backbone of our economy, but we have to make sure that every family in this country gets a fair shake.";

/// Small debate around the two sentences, with its quote index.
pub fn flint_debate() -> Result<(Debate, QuoteIndex)> {
    let date = NaiveDate::from_ymd_opt(2016, 3, 6).expect("valid date");
    let turns = [
        (MODERATOR, SpeakerRole::Moderator, "Senator Sanders, do you consider yourself part of the problem you describe?".to_string()),
        ("SANDERS", SpeakerRole::Candidate, format!("{FLINT_HIGHLIGHT} No.")),
        (
            "CLINTON",
            SpeakerRole::Candidate,
            "I think what Senator Sanders is saying certainly makes sense in the terms of the inequality that we have. We have to do more.".to_string(),
        ),
        ("SANDERS", SpeakerRole::Candidate, format!("Let me say this. {FLINT_OTHER}")),
    ];
    let records = turns
        .iter()
        .enumerate()
        .map(|(i, (speaker, role, text))| {
            (
                i + 1,
                TurnRecord {
                    debate_id: "2016-democratic-flint".into(),
                    election_year: 2016,
                    debate_type: DebateType::Democratic,
                    date,
                    speaker: speaker.to_string(),
                    speaker_role: *role,
                    text: text.clone(),
                },
            )
        })
        .collect();
    let debate = debates_from_records("flint", records)?.0.remove(0);
    let mut idx = QuoteIndex::new();
    let highlight = debate
        .sentences()
        .find(|s| s.text == FLINT_HIGHLIGHT)
        .ok_or_else(|| Error::Degenerate("highlight sentence not segmented as expected".into()))?;
    idx.add(&highlight.id, "Times", QuoteCounts { quote_count: 23, ..Default::default() });
    Ok((debate, idx))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::count_lexicon;

    #[test]
    fn vocabulary_avoids_lexicons() {
        let lex = LexiconSet::embedded();
        let stop = Stopwords::embedded();
        let v = Vocabulary::build(&lex, &stop, 1);
        assert!(v.negative.len() >= 40, "{}", v.negative.len());
        assert!(v.positive.len() >= 40, "{}", v.positive.len());
        assert!(v.filler.len() >= 20, "{:?}", v.filler);
        for w in v.topic.iter().chain(&v.news).chain(&v.filler) {
            assert!(lex.all().iter().all(|l| count_lexicon(&[w], l) == 0), "{w}");
        }
        for w in &v.negative {
            assert_eq!(count_lexicon(&[w], &lex.negative), 1, "{w}");
            assert!(lex.all().iter().filter(|l| count_lexicon(&[w], l) > 0).count() == 1, "{w}");
        }
    }

    #[test]
    fn generation_is_deterministic_and_segments_cleanly() {
        let cfg = SynthConfig { debates: 2, blocks_per_debate: 6, ..Default::default() };
        let a = generate(&cfg, true).unwrap();
        let b = generate(&cfg, true).unwrap();
        assert_eq!(a.debates, b.debates);
        assert_eq!(a.articles, b.articles);
        assert!(!a.hot.is_empty());
        assert_eq!(a.debates[0].turns.len(), 30);
    }

    #[test]
    fn content_words_distinct_within_turn() {
        let stop = Stopwords::embedded();
        let c = generate(&SynthConfig { debates: 1, blocks_per_debate: 10, ..Default::default() }, false).unwrap();
        for t in &c.debates[0].turns {
            let mut seen = HashSet::new();
            for s in &t.sentences {
                let own: HashSet<&str> = s.tokens.iter().map(String::as_str).filter(|w| stop.is_content(w)).collect();
                for w in own {
                    assert!(seen.insert(w), "{w} repeated in turn {}", t.index);
                }
            }
        }
    }

    #[test]
    fn flint_fixture() {
        let (d, idx) = flint_debate().unwrap();
        assert_eq!(idx.total_count("2016-democratic-flint:1:0"), 23);
        assert!(d.sentences().any(|s| s.text == FLINT_OTHER));
    }
}
