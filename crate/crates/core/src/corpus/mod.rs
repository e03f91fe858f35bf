//! Debate transcripts and news articles.
//!
//! Transcripts are JSON lines with one object per turn; articles are JSON lines
//! with one object per article. Loading normalizes text to NFC, segments turns
//! into sentences and tokenizes everything once, so downstream modules work on
//! immutable, fully tokenized values.

mod text;

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use text::{normalize, segment_sentences, tokenize, tokenize_spans, SpannedToken};

/// Articles must be published within this many days after their debate.
pub const ARTICLE_WINDOW_DAYS: i64 = 7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DebateType {
    General,
    Vice,
    Democratic,
    Republican,
}

impl DebateType {
    pub const ALL: [DebateType; 4] = [
        DebateType::General,
        DebateType::Vice,
        DebateType::Democratic,
        DebateType::Republican,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DebateType::General => "general",
            DebateType::Vice => "vice",
            DebateType::Democratic => "democratic",
            DebateType::Republican => "republican",
        }
    }
}

impl std::fmt::Display for DebateType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpeakerRole {
    Candidate,
    Moderator,
    Other,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sentence {
    pub id: String,
    pub text: String,
    pub tokens: Vec<String>,
    pub turn_index: usize,
    pub sentence_index: usize,
}

impl Sentence {
    fn new(debate_id: &str, turn_index: usize, sentence_index: usize, text: String) -> Self {
        Sentence {
            id: sentence_id(debate_id, turn_index, sentence_index),
            tokens: tokenize(&text),
            text,
            turn_index,
            sentence_index,
        }
    }
}

pub fn sentence_id(debate_id: &str, turn_index: usize, sentence_index: usize) -> String {
    format!("{debate_id}:{turn_index}:{sentence_index}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Turn {
    pub index: usize,
    pub speaker: String,
    pub speaker_role: SpeakerRole,
    pub sentences: Vec<Sentence>,
}

impl Turn {
    /// All tokens of the turn in order.
    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.sentences
            .iter()
            .flat_map(|s| s.tokens.iter().map(String::as_str))
    }

    pub fn token_count(&self) -> usize {
        self.sentences.iter().map(|s| s.tokens.len()).sum()
    }

    pub fn text(&self) -> String {
        let parts: Vec<&str> = self.sentences.iter().map(|s| s.text.as_str()).collect();
        parts.join(" ")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Debate {
    pub id: String,
    pub election_year: i32,
    pub debate_type: DebateType,
    pub date: NaiveDate,
    pub turns: Vec<Turn>,
}

impl Debate {
    /// Sentences in transcript order.
    pub fn sentences(&self) -> impl Iterator<Item = &Sentence> {
        self.turns.iter().flat_map(|t| t.sentences.iter())
    }

    pub fn sentence_count(&self) -> usize {
        self.turns.iter().map(|t| t.sentences.len()).sum()
    }

    pub fn speaker_of(&self, sentence: &Sentence) -> &str {
        &self.turns[sentence.turn_index].speaker
    }

    /// Map from sentence id to (turn index, sentence index).
    pub fn sentence_lookup(&self) -> HashMap<&str, (usize, usize)> {
        self.sentences()
            .map(|s| (s.id.as_str(), (s.turn_index, s.sentence_index)))
            .collect()
    }

    pub fn sentence(&self, turn: usize, index: usize) -> Option<&Sentence> {
        self.turns.get(turn)?.sentences.get(index)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Article {
    pub id: String,
    pub outlet: String,
    pub publish_date: NaiveDate,
    pub debate_id: String,
    pub body: String,
    pub tokens: Vec<String>,
    /// Byte span of every token in `body`.
    pub offsets: Vec<(usize, usize)>,
}

impl Article {
    pub fn new(
        id: impl Into<String>,
        outlet: impl Into<String>,
        publish_date: NaiveDate,
        debate_id: impl Into<String>,
        body: &str,
    ) -> Self {
        let body = normalize(body);
        let (tokens, offsets) = tokenize_spans(&body)
            .into_iter()
            .map(|t| (t.text, (t.start, t.end)))
            .unzip();
        Article {
            id: id.into(),
            outlet: outlet.into(),
            publish_date,
            debate_id: debate_id.into(),
            body,
            tokens,
            offsets,
        }
    }
}

/// A non-fatal problem found during ingestion.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestWarning {
    pub source: String,
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Corpus {
    pub debates: Vec<Debate>,
    pub articles: Vec<Article>,
}

impl Corpus {
    pub fn debate(&self, id: &str) -> Option<&Debate> {
        self.debates.iter().find(|d| d.id == id)
    }

    pub fn articles_for<'a>(&'a self, debate_id: &'a str) -> impl Iterator<Item = &'a Article> + 'a {
        self.articles.iter().filter(move |a| a.debate_id == debate_id)
    }
}

/// One line of a transcript file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TurnRecord {
    pub debate_id: String,
    pub election_year: i32,
    pub debate_type: DebateType,
    pub date: NaiveDate,
    pub speaker: String,
    pub speaker_role: SpeakerRole,
    pub text: String,
}

/// One line of an article file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArticleRecord {
    pub article_id: String,
    pub outlet: String,
    pub date: NaiveDate,
    pub debate_id: String,
    pub body: String,
}

fn read_lines(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn parse_jsonl<T: serde::de::DeserializeOwned>(path: &Path, content: &str) -> Result<Vec<(usize, T)>> {
    let mut out = Vec::new();
    for (i, line) in content.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(line).map_err(|e| Error::parse(path, i + 1, e.to_string()))?;
        out.push((i + 1, rec));
    }
    Ok(out)
}

/// Build debates from transcript records, preserving first-appearance order.
pub fn debates_from_records(
    source: &str,
    records: Vec<(usize, TurnRecord)>,
) -> Result<(Vec<Debate>, Vec<IngestWarning>)> {
    let mut order: Vec<String> = Vec::new();
    let mut grouped: HashMap<String, Vec<(usize, TurnRecord)>> = HashMap::new();
    for (line, rec) in records {
        if !(1960..=2100).contains(&rec.election_year) {
            return Err(Error::parse(
                source,
                line,
                format!("election_year {} outside [1960, 2100]", rec.election_year),
            ));
        }
        if !grouped.contains_key(&rec.debate_id) {
            order.push(rec.debate_id.clone());
        }
        grouped.entry(rec.debate_id.clone()).or_default().push((line, rec));
    }

    let mut warnings = Vec::new();
    let mut debates = Vec::with_capacity(order.len());
    for id in order {
        let recs = grouped.remove(&id).unwrap_or_default();
        let (first_line, first) = &recs[0];
        let (year, kind, date) = (first.election_year, first.debate_type, first.date);
        let mut merged: Vec<(usize, String, SpeakerRole, String)> = Vec::new();
        for (line, rec) in &recs {
            if rec.election_year != year || rec.debate_type != kind || rec.date != date {
                return Err(Error::parse(
                    source,
                    *line,
                    format!("debate `{id}` metadata differs from line {first_line}"),
                ));
            }
            if rec.text.trim().is_empty() {
                warnings.push(IngestWarning {
                    source: source.to_string(),
                    line: *line,
                    message: "empty turn skipped".into(),
                });
                continue;
            }
            match merged.last_mut() {
                Some(last) if last.1 == rec.speaker => {
                    warnings.push(IngestWarning {
                        source: source.to_string(),
                        line: *line,
                        message: format!("consecutive turn by `{}` merged into previous turn", rec.speaker),
                    });
                    last.3.push(' ');
                    last.3.push_str(rec.text.trim());
                }
                _ => merged.push((*line, rec.speaker.clone(), rec.speaker_role, rec.text.trim().to_string())),
            }
        }

        let mut turns = Vec::with_capacity(merged.len());
        for (line, speaker, role, text) in merged {
            let index = turns.len();
            let sentences: Vec<Sentence> = segment_sentences(&normalize(&text))
                .into_iter()
                .enumerate()
                .map(|(k, s)| Sentence::new(&id, index, k, s))
                .collect();
            if sentences.iter().all(|s| s.tokens.is_empty()) {
                warnings.push(IngestWarning {
                    source: source.to_string(),
                    line,
                    message: "turn without word tokens skipped".into(),
                });
                continue;
            }
            turns.push(Turn {
                index,
                speaker,
                speaker_role: role,
                sentences,
            });
        }
        // Skipping a turn can leave two same-speaker turns adjacent; merge again.
        let turns = remerge(&id, turns);
        if turns.is_empty() {
            return Err(Error::parse(source, *first_line, format!("debate `{id}` has no turns")));
        }
        debates.push(Debate {
            id,
            election_year: year,
            debate_type: kind,
            date,
            turns,
        });
    }
    Ok((debates, warnings))
}

fn remerge(debate_id: &str, turns: Vec<Turn>) -> Vec<Turn> {
    let mut out: Vec<Turn> = Vec::with_capacity(turns.len());
    for turn in turns {
        match out.last_mut() {
            Some(last) if last.speaker == turn.speaker => last.sentences.extend(turn.sentences),
            _ => out.push(turn),
        }
    }
    for (ti, turn) in out.iter_mut().enumerate() {
        turn.index = ti;
        for (si, s) in turn.sentences.iter_mut().enumerate() {
            s.turn_index = ti;
            s.sentence_index = si;
            s.id = sentence_id(debate_id, ti, si);
        }
    }
    out
}

/// Load every debate in a transcript file.
pub fn load_debates(path: &Path) -> Result<(Vec<Debate>, Vec<IngestWarning>)> {
    let content = read_lines(path)?;
    let records = parse_jsonl::<TurnRecord>(path, &content)?;
    if records.is_empty() {
        return Err(Error::parse(path, 1, "transcript file contains no turns"));
    }
    debates_from_records(&path.display().to_string(), records)
}

/// Load a transcript file that holds exactly one debate.
pub fn load_debate(path: &Path) -> Result<(Debate, Vec<IngestWarning>)> {
    let (mut debates, warnings) = load_debates(path)?;
    if debates.len() != 1 {
        return Err(Error::parse(
            path,
            1,
            format!("expected one debate, found {}", debates.len()),
        ));
    }
    Ok((debates.remove(0), warnings))
}

/// Build articles, dropping those outside the publication window of their debate.
pub fn articles_from_records(
    source: &str,
    records: Vec<(usize, ArticleRecord)>,
    debate_dates: &HashMap<String, NaiveDate>,
) -> (Vec<Article>, Vec<IngestWarning>) {
    let mut articles = Vec::new();
    let mut warnings = Vec::new();
    for (line, rec) in records {
        let warn = |message: String| IngestWarning {
            source: source.to_string(),
            line,
            message,
        };
        let Some(debate_date) = debate_dates.get(&rec.debate_id) else {
            warnings.push(warn(format!("unknown debate `{}`; article skipped", rec.debate_id)));
            continue;
        };
        let days = (rec.date - *debate_date).num_days();
        if !(0..=ARTICLE_WINDOW_DAYS).contains(&days) {
            warnings.push(warn(format!(
                "article `{}` dated {} days after debate (window 0..={ARTICLE_WINDOW_DAYS}); skipped",
                rec.article_id, days
            )));
            continue;
        }
        articles.push(Article::new(rec.article_id, rec.outlet, rec.date, rec.debate_id, &rec.body));
    }
    (articles, warnings)
}

pub fn load_articles(
    path: &Path,
    debate_dates: &HashMap<String, NaiveDate>,
) -> Result<(Vec<Article>, Vec<IngestWarning>)> {
    let content = read_lines(path)?;
    let records = parse_jsonl::<ArticleRecord>(path, &content)?;
    Ok(articles_from_records(&path.display().to_string(), records, debate_dates))
}

/// Transcript records that reproduce `debate` when loaded again.
pub fn turn_records(debate: &Debate) -> Vec<TurnRecord> {
    debate
        .turns
        .iter()
        .map(|t| TurnRecord {
            debate_id: debate.id.clone(),
            election_year: debate.election_year,
            debate_type: debate.debate_type,
            date: debate.date,
            speaker: t.speaker.clone(),
            speaker_role: t.speaker_role,
            text: t.text(),
        })
        .collect()
}

pub fn write_transcript<W: Write>(debate: &Debate, mut w: W) -> std::io::Result<()> {
    for rec in turn_records(debate) {
        serde_json::to_writer(&mut w, &rec)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn write_articles<W: Write>(articles: &[Article], mut w: W) -> std::io::Result<()> {
    for a in articles {
        let rec = ArticleRecord {
            article_id: a.id.clone(),
            outlet: a.outlet.clone(),
            date: a.publish_date,
            debate_id: a.debate_id.clone(),
            body: a.body.clone(),
        };
        serde_json::to_writer(&mut w, &rec)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}
