//! Interpolated n-gram language models (orders 1 to 3).
//!
//! The unigram level uses add-k smoothing over the vocabulary plus `<unk>`.
//! Each higher level uses the maximum-likelihood estimate for its context, or
//! falls back to the level below when the context was never seen, so every
//! level is a proper distribution and any convex mix of them is too:
//!
//! ```text
//! P(w | h) = sum_j lambda_j * P_j(w | h_j)
//! ```
//!
//! Sentences are padded on the left with `<s>`; there is no end symbol, so the
//! predicted event space is exactly the vocabulary plus `<unk>`.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const UNK: &str = "<unk>";
pub const BOS: &str = "<s>";

const UNK_ID: u32 = 0;
const BOS_ID: u32 = 1;
const FORMAT: &str = "debate-highlights-lm";
const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LmConfig {
    pub order: usize,
    pub min_count: u64,
    /// Add-k constant for the unigram level.
    pub add_k: f64,
    /// Interpolation weights, lowest order first. Must sum to 1.
    pub lambdas: Vec<f64>,
}

impl LmConfig {
    pub fn new(order: usize, min_count: u64) -> Self {
        LmConfig {
            order,
            min_count,
            add_k: 1.0,
            lambdas: default_lambdas(order),
        }
    }

    fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.order) {
            return Err(Error::InvalidInput(format!("order {} not in 1..=3", self.order)));
        }
        if self.min_count < 1 {
            return Err(Error::InvalidInput("min_count must be at least 1".into()));
        }
        if !(self.add_k > 0.0 && self.add_k.is_finite()) {
            return Err(Error::InvalidInput("add_k must be positive".into()));
        }
        if self.lambdas.len() != self.order {
            return Err(Error::InvalidInput(format!(
                "{} interpolation weights for order {}",
                self.lambdas.len(),
                self.order
            )));
        }
        let sum: f64 = self.lambdas.iter().sum();
        if self.lambdas.iter().any(|&l| !(l >= 0.0)) || (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidInput("interpolation weights must be nonnegative and sum to 1".into()));
        }
        Ok(())
    }
}

/// 0.7 on the highest order, the rest split evenly below it.
pub fn default_lambdas(order: usize) -> Vec<f64> {
    match order {
        0 => vec![],
        1 => vec![1.0],
        n => {
            let rest = 0.3 / (n - 1) as f64;
            let mut v = vec![rest; n - 1];
            v.push(0.7);
            v
        }
    }
}

#[derive(Debug, Clone)]
pub struct LanguageModel {
    config: LmConfig,
    /// Index = id. Slot 0 is `<unk>`, slot 1 is `<s>`.
    words: Vec<String>,
    ids: HashMap<String, u32>,
    /// counts[j] holds (j+1)-grams.
    counts: Vec<HashMap<Vec<u32>, u64>>,
    /// context_counts[j] holds totals for (j+1)-gram contexts, j >= 1.
    context_counts: Vec<HashMap<Vec<u32>, u64>>,
    total: u64,
}

impl LanguageModel {
    /// Train on tokenized sentences.
    pub fn train(sentences: &[Vec<String>], config: LmConfig) -> Result<Self> {
        config.validate()?;
        let mut freq: BTreeMap<&str, u64> = BTreeMap::new();
        for s in sentences {
            for t in s {
                *freq.entry(t.as_str()).or_default() += 1;
            }
        }
        if freq.is_empty() {
            return Err(Error::InvalidInput("empty training corpus".into()));
        }
        let mut words = vec![UNK.to_string(), BOS.to_string()];
        words.extend(
            freq.iter()
                .filter(|&(w, &c)| c >= config.min_count && *w != UNK && *w != BOS)
                .map(|(w, _)| w.to_string()),
        );
        let mut lm = LanguageModel::empty(config, words);
        for s in sentences {
            let ids = lm.encode(s.iter().map(String::as_str));
            lm.add_sentence(&ids);
        }
        lm.rebuild_contexts();
        Ok(lm)
    }

    pub fn train_tokens(sentences: &[Vec<String>], order: usize, min_count: u64) -> Result<Self> {
        Self::train(sentences, LmConfig::new(order, min_count))
    }

    fn empty(config: LmConfig, words: Vec<String>) -> Self {
        let ids = words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i as u32))
            .collect();
        LanguageModel {
            counts: vec![HashMap::new(); config.order],
            context_counts: vec![HashMap::new(); config.order],
            config,
            words,
            ids,
            total: 0,
        }
    }

    fn encode<'a>(&self, tokens: impl Iterator<Item = &'a str>) -> Vec<u32> {
        tokens
            .map(|t| match self.ids.get(t) {
                Some(&id) if id != BOS_ID => id,
                _ => UNK_ID,
            })
            .collect()
    }

    fn add_sentence(&mut self, ids: &[u32]) {
        let n = self.config.order;
        let mut padded = vec![BOS_ID; n - 1];
        padded.extend_from_slice(ids);
        for pos in (n - 1)..padded.len() {
            self.total += 1;
            for j in 0..n {
                let gram = padded[pos - j..=pos].to_vec();
                *self.counts[j].entry(gram).or_default() += 1;
            }
        }
    }

    fn rebuild_contexts(&mut self) {
        for j in 1..self.config.order {
            let mut ctx: HashMap<Vec<u32>, u64> = HashMap::new();
            for (gram, &c) in &self.counts[j] {
                *ctx.entry(gram[..j].to_vec()).or_default() += c;
            }
            self.context_counts[j] = ctx;
        }
    }

    pub fn order(&self) -> usize {
        self.config.order
    }

    pub fn config(&self) -> &LmConfig {
        &self.config
    }

    /// Predictable words: the vocabulary plus `<unk>`.
    pub fn vocabulary(&self) -> impl Iterator<Item = &str> {
        self.words
            .iter()
            .enumerate()
            .filter(|&(i, _)| i as u32 != BOS_ID)
            .map(|(_, w)| w.as_str())
    }

    /// Number of predictable types (vocabulary plus `<unk>`).
    pub fn vocab_size(&self) -> usize {
        self.words.len() - 1
    }

    fn unigram(&self, w: u32) -> f64 {
        let c = self.counts[0].get(&vec![w]).copied().unwrap_or(0) as f64;
        let k = self.config.add_k;
        (c + k) / (self.total as f64 + k * self.vocab_size() as f64)
    }

    /// Level-j estimate, j counted from 0 (unigram). `history` is the full
    /// left context, most recent last, already padded.
    fn level(&self, j: usize, w: u32, history: &[u32]) -> f64 {
        if j == 0 {
            return self.unigram(w);
        }
        let ctx = &history[history.len() - j..];
        match self.context_counts[j].get(ctx) {
            Some(&total) if total > 0 => {
                let mut gram = ctx.to_vec();
                gram.push(w);
                self.counts[j].get(&gram).copied().unwrap_or(0) as f64 / total as f64
            }
            _ => self.level(j - 1, w, history),
        }
    }

    fn prob_ids(&self, w: u32, history: &[u32]) -> f64 {
        self.config
            .lambdas
            .iter()
            .enumerate()
            .filter(|&(_, &l)| l > 0.0)
            .map(|(j, &l)| l * self.level(j, w, history))
            .sum()
    }

    fn padded_history(&self, context: &[&str]) -> Vec<u32> {
        let n = self.config.order;
        let mut hist = vec![BOS_ID; n.saturating_sub(1)];
        for t in context {
            hist.push(match *t {
                BOS => BOS_ID,
                t => self.encode(std::iter::once(t))[0],
            });
        }
        let keep = n.saturating_sub(1);
        hist.split_off(hist.len() - keep)
    }

    /// P(word | context). The context is the preceding tokens of the sentence;
    /// missing positions are filled with `<s>`.
    pub fn prob(&self, word: &str, context: &[&str]) -> f64 {
        let w = self.encode(std::iter::once(word))[0];
        self.prob_ids(w, &self.padded_history(context))
    }

    /// Mean natural-log probability per token; 0 for an empty sequence.
    pub fn score<S: AsRef<str>>(&self, tokens: &[S]) -> f64 {
        if tokens.is_empty() {
            return 0.0;
        }
        let n = self.config.order;
        let mut padded = vec![BOS_ID; n - 1];
        padded.extend(self.encode(tokens.iter().map(AsRef::as_ref)));
        let total: f64 = ((n - 1)..padded.len())
            .map(|pos| self.prob_ids(padded[pos], &padded[..pos]).ln())
            .sum();
        total / tokens.len() as f64
    }

    pub fn to_json(&self) -> Result<String> {
        let mut ngrams: Vec<(Vec<u32>, u64)> = self
            .counts
            .iter()
            .flat_map(|m| m.iter().map(|(g, &c)| (g.clone(), c)))
            .collect();
        ngrams.sort();
        let file = ModelFile {
            format: FORMAT.into(),
            version: FORMAT_VERSION,
            config: self.config.clone(),
            words: self.words.clone(),
            total: self.total,
            ngrams,
        };
        serde_json::to_string(&file).map_err(|e| Error::InvalidInput(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(s).map_err(|e| Error::InvalidInput(format!("language model: {e}")))?;
        if file.format != FORMAT || file.version != FORMAT_VERSION {
            return Err(Error::InvalidInput(format!(
                "unsupported language model format {} v{}",
                file.format, file.version
            )));
        }
        file.config.validate()?;
        if file.words.len() < 2 || file.words[0] != UNK || file.words[1] != BOS {
            return Err(Error::InvalidInput("language model vocabulary is malformed".into()));
        }
        let mut lm = LanguageModel::empty(file.config, file.words);
        lm.total = file.total;
        for (gram, c) in file.ngrams {
            if gram.is_empty() || gram.len() > lm.config.order || gram.iter().any(|&id| id as usize >= lm.words.len()) {
                return Err(Error::InvalidInput("language model n-gram table is malformed".into()));
            }
            lm.counts[gram.len() - 1].insert(gram, c);
        }
        lm.rebuild_contexts();
        Ok(lm)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&s)
    }
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    config: LmConfig,
    words: Vec<String>,
    total: u64,
    ngrams: Vec<(Vec<u32>, u64)>,
}

/// Unigram, bigram and trigram models trained on the same corpus.
#[derive(Debug, Clone)]
pub struct LmSet {
    pub models: Vec<LanguageModel>,
}

impl LmSet {
    pub fn train(sentences: &[Vec<String>], min_count: u64) -> Result<Self> {
        let models = (1..=3)
            .map(|n| LanguageModel::train(sentences, LmConfig::new(n, min_count)))
            .collect::<Result<_>>()?;
        Ok(LmSet { models })
    }

    /// Score under each model, lowest order first.
    pub fn scores<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<f64> {
        self.models.iter().map(|m| m.score(tokens)).collect()
    }
}

/// Split plain text into tokenized sentences for training.
pub fn corpus_sentences(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .flat_map(crate::corpus::segment_sentences)
        .map(|s| crate::corpus::tokenize(&s))
        .filter(|t| !t.is_empty())
        .collect()
}
