use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Minimum training-set frequency for a unigram or bigram to enter the vocabulary.
pub const DEFAULT_MIN_COUNT: usize = 5;

/// Unigram and bigram vocabulary built from training sentences only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BowVocabulary {
    pub id: String,
    pub min_count: usize,
    pub ngrams: Vec<String>,
    #[serde(skip)]
    index: HashMap<String, usize>,
}

fn ngrams<S: AsRef<str>>(tokens: &[S]) -> impl Iterator<Item = String> + '_ {
    let uni = tokens.iter().map(|t| t.as_ref().to_string());
    let bi = tokens
        .windows(2)
        .map(|w| format!("{} {}", w[0].as_ref(), w[1].as_ref()));
    uni.chain(bi)
}

impl BowVocabulary {
    pub fn build<'a, I, S>(sentences: I, min_count: usize) -> Self
    where
        I: IntoIterator<Item = &'a [S]>,
        S: AsRef<str> + 'a,
    {
        let mut counts: BTreeMap<String, usize> = BTreeMap::new();
        for s in sentences {
            for g in ngrams(s) {
                *counts.entry(g).or_default() += 1;
            }
        }
        let ngrams: Vec<String> = counts
            .into_iter()
            .filter(|&(_, c)| c >= min_count)
            .map(|(g, _)| g)
            .collect();
        let id = crate::short_hash(ngrams.iter().map(String::as_str).chain([min_count.to_string().as_str()]));
        let mut v = BowVocabulary {
            id,
            min_count,
            ngrams,
            index: HashMap::new(),
        };
        v.reindex();
        v
    }

    pub fn reindex(&mut self) {
        self.index = self
            .ngrams
            .iter()
            .enumerate()
            .map(|(i, g)| (g.clone(), i))
            .collect();
    }

    pub fn len(&self) -> usize {
        self.ngrams.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ngrams.is_empty()
    }

    pub fn feature_names(&self) -> impl Iterator<Item = String> + '_ {
        self.ngrams.iter().map(|g| format!("bow:{g}"))
    }

    /// Sparse counts over the vocabulary; unseen n-grams are ignored.
    pub fn counts<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<(usize, f64)> {
        let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
        for g in ngrams(tokens) {
            if let Some(&i) = self.index.get(&g) {
                *acc.entry(i).or_default() += 1.0;
            }
        }
        acc.into_iter().collect()
    }

    /// Like [`counts`](Self::counts), but refuses a vocabulary other than the
    /// one the caller's schema was built with.
    pub fn apply<S: AsRef<str>>(&self, tokens: &[S], expected_id: &str) -> Result<Vec<(usize, f64)>> {
        if self.id != expected_id {
            return Err(Error::SchemaMismatch {
                expected: expected_id.to_string(),
                found: self.id.clone(),
            });
        }
        Ok(self.counts(tokens))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sents(lines: &[&str]) -> Vec<Vec<String>> {
        lines
            .iter()
            .map(|l| l.split_whitespace().map(str::to_string).collect())
            .collect()
    }

    #[test]
    fn frequency_threshold() {
        let mut lines = vec!["tax cut"; 5];
        lines.extend(["jobs"; 4]);
        let data = sents(&lines);
        let v = BowVocabulary::build(data.iter().map(Vec::as_slice), 5);
        assert_eq!(v.ngrams, vec!["cut", "tax", "tax cut"]);
        assert!(!v.ngrams.contains(&"jobs".to_string()));
    }

    #[test]
    fn unseen_ngrams_contribute_nothing() {
        let data = sents(&["a b"; 5]);
        let v = BowVocabulary::build(data.iter().map(Vec::as_slice), 5);
        assert_eq!(v.counts(&["a", "b", "a", "zz"]), vec![(0, 2.0), (1, 1.0), (2, 1.0)]);
        assert!(v.counts(&["zz", "yy"]).is_empty());
    }

    #[test]
    fn foreign_vocabulary_rejected() {
        let a = BowVocabulary::build(sents(&["a b"; 5]).iter().map(Vec::as_slice), 5);
        let b = BowVocabulary::build(sents(&["c d"; 5]).iter().map(Vec::as_slice), 5);
        assert!(a.apply(&["a"], &a.id).is_ok());
        assert!(matches!(b.apply(&["a"], &a.id), Err(Error::SchemaMismatch { .. })));
    }
}
