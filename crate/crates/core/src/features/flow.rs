use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::lexicon::Stopwords;
use crate::corpus::{Debate, Sentence};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scope {
    /// Turns by the sentence's own speaker.
    #[serde(rename = "self")]
    Own,
    /// Turns by anyone else, moderators included.
    Other,
}

impl Scope {
    pub fn as_str(self) -> &'static str {
        match self {
            Scope::Own => "self",
            Scope::Other => "other",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FlowConfig {
    /// Signed turn windows; negative looks back, positive looks ahead.
    pub windows: Vec<i32>,
    pub scopes: Vec<Scope>,
}

impl Default for FlowConfig {
    fn default() -> Self {
        FlowConfig {
            windows: (-5..=-1).chain(1..=5).collect(),
            scopes: vec![Scope::Own, Scope::Other],
        }
    }
}

impl FlowConfig {
    pub fn validate(&self) -> Result<()> {
        if self.windows.contains(&0) {
            return Err(Error::InvalidInput("flow window 0 is not allowed".into()));
        }
        Ok(())
    }

    pub fn feature_names(&self) -> Vec<String> {
        let mut names = Vec::new();
        for &scope in &self.scopes {
            for &w in &self.windows {
                names.push(flow_feature_name(scope, w));
            }
        }
        names
    }
}

pub fn flow_feature_name(scope: Scope, w: i32) -> String {
    let dir = if w < 0 { "prev" } else { "post" };
    format!("jaccard_{}_{}_{}", scope.as_str(), dir, w.unsigned_abs())
}

/// |a ∩ b| / |a ∪ b|, or 0 when either set is empty.
pub fn jaccard<T: Ord>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> f64 {
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let inter = a.intersection(b).count();
    inter as f64 / (a.len() + b.len() - inter) as f64
}

/// Content-word sets per turn, for computing many windows over one debate.
pub struct FlowContext<'a> {
    debate: &'a Debate,
    stopwords: &'a Stopwords,
    turn_words: Vec<BTreeSet<&'a str>>,
}

impl<'a> FlowContext<'a> {
    pub fn new(debate: &'a Debate, stopwords: &'a Stopwords) -> Self {
        let turn_words = debate
            .turns
            .iter()
            .map(|t| t.tokens().filter(|w| stopwords.is_content(w)).collect())
            .collect();
        FlowContext {
            debate,
            stopwords,
            turn_words,
        }
    }

    pub fn content_words(&self, sentence: &'a Sentence) -> BTreeSet<&'a str> {
        sentence
            .tokens
            .iter()
            .map(String::as_str)
            .filter(|w| self.stopwords.is_content(w))
            .collect()
    }

    /// Content words of the |w| nearest turns before (w < 0) or after (w > 0)
    /// the sentence's turn, restricted by speaker scope.
    pub fn window_words(&self, sentence: &Sentence, w: i32, scope: Scope) -> BTreeSet<&'a str> {
        let turn = sentence.turn_index;
        let speaker = &self.debate.turns[turn].speaker;
        let keep = |i: &usize| {
            let same = &self.debate.turns[*i].speaker == speaker;
            match scope {
                Scope::Own => same,
                Scope::Other => !same,
            }
        };
        let n = w.unsigned_abs() as usize;
        let picked: Vec<usize> = if w < 0 {
            (0..turn).rev().filter(keep).take(n).collect()
        } else {
            (turn + 1..self.debate.turns.len()).filter(keep).take(n).collect()
        };
        picked
            .into_iter()
            .flat_map(|i| self.turn_words[i].iter().copied())
            .collect()
    }

    pub fn jaccard(&self, sentence: &'a Sentence, w: i32, scope: Scope) -> f64 {
        jaccard(&self.content_words(sentence), &self.window_words(sentence, w, scope))
    }
}

/// Jaccard similarity between a sentence's content words and the content
/// words of its neighboring turns.
pub fn jaccard_window(sentence: &Sentence, debate: &Debate, w: i32, scope: Scope, stopwords: &Stopwords) -> f64 {
    assert!(w != 0, "window must be nonzero");
    FlowContext::new(debate, stopwords).jaccard(sentence, w, scope)
}
