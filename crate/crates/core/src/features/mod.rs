//! Sentence features and pair difference vectors.
//!
//! A [`Featurizer`] owns everything needed to turn a sentence into a
//! [`FeatureVector`]: lexicons, optional language models, the flow-window
//! configuration and an optional bag-of-words vocabulary. The concatenation of
//! those pieces defines the feature schema; its hash travels with every vector
//! so vectors from different configurations are never mixed.

mod bow;
mod flow;
mod lexicon;
mod style;

use serde::{Deserialize, Serialize};

use crate::corpus::{Debate, Sentence};
use crate::error::{Error, Result};
use crate::ngramlm::LmSet;
use crate::pairs::{Pair, PairMember};

pub use bow::{BowVocabulary, DEFAULT_MIN_COUNT as BOW_MIN_COUNT};
pub use flow::{flow_feature_name, jaccard, jaccard_window, FlowConfig, FlowContext, Scope};
pub use lexicon::{count_lexicon, Lexicon, LexiconSet, Stopwords};
pub use style::{lcs_len, parallelism, superlative_count};

/// Lexical count features, in schema order.
pub const COUNT_FEATURES: [&str; 12] = [
    "posemo",
    "negemo",
    "negation",
    "negative_conj",
    "pron_i",
    "pron_you",
    "pron_shehe",
    "pron_they",
    "pron_we",
    "hedges",
    "superlatives",
    "indefinite_articles",
];

pub const LM_FEATURES: [&str; 3] = ["lm_unigram", "lm_bigram", "lm_trigram"];

/// Sentence-alone features with raw counts, in schema order.
pub fn sentence_alone_names() -> Vec<String> {
    let mut names = vec!["length".to_string()];
    names.extend(COUNT_FEATURES.iter().map(|s| s.to_string()));
    names.extend(LM_FEATURES.iter().map(|s| s.to_string()));
    names.push("parallelism".into());
    names
}

/// Per-token variants of the count features.
pub fn normalized_names() -> Vec<String> {
    COUNT_FEATURES.iter().map(|s| format!("{s}_per_token")).collect()
}

/// The default significance-test battery: the 17 sentence-alone features and
/// three immediate-neighbor flow features.
pub fn default_battery() -> Vec<String> {
    let mut names = sentence_alone_names();
    names.extend(
        ["jaccard_self_prev_1", "jaccard_self_post_1", "jaccard_other_post_1"]
            .iter()
            .map(|s| s.to_string()),
    );
    names
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSchema {
    pub id: String,
    pub names: Vec<String>,
}

impl FeatureSchema {
    pub fn new(names: Vec<String>) -> Self {
        FeatureSchema {
            id: crate::short_hash(names.iter().map(String::as_str)),
            names,
        }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub schema_id: String,
    pub values: Vec<f64>,
}

impl FeatureVector {
    /// `self - other`, refusing vectors from different schemas.
    pub fn diff(&self, other: &FeatureVector) -> Result<Vec<f64>> {
        if self.schema_id != other.schema_id {
            return Err(Error::SchemaMismatch {
                expected: self.schema_id.clone(),
                found: other.schema_id.clone(),
            });
        }
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect())
    }
}

fn sentence_alone_values(tokens: &[String], text: &str, lex: &LexiconSet, lms: Option<&LmSet>) -> Vec<f64> {
    let counts = [
        count_lexicon(tokens, &lex.positive),
        count_lexicon(tokens, &lex.negative),
        count_lexicon(tokens, &lex.negation),
        count_lexicon(tokens, &lex.negative_conj),
        count_lexicon(tokens, &lex.pron_i),
        count_lexicon(tokens, &lex.pron_you),
        count_lexicon(tokens, &lex.pron_shehe),
        count_lexicon(tokens, &lex.pron_they),
        count_lexicon(tokens, &lex.pron_we),
        count_lexicon(tokens, &lex.hedges),
        superlative_count(tokens),
        count_lexicon(tokens, &lex.indefinite),
    ];
    let mut v = Vec::with_capacity(17 + counts.len());
    v.push(tokens.len() as f64);
    v.extend(counts.iter().map(|&c| c as f64));
    match lms {
        Some(lms) if !tokens.is_empty() => {
            let mut s = lms.scores(tokens);
            s.resize(3, 0.0);
            v.extend(s);
        }
        _ => v.extend([0.0; 3]),
    }
    v.push(parallelism(text));
    let len = tokens.len().max(1) as f64;
    v.extend(counts.iter().map(|&c| c as f64 / len));
    v
}

/// Sentence-alone features: raw values followed by per-token count variants.
/// Without language models the LM scores are 0.
pub fn sentence_features(sentence: &Sentence, lexicons: &LexiconSet, lms: Option<&LmSet>) -> FeatureVector {
    let schema = sentence_schema();
    FeatureVector {
        schema_id: schema.id,
        values: sentence_alone_values(&sentence.tokens, &sentence.text, lexicons, lms),
    }
}

pub fn sentence_schema() -> FeatureSchema {
    let mut names = sentence_alone_names();
    names.extend(normalized_names());
    FeatureSchema::new(names)
}

/// Full feature extractor for pairs of debate sentences.
#[derive(Debug, Clone)]
pub struct Featurizer {
    pub lexicons: LexiconSet,
    pub stopwords: Stopwords,
    pub lms: Option<LmSet>,
    pub flow: FlowConfig,
    pub bow: Option<BowVocabulary>,
    schema: FeatureSchema,
}

impl Featurizer {
    pub fn new(
        lexicons: LexiconSet,
        stopwords: Stopwords,
        lms: Option<LmSet>,
        flow: FlowConfig,
        bow: Option<BowVocabulary>,
    ) -> Result<Self> {
        flow.validate()?;
        let mut names = sentence_alone_names();
        names.extend(normalized_names());
        names.extend(flow.feature_names());
        if let Some(v) = &bow {
            names.extend(v.feature_names());
        }
        Ok(Featurizer {
            lexicons,
            stopwords,
            lms,
            flow,
            bow,
            schema: FeatureSchema::new(names),
        })
    }

    pub fn schema(&self) -> &FeatureSchema {
        &self.schema
    }

    /// Bag-of-words counts, checked against this featurizer's vocabulary.
    pub fn apply_bow<S: AsRef<str>>(&self, tokens: &[S], vocab: &BowVocabulary) -> Result<Vec<(usize, f64)>> {
        let expected = self
            .bow
            .as_ref()
            .map(|v| v.id.as_str())
            .ok_or_else(|| Error::InvalidInput("featurizer has no bag-of-words vocabulary".into()))?;
        vocab.apply(tokens, expected)
    }

    fn vector(&self, tokens: &[String], text: &str, flow: impl Fn(i32, Scope) -> f64) -> FeatureVector {
        let mut values = sentence_alone_values(tokens, text, &self.lexicons, self.lms.as_ref());
        for &scope in &self.flow.scopes {
            for &w in &self.flow.windows {
                values.push(flow(w, scope));
            }
        }
        if let Some(v) = &self.bow {
            let base = values.len();
            values.resize(base + v.len(), 0.0);
            for (i, c) in v.counts(tokens) {
                values[base + i] = c;
            }
        }
        FeatureVector {
            schema_id: self.schema.id.clone(),
            values,
        }
    }

    /// Features of a sentence in the context of its debate.
    pub fn featurize(&self, ctx: &FlowContext<'_>, sentence: &Sentence) -> FeatureVector {
        // FlowContext borrows with the debate's lifetime; recompute the
        // sentence's own content set locally.
        let own: std::collections::BTreeSet<&str> = sentence
            .tokens
            .iter()
            .map(String::as_str)
            .filter(|w| self.stopwords.is_content(w))
            .collect();
        self.vector(&sentence.tokens, &sentence.text, |w, scope| {
            jaccard(&own, &ctx.window_words(sentence, w, scope))
        })
    }

    fn member_vector(&self, debate: &Debate, ctx: &FlowContext<'_>, m: &PairMember) -> Result<FeatureVector> {
        let sentence = debate
            .sentence(m.turn_index, m.sentence_index)
            .filter(|s| s.id == m.sentence_id)
            .ok_or_else(|| Error::InvalidInput(format!("sentence `{}` not found in debate `{}`", m.sentence_id, debate.id)))?;
        Ok(self.featurize(ctx, sentence))
    }

    /// Difference vector `features(first) - features(second)` and label
    /// (true when the first sentence is the highlight).
    pub fn pair_diff(&self, pair: &Pair, debate: &Debate, ctx: &FlowContext<'_>) -> Result<(Vec<f64>, bool)> {
        if pair.debate_id != debate.id {
            return Err(Error::InvalidInput(format!(
                "pair `{}` belongs to debate `{}`, not `{}`",
                pair.id, pair.debate_id, debate.id
            )));
        }
        let a = self.member_vector(debate, ctx, &pair.first)?;
        let b = self.member_vector(debate, ctx, &pair.second)?;
        Ok((a.diff(&b)?, pair.first_is_highlight()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::tokenize;

    fn sentence(text: &str) -> Sentence {
        Sentence {
            id: "d:0:0".into(),
            text: text.into(),
            tokens: tokenize(text),
            turn_index: 0,
            sentence_index: 0,
        }
    }

    fn value(v: &FeatureVector, name: &str) -> f64 {
        v.values[sentence_schema().index_of(name).unwrap()]
    }

    #[test]
    fn empty_sentence_is_all_zero() {
        let v = sentence_features(&sentence(""), &LexiconSet::embedded(), None);
        assert!(v.values.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn hand_counted_sentence() {
        let v = sentence_features(&sentence("We cannot wait."), &LexiconSet::embedded(), None);
        assert_eq!(value(&v, "pron_we"), 1.0);
        assert_eq!(value(&v, "negation"), 1.0);
        assert_eq!(value(&v, "length"), 3.0);
        assert_eq!(value(&v, "negation_per_token"), 1.0 / 3.0);
    }

    #[test]
    fn length_feature() {
        let text = "one two three four five six seven eight nine ten eleven twelve thirteen fourteen fifteen sixteen";
        let v = sentence_features(&sentence(text), &LexiconSet::embedded(), None);
        assert_eq!(value(&v, "length"), 16.0);
    }

    #[test]
    fn battery_has_twenty_features() {
        let b = default_battery();
        assert_eq!(b.len(), 20);
        let f = Featurizer::new(LexiconSet::embedded(), Stopwords::embedded(), None, FlowConfig::default(), None).unwrap();
        assert!(b.iter().all(|n| f.schema().index_of(n).is_some()));
        assert_eq!(f.schema().len(), 17 + 12 + 20);
    }

    #[test]
    fn schema_mismatch_is_error() {
        let a = FeatureVector { schema_id: "a".into(), values: vec![1.0] };
        let b = FeatureVector { schema_id: "b".into(), values: vec![1.0] };
        assert!(a.diff(&b).is_err());
    }

    #[test]
    fn counts_never_exceed_length() {
        let lex = LexiconSet::embedded();
        let text = "I think I think we, they, you, he and she are not the best but a worse no-good sort of kind of lot";
        let v = sentence_features(&sentence(text), &lex, None);
        let len = value(&v, "length");
        for name in COUNT_FEATURES {
            let c = value(&v, name);
            assert!(c >= 0.0 && c <= len, "{name}={c}");
        }
    }
}
