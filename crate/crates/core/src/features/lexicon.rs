use std::collections::{HashMap, HashSet};
use std::path::Path;

use crate::corpus::tokenize;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
struct Entry {
    words: Vec<String>,
    /// The last word is a prefix pattern.
    prefix: bool,
}

impl Entry {
    fn matches_at(&self, tokens: &[impl AsRef<str>], at: usize) -> bool {
        if at + self.words.len() > tokens.len() {
            return false;
        }
        let last = self.words.len() - 1;
        self.words.iter().enumerate().all(|(k, w)| {
            let t = tokens[at + k].as_ref();
            if k == last && self.prefix {
                t.starts_with(w.as_str())
            } else {
                t == w
            }
        })
    }
}

/// A word list with prefix wildcards and multiword phrases.
#[derive(Debug, Clone)]
pub struct Lexicon {
    pub name: String,
    entries: Vec<Entry>,
    by_first: HashMap<String, Vec<usize>>,
    /// Single-word prefix patterns.
    prefixes: Vec<usize>,
}

impl Lexicon {
    /// Parse the lexicon file format: one entry per line, `#` comments, a
    /// trailing `*` for prefix matching, spaces for phrases.
    pub fn parse(name: &str, content: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (i, raw) in content.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (body, prefix) = match line.strip_suffix('*') {
                Some(b) => (b, true),
                None => (line, false),
            };
            let words = tokenize(body);
            if words.is_empty() {
                return Err(Error::parse(name, i + 1, format!("empty lexicon pattern `{line}`")));
            }
            entries.push(Entry { words, prefix });
        }
        Ok(Self::from_entries(name, entries))
    }

    fn from_entries(name: &str, mut entries: Vec<Entry>) -> Self {
        entries.dedup();
        // longest phrase wins at a position
        entries.sort_by(|a, b| b.words.len().cmp(&a.words.len()).then_with(|| a.words.cmp(&b.words)));
        let mut by_first: HashMap<String, Vec<usize>> = HashMap::new();
        let mut prefixes = Vec::new();
        for (i, e) in entries.iter().enumerate() {
            if e.prefix && e.words.len() == 1 {
                prefixes.push(i);
            } else {
                by_first.entry(e.words[0].clone()).or_default().push(i);
            }
        }
        Lexicon {
            name: name.to_string(),
            entries,
            by_first,
            prefixes,
        }
    }

    pub fn from_words(name: &str, words: &[&str]) -> Self {
        Self::parse(name, &words.join("\n")).expect("static word list")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let content = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        Self::parse(&name, &content).map_err(|e| match e {
            Error::Parse { line, message, .. } => Error::parse(path, line, message),
            other => other,
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Length of the longest entry matching at `at`, if any.
    fn match_len(&self, tokens: &[impl AsRef<str>], at: usize) -> Option<usize> {
        let first = tokens[at].as_ref();
        let mut best: Option<usize> = None;
        let exact = self.by_first.get(first).into_iter().flatten();
        let prefix = self
            .prefixes
            .iter()
            .filter(|&&i| first.starts_with(self.entries[i].words[0].as_str()));
        for &i in exact.chain(prefix) {
            let e = &self.entries[i];
            if e.matches_at(tokens, at) && best.map_or(true, |b| e.words.len() > b) {
                best = Some(e.words.len());
            }
        }
        best
    }

    /// One matching word per one-word entry: the entry itself, or the bare
    /// stem of a prefix pattern.
    pub fn sample_words(&self) -> Vec<&str> {
        self.entries
            .iter()
            .filter(|e| e.words.len() == 1)
            .map(|e| e.words[0].as_str())
            .collect()
    }

    /// Every word of every entry, phrases and prefixes included.
    pub fn entry_words(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().flat_map(|e| e.words.iter().map(String::as_str))
    }

    /// True if a single token matches some one-word entry.
    pub fn contains_token(&self, token: &str) -> bool {
        self.match_len(&[token], 0) == Some(1)
    }
}

/// Count lexicon hits. Phrase entries consume the tokens they match, so the
/// count never exceeds the number of tokens.
pub fn count_lexicon<S: AsRef<str>>(tokens: &[S], lexicon: &Lexicon) -> usize {
    let mut count = 0;
    let mut i = 0;
    while i < tokens.len() {
        match lexicon.match_len(tokens, i) {
            Some(len) => {
                count += 1;
                i += len;
            }
            None => i += 1,
        }
    }
    count
}

macro_rules! embedded {
    ($file:literal) => {
        include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/lexicons/", $file))
    };
}

pub(crate) const EMBEDDED: &[(&str, &str)] = &[
    ("positive", embedded!("positive.txt")),
    ("negative", embedded!("negative.txt")),
    ("negation", embedded!("negation.txt")),
    ("negative_conj", embedded!("negative_conj.txt")),
    ("hedges", embedded!("hedges.txt")),
    ("pron_i", embedded!("pron_i.txt")),
    ("pron_you", embedded!("pron_you.txt")),
    ("pron_shehe", embedded!("pron_shehe.txt")),
    ("pron_they", embedded!("pron_they.txt")),
    ("pron_we", embedded!("pron_we.txt")),
    ("indefinite", embedded!("indefinite.txt")),
];

const STOPWORDS: &str = embedded!("stopwords.txt");

/// Every lexicon the feature extractor needs.
#[derive(Debug, Clone)]
pub struct LexiconSet {
    pub positive: Lexicon,
    pub negative: Lexicon,
    pub negation: Lexicon,
    pub negative_conj: Lexicon,
    pub hedges: Lexicon,
    pub pron_i: Lexicon,
    pub pron_you: Lexicon,
    pub pron_shehe: Lexicon,
    pub pron_they: Lexicon,
    pub pron_we: Lexicon,
    pub indefinite: Lexicon,
}

impl LexiconSet {
    pub fn embedded() -> Self {
        Self::build(|name, content| Lexicon::parse(name, content)).expect("embedded lexicons parse")
    }

    /// Load `<name>.txt` files from a directory; names without a file use the
    /// embedded default.
    pub fn from_dir(dir: &Path) -> Result<Self> {
        if !dir.is_dir() {
            return Err(Error::InvalidInput(format!("lexicon directory {} not found", dir.display())));
        }
        Self::build(|name, content| {
            let path = dir.join(format!("{name}.txt"));
            if path.exists() {
                Lexicon::load(&path)
            } else {
                log::info!("lexicon {name}: {} missing, using embedded default", path.display());
                Lexicon::parse(name, content)
            }
        })
    }

    fn build(mut load: impl FnMut(&str, &str) -> Result<Lexicon>) -> Result<Self> {
        let mut map = HashMap::new();
        for (name, content) in EMBEDDED {
            map.insert(*name, load(name, content)?);
        }
        let mut take = |n: &str| map.remove(n).expect("known lexicon");
        Ok(LexiconSet {
            positive: take("positive"),
            negative: take("negative"),
            negation: take("negation"),
            negative_conj: take("negative_conj"),
            hedges: take("hedges"),
            pron_i: take("pron_i"),
            pron_you: take("pron_you"),
            pron_shehe: take("pron_shehe"),
            pron_they: take("pron_they"),
            pron_we: take("pron_we"),
            indefinite: take("indefinite"),
        })
    }

    pub fn all(&self) -> [&Lexicon; 11] {
        [
            &self.positive,
            &self.negative,
            &self.negation,
            &self.negative_conj,
            &self.hedges,
            &self.pron_i,
            &self.pron_you,
            &self.pron_shehe,
            &self.pron_they,
            &self.pron_we,
            &self.indefinite,
        ]
    }
}

/// Function words excluded from content-word comparisons.
#[derive(Debug, Clone)]
pub struct Stopwords(HashSet<String>);

impl Stopwords {
    pub fn embedded() -> Self {
        Self::parse(STOPWORDS)
    }

    pub fn parse(content: &str) -> Self {
        Stopwords(
            content
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(str::to_lowercase)
                .collect(),
        )
    }

    pub fn contains(&self, token: &str) -> bool {
        self.0.contains(token)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Content words have at least two characters and are not stopwords.
    pub fn is_content(&self, token: &str) -> bool {
        token.chars().count() >= 2 && !self.contains(token)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn negation_counts() {
        let lex = LexiconSet::embedded();
        assert_eq!(count_lexicon(&["do", "n't", "stop"], &lex.negation), 1);
        assert_eq!(count_lexicon::<&str>(&[], &lex.negation), 0);
        assert_eq!(count_lexicon(&tokenize("We cannot wait, no."), &lex.negation), 2);
    }

    #[test]
    fn prefix_match() {
        let lex = Lexicon::parse("t", "happi*").unwrap();
        assert_eq!(count_lexicon(&["happiest", "day"], &lex), 1);
        assert_eq!(count_lexicon(&["happy", "day"], &lex), 0);
    }

    #[test]
    fn phrases_consume_tokens() {
        let lex = Lexicon::parse("h", "# hedges\nsort of\nsort\ni think\n").unwrap();
        assert_eq!(count_lexicon(&tokenize("It is sort of odd, I think"), &lex), 2);
        assert_eq!(count_lexicon(&tokenize("sort it"), &lex), 1);
    }

    #[test]
    fn entries_are_tokenized_like_text() {
        let lex = Lexicon::parse("n", "don't\nlet's").unwrap();
        assert_eq!(count_lexicon(&tokenize("Don't go, let's stay"), &lex), 2);
    }

    #[test]
    fn empty_pattern_rejected() {
        assert!(Lexicon::parse("x", "ok\n*\n").is_err());
    }

    #[test]
    fn embedded_sets_load() {
        let lex = LexiconSet::embedded();
        assert!(lex.all().iter().all(|l| !l.is_empty()));
        assert_eq!(Stopwords::embedded().len(), 150);
        assert!(lex.negative.contains_token("greed"));
    }

    #[test]
    fn content_words() {
        let sw = Stopwords::embedded();
        assert!(sw.is_content("economy"));
        assert!(!sw.is_content("the"));
        assert!(!sw.is_content("x"));
    }
}
