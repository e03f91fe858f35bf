use crate::corpus::tokenize;

/// Words ending in "-est" that are not superlatives.
const NOT_SUPERLATIVES: &[&str] = &[
    "arrest", "attest", "behest", "bequest", "conquest", "contest", "detest", "digest",
    "dishonest", "divest", "earnest", "forest", "harvest", "honest", "immodest", "infest",
    "ingest", "inquest", "interest", "invest", "manifest", "midwest", "modest", "molest",
    "northwest", "priest", "protest", "request", "southwest", "suggest", "unrest",
];

const EXPLICIT_SUPERLATIVES: &[&str] = &["most", "least", "worst", "best"];

/// Count superlatives: ASCII words of five or more letters ending in "est"
/// minus a list of false positives, plus most/least/worst/best.
pub fn superlative_count<S: AsRef<str>>(tokens: &[S]) -> usize {
    tokens
        .iter()
        .map(AsRef::as_ref)
        .filter(|t| {
            EXPLICIT_SUPERLATIVES.contains(t)
                || (t.len() >= 5
                    && t.ends_with("est")
                    && t.bytes().all(|b| b.is_ascii_alphabetic())
                    && !NOT_SUPERLATIVES.contains(t))
        })
        .count()
}

/// Length of the longest common subsequence of two token sequences.
pub fn lcs_len<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    if a.is_empty() || b.is_empty() {
        return 0;
    }
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x == y { prev[j] + 1 } else { cur[j].max(prev[j + 1]) };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Mean token-level LCS length over all pairs of sub-sentences split at ',' or ';'.
pub fn parallelism(sentence: &str) -> f64 {
    let parts: Vec<Vec<String>> = sentence
        .split([',', ';'])
        .map(tokenize)
        .filter(|t| !t.is_empty())
        .collect();
    if parts.len() < 2 {
        return 0.0;
    }
    let mut total = 0usize;
    let mut pairs = 0usize;
    for i in 0..parts.len() {
        for j in i + 1..parts.len() {
            total += lcs_len(&parts[i], &parts[j]);
            pairs += 1;
        }
    }
    total as f64 / pairs as f64
}
