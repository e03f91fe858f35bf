//! Sentence segmentation and tokenization.

use unicode_normalization::UnicodeNormalization;

/// Abbreviations that never end a sentence.
const ABBREVIATIONS: &[&str] = &["mr.", "mrs.", "dr.", "sen.", "gov.", "u.s.", "st.", "vs."];

const CLITICS: &[&str] = &["s", "re", "ve", "ll", "d", "m"];

pub fn normalize(text: &str) -> String {
    text.nfc().collect()
}

fn is_terminal(c: char) -> bool {
    matches!(c, '.' | '?' | '!')
}

fn is_closer(c: char) -> bool {
    matches!(c, '"' | '\u{201D}' | '\u{2019}' | '\'' | ')' | ']')
}

fn is_opener(c: char) -> bool {
    matches!(c, '"' | '\u{201C}' | '\u{2018}' | '\'' | '(' | '[')
}

fn is_apostrophe(c: char) -> bool {
    matches!(c, '\'' | '\u{2019}')
}

/// Split text into sentences at terminal punctuation followed by whitespace and a
/// capital letter or opening quote.
pub fn segment_sentences(text: &str) -> Vec<String> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut out = Vec::new();
    let mut start = 0usize;
    let mut i = 0usize;
    while i < chars.len() {
        let (_, c) = chars[i];
        if !is_terminal(c) {
            i += 1;
            continue;
        }
        let punct_start = i;
        let mut j = i;
        while j < chars.len() && is_terminal(chars[j].1) {
            j += 1;
        }
        while j < chars.len() && is_closer(chars[j].1) {
            j += 1;
        }
        let run_end = j;
        let mut k = j;
        while k < chars.len() && chars[k].1.is_whitespace() {
            k += 1;
        }
        let boundary = k > run_end
            && k < chars.len()
            && (chars[k].1.is_uppercase() || is_opener(chars[k].1))
            && !ends_with_abbreviation(text, &chars, punct_start);
        if boundary {
            let end_byte = byte_at(&chars, run_end, text.len());
            push_trimmed(&mut out, &text[start..end_byte]);
            start = byte_at(&chars, k, text.len());
            i = k;
        } else {
            i = run_end.max(i + 1);
        }
    }
    push_trimmed(&mut out, &text[start..]);
    out
}

fn byte_at(chars: &[(usize, char)], idx: usize, len: usize) -> usize {
    chars.get(idx).map(|&(b, _)| b).unwrap_or(len)
}

fn push_trimmed(out: &mut Vec<String>, span: &str) {
    let t = span.trim();
    if !t.is_empty() {
        out.push(t.to_string());
    }
}

fn ends_with_abbreviation(text: &str, chars: &[(usize, char)], punct: usize) -> bool {
    if chars[punct].1 != '.' {
        return false;
    }
    let mut w = punct;
    while w > 0 && !chars[w - 1].1.is_whitespace() {
        w -= 1;
    }
    let word_start = chars[w].0;
    let word_end = chars[punct].0 + 1;
    let word = text[word_start..word_end]
        .trim_start_matches(|c: char| is_opener(c))
        .to_lowercase();
    if ABBREVIATIONS.contains(&word.as_str()) {
        return true;
    }
    // single-letter initials such as "John F. Kennedy"
    let mut letters = word.trim_end_matches('.').chars();
    matches!((letters.next(), letters.next()), (Some(c), None) if c.is_alphabetic())
}

/// A token together with its byte span in the (normalized) source text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpannedToken {
    pub text: String,
    pub start: usize,
    pub end: usize,
}

/// Lowercase word tokens. Clitics are split off ("don't" -> "do", "n't";
/// "I've" -> "i", "'ve") and punctuation is dropped.
pub fn tokenize(text: &str) -> Vec<String> {
    tokenize_spans(&normalize(text))
        .into_iter()
        .map(|t| t.text)
        .collect()
}

/// Tokenize already-normalized text, keeping byte offsets.
pub fn tokenize_spans(text: &str) -> Vec<SpannedToken> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        if !chars[i].1.is_alphanumeric() {
            i += 1;
            continue;
        }
        let start = i;
        let mut j = i + 1;
        while j < chars.len() {
            let c = chars[j].1;
            if c.is_alphanumeric() {
                j += 1;
            } else if is_apostrophe(c) && j + 1 < chars.len() && chars[j + 1].1.is_alphanumeric() {
                j += 2;
            } else {
                break;
            }
        }
        push_word(text, &chars[start..j], byte_at(&chars, j, text.len()), &mut out);
        i = j;
    }
    out
}

fn push_word(text: &str, word: &[(usize, char)], end: usize, out: &mut Vec<SpannedToken>) {
    let start = word[0].0;
    let lower: Vec<char> = text[start..end]
        .chars()
        .flat_map(char::to_lowercase)
        .map(|c| if c == '\u{2019}' { '\'' } else { c })
        .collect();
    // Lowercasing can change the char count for a handful of code points; only
    // split clitics when the mapping is one-to-one so byte offsets stay exact.
    let split_at = if lower.len() == word.len() { clitic_split(&lower) } else { None };
    match split_at {
        Some(k) => {
            let mid = word[k].0;
            if k > 0 {
                out.push(SpannedToken {
                    text: lower[..k].iter().collect(),
                    start,
                    end: mid,
                });
            }
            out.push(SpannedToken {
                text: lower[k..].iter().collect(),
                start: mid,
                end,
            });
        }
        None => out.push(SpannedToken {
            text: lower.iter().collect(),
            start,
            end,
        }),
    }
}

/// Char index where a trailing clitic begins, if any.
fn clitic_split(word: &[char]) -> Option<usize> {
    let n = word.len();
    if n >= 3 && word[n - 3..] == ['n', '\'', 't'] {
        return Some(n - 3);
    }
    let apos = word.iter().rposition(|&c| c == '\'')?;
    if apos == 0 {
        return None;
    }
    let suffix: String = word[apos + 1..].iter().collect();
    CLITICS.contains(&suffix.as_str()).then_some(apos)
}
