//! Media highlights of political debates.
//!
//! The crate aligns quotations in news articles to debate transcripts, turns
//! the resulting quote counts into speaker- and situation-controlled pairs of
//! highlighted and non-highlighted sentences, predicts highlights with a
//! pairwise logistic ranker over textual features, and summarizes how outlets
//! quote candidates with bipartite-graph statistics.

pub mod corpus;
pub mod error;
pub mod features;
pub mod mediagraph;
pub mod ngramlm;
pub mod pairs;
pub mod pipeline;
pub mod quotematch;
pub mod ranker;
pub mod stats;
pub mod synth;

pub use error::{Error, Result};

use sha2::{Digest, Sha256};

/// First 16 hex digits of the SHA-256 of the newline-joined parts.
pub fn short_hash<'a>(parts: impl IntoIterator<Item = &'a str>) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update(p.as_bytes());
        h.update(b"\n");
    }
    hex::encode(&h.finalize()[..8])
}

/// Stable 64-bit FNV-1a hash, used to derive per-debate random streams.
pub fn stable_hash(s: &str) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in s.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

#[cfg(test)]
pub(crate) mod testutil {
    use chrono::NaiveDate;

    use crate::corpus::{debates_from_records, Debate, DebateType, SpeakerRole, TurnRecord};

    /// A debate from (speaker, text) turns; speaker "MOD" is the moderator.
    pub fn debate(id: &str, turns: &[(&str, &str)]) -> Debate {
        let recs = turns
            .iter()
            .enumerate()
            .map(|(i, (speaker, text))| {
                (
                    i + 1,
                    TurnRecord {
                        debate_id: id.into(),
                        election_year: 2016,
                        debate_type: DebateType::Democratic,
                        date: NaiveDate::from_ymd_opt(2016, 3, 6).unwrap(),
                        speaker: speaker.to_string(),
                        speaker_role: if *speaker == "MOD" {
                            SpeakerRole::Moderator
                        } else {
                            SpeakerRole::Candidate
                        },
                        text: text.to_string(),
                    },
                )
            })
            .collect();
        debates_from_records("test", recs).unwrap().0.remove(0)
    }
}
